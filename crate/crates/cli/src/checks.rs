//! Check bodies for the surface suites: recurrence structure, operator
//! identities, the Killing equation, the special regime, and the moduli
//! algebra.

use crate::{CheckDef, CheckOutcome, RunCtx};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewricci_core::catalog::{catalog_entry, nabla_ab, CatalogEntry};
use skewricci_core::expr::Ex;
use skewricci_core::jets::jet_lift;
use skewricci_core::moduli_special as moduli;
use skewricci_core::randfields::{
    random_poly_one_form, random_poly_sym2, random_poly_vector, random_smooth_expr,
};
use skewricci_core::surface_rsts::{
    self, killing_identity_residuals, killing_l, phi_tensor_squared, recurrence_data,
    recurrence_residuals, second_derivative_residual, Regime, RstsData, SurfJets,
};
use skewricci_core::tensorfield::{
    cov_deriv_one_form, cov_deriv_vector, curvature_jets, divergence_jets, exterior_one_form,
    lie_bracket_jets, lie_two_tensor, ricci_jets, TensorField,
};

pub(crate) struct ErrAcc {
    max: f64,
}

impl ErrAcc {
    pub fn new() -> ErrAcc {
        ErrAcc { max: 0.0 }
    }

    /// Scaled difference: |a - b| / (1 + max(|a|, |b|)).
    pub fn diff(&mut self, a: f64, b: f64) {
        self.max = self.max.max((a - b).abs() / (1.0 + a.abs().max(b.abs())));
    }

    /// Raw value that should be zero, already scaled by the caller.
    pub fn raw(&mut self, v: f64) {
        self.max = self.max.max(v.abs());
    }

    /// Shortfall: `v` must stay at or above `bound`.
    pub fn at_least(&mut self, v: f64, bound: f64) {
        self.max = self.max.max((bound - v).max(0.0));
    }

    pub fn value(&self) -> f64 {
        self.max
    }
}

pub(crate) fn entry(id: &str) -> Result<CatalogEntry, String> {
    catalog_entry(id).map_err(|e| e.to_string())
}

pub(crate) fn rsts_for(id: &str, samples: usize, seed: u64) -> Result<RstsData, String> {
    let e = entry(id)?;
    recurrence_data(&e.conn, samples.clamp(10, 50), seed).map_err(|e| e.to_string())
}

fn add(
    defs: &mut Vec<CheckDef>,
    suite: &'static str,
    id: String,
    anchor: &str,
    threshold: f64,
    run: impl Fn(&RunCtx) -> Result<CheckOutcome, String> + Send + Sync + 'static,
) {
    defs.push(CheckDef {
        id,
        anchor: anchor.to_string(),
        suite,
        threshold,
        run: Box::new(run),
    });
}

fn is_special(id: &str) -> bool {
    matches!(id, "nabla_ab:-9,0" | "nabla_ab:0,-15" | "nvv")
}

fn family_params(id: &str) -> Option<(f64, f64)> {
    let ab = id.strip_prefix("nabla_ab:")?;
    let mut it = ab.split(',');
    let a = it.next()?.trim().parse().ok()?;
    let b = it.next()?.trim().parse().ok()?;
    Some((a, b))
}

pub fn register(defs: &mut Vec<CheckDef>, catalog: &[String]) {
    register_rsts_core(defs, catalog);
    register_killing(defs, catalog);
    register_special(defs, catalog);
    register_moduli(defs);
}

// ---------------------------------------------------------------------------
// rsts-core

fn register_rsts_core(defs: &mut Vec<CheckDef>, catalog: &[String]) {
    for cid in catalog {
        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.gate/{cid}"),
            "rho skew-symmetric and nonzero",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let seed = ctx.check_seed(&id);
                let pts = e.conn.chart.sample(ctx.samples, seed).map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let rho = skewricci_core::tensorfield::ricci(&e.conn, p)
                        .map_err(|e| e.to_string())?;
                    let scale = 1.0 + rho.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
                    acc.raw(rho[0][0].abs() / scale);
                    acc.raw(rho[1][1].abs() / scale);
                    acc.raw((rho[0][1] + rho[1][0]).abs() / scale);
                    // margin on |rho_12|
                    acc.at_least(rho[0][1].abs() / scale, 1e-6);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.rec/{cid}"),
            "D rho = phi x rho; phi = rho(w,.); phi(w) = 0; d phi = 2 rho",
            1e-8,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed(&id) ^ 1)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    for r in recurrence_residuals(&d, p).map_err(|e| e.to_string())? {
                        acc.raw(r);
                    }
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.div-w/{cid}"),
            "div w = 2",
            1e-8,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed(&id) ^ 2)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let g = d.conn.gamma_jets(p, 3).map_err(|e| e.to_string())?;
                    let w = d.w.vector_jets(p, 3).map_err(|e| e.to_string())?;
                    acc.diff(divergence_jets(&g, &w).value(), 2.0);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.dfr/{cid}"),
            "d[rho(v,.)] = [div v + phi(v)] rho",
            1e-8,
            move |ctx| {
                let seed = ctx.check_seed(&id);
                let d = rsts_for(&id, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample(ctx.samples, seed ^ 3)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let v = random_poly_vector(&d.conn.chart, &mut rng, 3);
                    let s = SurfJets::new(&d.conn, p, 3).map_err(|e| e.to_string())?;
                    let vj = v.vector_jets(p, 3).map_err(|e| e.to_string())?;
                    let rho_v = [
                        vj[0].mul(&s.rho[0][0]) + vj[1].mul(&s.rho[1][0]),
                        vj[0].mul(&s.rho[0][1]) + vj[1].mul(&s.rho[1][1]),
                    ];
                    let lhs = exterior_one_form(&rho_v);
                    let coef = divergence_jets(&s.gamma, &vj)
                        + s.phi[0].mul(&vj[0])
                        + s.phi[1].mul(&vj[1]);
                    acc.diff(lhs[0][1].value(), coef.value() * s.rho[0][1].value());
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.tr-q/{cid}"),
            "tr Q = 10",
            1e-8,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed(&id) ^ 5)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let q = surface_rsts::q_endomorphism(&d, p).map_err(|e| e.to_string())?;
                    acc.diff(q.trace, 10.0);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.bochner/{cid}"),
            "rho(.,w) = div[D w] - d[div w]",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let seed = ctx.check_seed(&id);
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, seed ^ 6)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 7);
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let wf = random_poly_vector(&e.conn.chart, &mut rng, 3);
                    let g = e.conn.gamma_jets(p, 3).map_err(|e| e.to_string())?;
                    let rho = ricci_jets(&curvature_jets(&g));
                    let wj = wf.vector_jets(p, 3).map_err(|e| e.to_string())?;
                    let dw = cov_deriv_vector(&g, &wj);
                    for j in 0..2 {
                        let mut lhs = 0.0;
                        for k in 0..2 {
                            lhs += rho[j][k].value() * wj[k].value();
                        }
                        let mut divm = 0.0;
                        for k in 0..2 {
                            let mut t = dw[k][j].derivative(k).value();
                            for m in 0..2 {
                                t += g[k][k][m].value() * dw[m][j].value()
                                    - g[m][k][j].value() * dw[k][m].value();
                            }
                            divm += t;
                        }
                        let rhs = divm - divergence_jets(&g, &wj).derivative(j).value();
                        acc.diff(lhs, rhs);
                    }
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.torsion/{cid}"),
            "G^l_jk = G^l_kj; frame round trip",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples.min(40), ctx.check_seed(&id))
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    if let Some(fc) = &e.frame {
                        acc.raw(fc.bracket_residual(p).map_err(|e| e.to_string())?);
                        acc.raw(
                            fc.round_trip_residual(&e.conn, p)
                                .map_err(|e| e.to_string())?,
                        );
                        acc.at_least(fc.frame_det(p).abs(), 1e-6);
                    }
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.bianchi/{cid}"),
            "cyclic sum of R(u,v)v' vanishes",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed(&id))
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let r = skewricci_core::tensorfield::curvature(&e.conn, p)
                        .map_err(|e| e.to_string())?;
                    let scale =
                        1.0 + r.iter().flatten().flatten().flatten().fold(0.0f64, |a, b| {
                            a.max(b.abs())
                        });
                    for j in 0..2 {
                        for k in 0..2 {
                            for s in 0..2 {
                                for l in 0..2 {
                                    acc.raw(
                                        (r[j][k][s][l] + r[k][s][j][l] + r[s][j][k][l]).abs()
                                            / scale,
                                    );
                                }
                            }
                        }
                    }
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.ext-two-routes/{cid}"),
            "d beta via coordinates = covariant route",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let seed = ctx.check_seed(&id);
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, seed)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 8);
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let beta = random_poly_one_form(&e.conn.chart, &mut rng, 3);
                    let g = e.conn.gamma_jets(p, 2).map_err(|e| e.to_string())?;
                    let bj = beta.one_form_jets(p, 2).map_err(|e| e.to_string())?;
                    let coord = exterior_one_form(&bj);
                    let cov = cov_deriv_one_form(&g, &bj);
                    acc.diff(coord[0][1].value(), cov[0][1].value() - cov[1][0].value());
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "rsts-core",
            format!("rsts-core.lie-two-form/{cid}"),
            "L_v zeta = d[zeta(v,.)]",
            1e-8,
            move |ctx| {
                let e = entry(&id)?;
                let seed = ctx.check_seed(&id);
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, seed)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 9);
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let v = random_poly_vector(&e.conn.chart, &mut rng, 2);
                    let zscalar = skewricci_core::randfields::random_poly_scalar(&mut rng, 2);
                    let vj = v.vector_jets(p, 2).map_err(|e| e.to_string())?;
                    let z01 = jet_lift(&zscalar, p, 2).map_err(|e| e.to_string())?;
                    let zero = jet_lift(&Ex::zero(), p, 2).map_err(|e| e.to_string())?;
                    let zeta = [[zero.clone(), z01.clone()], [-&z01, zero]];
                    let lie = lie_two_tensor(&vj, &zeta);
                    let iv = [
                        vj[0].mul(&zeta[0][0]) + vj[1].mul(&zeta[1][0]),
                        vj[0].mul(&zeta[0][1]) + vj[1].mul(&zeta[1][1]),
                    ];
                    let dv = exterior_one_form(&iv);
                    acc.diff(lie[0][1].value(), dv[0][1].value());
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        // identities specific to the left-invariant family
        if let Some((a, b)) = family_params(cid) {
            let id = cid.clone();
            add(
                defs,
                "rsts-core",
                format!("rsts-core.ruw/{cid}"),
                "rho(u,w) = 6; phi(u) = -6; phi(w) = 0",
                1e-9,
                move |ctx| {
                    let fc = nabla_ab(a, b).map_err(|e| e.to_string())?;
                    let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                    let pts = fc
                        .chart
                        .sample(ctx.samples, ctx.check_seed(&id) ^ 10)
                        .map_err(|e| e.to_string())?;
                    let mut acc = ErrAcc::new();
                    for p in &pts {
                        let rho = skewricci_core::tensorfield::ricci(&d.conn, p)
                            .map_err(|e| e.to_string())?;
                        let u = [fc.frame[0][0].eval(p), fc.frame[0][1].eval(p)];
                        let w = [fc.frame[1][0].eval(p), fc.frame[1][1].eval(p)];
                        let mut ruw = 0.0;
                        let mut phiu = 0.0;
                        let mut phiw = 0.0;
                        for j in 0..2 {
                            phiu += d.phi.comps[j].eval(p) * u[j];
                            phiw += d.phi.comps[j].eval(p) * w[j];
                            for k in 0..2 {
                                ruw += rho[j][k] * u[j] * w[k];
                            }
                        }
                        acc.diff(ruw, 6.0);
                        acc.diff(phiu, -6.0);
                        acc.raw(phiw.abs() / 7.0);
                    }
                    Ok(CheckOutcome {
                        samples: pts.len(),
                        max_err: acc.value(),
                    })
                },
            );

            let id = cid.clone();
            add(
                defs,
                "rsts-core",
                format!("rsts-core.riv/{cid}"),
                "d(f^s phi) = 2(1-s) f^s rho for s in {0,1,2}",
                1e-8,
                move |ctx| {
                    let fc = nabla_ab(a, b).map_err(|e| e.to_string())?;
                    let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                    let f = fc.scalar("f").unwrap().clone();
                    let pts = fc
                        .chart
                        .sample(ctx.samples, ctx.check_seed(&id) ^ 11)
                        .map_err(|e| e.to_string())?;
                    let mut acc = ErrAcc::new();
                    for p in &pts {
                        let s = SurfJets::new(&d.conn, p, 3).map_err(|e| e.to_string())?;
                        let fj = jet_lift(&f, p, 3).map_err(|e| e.to_string())?;
                        for spow in 0..3i32 {
                            let fs = fj.powi(spow);
                            let form = [fs.mul(&s.phi[0]), fs.mul(&s.phi[1])];
                            let lhs = exterior_one_form(&form);
                            let rhs = 2.0 * (1.0 - spow as f64) * fs.value()
                                * s.rho[0][1].value();
                            acc.diff(lhs[0][1].value(), rhs);
                        }
                    }
                    Ok(CheckOutcome {
                        samples: pts.len(),
                        max_err: acc.value(),
                    })
                },
            );

            let id = cid.clone();
            add(
                defs,
                "rsts-core",
                format!("rsts-core.vot/{cid}"),
                "[v1,v2] = 2 v1; L_u(f rho) = L_w(f rho) = 0",
                1e-8,
                move |ctx| {
                    let fc = nabla_ab(a, b).map_err(|e| e.to_string())?;
                    let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                    let f = fc.scalar("f").unwrap().clone();
                    let psi = fc.scalar("psi").unwrap().clone();
                    // v1 = f^{-1} u, v2 = f^{-1} psi u - w in chart components
                    let u0 = fc.frame[0][0].clone();
                    let u1 = fc.frame[0][1].clone();
                    let v1 = [u0.clone() / f.clone(), u1.clone() / f.clone()];
                    let v2 = [
                        psi.clone() * u0 / f.clone() - fc.frame[1][0].clone(),
                        psi.clone() * u1 / f.clone() - fc.frame[1][1].clone(),
                    ];
                    let pts = fc
                        .chart
                        .sample(ctx.samples, ctx.check_seed(&id) ^ 12)
                        .map_err(|e| e.to_string())?;
                    let mut acc = ErrAcc::new();
                    for p in &pts {
                        // 3 d psi = -f phi
                        let s = SurfJets::new(&d.conn, p, 3).map_err(|e| e.to_string())?;
                        let fj = jet_lift(&f, p, 3).map_err(|e| e.to_string())?;
                        for j in 0..2 {
                            let dpsi = jet_lift(&psi, p, 3)
                                .map_err(|e| e.to_string())?
                                .derivative(j);
                            acc.diff(3.0 * dpsi.value(), -fj.value() * s.phi[j].value());
                        }
                        let lift =
                            |c: &[Ex; 2]| -> Result<[skewricci_core::jets::Jet; 2], String> {
                                Ok([
                                    jet_lift(&c[0], p, 3).map_err(|e| e.to_string())?,
                                    jet_lift(&c[1], p, 3).map_err(|e| e.to_string())?,
                                ])
                            };
                        let v1j = lift(&v1)?;
                        let v2j = lift(&v2)?;
                        let br = lie_bracket_jets(&v1j, &v2j);
                        for m in 0..2 {
                            acc.diff(br[m].value(), 2.0 * v1j[m].value());
                        }
                        // f rho is preserved by the frame flows, and the
                        // right-invariant fields commute with the frame
                        let frho = [
                            [fj.mul(&s.rho[0][0]), fj.mul(&s.rho[0][1])],
                            [fj.mul(&s.rho[1][0]), fj.mul(&s.rho[1][1])],
                        ];
                        let uj = lift(&[fc.frame[0][0].clone(), fc.frame[0][1].clone()])?;
                        let wj = lift(&[fc.frame[1][0].clone(), fc.frame[1][1].clone()])?;
                        for field in [&uj, &wj] {
                            let lie = lie_two_tensor(field, &frho);
                            acc.raw(lie[0][1].value().abs() / (1.0 + frho[0][1].value().abs()));
                            for vrt in [&v1j, &v2j] {
                                let com = lie_bracket_jets(field, vrt);
                                acc.raw(com[0].value().abs());
                                acc.raw(com[1].value().abs());
                            }
                        }
                    }
                    Ok(CheckOutcome {
                        samples: pts.len(),
                        max_err: acc.value(),
                    })
                },
            );
        }
    }

    // canonical-potential form
    add(
        defs,
        "rsts-core",
        "rsts-core.wong".to_string(),
        "rho_12 = -d1 d2 potential",
        1e-10,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for (expr, want) in [("y1*y2", -1.0), ("y1*y2 + y1^2", -1.0)] {
                let e = entry(&format!("wong:{expr}"))?;
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed("wong"))
                    .map_err(|e| e.to_string())?;
                for p in &pts {
                    let rho =
                        skewricci_core::tensorfield::ricci(&e.conn, p).map_err(|e| e.to_string())?;
                    acc.diff(rho[0][1], want);
                    acc.diff(rho[1][0], -want);
                }
                n += pts.len();
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    // Z(phi x phi) = 15 phi / 2 on the (1,0) member
    add(
        defs,
        "rsts-core",
        "rsts-core.zff".to_string(),
        "Z(phi x phi) = 15 phi / 2",
        1e-7,
        move |ctx| {
            let d = rsts_for("nabla_ab:1,0", ctx.samples, ctx.check_seed("zff"))?;
            let tau = phi_tensor_squared(&d);
            let pts = d
                .conn
                .chart
                .sample(ctx.samples, ctx.check_seed("zff") ^ 13)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let z = surface_rsts::z_operator(&d, &tau, p).map_err(|e| e.to_string())?;
                for j in 0..2 {
                    acc.diff(z[j], 7.5 * d.phi.comps[j].eval(p));
                }
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    // plane realization specifics
    add(
        defs,
        "rsts-core",
        "rsts-core.slsgp".to_string(),
        "rho((0,1),(1,0)) = 3; w = 0 on the axis",
        1e-9,
        move |ctx| {
            let e = entry("slsgp")?;
            let d = rsts_for("slsgp", ctx.samples, ctx.check_seed("slsgp"))?;
            let pts = e
                .conn
                .chart
                .sample(ctx.samples, ctx.check_seed("slsgp") ^ 14)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let rho = skewricci_core::tensorfield::ricci(&e.conn, p).map_err(|e| e.to_string())?;
                acc.diff(rho[1][0], 3.0);
            }
            // the recurrence field w vanishes on the axis y1 = 0
            for t in [-1.5, -0.2, 0.9] {
                let p = [0.0, t];
                acc.raw(d.w.comps[0].eval(&p).abs());
                acc.raw(d.w.comps[1].eval(&p).abs());
            }
            Ok(CheckOutcome {
                samples: pts.len() + 3,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "rsts-core",
        "rsts-core.slinv".to_string(),
        "rho = -6c Omega; w radial, zero at the origin",
        1e-9,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for c in [1.0, -2.0] {
                let e = entry(&format!("slinv:{c}"))?;
                let d = rsts_for(&format!("slinv:{c}"), ctx.samples, ctx.check_seed("slinv"))?;
                let mut pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed("slinv") ^ 15)
                    .map_err(|e| e.to_string())?;
                pts.push(vec![0.0, 0.0]);
                pts.push(vec![1e-3, -1e-3]);
                for p in &pts {
                    let rho = skewricci_core::tensorfield::ricci(&e.conn, p)
                        .map_err(|e| e.to_string())?;
                    acc.diff(rho[0][1], -6.0 * c);
                    // the recurrence field is the radial one
                    acc.diff(d.w.comps[0].eval(p), p[0]);
                    acc.diff(d.w.comps[1].eval(p), p[1]);
                }
                n += pts.len();
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "rsts-core",
        "rsts-core.nvv".to_string(),
        "rho(v,w) = 4 psi; 60 psi chi = rho(D_w w, w); L xi = 0",
        1e-8,
        move |ctx| {
            let e = entry("nvv")?;
            let fc = e.frame.as_ref().unwrap();
            let pts = fc
                .chart
                .sample(ctx.samples, ctx.check_seed("nvv"))
                .map_err(|e| e.to_string())?;
            let psi = fc.scalar("psi").unwrap().clone();
            let chi = fc.scalar("chi").unwrap().clone();
            // xi(v) = 0, xi(w) = 4 psi in the frame; in the chart with
            // w = d/dt and v = (v0, v1): xi = (0, 4 psi) acting on (v, w)
            // means xi_chart solves xi(v) = 0, xi(w) = 4 psi
            let v0 = fc.frame[0][0].clone();
            let v1 = fc.frame[0][1].clone();
            let xi = TensorField::one_form(
                fc.chart.clone(),
                [
                    -(Ex::c(4.0) * psi.clone() * v1.clone() / v0.clone()),
                    Ex::c(4.0) * psi.clone(),
                ],
            );
            let mut acc = ErrAcc::new();
            for p in &pts {
                let rho = skewricci_core::tensorfield::ricci(&e.conn, p).map_err(|e| e.to_string())?;
                let vv = [fc.frame[0][0].eval(p), fc.frame[0][1].eval(p)];
                let wv = [fc.frame[1][0].eval(p), fc.frame[1][1].eval(p)];
                let mut rvw = 0.0;
                for j in 0..2 {
                    for k in 0..2 {
                        rvw += rho[j][k] * vv[j] * wv[k];
                    }
                }
                let psi_v = psi.eval(p);
                let chi_v = chi.eval(p);
                acc.diff(rvw, 4.0 * psi_v);
                // D_w w = 15 chi v - 4 w, so rho(D_w w, w) = 15 chi rho(v,w)
                let g = e.conn.gamma_jets(p, 1).map_err(|e| e.to_string())?;
                let wj = [
                    jet_lift(&fc.frame[1][0], p, 1).map_err(|e| e.to_string())?,
                    jet_lift(&fc.frame[1][1], p, 1).map_err(|e| e.to_string())?,
                ];
                let dww = {
                    let m = cov_deriv_vector(&g, &wj);
                    [
                        m[0][0].value() * wv[0] + m[0][1].value() * wv[1],
                        m[1][0].value() * wv[0] + m[1][1].value() * wv[1],
                    ]
                };
                let mut rho_dww_w = 0.0;
                for j in 0..2 {
                    for k in 0..2 {
                        rho_dww_w += rho[j][k] * dww[j] * wv[k];
                    }
                }
                acc.diff(60.0 * psi_v * chi_v, rho_dww_w);
                let l = killing_l(&e.conn, &xi, p).map_err(|e| e.to_string())?;
                for row in l {
                    for v in row {
                        acc.raw(v.abs() / (1.0 + 4.0 * psi_v.abs()));
                    }
                }
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "rsts-core",
        "rsts-core.nullcone".to_string(),
        "rho(X,Z) = -1; <v+,v+> = 0; (0,1) frame off psi = 0",
        1e-8,
        move |ctx| {
            let d = skewricci_core::catalog::nullcone_data();
            let fc = skewricci_core::catalog::nullcone_connection();
            let conn = fc.to_connection();
            let pts = fc
                .chart
                .sample(ctx.samples, ctx.check_seed("nullcone"))
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let rho = skewricci_core::tensorfield::ricci(&conn, p).map_err(|e| e.to_string())?;
                let x = [fc.frame[0][0].eval(p), fc.frame[0][1].eval(p)];
                let z = [fc.frame[1][0].eval(p), fc.frame[1][1].eval(p)];
                let mut rxz = 0.0;
                for j in 0..2 {
                    for k in 0..2 {
                        rxz += rho[j][k] * x[j] * z[k];
                    }
                }
                acc.diff(rxz, -1.0);
                acc.raw(skewricci_core::catalog::minkowski(&d.vp, &d.vp).eval(p).abs());
                acc.raw(skewricci_core::catalog::minkowski(&d.vm, &d.vm).eval(p).abs());
                acc.diff(skewricci_core::catalog::minkowski(&d.vp, &d.vm).eval(p), -2.0);
            }
            // the frame u = 3(v- - v+), w = 2 v- carries the (0,1) family
            let u3: [Ex; 3] =
                std::array::from_fn(|i| Ex::c(3.0) * (d.vm[i].clone() - d.vp[i].clone()));
            let w3: [Ex; 3] = std::array::from_fn(|i| Ex::c(2.0) * d.vm[i].clone());
            let fc01 = skewricci_core::catalog::FrameConnection {
                chart: d.chart.clone(),
                frame: [(d.to_chart)(&d, &u3), (d.to_chart)(&d, &w3)],
                coeffs: [
                    [[Ex::c(3.0), Ex::zero()], [Ex::zero(), Ex::c(3.0)]],
                    [[Ex::c(-2.0), Ex::c(3.0)], [Ex::zero(), Ex::c(2.0)]],
                ],
                bracket: [Ex::c(2.0), Ex::zero()],
                scalars: vec![],
            };
            for p in pts.iter().take(20) {
                acc.raw(fc01.bracket_residual(p).map_err(|e| e.to_string())?);
                acc.raw(
                    fc01.round_trip_residual(&conn, p)
                        .map_err(|e| e.to_string())?,
                );
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    // engine self-check: jets against central differences
    add(
        defs,
        "rsts-core",
        "rsts-core.jets-fd".to_string(),
        "jets vs central finite differences",
        1e-5,
        move |ctx| {
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.check_seed("jets-fd"));
            let mut acc = ErrAcc::new();
            let mut checked = 0;
            while checked < 200 {
                let e = random_smooth_expr(&mut rng, 2, 4);
                let p = [
                    rand::Rng::random_range(&mut rng, -1.5..1.5),
                    rand::Rng::random_range(&mut rng, -1.5..1.5),
                ];
                let j = match jet_lift(&e, &p, 2) {
                    Ok(j) if j.is_finite() => j,
                    _ => continue,
                };
                let f = |x: f64, t: f64| e.eval(&[x, t]);
                let h1 = 1e-5;
                let fd_x = (f(p[0] + h1, p[1]) - f(p[0] - h1, p[1])) / (2.0 * h1);
                let fd_t = (f(p[0], p[1] + h1) - f(p[0], p[1] - h1)) / (2.0 * h1);
                // second differences with a wider step to keep the
                // subtractive cancellation below the gate
                let h2 = 1e-4;
                let fd_xx =
                    (f(p[0] + h2, p[1]) - 2.0 * f(p[0], p[1]) + f(p[0] - h2, p[1])) / (h2 * h2);
                let fd_tt =
                    (f(p[0], p[1] + h2) - 2.0 * f(p[0], p[1]) + f(p[0], p[1] - h2)) / (h2 * h2);
                let fd_xt = (f(p[0] + h2, p[1] + h2) - f(p[0] + h2, p[1] - h2)
                    - f(p[0] - h2, p[1] + h2)
                    + f(p[0] - h2, p[1] - h2))
                    / (4.0 * h2 * h2);
                let pairs = [
                    (j.partial(&[1, 0]).map_err(|e| e.to_string())?, fd_x),
                    (j.partial(&[0, 1]).map_err(|e| e.to_string())?, fd_t),
                    (j.partial(&[2, 0]).map_err(|e| e.to_string())?, fd_xx),
                    (j.partial(&[0, 2]).map_err(|e| e.to_string())?, fd_tt),
                    (j.partial(&[1, 1]).map_err(|e| e.to_string())?, fd_xt),
                ];
                for (jet_v, fd_v) in pairs {
                    acc.diff(jet_v, fd_v);
                }
                checked += 1;
            }
            Ok(CheckOutcome {
                samples: checked,
                max_err: acc.value(),
            })
        },
    );
}

// ---------------------------------------------------------------------------
// killing

fn register_killing(defs: &mut Vec<CheckDef>, _catalog: &[String]) {
    for cid in ["slsgp", "nabla_ab:1,0"] {
        let id = cid.to_string();
        add(
            defs,
            "killing",
            format!("killing.xqe/{cid}"),
            "Z(L xi) = Q* xi; D xi = L xi + [xi(w) - 2D(B tau)] rho/4",
            1e-7,
            move |ctx| {
                let seed = ctx.check_seed(&id);
                let d = rsts_for(&id, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 10).max(3), seed ^ 1)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
                let mut acc = ErrAcc::new();
                let mut n = 0;
                for _ in 0..20 {
                    let xi = random_poly_one_form(&d.conn.chart, &mut rng, 3);
                    for p in &pts {
                        let (ra, rb) =
                            killing_identity_residuals(&d, &xi, p).map_err(|e| e.to_string())?;
                        acc.raw(ra);
                        acc.raw(rb);
                        n += 1;
                    }
                }
                Ok(CheckOutcome {
                    samples: n,
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.to_string();
        add(
            defs,
            "killing",
            format!("killing.nnx/{cid}"),
            "DD xi = (B tau - xi) x rho + D tau",
            1e-7,
            move |ctx| {
                let seed = ctx.check_seed(&id);
                let d = rsts_for(&id, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 10).max(3), seed ^ 3)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
                let mut acc = ErrAcc::new();
                let mut n = 0;
                for _ in 0..10 {
                    let xi = random_poly_one_form(&d.conn.chart, &mut rng, 3);
                    for p in &pts {
                        acc.raw(
                            second_derivative_residual(&d, &xi, p).map_err(|e| e.to_string())?,
                        );
                        n += 1;
                    }
                }
                Ok(CheckOutcome {
                    samples: n,
                    max_err: acc.value(),
                })
            },
        );
    }

    add(
        defs,
        "killing",
        "killing.dkleo".to_string(),
        "L xi = 0 with xi nonzero everywhere",
        1e-9,
        move |ctx| {
            let e = entry("nabla_ab:-9,0")?;
            let fc = e.frame.as_ref().unwrap();
            let f = fc.scalar("f").unwrap();
            let f2 = f.clone() * f.clone();
            let xi = TensorField::one_form(
                e.conn.chart.clone(),
                [Ex::c(3.0) * f2.clone() / f.clone(), Ex::c(2.0) * f2],
            );
            let pts = e
                .conn
                .chart
                .sample(ctx.samples, ctx.check_seed("dkleo"))
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let l = killing_l(&e.conn, &xi, p).map_err(|e| e.to_string())?;
                let xin = xi.comps[0].eval(p).abs().max(xi.comps[1].eval(p).abs());
                for row in l {
                    for v in row {
                        acc.raw(v.abs() / (1.0 + xin));
                    }
                }
                acc.at_least(xin, 1e-3);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "killing",
        "killing.pte".to_string(),
        "P o P = P; P(L xi) = 0; Z(P tau) = 0",
        1e-6,
        move |ctx| {
            let seed = ctx.check_seed("pte");
            let d = rsts_for("nabla_ab:1,0", ctx.samples, seed)?;
            let pts = d
                .conn
                .chart
                .sample((ctx.samples / 20).max(3), seed ^ 5)
                .map_err(|e| e.to_string())?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 6);
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for _ in 0..10 {
                let tau = random_poly_sym2(&d.conn.chart, &mut rng, 3);
                let xi = random_poly_one_form(&d.conn.chart, &mut rng, 3);
                for p in &pts {
                    let order = 8;
                    let s = SurfJets::new(&d.conn, p, order).map_err(|e| e.to_string())?;
                    let tj = tau.two_tensor_jets(p, order).map_err(|e| e.to_string())?;
                    let scale = 1.0
                        + tj.iter()
                            .flatten()
                            .fold(0.0f64, |a, b| a.max(b.value().abs()));
                    let p1 = s.p_tensor(&tj).map_err(|e| e.to_string())?;
                    let p2 = s.p_tensor(&p1).map_err(|e| e.to_string())?;
                    for j in 0..2 {
                        for k in 0..2 {
                            acc.raw((p2[j][k].value() - p1[j][k].value()).abs() / scale);
                        }
                    }
                    let z = s.z_form(&p1);
                    acc.raw(z[0].value().abs() / scale);
                    acc.raw(z[1].value().abs() / scale);
                    let xj = xi.one_form_jets(p, 7).map_err(|e| e.to_string())?;
                    let s7 = SurfJets::new(&d.conn, p, 7).map_err(|e| e.to_string())?;
                    let lxi = s7.killing(&xj);
                    let lscale = 1.0
                        + lxi
                            .iter()
                            .flatten()
                            .fold(0.0f64, |a, b| a.max(b.value().abs()));
                    let pl = s7.p_tensor(&lxi).map_err(|e| e.to_string())?;
                    for j in 0..2 {
                        for k in 0..2 {
                            acc.raw(pl[j][k].value().abs() / lscale);
                        }
                    }
                    n += 1;
                }
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "killing",
        "killing.gkz".to_string(),
        "generic kernel triviality: det Q bounded away from 0",
        1e-12,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for cid in ["nabla_ab:1,0", "nabla_ab:0,1", "slsgp", "nullcone"] {
                let e = entry(cid)?;
                let pts = e
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed("gkz"))
                    .map_err(|e| e.to_string())?;
                for p in &pts {
                    let s = SurfJets::new(&e.conn, p, 3).map_err(|e| e.to_string())?;
                    acc.at_least(s.scaled_det_q(), 1e-3);
                    n += 1;
                }
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "killing",
        "killing.bd".to_string(),
        "D phi = -1; B(phi x phi) = 3 phi on the (1,0) member",
        1e-8,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            let seed = ctx.check_seed("bd");
            for cid in ["nabla_ab:1,0", "slsgp", "slinv:1", "nvv", "nullcone"] {
                let d = rsts_for(cid, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 4).max(5), seed ^ 7)
                    .map_err(|e| e.to_string())?;
                for p in &pts {
                    let s = SurfJets::new(&d.conn, p, 3).map_err(|e| e.to_string())?;
                    let dphi = s.d_scalar(&s.phi.clone());
                    acc.diff(dphi.value(), -1.0);
                    n += 1;
                }
                if cid == "nabla_ab:1,0" {
                    let tau = phi_tensor_squared(&d);
                    for p in &pts {
                        let (b, _) = surface_rsts::bd_coefficients(&d, &tau, &d.phi, p)
                            .map_err(|e| e.to_string())?;
                        for j in 0..2 {
                            acc.diff(b[j], 3.0 * d.phi.comps[j].eval(p));
                        }
                    }
                }
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "killing",
        "killing.codazzi-rho".to_string(),
        "(d^D rho)(u,v,.) = phi(u) rho(v,.) - phi(v) rho(u,.)",
        1e-8,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for cid in ["slsgp", "nvv", "nullcone"] {
                let d = rsts_for(cid, ctx.samples, ctx.check_seed("codazzi-rho"))?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 2).max(5), ctx.check_seed("codazzi-rho") ^ 8)
                    .map_err(|e| e.to_string())?;
                for p in &pts {
                    let s = SurfJets::new(&d.conn, p, 3).map_err(|e| e.to_string())?;
                    let c = s.codazzi(&s.rho.clone());
                    for j in 0..2 {
                        for k in 0..2 {
                            for l in 0..2 {
                                let rhs = s.phi[j].value() * s.rho[k][l].value()
                                    - s.phi[k].value() * s.rho[j][l].value();
                                acc.diff(c[j][k][l].value(), rhs);
                            }
                        }
                    }
                    n += 1;
                }
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );
}

// ---------------------------------------------------------------------------
// special

fn register_special(defs: &mut Vec<CheckDef>, catalog: &[String]) {
    for cid in catalog.iter().filter(|c| is_special(c)) {
        let id = cid.clone();
        add(
            defs,
            "special",
            format!("special.qmt/{cid}"),
            "(Q - 10) Q = 0; (Q* - 10) Q* = 0",
            1e-7,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample(ctx.samples, ctx.check_seed(&id) ^ 1)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    acc.raw(moduli::qmt_residual(&d, p).map_err(|e| e.to_string())?);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "special",
            format!("special.qstar-sq/{cid}"),
            "(Q*)^2 = 10 Q*",
            1e-7,
            move |ctx| {
                let seed = ctx.check_seed(&id);
                let d = rsts_for(&id, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 4).max(5), seed ^ 2)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
                let mut acc = ErrAcc::new();
                let mut n = 0;
                for _ in 0..10 {
                    let xi = random_poly_one_form(&d.conn.chart, &mut rng, 3);
                    for p in &pts {
                        acc.raw(
                            moduli::qstar_squared_residual(&d, &xi, p)
                                .map_err(|e| e.to_string())?,
                        );
                        n += 1;
                    }
                }
                Ok(CheckOutcome {
                    samples: n,
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "special",
            format!("special.w-cubed/{cid}"),
            "W^3 tau = W^2 tau",
            1e-7,
            move |ctx| {
                let seed = ctx.check_seed(&id);
                let d = rsts_for(&id, ctx.samples, seed)?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 20).max(3), seed ^ 4)
                    .map_err(|e| e.to_string())?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
                let mut acc = ErrAcc::new();
                let mut n = 0;
                let reps = if id == "nabla_ab:-9,0" { 20 } else { 8 };
                for _ in 0..reps {
                    let tau = random_poly_sym2(&d.conn.chart, &mut rng, 3);
                    for p in &pts {
                        acc.raw(moduli::w_cubed_residual(&d, &tau, p).map_err(|e| e.to_string())?);
                        n += 1;
                    }
                }
                Ok(CheckOutcome {
                    samples: n,
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "special",
            format!("special.w-fixes/{cid}"),
            "W(L alpha) = L alpha for Q* alpha = 10 alpha",
            1e-7,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 4).max(5), ctx.check_seed(&id) ^ 6)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let (wres, eig) = moduli::w_fixes_killing_residual(&d, p, 0)
                        .or_else(|_| moduli::w_fixes_killing_residual(&d, p, 1))
                        .map_err(|e| e.to_string())?;
                    acc.raw(wres);
                    acc.raw(eig);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );

        let id = cid.clone();
        add(
            defs,
            "special",
            format!("special.s0-z/{cid}"),
            "Z(L alpha0) = 0 for Q* alpha0 = 0",
            1e-7,
            move |ctx| {
                let d = rsts_for(&id, ctx.samples, ctx.check_seed(&id))?;
                let pts = d
                    .conn
                    .chart
                    .sample((ctx.samples / 4).max(5), ctx.check_seed(&id) ^ 7)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                for p in &pts {
                    let (zres, ker) = moduli::kernel_section_z_residual(&d, p, 0)
                        .or_else(|_| moduli::kernel_section_z_residual(&d, p, 1))
                        .map_err(|e| e.to_string())?;
                    acc.raw(zres);
                    acc.raw(ker);
                }
                Ok(CheckOutcome {
                    samples: pts.len(),
                    max_err: acc.value(),
                })
            },
        );
    }

    add(
        defs,
        "special",
        "special.classify".to_string(),
        "regime dichotomy matches the moduli curve",
        1e-12,
        move |ctx| {
            let expected = [
                ("nabla_ab:1,0", Regime::Generic),
                ("nabla_ab:-9,0", Regime::Special),
                ("nabla_ab:0,-15", Regime::Special),
                ("nabla_ab:0,1", Regime::Generic),
                ("slsgp", Regime::Generic),
                ("slinv:1", Regime::Generic),
                ("nvv", Regime::Special),
                ("nullcone", Regime::Generic),
            ];
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for (cid, want) in expected {
                let d = rsts_for(cid, ctx.samples, ctx.check_seed("classify"))?;
                if d.regime != want {
                    acc.raw(1.0);
                }
                n += 1;
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "special",
        "special.kerkz".to_string(),
        "no Killing kernel on the (0,-15) member",
        1e-12,
        move |ctx| {
            // the canonical kernel section of Q* is not a Killing form:
            // its symmetrized derivative stays bounded away from zero
            let d = rsts_for("nabla_ab:0,-15", ctx.samples, ctx.check_seed("kerkz"))?;
            let pts = d
                .conn
                .chart
                .sample(ctx.samples, ctx.check_seed("kerkz") ^ 8)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let norm = moduli::kernel_section_killing_norm(&d, p, 0)
                    .map_err(|e| e.to_string())?;
                acc.at_least(norm, 1e-3);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );
}

// ---------------------------------------------------------------------------
// moduli

fn register_moduli(defs: &mut Vec<CheckDef>) {
    add(
        defs,
        "moduli",
        "moduli.apb-exact".to_string(),
        "solutions are exactly {c = s = a, ab = 0}",
        1e-12,
        move |_ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            // on-curve points solve the system exactly, together with the
            // elimination intermediates
            for a in [-12.0, -9.0, -1.5, 0.0, 1.0, 3.0, 7.25] {
                for (aa, bb) in [(a, 0.0), (0.0, a)] {
                    let r = moduli::apb_residuals(aa, bb, aa, aa);
                    for v in r {
                        acc.raw(v.abs());
                    }
                    let inter = moduli::apb_elimination_intermediates(aa, aa, aa);
                    acc.raw(inter[0].abs());
                    acc.raw(inter[1].abs());
                    n += 1;
                }
            }
            // known non-solution
            let r = moduli::apb_residuals(1.0, 1.0, 1.0, 1.0);
            acc.at_least(r.iter().fold(0.0f64, |m, x| m.max(x.abs())), 0.5);
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "moduli",
        "moduli.apb-grid".to_string(),
        "grid scan finds no off-curve solutions",
        1e-12,
        move |_ctx| {
            let grid = moduli::default_grid();
            let scan = moduli::apb_grid_scan(&grid, 1e-9);
            let mut acc = ErrAcc::new();
            acc.raw(scan.off_curve.len() as f64);
            // the scan must be non-vacuous: on-curve grid points are found
            acc.at_least(scan.solutions.len() as f64, 1.0);
            Ok(CheckOutcome {
                samples: grid.len().pow(4),
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "moduli",
        "moduli.bue".to_string(),
        "B_u B_w - B_w B_u = 2 B_u",
        1e-12,
        move |_ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            for (a, b) in [
                (1.0, 0.0),
                (0.0, -15.0),
                (-9.0, 0.0),
                (3.0, 0.0),
                (0.0, 7.0),
                (-15.0, 0.0),
                (10.0, 0.0),
            ] {
                acc.raw(moduli::homomorphism_check(a, b).map_err(|e| e.to_string())?);
                n += 1;
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "moduli",
        "moduli.matq".to_string(),
        "2 det Q = 5a + 3b + 45; det(1,0) = 25; singular at (-9,0), (0,-15)",
        1e-12,
        move |_ctx| {
            let mut acc = ErrAcc::new();
            acc.diff(moduli::mat_q(1.0, 0.0).1, 25.0);
            acc.raw(moduli::mat_q(-9.0, 0.0).1.abs());
            acc.raw(moduli::mat_q(0.0, -15.0).1.abs());
            // kernel/image direction on (0,-15): columns parallel to 8u - 3w
            let (m, _) = moduli::mat_q(0.0, -15.0);
            for col in 0..2 {
                let cross = m[0][col] * (-3.0) - m[1][col] * 8.0;
                acc.raw(cross.abs());
            }
            Ok(CheckOutcome {
                samples: 5,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "moduli",
        "moduli.matq-field".to_string(),
        "frame matrix of Q matches the field-level morphism",
        1e-7,
        move |ctx| {
            let mut acc = ErrAcc::new();
            let mut n = 0;
            let vals = [-15.0, -9.0, 0.0, 1.0, 3.0, 10.0];
            for &v in &vals {
                for (a, b) in [(v, 0.0), (0.0, v)] {
                    let fc = nabla_ab(a, b).map_err(|e| e.to_string())?;
                    let conn = fc.to_connection();
                    let d = recurrence_data(&conn, 20, ctx.check_seed("matq-field"))
                        .map_err(|e| e.to_string())?;
                    let pts = fc
                        .chart
                        .sample((ctx.samples / 10).max(5), ctx.check_seed("matq-field") ^ 1)
                        .map_err(|e| e.to_string())?;
                    let (want, want_det) = moduli::mat_q(a, b);
                    for p in &pts {
                        let q =
                            surface_rsts::q_endomorphism(&d, p).map_err(|e| e.to_string())?;
                        let e = [
                            [fc.frame[0][0].eval(p), fc.frame[0][1].eval(p)],
                            [fc.frame[1][0].eval(p), fc.frame[1][1].eval(p)],
                        ];
                        let det_e = e[0][0] * e[1][1] - e[0][1] * e[1][0];
                        for i in 0..2 {
                            let img = [
                                q.matrix[0][0] * e[i][0] + q.matrix[0][1] * e[i][1],
                                q.matrix[1][0] * e[i][0] + q.matrix[1][1] * e[i][1],
                            ];
                            let m0 = (img[0] * e[1][1] - img[1] * e[1][0]) / det_e;
                            let m1 = (img[1] * e[0][0] - img[0] * e[0][1]) / det_e;
                            acc.diff(m0, want[0][i]);
                            acc.diff(m1, want[1][i]);
                        }
                        acc.diff(q.det, want_det);
                        n += 1;
                    }
                }
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );
}

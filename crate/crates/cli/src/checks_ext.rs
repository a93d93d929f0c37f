//! Check bodies for the four-manifold suites: Riemann-extension closed
//! forms, Einstein and Walker structure, the Petrov certificate, the
//! natural quintuple, and the Killing-field witnesses.

use crate::checks::{entry, rsts_for, ErrAcc};
use crate::{CheckDef, CheckOutcome, RunCtx};
use nalgebra::Matrix3x4;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use skewricci_core::expr::Ex;
use skewricci_core::petrov::{petrov_type, PetrovReport};
use skewricci_core::randfields::random_poly_one_form;
use skewricci_core::riemann_extension as re;
use skewricci_core::riemann_extension::RiemannExtension;
use skewricci_core::surface_rsts::{phi_tensor_squared, RstsData};
use skewricci_core::tensorfield::TensorField;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Tau {
    Zero,
    PhiPhi,
}

impl Tau {
    fn tag(&self) -> &'static str {
        match self {
            Tau::Zero => "tau0",
            Tau::PhiPhi => "phiphi",
        }
    }
}

fn build_extension(
    base_id: &str,
    tau: Tau,
    samples: usize,
    seed: u64,
) -> Result<(RiemannExtension, RstsData), String> {
    let d = rsts_for(base_id, samples, seed)?;
    let tau_field = match tau {
        Tau::Zero => re::zero_tau(&d.conn.chart),
        Tau::PhiPhi => phi_tensor_squared(&d),
    };
    let ext = RiemannExtension::new(&d.conn, &tau_field).map_err(|e| e.to_string())?;
    Ok((ext, d))
}

/// Petrov reports are consumed by several records per extension; compute
/// them once per (extension, seed, samples).
fn petrov_reports(
    ext_id: &str,
    base_id: &str,
    tau: Tau,
    ctx: &RunCtx,
) -> Result<Arc<Vec<PetrovReport>>, String> {
    type Cache = Mutex<HashMap<(String, u64, usize), Arc<Vec<PetrovReport>>>>;
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let key = (ext_id.to_string(), ctx.seed, ctx.samples);
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(hit) = cache.lock().unwrap().get(&key) {
        return Ok(hit.clone());
    }
    let seed = ctx.check_seed(ext_id);
    let (ext, _) = build_extension(base_id, tau, ctx.samples, seed)?;
    let pts = ext
        .chart4
        .sample(ctx.samples, seed ^ 0xa5)
        .map_err(|e| e.to_string())?;
    let mut reports = Vec::with_capacity(pts.len());
    for p in &pts {
        reports.push(petrov_type(&ext, p).map_err(|e| e.to_string())?);
    }
    let arc = Arc::new(reports);
    cache.lock().unwrap().insert(key, arc.clone());
    Ok(arc)
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

pub fn register(defs: &mut Vec<CheckDef>, catalog: &[String]) {
    for cid in catalog {
        for tau in [Tau::Zero, Tau::PhiPhi] {
            register_extension_checks(defs, cid, tau);
        }
        register_transversal(defs, cid);
    }
    register_singletons(defs);
}

fn register_extension_checks(defs: &mut Vec<CheckDef>, cid: &str, tau: Tau) {
    let ext_id = format!("{cid}+{}", tau.tag());

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.gjk/{ext_id}"),
        "metric component table vs generic Levi-Civita",
        1e-9,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 1)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                acc.raw(re::lc_closed_form_residual(&ext, p).map_err(|e| e.to_string())?);
                if !re::signature_is_neutral(&ext, p).map_err(|e| e.to_string())? {
                    acc.raw(1.0);
                }
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.rlm/{ext_id}"),
        "curvature table vs generic computation",
        1e-8,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, d) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 2)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                acc.raw(re::rlm_closed_form_residual(&ext, &d, p).map_err(|e| e.to_string())?);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.einstein/{ext_id}"),
        "ricci of the extension = 0; scalar curvature = 0",
        1e-8,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 3)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let (rho, scal) = re::einstein_data(&ext, p).map_err(|e| e.to_string())?;
                for row in rho.iter().flatten() {
                    acc.raw(row.abs());
                }
                acc.raw(scal.abs());
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.walker/{ext_id}"),
        "vertical plane null, parallel, curvature-flat",
        1e-9,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 4)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                acc.raw(re::walker_residual(&ext, p).map_err(|e| e.to_string())?);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.pair-bianchi/{ext_id}"),
        "pair symmetry and first Bianchi of the curvature",
        1e-8,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 5).max(8), seed ^ 5)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                acc.raw(re::curvature_symmetry_residual(&ext, p).map_err(|e| e.to_string())?);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.div-v/{ext_id}"),
        "div v = 10; fiberwise divergence = 10",
        1e-8,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 6)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let (div, fiber) = re::div_v_field(&ext, p).map_err(|e| e.to_string())?;
                acc.diff(div, 10.0);
                acc.diff(fiber, 10.0);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    // petrov suite
    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "petrov",
        format!("petrov.trace/{ext_id}"),
        "self-dual Weyl operator is trace-free",
        1e-9,
        move |ctx| {
            let reports = petrov_reports(&eid, &base, tau, ctx)?;
            let mut acc = ErrAcc::new();
            for r in reports.iter() {
                acc.raw(r.trace_res);
            }
            Ok(CheckOutcome {
                samples: reports.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "petrov",
        format!("petrov.normal-form/{ext_id}"),
        "rank 2, cube zero, square nonzero, self-adjoint",
        1e-8,
        move |ctx| {
            let reports = petrov_reports(&eid, &base, tau, ctx)?;
            let mut acc = ErrAcc::new();
            for r in reports.iter() {
                acc.raw(r.cube_ratio);
                acc.raw(r.rank_gap.1);
                acc.raw(r.self_adjoint_res);
                acc.at_least(r.square_ratio, 1e-3);
                acc.at_least(r.rank_gap.0, 1e-3);
                if !r.is_type_iii {
                    acc.raw(1.0);
                }
            }
            Ok(CheckOutcome {
                samples: reports.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "petrov",
        format!("petrov.kernel/{ext_id}"),
        "nullspace of the kernel 2-form is the vertical plane",
        1e-7,
        move |ctx| {
            let reports = petrov_reports(&eid, &base, tau, ctx)?;
            let mut acc = ErrAcc::new();
            for r in reports.iter() {
                acc.raw(r.kernel_vertical_res);
            }
            Ok(CheckOutcome {
                samples: reports.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "petrov",
        format!("petrov.star/{ext_id}"),
        "star^2 = 1; curvature preserves the self-dual split",
        1e-7,
        move |ctx| {
            let reports = petrov_reports(&eid, &base, tau, ctx)?;
            let mut acc = ErrAcc::new();
            for r in reports.iter() {
                acc.raw(r.star_squared_res);
                acc.raw(r.self_dual_res);
            }
            Ok(CheckOutcome {
                samples: reports.len(),
                max_err: acc.value(),
            })
        },
    );

    // quintuple suite
    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "quintuple",
        format!("quintuple.identities/{ext_id}"),
        "2R = zeta x eta + eta x zeta; D eta = 2 gamma x zeta; 8 gamma_l = g_kl w^k; v^j = 0",
        1e-7,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, d) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 5).max(8), seed ^ 7)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let q = re::quintuple(&ext, &d, p).map_err(|e| e.to_string())?;
                acc.raw(q.res_curvature_split);
                acc.raw(q.res_nabla_eta);
                acc.raw(q.res_gamma_vertical);
                acc.raw(q.res_gamma_fiber);
                acc.raw(q.res_a_blocks);
                acc.raw(q.res_v_horizontal);
                acc.raw(q.res_v_fiber);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    let (base, eid) = (cid.to_string(), ext_id.clone());
    add(
        defs,
        "quintuple",
        format!("quintuple.theta/{ext_id}"),
        "vertical volume section nonzero, parallel on fibers",
        1e-9,
        move |ctx| {
            let seed = ctx.check_seed(&eid);
            let (ext, _) = build_extension(&base, tau, ctx.samples, seed)?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 8)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let (theta, fiber) = re::theta_section(&ext, p).map_err(|e| e.to_string())?;
                acc.at_least(theta.abs(), 1e-3);
                acc.raw(fiber);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );
}

fn register_transversal(defs: &mut Vec<CheckDef>, cid: &str) {
    let base = cid.to_string();
    add(
        defs,
        "riemann-ext",
        format!("riemann-ext.transversal/{cid}"),
        "projected connection reproduces the base, independent of tau",
        1e-9,
        move |ctx| {
            let seed = ctx.check_seed(&base);
            let (ext0, _) = build_extension(&base, Tau::Zero, ctx.samples, seed)?;
            let (ext1, _) = build_extension(&base, Tau::PhiPhi, ctx.samples, seed)?;
            let pts = ext0
                .chart4
                .sample((ctx.samples / 4).max(10), seed ^ 9)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                let g0 = re::transversal_extract(&ext0, p).map_err(|e| e.to_string())?;
                let g1 = re::transversal_extract(&ext1, p).map_err(|e| e.to_string())?;
                let gb = ext0
                    .base
                    .gamma_jets(&p[0..2], 0)
                    .map_err(|e| e.to_string())?;
                for l in 0..2 {
                    for j in 0..2 {
                        for k in 0..2 {
                            acc.diff(g0[l][j][k], gb[l][j][k].value());
                            acc.diff(g1[l][j][k], gb[l][j][k].value());
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
}

fn register_singletons(defs: &mut Vec<CheckDef>) {
    add(
        defs,
        "riemann-ext",
        "riemann-ext.einstein-nonskew".to_string(),
        "ricci of the extension doubles the symmetric part of the base",
        1e-8,
        move |ctx| {
            use skewricci_core::chart::Chart;
            use skewricci_core::tensorfield::Connection;
            let chart = Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]);
            let z = Ex::zero;
            let mut gamma: [[[Ex; 2]; 2]; 2] =
                std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| z())));
            gamma[0][1][1] = Ex::var(0);
            let base = Connection::new(chart.clone(), gamma);
            let ext =
                RiemannExtension::new(&base, &re::zero_tau(&chart)).map_err(|e| e.to_string())?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 4).max(10), ctx.check_seed("nonskew"))
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            let mut witnessed: f64 = 0.0;
            for p in &pts {
                let rho2 = skewricci_core::tensorfield::ricci(&base, &p[0..2])
                    .map_err(|e| e.to_string())?;
                let (rho4, scal) = re::einstein_data(&ext, p).map_err(|e| e.to_string())?;
                for j in 0..2 {
                    for k in 0..2 {
                        acc.diff(rho4[j][k], rho2[j][k] + rho2[k][j]);
                        witnessed = witnessed.max((rho2[j][k] + rho2[k][j]).abs());
                    }
                    for lam in 2..4 {
                        acc.raw(rho4[j][lam].abs());
                        acc.raw(rho4[lam][j].abs());
                    }
                }
                acc.raw(scal.abs());
            }
            // the deformation must actually produce a nonzero symmetric part
            acc.at_least(witnessed, 0.5);
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    for base_id in ["nabla_ab:1,0", "slsgp"] {
        let bid = base_id.to_string();
        add(
            defs,
            "riemann-ext",
            format!("riemann-ext.kxi/{base_id}"),
            "fiber translation pulls the metric back to tau + L xi",
            1e-9,
            move |ctx| {
                let seed = ctx.check_seed(&bid);
                let tau = if bid == "slsgp" { Tau::Zero } else { Tau::PhiPhi };
                let (ext, d) = build_extension(&bid, tau, ctx.samples, seed)?;
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 10);
                let pts = ext
                    .chart4
                    .sample((ctx.samples / 5).max(8), seed ^ 11)
                    .map_err(|e| e.to_string())?;
                let mut acc = ErrAcc::new();
                let mut n = 0;
                for _ in 0..5 {
                    let xi = random_poly_one_form(&d.conn.chart, &mut rng, 3);
                    for p in &pts {
                        acc.raw(
                            re::kxi_pullback_residual(&ext, &xi, p).map_err(|e| e.to_string())?,
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
        "riemann-ext",
        "riemann-ext.kxi-isometric".to_string(),
        "a Killing form translates the metric onto itself",
        1e-9,
        move |ctx| {
            let seed = ctx.check_seed("kxi-iso");
            let (ext, _) = build_extension("nabla_ab:-9,0", Tau::PhiPhi, ctx.samples, seed)?;
            let e = entry("nabla_ab:-9,0")?;
            let fc = e.frame.as_ref().unwrap();
            let f = fc.scalar("f").unwrap();
            let f2 = f.clone() * f.clone();
            let xi = TensorField::one_form(
                e.conn.chart.clone(),
                [Ex::c(3.0) * f2.clone() / f.clone(), Ex::c(2.0) * f2],
            );
            let translated = re::kxi_pullback(&ext, &xi).map_err(|e| e.to_string())?;
            let pts = ext
                .chart4
                .sample((ctx.samples / 2).max(10), seed ^ 12)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                // same tau: the translated metric is the original one
                let g0 = ext.metric_values(p).map_err(|e| e.to_string())?;
                let g1 = translated.metric_values(p).map_err(|e| e.to_string())?;
                for a in 0..4 {
                    for b in 0..4 {
                        acc.diff(g0[a][b], g1[a][b]);
                    }
                }
                // and the translation itself is an isometry onto it
                acc.raw(re::kxi_pullback_residual(&ext, &xi, p).map_err(|e| e.to_string())?);
            }
            Ok(CheckOutcome {
                samples: pts.len(),
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "riemann-ext",
        "riemann-ext.vertical-killing".to_string(),
        "vertical field Killing iff L xi = 0",
        1e-7,
        move |ctx| {
            let seed = ctx.check_seed("vert-killing");
            let mut acc = ErrAcc::new();
            let mut n = 0;
            // Killing case: the kernel form on the (-9,0) member
            let (ext, _) = build_extension("nabla_ab:-9,0", Tau::PhiPhi, ctx.samples, seed)?;
            let e = entry("nabla_ab:-9,0")?;
            let fc = e.frame.as_ref().unwrap();
            let f = fc.scalar("f").unwrap();
            let f2 = f.clone() * f.clone();
            let xi = TensorField::one_form(
                e.conn.chart.clone(),
                [Ex::c(3.0) * f2.clone() / f.clone(), Ex::c(2.0) * f2],
            );
            let pts = ext
                .chart4
                .sample((ctx.samples / 2).max(10), seed ^ 13)
                .map_err(|e| e.to_string())?;
            for p in &pts {
                let (res, _) = re::vertical_killing(&ext, &xi, p).map_err(|e| e.to_string())?;
                acc.raw(res);
                n += 1;
            }
            // non-Killing case: the recurrence form on the (1,0) member;
            // the residual must match twice the pulled-back Killing image
            // and be bounded away from zero
            let (ext2, d2) = build_extension("nabla_ab:1,0", Tau::Zero, ctx.samples, seed ^ 14)?;
            let pts2 = ext2
                .chart4
                .sample((ctx.samples / 4).max(5), seed ^ 15)
                .map_err(|e| e.to_string())?;
            for p in &pts2 {
                let (res, expect) =
                    re::vertical_killing(&ext2, &d2.phi, p).map_err(|e| e.to_string())?;
                acc.diff(res, expect);
                acc.at_least(expect, 1.0);
                n += 1;
            }
            // xi = 0 gives the zero field
            let zero = TensorField::one_form(d2.conn.chart.clone(), [Ex::zero(), Ex::zero()]);
            let (res, _) =
                re::vertical_killing(&ext2, &zero, &pts2[0]).map_err(|e| e.to_string())?;
            acc.raw(res);
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );

    add(
        defs,
        "riemann-ext",
        "riemann-ext.mobility".to_string(),
        "three pointwise-independent Killing fields on the maximal family",
        1e-7,
        move |ctx| {
            let seed = ctx.check_seed("mobility");
            let e = entry("nabla_ab:-9,0")?;
            let fc = e.frame.as_ref().unwrap();
            let chart = e.conn.chart.clone();
            // left-invariant tau: constant coefficients on the coframe
            // u* = dx / f, w* = dt
            let f = fc.scalar("f").unwrap().clone();
            let ustar = [Ex::one() / f.clone(), Ex::zero()];
            let wstar = [Ex::zero(), Ex::one()];
            let lin = |c: [f64; 3]| -> [[Ex; 2]; 2] {
                std::array::from_fn(|j| {
                    std::array::from_fn(|k| {
                        Ex::c(c[0]) * ustar[j].clone() * ustar[k].clone()
                            + Ex::c(c[1])
                                * (ustar[j].clone() * wstar[k].clone()
                                    + wstar[j].clone() * ustar[k].clone())
                            + Ex::c(c[2]) * wstar[j].clone() * wstar[k].clone()
                    })
                })
            };
            let tau = TensorField::two_tensor(chart.clone(), lin([1.0, 0.5, -1.0]));
            let ext = RiemannExtension::new(&e.conn, &tau).map_err(|e| e.to_string())?;
            // the two right-invariant fields and the kernel form
            let psi = fc.scalar("psi").unwrap().clone();
            let v1 = TensorField::vector(chart.clone(), [Ex::one(), Ex::zero()]);
            let v2 = TensorField::vector(chart.clone(), [psi, Ex::c(-1.0)]);
            let f2 = f.clone() * f.clone();
            let xi = TensorField::one_form(
                chart.clone(),
                [Ex::c(3.0) * f2.clone() / f.clone(), Ex::c(2.0) * f2],
            );
            let pts = ext
                .chart4
                .sample(ctx.samples, seed ^ 16)
                .map_err(|e| e.to_string())?;
            let mut acc = ErrAcc::new();
            for p in &pts {
                for x_field in [&v1, &v2] {
                    acc.raw(
                        re::cotangent_lift_killing(&ext, x_field, p)
                            .map_err(|e| e.to_string())?,
                    );
                }
                let (vres, _) = re::vertical_killing(&ext, &xi, p).map_err(|e| e.to_string())?;
                acc.raw(vres);
                // pointwise independence of the three fields
                let l1 = re::cotangent_lift_values(&ext, &v1, p).map_err(|e| e.to_string())?;
                let l2 = re::cotangent_lift_values(&ext, &v2, p).map_err(|e| e.to_string())?;
                let lv = re::vertical_field_values(&ext, &xi, p).map_err(|e| e.to_string())?;
                let m = Matrix3x4::from_fn(|r, c| [l1, l2, lv][r][c]);
                let svd = m.svd(false, false);
                let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
                sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
                acc.at_least(sv[2] / sv[0], 1e-3);
            }
            // the invariant-plane family: cotangent action of the
            // unimodular rotation on the parameter-free member
            let e2 = entry("slinv:1")?;
            let ext2 = RiemannExtension::new(&e2.conn, &re::zero_tau(&e2.conn.chart))
                .map_err(|e| e.to_string())?;
            let rot = TensorField::vector(
                e2.conn.chart.clone(),
                [-Ex::var(1), Ex::var(0)],
            );
            let pts2 = ext2
                .chart4
                .sample((ctx.samples / 2).max(10), seed ^ 17)
                .map_err(|e| e.to_string())?;
            let mut n = pts.len();
            for p in &pts2 {
                acc.raw(re::cotangent_lift_killing(&ext2, &rot, p).map_err(|e| e.to_string())?);
                n += 1;
            }
            Ok(CheckOutcome {
                samples: n,
                max_err: acc.value(),
            })
        },
    );
}

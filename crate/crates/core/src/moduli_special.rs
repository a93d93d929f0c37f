//! The finite-dimensional side of the homogeneous classification, and the
//! operator identities of the special regime.
//!
//! A left-invariant torsion-free structure on the non-Abelian
//! two-dimensional group is encoded by two matrices acting on the frame
//! `u, w` with `[u,w] = 2u`; the homomorphism condition
//! `B_u B_w - B_w B_u = 2 B_u` reduces to three scalar equations whose
//! exact elimination pins the moduli curve `{c = s = a, ab = 0}`, the union
//! of the two coordinate axes in the `(a,b)`-plane.

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::surface_rsts::{RstsData, SurfJets, DETQ_MARGIN};
use crate::tensorfield::TensorField;

/// A point of the moduli curve.
#[derive(Clone, Copy, Debug)]
pub struct ModuliPoint {
    pub a: f64,
    pub b: f64,
}

impl ModuliPoint {
    pub fn new(a: f64, b: f64) -> Result<ModuliPoint> {
        if a * b != 0.0 {
            return Err(Error::Precondition(format!(
                "moduli point needs ab = 0, got ({a}, {b})"
            )));
        }
        Ok(ModuliPoint { a, b })
    }
}

/// Residuals of the three homomorphism equations in `(a, b, c, s)`:
///
/// ```text
/// i)   (a+b-1) s = (a-3) c + 2a,
/// ii)  (a+b-1) a = (c-1) c,
/// iii) (a-3) a   = (c-3) s.
/// ```
pub fn apb_residuals(a: f64, b: f64, c: f64, s: f64) -> [f64; 3] {
    [
        (a + b - 1.0) * s - ((a - 3.0) * c + 2.0 * a),
        (a + b - 1.0) * a - (c - 1.0) * c,
        (a - 3.0) * a - (c - 3.0) * s,
    ]
}

/// The two intermediate identities of the exact elimination,
/// `cs = a^2` and `(a - c) c = 0`; both must vanish wherever the three
/// equations hold.
pub fn apb_elimination_intermediates(a: f64, c: f64, s: f64) -> [f64; 2] {
    [c * s - a * a, (a - c) * c]
}

/// Result of the brute-force grid scan.
pub struct GridScan {
    /// Grid points with max residual below the tolerance.
    pub solutions: Vec<[f64; 4]>,
    /// Solutions that violate `c = s = a` or `ab = 0`.
    pub off_curve: Vec<[f64; 4]>,
}

/// Scans the product grid `values^4` for residual-零 solutions of the
/// system and flags any lying off the curve `{c = s = a, ab = 0}`.
pub fn apb_grid_scan(values: &[f64], tol: f64) -> GridScan {
    let mut solutions = Vec::new();
    let mut off_curve = Vec::new();
    for &a in values {
        for &b in values {
            for &c in values {
                for &s in values {
                    let r = apb_residuals(a, b, c, s);
                    let res = r.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                    if res < tol {
                        let pt = [a, b, c, s];
                        if (c - a).abs() > tol || (s - a).abs() > tol || (a * b).abs() > tol {
                            off_curve.push(pt);
                        }
                        solutions.push(pt);
                    }
                }
            }
        }
    }
    GridScan {
        solutions,
        off_curve,
    }
}

/// Default grid: 26 integer values from -12 to 13 on each axis, which
/// contains on-curve points (so the scan provably finds solutions) and a
/// dense sweep of off-curve candidates.
pub fn default_grid() -> Vec<f64> {
    (-12..=13).map(|k| k as f64).collect()
}

/// The structure matrices of the left-invariant family in the frame
/// `u, w`.
pub fn structure_matrices(a: f64, b: f64) -> ([[f64; 2]; 2], [[f64; 2]; 2]) {
    (
        [[a, a], [-a, -a]],
        [[a - 2.0, a + b - 1.0], [3.0 - a, 2.0 - a]],
    )
}

/// Residual of the homomorphism identity `B_u B_w - B_w B_u = 2 B_u`.
/// Refuses parameters off the moduli curve.
pub fn homomorphism_check(a: f64, b: f64) -> Result<f64> {
    let _ = ModuliPoint::new(a, b)?;
    let (bu, bw) = structure_matrices(a, b);
    let mut res: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut comm = 0.0;
            for k in 0..2 {
                comm += bu[i][k] * bw[k][j] - bw[i][k] * bu[k][j];
            }
            res = res.max((comm - 2.0 * bu[i][j]).abs());
        }
    }
    Ok(res)
}

/// The matrix of the morphism `Q` in the frame `u, w`, and its exact
/// determinant `(5a + 3b + 45)/2`.
pub fn mat_q(a: f64, b: f64) -> ([[f64; 2]; 2], f64) {
    let m = [[a + 4.0, a + b - 1.0], [-a - 1.5, 6.0 - a]];
    (m, (5.0 * a + 3.0 * b + 45.0) / 2.0)
}

// ---------------------------------------------------------------------------
// Special-regime operator identities.

fn sup2(m: &[[Jet; 2]; 2]) -> f64 {
    m.iter().flatten().fold(0.0f64, |a, b| a.max(b.value().abs()))
}

/// `(Q - 10) Q = 0` and `(Q* - 10) Q* = 0` residual at a point of a special
/// connection.
pub fn qmt_residual(d: &RstsData, p: &[f64]) -> Result<f64> {
    let s = SurfJets::new(&d.conn, p, 3)?;
    let q = [
        [s.q[0][0].value(), s.q[0][1].value()],
        [s.q[1][0].value(), s.q[1][1].value()],
    ];
    let norm = q.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let mut res: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            // (Q - 10) Q
            let mut acc = -10.0 * q[i][j];
            for k in 0..2 {
                acc += q[i][k] * q[k][j];
            }
            res = res.max(acc.abs());
            // (Q* - 10) Q* is the transposed identity
            let mut acc_t = -10.0 * q[j][i];
            for k in 0..2 {
                acc_t += q[j][k] * q[k][i];
            }
            res = res.max(acc_t.abs());
        }
    }
    Ok(res / (1.0 + norm * norm))
}

/// `(Q*)^2 xi = 10 Q* xi` residual for a 1-form field.
pub fn qstar_squared_residual(d: &RstsData, xi: &TensorField, p: &[f64]) -> Result<f64> {
    let s = SurfJets::new(&d.conn, p, 4)?;
    let xj = xi.one_form_jets(p, 4)?;
    let q1 = s.q_star(&xj);
    let q2 = s.q_star(&q1);
    let mut res: f64 = 0.0;
    let mut scale: f64 = 1.0;
    for j in 0..2 {
        res = res.max((q2[j].value() - 10.0 * q1[j].value()).abs());
        scale = scale.max(q1[j].value().abs() * 10.0);
    }
    Ok(res / (1.0 + scale))
}

/// `W^3 tau = W^2 tau` residual; an honest three-fold composition of the
/// fourth-order operator, evaluated through order-13 jets.
pub fn w_cubed_residual(d: &RstsData, tau: &TensorField, p: &[f64]) -> Result<f64> {
    let order = 13;
    let s = SurfJets::new(&d.conn, p, order)?;
    if s.scaled_det_q() > DETQ_MARGIN {
        return Err(Error::RegimeViolation(
            "W iteration needs the special regime".into(),
        ));
    }
    let tj = tau.two_tensor_jets(p, order)?;
    let w1 = s.w_tensor(&tj);
    let w2 = s.w_tensor(&w1);
    let w3 = s.w_tensor(&w2);
    let mut res: f64 = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            res = res.max((w3[j][k].value() - w2[j][k].value()).abs());
        }
    }
    Ok(res / (1.0 + sup2(&w2)))
}

/// `W(L alpha) = L alpha` residual for a local eigenform `alpha` of `Q*`
/// with eigenvalue 10, plus the eigen-residual `|Q* alpha - 10 alpha|`.
pub fn w_fixes_killing_residual(d: &RstsData, p: &[f64], col: usize) -> Result<(f64, f64)> {
    let order = 9;
    let s = SurfJets::new(&d.conn, p, order)?;
    let alpha = s.q_star_eigenform(10.0, col);
    let an = alpha[0].value().abs().max(alpha[1].value().abs());
    if an < 1e-8 {
        return Err(Error::Precondition(
            "eigenform column degenerates; use the other column".into(),
        ));
    }
    let qs = s.q_star(&alpha);
    let eig_res = ((qs[0].value() - 10.0 * alpha[0].value()).abs())
        .max((qs[1].value() - 10.0 * alpha[1].value()).abs())
        / (1.0 + 10.0 * an);
    let tau = s.killing(&alpha);
    let w = s.w_tensor(&tau);
    let mut res: f64 = 0.0;
    for j in 0..2 {
        for k in 0..2 {
            res = res.max((w[j][k].value() - tau[j][k].value()).abs());
        }
    }
    Ok((res / (1.0 + sup2(&tau)), eig_res))
}

/// `Z(L alpha0) = 0` residual for a local section `alpha0` of `Ker Q*`.
pub fn kernel_section_z_residual(d: &RstsData, p: &[f64], col: usize) -> Result<(f64, f64)> {
    let order = 9;
    let s = SurfJets::new(&d.conn, p, order)?;
    let alpha = s.q_star_eigenform(0.0, col);
    let an = alpha[0].value().abs().max(alpha[1].value().abs());
    if an < 1e-8 {
        return Err(Error::Precondition(
            "kernel column degenerates; use the other column".into(),
        ));
    }
    let qs = s.q_star(&alpha);
    let ker_res =
        (qs[0].value().abs().max(qs[1].value().abs())) / (1.0 + an);
    let tau = s.killing(&alpha);
    let z = s.z_form(&tau);
    let res = z[0].value().abs().max(z[1].value().abs());
    let scale = 1.0 + sup2(&tau);
    Ok((res / scale, ker_res))
}

/// Sup norm of `L alpha0` for the canonical kernel section; used as the
/// witness that the connection has no Killing 1-form in the kernel
/// direction (contrast with the explicit kernel form of the `(-9,0)`
/// member).
pub fn kernel_section_killing_norm(d: &RstsData, p: &[f64], col: usize) -> Result<f64> {
    let s = SurfJets::new(&d.conn, p, 5)?;
    let alpha = s.q_star_eigenform(0.0, col);
    let an = alpha[0].value().abs().max(alpha[1].value().abs());
    let tau = s.killing(&alpha);
    Ok(sup2(&tau) / (1.0 + an))
}

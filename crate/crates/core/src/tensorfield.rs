//! Tensor calculus on a surface chart: curvature with the fixed sign
//! convention, covariant and exterior derivatives, Lie brackets,
//! divergence.
//!
//! Everything is evaluated pointwise through jets, so any operator built on
//! top of these primitives sees exact derivatives of its inputs. The
//! curvature convention is
//!
//! ```text
//! R(v,w)a = D_w D_v a - D_v D_w a + D_[v,w] a,
//! ```
//!
//! which in coordinates gives
//! `R_{jks}^l = d_k G^l_{js} - d_j G^l_{ks} + G^m_{js} G^l_{km} - G^m_{ks} G^l_{jm}`,
//! and the Ricci tensor is the contraction `rho_{js} = R_{jks}^k`. That
//! slot choice is pinned by the anchor identities exercised in the tests
//! (`rho_12 = -d1 d2 phi` for the canonical-potential form, and
//! `R(u,w)w = rho(u,w) w` on the homogeneous family).

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::Ex;
use crate::jets::{jet_lift, Jet};

pub type J2 = [Jet; 2];
pub type J22 = [[Jet; 2]; 2];
pub type J222 = [[[Jet; 2]; 2]; 2];
pub type J2222 = [[[[Jet; 2]; 2]; 2]; 2];

/// A torsion-free affine connection on a surface chart, stored as
/// closed-form Christoffel symbols `gamma[l][j][k] = G^l_{jk}`.
#[derive(Clone, Debug)]
pub struct Connection {
    pub chart: Chart,
    pub gamma: [[[Ex; 2]; 2]; 2],
}

impl Connection {
    pub fn new(chart: Chart, gamma: [[[Ex; 2]; 2]; 2]) -> Connection {
        Connection { chart, gamma }
    }

    pub fn flat(chart: Chart) -> Connection {
        let z = || Ex::zero();
        Connection {
            chart,
            gamma: [[[z(), z()], [z(), z()]], [[z(), z()], [z(), z()]]],
        }
    }

    /// Christoffel symbols as jets at a point.
    pub fn gamma_jets(&self, p: &[f64], order: usize) -> Result<J222> {
        let mut out = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| Jet::constant(2, 0, 0.0)))
        });
        for l in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let jet = jet_lift(&self.gamma[l][j][k], p, order)?;
                    if !jet.is_finite() {
                        return Err(Error::NonFinite {
                            what: "Christoffel symbol",
                            point: p.to_vec(),
                        });
                    }
                    out[l][j][k] = jet;
                }
            }
        }
        Ok(out)
    }
}

/// A tensor field with `con` contravariant and `cov` covariant slots,
/// components as closed-form expressions (contravariant indices first,
/// row-major).
#[derive(Clone, Debug)]
pub struct TensorField {
    pub chart: Chart,
    pub con: usize,
    pub cov: usize,
    pub comps: Vec<Ex>,
}

impl TensorField {
    pub fn new(chart: Chart, con: usize, cov: usize, comps: Vec<Ex>) -> TensorField {
        assert_eq!(comps.len(), 2usize.pow((con + cov) as u32));
        TensorField {
            chart,
            con,
            cov,
            comps,
        }
    }

    pub fn one_form(chart: Chart, comps: [Ex; 2]) -> TensorField {
        TensorField::new(chart, 0, 1, comps.to_vec())
    }

    pub fn vector(chart: Chart, comps: [Ex; 2]) -> TensorField {
        TensorField::new(chart, 1, 0, comps.to_vec())
    }

    pub fn two_tensor(chart: Chart, comps: [[Ex; 2]; 2]) -> TensorField {
        let v = vec![
            comps[0][0].clone(),
            comps[0][1].clone(),
            comps[1][0].clone(),
            comps[1][1].clone(),
        ];
        TensorField::new(chart, 0, 2, v)
    }

    /// Symmetric product of two 1-forms, `a (x) b` symmetrized.
    pub fn sym_product(chart: Chart, a: &[Ex; 2], b: &[Ex; 2]) -> TensorField {
        let half = Ex::c(0.5);
        let comp = |j: usize, k: usize| {
            half.clone() * (a[j].clone() * b[k].clone() + a[k].clone() * b[j].clone())
        };
        TensorField::two_tensor(chart, [[comp(0, 0), comp(0, 1)], [comp(1, 0), comp(1, 1)]])
    }

    pub fn one_form_jets(&self, p: &[f64], order: usize) -> Result<J2> {
        assert!(self.con == 0 && self.cov == 1);
        Ok([
            jet_lift(&self.comps[0], p, order)?,
            jet_lift(&self.comps[1], p, order)?,
        ])
    }

    pub fn vector_jets(&self, p: &[f64], order: usize) -> Result<J2> {
        assert!(self.con == 1 && self.cov == 0);
        Ok([
            jet_lift(&self.comps[0], p, order)?,
            jet_lift(&self.comps[1], p, order)?,
        ])
    }

    pub fn two_tensor_jets(&self, p: &[f64], order: usize) -> Result<J22> {
        assert!(self.con == 0 && self.cov == 2);
        Ok([
            [
                jet_lift(&self.comps[0], p, order)?,
                jet_lift(&self.comps[1], p, order)?,
            ],
            [
                jet_lift(&self.comps[2], p, order)?,
                jet_lift(&self.comps[3], p, order)?,
            ],
        ])
    }
}

fn zj() -> Jet {
    Jet::constant(2, 0, 0.0)
}

/// `R_{jks}^l` as jets from Christoffel jets (order drops by one).
pub fn curvature_jets(g: &J222) -> J2222 {
    let mut r: J2222 = std::array::from_fn(|_| {
        std::array::from_fn(|_| std::array::from_fn(|_| std::array::from_fn(|_| zj())))
    });
    for j in 0..2 {
        for k in 0..2 {
            for s in 0..2 {
                for l in 0..2 {
                    let mut acc = g[l][j][s].derivative(k) - g[l][k][s].derivative(j);
                    for m in 0..2 {
                        acc = acc + g[m][j][s].mul(&g[l][k][m]) - g[m][k][s].mul(&g[l][j][m]);
                    }
                    r[j][k][s][l] = acc;
                }
            }
        }
    }
    r
}

/// `rho_{js} = R_{jks}^k`.
pub fn ricci_jets(r: &J2222) -> J22 {
    std::array::from_fn(|j| std::array::from_fn(|s| &r[j][0][s][0] + &r[j][1][s][1]))
}

/// Covariant derivative of a 1-form, direction slot first:
/// `(D xi)[j][k] = [D_j xi]_k = d_j xi_k - G^s_{jk} xi_s`.
pub fn cov_deriv_one_form(g: &J222, xi: &J2) -> J22 {
    std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut acc = xi[k].derivative(j);
            for s in 0..2 {
                acc = acc - g[s][j][k].mul(&xi[s]);
            }
            acc
        })
    })
}

/// Covariant derivative of a (0,2)-tensor, direction slot first.
pub fn cov_deriv_two_tensor(g: &J222, t: &J22) -> J222 {
    std::array::from_fn(|m| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let mut acc = t[j][k].derivative(m);
                for s in 0..2 {
                    acc = acc - g[s][m][j].mul(&t[s][k]) - g[s][m][k].mul(&t[j][s]);
                }
                acc
            })
        })
    })
}

/// Codazzi 3-tensor of a (0,2)-tensor:
/// `(d^D t)[j][k][l] = t_{kl,j} - t_{jl,k}`.
pub fn codazzi_jets(g: &J222, t: &J22) -> J222 {
    let nt = cov_deriv_two_tensor(g, t);
    std::array::from_fn(|j| {
        std::array::from_fn(|k| std::array::from_fn(|l| &nt[j][k][l] - &nt[k][j][l]))
    })
}

/// The morphism `D w`: `(D w)^k_j = d_j w^k + G^k_{js} w^s`, returned as
/// `m[k][j]` (upper index first).
pub fn cov_deriv_vector(g: &J222, w: &J2) -> J22 {
    std::array::from_fn(|k| {
        std::array::from_fn(|j| {
            let mut acc = w[k].derivative(j);
            for s in 0..2 {
                acc = acc + g[k][j][s].mul(&w[s]);
            }
            acc
        })
    })
}

/// Exterior derivative of a 1-form: `(d b)[j][k] = d_j b_k - d_k b_j`.
pub fn exterior_one_form(beta: &J2) -> J22 {
    std::array::from_fn(|j| std::array::from_fn(|k| beta[k].derivative(j) - beta[j].derivative(k)))
}

/// Coordinate Lie bracket `[u,v]^j = u^k d_k v^j - v^k d_k u^j`.
pub fn lie_bracket_jets(u: &J2, v: &J2) -> J2 {
    std::array::from_fn(|j| {
        let mut acc = u[0].mul(&v[j].derivative(0)) - v[0].mul(&u[j].derivative(0));
        acc = acc + u[1].mul(&v[j].derivative(1)) - v[1].mul(&u[j].derivative(1));
        acc
    })
}

/// `div w = tr D w`.
pub fn divergence_jets(g: &J222, w: &J2) -> Jet {
    let m = cov_deriv_vector(g, w);
    &m[0][0] + &m[1][1]
}

/// Lie derivative of a (0,2)-tensor along a vector field:
/// `(L_v t)_{jk} = v^m d_m t_{jk} + t_{mk} d_j v^m + t_{jm} d_k v^m`.
pub fn lie_two_tensor(v: &J2, t: &J22) -> J22 {
    std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let mut acc = v[0].mul(&t[j][k].derivative(0)) + v[1].mul(&t[j][k].derivative(1));
            for m in 0..2 {
                acc = acc + t[m][k].mul(&v[m].derivative(j)) + t[j][m].mul(&v[m].derivative(k));
            }
            acc
        })
    })
}

// ---------------------------------------------------------------------------
// Point-valued wrappers.

/// Curvature values `R_{jks}^l` at `p`.
pub fn curvature(c: &Connection, p: &[f64]) -> Result<[[[[f64; 2]; 2]; 2]; 2]> {
    let g = c.gamma_jets(p, 1)?;
    let r = curvature_jets(&g);
    Ok(std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            std::array::from_fn(|s| std::array::from_fn(|l| r[j][k][s][l].value()))
        })
    }))
}

/// Ricci values `rho_{jk}` at `p`.
pub fn ricci(c: &Connection, p: &[f64]) -> Result<[[f64; 2]; 2]> {
    let g = c.gamma_jets(p, 1)?;
    let rho = ricci_jets(&curvature_jets(&g));
    Ok(std::array::from_fn(|j| {
        std::array::from_fn(|k| rho[j][k].value())
    }))
}

/// Covariant derivative of a covariant tensor of rank <= 3 (or a vector
/// field), direction slot first, flattened row-major.
pub fn covariant_derivative(t: &TensorField, c: &Connection, p: &[f64]) -> Result<Vec<f64>> {
    let order = 1;
    let g = c.gamma_jets(p, order)?;
    if t.con == 1 && t.cov == 0 {
        let v = t.vector_jets(p, order)?;
        let m = cov_deriv_vector(&g, &v);
        // returned as (D v)^k_j flattened with k outer
        return Ok(vec![
            m[0][0].value(),
            m[0][1].value(),
            m[1][0].value(),
            m[1][1].value(),
        ]);
    }
    assert!(t.con == 0 && t.cov >= 1 && t.cov <= 3, "rank out of range");
    match t.cov {
        1 => {
            let xi = t.one_form_jets(p, order)?;
            let d = cov_deriv_one_form(&g, &xi);
            Ok(vec![
                d[0][0].value(),
                d[0][1].value(),
                d[1][0].value(),
                d[1][1].value(),
            ])
        }
        2 => {
            let tt = t.two_tensor_jets(p, order)?;
            let d = cov_deriv_two_tensor(&g, &tt);
            let mut out = Vec::with_capacity(8);
            for m in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        out.push(d[m][j][k].value());
                    }
                }
            }
            Ok(out)
        }
        _ => {
            // rank 3, componentwise
            let mut jets = Vec::with_capacity(8);
            for e in &t.comps {
                jets.push(jet_lift(e, p, order)?);
            }
            let idx = |a: usize, b: usize, cc: usize| 4 * a + 2 * b + cc;
            let mut out = Vec::with_capacity(16);
            for m in 0..2 {
                for a in 0..2 {
                    for b in 0..2 {
                        for cc in 0..2 {
                            let mut acc = jets[idx(a, b, cc)].derivative(m);
                            for s in 0..2 {
                                acc = acc
                                    - g[s][m][a].mul(&jets[idx(s, b, cc)])
                                    - g[s][m][b].mul(&jets[idx(a, s, cc)])
                                    - g[s][m][cc].mul(&jets[idx(a, b, s)]);
                            }
                            out.push(acc.value());
                        }
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Exterior derivative of a 1-form (result `(db)_{jk}`) or of a 2-form
/// (identically zero on a surface).
pub fn exterior_derivative(omega: &TensorField, p: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(omega.con, 0, "exterior derivative needs a form");
    match omega.cov {
        1 => {
            let b = omega.one_form_jets(p, 1)?;
            let d = exterior_one_form(&b);
            Ok(vec![
                d[0][0].value(),
                d[0][1].value(),
                d[1][0].value(),
                d[1][1].value(),
            ])
        }
        2 => Ok(vec![0.0; 8]),
        r => Err(Error::Precondition(format!(
            "exterior derivative of rank-{r} input on a surface"
        ))),
    }
}

/// Lie bracket of two vector fields at `p`.
pub fn lie_bracket(u: &TensorField, v: &TensorField, p: &[f64]) -> Result<[f64; 2]> {
    let uj = u.vector_jets(p, 1)?;
    let vj = v.vector_jets(p, 1)?;
    let b = lie_bracket_jets(&uj, &vj);
    Ok([b[0].value(), b[1].value()])
}

/// `div v` at `p`.
pub fn divergence(c: &Connection, v: &TensorField, p: &[f64]) -> Result<f64> {
    let g = c.gamma_jets(p, 1)?;
    let vj = v.vector_jets(p, 1)?;
    let d = divergence_jets(&g, &vj);
    if !d.is_finite() {
        return Err(Error::NonFinite {
            what: "divergence",
            point: p.to_vec(),
        });
    }
    Ok(d.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn wong_gamma(phi: &Ex) -> [[[Ex; 2]; 2]; 2] {
        let z = Ex::zero;
        [
            [[-phi.dx(0), z()], [z(), z()]],
            [[z(), z()], [z(), phi.dx(1)]],
        ]
    }

    #[test]
    fn flat_connection_has_zero_curvature() {
        let c = Connection::flat(Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]));
        let r = curvature(&c, &[0.3, -1.1]).unwrap();
        for j in 0..2 {
            for k in 0..2 {
                for s in 0..2 {
                    for l in 0..2 {
                        assert_eq!(r[j][k][s][l], 0.0);
                    }
                }
            }
        }
        let rho = ricci(&c, &[0.3, -1.1]).unwrap();
        assert_eq!(rho, [[0.0, 0.0], [0.0, 0.0]]);
    }

    #[test]
    fn canonical_potential_ricci_is_minus_mixed_partial() {
        // potential y1*y2: rho_12 = -1 at every point, rho skew
        let phi = Ex::var(0) * Ex::var(1);
        let c = Connection::new(Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]), wong_gamma(&phi));
        for p in [[0.7, -0.9], [1.5, 1.1], [-0.4, 0.2]] {
            let rho = ricci(&c, &p).unwrap();
            assert_relative_eq!(rho[0][1], -1.0, epsilon = 1e-12);
            assert_relative_eq!(rho[1][0], 1.0, epsilon = 1e-12);
            assert!(rho[0][0].abs() < 1e-12 && rho[1][1].abs() < 1e-12);
        }
        // quadratic extra term drops out of the mixed partial
        let phi2 = Ex::var(0) * Ex::var(1) + Ex::var(0) * Ex::var(0);
        let c2 = Connection::new(Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]), wong_gamma(&phi2));
        let rho = ricci(&c2, &[0.8, 0.3]).unwrap();
        assert_relative_eq!(rho[0][1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_tensor_flat_connection_derivative_vanishes() {
        let chart = Chart::surface([[-1.0, 1.0], [-1.0, 1.0]]);
        let c = Connection::flat(chart.clone());
        let t = TensorField::two_tensor(
            chart,
            [[Ex::c(2.0), Ex::c(-1.0)], [Ex::c(-1.0), Ex::c(5.0)]],
        );
        let d = covariant_derivative(&t, &c, &[0.2, 0.2]).unwrap();
        assert!(d.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn d_squared_of_function_vanishes() {
        // d(dh) = 0 for a sample of scalar fields
        let chart = Chart::surface([[-1.5, 1.5], [-1.5, 1.5]]);
        let h = Ex::var(0).sin() * Ex::var(1).exp() + Ex::var(0) * Ex::var(1);
        let dh = TensorField::one_form(chart.clone(), [h.dx(0), h.dx(1)]);
        for p in chart.sample(50, 3).unwrap() {
            let dd = exterior_derivative(&dh, &p).unwrap();
            for v in dd {
                assert!(v.abs() < 1e-11, "{v}");
            }
        }
    }

    #[test]
    fn bracket_of_field_with_itself_vanishes() {
        let chart = Chart::surface([[-1.0, 1.0], [-1.0, 1.0]]);
        let x = TensorField::vector(chart, [Ex::var(1).exp(), Ex::var(0) * Ex::var(1)]);
        let b = lie_bracket(&x, &x, &[0.4, -0.7]).unwrap();
        assert_eq!(b, [0.0, 0.0]);
    }

    #[test]
    fn divergence_of_constant_field_flat() {
        let chart = Chart::surface([[-1.0, 1.0], [-1.0, 1.0]]);
        let c = Connection::flat(chart.clone());
        let v = TensorField::vector(chart, [Ex::c(3.0), Ex::c(-2.0)]);
        assert_eq!(divergence(&c, &v, &[0.1, 0.9]).unwrap(), 0.0);
    }

    #[test]
    fn skew_part_of_nabla_xi_is_half_exterior_derivative() {
        // for torsion-free connections d xi agrees with the antisymmetrized
        // covariant derivative; checked on a non-flat connection
        let phi = Ex::var(0) * Ex::var(1);
        let chart = Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]);
        let c = Connection::new(chart.clone(), wong_gamma(&phi));
        let xi = TensorField::one_form(
            chart.clone(),
            [Ex::var(1) * Ex::var(1), Ex::var(0).sin()],
        );
        for p in chart.sample(25, 11).unwrap() {
            let d = covariant_derivative(&xi, &c, &p).unwrap();
            let ext = exterior_derivative(&xi, &p).unwrap();
            // (d xi)_{01} vs (D xi)_{01} - (D xi)_{10}
            assert_relative_eq!(ext[1], d[1] - d[2], epsilon = 1e-10);
        }
    }
}

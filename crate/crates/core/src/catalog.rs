//! Concrete connections in explicit charts: the canonical-potential form,
//! the homogeneous two-parameter family `nabla(a,b)` on a solvable group
//! chart, its two coordinate degenerations on the plane, the
//! kernel-of-Killing family, and the null-cone connection on a Lorentzian
//! quadric.

use crate::chart::Chart;
use crate::error::{Error, Result};
use crate::expr::{cosh, sinh, Ex};
use crate::jets::jet_lift;
use crate::tensorfield::{lie_bracket_jets, Connection};

/// A connection specified by a moving frame `e_1, e_2` and the expansion
/// coefficients of the covariant derivative on the frame,
/// `D_{e_i} e_j = c^k_{ij} e_k`.
#[derive(Clone, Debug)]
pub struct FrameConnection {
    pub chart: Chart,
    /// `frame[i][m]`: m-th chart component of the i-th frame field.
    pub frame: [[Ex; 2]; 2],
    /// `coeffs[i][j][k] = c^k_{ij}`.
    pub coeffs: [[[Ex; 2]; 2]; 2],
    /// Declared bracket `[e_1, e_2] = b^k e_k`.
    pub bracket: [Ex; 2],
    /// Named scalar fields attached to the construction.
    pub scalars: Vec<(String, Ex)>,
}

impl FrameConnection {
    pub fn scalar(&self, name: &str) -> Option<&Ex> {
        self.scalars
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, e)| e)
    }

    /// Chart Christoffel symbols, derived symbolically from the frame
    /// expansion. With `E[i][m]` the frame matrix and
    /// `M^s_{ij} = c^k_{ij} E[k][s] - E[i][m] d_m E[j][s]`,
    /// the chart symbols solve `E G^s E^T = M^s`.
    pub fn to_connection(&self) -> Connection {
        let e = &self.frame;
        let det = e[0][0].clone() * e[1][1].clone() - e[0][1].clone() * e[1][0].clone();
        let inv = [
            [e[1][1].clone() / det.clone(), -(e[0][1].clone() / det.clone())],
            [-(e[1][0].clone() / det.clone()), e[0][0].clone() / det.clone()],
        ];
        let mut gamma: [[[Ex; 2]; 2]; 2] = std::array::from_fn(|_| {
            std::array::from_fn(|_| std::array::from_fn(|_| Ex::zero()))
        });
        for s in 0..2 {
            let mut m: [[Ex; 2]; 2] =
                std::array::from_fn(|_| std::array::from_fn(|_| Ex::zero()));
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = Ex::zero();
                    for k in 0..2 {
                        acc = acc + self.coeffs[i][j][k].clone() * e[k][s].clone();
                    }
                    for mm in 0..2 {
                        acc = acc - e[i][mm].clone() * e[j][s].dx(mm);
                    }
                    m[i][j] = acc;
                }
            }
            for mm in 0..2 {
                for l in 0..2 {
                    let mut acc = Ex::zero();
                    for i in 0..2 {
                        for j in 0..2 {
                            acc = acc
                                + inv[mm][i].clone() * m[i][j].clone() * inv[l][j].clone();
                        }
                    }
                    gamma[s][mm][l] = acc;
                }
            }
        }
        // symmetrize the lower pair; the asymmetry residual is checked by
        // `frame_round_trip` and the torsion gates
        let half = Ex::c(0.5);
        let sym: [[[Ex; 2]; 2]; 2] = std::array::from_fn(|s| {
            std::array::from_fn(|mm| {
                std::array::from_fn(|l| {
                    half.clone() * (gamma[s][mm][l].clone() + gamma[s][l][mm].clone())
                })
            })
        });
        Connection::new(self.chart.clone(), sym)
    }

    /// Frame determinant at a point.
    pub fn frame_det(&self, p: &[f64]) -> f64 {
        self.frame[0][0].eval(p) * self.frame[1][1].eval(p)
            - self.frame[0][1].eval(p) * self.frame[1][0].eval(p)
    }

    /// Residual of the declared bracket relation at a point.
    pub fn bracket_residual(&self, p: &[f64]) -> Result<f64> {
        let order = 1;
        let e0 = [
            jet_lift(&self.frame[0][0], p, order)?,
            jet_lift(&self.frame[0][1], p, order)?,
        ];
        let e1 = [
            jet_lift(&self.frame[1][0], p, order)?,
            jet_lift(&self.frame[1][1], p, order)?,
        ];
        let br = lie_bracket_jets(&e0, &e1);
        let b0 = self.bracket[0].eval(p);
        let b1 = self.bracket[1].eval(p);
        let mut res: f64 = 0.0;
        for m in 0..2 {
            let declared = b0 * self.frame[0][m].eval(p) + b1 * self.frame[1][m].eval(p);
            res = res.max((br[m].value() - declared).abs());
        }
        Ok(res)
    }

    /// Re-expands the derived chart connection on the frame and returns the
    /// largest deviation from the declared coefficients at `p`.
    pub fn round_trip_residual(&self, conn: &Connection, p: &[f64]) -> Result<f64> {
        let d = self.frame_det(p);
        if d.abs() < 1e-6 {
            return Err(Error::FrameDegenerate(p.to_vec(), d));
        }
        let g = conn.gamma_jets(p, 1)?;
        let ev = |i: usize, m: usize| jet_lift(&self.frame[i][m], p, 1);
        let e = [[ev(0, 0)?, ev(0, 1)?], [ev(1, 0)?, ev(1, 1)?]];
        let mut res: f64 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                // (D_{e_i} e_j)^s = e_i^m ( d_m e_j^s + G^s_{ml} e_j^l )
                let mut cov = [0.0, 0.0];
                for s in 0..2 {
                    let mut acc = 0.0;
                    for m in 0..2 {
                        let mut inner = e[j][s].derivative(m).value();
                        for l in 0..2 {
                            inner += g[s][m][l].value() * e[j][l].value();
                        }
                        acc += e[i][m].value() * inner;
                    }
                    cov[s] = acc;
                }
                // solve cov = x^k e_k for x
                let ev00 = e[0][0].value();
                let ev01 = e[0][1].value();
                let ev10 = e[1][0].value();
                let ev11 = e[1][1].value();
                let det = ev00 * ev11 - ev01 * ev10;
                let x0 = (cov[0] * ev11 - cov[1] * ev10) / det;
                let x1 = (cov[1] * ev00 - cov[0] * ev01) / det;
                res = res.max((x0 - self.coeffs[i][j][0].eval(p)).abs());
                res = res.max((x1 - self.coeffs[i][j][1].eval(p)).abs());
            }
        }
        Ok(res)
    }
}

/// Chart Christoffel values of a frame connection at a point.
pub fn frame_to_christoffel(fc: &FrameConnection, p: &[f64]) -> Result<[[[f64; 2]; 2]; 2]> {
    let d = fc.frame_det(p);
    if d.abs() < 1e-6 {
        return Err(Error::FrameDegenerate(p.to_vec(), d));
    }
    let conn = fc.to_connection();
    let g = conn.gamma_jets(p, 0)?;
    Ok(std::array::from_fn(|l| {
        std::array::from_fn(|j| std::array::from_fn(|k| g[l][j][k].value()))
    }))
}

/// The canonical coordinate form of a Ricci-skew surface connection: all
/// components vanish except `G^1_11 = -d_1 phi` and `G^2_22 = d_2 phi`.
pub fn wong_connection(potential: &Ex) -> Connection {
    let chart = Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]);
    let z = Ex::zero;
    let gamma = [
        [[-potential.dx(0), z()], [z(), z()]],
        [[z(), z()], [z(), potential.dx(1)]],
    ];
    Connection::new(chart, gamma)
}

/// The left-invariant family on the non-Abelian two-dimensional group,
/// realized on the chart `(x,t)` with `u = e^{-2t} d/dx`, `w = d/dt`, so
/// `[u,w] = 2u`. Requires `ab = 0`.
///
/// Attached scalars: `f = e^{-2t}` (the positive character with
/// `d_u f = 0`, `d_w f = -2f`) and `psi = 2x` (an antiderivative with
/// `3 d psi = -f phi`, used by the right-invariant fields).
pub fn nabla_ab(a: f64, b: f64) -> Result<FrameConnection> {
    if a * b != 0.0 {
        return Err(Error::Precondition(format!(
            "nabla(a,b) requires ab = 0, got a = {a}, b = {b}"
        )));
    }
    let chart = Chart::new(&["x", "t"], &[[-2.0, 2.0], [-0.9, 0.9]]);
    let f = (Ex::c(-2.0) * Ex::var(1)).exp();
    let u = [f.clone(), Ex::zero()];
    let w = [Ex::zero(), Ex::one()];
    let c = |v: f64| Ex::c(v);
    let coeffs = [
        [[c(3.0 + a), c(-a)], [c(a), c(3.0 - a)]],
        [[c(a - 2.0), c(3.0 - a)], [c(a + b - 1.0), c(2.0 - a)]],
    ];
    Ok(FrameConnection {
        chart,
        frame: [u, w],
        coeffs,
        bracket: [Ex::c(2.0), Ex::zero()],
        scalars: vec![
            ("f".into(), f),
            ("psi".into(), Ex::c(2.0) * Ex::var(0)),
        ],
    })
}

/// Plane realization of the `(a,b) = (0,1)` connection that extends
/// smoothly through the degeneracy locus `y1 = 0` of its frame. Defined by
/// the coordinate derivatives `D_(1,0)(1,0) = 0`,
/// `D_(1,0)(0,1) = D_(0,1)(1,0) = (3 y1, 0)`, `D_(0,1)(0,1) = (0, 3 y1)`.
pub fn slsgp_connection() -> Connection {
    let chart = Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]);
    let y1 = Ex::var(0);
    let z = Ex::zero;
    let three_y1 = Ex::c(3.0) * y1;
    let gamma = [
        [
            [z(), three_y1.clone()],
            [three_y1.clone(), z()],
        ],
        [[z(), z()], [z(), three_y1]],
    ];
    Connection::new(chart, gamma)
}

/// The frame form of [`slsgp_connection`] on the half-plane `y1 > 0`, with
/// `u = (0, 1/y1)`, `w = (2 y1, 0)` and the `(a,b) = (0,1)` coefficients.
pub fn slsgp_frame() -> FrameConnection {
    let chart = Chart::new(&["y1", "y2"], &[[0.2, 2.0], [-2.0, 2.0]]);
    let y1 = Ex::var(0);
    let u = [Ex::zero(), Ex::one() / y1.clone()];
    let w = [Ex::c(2.0) * y1, Ex::zero()];
    let c = |v: f64| Ex::c(v);
    let coeffs = [
        [[c(3.0), c(0.0)], [c(0.0), c(3.0)]],
        [[c(-2.0), c(3.0)], [c(0.0), c(2.0)]],
    ];
    FrameConnection {
        chart,
        frame: [u, w],
        coeffs,
        bracket: [Ex::c(2.0), Ex::zero()],
        scalars: vec![],
    }
}

/// The unimodular-invariant connection on the plane with area form
/// `Omega`, radial field `w`, and parameter `c != 0`:
/// `D_u v = 2c [Omega(w,u) v + Omega(w,v) u] - c^2 Omega(w,u) Omega(w,v) w`
/// for constant `v`.
pub fn slinv_connection(cc: f64) -> Result<Connection> {
    if cc == 0.0 {
        return Err(Error::Precondition("slinv requires c != 0".into()));
    }
    let chart = Chart::surface([[-2.0, 2.0], [-2.0, 2.0]]);
    let y1 = Ex::var(0);
    let y2 = Ex::var(1);
    // a_j = Omega(w, d_j): a_1 = -y2, a_2 = y1
    let a = [-y2.clone(), y1.clone()];
    let w = [y1, y2];
    let c2 = Ex::c(2.0 * cc);
    let csq = Ex::c(cc * cc);
    let gamma: [[[Ex; 2]; 2]; 2] = std::array::from_fn(|l| {
        std::array::from_fn(|j| {
            std::array::from_fn(|k| {
                let mut acc = Ex::zero();
                if l == k {
                    acc = acc + c2.clone() * a[j].clone();
                }
                if l == j {
                    acc = acc + c2.clone() * a[k].clone();
                }
                acc - csq.clone() * a[j].clone() * a[k].clone() * w[l].clone()
            })
        })
    });
    Ok(Connection::new(chart, gamma))
}

/// Chart realization of the kernel-of-Killing family: on `(x,t)`,
///
/// ```text
/// v = (e^{-6t}/3) d/dx - (e^{-4t}/2) d/dt,   w = d/dt,
/// psi = e^{-4t}/2,                           chi = -2 e^{4t} + c0,
/// ```
///
/// which satisfies `[v,w] = 6v + 2 psi w`, `d_v psi = 4 psi^2`,
/// `d_w psi = -4 psi`, `d_v chi = 4`, `psi != 0`, and carries the
/// connection `D_v v = 5 psi v`, `D_w v = psi w`, `D_v w = 6v + 3 psi w`,
/// `D_w w = 15 chi v - 4w`. For `c0 = 0` the product `psi chi` is the
/// constant `-1` and the connection is the homogeneous `nabla(-9,0)`; any
/// `c0 != 0` gives a non-homogeneous member. The constructor verifies the
/// defining relations numerically and refuses a realization that fails
/// them.
pub fn nvv_connection(c0: f64) -> Result<FrameConnection> {
    let chart = Chart::new(&["x", "t"], &[[-2.0, 2.0], [-0.5, 0.5]]);
    let t = Ex::var(1);
    let e6 = (Ex::c(-6.0) * t.clone()).exp();
    let e4 = (Ex::c(-4.0) * t.clone()).exp();
    let psi = e4.clone() * Ex::c(0.5);
    let chi = Ex::c(-2.0) * (Ex::c(4.0) * t.clone()).exp() + Ex::c(c0);
    let v = [e6 / Ex::c(3.0), -(e4 * Ex::c(0.5))];
    let w = [Ex::zero(), Ex::one()];
    let coeffs = [
        [
            [Ex::c(5.0) * psi.clone(), Ex::zero()],
            [Ex::c(6.0), Ex::c(3.0) * psi.clone()],
        ],
        [
            [Ex::zero(), psi.clone()],
            [Ex::c(15.0) * chi.clone(), Ex::c(-4.0)],
        ],
    ];
    let fc = FrameConnection {
        chart,
        frame: [v, w],
        coeffs,
        bracket: [Ex::c(6.0), Ex::c(2.0) * psi.clone()],
        scalars: vec![("psi".into(), psi.clone()), ("chi".into(), chi.clone())],
    };
    // residual gate on the defining relations
    for p in fc.chart.sample(40, 0x6e76)? {
        let dv = |h: &Ex| {
            fc.frame[0][0].eval(&p) * h.dx(0).eval(&p) + fc.frame[0][1].eval(&p) * h.dx(1).eval(&p)
        };
        let dw = |h: &Ex| h.dx(1).eval(&p);
        let pv = psi.eval(&p);
        let checks = [
            ("d_v psi = 4 psi^2", dv(&psi) - 4.0 * pv * pv),
            ("d_w psi = -4 psi", dw(&psi) + 4.0 * pv),
            ("d_v chi = 4", dv(&chi) - 4.0),
            ("bracket", fc.bracket_residual(&p)?),
        ];
        for (what, r) in checks {
            if r.abs() > 1e-9 {
                return Err(Error::FrameGate(what.into(), r));
            }
        }
        if pv.abs() < 1e-6 {
            return Err(Error::FrameGate("psi != 0".into(), pv));
        }
    }
    Ok(fc)
}

/// 3-space scaffolding for the null-cone connection. Minkowski inner
/// product `(-++)`; `y` the position field on the quadric
/// `y = (sinh r, cosh r cos th, cosh r sin th)`, `p = (1,0,1)` null,
/// `q = (0,1,0)` unit spacelike orthogonal to `p`.
pub struct NullconeData {
    pub chart: Chart,
    pub y: [Ex; 3],
    pub psi: Ex,
    pub vp: [Ex; 3],
    pub vm: [Ex; 3],
    /// Chart components of a 3-vector tangent field.
    pub to_chart: fn(&NullconeData, &[Ex; 3]) -> [Ex; 2],
}

pub fn minkowski(a: &[Ex; 3], b: &[Ex; 3]) -> Ex {
    -(a[0].clone() * b[0].clone()) + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

pub fn nullcone_data() -> NullconeData {
    let chart = Chart::new(&["r", "th"], &[[-1.0, 0.5], [1.0, 2.1]]);
    let r = Ex::var(0);
    let th = Ex::var(1);
    let y = [
        sinh(&r),
        cosh(&r) * th.cos(),
        cosh(&r) * th.sin(),
    ];
    let p3 = [Ex::one(), Ex::zero(), Ex::one()];
    let q3 = [Ex::zero(), Ex::one(), Ex::zero()];
    let psi = minkowski(&y, &p3);
    let yq = minkowski(&y, &q3);
    let mk = |sign: f64| -> [Ex; 3] {
        // y +- q - <y, y +- q> psi^{-1} p, with <y,y> = 1 on the quadric
        let coef = (Ex::one() + Ex::c(sign) * yq.clone()) / psi.clone();
        std::array::from_fn(|i| {
            y[i].clone() + Ex::c(sign) * q3[i].clone() - coef.clone() * p3[i].clone()
        })
    };
    fn to_chart(d: &NullconeData, t3: &[Ex; 3]) -> [Ex; 2] {
        let yr: [Ex; 3] = std::array::from_fn(|i| d.y[i].dx(0));
        let yth: [Ex; 3] = std::array::from_fn(|i| d.y[i].dx(1));
        // y_r and y_th are orthogonal with <y_r,y_r> = -1,
        // <y_th,y_th> = cosh^2 r
        let a_r = -minkowski(t3, &yr);
        let a_th = minkowski(t3, &yth) / (cosh(&Ex::var(0)) * cosh(&Ex::var(0)));
        [a_r, a_th]
    }
    NullconeData {
        chart,
        vp: mk(1.0),
        vm: mk(-1.0),
        y,
        psi,
        to_chart,
    }
}

/// The invariant connection on the punctured one-sheeted hyperboloid, in
/// the frame `X = psi v_+`, `Z = v_- / psi` with `psi = <y,p>`:
/// `D_X X = psi^3 Z - psi X`, `D_X Z = -psi Z`, `D_Z X = psi Z`,
/// `D_Z Z = 0`.
pub fn nullcone_connection() -> FrameConnection {
    let d = nullcone_data();
    let x3: [Ex; 3] = std::array::from_fn(|i| d.psi.clone() * d.vp[i].clone());
    let z3: [Ex; 3] = std::array::from_fn(|i| d.vm[i].clone() / d.psi.clone());
    let x = (d.to_chart)(&d, &x3);
    let z = (d.to_chart)(&d, &z3);
    let psi = d.psi.clone();
    let coeffs = [
        [
            [-psi.clone(), psi.powi(3)],
            [Ex::zero(), -psi.clone()],
        ],
        [[Ex::zero(), psi.clone()], [Ex::zero(), Ex::zero()]],
    ];
    FrameConnection {
        chart: d.chart,
        frame: [x, z],
        coeffs,
        bracket: [Ex::zero(), Ex::c(-2.0) * psi.clone()],
        scalars: vec![("psi".into(), psi)],
    }
}

/// A catalog entry: the chart connection, plus the frame presentation when
/// the construction has one.
pub struct CatalogEntry {
    pub id: String,
    pub conn: Connection,
    pub frame: Option<FrameConnection>,
}

/// The stable string ids accepted by the CLI.
pub fn catalog_entry(id: &str) -> Result<CatalogEntry> {
    let mk_frame = |id: &str, fc: FrameConnection| -> CatalogEntry {
        CatalogEntry {
            id: id.to_string(),
            conn: fc.to_connection(),
            frame: Some(fc),
        }
    };
    if let Some(expr) = id.strip_prefix("wong:") {
        let pot = crate::expr::parse(expr)?;
        return Ok(CatalogEntry {
            id: id.to_string(),
            conn: wong_connection(&pot),
            frame: None,
        });
    }
    if let Some(ab) = id.strip_prefix("nabla_ab:") {
        let parts: Vec<&str> = ab.split(',').collect();
        if parts.len() != 2 {
            return Err(Error::BadCatalogId(id.into()));
        }
        let a: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|_| Error::BadCatalogId(id.into()))?;
        let b: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|_| Error::BadCatalogId(id.into()))?;
        return Ok(mk_frame(id, nabla_ab(a, b)?));
    }
    if let Some(c) = id.strip_prefix("slinv:") {
        let c: f64 = c.trim().parse().map_err(|_| Error::BadCatalogId(id.into()))?;
        return Ok(CatalogEntry {
            id: id.to_string(),
            conn: slinv_connection(c)?,
            frame: None,
        });
    }
    match id {
        "slsgp" => Ok(CatalogEntry {
            id: id.into(),
            conn: slsgp_connection(),
            frame: Some(slsgp_frame()),
        }),
        "nvv" => Ok(mk_frame(id, nvv_connection(1.0)?)),
        "nullcone" => Ok(mk_frame(id, nullcone_connection())),
        _ => Err(Error::BadCatalogId(id.into())),
    }
}

/// The default catalog the acceptance suites iterate over.
pub const DEFAULT_CATALOG: [&str; 8] = [
    "nabla_ab:1,0",
    "nabla_ab:-9,0",
    "nabla_ab:0,-15",
    "nabla_ab:0,1",
    "slsgp",
    "slinv:1",
    "nvv",
    "nullcone",
];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensorfield::{curvature, ricci};
    use approx::assert_relative_eq;

    #[test]
    fn coordinate_frame_with_zero_coeffs_is_flat() {
        let chart = Chart::surface([[-1.0, 1.0], [-1.0, 1.0]]);
        let z = Ex::zero;
        let fc = FrameConnection {
            chart,
            frame: [[Ex::one(), z()], [z(), Ex::one()]],
            coeffs: std::array::from_fn(|_| {
                std::array::from_fn(|_| std::array::from_fn(|_| Ex::zero()))
            }),
            bracket: [Ex::zero(), Ex::zero()],
            scalars: vec![],
        };
        let g = frame_to_christoffel(&fc, &[0.3, 0.4]).unwrap();
        for l in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    assert_eq!(g[l][j][k], 0.0);
                }
            }
        }
    }

    #[test]
    fn nabla_ab_round_trip_and_bracket() {
        for (a, b) in [(1.0, 0.0), (-9.0, 0.0), (0.0, -15.0), (0.0, 1.0)] {
            let fc = nabla_ab(a, b).unwrap();
            let conn = fc.to_connection();
            for p in fc.chart.sample(20, 5).unwrap() {
                assert!(fc.bracket_residual(&p).unwrap() < 1e-12);
                assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-9);
            }
        }
        assert!(nabla_ab(2.0, 1.0).is_err());
    }

    #[test]
    fn nabla_ab_frame_curvature_value() {
        // R(u,w)w = rho(u,w) w = 6 w on the homogeneous family
        let fc = nabla_ab(1.0, 0.0).unwrap();
        let conn = fc.to_connection();
        for p in fc.chart.sample(50, 9).unwrap() {
            let r = curvature(&conn, &p).unwrap();
            let u = [fc.frame[0][0].eval(&p), fc.frame[0][1].eval(&p)];
            let w = [fc.frame[1][0].eval(&p), fc.frame[1][1].eval(&p)];
            // (R(u,w)w)^l = R_{jks}^l u^j w^k w^s
            let mut rw = [0.0, 0.0];
            for l in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        for s in 0..2 {
                            rw[l] += r[j][k][s][l] * u[j] * w[k] * w[s];
                        }
                    }
                }
            }
            assert_relative_eq!(rw[0], 6.0 * w[0], epsilon = 1e-9);
            assert_relative_eq!(rw[1], 6.0 * w[1], epsilon = 1e-9);
        }
    }

    #[test]
    fn slsgp_matches_its_frame_presentation_off_the_axis() {
        let conn = slsgp_connection();
        let fc = slsgp_frame();
        for p in fc.chart.sample(30, 2).unwrap() {
            assert!(fc.bracket_residual(&p).unwrap() < 1e-12);
            assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-10);
        }
        // rho((0,1),(1,0)) = 3 everywhere, including on the axis y1 = 0
        for p in [[0.0, 0.7], [0.5, -0.3], [-1.2, 1.9]] {
            let rho = ricci(&conn, &p).unwrap();
            assert_relative_eq!(rho[1][0], 3.0, epsilon = 1e-12);
            assert_relative_eq!(rho[0][1], -3.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn slinv_ricci_is_constant_multiple_of_area_form() {
        // rho = -6c Omega: pinned by the frame identification below
        // (`slinv_matches_the_one_zero_family`), which forces
        // rho(u,w) = 6 and hence rho_12 = -6c.
        for c in [1.0, -0.5, 2.0] {
            let conn = slinv_connection(c).unwrap();
            for p in [[0.0, 0.0], [0.001, -0.001], [1.3, 0.7], [-1.9, 1.1]] {
                let rho = ricci(&conn, &p).unwrap();
                assert_relative_eq!(rho[0][1], -6.0 * c, epsilon = 1e-10);
                assert_relative_eq!(rho[1][0], 6.0 * c, epsilon = 1e-10);
                assert!(rho[0][0].abs() < 1e-10 && rho[1][1].abs() < 1e-10);
            }
        }
        assert!(slinv_connection(0.0).is_err());
    }

    #[test]
    fn slinv_matches_the_one_zero_family() {
        // off the ray through the constant field v = (0,1), the frame
        // u = [c Omega(w,v)]^{-1} v, w = radial satisfies the (a,b) = (1,0)
        // expansion, and rho(u,w) = 6
        let c = 1.3;
        let conn = slinv_connection(c).unwrap();
        let chart = Chart::new(&["y1", "y2"], &[[0.3, 2.0], [-2.0, 2.0]]);
        let y1 = Ex::var(0);
        let y2 = Ex::var(1);
        let u = [Ex::zero(), Ex::one() / (Ex::c(c) * y1.clone())];
        let w = [y1, y2];
        let fc = FrameConnection {
            chart: chart.clone(),
            frame: [u, w],
            coeffs: [
                [[Ex::c(4.0), Ex::c(-1.0)], [Ex::c(1.0), Ex::c(2.0)]],
                [[Ex::c(-1.0), Ex::c(2.0)], [Ex::zero(), Ex::one()]],
            ],
            bracket: [Ex::c(2.0), Ex::zero()],
            scalars: vec![],
        };
        for p in chart.sample(25, 17).unwrap() {
            assert!(fc.bracket_residual(&p).unwrap() < 1e-10);
            assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-9);
            let rho = ricci(&conn, &p).unwrap();
            let uv = [0.0, 1.0 / (c * p[0])];
            let wv = [p[0], p[1]];
            let mut ruw = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    ruw += rho[j][k] * uv[j] * wv[k];
                }
            }
            assert_relative_eq!(ruw, 6.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn slinv_pullback_by_linear_map_rescales_c() {
        // pulling the connection back through a linear map multiplies the
        // parameter by the determinant; checked for one sheared scaling
        let a = [[2.0, 1.0], [0.0, 3.0]];
        let det = 6.0;
        let c = 0.7;
        let orig = slinv_connection(c).unwrap();
        let scaled = slinv_connection(c * det).unwrap();
        let chart = Chart::surface([[-0.6, 0.6], [-0.6, 0.6]]);
        for p in chart.sample(25, 13).unwrap() {
            let ap = [
                a[0][0] * p[0] + a[0][1] * p[1],
                a[1][0] * p[0] + a[1][1] * p[1],
            ];
            let g_at_ap = orig.gamma_jets(&ap, 0).unwrap();
            let g_scaled = scaled.gamma_jets(&p, 0).unwrap();
            // (A* G)^l_{jk}(p) = (A^{-1})^l_s G^s_{mn}(Ap) A^m_j A^n_k
            let ainv = [[3.0 / det, -1.0 / det], [0.0, 2.0 / det]];
            for l in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        let mut acc = 0.0;
                        for s in 0..2 {
                            for m in 0..2 {
                                for n in 0..2 {
                                    acc += ainv[l][s]
                                        * g_at_ap[s][m][n].value()
                                        * a[m][j]
                                        * a[n][k];
                                }
                            }
                        }
                        assert_relative_eq!(
                            acc,
                            g_scaled[l][j][k].value(),
                            epsilon = 1e-10
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn slinv_radial_field_identity() {
        // w = Omega(w,v') v - Omega(w,v) v' for constant v, v' with
        // Omega(v,v') = 1
        let v = [1.0, 0.0];
        let vp = [0.0, 1.0];
        for p in [[0.3, -1.2], [0.0, 0.0], [1.7, 0.4]] {
            let w = [p[0], p[1]];
            let om_w_vp = w[0] * vp[1] - w[1] * vp[0];
            let om_w_v = w[0] * v[1] - w[1] * v[0];
            for m in 0..2 {
                assert_relative_eq!(
                    w[m],
                    om_w_vp * v[m] - om_w_v * vp[m],
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn nvv_gate_passes_for_valid_realization() {
        let fc = nvv_connection(1.0).unwrap();
        let conn = fc.to_connection();
        for p in fc.chart.sample(20, 1).unwrap() {
            assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-9);
            // rho(v,w) = 4 psi
            let rho = ricci(&conn, &p).unwrap();
            let psi = fc.scalar("psi").unwrap().eval(&p);
            let v = [fc.frame[0][0].eval(&p), fc.frame[0][1].eval(&p)];
            let w = [fc.frame[1][0].eval(&p), fc.frame[1][1].eval(&p)];
            let mut rvw = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    rvw += rho[j][k] * v[j] * w[k];
                }
            }
            assert_relative_eq!(rvw, 4.0 * psi, epsilon = 1e-9);
        }
        // homogeneous member: psi*chi = -1
        let hom = nvv_connection(0.0).unwrap();
        let p = [0.3, 0.1];
        let prod = hom.scalar("psi").unwrap().eval(&p) * hom.scalar("chi").unwrap().eval(&p);
        assert_relative_eq!(prod, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn nullcone_scaffolding_identities() {
        let d = nullcone_data();
        for p in d.chart.sample(40, 21).unwrap() {
            // <y,y> = 1  (one-sheeted hyperboloid)
            assert_relative_eq!(minkowski(&d.y, &d.y).eval(&p), 1.0, epsilon = 1e-12);
            // <v+,v+> = 1 - <y,y> = 0, same for v-
            assert!(minkowski(&d.vp, &d.vp).eval(&p).abs() < 1e-10);
            assert!(minkowski(&d.vm, &d.vm).eval(&p).abs() < 1e-10);
            // <v+,v-> = -1 - <y,y> = -2
            assert_relative_eq!(minkowski(&d.vp, &d.vm).eval(&p), -2.0, epsilon = 1e-10);
            // psi bounded away from zero on the chart
            assert!(d.psi.eval(&p).abs() > 1e-2);
        }
    }

    #[test]
    fn nullcone_ricci_in_frame() {
        // rho(X,Z) = -1 everywhere on the chart
        let fc = nullcone_connection();
        let conn = fc.to_connection();
        for p in fc.chart.sample(30, 23).unwrap() {
            assert!(fc.bracket_residual(&p).unwrap() < 1e-9);
            assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-8);
            let rho = ricci(&conn, &p).unwrap();
            let x = [fc.frame[0][0].eval(&p), fc.frame[0][1].eval(&p)];
            let z = [fc.frame[1][0].eval(&p), fc.frame[1][1].eval(&p)];
            let mut rxz = 0.0;
            for j in 0..2 {
                for k in 0..2 {
                    rxz += rho[j][k] * x[j] * z[k];
                }
            }
            assert_relative_eq!(rxz, -1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn nullcone_carries_the_zero_one_family_frame() {
        // u = 3(v- - v+), w = 2 v- satisfy the (a,b) = (0,1) expansion
        let d = nullcone_data();
        let u3: [Ex; 3] =
            std::array::from_fn(|i| Ex::c(3.0) * (d.vm[i].clone() - d.vp[i].clone()));
        let w3: [Ex; 3] = std::array::from_fn(|i| Ex::c(2.0) * d.vm[i].clone());
        let u = (d.to_chart)(&d, &u3);
        let w = (d.to_chart)(&d, &w3);
        let fc = FrameConnection {
            chart: d.chart.clone(),
            frame: [u, w],
            coeffs: [
                [[Ex::c(3.0), Ex::zero()], [Ex::zero(), Ex::c(3.0)]],
                [[Ex::c(-2.0), Ex::c(3.0)], [Ex::zero(), Ex::c(2.0)]],
            ],
            bracket: [Ex::c(2.0), Ex::zero()],
            scalars: vec![],
        };
        let conn = nullcone_connection().to_connection();
        for p in d.chart.sample(20, 31).unwrap() {
            assert!(fc.bracket_residual(&p).unwrap() < 1e-9);
            assert!(fc.round_trip_residual(&conn, &p).unwrap() < 1e-8);
        }
    }

    #[test]
    fn catalog_ids_parse() {
        for id in DEFAULT_CATALOG {
            assert!(catalog_entry(id).is_ok(), "{id}");
        }
        assert!(catalog_entry("wong:y1*y2").is_ok());
        assert!(catalog_entry("wong:y1*").is_err());
        assert!(catalog_entry("nabla_ab:1,1").is_err());
        assert!(catalog_entry("unknown").is_err());
    }
}

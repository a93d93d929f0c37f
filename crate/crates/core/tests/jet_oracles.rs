//! Independent oracles for the differentiation engine: direct polynomial
//! expansion, central finite differences, and property-based arithmetic
//! invariants.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skewricci_core::expr::Ex;
use skewricci_core::jets::{jet_lift, Jet};
use skewricci_core::randfields::random_smooth_expr;

/// Dense polynomial in two variables with small integer coefficients;
/// the brute-force oracle expands products of such polynomials directly on
/// the coefficient grid, with arithmetic that is exact in f64.
#[derive(Clone, Debug)]
struct Poly {
    deg: usize,
    /// coeffs[i][j] multiplies x^i t^j.
    coeffs: Vec<Vec<f64>>,
}

impl Poly {
    fn random<R: Rng>(rng: &mut R, deg: usize) -> Poly {
        let coeffs = (0..=deg)
            .map(|i| {
                (0..=deg)
                    .map(|j| {
                        if i + j <= deg {
                            rng.random_range(-3..=3) as f64
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Poly { deg, coeffs }
    }

    fn to_expr(&self) -> Ex {
        let mut acc = Ex::zero();
        for i in 0..=self.deg {
            for j in 0..=self.deg {
                let c = self.coeffs[i][j];
                if c != 0.0 {
                    acc = acc
                        + Ex::c(c) * Ex::var(0).powi(i as i32) * Ex::var(1).powi(j as i32);
                }
            }
        }
        acc
    }

    /// Taylor coefficient at the expansion point `p` for multi-index
    /// `(a, b)`, computed by direct binomial re-expansion: the coefficient
    /// of (x-p0)^a (t-p1)^b in sum c_ij x^i t^j is
    /// sum_{i>=a, j>=b} c_ij C(i,a) C(j,b) p0^{i-a} p1^{j-b}.
    fn taylor_coeff(&self, p: [f64; 2], a: usize, b: usize) -> f64 {
        fn binom(n: usize, k: usize) -> f64 {
            let mut acc = 1.0;
            for t in 0..k {
                acc = acc * (n - t) as f64 / (t + 1) as f64;
            }
            acc
        }
        let mut acc = 0.0;
        for i in a..=self.deg {
            for j in b..=self.deg {
                let c = self.coeffs[i][j];
                if c != 0.0 {
                    acc += c
                        * binom(i, a)
                        * binom(j, b)
                        * p[0].powi((i - a) as i32)
                        * p[1].powi((j - b) as i32);
                }
            }
        }
        acc
    }
}

#[test]
fn polynomial_jets_agree_with_direct_expansion_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xbeef);
    for _ in 0..200 {
        let deg = rng.random_range(0..=5usize);
        let poly = Poly::random(&mut rng, deg);
        // half-integer points keep every product exactly representable
        let p = [
            rng.random_range(-4..=4) as f64 / 2.0,
            rng.random_range(-4..=4) as f64 / 2.0,
        ];
        let j = jet_lift(&poly.to_expr(), &p, deg).unwrap();
        for a in 0..=deg {
            for b in 0..=(deg - a) {
                let want = poly.taylor_coeff(p, a, b);
                let mut fact = 1.0;
                for t in 2..=a {
                    fact *= t as f64;
                }
                for t in 2..=b {
                    fact *= t as f64;
                }
                let got = j.partial(&[a, b]).unwrap() / fact;
                assert_eq!(got, want, "deg {deg} index ({a},{b}) at {p:?}");
            }
        }
    }
}

#[test]
fn smooth_jets_agree_with_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xfeed);
    let h = 1e-5;
    let mut checked = 0;
    while checked < 200 {
        let e = random_smooth_expr(&mut rng, 2, 4);
        let p = [rng.random_range(-1.5..1.5), rng.random_range(-1.5..1.5)];
        let j = match jet_lift(&e, &p, 2) {
            Ok(j) if j.is_finite() => j,
            _ => continue,
        };
        // skip expressions that are numerically flat at p; the relative
        // tolerance is meaningless there
        let f = |x: f64, t: f64| e.eval(&[x, t]);
        let fd_x = (f(p[0] + h, p[1]) - f(p[0] - h, p[1])) / (2.0 * h);
        let fd_t = (f(p[0], p[1] + h) - f(p[0], p[1] - h)) / (2.0 * h);
        let fd_xx = (f(p[0] + h, p[1]) - 2.0 * f(p[0], p[1]) + f(p[0] - h, p[1])) / (h * h);
        let fd_tt = (f(p[0], p[1] + h) - 2.0 * f(p[0], p[1]) + f(p[0], p[1] - h)) / (h * h);
        let fd_xt = (f(p[0] + h, p[1] + h) - f(p[0] + h, p[1] - h) - f(p[0] - h, p[1] + h)
            + f(p[0] - h, p[1] - h))
            / (4.0 * h * h);
        let pairs = [
            (j.partial(&[1, 0]).unwrap(), fd_x, 1.0),
            (j.partial(&[0, 1]).unwrap(), fd_t, 1.0),
            // second differences lose ~h^2 * f / h^2 accuracy; widen scale
            (j.partial(&[2, 0]).unwrap(), fd_xx, 100.0),
            (j.partial(&[0, 2]).unwrap(), fd_tt, 100.0),
            (j.partial(&[1, 1]).unwrap(), fd_xt, 100.0),
        ];
        for (jet_v, fd_v, slack) in pairs {
            let scale = 1.0 + jet_v.abs().max(fd_v.abs());
            assert!(
                (jet_v - fd_v).abs() / scale < 1e-5 * slack,
                "jet {jet_v} vs fd {fd_v} for {e} at {p:?}"
            );
        }
        checked += 1;
    }
}

#[test]
fn product_rule_of_lifted_fields() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xabba);
    for _ in 0..100 {
        let f = random_smooth_expr(&mut rng, 2, 3);
        let g = random_smooth_expr(&mut rng, 2, 3);
        let p = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let (jf, jg, jfg) = match (
            jet_lift(&f, &p, 4),
            jet_lift(&g, &p, 4),
            jet_lift(&(f.clone() * g.clone()), &p, 4),
        ) {
            (Ok(a), Ok(b), Ok(c)) if a.is_finite() && b.is_finite() && c.is_finite() => {
                (a, b, c)
            }
            _ => continue,
        };
        let prod = jf.mul(&jg);
        for (a, b) in prod.coeffs().iter().zip(jfg.coeffs()) {
            let scale = 1.0 + a.abs().max(b.abs());
            assert!((a - b).abs() / scale < 1e-12, "{a} vs {b}");
        }
    }
}

proptest! {
    #[test]
    fn jet_addition_commutes_with_evaluation(
        x in -2.0f64..2.0, t in -2.0f64..2.0, c1 in -3.0f64..3.0, c2 in -3.0f64..3.0
    ) {
        let e1 = Ex::c(c1) * Ex::var(0) + Ex::var(1).sin();
        let e2 = Ex::c(c2) * Ex::var(1) + Ex::var(0).cos();
        let p = [x, t];
        let a = jet_lift(&e1, &p, 3).unwrap();
        let b = jet_lift(&e2, &p, 3).unwrap();
        let sum = jet_lift(&(e1 + e2), &p, 3).unwrap();
        let manual = &a + &b;
        for (u, v) in manual.coeffs().iter().zip(sum.coeffs()) {
            prop_assert!((u - v).abs() < 1e-13);
        }
    }

    #[test]
    fn derivative_lowers_order_consistently(
        x in -1.0f64..1.0, t in -1.0f64..1.0
    ) {
        let e = (Ex::var(0) * Ex::var(1)).sin() + Ex::var(0).exp();
        let p = [x, t];
        let j = jet_lift(&e, &p, 4).unwrap();
        let dj = j.derivative(0);
        prop_assert_eq!(dj.order(), 3);
        let d_expr = jet_lift(&e.dx(0), &p, 3).unwrap();
        for (u, v) in dj.coeffs().iter().zip(d_expr.coeffs()) {
            prop_assert!((u - v).abs() < 1e-12, "{} vs {}", u, v);
        }
    }

    #[test]
    fn truncation_is_a_prefix(x in -1.0f64..1.0) {
        let e = Ex::var(0).exp() * Ex::var(1).cos();
        let j = jet_lift(&e, &[x, 0.3], 5).unwrap();
        let t = j.truncate(3);
        prop_assert_eq!(t.coeffs(), &j.coeffs()[..t.coeffs().len()]);
    }
}

#[test]
fn jet_partial_matches_symbolic_derivatives() {
    // jet_partial through the expression route
    let e = (Ex::c(-2.0) * Ex::var(1)).exp() * Ex::var(0);
    let v = skewricci_core::jets::jet_partial(&e, &[1.0, 0.0], &[1, 1]).unwrap();
    assert!((v - (-2.0)).abs() < 1e-13);
    let c = Jet::constant(2, 3, 7.0);
    assert_eq!(c.partial(&[0, 2]).unwrap(), 0.0);
}

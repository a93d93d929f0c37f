//! Seeded random test fields: polynomial tensors (kept polynomial so jet
//! arithmetic on them is exact) and bounded smooth scalar expressions for
//! the jets-versus-finite-differences gate.

use crate::chart::Chart;
use crate::expr::Ex;
use crate::tensorfield::TensorField;
use rand::Rng;

/// Random polynomial of total degree <= `deg` with coefficients uniform in
/// `[-2, 2]`.
pub fn random_poly_scalar<R: Rng>(rng: &mut R, deg: usize) -> Ex {
    let mut acc = Ex::zero();
    for i in 0..=deg {
        for j in 0..=(deg - i) {
            let c: f64 = rng.random_range(-2.0..2.0);
            acc = acc + Ex::c(c) * Ex::var(0).powi(i as i32) * Ex::var(1).powi(j as i32);
        }
    }
    acc
}

pub fn random_poly_one_form<R: Rng>(chart: &Chart, rng: &mut R, deg: usize) -> TensorField {
    TensorField::one_form(
        chart.clone(),
        [random_poly_scalar(rng, deg), random_poly_scalar(rng, deg)],
    )
}

pub fn random_poly_vector<R: Rng>(chart: &Chart, rng: &mut R, deg: usize) -> TensorField {
    TensorField::vector(
        chart.clone(),
        [random_poly_scalar(rng, deg), random_poly_scalar(rng, deg)],
    )
}

pub fn random_poly_sym2<R: Rng>(chart: &Chart, rng: &mut R, deg: usize) -> TensorField {
    let a = random_poly_scalar(rng, deg);
    let b = random_poly_scalar(rng, deg);
    let c = random_poly_scalar(rng, deg);
    TensorField::two_tensor(chart.clone(), [[a, b.clone()], [b, c]])
}

/// Random smooth scalar expression in `dim` variables, built so that every
/// intermediate stays in the domain of its operation on `[-2,2]^dim`:
/// `log`/`sqrt`/division only see arguments bounded away from zero.
pub fn random_smooth_expr<R: Rng>(rng: &mut R, dim: usize, depth: usize) -> Ex {
    if depth == 0 {
        return match rng.random_range(0..3) {
            0 => Ex::c(rng.random_range(-2.0..2.0)),
            1 => Ex::var(rng.random_range(0..dim)),
            _ => Ex::var(rng.random_range(0..dim)) * Ex::c(rng.random_range(-1.0..1.0)),
        };
    }
    let a = random_smooth_expr(rng, dim, depth - 1);
    let b = random_smooth_expr(rng, dim, depth - 1);
    // keep arguments of exp bounded and denominators positive
    let bounded = |e: &Ex| (e.clone() * Ex::c(0.25)).sin();
    let positive = |e: &Ex| Ex::c(3.0) + (e.clone() * Ex::c(0.5)).cos();
    match rng.random_range(0..8) {
        0 => a + b,
        1 => a - b,
        2 => a * b,
        3 => a / positive(&b),
        4 => bounded(&a).exp(),
        5 => positive(&a).log(),
        6 => a.cos() + b.sin(),
        _ => positive(&a).sqrt() * b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smooth_expressions_are_finite_on_the_box() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let e = random_smooth_expr(&mut rng, 2, 4);
            for p in [[-2.0, -2.0], [1.7, -0.3], [2.0, 2.0], [0.0, 0.0]] {
                assert!(e.eval(&p).is_finite());
            }
        }
    }

    #[test]
    fn polynomials_have_bounded_degree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let e = random_poly_scalar(&mut rng, 3);
        // fourth derivative of a cubic vanishes identically
        let d4 = e.dx(0).dx(0).dx(0).dx(0);
        assert_eq!(d4.eval(&[0.3, 0.8]), 0.0);
        let d4t = e.dx(1).dx(1).dx(1).dx(1);
        assert_eq!(d4t.eval(&[0.3, 0.8]), 0.0);
    }
}

//! Forward-mode truncated Taylor arithmetic.
//!
//! A [`Jet`] stores every Taylor coefficient of a scalar quantity at a chart
//! point, up to a truncation order, indexed by multi-indices in graded
//! lexicographic order. All derivatives consumed by the curvature and
//! operator chains are read off jets, so they are exact up to rounding.
//!
//! Charts here have 2 or 4 variables. Surface jets go up to order 16,
//! which is what composing the fourth-order operators with the third-order
//! ones costs; four-variable jets stop at order 6, well past what any
//! curvature computation on the extension needs.

use crate::error::{Error, Result};
use crate::expr::{Ex, Node};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub const MAX_ORDER_DIM2: usize = 16;
pub const MAX_ORDER_DIM4: usize = 6;

/// Number of multi-indices of total degree <= order in `dim` variables.
fn coeff_len(dim: usize, order: usize) -> usize {
    // C(order + dim, dim)
    let mut num = 1usize;
    let mut den = 1usize;
    for i in 0..dim {
        num *= order + dim - i;
        den *= i + 1;
    }
    num / den
}

struct IndexTable {
    /// Multi-indices in graded lexicographic order (degree ascending).
    indices: Vec<[u8; 4]>,
    /// Position lookup for a multi-index.
    pos: HashMap<[u8; 4], usize>,
    /// prod[a * len + b] = position of indices[a] + indices[b], or usize::MAX
    /// if the sum exceeds the truncation order.
    prod: Vec<usize>,
    /// shift[i][a] = position of indices[a] + e_i, or usize::MAX.
    shift: Vec<Vec<usize>>,
}

impl IndexTable {
    fn build(dim: usize, order: usize) -> IndexTable {
        let mut indices: Vec<[u8; 4]> = Vec::with_capacity(coeff_len(dim, order));
        for deg in 0..=order {
            let mut idx = [0u8; 4];
            gen_degree(dim, deg, 0, &mut idx, &mut indices);
        }
        let mut pos = HashMap::with_capacity(indices.len());
        for (k, &ix) in indices.iter().enumerate() {
            pos.insert(ix, k);
        }
        let len = indices.len();
        let mut prod = vec![usize::MAX; len * len];
        for a in 0..len {
            for b in 0..len {
                let mut s = [0u8; 4];
                let mut deg = 0usize;
                for i in 0..4 {
                    s[i] = indices[a][i] + indices[b][i];
                    deg += s[i] as usize;
                }
                if deg <= order {
                    prod[a * len + b] = pos[&s];
                }
            }
        }
        let mut shift = vec![vec![usize::MAX; len]; dim];
        for i in 0..dim {
            for a in 0..len {
                let mut s = indices[a];
                s[i] += 1;
                if let Some(&k) = pos.get(&s) {
                    shift[i][a] = k;
                }
            }
        }
        IndexTable {
            indices,
            pos,
            prod,
            shift,
        }
    }
}

/// Emits all multi-indices of exact degree `deg` in `dim` variables,
/// lexicographically (first variable weighted highest).
fn gen_degree(dim: usize, deg: usize, at: usize, idx: &mut [u8; 4], out: &mut Vec<[u8; 4]>) {
    if at == dim - 1 {
        idx[at] = deg as u8;
        out.push(*idx);
        return;
    }
    for d in (0..=deg).rev() {
        idx[at] = d as u8;
        gen_degree(dim, deg - d, at + 1, idx, out);
    }
    idx[at] = 0;
}

type TableCache = Mutex<HashMap<(usize, usize), Arc<IndexTable>>>;

fn table(dim: usize, order: usize) -> Arc<IndexTable> {
    static CACHE: OnceLock<TableCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(IndexTable::build(dim, order)))
        .clone()
}

/// Truncated multivariate Taylor expansion of a scalar at a point.
///
/// `coeffs[k]` is the Taylor coefficient (partial derivative divided by the
/// factorial of the multi-index) for the k-th multi-index in graded
/// lexicographic order.
#[derive(Clone, Debug)]
pub struct Jet {
    dim: usize,
    order: usize,
    coeffs: Vec<f64>,
}

impl Jet {
    pub fn constant(dim: usize, order: usize, v: f64) -> Jet {
        assert_order(dim, order);
        let mut coeffs = vec![0.0; coeff_len(dim, order)];
        coeffs[0] = v;
        Jet { dim, order, coeffs }
    }

    /// The i-th chart variable as a jet: value plus unit first derivative.
    pub fn variable(dim: usize, order: usize, i: usize, v: f64) -> Jet {
        assert!(i < dim);
        let mut j = Jet::constant(dim, order, v);
        if order >= 1 {
            // Position of e_i: degree-1 block is ordered x0, x1, ...
            j.coeffs[1 + i] = 1.0;
        }
        j
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// The value of the underlying scalar at the expansion point.
    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw partial derivative for a multi-index, i.e. factorial times the
    /// stored coefficient.
    pub fn partial(&self, mi: &[usize]) -> Result<f64> {
        assert_eq!(mi.len(), self.dim);
        let deg: usize = mi.iter().sum();
        if deg > self.order {
            return Err(Error::InsufficientOrder {
                requested: deg,
                order: self.order,
            });
        }
        let mut key = [0u8; 4];
        let mut fact = 1.0;
        for (i, &m) in mi.iter().enumerate() {
            key[i] = m as u8;
            for k in 2..=m {
                fact *= k as f64;
            }
        }
        let t = table(self.dim, self.order);
        Ok(fact * self.coeffs[t.pos[&key]])
    }

    /// Derivative with respect to variable `i`; drops the order by one.
    pub fn derivative(&self, i: usize) -> Jet {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let t = table(self.dim, self.order);
        let new_order = self.order - 1;
        let tn = table(self.dim, new_order);
        let mut coeffs = vec![0.0; tn.indices.len()];
        for (k, &ix) in tn.indices.iter().enumerate() {
            // coefficient of x^ix in d/dx_i is (ix_i + 1) * coeff(ix + e_i)
            let src = t.shift[i][t.pos[&ix]];
            coeffs[k] = (ix[i] as f64 + 1.0) * self.coeffs[src];
        }
        Jet {
            dim: self.dim,
            order: new_order,
            coeffs,
        }
    }

    /// Truncates to a lower order (no-op if already at or below it).
    pub fn truncate(&self, order: usize) -> Jet {
        if order >= self.order {
            return self.clone();
        }
        let tn = table(self.dim, order);
        Jet {
            dim: self.dim,
            order,
            coeffs: self.coeffs[..tn.indices.len()].to_vec(),
        }
    }

    /// Embeds a surface jet into a 4-variable chart whose first two
    /// variables are the surface coordinates.
    pub fn embed_dim4(&self, order: usize) -> Jet {
        assert_eq!(self.dim, 2);
        let order = order.min(self.order);
        let src = self.truncate(order);
        let t2 = table(2, order);
        let t4 = table(4, order);
        let mut coeffs = vec![0.0; t4.indices.len()];
        for (k, &ix) in t2.indices.iter().enumerate() {
            coeffs[t4.pos[&ix]] = src.coeffs[k];
        }
        Jet {
            dim: 4,
            order,
            coeffs,
        }
    }

    fn binop(&self, rhs: &Jet, f: impl Fn(f64, f64) -> f64) -> Jet {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let order = self.order.min(rhs.order);
        let a = self.truncate(order);
        let b = rhs.truncate(order);
        let coeffs = a
            .coeffs
            .iter()
            .zip(b.coeffs.iter())
            .map(|(&x, &y)| f(x, y))
            .collect();
        Jet {
            dim: self.dim,
            order,
            coeffs,
        }
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        assert_eq!(self.dim, rhs.dim, "jet dimension mismatch");
        let order = self.order.min(rhs.order);
        let a = self.truncate(order);
        let b = rhs.truncate(order);
        let t = table(self.dim, order);
        let len = t.indices.len();
        let mut coeffs = vec![0.0; len];
        for ia in 0..len {
            let ca = a.coeffs[ia];
            if ca == 0.0 {
                continue;
            }
            let row = &t.prod[ia * len..(ia + 1) * len];
            for ib in 0..len {
                let k = row[ib];
                if k != usize::MAX {
                    coeffs[k] += ca * b.coeffs[ib];
                }
            }
        }
        Jet {
            dim: self.dim,
            order,
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            dim: self.dim,
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Multiplicative inverse via Newton iteration on the truncated algebra.
    /// The constant term must be nonzero.
    pub fn recip(&self) -> Option<Jet> {
        if self.coeffs[0] == 0.0 {
            return None;
        }
        let mut x = Jet::constant(self.dim, self.order, 1.0 / self.coeffs[0]);
        let two = Jet::constant(self.dim, self.order, 2.0);
        let mut k = 1usize;
        while k <= self.order {
            // x <- x * (2 - self * x), doubling the valid order each pass
            let t = &two - &self.mul(&x);
            x = x.mul(&t);
            k *= 2;
        }
        Some(x)
    }

    /// Applies an analytic function given its value and the series
    /// coefficients g_k for g(z) = sum g_k z^k composed with the nilpotent
    /// part z = self - value.
    fn compose_series(&self, series: &[f64]) -> Jet {
        let mut z = self.clone();
        z.coeffs[0] = 0.0;
        let n = self.order;
        let mut acc = Jet::constant(self.dim, self.order, series[n]);
        for k in (0..n).rev() {
            acc = acc.mul(&z);
            acc.coeffs[0] += series[k];
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let a0 = self.coeffs[0];
        let e = a0.exp();
        let mut series = vec![0.0; self.order + 1];
        let mut fact = 1.0;
        for (k, item) in series.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *item = e / fact;
        }
        self.compose_series(&series)
    }

    /// Natural log; the constant term must be positive.
    pub fn log(&self) -> Option<Jet> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return None;
        }
        // log(a0 + z) = log a0 + sum_{k>=1} (-1)^{k+1} z^k / (k a0^k)
        let mut series = vec![0.0; self.order + 1];
        series[0] = a0.ln();
        let mut p = 1.0;
        for (k, item) in series.iter_mut().enumerate().skip(1) {
            p *= a0;
            *item = if k % 2 == 1 { 1.0 } else { -1.0 } / (k as f64 * p);
        }
        Some(self.compose_series(&series))
    }

    pub fn sin(&self) -> Jet {
        let a0 = self.coeffs[0];
        let (s, c) = (a0.sin(), a0.cos());
        // d^k sin cycles s, c, -s, -c
        let cycle = [s, c, -s, -c];
        let mut series = vec![0.0; self.order + 1];
        let mut fact = 1.0;
        for (k, item) in series.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *item = cycle[k % 4] / fact;
        }
        self.compose_series(&series)
    }

    pub fn cos(&self) -> Jet {
        let a0 = self.coeffs[0];
        let (s, c) = (a0.sin(), a0.cos());
        let cycle = [c, -s, -c, s];
        let mut series = vec![0.0; self.order + 1];
        let mut fact = 1.0;
        for (k, item) in series.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *item = cycle[k % 4] / fact;
        }
        self.compose_series(&series)
    }

    /// Square root; the constant term must be positive.
    pub fn sqrt(&self) -> Option<Jet> {
        let a0 = self.coeffs[0];
        if a0 <= 0.0 {
            return None;
        }
        // sqrt(a0 + z) = sqrt(a0) * sum binom(1/2, k) (z/a0)^k
        let r = a0.sqrt();
        let mut series = vec![0.0; self.order + 1];
        let mut coef = 1.0;
        let mut p = 1.0;
        for (k, item) in series.iter_mut().enumerate() {
            if k > 0 {
                coef *= (0.5 - (k as f64 - 1.0)) / k as f64;
                p *= a0;
            }
            *item = r * coef / p;
        }
        Some(self.compose_series(&series))
    }

    pub fn powi(&self, n: i32) -> Jet {
        if n == 0 {
            return Jet::constant(self.dim, self.order, 1.0);
        }
        let neg = n < 0;
        let mut acc = self.clone();
        for _ in 1..n.abs() {
            acc = acc.mul(self);
        }
        if neg {
            acc.recip().expect("powi of jet with zero constant term")
        } else {
            acc
        }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }
}

fn assert_order(dim: usize, order: usize) {
    let max = match dim {
        2 => MAX_ORDER_DIM2,
        4 => MAX_ORDER_DIM4,
        _ => panic!("unsupported jet dimension {dim}"),
    };
    assert!(order <= max, "jet order {order} exceeds cap for dim {dim}");
}

macro_rules! jet_ops {
    ($lhs:ty, $rhs:ty) => {
        impl std::ops::Add<$rhs> for $lhs {
            type Output = Jet;
            fn add(self, rhs: $rhs) -> Jet {
                self.binop(&rhs, |a, b| a + b)
            }
        }
        impl std::ops::Sub<$rhs> for $lhs {
            type Output = Jet;
            fn sub(self, rhs: $rhs) -> Jet {
                self.binop(&rhs, |a, b| a - b)
            }
        }
        impl std::ops::Mul<$rhs> for $lhs {
            type Output = Jet;
            fn mul(self, rhs: $rhs) -> Jet {
                Jet::mul(&self, &rhs)
            }
        }
    };
}

jet_ops!(&Jet, &Jet);
jet_ops!(Jet, &Jet);
jet_ops!(&Jet, Jet);
jet_ops!(Jet, Jet);

impl std::ops::Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

/// Lifts a scalar expression to its Taylor jet at `p`.
///
/// Division by a jet whose constant term vanishes, and `log`/`sqrt` of a
/// non-positive constant term, are reported as domain faults naming the
/// offending sub-expression. Shared sub-expressions are lifted once
/// (lifting memoizes on node identity).
pub fn jet_lift(expr: &Ex, p: &[f64], order: usize) -> Result<Jet> {
    let dim = p.len();
    assert_order(dim, order);
    let mut cache: HashMap<usize, Jet> = HashMap::new();
    lift_rec(expr, p, dim, order, &mut cache)
}

fn lift_rec(
    expr: &Ex,
    p: &[f64],
    dim: usize,
    order: usize,
    cache: &mut HashMap<usize, Jet>,
) -> Result<Jet> {
    let key = std::sync::Arc::as_ptr(&expr.0) as usize;
    if let Some(hit) = cache.get(&key) {
        return Ok(hit.clone());
    }
    let fault = |op: &'static str| Error::DomainFault {
        op,
        expr: expr.to_string(),
        point: p.to_vec(),
    };
    let out = match &*expr.0 {
        Node::Const(v) => Jet::constant(dim, order, *v),
        Node::Var(i) => Jet::variable(dim, order, *i, p[*i]),
        Node::Add(a, b) => {
            lift_rec(a, p, dim, order, cache)? + lift_rec(b, p, dim, order, cache)?
        }
        Node::Sub(a, b) => {
            lift_rec(a, p, dim, order, cache)? - lift_rec(b, p, dim, order, cache)?
        }
        Node::Mul(a, b) => {
            lift_rec(a, p, dim, order, cache)?.mul(&lift_rec(b, p, dim, order, cache)?)
        }
        Node::Div(a, b) => {
            let den = lift_rec(b, p, dim, order, cache)?;
            let inv = den.recip().ok_or_else(|| fault("div"))?;
            lift_rec(a, p, dim, order, cache)?.mul(&inv)
        }
        Node::Neg(a) => -lift_rec(a, p, dim, order, cache)?,
        Node::Exp(a) => lift_rec(a, p, dim, order, cache)?.exp(),
        Node::Log(a) => lift_rec(a, p, dim, order, cache)?
            .log()
            .ok_or_else(|| fault("log"))?,
        Node::Sin(a) => lift_rec(a, p, dim, order, cache)?.sin(),
        Node::Cos(a) => lift_rec(a, p, dim, order, cache)?.cos(),
        Node::Sqrt(a) => lift_rec(a, p, dim, order, cache)?
            .sqrt()
            .ok_or_else(|| fault("sqrt"))?,
    };
    cache.insert(key, out.clone());
    Ok(out)
}

/// Raw partial derivative of an expression at a point, through a jet of just
/// the needed order.
pub fn jet_partial(expr: &Ex, p: &[f64], mi: &[usize]) -> Result<f64> {
    let order: usize = mi.iter().sum();
    let j = jet_lift(expr, p, order)?;
    j.partial(mi)
}

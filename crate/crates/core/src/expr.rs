//! Scalar-field expressions.
//!
//! Closed-form component functions of charts, connections and tensor fields
//! are kept as small shared ASTs. They support the operations the rest of
//! the engine needs: lifting to truncated Taylor jets at a point (see
//! [`crate::jets`]), exact symbolic partial derivatives (used when deriving
//! Christoffel symbols from a moving frame), and plain `f64` evaluation.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

#[derive(Debug)]
pub enum Node {
    Const(f64),
    Var(usize),
    Add(Ex, Ex),
    Sub(Ex, Ex),
    Mul(Ex, Ex),
    Div(Ex, Ex),
    Neg(Ex),
    Exp(Ex),
    Log(Ex),
    Sin(Ex),
    Cos(Ex),
    Sqrt(Ex),
}

/// A shared, immutable scalar expression.
#[derive(Clone, Debug)]
pub struct Ex(pub Arc<Node>);

impl Ex {
    pub fn c(v: f64) -> Ex {
        Ex(Arc::new(Node::Const(v)))
    }

    pub fn var(i: usize) -> Ex {
        Ex(Arc::new(Node::Var(i)))
    }

    pub fn zero() -> Ex {
        Ex::c(0.0)
    }

    pub fn one() -> Ex {
        Ex::c(1.0)
    }

    fn as_const(&self) -> Option<f64> {
        match &*self.0 {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn exp(&self) -> Ex {
        match self.as_const() {
            Some(v) => Ex::c(v.exp()),
            None => Ex(Arc::new(Node::Exp(self.clone()))),
        }
    }

    pub fn log(&self) -> Ex {
        match self.as_const() {
            Some(v) => Ex::c(v.ln()),
            None => Ex(Arc::new(Node::Log(self.clone()))),
        }
    }

    pub fn sin(&self) -> Ex {
        match self.as_const() {
            Some(v) => Ex::c(v.sin()),
            None => Ex(Arc::new(Node::Sin(self.clone()))),
        }
    }

    pub fn cos(&self) -> Ex {
        match self.as_const() {
            Some(v) => Ex::c(v.cos()),
            None => Ex(Arc::new(Node::Cos(self.clone()))),
        }
    }

    pub fn sqrt(&self) -> Ex {
        match self.as_const() {
            Some(v) => Ex::c(v.sqrt()),
            None => Ex(Arc::new(Node::Sqrt(self.clone()))),
        }
    }

    pub fn powi(&self, n: i32) -> Ex {
        if n == 0 {
            return Ex::one();
        }
        if n < 0 {
            return Ex::one() / self.powi(-n);
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc * self.clone();
        }
        acc
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    /// Exact symbolic partial derivative with respect to variable `i`.
    ///
    /// Derivatives of frame-derived Christoffel symbols are deep shared
    /// DAGs, so both differentiation and evaluation memoize on node
    /// identity.
    pub fn dx(&self, i: usize) -> Ex {
        let mut cache = HashMap::new();
        self.dx_memo(i, &mut cache)
    }

    fn dx_memo(&self, i: usize, cache: &mut HashMap<usize, Ex>) -> Ex {
        if let Some(hit) = cache.get(&self.key()) {
            return hit.clone();
        }
        let out = match &*self.0 {
            Node::Const(_) => Ex::zero(),
            Node::Var(j) => {
                if *j == i {
                    Ex::one()
                } else {
                    Ex::zero()
                }
            }
            Node::Add(a, b) => a.dx_memo(i, cache) + b.dx_memo(i, cache),
            Node::Sub(a, b) => a.dx_memo(i, cache) - b.dx_memo(i, cache),
            Node::Mul(a, b) => {
                a.dx_memo(i, cache) * b.clone() + a.clone() * b.dx_memo(i, cache)
            }
            Node::Div(a, b) => {
                (a.dx_memo(i, cache) * b.clone() - a.clone() * b.dx_memo(i, cache))
                    / (b.clone() * b.clone())
            }
            Node::Neg(a) => -a.dx_memo(i, cache),
            Node::Exp(a) => a.dx_memo(i, cache) * self.clone(),
            Node::Log(a) => a.dx_memo(i, cache) / a.clone(),
            Node::Sin(a) => a.dx_memo(i, cache) * a.cos(),
            Node::Cos(a) => -(a.dx_memo(i, cache) * a.sin()),
            Node::Sqrt(a) => a.dx_memo(i, cache) / (Ex::c(2.0) * self.clone()),
        };
        cache.insert(self.key(), out.clone());
        out
    }

    /// Plain evaluation at a point. NaN propagates silently; jet lifting is
    /// the error-reporting path.
    pub fn eval(&self, p: &[f64]) -> f64 {
        let mut cache = HashMap::new();
        self.eval_memo(p, &mut cache)
    }

    fn eval_memo(&self, p: &[f64], cache: &mut HashMap<usize, f64>) -> f64 {
        if let Some(hit) = cache.get(&self.key()) {
            return *hit;
        }
        let out = match &*self.0 {
            Node::Const(v) => *v,
            Node::Var(i) => p[*i],
            Node::Add(a, b) => a.eval_memo(p, cache) + b.eval_memo(p, cache),
            Node::Sub(a, b) => a.eval_memo(p, cache) - b.eval_memo(p, cache),
            Node::Mul(a, b) => a.eval_memo(p, cache) * b.eval_memo(p, cache),
            Node::Div(a, b) => a.eval_memo(p, cache) / b.eval_memo(p, cache),
            Node::Neg(a) => -a.eval_memo(p, cache),
            Node::Exp(a) => a.eval_memo(p, cache).exp(),
            Node::Log(a) => a.eval_memo(p, cache).ln(),
            Node::Sin(a) => a.eval_memo(p, cache).sin(),
            Node::Cos(a) => a.eval_memo(p, cache).cos(),
            Node::Sqrt(a) => a.eval_memo(p, cache).sqrt(),
        };
        cache.insert(self.key(), out);
        out
    }

    /// Re-index variables, e.g. to embed a surface expression into the
    /// four-dimensional chart of an extension. `map[i]` is the new index of
    /// old variable `i`.
    pub fn remap_vars(&self, map: &[usize]) -> Ex {
        let mut cache = HashMap::new();
        self.remap_memo(map, &mut cache)
    }

    fn remap_memo(&self, map: &[usize], cache: &mut HashMap<usize, Ex>) -> Ex {
        if let Some(hit) = cache.get(&self.key()) {
            return hit.clone();
        }
        let out = match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(i) => Ex::var(map[*i]),
            Node::Add(a, b) => a.remap_memo(map, cache) + b.remap_memo(map, cache),
            Node::Sub(a, b) => a.remap_memo(map, cache) - b.remap_memo(map, cache),
            Node::Mul(a, b) => a.remap_memo(map, cache) * b.remap_memo(map, cache),
            Node::Div(a, b) => a.remap_memo(map, cache) / b.remap_memo(map, cache),
            Node::Neg(a) => -a.remap_memo(map, cache),
            Node::Exp(a) => a.remap_memo(map, cache).exp(),
            Node::Log(a) => a.remap_memo(map, cache).log(),
            Node::Sin(a) => a.remap_memo(map, cache).sin(),
            Node::Cos(a) => a.remap_memo(map, cache).cos(),
            Node::Sqrt(a) => a.remap_memo(map, cache).sqrt(),
        };
        cache.insert(self.key(), out.clone());
        out
    }
}

impl std::ops::Add for Ex {
    type Output = Ex;
    fn add(self, rhs: Ex) -> Ex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Ex::c(a + b);
        }
        Ex(Arc::new(Node::Add(self, rhs)))
    }
}

impl std::ops::Sub for Ex {
    type Output = Ex;
    fn sub(self, rhs: Ex) -> Ex {
        if rhs.is_zero() {
            return self;
        }
        if self.is_zero() {
            return -rhs;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Ex::c(a - b);
        }
        Ex(Arc::new(Node::Sub(self, rhs)))
    }
}

impl std::ops::Mul for Ex {
    type Output = Ex;
    fn mul(self, rhs: Ex) -> Ex {
        if self.is_zero() || rhs.is_zero() {
            return Ex::zero();
        }
        if self.is_one() {
            return rhs;
        }
        if rhs.is_one() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            return Ex::c(a * b);
        }
        Ex(Arc::new(Node::Mul(self, rhs)))
    }
}

impl std::ops::Div for Ex {
    type Output = Ex;
    fn div(self, rhs: Ex) -> Ex {
        if self.is_zero() {
            return Ex::zero();
        }
        if rhs.is_one() {
            return self;
        }
        if let (Some(a), Some(b)) = (self.as_const(), rhs.as_const()) {
            if b != 0.0 {
                return Ex::c(a / b);
            }
        }
        Ex(Arc::new(Node::Div(self, rhs)))
    }
}

impl std::ops::Neg for Ex {
    type Output = Ex;
    fn neg(self) -> Ex {
        match &*self.0 {
            Node::Const(v) => Ex::c(-v),
            Node::Neg(a) => a.clone(),
            _ => Ex(Arc::new(Node::Neg(self))),
        }
    }
}

impl std::ops::Mul<f64> for Ex {
    type Output = Ex;
    fn mul(self, rhs: f64) -> Ex {
        self * Ex::c(rhs)
    }
}

impl Ex {
    fn fmt_depth(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        if depth == 0 {
            return write!(f, "…");
        }
        let d = depth - 1;
        macro_rules! bin {
            ($a:expr, $op:literal, $b:expr) => {{
                write!(f, "(")?;
                $a.fmt_depth(f, d)?;
                write!(f, $op)?;
                $b.fmt_depth(f, d)?;
                write!(f, ")")
            }};
        }
        macro_rules! call {
            ($name:literal, $a:expr) => {{
                write!(f, concat!($name, "("))?;
                $a.fmt_depth(f, d)?;
                write!(f, ")")
            }};
        }
        match &*self.0 {
            Node::Const(v) => write!(f, "{v}"),
            Node::Var(i) => write!(f, "x{i}"),
            Node::Add(a, b) => bin!(a, " + ", b),
            Node::Sub(a, b) => bin!(a, " - ", b),
            Node::Mul(a, b) => bin!(a, " * ", b),
            Node::Div(a, b) => bin!(a, " / ", b),
            Node::Neg(a) => call!("-", a),
            Node::Exp(a) => call!("exp", a),
            Node::Log(a) => call!("log", a),
            Node::Sin(a) => call!("sin", a),
            Node::Cos(a) => call!("cos", a),
            Node::Sqrt(a) => call!("sqrt", a),
        }
    }
}

impl fmt::Display for Ex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // derived expressions can be deep DAGs; print a truncated view
        self.fmt_depth(f, 10)
    }
}

/// Hyperbolic sine built from exponentials.
pub fn sinh(x: &Ex) -> Ex {
    (x.exp() - (-x.clone()).exp()) * Ex::c(0.5)
}

/// Hyperbolic cosine built from exponentials.
pub fn cosh(x: &Ex) -> Ex {
    (x.exp() + (-x.clone()).exp()) * Ex::c(0.5)
}

/// Parses the little expression language used by CLI catalog ids such as
/// `wong:y1*y2`. Grammar: usual precedence for `+ - * /`, unary minus, `^`
/// with integer exponent, parentheses, function calls `exp log sin cos sqrt`,
/// variables `y1`,`y2` (aliases `x`,`t`), and float literals.
pub fn parse(src: &str) -> crate::error::Result<Ex> {
    let toks = tokenize(src)?;
    let mut p = Parser { toks, pos: 0 };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(crate::error::Error::Parse(format!(
            "trailing input at token {} in `{src}`",
            p.pos
        )));
    }
    Ok(e)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn tokenize(src: &str) -> crate::error::Result<Vec<Tok>> {
    let mut out = Vec::new();
    let b: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push(Tok::Plus);
                i += 1;
            }
            '-' => {
                out.push(Tok::Minus);
                i += 1;
            }
            '*' => {
                out.push(Tok::Star);
                i += 1;
            }
            '/' => {
                out.push(Tok::Slash);
                i += 1;
            }
            '^' => {
                out.push(Tok::Caret);
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            _ if c.is_ascii_digit() || c == '.' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == '.') {
                    i += 1;
                }
                let s: String = b[start..i].iter().collect();
                let v: f64 = s
                    .parse()
                    .map_err(|_| crate::error::Error::Parse(format!("bad number `{s}`")))?;
                out.push(Tok::Num(v));
            }
            _ if c.is_ascii_alphabetic() => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(b[start..i].iter().collect()));
            }
            _ => {
                return Err(crate::error::Error::Parse(format!(
                    "unexpected character `{c}`"
                )))
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn expr(&mut self) -> crate::error::Result<Ex> {
        let mut lhs = self.term()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Plus => {
                    self.pos += 1;
                    lhs = lhs + self.term()?;
                }
                Tok::Minus => {
                    self.pos += 1;
                    lhs = lhs - self.term()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn term(&mut self) -> crate::error::Result<Ex> {
        let mut lhs = self.factor()?;
        while let Some(t) = self.peek() {
            match t {
                Tok::Star => {
                    self.pos += 1;
                    lhs = lhs * self.factor()?;
                }
                Tok::Slash => {
                    self.pos += 1;
                    lhs = lhs / self.factor()?;
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> crate::error::Result<Ex> {
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(-self.factor()?);
        }
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            match self.peek().cloned() {
                Some(Tok::Num(v)) if v.fract() == 0.0 => {
                    self.pos += 1;
                    return Ok(base.powi(v as i32));
                }
                _ => {
                    return Err(crate::error::Error::Parse(
                        "exponent must be an integer literal".into(),
                    ))
                }
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> crate::error::Result<Ex> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Ex::c(v))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(crate::error::Error::Parse("missing `)`".into()));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "y1" | "x" => Ok(Ex::var(0)),
                    "y2" | "t" => Ok(Ex::var(1)),
                    "exp" | "log" | "sin" | "cos" | "sqrt" => {
                        if self.peek() != Some(&Tok::LParen) {
                            return Err(crate::error::Error::Parse(format!(
                                "`{name}` needs parentheses"
                            )));
                        }
                        self.pos += 1;
                        let arg = self.expr()?;
                        if self.peek() != Some(&Tok::RParen) {
                            return Err(crate::error::Error::Parse("missing `)`".into()));
                        }
                        self.pos += 1;
                        Ok(match name.as_str() {
                            "exp" => arg.exp(),
                            "log" => arg.log(),
                            "sin" => arg.sin(),
                            "cos" => arg.cos(),
                            _ => arg.sqrt(),
                        })
                    }
                    _ => Err(crate::error::Error::Parse(format!(
                        "unknown identifier `{name}`"
                    ))),
                }
            }
            other => Err(crate::error::Error::Parse(format!(
                "unexpected token {other:?}"
            ))),
        }
    }
}

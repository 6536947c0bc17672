//! Symbolic scalar fields over the phase-space chart `(x, y, p, q)`.
//!
//! A [`ScalarField`] is an immutable expression tree that can be evaluated at a
//! [`Point4`] and differentiated exactly. Construction goes through smart
//! constructors that apply a small set of rewrites (`0*a -> 0`, `a+0 -> a`,
//! `1*a -> a`, constant folding); nothing beyond that is attempted.
//!
//! Surface functions on the 2D base are ordinary fields that never mention
//! `p` or `q`.

mod fd;
mod parse;

use std::fmt;
use std::ops;
use std::sync::Arc;

pub use fd::{fd_jet2, DEFAULT_FD_STEP};
pub use parse::{parse, ParseError};

/// Coordinate on the 4D chart, in basis order `x, y, p, q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    P,
    Q,
}

impl Var {
    pub const ALL: [Var; 4] = [Var::X, Var::Y, Var::P, Var::Q];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Var {
        Var::ALL[i]
    }

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::P => "p",
            Var::Q => "q",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "p" => Some(Var::P),
            "q" => Some(Var::Q),
            _ => None,
        }
    }
}

/// Darboux coordinates of a point of `T*M`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point4 {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
}

impl Point4 {
    pub const fn new(x: f64, y: f64, p: f64, q: f64) -> Self {
        Point4 { x, y, p, q }
    }

    pub fn from_array(c: [f64; 4]) -> Self {
        Point4::new(c[0], c[1], c[2], c[3])
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.p, self.q]
    }

    pub fn coord(&self, v: Var) -> f64 {
        match v {
            Var::X => self.x,
            Var::Y => self.y,
            Var::P => self.p,
            Var::Q => self.q,
        }
    }

    /// Copy of `self` with coordinate `v` shifted by `delta`.
    pub fn shifted(mut self, v: Var, delta: f64) -> Self {
        match v {
            Var::X => self.x += delta,
            Var::Y => self.y += delta,
            Var::P => self.p += delta,
            Var::Q => self.q += delta,
        }
        self
    }

    pub fn norm(&self) -> f64 {
        self.to_array().iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }
}

/// Value, gradient and Hessian of a field at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet2 {
    pub value: f64,
    pub gradient: [f64; 4],
    pub hessian: [[f64; 4]; 4],
}

/// Evaluation outside the domain of some subexpression.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("domain error in `{subexpr}`: {reason}")]
pub struct EvalError {
    pub subexpr: String,
    pub reason: &'static str,
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(Var),
    Add(ScalarField, ScalarField),
    Mul(ScalarField, ScalarField),
    Div(ScalarField, ScalarField),
    PowI(ScalarField, i32),
    Pow(ScalarField, f64),
    Exp(ScalarField),
    Ln(ScalarField),
    Sin(ScalarField),
    Cos(ScalarField),
    Neg(ScalarField),
}

/// Immutable symbolic expression in `x, y, p, q`.
///
/// Cloning is cheap (shared tree). Equality is structural.
#[derive(Clone, PartialEq)]
pub struct ScalarField(Arc<Node>);

impl ScalarField {
    fn node(n: Node) -> Self {
        ScalarField(Arc::new(n))
    }

    pub fn constant(c: f64) -> Self {
        Self::node(Node::Const(c))
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    pub fn var(v: Var) -> Self {
        Self::node(Node::Var(v))
    }

    pub fn x() -> Self {
        Self::var(Var::X)
    }

    pub fn y() -> Self {
        Self::var(Var::Y)
    }

    pub fn p() -> Self {
        Self::var(Var::P)
    }

    pub fn q() -> Self {
        Self::var(Var::Q)
    }

    pub fn as_constant(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    /// True when the tree is literally the constant zero.
    pub fn is_zero(&self) -> bool {
        self.as_constant() == Some(0.0)
    }

    fn is_one(&self) -> bool {
        self.as_constant() == Some(1.0)
    }

    /// Whether `v` occurs anywhere in the tree.
    pub fn mentions(&self, v: Var) -> bool {
        match &*self.0 {
            Node::Const(_) => false,
            Node::Var(w) => *w == v,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.mentions(v) || b.mentions(v),
            Node::PowI(a, _)
            | Node::Pow(a, _)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Neg(a) => a.mentions(v),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match &*self.0 {
            Node::Const(_) | Node::Var(_) => 1,
            Node::Add(a, b) | Node::Mul(a, b) | Node::Div(a, b) => 1 + a.size() + b.size(),
            Node::PowI(a, _)
            | Node::Pow(a, _)
            | Node::Exp(a)
            | Node::Ln(a)
            | Node::Sin(a)
            | Node::Cos(a)
            | Node::Neg(a) => 1 + a.size(),
        }
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => Self::constant(a + b),
            (Some(0.0), _) => other.clone(),
            (_, Some(0.0)) => self.clone(),
            _ => Self::node(Node::Add(self.clone(), other.clone())),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        if other.is_zero() {
            return self.clone();
        }
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) => Self::constant(a * b),
            (Some(0.0), _) | (_, Some(0.0)) => Self::zero(),
            (Some(1.0), _) => other.clone(),
            (_, Some(1.0)) => self.clone(),
            (Some(-1.0), _) => other.neg(),
            (_, Some(-1.0)) => self.neg(),
            _ => Self::node(Node::Mul(self.clone(), other.clone())),
        }
    }

    pub fn div(&self, other: &ScalarField) -> ScalarField {
        match (self.as_constant(), other.as_constant()) {
            (Some(a), Some(b)) if b != 0.0 => Self::constant(a / b),
            (Some(a), _) if a == 0.0 && other.as_constant() != Some(0.0) => Self::zero(),
            _ if other.is_one() => self.clone(),
            _ => Self::node(Node::Div(self.clone(), other.clone())),
        }
    }

    pub fn neg(&self) -> ScalarField {
        match &*self.0 {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Self::node(Node::Neg(self.clone())),
        }
    }

    /// Integer power; valid for any base (nonzero base when `n < 0`).
    pub fn powi(&self, n: i32) -> ScalarField {
        if n == 0 {
            return Self::one();
        }
        if n == 1 {
            return self.clone();
        }
        if let Some(c) = self.as_constant() {
            let v = c.powi(n);
            if v.is_finite() {
                return Self::constant(v);
            }
        }
        Self::node(Node::PowI(self.clone(), n))
    }

    /// Real power; the base must be positive at evaluation time (nonnegative
    /// when `r > 0`). Integer-valued exponents become [`ScalarField::powi`].
    pub fn powf(&self, r: f64) -> ScalarField {
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            return self.powi(r as i32);
        }
        if let Some(c) = self.as_constant() {
            if c > 0.0 {
                return Self::constant(c.powf(r));
            }
        }
        Self::node(Node::Pow(self.clone(), r))
    }

    pub fn exp(&self) -> ScalarField {
        match self.as_constant() {
            Some(c) if c.exp().is_finite() => Self::constant(c.exp()),
            _ => Self::node(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> ScalarField {
        match self.as_constant() {
            Some(c) if c > 0.0 => Self::constant(c.ln()),
            _ => Self::node(Node::Ln(self.clone())),
        }
    }

    pub fn sin(&self) -> ScalarField {
        match self.as_constant() {
            Some(c) => Self::constant(c.sin()),
            None => Self::node(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> ScalarField {
        match self.as_constant() {
            Some(c) => Self::constant(c.cos()),
            None => Self::node(Node::Cos(self.clone())),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        Self::constant(c).mul(self)
    }

    /// Exact partial derivative with respect to `v`.
    pub fn diff(&self, v: Var) -> ScalarField {
        match &*self.0 {
            Node::Const(_) => Self::zero(),
            Node::Var(w) => {
                if *w == v {
                    Self::one()
                } else {
                    Self::zero()
                }
            }
            Node::Add(a, b) => a.diff(v).add(&b.diff(v)),
            Node::Mul(a, b) => a.diff(v).mul(b).add(&a.mul(&b.diff(v))),
            Node::Div(a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                if db.is_zero() {
                    da.div(b)
                } else {
                    da.mul(b).sub(&a.mul(&db)).div(&b.powi(2))
                }
            }
            Node::PowI(a, n) => Self::constant(*n as f64)
                .mul(&a.powi(n - 1))
                .mul(&a.diff(v)),
            Node::Pow(a, r) => Self::constant(*r).mul(&a.powf(r - 1.0)).mul(&a.diff(v)),
            Node::Exp(a) => self.mul(&a.diff(v)),
            Node::Ln(a) => a.diff(v).div(a),
            Node::Sin(a) => a.cos().mul(&a.diff(v)),
            Node::Cos(a) => a.sin().neg().mul(&a.diff(v)),
            Node::Neg(a) => a.diff(v).neg(),
        }
    }

    /// Replace every occurrence of `v` by `with`.
    pub fn substitute(&self, v: Var, with: &ScalarField) -> ScalarField {
        match &*self.0 {
            Node::Const(_) => self.clone(),
            Node::Var(w) => {
                if *w == v {
                    with.clone()
                } else {
                    self.clone()
                }
            }
            Node::Add(a, b) => a.substitute(v, with).add(&b.substitute(v, with)),
            Node::Mul(a, b) => a.substitute(v, with).mul(&b.substitute(v, with)),
            Node::Div(a, b) => a.substitute(v, with).div(&b.substitute(v, with)),
            Node::PowI(a, n) => a.substitute(v, with).powi(*n),
            Node::Pow(a, r) => a.substitute(v, with).powf(*r),
            Node::Exp(a) => a.substitute(v, with).exp(),
            Node::Ln(a) => a.substitute(v, with).ln(),
            Node::Sin(a) => a.substitute(v, with).sin(),
            Node::Cos(a) => a.substitute(v, with).cos(),
            Node::Neg(a) => a.substitute(v, with).neg(),
        }
    }

    pub fn eval(&self, pt: &Point4) -> Result<f64, EvalError> {
        let fail = |reason| EvalError {
            subexpr: self.to_string(),
            reason,
        };
        let v = match &*self.0 {
            Node::Const(c) => *c,
            Node::Var(w) => pt.coord(*w),
            Node::Add(a, b) => a.eval(pt)? + b.eval(pt)?,
            Node::Mul(a, b) => a.eval(pt)? * b.eval(pt)?,
            Node::Div(a, b) => {
                let num = a.eval(pt)?;
                let den = b.eval(pt)?;
                if den == 0.0 {
                    return Err(fail("division by zero"));
                }
                num / den
            }
            Node::PowI(a, n) => {
                let base = a.eval(pt)?;
                if base == 0.0 && *n < 0 {
                    return Err(fail("negative power of zero"));
                }
                base.powi(*n)
            }
            Node::Pow(a, r) => {
                let base = a.eval(pt)?;
                if base < 0.0 || (base == 0.0 && *r < 0.0) {
                    return Err(fail("real power of a non-positive base"));
                }
                base.powf(*r)
            }
            Node::Exp(a) => a.eval(pt)?.exp(),
            Node::Ln(a) => {
                let arg = a.eval(pt)?;
                if arg <= 0.0 {
                    return Err(fail("logarithm of a non-positive value"));
                }
                arg.ln()
            }
            Node::Sin(a) => a.eval(pt)?.sin(),
            Node::Cos(a) => a.eval(pt)?.cos(),
            Node::Neg(a) => -a.eval(pt)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(fail("non-finite value"))
        }
    }

    /// Symbolic first and second partials, for repeated jet evaluation.
    pub fn derivatives2(&self) -> SecondDerivatives {
        let first: [ScalarField; 4] = Var::ALL.map(|v| self.diff(v));
        let second = std::array::from_fn(|i| {
            std::array::from_fn(|j| {
                if j >= i {
                    first[i].diff(Var::from_index(j))
                } else {
                    ScalarField::zero()
                }
            })
        });
        SecondDerivatives {
            field: self.clone(),
            first,
            second,
        }
    }

    pub fn jet2(&self, pt: &Point4) -> Result<Jet2, EvalError> {
        self.derivatives2().at(pt)
    }
}

/// A field together with its symbolic gradient and upper-triangular Hessian.
#[derive(Clone, Debug)]
pub struct SecondDerivatives {
    pub field: ScalarField,
    pub first: [ScalarField; 4],
    // only j >= i is populated
    second: [[ScalarField; 4]; 4],
}

impl SecondDerivatives {
    pub fn second(&self, a: Var, b: Var) -> &ScalarField {
        let (i, j) = (a.index().min(b.index()), a.index().max(b.index()));
        &self.second[i][j]
    }

    pub fn at(&self, pt: &Point4) -> Result<Jet2, EvalError> {
        let value = self.field.eval(pt)?;
        let mut gradient = [0.0; 4];
        for (g, f) in gradient.iter_mut().zip(&self.first) {
            *g = f.eval(pt)?;
        }
        let mut hessian = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in i..4 {
                let h = self.second[i][j].eval(pt)?;
                hessian[i][j] = h;
                hessian[j][i] = h;
            }
        }
        Ok(Jet2 {
            value,
            gradient,
            hessian,
        })
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Node::Var(v) => f.write_str(v.name()),
            Node::Add(a, b) => write!(f, "({a} + {b})"),
            Node::Mul(a, b) => write!(f, "({a} * {b})"),
            Node::Div(a, b) => write!(f, "({a} / {b})"),
            Node::PowI(a, n) => {
                if *n < 0 {
                    write!(f, "({a} ^ (-{}))", -(*n as i64))
                } else {
                    write!(f, "({a} ^ {n})")
                }
            }
            Node::Pow(a, r) => {
                if *r < 0.0 {
                    write!(f, "({a} ^ (-{}))", -r)
                } else {
                    write!(f, "({a} ^ {r})")
                }
            }
            Node::Exp(a) => write!(f, "exp({a})"),
            Node::Ln(a) => write!(f, "ln({a})"),
            Node::Sin(a) => write!(f, "sin({a})"),
            Node::Cos(a) => write!(f, "cos({a})"),
            Node::Neg(a) => write!(f, "(-{a})"),
        }
    }
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarField({self})")
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::constant(c)
    }
}

impl From<Var> for ScalarField {
    fn from(v: Var) -> Self {
        ScalarField::var(v)
    }
}

impl std::str::FromStr for ScalarField {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $impl:ident) => {
        impl ops::$trait<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$impl(self, rhs)
            }
        }
        impl ops::$trait<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$impl(&self, &rhs)
            }
        }
        impl ops::$trait<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                ScalarField::$impl(&self, rhs)
            }
        }
        impl ops::$trait<f64> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: f64) -> ScalarField {
                ScalarField::$impl(&self, &ScalarField::constant(rhs))
            }
        }
        impl ops::$trait<ScalarField> for f64 {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                ScalarField::$impl(&ScalarField::constant(self), &rhs)
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(&self)
    }
}

impl ops::Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        ScalarField::neg(self)
    }
}

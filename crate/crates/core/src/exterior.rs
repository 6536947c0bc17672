//! Exterior forms on the chart `(x, y, p, q)` with symbolic coefficients.
//!
//! Basis k-forms are indexed by strictly increasing subsets of the coordinates,
//! stored as bitmasks (`x = bit 0`, ..., `q = bit 3`). The top form is
//! `dx ∧ dy ∧ dp ∧ dq`. Coefficients stay symbolic so that cancellations such
//! as `Ω ∧ α = 0` happen before anything is evaluated.
//!
//! The metric built here fixes the base volume form to `dx ∧ dy`; any other
//! choice `h dx ∧ dy` rescales the metric by `h`.

use std::collections::BTreeMap;

use crate::expr::{EvalError, ParseError, Point4, ScalarField, Var};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum ExteriorError {
    #[error("wedge of degrees {0} and {1} exceeds the dimension 4")]
    DegreeOverflow(usize, usize),
    #[error("interior product of a 0-form")]
    DegreeZero,
}

fn mask_of(vars: &[Var]) -> u8 {
    vars.iter().fold(0, |m, v| m | (1 << v.index()))
}

/// Sign of the permutation that sorts `vars`, or `None` on a repeat.
fn sort_sign(vars: &[Var]) -> Option<f64> {
    let mut sign = 1.0;
    for i in 0..vars.len() {
        for j in i + 1..vars.len() {
            if vars[i] == vars[j] {
                return None;
            }
            if vars[i] > vars[j] {
                sign = -sign;
            }
        }
    }
    Some(sign)
}

/// Sign of `e_I ∧ e_J` relative to `e_{I ∪ J}`: parity of the pairs
/// `i ∈ I, j ∈ J` with `i > j`.
fn wedge_sign(a: u8, b: u8) -> f64 {
    let mut inversions = 0;
    for j in 0..4 {
        if b & (1 << j) != 0 {
            inversions += (a >> (j + 1)).count_ones();
        }
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Homogeneous k-form with [`ScalarField`] coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    degree: usize,
    coeffs: BTreeMap<u8, ScalarField>,
}

impl KForm {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= 4, "forms on a 4D chart have degree at most 4");
        KForm {
            degree,
            coeffs: BTreeMap::new(),
        }
    }

    /// The 0-form `f`.
    pub fn scalar(f: ScalarField) -> Self {
        KForm::zero(0).plus_term(0, f)
    }

    /// `coeff · dv₁ ∧ … ∧ dv_k`, in any variable order.
    pub fn monomial(coeff: ScalarField, vars: &[Var]) -> Self {
        let mut form = KForm::zero(vars.len());
        if let Some(sign) = sort_sign(vars) {
            form = form.plus_term(mask_of(vars), coeff.scale(sign));
        }
        form
    }

    /// The coordinate 1-form `dv`.
    pub fn d(v: Var) -> Self {
        KForm::monomial(ScalarField::one(), &[v])
    }

    fn plus_term(mut self, mask: u8, f: ScalarField) -> Self {
        debug_assert_eq!(mask.count_ones() as usize, self.degree);
        if f.is_zero() {
            return self;
        }
        let merged = match self.coeffs.remove(&mask) {
            Some(old) => old.add(&f),
            None => f,
        };
        if !merged.is_zero() {
            self.coeffs.insert(mask, merged);
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient on `dv₁ ∧ … ∧ dv_k` (any order; the sign is applied).
    pub fn coefficient(&self, vars: &[Var]) -> ScalarField {
        if vars.len() != self.degree {
            return ScalarField::zero();
        }
        match sort_sign(vars) {
            Some(sign) => self
                .coeffs
                .get(&mask_of(vars))
                .map(|c| c.scale(sign))
                .unwrap_or_else(ScalarField::zero),
            None => ScalarField::zero(),
        }
    }

    /// Coefficient on `dx ∧ dy ∧ dp ∧ dq` of a 4-form.
    pub fn top_coefficient(&self) -> ScalarField {
        self.coefficient(&Var::ALL)
    }

    /// Nonzero terms as (sorted variables, coefficient).
    pub fn terms(&self) -> impl Iterator<Item = (Vec<Var>, &ScalarField)> {
        self.coeffs.iter().map(|(&m, c)| {
            let vars = Var::ALL
                .into_iter()
                .filter(|v| m & (1 << v.index()) != 0)
                .collect();
            (vars, c)
        })
    }

    pub fn add(&self, other: &KForm) -> KForm {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        other
            .coeffs
            .iter()
            .fold(self.clone(), |acc, (&m, c)| acc.plus_term(m, c.clone()))
    }

    pub fn scale(&self, f: &ScalarField) -> KForm {
        self.coeffs
            .iter()
            .fold(KForm::zero(self.degree), |acc, (&m, c)| {
                acc.plus_term(m, f.mul(c))
            })
    }

    pub fn wedge(&self, other: &KForm) -> Result<KForm, ExteriorError> {
        let degree = self.degree + other.degree;
        if degree > 4 {
            return Err(ExteriorError::DegreeOverflow(self.degree, other.degree));
        }
        let mut out = KForm::zero(degree);
        for (&ma, ca) in &self.coeffs {
            for (&mb, cb) in &other.coeffs {
                if ma & mb != 0 {
                    continue;
                }
                let term = ca.mul(cb).scale(wedge_sign(ma, mb));
                out = out.plus_term(ma | mb, term);
            }
        }
        Ok(out)
    }

    /// Interior product with the coordinate vector field `∂_v`.
    pub fn interior(&self, v: Var) -> Result<KForm, ExteriorError> {
        if self.degree == 0 {
            return Err(ExteriorError::DegreeZero);
        }
        let bit = 1u8 << v.index();
        let mut out = KForm::zero(self.degree - 1);
        for (&m, c) in &self.coeffs {
            if m & bit == 0 {
                continue;
            }
            let before = (m & (bit - 1)).count_ones();
            let sign = if before.is_multiple_of(2) { 1.0 } else { -1.0 };
            out = out.plus_term(m & !bit, c.scale(sign));
        }
        Ok(out)
    }

    /// Evaluated coefficients on sorted bases.
    pub fn eval(&self, pt: &Point4) -> Result<Vec<(Vec<Var>, f64)>, EvalError> {
        self.terms()
            .map(|(vars, c)| Ok((vars, c.eval(pt)?)))
            .collect()
    }
}

/// The five coefficient functions `A, B, C, D, E` of a 2-form
/// `A dp∧dy + B(dx∧dp − dy∧dq) + C dx∧dq + D dp∧dq + E dx∧dy`.
#[derive(Clone, Debug, PartialEq)]
pub struct MAStructure {
    pub a: ScalarField,
    pub b: ScalarField,
    pub c: ScalarField,
    pub d: ScalarField,
    pub e: ScalarField,
}

impl MAStructure {
    pub fn new(
        a: ScalarField,
        b: ScalarField,
        c: ScalarField,
        d: ScalarField,
        e: ScalarField,
    ) -> Self {
        MAStructure { a, b, c, d, e }
    }

    pub fn zero() -> Self {
        let z = ScalarField::zero;
        MAStructure::new(z(), z(), z(), z(), z())
    }

    /// Parse `[A, B, C, D, E]`.
    pub fn parse(exprs: [&str; 5]) -> Result<Self, ParseError> {
        let [a, b, c, d, e] = exprs;
        Ok(MAStructure::new(
            crate::expr::parse(a)?,
            crate::expr::parse(b)?,
            crate::expr::parse(c)?,
            crate::expr::parse(d)?,
            crate::expr::parse(e)?,
        ))
    }

    /// Structure `A = B = C = 0` with the given `D` and `E`.
    pub fn diagonal(d: ScalarField, e: ScalarField) -> Self {
        MAStructure {
            d,
            e,
            ..MAStructure::zero()
        }
    }

    pub fn with_e(&self, e: ScalarField) -> Self {
        MAStructure {
            e,
            ..self.clone()
        }
    }

    /// Whether `A`, `B` and `C` are all literally zero.
    pub fn is_abc_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero() && self.c.is_zero()
    }

    pub fn coefficients(&self) -> [&ScalarField; 5] {
        [&self.a, &self.b, &self.c, &self.d, &self.e]
    }

    /// Evaluated `(A, B, C, D, E)`.
    pub fn eval(&self, pt: &Point4) -> Result<[f64; 5], EvalError> {
        Ok([
            self.a.eval(pt)?,
            self.b.eval(pt)?,
            self.c.eval(pt)?,
            self.d.eval(pt)?,
            self.e.eval(pt)?,
        ])
    }

    /// `AC − B² − DE` at `pt`.
    pub fn pfaffian(&self, pt: &Point4) -> Result<f64, EvalError> {
        let [a, b, c, d, e] = self.eval(pt)?;
        Ok(a * c - b * b - d * e)
    }
}

/// `Ω = dx ∧ dp + dy ∧ dq`.
pub fn canonical_symplectic() -> KForm {
    let one = ScalarField::one;
    KForm::monomial(one(), &[Var::X, Var::P]).add(&KForm::monomial(one(), &[Var::Y, Var::Q]))
}

pub fn alpha_form(ma: &MAStructure) -> KForm {
    use Var::*;
    [
        KForm::monomial(ma.a.clone(), &[P, Y]),
        KForm::monomial(ma.b.clone(), &[X, P]),
        KForm::monomial(ma.b.neg(), &[Y, Q]),
        KForm::monomial(ma.c.clone(), &[X, Q]),
        KForm::monomial(ma.d.clone(), &[P, Q]),
        KForm::monomial(ma.e.clone(), &[X, Y]),
    ]
    .iter()
    .fold(KForm::zero(2), |acc, t| acc.add(t))
}

/// The base volume form pulled back to `T*M`.
pub fn base_volume() -> KForm {
    KForm::monomial(ScalarField::one(), &[Var::X, Var::Y])
}

fn wedge2(a: &KForm, b: &KForm) -> KForm {
    a.wedge(b).expect("2-forms wedge into a 4-form")
}

/// Top coefficient of `Ω ∧ α` at `pt`.
pub fn effectiveness_residual(ma: &MAStructure, pt: &Point4) -> Result<f64, EvalError> {
    wedge2(&canonical_symplectic(), &alpha_form(ma))
        .top_coefficient()
        .eval(pt)
}

/// `Pf(α)` as the ratio of the top coefficients of `α ∧ α` and `Ω ∧ Ω`.
pub fn pfaffian_intrinsic(ma: &MAStructure, pt: &Point4) -> Result<f64, EvalError> {
    let alpha = alpha_form(ma);
    let omega = canonical_symplectic();
    let num = wedge2(&alpha, &alpha).top_coefficient();
    let den = wedge2(&omega, &omega).top_coefficient();
    num.div(&den).eval(pt)
}

/// Symbolic entries of the metric
/// `g(X, Y) = 2(ι_X α ∧ ι_Y Ω + ι_Y α ∧ ι_X Ω) ∧ vol / (Ω ∧ Ω)` on the
/// coordinate fields, with `vol = dx ∧ dy`.
pub fn lr_metric_intrinsic_fields(ma: &MAStructure) -> [[ScalarField; 4]; 4] {
    let alpha = alpha_form(ma);
    let omega = canonical_symplectic();
    let vol = base_volume();
    let omega2 = wedge2(&omega, &omega).top_coefficient();
    let i_alpha = Var::ALL.map(|v| alpha.interior(v).expect("degree 2"));
    let i_omega = Var::ALL.map(|v| omega.interior(v).expect("degree 2"));
    std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let sym = i_alpha[i]
                .wedge(&i_omega[j])
                .and_then(|t| Ok(t.add(&i_alpha[j].wedge(&i_omega[i])?)))
                .expect("1-forms wedge into a 2-form");
            let top = wedge2(&sym, &vol).top_coefficient();
            top.scale(2.0).div(&omega2)
        })
    })
}

pub fn lr_metric_intrinsic(ma: &MAStructure, pt: &Point4) -> Result<[[f64; 4]; 4], EvalError> {
    let fields = lr_metric_intrinsic_fields(ma);
    let mut out = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            out[i][j] = fields[i][j].eval(pt)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use Var::*;

    fn c(v: f64) -> ScalarField {
        ScalarField::constant(v)
    }

    fn value(f: &ScalarField) -> f64 {
        f.eval(&Point4::new(0.3, -0.7, 1.1, 0.9)).unwrap()
    }

    #[test]
    fn wedge_antisymmetry_and_nilpotence() {
        let dx = KForm::d(X);
        let dp = KForm::d(P);
        let a = dx.wedge(&dp).unwrap();
        let b = dp.wedge(&dx).unwrap();
        assert_eq!(value(&a.coefficient(&[X, P])), 1.0);
        assert_eq!(value(&b.coefficient(&[X, P])), -1.0);
        assert!(dx.wedge(&dx).unwrap().is_zero());
    }

    #[test]
    fn omega_squared() {
        let omega = canonical_symplectic();
        let o2 = omega.wedge(&omega).unwrap();
        assert_eq!(value(&o2.coefficient(&[X, P, Y, Q])), 2.0);
        assert_eq!(value(&o2.top_coefficient()), -2.0);
    }

    #[test]
    fn degree_overflow() {
        let omega = canonical_symplectic();
        let three = omega.wedge(&KForm::d(X)).unwrap();
        assert_eq!(
            three.wedge(&omega),
            Err(ExteriorError::DegreeOverflow(3, 2))
        );
    }

    #[test]
    fn interior_examples() {
        let dxdy = KForm::monomial(c(1.0), &[X, Y]);
        assert_eq!(dxdy.interior(X).unwrap(), KForm::d(Y));
        assert!(dxdy.interior(Q).unwrap().is_zero());
        let i = canonical_symplectic().interior(P).unwrap();
        assert_eq!(value(&i.coefficient(&[X])), -1.0);
        assert_eq!(i.terms().count(), 1);
        assert_eq!(
            KForm::scalar(c(2.0)).interior(X),
            Err(ExteriorError::DegreeZero)
        );
    }

    #[test]
    fn interior_twice_vanishes() {
        let alpha = alpha_form(&MAStructure::parse(["x", "y*p", "q", "2", "x*y"]).unwrap());
        for v in Var::ALL {
            assert!(alpha.interior(v).unwrap().interior(v).unwrap().is_zero());
        }
    }

    #[test]
    fn symplectic_coefficients() {
        let omega = canonical_symplectic();
        assert_eq!(value(&omega.coefficient(&[X, P])), 1.0);
        assert_eq!(value(&omega.coefficient(&[Y, Q])), 1.0);
        assert!(omega.coefficient(&[X, Y]).is_zero());
    }

    #[test]
    fn alpha_coefficients() {
        let a_only = MAStructure {
            a: c(1.0),
            ..MAStructure::zero()
        };
        let alpha = alpha_form(&a_only);
        assert_eq!(value(&alpha.coefficient(&[P, Y])), 1.0);
        assert_eq!(value(&alpha.coefficient(&[Y, P])), -1.0);

        let b_only = MAStructure {
            b: c(1.0),
            ..MAStructure::zero()
        };
        let alpha = alpha_form(&b_only);
        assert_eq!(value(&alpha.coefficient(&[X, P])), 1.0);
        assert_eq!(value(&alpha.coefficient(&[Y, Q])), -1.0);

        assert!(alpha_form(&MAStructure::zero()).is_zero());
    }

    #[test]
    fn effectiveness_cancels() {
        let ma = MAStructure {
            b: parse("x*y").unwrap(),
            ..MAStructure::zero()
        };
        let r = effectiveness_residual(&ma, &Point4::new(2.0, 3.0, 1.0, 1.0)).unwrap();
        assert_eq!(r, 0.0);
        assert_eq!(
            effectiveness_residual(&MAStructure::zero(), &Point4::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn pfaffian_examples() {
        let pt = Point4::default();
        let ac = MAStructure::parse(["1", "0", "1", "0", "0"]).unwrap();
        assert_eq!(pfaffian_intrinsic(&ac, &pt).unwrap(), 1.0);
        let de = MAStructure::parse(["0", "0", "0", "1", "1"]).unwrap();
        assert_eq!(pfaffian_intrinsic(&de, &pt).unwrap(), -1.0);
        assert_eq!(pfaffian_intrinsic(&MAStructure::zero(), &pt).unwrap(), 0.0);
    }

    #[test]
    fn intrinsic_metric_patterns() {
        let pt = Point4::new(0.4, 0.1, -0.2, 1.3);
        let d_half = MAStructure::parse(["0", "0", "0", "0.5", "0"]).unwrap();
        let g = lr_metric_intrinsic(&d_half, &pt).unwrap();
        let mut expected = [[0.0; 4]; 4];
        expected[0][2] = 0.5;
        expected[2][0] = 0.5;
        expected[1][3] = 0.5;
        expected[3][1] = 0.5;
        assert_eq!(g, expected);

        let a_one = MAStructure::parse(["1", "0", "0", "0", "0"]).unwrap();
        let g = lr_metric_intrinsic(&a_one, &pt).unwrap();
        let mut expected = [[0.0; 4]; 4];
        expected[1][1] = 2.0;
        assert_eq!(g, expected);
    }

    #[test]
    fn intrinsic_metric_ignores_e() {
        let pt = Point4::new(0.4, 0.1, -0.2, 1.3);
        let ma = MAStructure::parse(["x", "y", "p*q", "1+x^2", "0"]).unwrap();
        let g0 = lr_metric_intrinsic(&ma, &pt).unwrap();
        let g1 = lr_metric_intrinsic(&ma.with_e(parse("exp(x*y*p*q)").unwrap()), &pt).unwrap();
        assert_eq!(g0, g1);
    }
}

//! The metric `g_α` on `T*M` in canonical coordinates, its curvature, and the
//! Ricci-flat family for `A = B = C = 0`.
//!
//! In the basis `(∂x, ∂y, ∂p, ∂q)`
//!
//! ```text
//!       | 2C  -2B  D  0 |
//! G  =  | -2B  2A  0  D |      det G = D⁴
//!       |  D   0   0  0 |
//!       |  0   D   0  0 |
//! ```
//!
//! `E` does not enter. For `A = B = C = 0` the metric is Ricci flat exactly
//! when `D = (c1 + c2 x + c3 y + c4 p + c5 q + c6 (xp + yq))⁻²` with
//! `c2c4 + c3c5 − c1c6 = 0`, which under `c1 = −p14, c2 = p12, c3 = −p13,
//! c4 = p34, c5 = p24, c6 = p23` is the Plücker quadric.
//!
//! The closed-form scalar curvature [`scalar_curvature_closed`] is the
//! expression `3/D³ (−D_q D_y + 2D D_yq − D_p D_x + 2D D_xp)` exactly as
//! usually quoted. Under the sign convention of [`crate::curvature`] the
//! computed scalar curvature is its negative, and equals
//! `−24 (c2c4 + c3c5 − c1c6)` on the family.

use crate::curvature::{self, Curvature, Matrix, MetricJet, SINGULAR_DET};
use crate::expr::{EvalError, Point4, ScalarField, SecondDerivatives, Var};
use crate::exterior::MAStructure;
use crate::{Error, Result};

/// Relative width of the tube around the zero set of the family polynomial
/// inside which points are rejected.
pub const SINGULAR_TUBE: f64 = 1e-8;
/// Threshold on [`Curvature::normalized_max_ricci`] for a Ricci-flat verdict.
pub const RICCI_FLAT_TOL: f64 = 1e-7;

/// Symbolic entries of `G`.
pub fn lr_metric_fields(ma: &MAStructure) -> [[ScalarField; 4]; 4] {
    let z = ScalarField::zero();
    let c2 = ma.c.scale(2.0);
    let a2 = ma.a.scale(2.0);
    let b2 = ma.b.scale(-2.0);
    let d = ma.d.clone();
    [
        [c2, b2.clone(), d.clone(), z.clone()],
        [b2, a2, z.clone(), d.clone()],
        [d.clone(), z.clone(), z.clone(), z.clone()],
        [z.clone(), d, z.clone(), z],
    ]
}

pub fn lr_metric_matrix(ma: &MAStructure, pt: &Point4) -> Result<Matrix<4>, EvalError> {
    let a = ma.a.eval(pt)?;
    let b = ma.b.eval(pt)?;
    let c = ma.c.eval(pt)?;
    let d = ma.d.eval(pt)?;
    Ok([
        [2.0 * c, -2.0 * b, d, 0.0],
        [-2.0 * b, 2.0 * a, 0.0, d],
        [d, 0.0, 0.0, 0.0],
        [0.0, d, 0.0, 0.0],
    ])
}

/// Precomputed symbolic derivatives of `A, B, C, D` for evaluating
/// [`MetricJet`]s of `g_α` at many points.
#[derive(Clone, Debug)]
pub struct LrJetTable {
    a: SecondDerivatives,
    b: SecondDerivatives,
    c: SecondDerivatives,
    d: SecondDerivatives,
}

impl LrJetTable {
    pub fn new(ma: &MAStructure) -> Self {
        LrJetTable {
            a: ma.a.derivatives2(),
            b: ma.b.derivatives2(),
            c: ma.c.derivatives2(),
            d: ma.d.derivatives2(),
        }
    }

    pub fn at(&self, pt: &Point4) -> Result<MetricJet<4>> {
        let jd = self.d.at(pt)?;
        if jd.value.powi(4).abs() <= SINGULAR_DET {
            return Err(Error::DegenerateMetric {
                d: jd.value,
                point: *pt,
            });
        }
        let ja = self.a.at(pt)?;
        let jb = self.b.at(pt)?;
        let jc = self.c.at(pt)?;
        // (row, col, jet, factor) for every nonzero slot
        let slots = [
            (0, 0, &jc, 2.0),
            (0, 1, &jb, -2.0),
            (1, 0, &jb, -2.0),
            (1, 1, &ja, 2.0),
            (0, 2, &jd, 1.0),
            (2, 0, &jd, 1.0),
            (1, 3, &jd, 1.0),
            (3, 1, &jd, 1.0),
        ];
        let mut mj = MetricJet::constant([[0.0; 4]; 4]);
        for (i, j, jet, factor) in slots {
            mj.g[i][j] = factor * jet.value;
            for k in 0..4 {
                mj.dg[i][j][k] = factor * jet.gradient[k];
                for l in 0..4 {
                    mj.ddg[i][j][k][l] = factor * jet.hessian[k][l];
                }
            }
        }
        Ok(mj)
    }
}

/// Metric 2-jet of `g_α` at `pt`; fails where `D = 0`.
pub fn lr_metric_jet(ma: &MAStructure, pt: &Point4) -> Result<MetricJet<4>> {
    LrJetTable::new(ma).at(pt)
}

/// Curvature of `g_α` at `pt`.
pub fn lr_curvature(ma: &MAStructure, pt: &Point4) -> Result<Curvature<4>> {
    Ok(curvature::curvature(&lr_metric_jet(ma, pt)?)?)
}

/// `3/D³ (−D_q D_y + 2D D_yq − D_p D_x + 2D D_xp)` for `A = B = C = 0`.
pub fn scalar_curvature_closed(ma: &MAStructure, pt: &Point4) -> Result<f64> {
    if !ma.is_abc_zero() {
        return Err(Error::Precondition(
            "closed-form scalar curvature needs A = B = C = 0".into(),
        ));
    }
    let j = ma.d.jet2(pt)?;
    let d = j.value;
    if d == 0.0 {
        return Err(Error::DegenerateMetric { d, point: *pt });
    }
    let [dx, dy, dp, dq] = j.gradient;
    let (x, y, p, q) = (0, 1, 2, 3);
    let bracket = -dq * dy + 2.0 * d * j.hessian[y][q] - dp * dx + 2.0 * d * j.hessian[x][p];
    Ok(3.0 / (d * d * d) * bracket)
}

/// The six reals `c1, …, c6`, not all zero.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct FamilyParams([f64; 6]);

impl TryFrom<[f64; 6]> for FamilyParams {
    type Error = Error;

    fn try_from(c: [f64; 6]) -> Result<Self> {
        FamilyParams::new(c)
    }
}

impl From<FamilyParams> for [f64; 6] {
    fn from(c: FamilyParams) -> Self {
        c.0
    }
}

impl FamilyParams {
    pub fn new(c: [f64; 6]) -> Result<Self> {
        if c.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroParams);
        }
        if c.iter().any(|v| !v.is_finite()) {
            return Err(Error::Precondition("family parameters must be finite".into()));
        }
        Ok(FamilyParams(c))
    }

    pub fn coeffs(&self) -> [f64; 6] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `c1 + c2 x + c3 y + c4 p + c5 q + c6 (xp + yq)` as a field.
    pub fn polynomial(&self) -> ScalarField {
        let [c1, c2, c3, c4, c5, c6] = self.0;
        let k = ScalarField::constant;
        let (x, y, p, q) = (
            ScalarField::x(),
            ScalarField::y(),
            ScalarField::p(),
            ScalarField::q(),
        );
        let bilinear = x.mul(&p).add(&y.mul(&q));
        [
            k(c1),
            k(c2).mul(&x),
            k(c3).mul(&y),
            k(c4).mul(&p),
            k(c5).mul(&q),
            k(c6).mul(&bilinear),
        ]
        .iter()
        .fold(ScalarField::zero(), |acc, t| acc.add(t))
    }

    pub fn polynomial_at(&self, pt: &Point4) -> f64 {
        let [c1, c2, c3, c4, c5, c6] = self.0;
        c1 + c2 * pt.x + c3 * pt.y + c4 * pt.p + c5 * pt.q + c6 * (pt.x * pt.p + pt.y * pt.q)
    }

    /// Whether `pt` is within the rejection tube around the zero set of the
    /// family polynomial.
    pub fn is_singular(&self, pt: &Point4) -> bool {
        self.polynomial_at(pt).abs() < SINGULAR_TUBE * (1.0 + self.norm() * pt.norm())
    }

    /// `c2c4 + c3c5 − c1c6`.
    pub fn cond_residual(&self) -> f64 {
        let [c1, c2, c3, c4, c5, c6] = self.0;
        c2 * c4 + c3 * c5 - c1 * c6
    }

    /// Whether the condition holds to rounding: `|cond| <= 1e-12 (1 + ‖c‖²)`.
    pub fn cond_holds(&self) -> bool {
        self.cond_residual().abs() <= 1e-12 * (1.0 + self.norm().powi(2))
    }
}

/// `D = (c1 + c2 x + c3 y + c4 p + c5 q + c6 (xp + yq))⁻²`.
pub fn family_d(c: &FamilyParams) -> ScalarField {
    c.polynomial().powi(-2)
}

pub fn cond_residual(c: &FamilyParams) -> f64 {
    c.cond_residual()
}

/// Scalar curvature of the family metric, `−24 (c2c4 + c3c5 − c1c6)`;
/// constant on `T*M`.
pub fn family_scalar_curvature(c: &FamilyParams) -> f64 {
    -24.0 * c.cond_residual()
}

pub fn family_structure(c: &FamilyParams, e: ScalarField) -> MAStructure {
    MAStructure::diagonal(family_d(c), e)
}

/// Row labels of [`pde_residuals`].
pub const PDE_LABELS: [&str; 10] = [
    "3Dx^2-2DDxx",
    "3Dy^2-2DDyy",
    "3Dp^2-2DDpp",
    "3Dq^2-2DDqq",
    "3DxDy-2DDxy",
    "3DxDq-2DDxq",
    "3DpDy-2DDpy",
    "3DpDq-2DDpq",
    "-2DDyq+3DxDp-4DDxp",
    "-2DDxp+3DyDq-4DDyq",
];

/// Left-hand sides of the ten equations equivalent to `Ric = 0` for
/// `A = B = C = 0`, in the order of [`PDE_LABELS`]: four diagonal, four
/// mixed, two coupled. `R_ij` equals the matching entry over `2D²`.
pub fn pde_residuals(d_field: &ScalarField, pt: &Point4) -> Result<[f64; 10], EvalError> {
    let j = d_field.jet2(pt)?;
    let d = j.value;
    let g = |v: Var| j.gradient[v.index()];
    let h = |a: Var, b: Var| j.hessian[a.index()][b.index()];
    use Var::*;
    let diag = |v| 3.0 * g(v) * g(v) - 2.0 * d * h(v, v);
    let mixed = |a, b| 3.0 * g(a) * g(b) - 2.0 * d * h(a, b);
    Ok([
        diag(X),
        diag(Y),
        diag(P),
        diag(Q),
        mixed(X, Y),
        mixed(X, Q),
        mixed(P, Y),
        mixed(P, Q),
        -2.0 * d * h(Y, Q) + 3.0 * g(X) * g(P) - 4.0 * d * h(X, P),
        -2.0 * d * h(X, P) + 3.0 * g(Y) * g(Q) - 4.0 * d * h(Y, Q),
    ])
}

/// [`pde_residuals`] divided by `D⁴`.
pub fn normalized_pde_residuals(d_field: &ScalarField, pt: &Point4) -> Result<[f64; 10]> {
    let d = d_field.eval(pt)?;
    if d == 0.0 {
        return Err(Error::DegenerateMetric { d, point: *pt });
    }
    let scale = d.powi(4);
    Ok(pde_residuals(d_field, pt)?.map(|r| r / scale))
}

/// Outcome of [`ricci_flat_check`].
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct RicciFlatReport {
    pub cond_residual: f64,
    pub cond_holds: bool,
    /// `max |R_ij|` over all points.
    pub max_ricci: f64,
    /// Max of [`Curvature::normalized_max_ricci`] over all points.
    pub max_normalized_ricci: f64,
    pub max_abs_scalar: f64,
    pub ricci_flat: bool,
    /// The curvature verdict and the parameter condition agree.
    pub consistent: bool,
    pub points: usize,
}

/// Evaluates the Ricci tensor of `(0, 0, 0, D_c, E)` at every point and
/// compares the verdict with the condition on `c`.
pub fn ricci_flat_check(
    c: &FamilyParams,
    e: &ScalarField,
    pts: &[Point4],
) -> Result<RicciFlatReport> {
    ricci_flat_check_with_tol(c, e, pts, RICCI_FLAT_TOL)
}

/// [`ricci_flat_check`] with a custom bound on the normalized Ricci tensor.
pub fn ricci_flat_check_with_tol(
    c: &FamilyParams,
    e: &ScalarField,
    pts: &[Point4],
    tol: f64,
) -> Result<RicciFlatReport> {
    if let Some(pt) = pts.iter().find(|pt| c.is_singular(pt)) {
        return Err(Error::SingularLocus { point: *pt });
    }
    let table = LrJetTable::new(&family_structure(c, e.clone()));
    let mut max_ricci = 0.0f64;
    let mut max_normalized = 0.0f64;
    let mut max_scalar = 0.0f64;
    for pt in pts {
        let curv = curvature::curvature(&table.at(pt)?)?;
        max_ricci = max_ricci.max(curvature::max_abs(&curv.ricci));
        max_normalized = max_normalized.max(curv.normalized_max_ricci());
        max_scalar = max_scalar.max(curv.scalar.abs());
    }
    let ricci_flat = max_normalized <= tol;
    let cond_holds = c.cond_holds();
    Ok(RicciFlatReport {
        cond_residual: c.cond_residual(),
        cond_holds,
        max_ricci,
        max_normalized_ricci: max_normalized,
        max_abs_scalar: max_scalar,
        ricci_flat,
        consistent: ricci_flat == cond_holds,
        points: pts.len(),
    })
}

/// Point of `RP⁵` (projective, not all zero).
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PluckerPoint {
    pub p12: f64,
    pub p13: f64,
    pub p14: f64,
    pub p23: f64,
    pub p24: f64,
    pub p34: f64,
}

impl PluckerPoint {
    pub fn new(p12: f64, p13: f64, p14: f64, p23: f64, p24: f64, p34: f64) -> Result<Self> {
        let pp = PluckerPoint {
            p12,
            p13,
            p14,
            p23,
            p24,
            p34,
        };
        if pp.coords().iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroPlucker);
        }
        Ok(pp)
    }

    /// `(p12, p13, p14, p23, p24, p34)`.
    pub fn coords(&self) -> [f64; 6] {
        [self.p12, self.p13, self.p14, self.p23, self.p24, self.p34]
    }

    pub fn scaled(&self, lambda: f64) -> PluckerPoint {
        let [a, b, c, d, e, f] = self.coords().map(|v| lambda * v);
        PluckerPoint {
            p12: a,
            p13: b,
            p14: c,
            p23: d,
            p24: e,
            p34: f,
        }
    }

    /// `p12 p34 − p13 p24 + p14 p23`.
    pub fn quadric_residual(&self) -> f64 {
        self.p12 * self.p34 - self.p13 * self.p24 + self.p14 * self.p23
    }

    /// Inverse of [`plucker_from_params`].
    pub fn to_params(&self) -> Result<FamilyParams> {
        FamilyParams::new([-self.p14, self.p12, -self.p13, self.p34, self.p24, self.p23])
    }
}

/// `p14 = −c1, p12 = c2, p13 = −c3, p34 = c4, p24 = c5, p23 = c6`.
pub fn plucker_from_params(c: &FamilyParams) -> PluckerPoint {
    let [c1, c2, c3, c4, c5, c6] = c.coeffs();
    PluckerPoint {
        p12: c2,
        p13: -c3,
        p14: -c1,
        p23: c6,
        p24: c5,
        p34: c4,
    }
}

pub fn quadric_residual(p: &PluckerPoint) -> f64 {
    p.quadric_residual()
}

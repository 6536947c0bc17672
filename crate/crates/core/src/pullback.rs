//! Pullback of `g_α` along a section `df: M → T*M` of the cotangent bundle.
//!
//! Coefficients `A, …, E` stay functions of `(x, y, p, q)` and are evaluated
//! at the lifted point `(x, y, f_x, f_y)`. The pullback matrix is
//!
//! ```text
//! G* = | 2C  -2B | + 2D Hess(f)
//!      | -2B  2A |
//! ```
//!
//! For `A = B = C = 0, D = ½` it is the Hessian metric of `f`, whose Koszul
//! forms are computed here from Christoffel symbols.

use crate::curvature::{self, Matrix, MetricJet};
use crate::expr::{EvalError, Point4, ScalarField, Var};
use crate::exterior::MAStructure;
use crate::{Error, Result};

/// Tolerance on the Monge-Ampère residual required by [`pullback_eigenvalues`].
pub const DEFAULT_SOLUTION_TOL: f64 = 1e-9;
/// Hessians with `|det| < 1e-10 ‖H‖²` are treated as singular.
pub const SINGULAR_HESSIAN: f64 = 1e-10;

/// Point of the base `M`.
#[derive(Clone, Copy, Debug, PartialEq, Default, serde::Serialize, serde::Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Point2 { x, y }
    }

    /// The point `(x, y, 0, 0)`; surface functions ignore `p, q`.
    pub fn embed(&self) -> Point4 {
        Point4::new(self.x, self.y, 0.0, 0.0)
    }
}

/// A field in `x, y` only.
#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceFunction(ScalarField);

impl SurfaceFunction {
    pub fn new(f: ScalarField) -> Result<Self> {
        if f.mentions(Var::P) || f.mentions(Var::Q) {
            return Err(Error::NotASurfaceFunction(f.to_string()));
        }
        Ok(SurfaceFunction(f))
    }

    pub fn parse(text: &str) -> Result<Self> {
        SurfaceFunction::new(crate::expr::parse(text)?)
    }

    pub fn field(&self) -> &ScalarField {
        &self.0
    }

    pub fn hessian_fields(&self) -> [[ScalarField; 2]; 2] {
        let fx = self.0.diff(Var::X);
        let fy = self.0.diff(Var::Y);
        let fxy = fx.diff(Var::Y);
        [[fx.diff(Var::X), fxy.clone()], [fxy, fy.diff(Var::Y)]]
    }

    /// Value, gradient and Hessian at `pt`.
    pub fn jet(&self, pt: &Point2) -> Result<SurfaceJet, EvalError> {
        let j = self.0.jet2(&pt.embed())?;
        Ok(SurfaceJet {
            value: j.value,
            fx: j.gradient[0],
            fy: j.gradient[1],
            fxx: j.hessian[0][0],
            fxy: j.hessian[0][1],
            fyy: j.hessian[1][1],
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceJet {
    pub value: f64,
    pub fx: f64,
    pub fy: f64,
    pub fxx: f64,
    pub fxy: f64,
    pub fyy: f64,
}

impl SurfaceJet {
    pub fn hessian(&self) -> Matrix<2> {
        [[self.fxx, self.fxy], [self.fxy, self.fyy]]
    }

    pub fn hessian_det(&self) -> f64 {
        self.fxx * self.fyy - self.fxy * self.fxy
    }
}

/// `(x, y, f_x, f_y)`.
pub fn lift(f: &SurfaceFunction, pt: &Point2) -> Result<Point4, EvalError> {
    let j = f.jet(pt)?;
    Ok(Point4::new(pt.x, pt.y, j.fx, j.fy))
}

/// Surface jet of `f` and `(A, B, C, D, E)` at the lifted point.
fn lifted(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<(SurfaceJet, [f64; 5]), EvalError> {
    let j = f.jet(pt)?;
    let coeffs = ma.eval(&Point4::new(pt.x, pt.y, j.fx, j.fy))?;
    Ok((j, coeffs))
}

pub fn pullback_metric(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<Matrix<2>, EvalError> {
    let (j, [a, b, c, d, _]) = lifted(ma, f, pt)?;
    let off = -2.0 * b + 2.0 * d * j.fxy;
    Ok([
        [2.0 * c + 2.0 * d * j.fxx, off],
        [off, 2.0 * a + 2.0 * d * j.fyy],
    ])
}

/// `4(AC − B²) + 4D(A f_xx + 2B f_xy + C f_yy + D f_xx f_yy − D f_xy²)`.
pub fn pullback_det(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<f64, EvalError> {
    let (j, [a, b, c, d, _]) = lifted(ma, f, pt)?;
    Ok(4.0 * (a * c - b * b)
        + 4.0 * d * (a * j.fxx + 2.0 * b * j.fxy + c * j.fyy + d * j.fxx * j.fyy - d * j.fxy * j.fxy))
}

/// `A f_xx + 2B f_xy + C f_yy + D (f_xx f_yy − f_xy²) + E`.
pub fn ma_residual(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<f64, EvalError> {
    let (j, [a, b, c, d, e]) = lifted(ma, f, pt)?;
    Ok(a * j.fxx + 2.0 * b * j.fxy + c * j.fyy + d * j.hessian_det() + e)
}

/// `Pf(α)` at the lifted point.
pub fn lifted_pfaffian(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<f64, EvalError> {
    ma.pfaffian(&lift(f, pt)?)
}

/// Half trace `C + A + D (f_xx + f_yy)` and `Pf(α)` at the lifted point.
fn trace_and_pf(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<(f64, f64), EvalError> {
    let (j, [a, b, c, d, e]) = lifted(ma, f, pt)?;
    Ok((c + a + d * (j.fxx + j.fyy), a * c - b * b - d * e))
}

/// Roots of `λ² − λ(2C + 2A + 2D f_yy + 2D f_xx) − 4(B² − AC) − 4DE = 0`,
/// ascending. Requires `|ma_residual| <= DEFAULT_SOLUTION_TOL`.
pub fn pullback_eigenvalues(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<(f64, f64)> {
    pullback_eigenvalues_with_tol(ma, f, pt, DEFAULT_SOLUTION_TOL)
}

pub fn pullback_eigenvalues_with_tol(
    ma: &MAStructure,
    f: &SurfaceFunction,
    pt: &Point2,
    tol: f64,
) -> Result<(f64, f64)> {
    let residual = ma_residual(ma, f, pt)?;
    if residual.abs() > tol {
        return Err(Error::NotASolution {
            x: pt.x,
            y: pt.y,
            residual,
        });
    }
    let (t, pf) = trace_and_pf(ma, f, pt)?;
    let mut disc = t * t - 4.0 * pf;
    if disc < 0.0 {
        if disc >= -1e-12 * (t * t + 4.0 * pf.abs()) {
            disc = 0.0;
        } else {
            return Err(Error::ComplexRoots { discriminant: disc });
        }
    }
    let s = disc.sqrt();
    Ok((t - s, t + s))
}

/// Comparison of the quadratic-equation roots with `C + A + D(f_xx + f_yy) ± 2√Pf`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct EigenDiscrepancy {
    pub roots: (f64, f64),
    /// `None` when `Pf < 0`.
    pub plus_minus_two_sqrt_pf: Option<(f64, f64)>,
    /// Largest root difference; `None` when the second form is undefined.
    pub gap: Option<f64>,
    /// `(C + A + D(f_xx + f_yy))² − 8 Pf`; the two forms agree iff this is 0.
    pub identity_residual: f64,
}

pub fn eigenvalue_discrepancy(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<EigenDiscrepancy> {
    eigenvalue_discrepancy_with_tol(ma, f, pt, DEFAULT_SOLUTION_TOL)
}

pub fn eigenvalue_discrepancy_with_tol(
    ma: &MAStructure,
    f: &SurfaceFunction,
    pt: &Point2,
    tol: f64,
) -> Result<EigenDiscrepancy> {
    let roots = pullback_eigenvalues_with_tol(ma, f, pt, tol)?;
    let (t, pf) = trace_and_pf(ma, f, pt)?;
    let alt = (pf >= 0.0).then(|| {
        let s = 2.0 * pf.sqrt();
        (t - s, t + s)
    });
    let gap = alt.map(|(a, b)| (a - roots.0).abs().max((b - roots.1).abs()));
    Ok(EigenDiscrepancy {
        roots,
        plus_minus_two_sqrt_pf: alt,
        gap,
        identity_residual: t * t - 8.0 * pf,
    })
}

/// Both sides of `det G* = 4 Pf(α)`.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct PfDetRelation {
    pub det: f64,
    pub four_pf: f64,
    /// `4 Pf − det`, which is `−4 D · ma_residual`.
    pub gap: f64,
    pub ma_residual: f64,
}

pub fn pf_det_relation(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<PfDetRelation, EvalError> {
    let det = pullback_det(ma, f, pt)?;
    let four_pf = 4.0 * lifted_pfaffian(ma, f, pt)?;
    Ok(PfDetRelation {
        det,
        four_pf,
        gap: four_pf - det,
        ma_residual: ma_residual(ma, f, pt)?,
    })
}

/// 2-jet of the Hessian metric `g_ij = ∂_i ∂_j f` (needs fourth derivatives).
pub fn hessian_metric_jet(f: &SurfaceFunction, pt: &Point2) -> Result<MetricJet<2>> {
    let fields = f.hessian_fields();
    let at = pt.embed();
    let mut mj = MetricJet::constant([[0.0; 2]; 2]);
    for i in 0..2 {
        for j in i..2 {
            let jet = fields[i][j].jet2(&at)?;
            for (a, b) in [(i, j), (j, i)] {
                mj.g[a][b] = jet.value;
                for k in 0..2 {
                    mj.dg[a][b][k] = jet.gradient[k];
                    for l in 0..2 {
                        mj.ddg[a][b][k][l] = jet.hessian[k][l];
                    }
                }
            }
        }
    }
    let det = curvature::determinant(&mj.g);
    let norm2: f64 = mj.g.iter().flatten().map(|v| v * v).sum();
    if det.abs() < SINGULAR_HESSIAN * norm2 || det == 0.0 {
        return Err(Error::SingularHessian {
            x: pt.x,
            y: pt.y,
            det,
        });
    }
    Ok(mj)
}

/// First Koszul form `a_i = Γ^k_{ki}` of the Hessian metric of `f`.
pub fn koszul_first(f: &SurfaceFunction, pt: &Point2) -> Result<[f64; 2]> {
    let gamma = curvature::christoffel(&hessian_metric_jet(f, pt)?)?;
    Ok(std::array::from_fn(|i| (0..2).map(|k| gamma[k][k][i]).sum()))
}

/// Second Koszul form `b_ij = ∂_j a_i`.
pub fn koszul_second(f: &SurfaceFunction, pt: &Point2) -> Result<Matrix<2>> {
    let dgamma = curvature::christoffel_derivative(&hessian_metric_jet(f, pt)?)?;
    Ok(std::array::from_fn(|i| {
        std::array::from_fn(|j| (0..2).map(|k| dgamma[k][k][i][j]).sum())
    }))
}

/// Ricci tensor `−½ b_ij` of the Kähler metric induced on `TM`.
pub fn kahler_ricci(f: &SurfaceFunction, pt: &Point2) -> Result<Matrix<2>> {
    Ok(koszul_second(f, pt)?.map(|row| row.map(|b| -0.5 * b)))
}

/// `(½ ∂ ln|h|, ½ Hess ln|h|)` for a field `h` in `x, y`, via `¼ ln(h²)`.
fn half_log_derivatives(h: &ScalarField, pt: &Point2) -> Result<([f64; 2], Matrix<2>)> {
    if h.eval(&pt.embed())? == 0.0 {
        return Err(Error::ZeroE { x: pt.x, y: pt.y });
    }
    let j = h.powi(2).ln().scale(0.25).jet2(&pt.embed())?;
    Ok((
        [j.gradient[0], j.gradient[1]],
        [
            [j.hessian[0][0], j.hessian[0][1]],
            [j.hessian[1][0], j.hessian[1][1]],
        ],
    ))
}

/// Koszul forms as log-derivatives of `det Hess f`.
pub fn koszul_from_hessian_determinant(f: &SurfaceFunction, pt: &Point2) -> Result<([f64; 2], Matrix<2>)> {
    let [[fxx, fxy], [_, fyy]] = f.hessian_fields();
    let det = fxx.mul(&fyy).sub(&fxy.powi(2));
    match half_log_derivatives(&det, pt) {
        Err(Error::ZeroE { x, y }) => Err(Error::SingularHessian { x, y, det: 0.0 }),
        other => other,
    }
}

/// `E ∘ df` as a field in `x, y`.
pub fn restrict_to_section(field: &ScalarField, f: &SurfaceFunction) -> ScalarField {
    field
        .substitute(Var::P, &f.field().diff(Var::X))
        .substitute(Var::Q, &f.field().diff(Var::Y))
}

/// Koszul forms `(½ ∂ ln|E|, ½ Hess ln|E|)` with `E` restricted to the
/// section. Agrees with [`koszul_first`] and [`koszul_second`] when
/// `A = B = C = 0`, `D` is constant and `f` solves `D det Hess f + E = 0`.
pub fn koszul_from_e(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2) -> Result<([f64; 2], Matrix<2>)> {
    half_log_derivatives(&restrict_to_section(&ma.e, f), pt)
}

/// Structure with `[[2C, −2B], [−2B, 2A]] = ε Hess(g)` and `D = ½`, `E = 0`.
pub fn deformation_structure(g: &SurfaceFunction, eps: f64) -> MAStructure {
    let [[gxx, gxy], [_, gyy]] = g.hessian_fields();
    let half = 0.5 * eps;
    MAStructure::new(
        gyy.scale(half),
        gxy.scale(-half),
        gxx.scale(half),
        ScalarField::constant(0.5),
        ScalarField::zero(),
    )
}

//! Lychagin-Rubtsov metrics of 2D symplectic Monge-Ampère structures.
//!
//! A structure is given by five coefficient functions `A, …, E` on the phase
//! space `T*M` with Darboux coordinates `(x, y, p, q)`. From them this crate
//! builds
//!
//! * the effective 2-form `α`, its Pfaffian and the metric `g_α`, both from
//!   the intrinsic exterior-algebra definitions ([`exterior`]) and from the
//!   closed-form matrix ([`lr`]);
//! * the curvature of `g_α` ([`curvature`]), the closed-form scalar curvature
//!   for `A = B = C = 0`, the six-parameter Ricci-flat family and its Plücker
//!   quadric ([`lr`]);
//! * pullbacks of `g_α` along sections `df` of `T*M → M`, Hessian
//!   structures, Koszul forms and deformations ([`pullback`]).
//!
//! Everything is computed from symbolic [`expr::ScalarField`]s, so all
//! derivatives are exact up to floating-point evaluation.

pub mod cli;
pub mod curvature;
pub mod expr;
pub mod exterior;
pub mod lr;
pub mod pullback;
pub mod sampling;

pub use curvature::{CurvatureError, MetricJet, Signature};
pub use expr::{parse, EvalError, Jet2, ParseError, Point4, ScalarField, Var};
pub use exterior::{KForm, MAStructure};
pub use lr::{FamilyParams, PluckerPoint};
pub use pullback::{Point2, SurfaceFunction};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Curvature(#[from] CurvatureError),
    #[error("degenerate metric at {point:?}: D = {d:e} (det G = D^4 must be nonzero)")]
    DegenerateMetric { d: f64, point: Point4 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("family parameters c1..c6 are all zero")]
    ZeroParams,
    #[error("Plücker coordinates are all zero")]
    ZeroPlucker,
    #[error("point {point:?} lies on the singular locus of the family")]
    SingularLocus { point: Point4 },
    #[error("f does not solve the Monge-Ampère equation at ({x}, {y}): residual {residual:e}")]
    NotASolution { x: f64, y: f64, residual: f64 },
    #[error("eigenvalue equation has complex roots (discriminant {discriminant:e})")]
    ComplexRoots { discriminant: f64 },
    #[error("singular Hessian at ({x}, {y}): det = {det:e}")]
    SingularHessian { x: f64, y: f64, det: f64 },
    #[error("E vanishes along the section at ({x}, {y})")]
    ZeroE { x: f64, y: f64 },
    #[error("surface function `{0}` depends on p or q")]
    NotASurfaceFunction(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

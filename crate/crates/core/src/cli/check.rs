//! `check-all`: a seeded sweep over every property the library guarantees.
//!
//! Each check reports the worst observed error against its tolerance. Cases
//! the check cannot use (vanishing `D`, singular Hessians, …) are skipped and
//! redrawn; every check runs on exactly `samples` cases.

use serde::Serialize;
use serde_json::json;

use super::{CliError, JobSpec, Outcome};
use crate::curvature::{determinant, max_abs, signature, Signature};
use crate::expr::{fd_jet2, ScalarField, Var, DEFAULT_FD_STEP};
use crate::exterior::{self, MAStructure};
use crate::lr;
use crate::pullback::{self, SurfaceFunction};
use crate::sampling::{SampleBox, Sampler};

#[derive(Debug, Serialize)]
struct Check {
    name: &'static str,
    cases: usize,
    worst: f64,
    tolerance: f64,
    passed: bool,
}

/// Upper bound on redraws per check before giving up.
const MAX_DRAWS_FACTOR: usize = 50;

struct Sweep<'a> {
    rng: &'a mut Sampler,
    samples: usize,
}

impl Sweep<'_> {
    /// Runs `case` until `samples` cases returned `Some(error)`; `None` means
    /// "skip and redraw". `error` is compared against `tolerance`.
    fn run(
        &mut self,
        name: &'static str,
        tolerance: f64,
        mut case: impl FnMut(&mut Sampler) -> Option<f64>,
    ) -> Check {
        let mut worst = 0.0f64;
        let mut cases = 0;
        let mut draws = 0;
        while cases < self.samples && draws < self.samples * MAX_DRAWS_FACTOR {
            draws += 1;
            if let Some(err) = case(self.rng) {
                // NaN must fail the check.
                worst = if err.is_nan() { f64::NAN } else { worst.max(err) };
                cases += 1;
            }
        }
        Check {
            name,
            cases,
            worst,
            tolerance,
            passed: cases == self.samples && worst <= tolerance,
        }
    }
}

fn random_structure(rng: &mut Sampler) -> MAStructure {
    let mut coeff = || rng.polynomial(&Var::ALL, 2, 1.0);
    MAStructure::new(coeff(), coeff(), coeff(), coeff(), coeff())
}

fn random_surface(rng: &mut Sampler, degree: u32) -> SurfaceFunction {
    SurfaceFunction::new(rng.polynomial(&[Var::X, Var::Y], degree, 1.0)).expect("x, y only")
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn max_gap<const N: usize>(a: &[[f64; N]; N], b: &[[f64; N]; N]) -> f64 {
    let mut m = 0.0f64;
    for i in 0..N {
        for j in 0..N {
            m = m.max((a[i][j] - b[i][j]).abs());
        }
    }
    m
}

/// Structure with `E` chosen so that `f` solves the equation everywhere.
fn solved_structure(rng: &mut Sampler, f: &SurfaceFunction) -> MAStructure {
    let ma = random_structure(rng);
    let [[fxx, fxy], [_, fyy]] = f.hessian_fields();
    let det = fxx.mul(&fyy).sub(&fxy.powi(2));
    let e = ma
        .a
        .mul(&fxx)
        .add(&ma.b.mul(&fxy).scale(2.0))
        .add(&ma.c.mul(&fyy))
        .add(&ma.d.mul(&det))
        .neg();
    ma.with_e(e)
}

pub(super) fn run(job: &JobSpec) -> Result<Outcome, CliError> {
    let seed = job.seed()?;
    let samples = job.samples.unwrap_or(20);
    if samples == 0 {
        return Err(CliError::new("--samples must be positive"));
    }
    let bx = job.sample_box()?;
    let mut rng = Sampler::new(seed);
    let mut sweep = Sweep {
        rng: &mut rng,
        samples,
    };
    let checks = all_checks(&mut sweep, bx);
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    let summary = if failed.is_empty() {
        format!("check-all: {} checks passed (seed {seed}, {samples} cases each)", checks.len())
    } else {
        format!("check-all: FAILED {}", failed.join(", "))
    };
    Ok(Outcome {
        report: json!({
            "seed": seed,
            "samples": samples,
            "passed": failed.is_empty(),
            "checks": checks,
        }),
        summary,
        verified: failed.is_empty(),
    })
}

fn all_checks(s: &mut Sweep<'_>, bx: SampleBox) -> Vec<Check> {
    let mut out = Vec::new();
    let split = Signature {
        positive: 2,
        negative: 2,
        zero: 0,
    };

    out.push(s.run("metric_determinant", 1e-12, |rng| {
        let ma = random_structure(rng);
        let pt = rng.point4(bx);
        let d = ma.d.eval(&pt).ok()?;
        if d.abs() < 0.1 {
            return None;
        }
        let g = lr::lr_metric_matrix(&ma, &pt).ok()?;
        let d4 = d.powi(4);
        let err = (determinant(&g) - d4).abs() / d4;
        Some(if signature(&g) == split { err } else { f64::INFINITY })
    }));

    out.push(s.run("intrinsic_metric", 1e-12, |rng| {
        let ma = random_structure(rng);
        let pt = rng.point4(bx);
        let g = lr::lr_metric_matrix(&ma, &pt).ok()?;
        let gi = exterior::lr_metric_intrinsic(&ma, &pt).ok()?;
        Some(max_gap(&g, &gi) / (1.0 + max_abs(&g)))
    }));

    out.push(s.run("pfaffian", 1e-12, |rng| {
        let ma = random_structure(rng);
        let pt = rng.point4(bx);
        let intrinsic = exterior::pfaffian_intrinsic(&ma, &pt).ok()?;
        let closed = ma.pfaffian(&pt).ok()?;
        let eff = exterior::effectiveness_residual(&ma, &pt).ok()?;
        Some(rel(intrinsic, closed).max(eff.abs() * 1e2))
    }));

    // The pipeline's scalar curvature is the negative of the printed closed
    // form under this crate's curvature convention.
    out.push(s.run("scalar_closed_form_sign_flipped", 1e-9, |rng| {
        let d = rng.polynomial(&Var::ALL, 2, 1.0).add(&ScalarField::constant(2.0));
        let ma = MAStructure::diagonal(d, rng.polynomial(&Var::ALL, 1, 1.0));
        let pt = rng.point4(SampleBox::new(-0.5, 0.5).expect("valid box"));
        match (
            lr::scalar_curvature_closed(&ma, &pt),
            lr::lr_curvature(&ma, &pt),
        ) {
            (Ok(closed), Ok(curv)) => Some(rel(-closed, curv.scalar)),
            _ => None,
        }
    }));

    out.push(s.run("family_ricci_flat", lr::RICCI_FLAT_TOL, |rng| {
        let c = rng.admissible_family_params();
        let pts = rng.family_points(&c, 5, bx);
        let e = ScalarField::constant(rng.uniform(-1.0, 1.0));
        let report = lr::ricci_flat_check(&c, &e, &pts).ok()?;
        let mut worst = report.max_normalized_ricci;
        for pt in &pts {
            let r = lr::normalized_pde_residuals(&lr::family_d(&c), pt).ok()?;
            worst = worst.max(r.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
        }
        Some(if report.consistent { worst } else { f64::INFINITY })
    }));

    out.push(s.run("family_scalar_curvature", 1e-6, |rng| {
        let c = rng.family_params();
        let cond = c.cond_residual();
        if cond.abs() < 0.1 {
            return None;
        }
        let pt = rng.family_points(&c, 1, bx)[0];
        if c.polynomial_at(&pt).abs() < 0.2 {
            return None;
        }
        let curv = lr::lr_curvature(&lr::family_structure(&c, ScalarField::zero()), &pt).ok()?;
        Some((curv.scalar - lr::family_scalar_curvature(&c)).abs() / (24.0 * cond.abs()))
    }));

    out.push(s.run("plucker_quadric", 0.0, |rng| {
        let c = rng.family_params();
        let p = lr::plucker_from_params(&c);
        let lambda = rng.uniform(-3.0, 3.0);
        let homogeneity = rel(p.scaled(lambda).quadric_residual(), lambda * lambda * p.quadric_residual());
        let exact = if p.quadric_residual() == c.cond_residual() { 0.0 } else { f64::INFINITY };
        Some(exact.max(if homogeneity <= 1e-14 { 0.0 } else { homogeneity }))
    }));

    out.push(s.run("pullback_determinant", 1e-12, |rng| {
        let ma = random_structure(rng);
        let f = random_surface(rng, 3);
        let pt = rng.point2(bx);
        let g = pullback::pullback_metric(&ma, &f, &pt).ok()?;
        let formula = pullback::pullback_det(&ma, &f, &pt).ok()?;
        Some((determinant(&g) - formula).abs() / (1.0 + max_abs(&g).powi(2)))
    }));

    out.push(s.run("pfaffian_determinant_on_solutions", 1e-12, |rng| {
        let f = random_surface(rng, 3);
        let ma = solved_structure(rng, &f);
        let pt = rng.point2(bx);
        let r = pullback::pf_det_relation(&ma, &f, &pt).ok()?;
        let signs = r.det == 0.0 && r.four_pf == 0.0 || r.det.signum() == r.four_pf.signum();
        let err = r.gap.abs() / (1.0 + r.det.abs());
        Some(if signs || err < 1e-12 { err } else { f64::INFINITY })
    }));

    out.push(s.run("koszul_log_det", 1e-9, |rng| {
        let f = random_surface(rng, 4);
        let pt = rng.point2(SampleBox::new(-1.0, 1.0).expect("valid box"));
        let h = f.jet(&pt).ok()?;
        if h.hessian_det().abs() < 0.1 {
            return None;
        }
        let a = pullback::koszul_first(&f, &pt).ok()?;
        let b = pullback::koszul_second(&f, &pt).ok()?;
        let (a2, b2) = pullback::koszul_from_hessian_determinant(&f, &pt).ok()?;
        let ga = (a[0] - a2[0]).abs().max((a[1] - a2[1]).abs());
        Some(ga.max(max_gap(&b, &b2)) / (1.0 + max_abs(&b)))
    }));

    out.push(s.run("deformation", 1e-13, |rng| {
        let f = random_surface(rng, 3);
        let g = random_surface(rng, 3);
        let eps = rng.uniform(-1.0, 1.0);
        let pt = rng.point2(bx);
        let metric = pullback::pullback_metric(&pullback::deformation_structure(&g, eps), &f, &pt).ok()?;
        let sum = SurfaceFunction::new(f.field().add(&g.field().scale(eps))).ok()?;
        let hess = sum.jet(&pt).ok()?.hessian();
        Some(max_gap(&metric, &hess) / (1.0 + max_abs(&hess)))
    }));

    out.push(s.run("jet_vs_finite_differences", 1e-6, |rng| {
        let f = rng.polynomial(&Var::ALL, 3, 1.0);
        let pt = rng.point4(SampleBox::new(-1.0, 1.0).expect("valid box"));
        let exact = f.jet2(&pt).ok()?;
        let fd = fd_jet2(&f, &pt, DEFAULT_FD_STEP).ok()?;
        let mut worst = rel(fd.value, exact.value);
        for i in 0..4 {
            worst = worst.max(rel(fd.gradient[i], exact.gradient[i]));
            for j in 0..4 {
                worst = worst.max(rel(fd.hessian[i][j], exact.hessian[i][j]));
            }
        }
        Some(worst)
    }));

    out
}

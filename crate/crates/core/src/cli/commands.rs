//! One handler per subcommand. Each returns a JSON value; per-point commands
//! return a bare object for one point and `{"results": [...]}` otherwise.

use serde_json::{json, Value};

use super::{check, CliError, JobSpec, Outcome};
use crate::curvature::{self, determinant, max_abs, signature};
use crate::expr::{Point4, ScalarField};
use crate::exterior::{self, MAStructure};
use crate::lr::{self, FamilyParams};
use crate::pullback::{self, Point2, SurfaceFunction};
use crate::sampling::Sampler;
use crate::Error;

/// Commands with a tolerance that `--tol` overrides.
const TOLERANT: [&str; 2] = ["pullback", "ricci-flat"];

pub(super) fn dispatch(command: &str, job: &JobSpec) -> Result<Outcome, CliError> {
    if job.tol.is_some() && !TOLERANT.contains(&command) {
        return Err(CliError::new(format!("`{command}` takes no tolerance")));
    }
    if job.tol.is_some_and(|t| !(t >= 0.0 && t.is_finite())) {
        return Err(CliError::new("--tol must be finite and non-negative"));
    }
    match command {
        "pfaffian" => per_point4(job, "pfaffian", |ma, pt| {
            Ok(json!({ "pf": exterior::pfaffian_intrinsic(ma, pt)? }))
        }),
        "lr-metric" => per_point4(job, "lr-metric", lr_metric),
        "curvature" => per_point4(job, "curvature", |ma, pt| {
            let c = lr::lr_curvature(ma, pt)?;
            Ok(json!({
                "ricci": c.ricci,
                "scalar": c.scalar,
                "normalized_max_ricci": c.normalized_max_ricci(),
            }))
        }),
        "lemma2" => per_point4(job, "lemma2", |ma, pt| {
            let closed = lr::scalar_curvature_closed(ma, pt)?;
            let pipeline = lr::lr_curvature(ma, pt)?.scalar;
            Ok(json!({
                "closed_form": closed,
                "pipeline": pipeline,
                "difference": closed - pipeline,
                "sum": closed + pipeline,
            }))
        }),
        "ricci-flat" => ricci_flat(job),
        "plucker" => plucker(job),
        "pde-residuals" => pde_residuals(job),
        "pullback" => {
            let tol = job.tol.unwrap_or(pullback::DEFAULT_SOLUTION_TOL);
            per_point2(job, "pullback", false, |ma, f, pt| pullback_report(ma, f, pt, tol))
        }
        "koszul" => per_point2(job, "koszul", false, |_, f, pt| koszul(f, pt)),
        "deform" => deform(job),
        "check-all" => check::run(job),
        other => Err(CliError::new(format!("unknown command `{other}`"))),
    }
}

fn parse_field(name: &str, text: Option<&str>) -> Result<ScalarField, CliError> {
    crate::expr::parse(text.unwrap_or("0"))
        .map_err(|e| CliError::new(format!("{name}: {e}")))
}

fn structure(job: &JobSpec) -> Result<MAStructure, CliError> {
    Ok(MAStructure::new(
        parse_field("A", job.a.as_deref())?,
        parse_field("B", job.b.as_deref())?,
        parse_field("C", job.c_coeff.as_deref())?,
        parse_field("D", job.d.as_deref())?,
        parse_field("E", job.e.as_deref())?,
    ))
}

fn surface(name: &str, text: Option<&str>) -> Result<SurfaceFunction, CliError> {
    let text = text.ok_or_else(|| CliError::new(format!("missing --{name}")))?;
    SurfaceFunction::new(parse_field(name, Some(text))?)
        .map_err(|e| CliError::new(format!("{name}: {e}")))
}

fn params(job: &JobSpec) -> Result<Option<FamilyParams>, CliError> {
    let Some(c) = &job.c else { return Ok(None) };
    let arr: [f64; 6] = c
        .as_slice()
        .try_into()
        .map_err(|_| CliError::new(format!("--c expects six values, got {}", c.len())))?;
    FamilyParams::new(arr)
        .map(Some)
        .map_err(|e| CliError::new(format!("--c: {e}")))
}

fn at4(pt: &Point4, e: impl std::fmt::Display) -> CliError {
    CliError::new(format!("at ({}, {}, {}, {}): {e}", pt.x, pt.y, pt.p, pt.q))
}

fn at2(pt: &Point2, e: impl std::fmt::Display) -> CliError {
    CliError::new(format!("at ({}, {}): {e}", pt.x, pt.y))
}

fn collect(points: Vec<(Vec<f64>, Value)>) -> Value {
    if points.len() == 1 {
        return points.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null);
    }
    let results = points
        .into_iter()
        .map(|(pt, mut v)| {
            if let Value::Object(map) = &mut v {
                map.insert("point".into(), json!(pt));
            }
            v
        })
        .collect::<Vec<_>>();
    json!({ "results": results })
}

fn per_point4(
    job: &JobSpec,
    name: &str,
    f: impl Fn(&MAStructure, &Point4) -> Result<Value, Error>,
) -> Result<Outcome, CliError> {
    let ma = structure(job)?;
    let pts = job.points4()?;
    let mut out = Vec::with_capacity(pts.len());
    for pt in &pts {
        out.push((pt.to_array().to_vec(), f(&ma, pt).map_err(|e| at4(pt, e))?));
    }
    Ok(Outcome {
        report: collect(out),
        summary: format!("{name}: {} point(s)", pts.len()),
        verified: true,
    })
}

fn per_point2(
    job: &JobSpec,
    name: &str,
    needs_g: bool,
    f: impl Fn(&MAStructure, &SurfaceFunction, &Point2) -> Result<Value, Error>,
) -> Result<Outcome, CliError> {
    let ma = if needs_g {
        let g = surface("g", job.g.as_deref())?;
        let eps = job.eps.ok_or_else(|| CliError::new("missing --eps"))?;
        if !eps.is_finite() {
            return Err(CliError::new("--eps must be finite"));
        }
        pullback::deformation_structure(&g, eps)
    } else {
        structure(job)?
    };
    let sf = surface("f", job.f.as_deref())?;
    let pts = job.points2()?;
    let mut out = Vec::with_capacity(pts.len());
    for pt in &pts {
        out.push((vec![pt.x, pt.y], f(&ma, &sf, pt).map_err(|e| at2(pt, e))?));
    }
    Ok(Outcome {
        report: collect(out),
        summary: format!("{name}: {} point(s)", pts.len()),
        verified: true,
    })
}

fn lr_metric(ma: &MAStructure, pt: &Point4) -> Result<Value, Error> {
    let g = lr::lr_metric_matrix(ma, pt)?;
    let intrinsic = exterior::lr_metric_intrinsic(ma, pt)?;
    let gap = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .fold(0.0f64, |m, (i, j)| m.max((g[i][j] - intrinsic[i][j]).abs()));
    let d = ma.d.eval(pt)?;
    Ok(json!({
        "metric": g,
        "det": determinant(&g),
        "d4": d.powi(4),
        "signature": signature(&g),
        "intrinsic_max_gap": gap,
    }))
}

fn ricci_flat(job: &JobSpec) -> Result<Outcome, CliError> {
    let c = params(job)?.ok_or_else(|| CliError::new("missing --c"))?;
    let e = parse_field("E", job.e.as_deref())?;
    let pts = match &job.points {
        Some(_) => job.points4()?,
        None => Sampler::new(job.seed()?).family_points(
            &c,
            job.samples.unwrap_or(20),
            job.sample_box()?,
        ),
    };
    let tol = job.tol.unwrap_or(lr::RICCI_FLAT_TOL);
    let report = lr::ricci_flat_check_with_tol(&c, &e, &pts, tol).map_err(|e| CliError::new(e.to_string()))?;
    let verdict = match (report.ricci_flat, report.cond_holds) {
        (true, true) => "flat",
        (false, false) => "not-flat",
        _ => "inconsistent",
    };
    Ok(Outcome {
        report: json!({
            "cond_residual": report.cond_residual,
            "max_ricci": report.max_ricci,
            "verdict": verdict,
        }),
        summary: format!(
            "ricci-flat: {verdict} over {} point(s); max normalized |Ric| = {:e}, max |R| = {:e}",
            report.points, report.max_normalized_ricci, report.max_abs_scalar
        ),
        verified: report.consistent,
    })
}

fn plucker(job: &JobSpec) -> Result<Outcome, CliError> {
    let c = params(job)?.ok_or_else(|| CliError::new("missing --c"))?;
    let p = lr::plucker_from_params(&c);
    Ok(Outcome {
        report: json!({
            "quadric_residual": p.quadric_residual(),
            "scalar_curvature": lr::family_scalar_curvature(&c),
        }),
        summary: format!("plucker: coordinates {:?}", p.coords()),
        verified: true,
    })
}

fn pde_residuals(job: &JobSpec) -> Result<Outcome, CliError> {
    let d = match params(job)? {
        Some(c) => lr::family_d(&c),
        None => parse_field("D", job.d.as_deref())?,
    };
    let pts = job.points4()?;
    let mut out = Vec::with_capacity(pts.len());
    for pt in &pts {
        let raw = lr::pde_residuals(&d, pt).map_err(|e| at4(pt, e))?;
        let normalized = lr::normalized_pde_residuals(&d, pt).map_err(|e| at4(pt, e))?;
        out.push((
            pt.to_array().to_vec(),
            json!({
                "labels": lr::PDE_LABELS,
                "residuals": raw,
                "normalized": normalized,
            }),
        ));
    }
    Ok(Outcome {
        report: collect(out),
        summary: format!("pde-residuals: {} point(s)", pts.len()),
        verified: true,
    })
}

fn pullback_report(ma: &MAStructure, f: &SurfaceFunction, pt: &Point2, tol: f64) -> Result<Value, Error> {
    let g = pullback::pullback_metric(ma, f, pt)?;
    let relation = pullback::pf_det_relation(ma, f, pt)?;
    let (eigenvalues, discrepancy, note) = match pullback::eigenvalue_discrepancy_with_tol(ma, f, pt, tol) {
        Ok(d) => (json!([d.roots.0, d.roots.1]), json!(d), Value::Null),
        Err(e @ (Error::NotASolution { .. } | Error::ComplexRoots { .. })) => {
            (Value::Null, Value::Null, json!(e.to_string()))
        }
        Err(e) => return Err(e),
    };
    Ok(json!({
        "metric": g,
        "det": determinant(&g),
        "det_formula": relation.det,
        "four_pf": relation.four_pf,
        "ma_residual": relation.ma_residual,
        "eigenvalues": eigenvalues,
        "eigenvalue_discrepancy": discrepancy,
        "eigenvalue_note": note,
        "metric_eigenvalues": curvature::symmetric_eigenvalues(&g),
    }))
}

fn koszul(f: &SurfaceFunction, pt: &Point2) -> Result<Value, Error> {
    let a = pullback::koszul_first(f, pt)?;
    let b = pullback::koszul_second(f, pt)?;
    let (a_log, b_log) = pullback::koszul_from_hessian_determinant(f, pt)?;
    Ok(json!({
        "a": a,
        "b": b,
        "kahler_ricci": pullback::kahler_ricci(f, pt)?,
        "a_log_det": a_log,
        "b_log_det": b_log,
    }))
}

fn deform(job: &JobSpec) -> Result<Outcome, CliError> {
    let g = surface("g", job.g.as_deref())?;
    let eps = job.eps.ok_or_else(|| CliError::new("missing --eps"))?;
    let sum = surface("f", job.f.as_deref())?
        .field()
        .add(&g.field().scale(eps));
    let sum = SurfaceFunction::new(sum).map_err(|e| CliError::new(e.to_string()))?;
    per_point2(job, "deform", true, move |ma, f, pt| {
        let metric = pullback::pullback_metric(ma, f, pt)?;
        let hess = sum.jet(pt)?.hessian();
        let gap = max_abs(&[
            [metric[0][0] - hess[0][0], metric[0][1] - hess[0][1]],
            [metric[1][0] - hess[1][0], metric[1][1] - hess[1][1]],
        ]);
        Ok(json!({ "metric": metric, "hessian_sum": hess, "max_gap": gap }))
    })
}

//! Command-line front end: flags or a JSON job file in, one JSON document out.
//!
//! Exit codes: `0` success, `1` input or evaluation error, `2` a verification
//! failed (see the per-command notes in `docs/cli.md`).

mod check;
mod commands;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::Value;

use crate::expr::Point4;
use crate::pullback::Point2;
use crate::sampling::SampleBox;

/// Version of the JSON output schema documented in `docs/cli.md`.
pub const SCHEMA_VERSION: u32 = 1;
/// Environment variable consulted for a seed when neither a flag nor the job
/// file provides one.
pub const SEED_ENV: &str = "MAGEOM_SEED";

#[derive(Debug, Parser)]
#[command(name = "mageom", version, about = "Lychagin-Rubtsov metrics of Monge-Ampère structures")]
pub struct Cli {
    /// JSON job file; flags given on the command line take precedence.
    #[arg(long, global = true)]
    pub job: Option<PathBuf>,
    /// Pretty-print the JSON report.
    #[arg(long, global = true)]
    pub pretty: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pfaffian of α at 4D points.
    Pfaffian(PointJob),
    /// Metric matrix, determinant, signature and intrinsic cross-check.
    LrMetric(PointJob),
    /// Ricci tensor and scalar curvature of g_α.
    Curvature(PointJob),
    /// Closed-form scalar curvature (A = B = C = 0) against the pipeline.
    Lemma2(PointJob),
    /// Ricci-flatness of the six-parameter family.
    RicciFlat(FamilyJob),
    /// Plücker coordinates, quadric residual and scalar curvature.
    Plucker(FamilyJob),
    /// The ten Ricci-flatness PDE residuals of D.
    PdeResiduals(FamilyJob),
    /// Pullback metric along df: matrix, determinant, eigenvalues.
    Pullback(SurfaceJob),
    /// Koszul forms and Kähler Ricci tensor of Hess(f).
    Koszul(SurfaceJob),
    /// Deformation Hess(f) + ε Hess(g).
    Deform(SurfaceJob),
    /// Seeded sweep of every property check.
    CheckAll(SweepArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pfaffian(_) => "pfaffian",
            Command::LrMetric(_) => "lr-metric",
            Command::Curvature(_) => "curvature",
            Command::Lemma2(_) => "lemma2",
            Command::RicciFlat(_) => "ricci-flat",
            Command::Plucker(_) => "plucker",
            Command::PdeResiduals(_) => "pde-residuals",
            Command::Pullback(_) => "pullback",
            Command::Koszul(_) => "koszul",
            Command::Deform(_) => "deform",
            Command::CheckAll(_) => "check-all",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct MaArgs {
    #[arg(long = "A", allow_hyphen_values = true, value_name = "EXPR")]
    pub a: Option<String>,
    #[arg(long = "B", allow_hyphen_values = true, value_name = "EXPR")]
    pub b: Option<String>,
    #[arg(long = "C", allow_hyphen_values = true, value_name = "EXPR")]
    pub c: Option<String>,
    #[arg(long = "D", allow_hyphen_values = true, value_name = "EXPR")]
    pub d: Option<String>,
    #[arg(long = "E", allow_hyphen_values = true, value_name = "EXPR")]
    pub e: Option<String>,
}

#[derive(Debug, Default, Args)]
pub struct SweepArgs {
    /// Number of sampled points (or cases); requires a seed.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Sampling interval for every coordinate, `lo,hi`.
    #[arg(long = "box", allow_hyphen_values = true, value_name = "LO,HI")]
    pub sample_box: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tolerance override, where a command has one.
    #[arg(long)]
    pub tol: Option<f64>,
}

#[derive(Debug, Default, Args)]
pub struct PointJob {
    #[command(flatten)]
    pub ma: MaArgs,
    /// Evaluation point `x,y,p,q` (repeatable).
    #[arg(long, allow_hyphen_values = true, value_name = "X,Y,P,Q")]
    pub at: Vec<String>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Default, Args)]
pub struct FamilyJob {
    /// Family parameters `c1,…,c6`.
    #[arg(long = "c", allow_hyphen_values = true, value_name = "C1,..,C6")]
    pub params: Option<String>,
    #[command(flatten)]
    pub ma: MaArgs,
    #[arg(long, allow_hyphen_values = true, value_name = "X,Y,P,Q")]
    pub at: Vec<String>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

#[derive(Debug, Default, Args)]
pub struct SurfaceJob {
    #[command(flatten)]
    pub ma: MaArgs,
    /// Surface function f(x, y).
    #[arg(long, allow_hyphen_values = true, value_name = "EXPR")]
    pub f: Option<String>,
    /// Deformation function g(x, y).
    #[arg(long, allow_hyphen_values = true, value_name = "EXPR")]
    pub g: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub eps: Option<f64>,
    /// Evaluation point `x,y` (repeatable).
    #[arg(long, allow_hyphen_values = true, value_name = "X,Y")]
    pub at: Vec<String>,
    #[command(flatten)]
    pub sweep: SweepArgs,
}

/// Everything a command may consume. Job files use the same field names.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub command: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<String>,
    #[serde(rename = "B")]
    pub b: Option<String>,
    #[serde(rename = "C")]
    pub c_coeff: Option<String>,
    #[serde(rename = "D")]
    pub d: Option<String>,
    #[serde(rename = "E")]
    pub e: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub eps: Option<f64>,
    pub c: Option<Vec<f64>>,
    pub points: Option<Vec<Vec<f64>>>,
    pub samples: Option<usize>,
    #[serde(rename = "box")]
    pub sample_box: Option<[f64; 2]>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
}

impl JobSpec {
    /// Fields of `self` win; missing ones are taken from `fallback`.
    fn or(self, fallback: JobSpec) -> JobSpec {
        JobSpec {
            command: self.command.or(fallback.command),
            a: self.a.or(fallback.a),
            b: self.b.or(fallback.b),
            c_coeff: self.c_coeff.or(fallback.c_coeff),
            d: self.d.or(fallback.d),
            e: self.e.or(fallback.e),
            f: self.f.or(fallback.f),
            g: self.g.or(fallback.g),
            eps: self.eps.or(fallback.eps),
            c: self.c.or(fallback.c),
            points: self.points.or(fallback.points),
            samples: self.samples.or(fallback.samples),
            sample_box: self.sample_box.or(fallback.sample_box),
            seed: self.seed.or(fallback.seed),
            tol: self.tol.or(fallback.tol),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{0}")]
pub struct CliError(pub String);

impl CliError {
    fn new(msg: impl Into<String>) -> Self {
        CliError(msg.into())
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    /// Human-readable one-liner for standard error.
    pub summary: String,
    /// `false` when a verification failed (exit code 2).
    pub verified: bool,
}

fn parse_list(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::new(format!("{what}: `{s}` is not a number")))
        })
        .collect()
}

fn parse_points(items: &[String]) -> Result<Option<Vec<Vec<f64>>>, CliError> {
    if items.is_empty() {
        return Ok(None);
    }
    items
        .iter()
        .map(|s| parse_list(s, "--at"))
        .collect::<Result<_, _>>()
        .map(Some)
}

fn sweep_into(job: &mut JobSpec, sweep: &SweepArgs) -> Result<(), CliError> {
    job.samples = sweep.samples;
    job.seed = sweep.seed;
    job.tol = sweep.tol;
    if let Some(b) = &sweep.sample_box {
        match parse_list(b, "--box")?.as_slice() {
            [lo, hi] => job.sample_box = Some([*lo, *hi]),
            _ => return Err(CliError::new("--box expects `lo,hi`")),
        }
    }
    Ok(())
}

fn ma_into(job: &mut JobSpec, ma: &MaArgs) {
    job.a = ma.a.clone();
    job.b = ma.b.clone();
    job.c_coeff = ma.c.clone();
    job.d = ma.d.clone();
    job.e = ma.e.clone();
}

fn flags_to_job(cmd: &Command) -> Result<JobSpec, CliError> {
    let mut job = JobSpec {
        command: Some(cmd.name().to_string()),
        ..JobSpec::default()
    };
    match cmd {
        Command::Pfaffian(a) | Command::LrMetric(a) | Command::Curvature(a) | Command::Lemma2(a) => {
            ma_into(&mut job, &a.ma);
            job.points = parse_points(&a.at)?;
            sweep_into(&mut job, &a.sweep)?;
        }
        Command::RicciFlat(a) | Command::Plucker(a) | Command::PdeResiduals(a) => {
            ma_into(&mut job, &a.ma);
            job.c = a.params.as_deref().map(|s| parse_list(s, "--c")).transpose()?;
            job.points = parse_points(&a.at)?;
            sweep_into(&mut job, &a.sweep)?;
        }
        Command::Pullback(a) | Command::Koszul(a) | Command::Deform(a) => {
            ma_into(&mut job, &a.ma);
            job.f = a.f.clone();
            job.g = a.g.clone();
            job.eps = a.eps;
            job.points = parse_points(&a.at)?;
            sweep_into(&mut job, &a.sweep)?;
        }
        Command::CheckAll(s) => sweep_into(&mut job, s)?,
    }
    Ok(job)
}

/// Resolve flags and job file into a single [`JobSpec`].
pub fn resolve_job(cli: &Cli) -> Result<JobSpec, CliError> {
    let from_file = match &cli.job {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::new(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<JobSpec>(&text)
                .map_err(|e| CliError::new(format!("invalid job file {}: {e}", path.display())))?
        }
        None => JobSpec::default(),
    };
    let from_flags = match &cli.command {
        Some(cmd) => flags_to_job(cmd)?,
        None => JobSpec::default(),
    };
    if let (Some(a), Some(b)) = (&from_flags.command, &from_file.command) {
        if a != b {
            return Err(CliError::new(format!(
                "job file is for `{b}` but the command line asks for `{a}`"
            )));
        }
    }
    let mut job = from_flags.or(from_file);
    if job.seed.is_none() {
        if let Ok(s) = std::env::var(SEED_ENV) {
            job.seed = Some(
                s.trim()
                    .parse()
                    .map_err(|_| CliError::new(format!("{SEED_ENV}=`{s}` is not a u64")))?,
            );
        }
    }
    Ok(job)
}

impl JobSpec {
    fn sample_box(&self) -> Result<SampleBox, CliError> {
        match self.sample_box {
            None => Ok(SampleBox::DEFAULT),
            Some([lo, hi]) => {
                SampleBox::new(lo, hi).ok_or_else(|| CliError::new("sampling box needs lo < hi"))
            }
        }
    }

    fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::new(format!("sampling needs --seed (or {SEED_ENV})")))
    }

    /// Explicit points, or `samples` points drawn from the box.
    fn points4(&self) -> Result<Vec<Point4>, CliError> {
        if let Some(points) = &self.points {
            return points
                .iter()
                .map(|p| match p.as_slice() {
                    [x, y, p, q] => Ok(Point4::new(*x, *y, *p, *q)),
                    _ => Err(CliError::new("4D points need four coordinates x,y,p,q")),
                })
                .collect();
        }
        match self.samples {
            Some(n) => {
                Ok(crate::sampling::Sampler::new(self.seed()?).points4(n, self.sample_box()?))
            }
            None => Err(CliError::new("no points: give --at or --samples")),
        }
    }

    fn points2(&self) -> Result<Vec<Point2>, CliError> {
        if let Some(points) = &self.points {
            return points
                .iter()
                .map(|p| match p.as_slice() {
                    [x, y] => Ok(Point2::new(*x, *y)),
                    _ => Err(CliError::new("base points need two coordinates x,y")),
                })
                .collect();
        }
        match self.samples {
            Some(n) => {
                Ok(crate::sampling::Sampler::new(self.seed()?).points2(n, self.sample_box()?))
            }
            None => Err(CliError::new("no points: give --at or --samples")),
        }
    }
}

/// Run a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let job = resolve_job(cli)?;
    let command = job
        .command
        .clone()
        .ok_or_else(|| CliError::new("no command given (subcommand or `command` in the job file)"))?;
    let mut outcome = commands::dispatch(&command, &job)?;
    unsign_zeros(&mut outcome.report);
    Ok(outcome)
}

/// Replace every `-0.0` by `0.0` so reports never show a signed zero.
fn unsign_zeros(v: &mut Value) {
    match v {
        Value::Number(n) if n.as_f64() == Some(0.0) && n.is_f64() => *v = Value::from(0.0),
        Value::Array(items) => items.iter_mut().for_each(unsign_zeros),
        Value::Object(map) => map.values_mut().for_each(unsign_zeros),
        _ => {}
    }
}

/// Render the report as it is written to standard output.
pub fn render(report: &Value, pretty: bool) -> String {
    if pretty {
        serde_json::to_string_pretty(report).expect("serializable")
    } else {
        serde_json::to_string(report).expect("serializable")
    }
}

/// Parse `args`, run, and return `(stdout, stderr, exit code)`.
pub fn main_with_args<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            return (String::new(), e.to_string(), code);
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            let code = if outcome.verified { 0 } else { 2 };
            (
                render(&outcome.report, cli.pretty) + "\n",
                outcome.summary + "\n",
                code,
            )
        }
        Err(e) => (String::new(), format!("error: {e}\n"), 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_job_fields() {
        let file = JobSpec {
            command: Some("pfaffian".into()),
            d: Some("2".into()),
            e: Some("3".into()),
            ..JobSpec::default()
        };
        let flags = JobSpec {
            command: Some("pfaffian".into()),
            d: Some("1".into()),
            ..JobSpec::default()
        };
        let merged = flags.or(file);
        assert_eq!(merged.d.as_deref(), Some("1"));
        assert_eq!(merged.e.as_deref(), Some("3"));
    }

    #[test]
    fn job_file_rejects_unknown_fields() {
        assert!(serde_json::from_str::<JobSpec>(r#"{"bogus": 1}"#).is_err());
        let job: JobSpec =
            serde_json::from_str(r#"{"command": "plucker", "c": [0,1,0,1,0,0]}"#).unwrap();
        assert_eq!(job.c, Some(vec![0.0, 1.0, 0.0, 1.0, 0.0, 0.0]));
    }

    #[test]
    fn signed_zeros_become_positive() {
        let mut v = serde_json::json!({"a": [-0.0, 1.0], "b": {"c": -0.0}});
        unsign_zeros(&mut v);
        assert_eq!(serde_json::to_string(&v).unwrap(), r#"{"a":[0.0,1.0],"b":{"c":0.0}}"#);
    }

    #[test]
    fn parse_list_errors() {
        assert_eq!(parse_list("1, -2.5", "x").unwrap(), vec![1.0, -2.5]);
        assert!(parse_list("1,a", "x").is_err());
    }
}

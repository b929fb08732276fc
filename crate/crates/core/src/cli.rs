//! Command-line front end: `analyze`, `curve` and `simulate`.
//!
//! [`run`] takes the argument list and output sinks explicitly and returns the
//! process exit code: 0 on success, 2 for usage errors, 3 when the data are
//! inconsistent with the model, 4 for numerical failures.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::association::h_obs;
use crate::competitors::{interval as density_interval, CompetitorRegistry, DensityIntervalKind};
use crate::error::{Error, Result};
use crate::im::{plausibility, plausibility_curve, plausibility_interval, PrsKind};
use crate::model::{feasible_set, make_builtin, reduce, FeasibleSet, ModelSpec, SuffStat};
use crate::simulation::{parse_list, run as run_simulation, Method, SimConfig, SimReport};

#[derive(Debug, Parser)]
#[command(
    name = "uniform-im",
    version,
    about = "Exact plausibility intervals for Unif(a(θ), a(θ)+b(θ)) models"
)]
pub struct CliRequest {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Plausibility intervals (and optional competitor intervals) for one dataset.
    Analyze(AnalyzeArgs),
    /// Plausibility curve over a θ grid, as CSV or JSON.
    Curve(CurveArgs),
    /// Monte Carlo coverage and length study.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// location-unit, theta-theta-squared or linear.
    #[arg(long, default_value = "theta-theta-squared")]
    pub model: String,
    /// Coefficients c0,c1,d0,d1 for `linear` (a = c0 + c1 θ, b = d0 + d1 θ).
    #[arg(long, allow_hyphen_values = true)]
    pub coef: Option<String>,
}

impl ModelArgs {
    fn build(&self) -> Result<ModelSpec> {
        let coef = match &self.coef {
            Some(text) => parse_floats(text, "--coef")?,
            None => Vec::new(),
        };
        make_builtin(&self.model, &coef)
    }
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Comma-separated observations.
    #[arg(long, allow_hyphen_values = true)]
    pub data: Option<String>,
    /// File of observations separated by commas or whitespace.
    #[arg(long)]
    pub data_file: Option<PathBuf>,
    /// Sample size, when giving the sufficient statistic directly.
    #[arg(long)]
    pub n: Option<usize>,
    /// Sample minimum.
    #[arg(long, allow_hyphen_values = true)]
    pub min: Option<f64>,
    /// Sample maximum.
    #[arg(long, allow_hyphen_values = true)]
    pub max: Option<f64>,
}

impl DataArgs {
    fn stat(&self) -> Result<SuffStat> {
        let direct = self.n.is_some() || self.min.is_some() || self.max.is_some();
        let sources = [self.data.is_some(), self.data_file.is_some(), direct];
        if sources.iter().filter(|&&s| s).count() != 1 {
            return Err(Error::InvalidArgument(
                "give exactly one of --data, --data-file or --n/--min/--max".into(),
            ));
        }
        if let Some(text) = &self.data {
            return reduce(&parse_floats(text, "--data")?);
        }
        if let Some(path) = &self.data_file {
            let text = std::fs::read_to_string(path)?;
            let values = text
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<f64>().map_err(|_| {
                        Error::InvalidArgument(format!("{}: bad number `{s}`", path.display()))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            return reduce(&values);
        }
        match (self.n, self.min, self.max) {
            (Some(n), Some(x1), Some(x2)) => SuffStat::new(n, x1, x2),
            _ => Err(Error::InvalidArgument(
                "--n, --min and --max must be given together".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PrsChoice {
    OneSided,
    Default,
    Both,
}

impl PrsChoice {
    fn kinds(self) -> Vec<PrsKind> {
        match self {
            PrsChoice::OneSided => vec![PrsKind::OneSidedLower],
            PrsChoice::Default => vec![PrsKind::DefaultSymmetric],
            PrsChoice::Both => vec![PrsKind::OneSidedLower, PrsKind::DefaultSymmetric],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = PrsChoice::OneSided)]
    pub prs: PrsChoice,
    /// Competitor density: `flat-bayes` or `custom:<name>`; repeatable.
    #[arg(long)]
    pub competitor: Vec<String>,
    /// Interval type for competitor densities.
    #[arg(long, default_value = "equal-tailed")]
    pub density_interval: String,
    /// θ values at which to report plausibility and the conditioning value h.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_enum, default_value_t = PrsChoice::OneSided)]
    pub prs: PrsChoice,
    /// `lo,hi,points`; defaults to the feasible set with 801 points.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Level recorded in the JSON metadata (the horizontal cut line).
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `key = value` config file; flags below override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub coef: Option<String>,
    #[arg(long)]
    pub n_values: Option<String>,
    #[arg(long)]
    pub theta_values: Option<String>,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comma-separated method tags, e.g. `im-one-sided,im-default,flat-bayes-hpd`.
    #[arg(long)]
    pub methods: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores). Results do not depend on this.
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Skip printing the coverage and length tables.
    #[arg(long)]
    pub quiet: bool,
}

fn parse_floats(text: &str, flag: &str) -> Result<Vec<f64>> {
    parse_list(text).map_err(|_| Error::InvalidArgument(format!("{flag}: cannot parse `{text}`")))
}

/// Parse `args` (including the program name) and execute. Help and version
/// requests go to `out` and return 0.
pub fn run<I, T>(
    args: I,
    registry: &CompetitorRegistry,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let request = match CliRequest::try_parse_from(args) {
        Ok(r) => r,
        Err(e) => {
            let code = e.exit_code();
            let sink: &mut dyn Write = if code == 0 { out } else { err };
            let _ = write!(sink, "{e}");
            return code;
        }
    };
    match execute(&request, registry, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(request: &CliRequest, registry: &CompetitorRegistry, out: &mut dyn Write) -> Result<()> {
    match &request.command {
        Command::Analyze(args) => analyze(args, registry, out),
        Command::Curve(args) => curve(args, out),
        Command::Simulate(args) => simulate(args, registry, out),
    }
}

fn emit(output: &Option<PathBuf>, text: &str, out: &mut dyn Write) -> Result<()> {
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct MethodInterval {
    pub method: String,
    pub lo: f64,
    pub hi: f64,
    pub length: f64,
}

#[derive(Debug, Serialize)]
pub struct PointReport {
    pub theta: f64,
    pub h: Option<f64>,
    pub pl_one_sided: f64,
    pub pl_default: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalyzeReport {
    pub model: String,
    pub stat: SuffStat,
    pub feasible_set: FeasibleSet,
    pub alpha: f64,
    pub intervals: Vec<MethodInterval>,
    pub points: Vec<PointReport>,
}

pub fn analyze_report(
    args: &AnalyzeArgs,
    registry: &CompetitorRegistry,
) -> Result<AnalyzeReport> {
    crate::error::check_alpha(args.alpha)?;
    let model = args.model.build()?;
    let stat = args.data.stat()?;
    let fs = feasible_set(&model, &stat)?;
    let mut intervals = Vec::new();
    for prs in args.prs.kinds() {
        let iv = plausibility_interval(&stat, &model, prs, args.alpha)?;
        intervals.push(MethodInterval {
            method: format!("im-{}", prs.tag()),
            lo: iv.lo,
            hi: iv.hi,
            length: iv.length(),
        });
    }
    let kind: DensityIntervalKind = args.density_interval.parse()?;
    for name in &args.competitor {
        let label = name.strip_prefix("custom:").unwrap_or(name);
        if label != "flat-bayes" && !name.starts_with("custom:") {
            return Err(Error::UnknownCompetitor(name.clone()));
        }
        let spec = registry.get(label)?;
        let iv = density_interval(spec, &stat, &model, args.alpha, kind)?;
        let method = Method::Density {
            spec: spec.clone(),
            kind,
        };
        intervals.push(MethodInterval {
            method: method.tag(),
            lo: iv.lo,
            hi: iv.hi,
            length: iv.length(),
        });
    }
    let thetas = match &args.theta {
        Some(text) => parse_floats(text, "--theta")?,
        None => Vec::new(),
    };
    let mut points = Vec::new();
    for t in thetas {
        let one = plausibility(t, &stat, &model, PrsKind::OneSidedLower)?;
        let two = plausibility(t, &stat, &model, PrsKind::DefaultSymmetric)?;
        let h = if fs.contains(t) {
            h_obs(&stat, t, &model).ok()
        } else {
            None
        };
        points.push(PointReport {
            theta: t,
            h,
            pl_one_sided: one.pl,
            pl_default: two.pl,
        });
    }
    Ok(AnalyzeReport {
        model: model.name().to_string(),
        stat,
        feasible_set: fs,
        alpha: args.alpha,
        intervals,
        points,
    })
}

fn analyze(args: &AnalyzeArgs, registry: &CompetitorRegistry, out: &mut dyn Write) -> Result<()> {
    let report = analyze_report(args, registry)?;
    let text = match args.format {
        Format::Json => serde_json::to_string_pretty(&report)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for iv in &report.intervals {
                w.serialize(iv)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv output is utf-8")
        }
        Format::Text => {
            let mut s = format!(
                "model {}  n={}  min={}  max={}\nfeasible set [{}, {}]\n",
                report.model,
                report.stat.n,
                report.stat.x1,
                report.stat.x2,
                report.feasible_set.lo,
                report.feasible_set.hi
            );
            let level = 100.0 * (1.0 - report.alpha);
            for iv in &report.intervals {
                s += &format!(
                    "{level}% {:<18} ({:.6}, {:.6})  length {:.6}\n",
                    iv.method, iv.lo, iv.hi, iv.length
                );
            }
            for p in &report.points {
                let h = p.h.map_or("-".to_string(), |h| format!("{h:.6}"));
                s += &format!(
                    "theta={}  h={h}  pl(one-sided)={:.6}  pl(default)={:.6}\n",
                    p.theta, p.pl_one_sided, p.pl_default
                );
            }
            s
        }
    };
    emit(&args.output, &text, out)
}

#[derive(Debug, Serialize)]
struct CurveRow {
    theta: f64,
    pl: f64,
}

#[derive(Debug, Serialize)]
struct CurveMeta {
    model: String,
    stat: SuffStat,
    prs: PrsKind,
    alpha: f64,
}

#[derive(Debug, Serialize)]
struct CurveJson {
    meta: CurveMeta,
    rows: Vec<CurveRow>,
}

fn curve(args: &CurveArgs, out: &mut dyn Write) -> Result<()> {
    let model = args.model.build()?;
    let stat = args.data.stat()?;
    let prs = match args.prs {
        PrsChoice::OneSided => PrsKind::OneSidedLower,
        PrsChoice::Default => PrsKind::DefaultSymmetric,
        PrsChoice::Both => {
            return Err(Error::InvalidArgument(
                "curve takes a single --prs (one-sided or default)".into(),
            ))
        }
    };
    let (lo, hi, points) = match &args.grid {
        Some(text) => {
            let parts = parse_floats(text, "--grid")?;
            match parts.as_slice() {
                &[lo, hi, pts] if pts >= 1.0 && pts.fract() == 0.0 && lo <= hi => {
                    (lo, hi, pts as usize)
                }
                _ => {
                    return Err(Error::InvalidArgument(format!(
                        "--grid expects lo,hi,points with lo <= hi, got `{text}`"
                    )))
                }
            }
        }
        None => {
            let fs = feasible_set(&model, &stat)?;
            if !fs.is_bounded() {
                return Err(Error::InvalidArgument(
                    "feasible set is unbounded; pass --grid lo,hi,points".into(),
                ));
            }
            (fs.lo, fs.hi, 801)
        }
    };
    let grid: Vec<f64> = if points == 1 {
        vec![lo]
    } else {
        (0..points)
            .map(|k| {
                if k == points - 1 {
                    hi
                } else {
                    lo + (hi - lo) * k as f64 / (points - 1) as f64
                }
            })
            .collect()
    };
    let rows: Vec<CurveRow> = plausibility_curve(&stat, &model, prs, &grid)?
        .into_iter()
        .map(|r| CurveRow { theta: r.theta, pl: r.pl })
        .collect();
    let text = match args.format {
        Format::Json => {
            let doc = CurveJson {
                meta: CurveMeta {
                    model: model.name().to_string(),
                    stat,
                    prs,
                    alpha: args.alpha,
                },
                rows,
            };
            serde_json::to_string_pretty(&doc)? + "\n"
        }
        Format::Csv | Format::Text => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rows {
                w.serialize(row)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.into_error()))?)
                .expect("csv output is utf-8")
        }
    };
    emit(&args.output, &text, out)
}

fn sim_config(args: &SimulateArgs, registry: &CompetitorRegistry) -> Result<SimConfig> {
    let mut config = match &args.config {
        Some(path) => SimConfig::from_kv_str(&std::fs::read_to_string(path)?, registry)?,
        None => SimConfig::theta_squared_study(),
    };
    if args.model.is_some() || args.coef.is_some() {
        let name = args.model.clone().unwrap_or_else(|| config.model.name().to_string());
        let coef = match &args.coef {
            Some(text) => parse_floats(text, "--coef")?,
            None => Vec::new(),
        };
        config.model = make_builtin(&name, &coef)?;
    }
    if let Some(text) = &args.n_values {
        config.n_values = parse_list(text)
            .map_err(|_| Error::InvalidArgument(format!("--n-values: cannot parse `{text}`")))?;
    }
    if let Some(text) = &args.theta_values {
        config.theta_values = parse_floats(text, "--theta-values")?;
    }
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if let Some(alpha) = args.alpha {
        config.alpha = alpha;
    }
    if let Some(text) = &args.methods {
        config.methods = text
            .split(',')
            .map(|t| Method::parse(t.trim(), registry))
            .collect::<Result<_>>()?;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(workers) = args.workers {
        config.workers = workers;
    }
    config.validate()?;
    Ok(config)
}

fn write_report(args: &SimulateArgs, report: &SimReport, failure: Option<&str>) -> Result<()> {
    if let Some(path) = &args.csv {
        let mut text = report.to_csv()?;
        if let Some(msg) = failure {
            text += &format!("# FAILED: {msg}\n");
        }
        std::fs::write(path, text)?;
    }
    if let Some(path) = &args.json {
        let mut value = serde_json::to_value(report)?;
        if let (Some(msg), Some(obj)) = (failure, value.as_object_mut()) {
            obj.insert("failure".into(), serde_json::Value::String(msg.to_string()));
        }
        std::fs::write(path, serde_json::to_string_pretty(&value)? + "\n")?;
    }
    Ok(())
}

fn simulate(args: &SimulateArgs, registry: &CompetitorRegistry, out: &mut dyn Write) -> Result<()> {
    let config = sim_config(args, registry)?;
    match run_simulation(&config) {
        Ok(report) => {
            write_report(args, &report, None)?;
            if !args.quiet {
                out.write_all(report.format_tables().as_bytes())?;
            }
            Ok(())
        }
        Err(e) => {
            if let Error::Simulation { partial, .. } = &e {
                write_report(args, partial, Some(&e.to_string()))?;
            }
            Err(e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["uniform-im"];
        full.extend_from_slice(args);
        let code = run(full, &CompetitorRegistry::new(), &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["frobnicate"]).0, 2);
        assert_eq!(call(&["analyze", "--data", "1,2", "--n", "3"]).0, 2);
        assert_eq!(call(&["analyze", "--model", "nope", "--data", "1,2"]).0, 2);
        let (code, _, err) = call(&["analyze", "--data", "1,2", "--alpha", "2"]);
        assert_eq!(code, 2);
        assert_eq!(err.lines().count(), 1);
    }

    #[test]
    fn infeasible_data_exit_3() {
        let (code, _, err) = call(&[
            "analyze", "--model", "location-unit", "--data", "0,1.5",
        ]);
        assert_eq!(code, 3, "{err}");
    }

    #[test]
    fn help_exits_0() {
        let (code, out, _) = call(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("simulate"));
    }

    #[test]
    fn analyze_json_has_intervals() {
        let (code, out, err) = call(&[
            "analyze", "--n", "25", "--min", "281.1", "--max", "9689.7", "--prs", "both",
            "--format", "json", "--theta", "100,300",
        ]);
        assert_eq!(code, 0, "{err}");
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["intervals"].as_array().unwrap().len(), 2);
        assert_eq!(v["points"][1]["pl_one_sided"], 0.0);
        assert!(v["points"][1]["h"].is_null());
    }

    #[test]
    fn unknown_competitor_is_usage_error() {
        let (code, _, _) = call(&[
            "analyze", "--n", "25", "--min", "281.1", "--max", "9689.7", "--competitor",
            "custom:reference",
        ]);
        assert_eq!(code, 2);
    }
}

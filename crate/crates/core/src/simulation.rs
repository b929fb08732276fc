//! Monte Carlo coverage and length study over an `(n, θ)` grid.
//!
//! Every replication draws its data from its own counter-based ChaCha stream
//! keyed by `(seed, cell, rep)`, so results do not depend on scheduling or on
//! the number of worker threads, and every method in a cell sees the same
//! datasets.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::competitors::{
    interval_from_table, normalize, CompetitorRegistry, DensityIntervalKind, DensitySpec,
};
use crate::error::{check_alpha, Error, Result};
use crate::im::{plausibility_interval, PrsKind};
use crate::model::{make_builtin, reduce, ModelSpec, SuffStat};

pub const DEFAULT_SEED: u64 = 2016;
/// Largest tolerated fraction of failed replications per row.
pub const FAILURE_LIMIT: f64 = 1e-3;

/// An interval procedure compared in the study.
#[derive(Debug, Clone)]
pub enum Method {
    ImOneSided,
    ImDefault,
    Density {
        spec: DensitySpec,
        kind: DensityIntervalKind,
    },
}

impl Method {
    /// `im-one-sided`, `im-default`, `<label>` (equal-tailed) or `<label>-hpd`.
    pub fn tag(&self) -> String {
        match self {
            Method::ImOneSided => "im-one-sided".into(),
            Method::ImDefault => "im-default".into(),
            Method::Density { spec, kind } => match kind {
                DensityIntervalKind::EqualTailed => spec.label().to_string(),
                DensityIntervalKind::HighestDensity => format!("{}-hpd", spec.label()),
            },
        }
    }

    /// Parse a method tag. Density methods are `flat-bayes` or
    /// `custom:<label>`, optionally suffixed `-hpd` for highest density.
    pub fn parse(tag: &str, registry: &CompetitorRegistry) -> Result<Method> {
        match tag {
            "im-one-sided" => return Ok(Method::ImOneSided),
            "im-default" => return Ok(Method::ImDefault),
            _ => {}
        }
        let (base, kind) = match tag.strip_suffix("-hpd") {
            Some(base) => (base, DensityIntervalKind::HighestDensity),
            None => (tag, DensityIntervalKind::EqualTailed),
        };
        let label = base.strip_prefix("custom:").unwrap_or(base);
        if label != "flat-bayes" && !base.starts_with("custom:") {
            return Err(Error::InvalidArgument(format!("unknown method `{tag}`")));
        }
        Ok(Method::Density {
            spec: registry.get(label)?.clone(),
            kind,
        })
    }

    pub fn interval(&self, stat: &SuffStat, model: &ModelSpec, alpha: f64) -> Result<(f64, f64)> {
        match self {
            Method::ImOneSided => {
                plausibility_interval(stat, model, PrsKind::OneSidedLower, alpha)
                    .map(|iv| (iv.lo, iv.hi))
            }
            Method::ImDefault => plausibility_interval(stat, model, PrsKind::DefaultSymmetric, alpha)
                .map(|iv| (iv.lo, iv.hi)),
            Method::Density { spec, kind } => {
                let table = normalize(spec, stat, model)?;
                interval_from_table(&table, alpha, *kind).map(|iv| (iv.lo, iv.hi))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub model: ModelSpec,
    pub n_values: Vec<usize>,
    pub theta_values: Vec<f64>,
    pub reps: usize,
    pub alpha: f64,
    pub methods: Vec<Method>,
    pub seed: u64,
    /// Worker threads; 0 uses the global rayon pool.
    pub workers: usize,
}

impl SimConfig {
    /// `Unif(θ, θ²)` with `n ∈ {2, 5, 10, 25}`, `θ ∈ {2, 5, 10, 25, 50, 100}`,
    /// 8000 replications and 95% one-sided plausibility intervals.
    pub fn theta_squared_study() -> Self {
        SimConfig {
            model: ModelSpec::theta_theta_squared(),
            n_values: vec![2, 5, 10, 25],
            theta_values: vec![2.0, 5.0, 10.0, 25.0, 50.0, 100.0],
            reps: 8000,
            alpha: 0.05,
            methods: vec![Method::ImOneSided],
            seed: DEFAULT_SEED,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        if self.reps == 0 || self.reps > u32::MAX as usize {
            return Err(Error::InvalidArgument(format!(
                "reps must be in 1..=2^32-1, got {}",
                self.reps
            )));
        }
        if self.n_values.is_empty() || self.theta_values.is_empty() || self.methods.is_empty() {
            return Err(Error::InvalidArgument(
                "simulation needs at least one n, theta and method".into(),
            ));
        }
        if let Some(n) = self.n_values.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidArgument(format!(
                "sample sizes must be at least 2, got {n}"
            )));
        }
        let domain = self.model.domain();
        if let Some(t) = self.theta_values.iter().find(|&&t| !domain.contains(t)) {
            return Err(Error::InvalidArgument(format!(
                "theta={t} lies outside the domain of `{}`",
                self.model.name()
            )));
        }
        Ok(())
    }

    /// Parse `key = value` lines (`#` starts a comment). Recognized keys:
    /// `model`, `coef`, `n_values`, `theta_values`, `reps`, `alpha`,
    /// `methods`, `seed`, `workers`. Missing keys take the
    /// [`theta_squared_study`](Self::theta_squared_study) defaults.
    pub fn from_kv_str(text: &str, registry: &CompetitorRegistry) -> Result<Self> {
        let mut config = SimConfig::theta_squared_study();
        let mut model_name: Option<String> = None;
        let mut coef: Vec<f64> = Vec::new();
        let mut methods: Option<String> = None;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key = value", lineno + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| {
                Error::InvalidArgument(format!("config line {}: invalid {what} `{value}`", lineno + 1))
            };
            match key {
                "model" => model_name = Some(value.to_string()),
                "coef" => coef = parse_list(value).map_err(|_| bad("coef"))?,
                "n_values" => config.n_values = parse_list(value).map_err(|_| bad("n_values"))?,
                "theta_values" => {
                    config.theta_values = parse_list(value).map_err(|_| bad("theta_values"))?
                }
                "reps" => config.reps = value.parse().map_err(|_| bad("reps"))?,
                "alpha" => config.alpha = value.parse().map_err(|_| bad("alpha"))?,
                "methods" => methods = Some(value.to_string()),
                "seed" => config.seed = value.parse().map_err(|_| bad("seed"))?,
                "workers" => config.workers = value.parse().map_err(|_| bad("workers"))?,
                other => {
                    return Err(Error::InvalidArgument(format!(
                        "config line {}: unknown key `{other}`",
                        lineno + 1
                    )))
                }
            }
        }
        if let Some(name) = model_name {
            config.model = make_builtin(&name, &coef)?;
        }
        if let Some(list) = methods {
            config.methods = list
                .split(',')
                .map(|t| Method::parse(t.trim(), registry))
                .collect::<Result<_>>()?;
        }
        config.validate()?;
        Ok(config)
    }
}

pub(crate) fn parse_list<T: std::str::FromStr>(text: &str) -> std::result::Result<Vec<T>, T::Err> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Reproducible uniform stream for replication `rep` of cell `cell`.
///
/// The key is derived from `seed`; `(cell, rep)` select one of 2⁶⁴ ChaCha
/// streams, so distinct pairs never overlap.
pub fn stream(seed: u64, cell: u64, rep: u64) -> ChaCha8Rng {
    assert!(cell < 1 << 32 && rep < 1 << 32, "cell and rep must fit in 32 bits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((cell << 32) | rep);
    rng
}

/// FNV-1a over the bit patterns of a sufficient statistic.
fn dataset_hash(stat: &SuffStat, state: u64) -> u64 {
    let mut h = state;
    for word in [stat.n as u64, stat.x1.to_bits(), stat.x2.to_bits()] {
        for byte in word.to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub method: String,
    pub n: usize,
    pub theta: f64,
    pub coverage: f64,
    pub coverage_se: f64,
    pub mean_length: f64,
    pub length_se: f64,
    pub reps_used: usize,
}

/// Hash of every dataset a method consumed in one cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetDigest {
    pub method: String,
    pub n: usize,
    pub theta: f64,
    pub digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimMeta {
    pub model: String,
    pub reps: usize,
    pub alpha: f64,
    pub seed: u64,
    pub n_values: Vec<usize>,
    pub theta_values: Vec<f64>,
    pub methods: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub meta: SimMeta,
    pub rows: Vec<SimRow>,
    pub digests: Vec<DatasetDigest>,
}

#[derive(Clone, Copy)]
enum Outcome {
    Interval { lo: f64, hi: f64 },
    Failed,
}

struct RepResult {
    outcomes: Vec<(Outcome, u64)>,
}

fn replicate(config: &SimConfig, cell: usize, rep: usize) -> RepResult {
    let n = config.n_values[cell / config.theta_values.len()];
    let theta = config.theta_values[cell % config.theta_values.len()];
    let (a, b) = (config.model.a(theta), config.model.b(theta));
    let mut rng = stream(config.seed, cell as u64, rep as u64);
    let sample: Vec<f64> = (0..n).map(|_| a + b * rng.random::<f64>()).collect();
    let stat = reduce(&sample).expect("n >= 2 finite draws");
    let outcomes = config
        .methods
        .iter()
        .map(|m| {
            let seen = dataset_hash(&stat, FNV_OFFSET);
            let outcome = match m.interval(&stat, &config.model, config.alpha) {
                Ok((lo, hi)) => Outcome::Interval { lo, hi },
                Err(e) => {
                    log::warn!("{} failed at n={n}, theta={theta}, rep={rep}: {e}", m.tag());
                    Outcome::Failed
                }
            };
            (outcome, seen)
        })
        .collect();
    RepResult { outcomes }
}

/// Run the study. Rows are ordered by method, then `n`, then θ.
///
/// Fails with [`Error::Simulation`], carrying the full partial report, when
/// any row loses more than [`FAILURE_LIMIT`] of its replications.
pub fn run(config: &SimConfig) -> Result<SimReport> {
    config.validate()?;
    let cells = config.n_values.len() * config.theta_values.len();
    let reps = config.reps;
    let work = || -> Vec<RepResult> {
        (0..cells * reps)
            .into_par_iter()
            .map(|k| replicate(config, k / reps, k % reps))
            .collect()
    };
    let results = if config.workers > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };

    let mut rows = Vec::new();
    let mut digests = Vec::new();
    let mut first_failure: Option<(String, usize, f64, usize)> = None;
    for (mi, method) in config.methods.iter().enumerate() {
        let tag = method.tag();
        for cell in 0..cells {
            let n = config.n_values[cell / config.theta_values.len()];
            let theta = config.theta_values[cell % config.theta_values.len()];
            let mut used = 0usize;
            let mut covered = 0usize;
            let mut sum = 0.0;
            let mut sum_sq = 0.0;
            let mut digest = FNV_OFFSET;
            for r in &results[cell * reps..(cell + 1) * reps] {
                let (outcome, seen) = r.outcomes[mi];
                digest = (digest ^ seen).wrapping_mul(0x0000_0100_0000_01b3);
                if let Outcome::Interval { lo, hi } = outcome {
                    used += 1;
                    covered += (lo <= theta && theta <= hi) as usize;
                    let len = hi - lo;
                    sum += len;
                    sum_sq += len * len;
                }
            }
            let m = used as f64;
            let coverage = covered as f64 / m;
            let mean = sum / m;
            let var = if used > 1 {
                ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0)
            } else {
                0.0
            };
            rows.push(SimRow {
                method: tag.clone(),
                n,
                theta,
                coverage,
                coverage_se: (coverage * (1.0 - coverage) / m).sqrt(),
                mean_length: mean,
                length_se: (var / m).sqrt(),
                reps_used: used,
            });
            log::debug!("{tag} n={n} theta={theta} datasets={digest:016x}");
            digests.push(DatasetDigest {
                method: tag.clone(),
                n,
                theta,
                digest: format!("{digest:016x}"),
            });
            let failures = reps - used;
            if failures as f64 > FAILURE_LIMIT * reps as f64 && first_failure.is_none() {
                first_failure = Some((tag.clone(), n, theta, failures));
            }
        }
    }

    let report = SimReport {
        meta: SimMeta {
            model: config.model.name().to_string(),
            reps,
            alpha: config.alpha,
            seed: config.seed,
            n_values: config.n_values.clone(),
            theta_values: config.theta_values.clone(),
            methods: config.methods.iter().map(Method::tag).collect(),
        },
        rows,
        digests,
    };
    match first_failure {
        Some((method, n, theta, failures)) => Err(Error::Simulation {
            method,
            n,
            theta,
            failures,
            reps,
            partial: Box::new(report),
        }),
        None => Ok(report),
    }
}

impl SimReport {
    pub fn row(&self, method: &str, n: usize, theta: f64) -> Option<&SimRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.n == n && r.theta == theta)
    }

    /// CSV with header `method,n,theta,coverage,coverage_se,mean_length,length_se,reps_used`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            w.serialize(row)?;
        }
        let bytes = w
            .into_inner()
            .map_err(|e| Error::Io(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn rows_from_csv(text: &str) -> Result<Vec<SimRow>> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        r.deserialize().map(|row| row.map_err(Error::from)).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Coverage and mean-length matrices, one block per method, rows `n`,
    /// columns θ.
    pub fn format_tables(&self) -> String {
        let mut out = String::new();
        let meta = &self.meta;
        for (title, pick) in [
            ("Estimated coverage probabilities", 0usize),
            ("Estimated mean lengths", 1usize),
        ] {
            let _ = writeln!(
                out,
                "{title} ({} reps, {}% intervals, model {})",
                meta.reps,
                100.0 * (1.0 - meta.alpha),
                meta.model
            );
            let _ = write!(out, "{:<16} {:>4}", "method", "n");
            for t in &meta.theta_values {
                let _ = write!(out, " {:>9}", t);
            }
            out.push('\n');
            for method in &meta.methods {
                for (k, &n) in meta.n_values.iter().enumerate() {
                    let label = if k == 0 { method.as_str() } else { "" };
                    let _ = write!(out, "{label:<16} {n:>4}");
                    for &t in &meta.theta_values {
                        let cell = match self.row(method, n, t) {
                            Some(r) if pick == 0 => format!("{:.3}", r.coverage),
                            Some(r) => significant(r.mean_length, 3),
                            None => "-".into(),
                        };
                        let _ = write!(out, " {cell:>9}");
                    }
                    out.push('\n');
                }
            }
            out.push('\n');
        }
        out
    }
}

fn significant(x: f64, digits: i32) -> String {
    if !x.is_finite() || x == 0.0 {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (digits - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

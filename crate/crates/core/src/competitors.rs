//! Posterior-style comparator intervals from a gridded density on the
//! feasible set.
//!
//! A [`DensitySpec`] is any unnormalized log density in θ (a default-prior
//! posterior, a generalized fiducial density, ...). Only the flat prior ships
//! built in; other priors are registered by the caller. The log-density
//! callback may be invoked from several threads at once and must be reentrant.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::model::{feasible_set, ModelSpec, SuffStat};

pub const INITIAL_GRID: usize = 2048;
pub const MAX_GRID: usize = 65536;
/// Relative change in total mass between successive grids that counts as converged.
pub const MASS_TOLERANCE: f64 = 1e-4;
/// Grid cells whose density is below `exp(-TAIL_LOG_DROP)` times the peak are
/// trimmed from both ends before the grid is refined.
pub const TAIL_LOG_DROP: f64 = 40.0;
/// Allowed slack between the achieved and requested interval mass.
pub const INTERVAL_MASS_TOLERANCE: f64 = 1e-4;

pub type LogDensityFn = dyn Fn(f64, &SuffStat, &ModelSpec) -> f64 + Send + Sync;

#[derive(Clone)]
pub struct DensitySpec {
    label: String,
    log_density: Arc<LogDensityFn>,
}

impl fmt::Debug for DensitySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DensitySpec")
            .field("label", &self.label)
            .finish_non_exhaustive()
    }
}

impl DensitySpec {
    pub fn new<F>(label: impl Into<String>, log_density: F) -> Self
    where
        F: Fn(f64, &SuffStat, &ModelSpec) -> f64 + Send + Sync + 'static,
    {
        DensitySpec {
            label: label.into(),
            log_density: Arc::new(log_density),
        }
    }

    /// Flat prior times the uniform likelihood: `b(θ)^{-n}` on the feasible set.
    pub fn flat_prior() -> Self {
        DensitySpec::new("flat-bayes", |theta, stat: &SuffStat, model: &ModelSpec| {
            -(stat.n as f64) * model.b(theta).ln()
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn log_density(&self, theta: f64, stat: &SuffStat, model: &ModelSpec) -> f64 {
        (self.log_density)(theta, stat, model)
    }
}

/// Named densities available to the simulation harness and the CLI.
#[derive(Debug, Clone)]
pub struct CompetitorRegistry {
    densities: BTreeMap<String, DensitySpec>,
}

impl Default for CompetitorRegistry {
    fn default() -> Self {
        Self::new()
    }
}

impl CompetitorRegistry {
    /// A registry holding only the flat prior.
    pub fn new() -> Self {
        let mut densities = BTreeMap::new();
        let flat = DensitySpec::flat_prior();
        densities.insert(flat.label().to_string(), flat);
        CompetitorRegistry { densities }
    }

    pub fn register(&mut self, density: DensitySpec) {
        self.densities.insert(density.label().to_string(), density);
    }

    pub fn get(&self, label: &str) -> Result<&DensitySpec> {
        self.densities
            .get(label)
            .ok_or_else(|| Error::UnknownCompetitor(label.to_string()))
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.densities.keys().map(String::as_str)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityIntervalKind {
    EqualTailed,
    HighestDensity,
}

impl DensityIntervalKind {
    pub fn tag(self) -> &'static str {
        match self {
            DensityIntervalKind::EqualTailed => "equal-tailed",
            DensityIntervalKind::HighestDensity => "highest-density",
        }
    }
}

impl FromStr for DensityIntervalKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "equal-tailed" | "et" => Ok(DensityIntervalKind::EqualTailed),
            "highest-density" | "hpd" => Ok(DensityIntervalKind::HighestDensity),
            other => Err(Error::InvalidArgument(format!(
                "unknown interval kind `{other}` (expected equal-tailed or hpd)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityIntervalResult {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub kind: DensityIntervalKind,
}

impl DensityIntervalResult {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Normalized density on an even grid, with its running integral.
///
/// Between grid points the density is linear, so `cumulative` is exact for
/// that interpolant and ends at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityTable {
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl DensityTable {
    fn cell(&self, x: f64) -> usize {
        let k = self.grid.partition_point(|&g| g <= x);
        k.saturating_sub(1).min(self.grid.len() - 2)
    }

    /// Integral of the interpolated density from the left end up to `x`.
    pub fn mass_below(&self, x: f64) -> f64 {
        let last = self.grid.len() - 1;
        if x <= self.grid[0] {
            return 0.0;
        }
        if x >= self.grid[last] {
            return 1.0;
        }
        let i = self.cell(x);
        let dx = self.grid[i + 1] - self.grid[i];
        let t = x - self.grid[i];
        let (f0, f1) = (self.density[i], self.density[i + 1]);
        self.cumulative[i] + f0 * t + (f1 - f0) * t * t / (2.0 * dx)
    }

    /// Quantile by linear interpolation in the cumulative table.
    pub fn quantile(&self, p: f64) -> f64 {
        let last = self.grid.len() - 1;
        if p <= 0.0 {
            return self.grid[0];
        }
        if p >= 1.0 {
            return self.grid[last];
        }
        let k = self.cumulative.partition_point(|&c| c < p).clamp(1, last);
        let (c0, c1) = (self.cumulative[k - 1], self.cumulative[k]);
        let (g0, g1) = (self.grid[k - 1], self.grid[k]);
        if c1 <= c0 {
            return g0;
        }
        g0 + (g1 - g0) * (p - c0) / (c1 - c0)
    }

    /// Superlevel set `{density >= level}`: number of grid runs, and the
    /// interpolated endpoints of the first run.
    /// Maximal runs of grid points with density at least `level`, widened
    /// to the linearly interpolated crossings.
    fn superlevel(&self, level: f64) -> Vec<(f64, f64)> {
        let crossing = |i: usize| {
            let (f0, f1) = (self.density[i], self.density[i + 1]);
            let (g0, g1) = (self.grid[i], self.grid[i + 1]);
            if f1 == f0 {
                g0
            } else {
                g0 + (g1 - g0) * ((level - f0) / (f1 - f0)).clamp(0.0, 1.0)
            }
        };
        let mut runs = Vec::new();
        let mut start = None;
        for (i, &f) in self.density.iter().enumerate() {
            match (f >= level, start) {
                (true, None) => start = Some(if i == 0 { self.grid[0] } else { crossing(i - 1) }),
                (false, Some(lo)) => {
                    runs.push((lo, crossing(i - 1)));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(lo) = start {
            runs.push((lo, *self.grid.last().expect("grid is nonempty")));
        }
        runs
    }
}

struct RawGrid {
    grid: Vec<f64>,
    weights: Vec<f64>,
    log_mass: f64,
}

impl RawGrid {
    /// Smallest grid-aligned range outside of which the density is negligible.
    fn effective_support(&self) -> (f64, f64) {
        let floor = (-TAIL_LOG_DROP).exp();
        let last = self.grid.len() - 1;
        let first = self.weights.iter().position(|&w| w >= floor).unwrap_or(0);
        let end = self.weights.iter().rposition(|&w| w >= floor).unwrap_or(last);
        (self.grid[first.saturating_sub(1)], self.grid[(end + 1).min(last)])
    }
}

fn evaluate(
    d: &DensitySpec,
    stat: &SuffStat,
    model: &ModelSpec,
    lo: f64,
    hi: f64,
    points: usize,
) -> Result<RawGrid> {
    let step = (hi - lo) / (points - 1) as f64;
    let grid: Vec<f64> = (0..points)
        .map(|i| if i == points - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let mut logs = Vec::with_capacity(points);
    for (i, &t) in grid.iter().enumerate() {
        let v = d.log_density(t, stat, model);
        let interior = i > 0 && i < points - 1;
        if v.is_nan() || v == f64::INFINITY || (interior && v == f64::NEG_INFINITY) {
            return Err(Error::Numerical(format!(
                "density `{}` is not finite at theta={t} (log density {v})",
                d.label()
            )));
        }
        logs.push(v);
    }
    let log_scale = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !log_scale.is_finite() {
        return Err(Error::Numerical(format!(
            "density `{}` vanishes on the feasible set",
            d.label()
        )));
    }
    let weights: Vec<f64> = logs.iter().map(|&v| (v - log_scale).exp()).collect();
    let area: f64 = weights.windows(2).map(|w| 0.5 * (w[0] + w[1]) * step).sum();
    Ok(RawGrid {
        grid,
        weights,
        log_mass: log_scale + area.ln(),
    })
}

/// Normalize a density over the feasible set by trapezoidal quadrature,
/// doubling the grid from [`INITIAL_GRID`] until the total mass settles.
pub fn normalize(d: &DensitySpec, stat: &SuffStat, model: &ModelSpec) -> Result<DensityTable> {
    let fs = feasible_set(model, stat)?;
    if !fs.is_bounded() {
        return Err(Error::InvalidArgument(format!(
            "feasible set [{}, {}] is unbounded; gridded densities need a bounded support",
            fs.lo, fs.hi
        )));
    }
    let domain = model.domain();
    let nudge = |t: f64, toward: f64| {
        if domain.contains(t) {
            t
        } else {
            t + (toward - t).signum() * 1e-12 * t.abs().max(1.0)
        }
    };
    let (lo, hi) = (nudge(fs.lo, fs.hi), nudge(fs.hi, fs.lo));
    if !(hi > lo) {
        return Err(Error::Numerical(
            "feasible set is a single point; no density to normalize".into(),
        ));
    }

    let mut points = INITIAL_GRID;
    let first = evaluate(d, stat, model, lo, hi, points)?;
    let (lo, hi) = first.effective_support();
    let mut coarse = evaluate(d, stat, model, lo, hi, points)?;
    loop {
        if points >= MAX_GRID {
            return Err(Error::Numerical(format!(
                "density `{}` failed to normalize within {MAX_GRID} grid points",
                d.label()
            )));
        }
        points *= 2;
        let fine = evaluate(d, stat, model, lo, hi, points)?;
        let change = (fine.log_mass - coarse.log_mass).exp_m1().abs();
        if change < MASS_TOLERANCE {
            return Ok(finish(fine));
        }
        coarse = fine;
    }
}

fn finish(raw: RawGrid) -> DensityTable {
    let RawGrid { grid, weights, .. } = raw;
    let mut cumulative = Vec::with_capacity(grid.len());
    let mut acc = 0.0;
    cumulative.push(0.0);
    for i in 1..grid.len() {
        acc += 0.5 * (weights[i - 1] + weights[i]) * (grid[i] - grid[i - 1]);
        cumulative.push(acc);
    }
    let total = acc;
    let density = weights.iter().map(|w| w / total).collect();
    for c in cumulative.iter_mut() {
        *c /= total;
    }
    *cumulative.last_mut().expect("grid is nonempty") = 1.0;
    DensityTable {
        grid,
        density,
        cumulative,
    }
}

/// Interval from an already normalized table.
pub fn interval_from_table(
    table: &DensityTable,
    alpha: f64,
    kind: DensityIntervalKind,
) -> Result<DensityIntervalResult> {
    check_alpha(alpha)?;
    let (lo, hi) = match kind {
        DensityIntervalKind::EqualTailed => (
            table.quantile(0.5 * alpha),
            table.quantile(1.0 - 0.5 * alpha),
        ),
        DensityIntervalKind::HighestDensity => hpd(table, alpha)?,
    };
    Ok(DensityIntervalResult { lo, hi, alpha, kind })
}

fn hpd(table: &DensityTable, alpha: f64) -> Result<(f64, f64)> {
    let target = 1.0 - alpha;
    let peak = table.density.iter().copied().fold(0.0, f64::max);
    let mass_at = |level: f64| {
        let runs = table.superlevel(level);
        let mass: f64 = runs
            .iter()
            .map(|&(lo, hi)| table.mass_below(hi) - table.mass_below(lo))
            .sum();
        (runs, mass)
    };
    // mass decreases in the level
    let (mut low, mut high) = (0.0, peak);
    for _ in 0..200 {
        let mid = 0.5 * (low + high);
        if mid == low || mid == high {
            break;
        }
        if mass_at(mid).1 >= target {
            low = mid;
        } else {
            high = mid;
        }
    }
    let (runs, mass) = mass_at(low);
    if runs.is_empty() || (mass - target).abs() > INTERVAL_MASS_TOLERANCE {
        return Err(Error::Numerical(format!(
            "no density level encloses mass {target} (closest {mass}); the density may be flat"
        )));
    }
    if runs.len() > 1 {
        return Err(Error::Disconnected {
            level: low,
            components: runs.len(),
        });
    }
    Ok(runs[0])
}

pub fn interval(
    d: &DensitySpec,
    stat: &SuffStat,
    model: &ModelSpec,
    alpha: f64,
    kind: DensityIntervalKind,
) -> Result<DensityIntervalResult> {
    check_alpha(alpha)?;
    let table = normalize(d, stat, model)?;
    interval_from_table(&table, alpha, kind)
}

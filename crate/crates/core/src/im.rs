//! Predictive random sets, the localized plausibility function and its
//! inversion to plausibility intervals.
//!
//! For each candidate θ the localization point is θ itself, so
//! `pl_x(θ | h_θ) = F_{h_θ}((x₁ − a(θ)) / b(θ))` with `F` the conditional
//! distribution function from [`crate::association`].

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::association::{aux_at, Localization};
use crate::error::{check_alpha, Error, Result};
use crate::model::{feasible_set, ModelSpec, SuffStat};
use crate::roots;

/// Number of grid points used to bracket the superlevel set.
pub const SCAN_POINTS: usize = 1024;

/// Predictive random set for the scalar auxiliary `W ~ Unif(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PrsKind {
    /// `S = [W, 1]`; plausibility is `F` itself.
    #[serde(rename = "one-sided", alias = "one-sided-lower")]
    OneSidedLower,
    /// `S = {w : |w − ½| <= |W − ½|}`; plausibility is `1 − |2F − 1|`.
    #[serde(rename = "default", alias = "default-symmetric")]
    DefaultSymmetric,
}

impl PrsKind {
    /// Containment probability of a point whose auxiliary value is `f`.
    #[inline]
    pub fn plausibility_of(self, f: f64) -> f64 {
        match self {
            PrsKind::OneSidedLower => f,
            PrsKind::DefaultSymmetric => 1.0 - (2.0 * f - 1.0).abs(),
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            PrsKind::OneSidedLower => "one-sided",
            PrsKind::DefaultSymmetric => "default",
        }
    }
}

impl fmt::Display for PrsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PrsKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "one-sided" | "one-sided-lower" => Ok(PrsKind::OneSidedLower),
            "default" | "default-symmetric" => Ok(PrsKind::DefaultSymmetric),
            other => Err(Error::InvalidArgument(format!(
                "unknown predictive random set `{other}` (expected one-sided or default)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityResult {
    pub theta: f64,
    pub pl: f64,
    pub prs: PrsKind,
    /// Observed conditioning value at θ; `None` when θ is infeasible.
    pub h_used: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityInterval {
    pub lo: f64,
    pub hi: f64,
    pub alpha: f64,
    pub prs: PrsKind,
}

impl PlausibilityInterval {
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta <= self.hi
    }
}

/// `(F, h)` at θ localized at θ, or `None` if θ is incompatible with the data.
pub(crate) fn conditional_value(
    theta: f64,
    stat: &SuffStat,
    model: &ModelSpec,
) -> Result<Option<(f64, Option<f64>)>> {
    let (u1, u2) = match aux_at(stat, theta, model) {
        Ok(u) => u,
        Err(Error::Infeasible(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    let loc = Localization::at(model, theta)?;
    if u1 <= 0.0 {
        // x1 sits on the lower support edge: F(0) = 0.
        return Ok(Some((0.0, loc.eta_raw(u1, u2).ok())));
    }
    let h = loc.eta_raw(u1, u2)?;
    let cdf = loc.conditional_cdf(h, stat.n)?;
    Ok(Some((cdf.cdf(u1), Some(h))))
}

#[inline]
fn pl_value(theta: f64, stat: &SuffStat, model: &ModelSpec, prs: PrsKind) -> Result<f64> {
    Ok(conditional_value(theta, stat, model)?
        .map_or(0.0, |(f, _)| prs.plausibility_of(f)))
}

/// Pointwise plausibility `pl_x(θ | h_θ)`; zero outside the feasible set.
pub fn plausibility(
    theta: f64,
    stat: &SuffStat,
    model: &ModelSpec,
    prs: PrsKind,
) -> Result<PlausibilityResult> {
    let value = conditional_value(theta, stat, model)?;
    Ok(PlausibilityResult {
        theta,
        pl: value.map_or(0.0, |(f, _)| prs.plausibility_of(f)),
        prs,
        h_used: value.and_then(|(_, h)| h),
    })
}

pub fn plausibility_curve(
    stat: &SuffStat,
    model: &ModelSpec,
    prs: PrsKind,
    grid: &[f64],
) -> Result<Vec<PlausibilityResult>> {
    if grid.is_empty() {
        return Err(Error::InvalidArgument("plausibility grid is empty".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::InvalidArgument(
            "plausibility grid must be sorted".into(),
        ));
    }
    grid.iter()
        .map(|&t| plausibility(t, stat, model, prs))
        .collect()
}

/// Pull a feasible endpoint lying on an open domain edge just inside it.
fn inside_domain(theta: f64, model: &ModelSpec, toward: f64) -> f64 {
    let d = model.domain();
    if d.contains(theta) {
        return theta;
    }
    let nudged = theta + (toward - theta).signum() * 1e-12 * theta.abs().max(1.0);
    if d.contains(nudged) {
        nudged
    } else {
        theta
    }
}

/// Replace an infinite end of the scan range by the first point, marching
/// outward, where plausibility has dropped below `alpha`.
fn finite_scan_end(
    start: f64,
    edge: f64,
    alpha: f64,
    pl: &dyn Fn(f64) -> Result<f64>,
) -> Result<f64> {
    for p in roots::march(start, edge) {
        if pl(p)? < alpha {
            return Ok(p);
        }
    }
    Err(Error::Numerical(format!(
        "plausibility stays above {alpha} toward {edge}; interval is unbounded"
    )))
}

/// `{θ : pl_x(θ | h_θ) >= α}` as a single closed interval.
///
/// The feasible set is scanned at [`SCAN_POINTS`] points to bracket the level
/// crossings, which are then refined by bisection. A superlevel set with more
/// than one component is reported as [`Error::Disconnected`].
pub fn plausibility_interval(
    stat: &SuffStat,
    model: &ModelSpec,
    prs: PrsKind,
    alpha: f64,
) -> Result<PlausibilityInterval> {
    check_alpha(alpha)?;
    let fs = feasible_set(model, stat)?;
    let pl = |t: f64| pl_value(t, stat, model, prs);

    let (mut lo, mut hi) = (fs.lo, fs.hi);
    if lo.is_finite() && hi.is_finite() {
        lo = inside_domain(lo, model, hi);
        hi = inside_domain(hi, model, lo);
    } else if lo.is_finite() {
        lo = inside_domain(lo, model, f64::INFINITY);
        hi = finite_scan_end(lo, hi, alpha, &pl)?;
    } else if hi.is_finite() {
        hi = inside_domain(hi, model, f64::NEG_INFINITY);
        lo = finite_scan_end(hi, lo, alpha, &pl)?;
    } else {
        let mid = 0.5 * (stat.x1 + stat.x2);
        lo = finite_scan_end(mid, lo, alpha, &pl)?;
        hi = finite_scan_end(mid, hi, alpha, &pl)?;
    }

    let scale = lo.abs().max(hi.abs()).max(hi - lo);
    let tol = 1e-12 * scale;
    if hi <= lo {
        // Single feasible point.
        let value = pl(lo)?;
        if value >= alpha {
            return Ok(PlausibilityInterval { lo, hi: lo, alpha, prs });
        }
        return Err(Error::Numerical(format!(
            "plausibility {value} at the only feasible point is below {alpha}"
        )));
    }

    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<f64> = (0..SCAN_POINTS)
        .map(|i| if i == SCAN_POINTS - 1 { hi } else { lo + step * i as f64 })
        .collect();
    let values = grid.iter().map(|&t| pl(t)).collect::<Result<Vec<f64>>>()?;
    let above: Vec<bool> = values.iter().map(|&v| v >= alpha).collect();

    let mut runs: Vec<(usize, usize)> = Vec::new();
    for (i, &inside) in above.iter().enumerate() {
        if inside {
            match runs.last_mut() {
                Some((_, end)) if *end + 1 == i => *end = i,
                _ => runs.push((i, i)),
            }
        }
    }

    let at_level = |t: f64| pl(t).map(|v| v >= alpha).unwrap_or(false);

    let (first, last) = match runs.as_slice() {
        [(i, j)] => (*i, *j),
        [] => {
            let k = values
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(k, _)| k)
                .unwrap_or(0);
            let (a, b) = (grid[k.saturating_sub(1)], grid[(k + 1).min(SCAN_POINTS - 1)]);
            let (t_max, v_max) = golden_max(&|t| pl(t).unwrap_or(0.0), a, b);
            if v_max < alpha {
                return Err(Error::Numerical(format!(
                    "plausibility never reaches {alpha} (maximum {v_max})"
                )));
            }
            let left = roots::bisect_predicate(at_level, t_max, a, tol);
            let right = roots::bisect_predicate(at_level, t_max, b, tol);
            return Ok(PlausibilityInterval {
                lo: left,
                hi: right,
                alpha,
                prs,
            });
        }
        many => {
            return Err(Error::Disconnected {
                level: alpha,
                components: many.len(),
            })
        }
    };
    let left = if first == 0 {
        if fs.lo.is_finite() {
            fs.lo
        } else {
            grid[0]
        }
    } else {
        roots::bisect_predicate(at_level, grid[first], grid[first - 1], tol)
    };
    let right = if last == SCAN_POINTS - 1 {
        if fs.hi.is_finite() {
            fs.hi
        } else {
            grid[SCAN_POINTS - 1]
        }
    } else {
        roots::bisect_predicate(at_level, grid[last], grid[last + 1], tol)
    };
    Ok(PlausibilityInterval {
        lo: left,
        hi: right,
        alpha,
        prs,
    })
}

/// Golden-section search for the maximum of a unimodal function on `[a, b]`.
fn golden_max(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let ratio = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> (ModelSpec, SuffStat) {
        (
            ModelSpec::theta_theta_squared(),
            SuffStat::new(25, 281.1, 9689.7).unwrap(),
        )
    }

    #[test]
    fn infeasible_theta_has_zero_plausibility() {
        let (m, s) = example();
        for t in [300.0, 90.0, 0.5] {
            let r = plausibility(t, &s, &m, PrsKind::OneSidedLower).unwrap();
            assert_eq!(r.pl, 0.0);
            assert_eq!(r.h_used, None);
        }
        // 110 is feasible: 110 <= 281.1 and 110² >= 9689.7
        assert!(plausibility(110.0, &s, &m, PrsKind::OneSidedLower).unwrap().pl > 0.0);
    }

    #[test]
    fn example_endpoints_sit_at_the_alpha_line() {
        let (m, s) = example();
        let one = plausibility(104.48, &s, &m, PrsKind::OneSidedLower).unwrap();
        assert!((one.pl - 0.05).abs() < 2e-3, "pl = {}", one.pl);
        let two = plausibility(105.92, &s, &m, PrsKind::DefaultSymmetric).unwrap();
        assert!((two.pl - 0.05).abs() < 2e-3, "pl = {}", two.pl);
    }

    #[test]
    fn example_intervals() {
        let (m, s) = example();
        let one = plausibility_interval(&s, &m, PrsKind::OneSidedLower, 0.05).unwrap();
        assert!((one.lo - 98.44).abs() < 0.01 && (one.hi - 104.48).abs() < 0.01, "{one:?}");
        let two = plausibility_interval(&s, &m, PrsKind::DefaultSymmetric, 0.05).unwrap();
        assert!((two.lo - 98.49).abs() < 0.02 && (two.hi - 105.92).abs() < 0.02, "{two:?}");
    }

    #[test]
    fn curve_outside_feasible_set_is_zero() {
        let (m, s) = example();
        let grid: Vec<f64> = (0..10).map(|k| 300.0 + k as f64).collect();
        let c = plausibility_curve(&s, &m, PrsKind::DefaultSymmetric, &grid).unwrap();
        assert!(c.iter().all(|r| r.pl == 0.0));
        assert!(plausibility_curve(&s, &m, PrsKind::DefaultSymmetric, &[]).is_err());
        assert!(plausibility_curve(&s, &m, PrsKind::DefaultSymmetric, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn one_sided_curve_is_nonincreasing_and_default_peaks_at_one() {
        let (m, s) = example();
        let fs = feasible_set(&m, &s).unwrap();
        let grid: Vec<f64> = (0..=2000)
            .map(|k| fs.lo + (fs.hi - fs.lo) * k as f64 / 2000.0)
            .collect();
        let one = plausibility_curve(&s, &m, PrsKind::OneSidedLower, &grid).unwrap();
        assert!(one.windows(2).all(|w| w[1].pl <= w[0].pl + 1e-12));

        let fine: Vec<f64> = (0..=8000).map(|k| 98.0 + 8.0 * k as f64 / 8000.0).collect();
        let two = plausibility_curve(&s, &m, PrsKind::DefaultSymmetric, &fine).unwrap();
        let max = two.iter().map(|r| r.pl).fold(0.0, f64::max);
        assert!(max > 0.999, "max = {max}");
    }

    #[test]
    fn interval_endpoints_hit_alpha() {
        let (m, s) = example();
        for prs in [PrsKind::OneSidedLower, PrsKind::DefaultSymmetric] {
            let iv = plausibility_interval(&s, &m, prs, 0.1).unwrap();
            let fs = feasible_set(&m, &s).unwrap();
            for e in [iv.lo, iv.hi] {
                if e != fs.lo && e != fs.hi {
                    let v = plausibility(e, &s, &m, prs).unwrap().pl;
                    assert!((v - 0.1).abs() < 1e-6, "{prs}: pl({e}) = {v}");
                }
            }
        }
    }

    #[test]
    fn tiny_alpha_widens_the_interval() {
        let (m, s) = example();
        let fs = feasible_set(&m, &s).unwrap();
        let iv = plausibility_interval(&s, &m, PrsKind::OneSidedLower, 1e-12).unwrap();
        let usual = plausibility_interval(&s, &m, PrsKind::OneSidedLower, 0.05).unwrap();
        assert_eq!(iv.lo, fs.lo);
        assert!(iv.hi > usual.hi + 10.0 && iv.hi < fs.hi, "{iv:?} vs {fs:?}");
        let edge = plausibility(iv.hi, &s, &m, PrsKind::OneSidedLower).unwrap().pl;
        assert!((edge / 1e-12 - 1.0).abs() < 1e-3, "{edge}");
    }

    #[test]
    fn narrow_superlevel_set_is_found_between_grid_points() {
        let (m, s) = example();
        let iv = plausibility_interval(&s, &m, PrsKind::DefaultSymmetric, 0.9999).unwrap();
        assert!(iv.lo <= iv.hi);
        let mid = plausibility(0.5 * (iv.lo + iv.hi), &s, &m, PrsKind::DefaultSymmetric).unwrap();
        assert!(mid.pl >= 0.9999);
    }

    #[test]
    fn alpha_out_of_range() {
        let (m, s) = example();
        for a in [0.0, 1.0, -0.2, f64::NAN] {
            assert!(matches!(
                plausibility_interval(&s, &m, PrsKind::OneSidedLower, a),
                Err(Error::InvalidArgument(_))
            ));
        }
    }

    #[test]
    fn unbounded_feasible_set_scale_model() {
        // Unif(0, θ): F = (x2/θ)^n, so the one-sided interval is [x2, x2 α^{-1/n}].
        let m = ModelSpec::linear(0.0, 0.0, 0.0, 1.0).unwrap();
        let s = SuffStat::new(5, 0.3, 2.0).unwrap();
        let iv = plausibility_interval(&s, &m, PrsKind::OneSidedLower, 0.05).unwrap();
        assert_eq!(iv.lo, 2.0);
        let expected = 2.0 * 0.05f64.powf(-1.0 / 5.0);
        assert!((iv.hi - expected).abs() < 1e-9, "{} vs {expected}", iv.hi);
    }

    #[test]
    fn prs_parsing() {
        assert_eq!("one-sided".parse::<PrsKind>().unwrap(), PrsKind::OneSidedLower);
        assert_eq!("default".parse::<PrsKind>().unwrap(), PrsKind::DefaultSymmetric);
        assert!("both".parse::<PrsKind>().is_err());
    }
}

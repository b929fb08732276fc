//! The family `Unif(a(θ), a(θ) + b(θ))`, its sufficient statistic and the set
//! of parameter values compatible with observed data.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots;

type RealFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Open parameter interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lo: f64,
    pub hi: f64,
}

impl Domain {
    pub const REAL_LINE: Domain = Domain {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidArgument(format!(
                "parameter domain ({lo}, {hi}) is empty"
            )));
        }
        Ok(Domain { lo, hi })
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta > self.lo && theta < self.hi
    }

    /// A finite point well inside the domain.
    fn anchor(&self) -> f64 {
        match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => 0.5 * (self.lo + self.hi),
            (true, false) => self.lo + self.lo.abs().max(1.0),
            (false, true) => self.hi - self.hi.abs().max(1.0),
            (false, false) => 0.0,
        }
    }

    /// Deterministic probe points spread across the domain, in increasing order.
    pub fn sample_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = match (self.lo.is_finite(), self.hi.is_finite()) {
            (true, true) => (0..41)
                .map(|k| self.lo + (self.hi - self.lo) * (k as f64 + 0.5) / 41.0)
                .collect(),
            (true, false) => {
                let s = self.lo.abs().max(1.0);
                (-10..=30).map(|j| self.lo + s * 2f64.powi(j)).collect()
            }
            (false, true) => {
                let s = self.hi.abs().max(1.0);
                (-10..=30).map(|j| self.hi - s * 2f64.powi(j)).collect()
            }
            (false, false) => {
                let mut v = vec![0.0];
                for j in -5..=20 {
                    let p = 2f64.powi(j);
                    v.push(p);
                    v.push(-p);
                }
                v
            }
        };
        pts.retain(|&p| self.contains(p));
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Monotone {
    Increasing,
    Decreasing,
    Constant,
}

#[derive(Clone)]
enum Endpoints {
    LocationUnit,
    ThetaSquared,
    Linear { c0: f64, c1: f64, d0: f64, d1: f64 },
    Custom {
        a: Arc<RealFn>,
        b: Arc<RealFn>,
        a_prime: Arc<RealFn>,
        b_prime: Arc<RealFn>,
    },
}

/// A uniform family `Unif(a(θ), a(θ) + b(θ))` with user-supplied derivatives.
///
/// Construction validates `b > 0` and cross-checks the derivatives against
/// central finite differences at sampled domain points.
#[derive(Clone)]
pub struct ModelSpec {
    name: String,
    endpoints: Endpoints,
    domain: Domain,
    lower_trend: Option<Monotone>,
    upper_trend: Option<Monotone>,
}

impl fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ModelSpec")
            .field("name", &self.name)
            .field("domain", &self.domain)
            .finish_non_exhaustive()
    }
}

impl ModelSpec {
    /// `Unif(θ, θ + 1)` on the real line.
    pub fn location_unit() -> Self {
        Self::finish("location-unit", Endpoints::LocationUnit, Domain::REAL_LINE)
            .expect("builtin model is valid")
    }

    /// `Unif(θ, θ²)` for `θ > 1`.
    pub fn theta_theta_squared() -> Self {
        let domain = Domain {
            lo: 1.0,
            hi: f64::INFINITY,
        };
        Self::finish("theta-theta-squared", Endpoints::ThetaSquared, domain)
            .expect("builtin model is valid")
    }

    /// `a = c0 + c1 θ`, `b = d0 + d1 θ`, on the largest open interval where `b > 0`.
    pub fn linear(c0: f64, c1: f64, d0: f64, d1: f64) -> Result<Self> {
        let domain = if d1 > 0.0 {
            Domain::new(-d0 / d1, f64::INFINITY)?
        } else if d1 < 0.0 {
            Domain::new(f64::NEG_INFINITY, -d0 / d1)?
        } else if d0 > 0.0 {
            Domain::REAL_LINE
        } else {
            return Err(Error::InvalidModel(format!(
                "linear width {d0} + {d1}·θ is never positive"
            )));
        };
        Self::linear_on(c0, c1, d0, d1, domain)
    }

    /// Linear endpoints on an explicit domain; fails if `b <= 0` anywhere on it.
    pub fn linear_on(c0: f64, c1: f64, d0: f64, d1: f64, domain: Domain) -> Result<Self> {
        if ![c0, c1, d0, d1].iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidModel(
                "linear coefficients must be finite".into(),
            ));
        }
        // Rounding can leave b slightly negative at a boundary where it vanishes.
        let limit = |t: f64| {
            if t.is_finite() {
                let w = d0 + d1 * t;
                if w.abs() <= 1e-12 * (d0.abs() + (d1 * t).abs()) {
                    0.0
                } else {
                    w
                }
            } else if d1 == 0.0 {
                d0
            } else if (d1 > 0.0) == (t > 0.0) {
                f64::INFINITY
            } else {
                f64::NEG_INFINITY
            }
        };
        let (at_lo, at_hi) = (limit(domain.lo), limit(domain.hi));
        if at_lo < 0.0 || at_hi < 0.0 || (at_lo <= 0.0 && at_hi <= 0.0) {
            return Err(Error::InvalidModel(format!(
                "linear width {d0} + {d1}·θ is not positive on ({}, {})",
                domain.lo, domain.hi
            )));
        }
        Self::finish("linear", Endpoints::Linear { c0, c1, d0, d1 }, domain)
    }

    /// A user-defined family. Derivatives must be supplied in closed form.
    pub fn custom<A, B, AP, BP>(
        name: impl Into<String>,
        a: A,
        b: B,
        a_prime: AP,
        b_prime: BP,
        domain: Domain,
    ) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
        AP: Fn(f64) -> f64 + Send + Sync + 'static,
        BP: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let endpoints = Endpoints::Custom {
            a: Arc::new(a),
            b: Arc::new(b),
            a_prime: Arc::new(a_prime),
            b_prime: Arc::new(b_prime),
        };
        Self::finish(name.into(), endpoints, domain)
    }

    fn finish(name: impl Into<String>, endpoints: Endpoints, domain: Domain) -> Result<Self> {
        let mut model = ModelSpec {
            name: name.into(),
            endpoints,
            domain,
            lower_trend: None,
            upper_trend: None,
        };
        let pts = domain.sample_points();
        if pts.len() < 2 {
            return Err(Error::InvalidModel("parameter domain too narrow".into()));
        }
        for &t in &pts {
            let b = model.b(t);
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::InvalidModel(format!(
                    "{}: width b({t}) = {b} is not positive",
                    model.name
                )));
            }
            model.check_derivative(t, "a", |t| model.a(t), model.a_prime(t))?;
            model.check_derivative(t, "b", |t| model.b(t), model.b_prime(t))?;
        }
        model.lower_trend = trend(pts.iter().map(|&t| model.a(t)));
        model.upper_trend = trend(pts.iter().map(|&t| model.upper(t)));
        Ok(model)
    }

    fn check_derivative(
        &self,
        t: f64,
        which: &str,
        f: impl Fn(f64) -> f64,
        claimed: f64,
    ) -> Result<()> {
        let mut step = 1e-5 * t.abs().max(1.0);
        for edge in [self.domain.lo, self.domain.hi] {
            if edge.is_finite() {
                step = step.min(0.5 * (t - edge).abs());
            }
        }
        let fd = (f(t + step) - f(t - step)) / (2.0 * step);
        let tol = 1e-6 * claimed.abs().max(fd.abs()).max(1.0);
        if !claimed.is_finite() || (fd - claimed).abs() > tol {
            return Err(Error::InvalidModel(format!(
                "{}: {which}'({t}) = {claimed} disagrees with finite difference {fd}",
                self.name
            )));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    #[inline]
    pub fn a(&self, t: f64) -> f64 {
        match &self.endpoints {
            Endpoints::LocationUnit | Endpoints::ThetaSquared => t,
            Endpoints::Linear { c0, c1, .. } => c0 + c1 * t,
            Endpoints::Custom { a, .. } => a(t),
        }
    }

    #[inline]
    pub fn b(&self, t: f64) -> f64 {
        match &self.endpoints {
            Endpoints::LocationUnit => 1.0,
            Endpoints::ThetaSquared => t * t - t,
            Endpoints::Linear { d0, d1, .. } => d0 + d1 * t,
            Endpoints::Custom { b, .. } => b(t),
        }
    }

    #[inline]
    pub fn a_prime(&self, t: f64) -> f64 {
        match &self.endpoints {
            Endpoints::LocationUnit | Endpoints::ThetaSquared => 1.0,
            Endpoints::Linear { c1, .. } => *c1,
            Endpoints::Custom { a_prime, .. } => a_prime(t),
        }
    }

    #[inline]
    pub fn b_prime(&self, t: f64) -> f64 {
        match &self.endpoints {
            Endpoints::LocationUnit => 0.0,
            Endpoints::ThetaSquared => 2.0 * t - 1.0,
            Endpoints::Linear { d1, .. } => *d1,
            Endpoints::Custom { b_prime, .. } => b_prime(t),
        }
    }

    /// Upper support endpoint `a(θ) + b(θ)`.
    #[inline]
    pub fn upper(&self, t: f64) -> f64 {
        match &self.endpoints {
            Endpoints::ThetaSquared => t * t,
            _ => self.a(t) + self.b(t),
        }
    }

    /// True when `(a, b)` are linear in θ, so the conditioning statistic does
    /// not depend on the localization point.
    pub fn is_linear(&self) -> bool {
        matches!(
            self.endpoints,
            Endpoints::LocationUnit | Endpoints::Linear { .. }
        )
    }
}

fn trend(values: impl Iterator<Item = f64>) -> Option<Monotone> {
    let values: Vec<f64> = values.collect();
    let mut up = false;
    let mut down = false;
    for w in values.windows(2) {
        if w[1] > w[0] {
            up = true;
        } else if w[1] < w[0] {
            down = true;
        }
    }
    match (up, down) {
        (true, true) => None,
        (true, false) => Some(Monotone::Increasing),
        (false, true) => Some(Monotone::Decreasing),
        (false, false) => Some(Monotone::Constant),
    }
}

/// Look up a builtin family by name. `linear` takes four coefficients
/// `c0, c1, d0, d1`; the other families take none.
pub fn make_builtin(name: &str, coefficients: &[f64]) -> Result<ModelSpec> {
    let no_coef = || {
        if coefficients.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "model `{name}` takes no coefficients"
            )))
        }
    };
    match name {
        "location-unit" => no_coef().map(|_| ModelSpec::location_unit()),
        "theta-theta-squared" => no_coef().map(|_| ModelSpec::theta_theta_squared()),
        "linear" => match coefficients {
            &[c0, c1, d0, d1] => ModelSpec::linear(c0, c1, d0, d1),
            _ => Err(Error::InvalidArgument(format!(
                "model `linear` needs 4 coefficients (c0,c1,d0,d1), got {}",
                coefficients.len()
            ))),
        },
        other => Err(Error::UnknownModel(other.to_string())),
    }
}

/// Minimal sufficient statistic: sample size, minimum and maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuffStat {
    pub n: usize,
    pub x1: f64,
    pub x2: f64,
}

impl SuffStat {
    pub fn new(n: usize, x1: f64, x2: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 observations, got {n}"
            )));
        }
        if !x1.is_finite() || !x2.is_finite() {
            return Err(Error::InvalidArgument(
                "sample minimum and maximum must be finite".into(),
            ));
        }
        if x1 > x2 {
            return Err(Error::InvalidArgument(format!(
                "sample minimum {x1} exceeds maximum {x2}"
            )));
        }
        Ok(SuffStat { n, x1, x2 })
    }
}

/// Reduce a raw sample to `(n, min, max)`.
pub fn reduce(sample: &[f64]) -> Result<SuffStat> {
    if sample.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 observations, got {}",
            sample.len()
        )));
    }
    if let Some(bad) = sample.iter().find(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "non-finite observation {bad}"
        )));
    }
    let (lo, hi) = sample
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| {
            (lo.min(x), hi.max(x))
        });
    SuffStat::new(sample.len(), lo, hi)
}

/// Closed interval `[lo, hi]` of parameter values consistent with the data.
/// `lo > hi` encodes the empty set. Endpoints may sit on an (open) domain
/// edge or be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub lo: f64,
    pub hi: f64,
}

impl FeasibleSet {
    pub const EMPTY: FeasibleSet = FeasibleSet {
        lo: f64::INFINITY,
        hi: f64::NEG_INFINITY,
    };

    pub fn is_empty(&self) -> bool {
        !(self.lo <= self.hi)
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.lo && theta <= self.hi
    }

    pub fn width(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.hi - self.lo
        }
    }
}

/// Part of the domain where a monotone predicate holds.
fn satisfied_part<P>(pred: P, holds_on_left: bool, domain: Domain) -> Option<(f64, f64)>
where
    P: Fn(f64) -> bool,
{
    let anchor = domain.anchor();
    // `toward_fail` is the edge where the predicate eventually fails.
    let (toward_fail, toward_hold) = if holds_on_left {
        (domain.hi, domain.lo)
    } else {
        (domain.lo, domain.hi)
    };
    let boundary = if pred(anchor) {
        let mut inside = anchor;
        let mut found = None;
        for p in roots::march(anchor, toward_fail) {
            if pred(p) {
                inside = p;
            } else {
                found = Some(roots::bisect_predicate(&pred, inside, p, 0.0));
                break;
            }
        }
        found.unwrap_or(toward_fail)
    } else {
        let mut outside = anchor;
        let mut found = None;
        for p in roots::march(anchor, toward_hold) {
            if pred(p) {
                found = Some(roots::bisect_predicate(&pred, p, outside, 0.0));
                break;
            }
            outside = p;
        }
        found?
    };
    Some(if holds_on_left {
        (domain.lo, boundary)
    } else {
        (boundary, domain.hi)
    })
}

/// Maximal interval of θ with `a(θ) <= x1` and `a(θ) + b(θ) >= x2`.
///
/// Requires `a` and `a + b` to be monotone on the domain (checked by sampling
/// at construction). Boundaries are located by bisection to full `f64`
/// precision.
pub fn feasible_set(model: &ModelSpec, stat: &SuffStat) -> Result<FeasibleSet> {
    let lower = model.lower_trend.ok_or(Error::NonMonotone("a"))?;
    let upper = model.upper_trend.ok_or(Error::NonMonotone("a + b"))?;
    let domain = model.domain;
    let (x1, x2) = (stat.x1, stat.x2);

    let below_min = |t: f64| model.a(t) <= x1;
    let covers_max = |t: f64| model.upper(t) >= x2;

    let part = |pred: &dyn Fn(f64) -> bool, trend: Monotone, holds_left_if_increasing: bool| {
        match trend {
            Monotone::Constant => pred(domain.anchor()).then_some((domain.lo, domain.hi)),
            Monotone::Increasing => satisfied_part(pred, holds_left_if_increasing, domain),
            Monotone::Decreasing => satisfied_part(pred, !holds_left_if_increasing, domain),
        }
    };
    let first = part(&below_min, lower, true);
    let second = part(&covers_max, upper, false);
    let set = match (first, second) {
        (Some((l1, h1)), Some((l2, h2))) => FeasibleSet {
            lo: l1.max(l2),
            hi: h1.min(h2),
        },
        _ => FeasibleSet::EMPTY,
    };
    if set.is_empty() {
        return Err(Error::Infeasible(format!(
            "no parameter of `{}` has support containing [{x1}, {x2}]",
            model.name
        )));
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_theta_squared_values() {
        let m = make_builtin("theta-theta-squared", &[]).unwrap();
        assert_eq!(m.a(100.0), 100.0);
        assert_eq!(m.b(100.0), 9900.0);
        assert_eq!(m.a_prime(100.0), 1.0);
        assert_eq!(m.b_prime(100.0), 199.0);
    }

    #[test]
    fn builtin_location_and_scale_derivatives() {
        let loc = make_builtin("location-unit", &[]).unwrap();
        for t in [-3.0, 0.0, 7.5] {
            assert_eq!(loc.a_prime(t), 1.0);
            assert_eq!(loc.b_prime(t), 0.0);
        }
        let scale = make_builtin("linear", &[0.0, 0.0, 0.0, 1.0]).unwrap();
        assert_eq!(scale.a_prime(2.0), 0.0);
        assert_eq!(scale.b_prime(2.0), 1.0);
        assert_eq!(scale.domain().lo, 0.0);
    }

    #[test]
    fn linear_domain_survives_rounding_at_its_edge() {
        let m = ModelSpec::linear(0.0, 0.0, 1.8714859092860596, 0.4607822365281169).unwrap();
        assert!(m.b(m.domain().lo + 1e-9) > 0.0);
    }

    #[test]
    fn builtin_errors() {
        assert!(matches!(
            make_builtin("cauchy", &[]),
            Err(Error::UnknownModel(_))
        ));
        assert!(matches!(
            make_builtin("linear", &[0.0, 1.0, -1.0, 0.0]),
            Err(Error::InvalidModel(_))
        ));
        assert!(make_builtin("linear", &[1.0]).is_err());
        let bad = ModelSpec::linear_on(0.0, 1.0, 1.0, 1.0, Domain::new(-5.0, 5.0).unwrap());
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
    }

    #[test]
    fn custom_model_rejects_wrong_derivative() {
        let d = Domain::new(1.0, f64::INFINITY).unwrap();
        let bad = ModelSpec::custom("typo", |t| t, |t| t * t - t, |_| 1.0, |t| 2.0 * t, d);
        assert!(matches!(bad, Err(Error::InvalidModel(_))));
        let good = ModelSpec::custom("ok", |t| t, |t| t * t - t, |_| 1.0, |t| 2.0 * t - 1.0, d);
        assert!(good.is_ok());
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(
            reduce(&[3.0, 1.0, 2.0]).unwrap(),
            SuffStat { n: 3, x1: 1.0, x2: 3.0 }
        );
        assert_eq!(
            reduce(&[5.0, 5.0]).unwrap(),
            SuffStat { n: 2, x1: 5.0, x2: 5.0 }
        );
        assert!(reduce(&[1.0]).is_err());
        assert!(reduce(&[1.0, f64::NAN]).is_err());
        assert!(SuffStat::new(1, 0.0, 0.0).is_err());
        assert!(SuffStat::new(3, 2.0, 1.0).is_err());
    }

    #[test]
    fn feasible_theta_squared_example_data() {
        let m = ModelSpec::theta_theta_squared();
        let s = SuffStat::new(25, 281.1, 9689.7).unwrap();
        let f = feasible_set(&m, &s).unwrap();
        assert!((f.lo - 9689.7f64.sqrt()).abs() < 1e-10);
        assert!((f.hi - 281.1).abs() < 1e-10);
        assert!((f.lo - 98.4363).abs() < 1e-4);
    }

    #[test]
    fn feasible_location_examples() {
        let m = ModelSpec::location_unit();
        let f = feasible_set(&m, &SuffStat::new(4, 0.2, 0.9).unwrap()).unwrap();
        assert!((f.lo + 0.1).abs() < 1e-12 && (f.hi - 0.2).abs() < 1e-12);
        let empty = feasible_set(&m, &SuffStat::new(4, 0.0, 1.5).unwrap());
        assert!(matches!(empty, Err(Error::Infeasible(_))));
    }

    #[test]
    fn feasible_scale_is_unbounded_above() {
        let m = ModelSpec::linear(0.0, 0.0, 0.0, 1.0).unwrap();
        let f = feasible_set(&m, &SuffStat::new(3, 0.5, 2.0).unwrap()).unwrap();
        assert_eq!(f.lo, 2.0);
        assert_eq!(f.hi, f64::INFINITY);
        assert!(!f.is_bounded());
        // Negative data lie below every support.
        let none = feasible_set(&m, &SuffStat::new(3, -0.5, 2.0).unwrap());
        assert!(none.is_err());
    }

    #[test]
    fn feasible_rejects_non_monotone() {
        let d = Domain::REAL_LINE;
        let m = ModelSpec::custom("bowl", |t| t * t, |_| 1.0, |t| 2.0 * t, |_| 0.0, d).unwrap();
        let r = feasible_set(&m, &SuffStat::new(3, 1.0, 1.5).unwrap());
        assert!(matches!(r, Err(Error::NonMonotone(_))));
    }

    #[test]
    fn feasible_decreasing_endpoints() {
        // Unif(-θ, -θ + 2): a decreasing, a + b decreasing.
        let m = ModelSpec::linear(0.0, -1.0, 2.0, 0.0).unwrap();
        let f = feasible_set(&m, &SuffStat::new(3, 0.5, 1.0).unwrap()).unwrap();
        // -θ <= 0.5 and 2 - θ >= 1  =>  θ in [-0.5, 1]
        assert!((f.lo + 0.5).abs() < 1e-12 && (f.hi - 1.0).abs() < 1e-12);
    }

    #[test]
    fn empty_set_is_representable() {
        assert!(FeasibleSet::EMPTY.is_empty());
        assert_eq!(FeasibleSet::EMPTY.width(), 0.0);
    }
}

//! Closed forms for `Unif(θ, θ + 1)`.
//!
//! Conditioning on `H(x) = x₂ − x₁ = h` leaves `T(x) = x₁ = θ + (1 − h) W`
//! with `W ~ Unif(0, 1)`. These formulas double as an analytic check on the
//! general machinery in [`crate::im`].

use serde::{Deserialize, Serialize};

use crate::error::{check_alpha, Error, Result};
use crate::interval::Interval;
use crate::model::SuffStat;

/// `(T, H) = (x₁, x₂ − x₁)` for the unit-width location model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocationStat {
    pub t: f64,
    pub h: f64,
}

impl LocationStat {
    pub fn new(t: f64, h: f64) -> Result<Self> {
        if !t.is_finite() || !(0.0..1.0).contains(&h) {
            return Err(Error::InvalidArgument(format!(
                "location statistic needs finite t and 0 <= h < 1, got t={t}, h={h}"
            )));
        }
        Ok(LocationStat { t, h })
    }

    pub fn from_stat(stat: &SuffStat) -> Result<Self> {
        Self::new(stat.x1, stat.x2 - stat.x1)
    }
}

/// `1 − |2(t − θ)/(1 − h) − 1|`, clipped to zero outside `[t − (1 − h), t]`.
pub fn loc_plausibility(theta: f64, s: LocationStat) -> f64 {
    let z = (s.t - theta) / (1.0 - s.h);
    (1.0 - (2.0 * z - 1.0).abs()).max(0.0)
}

/// `[t − (1 − h)(1 − α/2), t − (1 − h) α/2]`.
pub fn loc_interval(s: LocationStat, alpha: f64) -> Result<Interval> {
    check_alpha(alpha)?;
    let w = 1.0 - s.h;
    Ok(Interval::new(
        s.t - w * (1.0 - 0.5 * alpha),
        s.t - w * (0.5 * alpha),
    ))
}

/// Equal-tailed credible interval of the flat-prior posterior
/// `θ | X ~ Unif(x₂ − 1, x₁)`.
pub fn loc_bayes_posterior_interval(s: LocationStat, alpha: f64) -> Result<Interval> {
    check_alpha(alpha)?;
    let (lower, upper) = (s.t + s.h - 1.0, s.t);
    let quantile = |p: f64| lower + (upper - lower) * p;
    Ok(Interval::new(quantile(0.5 * alpha), quantile(1.0 - 0.5 * alpha)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn plausibility_examples() {
        let s = LocationStat::new(0.2, 0.7).unwrap();
        assert!((loc_plausibility(0.2 - 0.15, s) - 1.0).abs() < 1e-15);
        assert_eq!(loc_plausibility(0.2, s), 0.0);
        assert!((loc_plausibility(0.05, s) - 1.0).abs() < 1e-12);
        assert_eq!(loc_plausibility(0.5, s), 0.0);
        assert_eq!(loc_plausibility(-0.4, s), 0.0);
    }

    #[test]
    fn interval_examples() {
        let s = LocationStat::new(0.2, 0.7).unwrap();
        let iv = loc_interval(s, 0.05).unwrap();
        assert!((iv.lo + 0.0925).abs() < 1e-12 && (iv.hi - 0.1925).abs() < 1e-12);
        let narrow = loc_interval(s, 1.0 - 1e-9).unwrap();
        assert!((narrow.lo - 0.05).abs() < 1e-9 && (narrow.hi - 0.05).abs() < 1e-9);
        let half = loc_interval(s, 0.5).unwrap();
        assert!((half.length() - 0.15).abs() < 1e-12);
        assert!(loc_interval(s, 1.0).is_err());
    }

    #[test]
    fn bayes_examples() {
        let s = LocationStat::new(0.2, 0.7).unwrap();
        let iv = loc_bayes_posterior_interval(s, 0.05).unwrap();
        assert!((iv.lo + 0.0925).abs() < 1e-12 && (iv.hi - 0.1925).abs() < 1e-12);
        let edge = LocationStat::new(0.2, 1.0 - 1e-12).unwrap();
        let iv = loc_bayes_posterior_interval(edge, 0.05).unwrap();
        assert!((iv.lo - 0.2).abs() < 1e-11 && (iv.hi - 0.2).abs() < 1e-11);
    }

    #[test]
    fn h_of_one_is_rejected() {
        assert!(LocationStat::new(0.0, 1.0).is_err());
        assert!(LocationStat::new(0.0, -0.1).is_err());
    }

    proptest! {
        #[test]
        fn bayes_equals_plausibility_interval(
            t in -50.0f64..50.0, h in 0.0f64..0.999, alpha in 0.001f64..0.999
        ) {
            let s = LocationStat::new(t, h).unwrap();
            let a = loc_interval(s, alpha).unwrap();
            let b = loc_bayes_posterior_interval(s, alpha).unwrap();
            prop_assert!((a.lo - b.lo).abs() < 1e-12 && (a.hi - b.hi).abs() < 1e-12);
            prop_assert!((a.length() - (1.0 - h) * (1.0 - alpha)).abs() < 1e-12);
        }
    }
}

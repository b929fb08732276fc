//! Conditioning machinery for `X_i = b(θ) U_i + a(θ)`.
//!
//! At a localization point θ₀ the feature
//! `η(u) = log{(b'(θ₀) u₁ + a'(θ₀)) / (b'(θ₀) u₂ + a'(θ₀))}` of the auxiliary
//! pair `U = (U₁, U₂)` (minimum and maximum of `n` standard uniforms) is
//! locally insensitive to θ, so its observed value is conditioned on. The
//! remaining scalar `τ(U) = U₁` then has the closed-form conditional law
//! [`ConditionalCdf`].
//!
//! When `b'(θ₀)` vanishes relative to `a'(θ₀)` the log-ratio degenerates and
//! the location solution `η(u) = u₂ − u₁` is used instead, with
//! `U₁ | η = h ~ Unif(0, 1 − h)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelSpec, SuffStat};

/// Relative size of `b'(θ₀)` below which the location form is used.
const LOCATION_THRESHOLD: f64 = 1e-12;

/// Slack allowed when checking that data lie inside a support.
pub(crate) const SUPPORT_SLACK: f64 = 1e-12;

/// Joint minimum/maximum of `n` standard uniforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuxPair {
    pub u1: f64,
    pub u2: f64,
}

impl AuxPair {
    pub fn new(u1: f64, u2: f64) -> Result<Self> {
        if !(u1 > 0.0 && u1 <= u2 && u2 < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "auxiliary pair ({u1}, {u2}) must satisfy 0 < u1 <= u2 < 1"
            )));
        }
        Ok(AuxPair { u1, u2 })
    }
}

/// Which solution of the conditioning equation is in force.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Conditioning {
    /// `η = log{(b' u₁ + a') / (b' u₂ + a')}`.
    LogRatio,
    /// `η = u₂ − u₁` (location case, `b' = 0`).
    Difference,
}

/// The conditioning solution anchored at θ₀.
///
/// `a'(θ₀)` and `b'(θ₀)` only enter through their ratio, so they are stored
/// with a common sign flip that makes `a' + b' u > 0` on `(0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Localization {
    theta0: f64,
    ap: f64,
    bp: f64,
    form: Conditioning,
}

impl Localization {
    pub fn at(model: &ModelSpec, theta0: f64) -> Result<Self> {
        Self::from_derivatives(theta0, model.a_prime(theta0), model.b_prime(theta0))
    }

    pub fn from_derivatives(theta0: f64, a_prime: f64, b_prime: f64) -> Result<Self> {
        let fail = |reason: String| Err(Error::Localization { theta0, reason });
        if !a_prime.is_finite() || !b_prime.is_finite() {
            return fail(format!("non-finite derivatives a'={a_prime}, b'={b_prime}"));
        }
        if a_prime == 0.0 && b_prime == 0.0 {
            return fail("a' and b' both vanish".into());
        }
        let (mut ap, mut bp) = (a_prime, b_prime);
        if ap < 0.0 || (ap == 0.0 && bp < 0.0) {
            ap = -ap;
            bp = -bp;
        }
        if bp.abs() < LOCATION_THRESHOLD * ap {
            return Ok(Localization {
                theta0,
                ap,
                bp: 0.0,
                form: Conditioning::Difference,
            });
        }
        if !(ap + bp > 0.0) {
            return fail(format!(
                "b'·u + a' changes sign on (0, 1] (a'={a_prime}, b'={b_prime})"
            ));
        }
        Ok(Localization {
            theta0,
            ap,
            bp,
            form: Conditioning::LogRatio,
        })
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn form(&self) -> Conditioning {
        self.form
    }

    /// `a'/b'` with the canonical sign.
    fn ratio(&self) -> f64 {
        self.ap / self.bp
    }

    /// The conditioning feature `η_{θ₀}(u)` on raw coordinates.
    pub fn eta_raw(&self, u1: f64, u2: f64) -> Result<f64> {
        match self.form {
            Conditioning::Difference => Ok(u2 - u1),
            Conditioning::LogRatio => {
                let (g1, g2) = (self.ap + self.bp * u1, self.ap + self.bp * u2);
                if !(g1 > 0.0 && g2 > 0.0) {
                    return Err(Error::Localization {
                        theta0: self.theta0,
                        reason: format!("log argument b'·u + a' is not positive at u=({u1}, {u2})"),
                    });
                }
                if self.ap > 0.0 {
                    let k = self.bp / self.ap;
                    Ok((k * u1).ln_1p() - (k * u2).ln_1p())
                } else {
                    Ok(u1.ln() - u2.ln())
                }
            }
        }
    }

    /// `u ↦ (τ(u), η(u)) = (u₁, η(u))`.
    pub fn forward(&self, u: AuxPair) -> Result<(f64, f64)> {
        Ok((u.u1, self.eta_raw(u.u1, u.u2)?))
    }

    /// Inverse of [`forward`](Self::forward): recovers `u₂` from `(v₁, v₂)`.
    pub fn inverse_u2(&self, v1: f64, v2: f64) -> f64 {
        match self.form {
            Conditioning::Difference => v1 + v2,
            Conditioning::LogRatio => {
                let e = (-v2).exp();
                if self.ap > 0.0 {
                    self.ratio() * (-v2).exp_m1() + e * v1
                } else {
                    e * v1
                }
            }
        }
    }

    /// Conditional law of `U₁` given `η(U) = h` for sample size `n`.
    pub fn conditional_cdf(&self, h: f64, n: usize) -> Result<ConditionalCdf> {
        ConditionalCdf::new(*self, h, n)
    }
}

/// Auxiliary coordinates solving the baseline association at θ, clamped to
/// `[0, 1]`. Fails if the data fall outside the support beyond rounding slack.
pub(crate) fn aux_at(stat: &SuffStat, theta: f64, model: &ModelSpec) -> Result<(f64, f64)> {
    if !model.domain().contains(theta) {
        return Err(Error::Infeasible(format!(
            "theta={theta} lies outside the parameter domain"
        )));
    }
    let (a, b) = (model.a(theta), model.b(theta));
    let u1 = (stat.x1 - a) / b;
    let u2 = (stat.x2 - a) / b;
    if !(u1 >= -SUPPORT_SLACK && u2 <= 1.0 + SUPPORT_SLACK) {
        return Err(Error::Infeasible(format!(
            "data [{}, {}] not inside support [{a}, {}] at theta={theta}",
            stat.x1,
            stat.x2,
            a + b
        )));
    }
    Ok((u1.clamp(0.0, 1.0), u2.clamp(0.0, 1.0)))
}

/// `η_{θ₀}(u)`.
pub fn eta(u: AuxPair, theta0: f64, model: &ModelSpec) -> Result<f64> {
    Localization::at(model, theta0)?.eta_raw(u.u1, u.u2)
}

/// Observed conditioning value `H_{θ₀}(x) = η_{θ₀}(u_{x,θ₀})`.
pub fn h_obs(stat: &SuffStat, theta0: f64, model: &ModelSpec) -> Result<f64> {
    let (u1, u2) = aux_at(stat, theta0, model)?;
    Localization::at(model, theta0)?.eta_raw(u1, u2)
}

/// Maps `u → (τ(u), η(u)) → u`; an identity up to rounding.
pub fn aux_bijection_roundtrip(u: AuxPair, theta0: f64, model: &ModelSpec) -> Result<AuxPair> {
    let loc = Localization::at(model, theta0)?;
    let (v1, v2) = loc.forward(u)?;
    Ok(AuxPair {
        u1: v1,
        u2: loc.inverse_u2(v1, v2),
    })
}

/// Distribution function of `V₁ = U₁` given `η_{θ₀}(U) = h`:
///
/// `F_h(v) = [{a' + b' v}ⁿ − a'ⁿ] / [{(a' + b') eʰ}ⁿ − a'ⁿ]` on
/// `0 <= v <= (1 + a'/b') eʰ − a'/b'`.
///
/// Powers are evaluated as exponentials of `n · log1p(·)` differences so that
/// neither large `n` nor a near-location ratio `a'/b'` loses precision.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalCdf {
    theta0: f64,
    h: f64,
    n: usize,
    ap: f64,
    bp: f64,
    v1_max: f64,
    form: Conditioning,
    /// `log{(a' + b') eʰ / a'}` when `a' > 0`.
    r_max: f64,
}

impl ConditionalCdf {
    pub fn new(loc: Localization, h: f64, n: usize) -> Result<Self> {
        let theta0 = loc.theta0;
        let degenerate = |reason: String| Err(Error::Numerical(format!(
            "conditional distribution at theta0={theta0}, h={h}: {reason}"
        )));
        if n < 1 {
            return Err(Error::InvalidArgument("sample size must be positive".into()));
        }
        if !h.is_finite() {
            return degenerate("non-finite conditioning value".into());
        }
        let mut cdf = ConditionalCdf {
            theta0,
            h,
            n,
            ap: loc.ap,
            bp: loc.bp,
            v1_max: 0.0,
            form: loc.form,
            r_max: f64::NAN,
        };
        match loc.form {
            Conditioning::Difference => {
                if !(0.0..1.0).contains(&h) {
                    return degenerate("location conditioning value must lie in [0, 1)".into());
                }
                cdf.v1_max = 1.0 - h;
            }
            Conditioning::LogRatio => {
                // u1 <= u2 forces h <= 0 for increasing b'u + a', h >= 0 otherwise.
                let increasing = loc.bp > 0.0;
                let clamped = if increasing { h.min(0.0) } else { h.max(0.0) };
                if (h - clamped).abs() > SUPPORT_SLACK {
                    return degenerate("conditioning value has the wrong sign".into());
                }
                cdf.h = clamped;
                let h = clamped;
                if loc.ap > 0.0 {
                    cdf.r_max = (loc.bp / loc.ap).ln_1p() + h;
                    cdf.v1_max = h.exp() + loc.ratio() * h.exp_m1();
                    let denominator_ok = if increasing {
                        cdf.r_max > 0.0
                    } else {
                        cdf.r_max < 0.0
                    };
                    if !denominator_ok || !(cdf.v1_max > 0.0) {
                        return degenerate("normalizing denominator is not positive".into());
                    }
                } else {
                    cdf.v1_max = h.exp();
                }
            }
        }
        Ok(cdf)
    }

    /// Build the conditional law localized at θ₀ from observed data.
    pub fn from_data(stat: &SuffStat, theta0: f64, model: &ModelSpec) -> Result<Self> {
        let loc = Localization::at(model, theta0)?;
        let (u1, u2) = aux_at(stat, theta0, model)?;
        let h = loc.eta_raw(u1, u2)?;
        Self::new(loc, h, stat.n)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }
    pub fn h(&self) -> f64 {
        self.h
    }
    pub fn n(&self) -> usize {
        self.n
    }
    /// `a'(θ₀)`, up to the sign shared with [`bp`](Self::bp).
    pub fn ap(&self) -> f64 {
        self.ap
    }
    pub fn bp(&self) -> f64 {
        self.bp
    }
    pub fn v1_max(&self) -> f64 {
        self.v1_max
    }
    pub fn form(&self) -> Conditioning {
        self.form
    }

    pub fn cdf(&self, v1: f64) -> f64 {
        if !(v1 > 0.0) {
            return 0.0;
        }
        if v1 >= self.v1_max {
            return 1.0;
        }
        let n = self.n as f64;
        let f = match self.form {
            Conditioning::Difference => v1 / self.v1_max,
            Conditioning::LogRatio if self.ap == 0.0 => (n * (v1.ln() - self.h)).exp(),
            Conditioning::LogRatio => {
                let r = (self.bp / self.ap * v1).ln_1p();
                if self.bp > 0.0 {
                    (n * (r - self.r_max)).exp() * (-n * r).exp_m1() / (-n * self.r_max).exp_m1()
                } else {
                    (n * r).exp_m1() / (n * self.r_max).exp_m1()
                }
            }
        };
        f.clamp(0.0, 1.0)
    }

    pub fn cdf_inverse(&self, w: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::InvalidArgument(format!(
                "probability {w} outside [0, 1]"
            )));
        }
        if w == 0.0 {
            return Ok(0.0);
        }
        if w == 1.0 {
            return Ok(self.v1_max);
        }
        let n = self.n as f64;
        let v = match self.form {
            Conditioning::Difference => w * self.v1_max,
            Conditioning::LogRatio if self.ap == 0.0 => (self.h + w.ln() / n).exp(),
            Conditioning::LogRatio => {
                let r = if self.bp > 0.0 {
                    self.r_max + ((1.0 - w) * (-n * self.r_max).exp_m1()).ln_1p() / n
                } else {
                    (w * (n * self.r_max).exp_m1()).ln_1p() / n
                };
                self.ap / self.bp * r.exp_m1()
            }
        };
        Ok(v.clamp(0.0, self.v1_max))
    }
}

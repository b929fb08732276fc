//! Exact, prior-free plausibility inference for uniform models whose support
//! depends on the parameter, `Unif(a(θ), a(θ) + b(θ))`.
//!
//! The data are reduced to `(n, min, max)`. At each candidate θ the feature of
//! the auxiliary pair that does not move with θ is conditioned on, leaving a
//! scalar auxiliary with a closed-form distribution function `F`. The
//! plausibility of θ is `F` (one-sided random set) or `1 − |2F − 1|` (default
//! symmetric set), and `{θ : pl(θ) >= α}` is an exact `1 − α` confidence
//! interval.
//!
//! ```
//! use uniform_im::{plausibility_interval, ModelSpec, PrsKind, SuffStat};
//!
//! let model = ModelSpec::theta_theta_squared();
//! let stat = SuffStat::new(25, 281.1, 9689.7)?;
//! let iv = plausibility_interval(&stat, &model, PrsKind::OneSidedLower, 0.05)?;
//! assert!((iv.lo - 98.44).abs() < 0.01 && (iv.hi - 104.48).abs() < 0.01);
//! # Ok::<(), uniform_im::Error>(())
//! ```

pub mod association;
pub mod cli;
pub mod competitors;
mod error;
pub mod im;
mod interval;
pub mod location;
pub mod model;
mod roots;
pub mod simulation;

pub use association::{
    aux_bijection_roundtrip, eta, h_obs, AuxPair, ConditionalCdf, Conditioning, Localization,
};
pub use competitors::{
    CompetitorRegistry, DensityIntervalKind, DensityIntervalResult, DensitySpec, DensityTable,
};
pub use error::{Error, Result};
pub use im::{
    plausibility, plausibility_curve, plausibility_interval, PlausibilityInterval,
    PlausibilityResult, PrsKind,
};
pub use interval::Interval;
pub use location::{loc_bayes_posterior_interval, loc_interval, loc_plausibility, LocationStat};
pub use model::{feasible_set, make_builtin, reduce, Domain, FeasibleSet, ModelSpec, SuffStat};
pub use simulation::{Method, SimConfig, SimReport, SimRow};

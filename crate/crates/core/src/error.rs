use thiserror::Error;

use crate::simulation::SimReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument values: out-of-range alpha, malformed lists, too few observations.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    /// The endpoint functions violate a model invariant (b <= 0, wrong derivative, ...).
    #[error("invalid model: {0}")]
    InvalidModel(String),

    /// No parameter value is consistent with the observed data.
    #[error("data inconsistent with model: {0}")]
    Infeasible(String),

    #[error("endpoint function `{0}` is not monotone on the parameter domain")]
    NonMonotone(&'static str),

    /// The localized conditioning is undefined at this parameter value.
    #[error("invalid localization at theta0={theta0}: {reason}")]
    Localization { theta0: f64, reason: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("superlevel set at level {level} has {components} disconnected components")]
    Disconnected { level: f64, components: usize },

    #[error("{failures} of {reps} replications failed for method `{method}` at n={n}, theta={theta}")]
    Simulation {
        method: String,
        n: usize,
        theta: f64,
        failures: usize,
        reps: usize,
        partial: Box<SimReport>,
    },

    #[error("no competitor density registered under `{0}`")]
    UnknownCompetitor(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidArgument(_)
            | Error::UnknownModel(_)
            | Error::InvalidModel(_)
            | Error::UnknownCompetitor(_)
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => 2,
            Error::Infeasible(_) | Error::NonMonotone(_) => 3,
            Error::Localization { .. }
            | Error::Numerical(_)
            | Error::Disconnected { .. }
            | Error::Simulation { .. } => 4,
        }
    }
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1), got {alpha}"
        )))
    }
}

use thiserror::Error;

/// Errors raised anywhere in the estimation and simulation stack.
///
/// Variants fall in two families: input problems (bad data, bad
/// configuration) and numerical problems (degenerate or undefined
/// quantities). [`Error::is_numerical`] tells them apart.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("data integrity error for subject `{subject}`: {message}")]
    DataIntegrity { subject: String, message: String },

    #[error("unknown subject id `{0}`")]
    UnknownSubject(String),

    #[error("interval index {index} out of range 1..={k}")]
    IntervalOutOfRange { index: usize, k: usize },

    #[error("undefined estimand: {0}")]
    UndefinedEstimand(String),

    #[error("no recurrent events in the control reference curve up to the horizon")]
    NoEventsInControl,

    #[error("degenerate variance estimate ({0}); no p-value reported")]
    DegenerateVariance(String),

    #[error("death hazard fit did not converge after {iterations} iterations (max coefficient change {max_change:e}, log-likelihood {log_likelihood})")]
    NonConvergence {
        iterations: usize,
        max_change: f64,
        log_likelihood: f64,
    },

    #[error("{failed} of {total} bootstrap replicates failed")]
    BootstrapFailures { failed: usize, total: usize },

    #[error("{count} simulated probabilities fell outside [0, 1]")]
    ProbabilityViolation { count: usize },

    #[error("{failed} of {total} replications failed in scenario `{scenario}` (first failing seed {first_seed})")]
    CampaignFailures {
        scenario: String,
        failed: usize,
        total: usize,
        first_seed: u64,
    },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// True for failures caused by degenerate numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::UndefinedEstimand(_)
                | Error::NoEventsInControl
                | Error::DegenerateVariance(_)
                | Error::NonConvergence { .. }
                | Error::BootstrapFailures { .. }
                | Error::ProbabilityViolation { .. }
                | Error::CampaignFailures { .. }
                | Error::Invariant(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

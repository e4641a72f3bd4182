use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("dimension cap exceeded: {what} needs {required} amplitudes but the cap is {cap}")]
    DimensionCap {
        what: String,
        required: u128,
        cap: usize,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("operator is not positive semidefinite (minimum eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("schema error: {0}")]
    Schema(String),

    #[error("no convergence after {iterations} iterations: {detail}")]
    Convergence {
        iterations: usize,
        detail: String,
        best_bound: Option<f64>,
    },

    #[error("numeric error: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_)
            | Error::DimensionCap { .. }
            | Error::Contract(_)
            | Error::Parameter(_)
            | Error::Input(_)
            | Error::Schema(_) => 2,
            Error::NotPsd(_) | Error::Convergence { .. } | Error::Numeric(_) => 3,
        }
    }

    /// Stable machine-readable name of the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::DimensionCap { .. } => "dimension_cap",
            Error::Contract(_) => "contract",
            Error::NotPsd(_) => "not_psd",
            Error::Parameter(_) => "parameter",
            Error::Input(_) => "input",
            Error::Schema(_) => "schema",
            Error::Convergence { .. } => "convergence",
            Error::Numeric(_) => "numeric",
        }
    }
}

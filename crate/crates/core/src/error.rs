use thiserror::Error;

/// Errors raised by the bound evaluators, simulators and the CLI.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("infeasible: power {power} is below the minimum {required} needed for reliable communication at this rate")]
    Infeasible { power: f64, required: f64 },

    #[error("numeric domain error in {context} at argument {arg}")]
    NumericDomain { context: &'static str, arg: f64 },

    #[error("search failed: {0}")]
    SearchFailure(String),

    #[error("unsupported bound variant: {0}")]
    UnsupportedVariant(String),

    #[error("degenerate strategy: {0}")]
    DegenerateStrategy(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit status used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter { .. }
            | Error::UnsupportedVariant(_)
            | Error::Resource(_)
            | Error::Config(_) => 2,
            Error::Infeasible { .. } => 3,
            Error::NumericDomain { .. }
            | Error::SearchFailure(_)
            | Error::DegenerateStrategy(_) => 4,
            Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

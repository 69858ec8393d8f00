use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    /// The rank-weight denominator Σ_s K(s/(N-1)) is not positive.
    #[error("degenerate kernel: interaction denominator {0} is not positive")]
    DegenerateKernel(f64),

    #[error("degenerate normalizer: 1 - e_K(N) = {0} is not positive (bad truncation?)")]
    DegenerateNormalizer(f64),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("unknown initial law `{0}`")]
    UnknownLaw(String),

    #[error("incompatible binning: {0}")]
    IncompatibleBinning(String),

    #[error("empty snapshot set")]
    EmptySnapshots,

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownLaw(_)
            | Error::Hypothesis(_)
            | Error::InvalidKernel(_) => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Input failed validation (bad shape, out-of-range index, bad weight, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("vertex {vertex} has zero degree")]
    IsolatedVertex { vertex: usize },

    #[error("EDVW matrix is not normalized; call `EdvwMatrix::normalized()` first")]
    EdvwNotNormalized,

    #[error("hyperedge {edge} has zero total vertex weight")]
    ZeroEdvwColumn { edge: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("Markov chain is reducible ({components} strongly connected components)")]
    Reducible { components: usize },

    #[error("Markov chain is periodic; rerun with the lazy chain enabled")]
    Periodic,

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("singular linear system: {0}")]
    Singular(String),

    #[error("non-finite value in layer {layer}")]
    NonFinite { layer: usize },

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    #[error("split {split} failed: {source}")]
    Split {
        split: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Invalid(_)
            | Error::Dimension(_)
            | Error::EdvwNotNormalized
            | Error::Parse { .. } => true,
            Error::Split { source, .. } => source.is_validation(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

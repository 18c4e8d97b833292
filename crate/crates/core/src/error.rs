use std::path::PathBuf;

/// Errors produced by the `yinyang` library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A point was passed to a region test that requires it to lie inside the symbol.
    #[error("point ({x}, {y}) lies outside the big circle")]
    OutsideSymbol { x: f64, y: f64 },

    /// Invalid parameters or configuration values.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Rejection sampling did not accept a point within the iteration cap.
    #[error("rejection sampling for class {class} gave up after {draws} proposals; check the geometry")]
    IterationCap { class: &'static str, draws: u64 },

    /// Training produced a non-finite loss.
    #[error("training diverged (non-finite loss) at epoch {epoch} for init seed {init_seed}")]
    Divergence { epoch: usize, init_seed: u64 },

    /// Statistics requested on too few values.
    #[error("need at least {needed} values, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    /// Malformed file contents.
    #[error("{path}: line {line}: {msg}")]
    Parse { path: String, line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

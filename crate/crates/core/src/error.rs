use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value in field at flat index {0}")]
    NonFinite(usize),

    #[error("negative time {0} passed to the heat semigroup")]
    NegativeTime(f64),

    #[error("radius {radius} exceeds the admissible maximum {max}")]
    RadiusTooLarge { radius: f64, max: f64 },

    /// An iterate reached a point too close to the origin for the sphere
    /// projection to be applied.
    #[error("tube escape: |y| = {norm} < 1/4 (slice {slice:?}, site {site})")]
    TubeEscape {
        norm: f64,
        site: usize,
        slice: Option<usize>,
    },

    #[error("Picard iteration did not converge after {} iterations (last increment {last:e})", increments.len())]
    NoConvergence { increments: Vec<f64>, last: f64 },

    #[error("snapshot format: {0}")]
    Format(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn with_slice(self, j: usize) -> Self {
        match self {
            Error::TubeEscape { norm, site, .. } => Error::TubeEscape {
                norm,
                site,
                slice: Some(j),
            },
            other => other,
        }
    }
}

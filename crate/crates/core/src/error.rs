//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by geometry, signal, and I/O operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A keypoint had zero (or below-threshold) confidence where a valid
    /// detection was required.
    #[error("keypoint missing (confidence below threshold)")]
    MissingKeypoint,

    /// Disparity too small to resolve a finite depth.
    #[error("disparity {disparity} px admits no finite depth")]
    NonFiniteDepth { disparity: f64 },

    /// The triangulation system was numerically unsolvable.
    #[error("triangulation system is ill-conditioned (cond = {cond:.3e})")]
    IllConditioned { cond: f64 },

    /// A 3D point with non-positive depth was passed where the subject must
    /// be in front of the camera.
    #[error("point lies behind the camera (Z = {z} m)")]
    BehindCamera { z: f64 },

    /// Not enough samples to perform the operation.
    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Point cloud has no well-defined motion plane.
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    /// Operation requires a uniform sample grid.
    #[error("series is not uniformly sampled; resample onto a uniform grid first")]
    ResampleRequired,

    /// A machine parameter makes the model singular.
    #[error("singular parameter: {0}")]
    SingularParameter(&'static str),

    /// cos(alpha + beta) is too close to zero for the force model.
    #[error("model singularity: cos(alpha + beta) = {0:.3e}")]
    ModelSingularity(f64),

    /// The measured series has zero range, so NRMSE is undefined.
    #[error("measured series has zero range; NRMSE is undefined")]
    ZeroRange,

    /// Both rep counts are zero; percent symmetry is undefined.
    #[error("percent symmetry is undefined when both rep counts are zero")]
    UndefinedSymmetry,

    /// A configuration value violates its contract.
    #[error("invalid {what}: {why}")]
    InvalidConfig { what: &'static str, why: String },

    /// The simulation scenario is not realizable.
    #[error("scenario error: {0}")]
    Scenario(String),

    /// A data file failed to parse; `line` is 1-based.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: usize,
        msg: String,
    },

    /// Filesystem error carrying the offending path.
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn parse(path: &std::path::Path, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            path: path.display().to_string(),
            line,
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unreadable raster {path}: {reason}")]
    UnreadableRaster { path: PathBuf, reason: String },
    #[error("malformed world file: {0}")]
    MalformedWorldFile(String),
    #[error("unsupported bit depth (max value {0})")]
    UnsupportedBitDepth(u32),
    #[error("geotransform is singular")]
    SingularGeoTransform,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("image {id} is {width}x{height}, below the {min}px minimum")]
    ImageTooSmall {
        id: String,
        width: usize,
        height: usize,
        min: usize,
    },
    #[error("target annotation error for image {image_id}: {reason}")]
    Annotation { image_id: String, reason: String },
    #[error("manifest error: {0}")]
    Manifest(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("view transform is singular")]
    SingularTransform,
    #[error("point maps to infinity (w = {0:e})")]
    PointAtInfinity(f64),
    #[error("no feasible view after {0} rejections")]
    RejectionOverflow(usize),
    #[error("invalid sample count: {0}")]
    InvalidCount(String),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite activation in {0}")]
    NonFiniteActivation(&'static str),
    #[error("non-finite gradient in tensor {0}")]
    NonFiniteGradient(String),
    #[error("target ({u:.2}, {v:.2}) lies outside the {grid}x{grid} output grid")]
    TargetOutOfGrid { u: f64, v: f64, grid: usize },
    #[error("loss diverged at stage {stage}, step {step}")]
    DivergedLoss { stage: &'static str, step: usize },
    #[error("weights file: {0}")]
    WeightsFormat(String),

    #[error("descriptor support window leaves the image")]
    SupportOutOfBounds,
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("not enough matches ({0}) to estimate a homography")]
    NotEnoughMatches(usize),
    #[error("degenerate point configuration")]
    DegenerateConfiguration,
    #[error("RANSAC found no consensus of at least 4 inliers")]
    RansacFailed,

    #[error("trajectory has no frames")]
    EmptyTrajectory,
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("failed to write {path}: {reason}")]
    WriteFailure { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn write_failure(path: impl Into<PathBuf>, err: impl std::fmt::Display) -> Self {
        Error::WriteFailure {
            path: path.into(),
            reason: err.to_string(),
        }
    }
}

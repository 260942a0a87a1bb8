//! Target localization from a stack of georeferenced images.
//!
//! Views are synthesized from the stack ([`view_synth`]), a small
//! convolutional network learns to map a view to the target's pixel
//! location ([`net`]), and a keypoint-registration pipeline ([`sift`])
//! serves as the single-reference baseline. [`trajectory`] and [`eval`]
//! cover trajectory simulation, metrics and reports.

pub mod error;
pub mod eval;
pub mod geo;
pub mod homography;
pub mod net;
pub mod pipeline;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod sift;
pub mod trajectory;
pub mod view_synth;

pub use error::{Error, Result};

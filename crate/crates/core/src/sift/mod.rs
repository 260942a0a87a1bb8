//! Keypoint-registration baseline: difference-of-Gaussians keypoints,
//! gradient-histogram descriptors, ratio-test matching and a RANSAC
//! homography, chained in [`register_and_project`].

mod describe;
mod detect;
mod matching;
mod ransac;
mod register;

use serde::{Deserialize, Serialize};

pub use describe::{clip_and_normalize, describe, describe_all, Descriptor, DESCRIPTOR_LEN};
pub use detect::{detect_keypoints, detect_in, write_keypoints, Keypoint, ScaleSpace};
pub use matching::{match_ratio, Match, MatchSet};
pub use ransac::{estimate_homography_ransac, fit_homography, symmetric_transfer_sq, RansacFit};
pub use register::{
    perturb_prior, prior_prewarp, register_and_project, register_with_features, FailureReason, PriorNoise, ReferenceFeatures, RegistrationResult,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SiftConfig {
    pub sigma0: f64,
    pub scales_per_octave: usize,
    pub contrast_threshold: f64,
    pub edge_ratio: f64,
    /// Blur already present in the input image.
    pub assumed_blur: f64,
    /// Stop adding octaves once the side would drop below this.
    pub min_octave_side: usize,
    pub ratio: f64,
    pub cross_check: bool,
    pub ransac: RansacConfig,
    /// Border added around the view-sized window when pre-warping the reference.
    pub prior_pad: usize,
    pub use_prior: bool,
}

impl Default for SiftConfig {
    fn default() -> Self {
        SiftConfig {
            sigma0: 1.6,
            scales_per_octave: 3,
            contrast_threshold: 0.03,
            edge_ratio: 10.0,
            assumed_blur: 0.5,
            min_octave_side: 16,
            ratio: 0.75,
            cross_check: false,
            ransac: RansacConfig::default(),
            prior_pad: 64,
            use_prior: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RansacConfig {
    pub inlier_px: f64,
    pub max_iters: usize,
    /// Early exit once this probability of an all-inlier sample is reached.
    pub confidence: f64,
    pub seed: u64,
}

impl Default for RansacConfig {
    fn default() -> Self {
        RansacConfig {
            inlier_px: 3.0,
            max_iters: 2000,
            confidence: 0.999,
            seed: 0,
        }
    }
}

/// Minimum image side accepted by the detector.
pub const MIN_IMAGE_SIDE: usize = 32;

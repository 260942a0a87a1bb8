use std::fmt;

use serde::{Deserialize, Serialize};

use super::describe::{describe_all, Descriptor};
use super::detect::{detect_in, Keypoint, ScaleSpace};
use super::matching::match_ratio;
use super::ransac::estimate_homography_ransac;
use super::SiftConfig;
use crate::error::{Error, Result};
use crate::geo::GeoImage;
use crate::homography::{self, Mat3};
use crate::raster::Raster;
use crate::rng::StreamRng;
use crate::view_synth::{warp, ViewTransform};

/// Keypoints and descriptors of one image, reusable across queries.
#[derive(Debug, Clone)]
pub struct ReferenceFeatures {
    pub keypoints: Vec<Keypoint>,
    pub descriptors: Vec<Descriptor>,
}

impl ReferenceFeatures {
    pub fn compute(img: &Raster, cfg: &SiftConfig) -> Result<Self> {
        let space = ScaleSpace::build(img, cfg)?;
        let kps = detect_in(&space, cfg);
        let (keypoints, descriptors) = describe_all(&space, &kps);
        Ok(ReferenceFeatures { keypoints, descriptors })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailureReason {
    NoKeypoints,
    NotEnoughMatches(usize),
    RansacFailed,
    ProjectionFailed,
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::NoKeypoints => write!(f, "no keypoints"),
            FailureReason::NotEnoughMatches(n) => write!(f, "not enough matches ({n})"),
            FailureReason::RansacFailed => write!(f, "ransac failed"),
            FailureReason::ProjectionFailed => write!(f, "target projection failed"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationResult {
    /// Reference pixels -> query pixels.
    pub h_est: Option<Mat3>,
    pub inliers: usize,
    pub target_px: Option<(f64, f64)>,
    pub failure: Option<FailureReason>,
    pub detected_query: usize,
    pub detected_ref: usize,
    pub matched: usize,
}

impl RegistrationResult {
    fn failed(reason: FailureReason, dq: usize, dr: usize, matched: usize) -> Self {
        RegistrationResult {
            h_est: None,
            inliers: 0,
            target_px: None,
            failure: Some(reason),
            detected_query: dq,
            detected_ref: dr,
            matched,
        }
    }
}

/// Query features against `reference`, whose pixels relate to the
/// original reference image through `to_ref` (reference-side pixel ->
/// original reference pixel).
fn register_features(
    query: &ReferenceFeatures,
    reference: &ReferenceFeatures,
    to_ref: &Mat3,
    p_ref: (f64, f64),
    cfg: &SiftConfig,
    rng: &mut StreamRng,
) -> RegistrationResult {
    let (dq, dr) = (query.descriptors.len(), reference.descriptors.len());
    if dq == 0 || dr == 0 {
        return RegistrationResult::failed(FailureReason::NoKeypoints, dq, dr, 0);
    }
    let matches = match match_ratio(&query.descriptors, &reference.descriptors, cfg.ratio, cfg.cross_check) {
        Ok(m) => m,
        Err(_) => return RegistrationResult::failed(FailureReason::NoKeypoints, dq, dr, 0),
    };
    let matched = matches.matched();
    let (src, dst): (Vec<_>, Vec<_>) = matches
        .pairs
        .iter()
        .map(|m| (reference.keypoints[m.reference].position, query.keypoints[m.query].position))
        .unzip();
    let fit = match estimate_homography_ransac(&src, &dst, &cfg.ransac, rng) {
        Ok(f) => f,
        Err(Error::NotEnoughMatches(n)) => {
            return RegistrationResult::failed(FailureReason::NotEnoughMatches(n), dq, dr, matched)
        }
        Err(_) => return RegistrationResult::failed(FailureReason::RansacFailed, dq, dr, matched),
    };
    let h_est = match homography::invert(to_ref) {
        Ok(inv) => homography::normalize(&(fit.h * inv)),
        Err(_) => return RegistrationResult::failed(FailureReason::ProjectionFailed, dq, dr, matched),
    };
    let target_px = homography::apply(&h_est, p_ref).ok();
    RegistrationResult {
        h_est: Some(h_est),
        inliers: fit.inlier_count,
        failure: target_px.is_none().then_some(FailureReason::ProjectionFailed),
        target_px,
        detected_query: dq,
        detected_ref: dr,
        matched,
    }
}

/// Similarity pre-warp (window pixel -> reference pixel) matching the
/// prior's scale and rotation around its view center.
pub fn prior_prewarp(prior: &ViewTransform, pad: usize) -> Result<ViewTransform> {
    let c = prior.view_center();
    let (scale, angle) = homography::local_similarity(&prior.h, c)?;
    let center_ref = homography::apply(&prior.h, c)?;
    let m = prior.view_size + 2 * pad;
    let cm = (m as f64 - 1.0) / 2.0;
    let g = homography::translation(center_ref.0, center_ref.1)
        * homography::rotation(angle)
        * homography::scaling(scale)
        * homography::translation(-cm, -cm);
    Ok(ViewTransform {
        h: g,
        source_image_id: prior.source_image_id.clone(),
        seed: prior.seed,
        view_size: m,
    })
}

/// Register `current` against `reference` and project the target.
///
/// With a prior (and `cfg.use_prior`), the reference is first resampled
/// into the prior's scale/rotation neighbourhood; otherwise the whole
/// reference is used. Registration failures are recorded in the result.
pub fn register_and_project(
    current: &Raster,
    reference: &GeoImage,
    prior: Option<&ViewTransform>,
    p_ref: (f64, f64),
    cfg: &SiftConfig,
    rng: &mut StreamRng,
) -> Result<RegistrationResult> {
    let query = ReferenceFeatures::compute(current, cfg)?;
    match prior.filter(|_| cfg.use_prior) {
        Some(prior) => {
            let pre = prior_prewarp(prior, cfg.prior_pad)?;
            let window = warp(&reference.pixels, &pre)?.image;
            let feats = ReferenceFeatures::compute(&window, cfg)?;
            Ok(register_features(&query, &feats, &pre.h, p_ref, cfg, rng))
        }
        None => {
            let feats = ReferenceFeatures::compute(&reference.pixels, cfg)?;
            Ok(register_features(&query, &feats, &Mat3::identity(), p_ref, cfg, rng))
        }
    }
}

/// Same as the prior-free path of [`register_and_project`], reusing
/// precomputed reference features.
pub fn register_with_features(
    current: &Raster,
    reference: &ReferenceFeatures,
    p_ref: (f64, f64),
    cfg: &SiftConfig,
    rng: &mut StreamRng,
) -> Result<RegistrationResult> {
    let query = ReferenceFeatures::compute(current, cfg)?;
    Ok(register_features(&query, reference, &Mat3::identity(), p_ref, cfg, rng))
}

/// Noise applied to a true view transform to form an approximate camera prior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PriorNoise {
    pub log_scale_sigma: f64,
    pub yaw_sigma: f64,
    /// Half-width of the uniform shift, view pixels.
    pub shift_px: f64,
}

impl Default for PriorNoise {
    fn default() -> Self {
        PriorNoise {
            log_scale_sigma: 0.1,
            yaw_sigma: 5f64.to_radians(),
            shift_px: 16.0,
        }
    }
}

/// `truth` composed with a random view-space similarity about the center.
pub fn perturb_prior(truth: &ViewTransform, noise: &PriorNoise, rng: &mut StreamRng) -> ViewTransform {
    let s = (noise.log_scale_sigma * rng.normal()).exp();
    let a = noise.yaw_sigma * rng.normal();
    let dx = rng.range(-noise.shift_px, noise.shift_px);
    let dy = rng.range(-noise.shift_px, noise.shift_px);
    let (cx, cy) = truth.view_center();
    let m = homography::translation(cx + dx, cy + dy)
        * homography::rotation(a)
        * homography::scaling(s)
        * homography::translation(-cx, -cy);
    ViewTransform {
        h: homography::normalize(&(truth.h * m)),
        ..truth.clone()
    }
}

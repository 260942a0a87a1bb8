//! Glue between datasets on disk, the two localization methods and the
//! metrics: load views, run a method over them, collect frame results.

use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::{render_overlay, FrameResult, Method};
use crate::geo::{GeoImage, GeoStack};
use crate::homography::{self, Mat3};
use crate::net::{forward_with, predict_target, softmax, Example, ModelWeights, Workspace};
use crate::raster::{read_raster, Raster};
use crate::rng::{domain, StreamRng};
use crate::sift::{perturb_prior, register_and_project, PriorNoise, SiftConfig};
use crate::view_synth::{DatasetManifest, SampleRecord, Split, ViewTransform};

/// One evaluation view with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct View {
    pub id: String,
    pub image: Raster,
    pub transform: ViewTransform,
    pub truth_px: (f64, f64),
}

impl View {
    pub fn from_record(rec: &SampleRecord, image: Raster) -> Self {
        View {
            id: format!("{}_{}", rec.split.as_str(), rec.index),
            image,
            transform: rec.transform.clone(),
            truth_px: rec.target_px,
        }
    }
}

/// Read the views of one split from a generated dataset directory.
pub fn load_views(dir: &Path, manifest: &DatasetManifest, split: Split) -> Result<Vec<View>> {
    manifest
        .split(split)
        .map(|rec| Ok(View::from_record(rec, read_raster(&dir.join(rec.file_name()))?)))
        .collect()
}

pub fn load_examples(dir: &Path, manifest: &DatasetManifest) -> Result<Vec<Example>> {
    manifest
        .split(Split::Train)
        .map(|rec| {
            let img = read_raster(&dir.join(rec.file_name()))?;
            Ok(Example::from_raster(&img, rec.target_px))
        })
        .collect()
}

/// Ordered parallel map over `items` with up to `threads` workers.
pub fn par_map<T: Sync, R: Send>(items: &[T], threads: usize, f: impl Fn(usize, &T) -> R + Sync) -> Vec<R> {
    let threads = threads.max(1).min(items.len().max(1));
    if threads == 1 {
        return items.iter().enumerate().map(|(i, t)| f(i, t)).collect();
    }
    let chunk = items.len().div_ceil(threads);
    std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .enumerate()
            .map(|(ci, part)| {
                let f = &f;
                s.spawn(move || part.iter().enumerate().map(|(i, t)| f(ci * chunk + i, t)).collect::<Vec<R>>())
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    })
}

/// Learned-method prediction for one view, with the cell likelihoods.
#[derive(Debug, Clone, PartialEq)]
pub struct LearnedOutput {
    pub result: FrameResult,
    pub likelihood: Option<Vec<f64>>,
    pub grid: usize,
}

pub fn evaluate_learned(w: &ModelWeights<f32>, views: &[View], threads: usize) -> Result<Vec<LearnedOutput>> {
    let n = w.config.input_size;
    if let Some(v) = views.iter().find(|v| v.image.width != n || v.image.height != n) {
        return Err(Error::ShapeMismatch(format!(
            "view {} is {}x{}, network expects {n}x{n}",
            v.id, v.image.width, v.image.height
        )));
    }
    let outputs = par_map(views, threads, |_, v| -> Result<LearnedOutput> {
        let mut ws = Workspace::new();
        let pred = forward_with(w, &v.image.data, &mut ws)?;
        let est = predict_target(&pred, w.config.output_stride);
        let likelihood = pred.heatmap.as_ref().map(|h| softmax(h).iter().map(|&p| p as f64).collect());
        Ok(LearnedOutput {
            result: FrameResult::predicted(v.id.clone(), Method::Learned, est.px, v.truth_px),
            likelihood,
            grid: pred.grid,
        })
    });
    outputs.into_iter().collect()
}

/// Affine map from pixels of `from` to pixels of `to` through world coordinates.
pub fn pixel_map(from: &GeoImage, to: &GeoImage) -> Result<Mat3> {
    // Built from three pixel correspondences; world coordinates are large,
    // so composing the raw 3x3 matrices would lose precision.
    let map = |p| to.geo.world_to_pixel(from.geo.pixel_to_world(p));
    let o = map((0.0, 0.0))?;
    let x = map((1.0, 0.0))?;
    let y = map((0.0, 1.0))?;
    Ok(Mat3::new(x.0 - o.0, y.0 - o.0, o.0, x.1 - o.1, y.1 - o.1, o.1, 0.0, 0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineSettings {
    pub sift: SiftConfig,
    pub prior_noise: PriorNoise,
    pub seed: u64,
}

/// Register every view against the single `reference` image. The camera
/// prior is the true transform re-expressed in reference pixels and
/// perturbed with `prior_noise`.
pub fn evaluate_baseline(
    stack: &GeoStack,
    reference_id: &str,
    views: &[View],
    settings: &BaselineSettings,
    threads: usize,
) -> Result<Vec<FrameResult>> {
    let reference = stack
        .image(reference_id)
        .ok_or_else(|| Error::Manifest(format!("unknown reference image {reference_id:?}")))?;
    let p_ref = stack.target.pixel_in(reference_id)?;
    let results = par_map(views, threads, |i, v| -> Result<FrameResult> {
        let mut rng = StreamRng::derive(settings.seed, domain::PRIOR, i as u64);
        let source = stack
            .image(&v.transform.source_image_id)
            .ok_or_else(|| Error::Manifest(format!("unknown source image {:?}", v.transform.source_image_id)))?;
        let truth = ViewTransform {
            h: homography::normalize(&(pixel_map(source, reference)? * v.transform.h)),
            ..v.transform.clone()
        };
        let prior = perturb_prior(&truth, &settings.prior_noise, &mut rng);
        let mut ransac_rng = StreamRng::derive(settings.seed, domain::RANSAC, i as u64);
        let reg = register_and_project(&v.image, reference, Some(&prior), p_ref, &settings.sift, &mut ransac_rng)?;
        Ok(match (reg.target_px, reg.failure) {
            (Some(p), None) => FrameResult::predicted(v.id.clone(), Method::Baseline, p, v.truth_px),
            (_, reason) => FrameResult::failed(
                v.id.clone(),
                Method::Baseline,
                reason.map_or("failed".to_string(), |r| r.to_string()),
                v.truth_px,
            ),
        })
    });
    results.into_iter().collect()
}

/// Overlays for the first `count` learned outputs, as `overlay_<id>.<ext>`.
pub fn write_overlays(dir: &Path, views: &[View], outputs: &[LearnedOutput], count: usize, ext: &str) -> Result<()> {
    for (v, o) in views.iter().zip(outputs).take(count) {
        if let Some(l) = &o.likelihood {
            render_overlay(&v.image, l, o.grid, v.truth_px, &dir.join(format!("overlay_{}.{ext}", v.id)))?;
        }
    }
    Ok(())
}

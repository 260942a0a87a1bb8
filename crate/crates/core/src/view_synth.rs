//! Synthetic camera views sampled from a reference stack.
//!
//! A [`ViewTransform`] maps view pixels `(x, y, 1)` to reference pixels of
//! one stack image. Views are built by [`compose_view`]:
//!
//! ```text
//! H = T(a) * R(yaw) * S(zoom) * K Rx(tilt_x) Ry(tilt_y) K^-1 * T(-c)
//! ```
//!
//! where `c` is the view center `((n-1)/2, (n-1)/2)`, `K = diag(f, f, 1)` is
//! a nadir pinhole with focal `f`, and the final translation `a` is solved
//! so that the target's reference pixel lands on the requested view
//! position. `R(yaw)` sends the view x axis `(1, 0)` to the reference
//! direction `(cos yaw, sin yaw)` (so a quarter turn sends it to `(0, 1)`).
//! The model is plane-projective only: no relief or parallax.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geo::{GeoImage, GeoStack};
use crate::homography::{self, apply_raw, Mat3, MIN_W};
use crate::raster::{write_pgm8, Raster};
use crate::rng::{domain, StreamRng};

pub const MAX_REJECTIONS: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub struct ViewTransform {
    /// Row-major view -> reference homography.
    pub h: Mat3,
    pub source_image_id: String,
    pub seed: u64,
    pub view_size: usize,
}

impl ViewTransform {
    pub fn identity(source_image_id: &str, view_size: usize) -> Self {
        ViewTransform {
            h: Mat3::identity(),
            source_image_id: source_image_id.to_string(),
            seed: 0,
            view_size,
        }
    }

    pub fn view_center(&self) -> (f64, f64) {
        let c = (self.view_size as f64 - 1.0) / 2.0;
        (c, c)
    }

    pub fn to_reference(&self, p: (f64, f64)) -> Result<(f64, f64)> {
        homography::apply(&self.h, p)
    }

    /// The same view with its content moved by `(dx, dy)` view pixels.
    pub fn shifted(&self, dx: f64, dy: f64) -> ViewTransform {
        ViewTransform {
            h: self.h * homography::translation(-dx, -dy),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Total yaw interval width; yaw ~ U(-range/2, range/2). 2*pi is the full circle.
    pub yaw_range: f64,
    pub zoom_min: f64,
    pub zoom_max: f64,
    pub tilt_max: f64,
    /// Half-width of the uniform target offset from the view center, px.
    pub jitter_translation: f64,
    pub view_size: usize,
    pub target_in_view_margin: f64,
    /// Pinhole focal length used for tilts, px.
    pub focal_px: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            yaw_range: std::f64::consts::TAU,
            zoom_min: 0.5,
            zoom_max: 8.0,
            tilt_max: 10f64.to_radians(),
            jitter_translation: 112.0,
            view_size: 256,
            target_in_view_margin: 16.0,
            focal_px: 256.0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self, output_stride: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.zoom_min > 0.0 && self.zoom_min <= self.zoom_max) {
            return bad(format!("zoom range [{}, {}]", self.zoom_min, self.zoom_max));
        }
        if !(0.0..std::f64::consts::FRAC_PI_4).contains(&self.tilt_max) {
            return bad(format!("tilt_max {} must be in [0, pi/4)", self.tilt_max));
        }
        if self.view_size == 0 || self.view_size % output_stride != 0 {
            return bad(format!(
                "view_size {} must be a positive multiple of {output_stride}",
                self.view_size
            ));
        }
        if !(self.yaw_range >= 0.0) || !(self.jitter_translation >= 0.0) || !(self.focal_px > 0.0) {
            return bad("yaw_range, jitter and focal must be non-negative".into());
        }
        Ok(())
    }
}

/// Geometric parameters of one view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ViewParams {
    pub yaw: f64,
    pub zoom: f64,
    pub tilt_x: f64,
    pub tilt_y: f64,
    /// Where the target should appear in the view.
    pub target_view: (f64, f64),
}

/// Build the view -> reference homography for `params`, anchored so that
/// `target_ref` projects to `params.target_view`.
pub fn compose_view(params: &ViewParams, target_ref: (f64, f64), view_size: usize, focal: f64) -> Result<Mat3> {
    let c = (view_size as f64 - 1.0) / 2.0;
    let core = homography::rotation(params.yaw)
        * homography::scaling(params.zoom)
        * homography::tilt(params.tilt_x, params.tilt_y, focal)
        * homography::translation(-c, -c);
    let (qx, qy) = homography::apply(&core, params.target_view)?;
    let h = homography::translation(target_ref.0 - qx, target_ref.1 - qy) * core;
    let h = homography::normalize(&h);
    homography::invert(&h)?;
    Ok(h)
}

fn in_margin_box(p: (f64, f64), view_size: usize, margin: f64) -> bool {
    let hi = view_size as f64 - margin;
    p.0 >= margin && p.1 >= margin && p.0 <= hi && p.1 <= hi
}

/// Draw one view transform. Draw order: source image, yaw, zoom, tilt x,
/// tilt y, target offset x, target offset y; repeated on rejection.
pub fn sample_view(rng: &mut StreamRng, cfg: &SamplerConfig, stack: &GeoStack) -> Result<ViewTransform> {
    sample_view_from(rng, cfg, stack, &stack.ids())
}

pub fn sample_view_from(
    rng: &mut StreamRng,
    cfg: &SamplerConfig,
    stack: &GeoStack,
    candidates: &[String],
) -> Result<ViewTransform> {
    if candidates.is_empty() {
        return Err(Error::EmptyInput("candidate source images"));
    }
    let seed = rng.key();
    let c = (cfg.view_size as f64 - 1.0) / 2.0;
    for _ in 0..MAX_REJECTIONS {
        let source = &candidates[rng.below(candidates.len())];
        let yaw = rng.range(-cfg.yaw_range / 2.0, cfg.yaw_range / 2.0);
        let zoom = rng.range(cfg.zoom_min.ln(), cfg.zoom_max.ln()).exp();
        let tilt_x = rng.range(-cfg.tilt_max, cfg.tilt_max);
        let tilt_y = rng.range(-cfg.tilt_max, cfg.tilt_max);
        let jx = rng.range(-cfg.jitter_translation, cfg.jitter_translation);
        let jy = rng.range(-cfg.jitter_translation, cfg.jitter_translation);
        let target_view = (c + jx, c + jy);
        if !in_margin_box(target_view, cfg.view_size, cfg.target_in_view_margin) {
            continue;
        }
        let target_ref = stack.target.pixel_in(source)?;
        let params = ViewParams {
            yaw,
            zoom,
            tilt_x,
            tilt_y,
            target_view,
        };
        let h = match compose_view(&params, target_ref, cfg.view_size, cfg.focal_px) {
            Ok(h) => h,
            Err(_) => continue,
        };
        return Ok(ViewTransform {
            h,
            source_image_id: source.clone(),
            seed,
            view_size: cfg.view_size,
        });
    }
    Err(Error::RejectionOverflow(MAX_REJECTIONS))
}

/// Warped view plus a mask of pixels whose sample fell inside the source.
#[derive(Debug, Clone, PartialEq)]
pub struct WarpedView {
    pub image: Raster,
    pub valid: Vec<bool>,
}

impl WarpedView {
    pub fn valid_fraction(&self) -> f64 {
        self.valid.iter().filter(|&&v| v).count() as f64 / self.valid.len().max(1) as f64
    }
}

/// Bilinear resampling of `src` through `t.h`; out-of-bounds pixels are 0.
pub fn warp(src: &Raster, t: &ViewTransform) -> Result<WarpedView> {
    homography::invert(&t.h)?;
    let n = t.view_size;
    let mut image = Raster::new(n, n);
    let mut valid = vec![false; n * n];
    for y in 0..n {
        for x in 0..n {
            let (u, v, w) = apply_raw(&t.h, x as f64, y as f64);
            if w.abs() < MIN_W {
                continue;
            }
            if let Some(val) = src.bilinear(u / w, v / w) {
                image.data[y * n + x] = val;
                valid[y * n + x] = true;
            }
        }
    }
    Ok(WarpedView { image, valid })
}

/// Position in the view of reference pixel `p_ref`.
pub fn project_target(t: &ViewTransform, p_ref: (f64, f64)) -> Result<(f64, f64)> {
    let inv = homography::invert(&t.h)?;
    homography::apply(&inv, p_ref)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }

    fn domain(self) -> u64 {
        match self {
            Split::Train => domain::TRAIN_VIEWS,
            Split::Test => domain::TEST_VIEWS,
        }
    }
}

impl std::str::FromStr for Split {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            other => Err(Error::Manifest(format!("unknown split {other:?}"))),
        }
    }
}

/// Manifest record of one sample: everything except its pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub index: usize,
    pub split: Split,
    pub transform: ViewTransform,
    pub target_px: (f64, f64),
}

impl SampleRecord {
    pub fn file_name(&self) -> String {
        format!("{}_{}.pgm", self.split.as_str(), self.index)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub image: Raster,
    pub record: SampleRecord,
}

/// Per-split whitelist of source images.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceRestriction {
    #[serde(default)]
    pub train: Option<Vec<String>>,
    #[serde(default)]
    pub test: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub global_seed: u64,
    pub stack_fingerprint: String,
    pub view_size: usize,
    pub r_train: usize,
    pub r_test: usize,
    pub samples: Vec<SampleRecord>,
}

/// Content hash of a stack: ids, modes, geotransforms and pixel values.
pub fn stack_fingerprint(stack: &GeoStack) -> String {
    let mut hasher = Sha256::new();
    for img in &stack.images {
        hasher.update(img.image_id.as_bytes());
        hasher.update([0]);
        hasher.update(img.mode_tag.as_bytes());
        hasher.update([0]);
        for v in [
            img.geo.origin_easting,
            img.geo.origin_northing,
            img.geo.pixel_width,
            img.geo.pixel_height,
            img.geo.row_rotation,
            img.geo.col_rotation,
        ] {
            hasher.update(v.to_le_bytes());
        }
        hasher.update((img.width() as u64).to_le_bytes());
        hasher.update((img.height() as u64).to_le_bytes());
        for p in &img.pixels.data {
            hasher.update(p.to_le_bytes());
        }
    }
    hasher.update(stack.target.world_position.0.to_le_bytes());
    hasher.update(stack.target.world_position.1.to_le_bytes());
    hex::encode(hasher.finalize())
}

/// Sample the transform of `(split, index)`; independent of every other index.
pub fn sample_record(
    stack: &GeoStack,
    cfg: &SamplerConfig,
    global_seed: u64,
    split: Split,
    index: usize,
    candidates: &[String],
) -> Result<SampleRecord> {
    let mut rng = StreamRng::derive(global_seed, split.domain(), index as u64);
    let transform = sample_view_from(&mut rng, cfg, stack, candidates)?;
    let p_ref = stack.target.pixel_in(&transform.source_image_id)?;
    let target_px = project_target(&transform, p_ref)?;
    Ok(SampleRecord {
        index,
        split,
        transform,
        target_px,
    })
}

fn candidates_for(stack: &GeoStack, list: &Option<Vec<String>>) -> Result<Vec<String>> {
    match list {
        None => Ok(stack.ids()),
        Some(ids) => {
            for id in ids {
                if stack.image(id).is_none() {
                    return Err(Error::Manifest(format!("restriction names unknown image {id:?}")));
                }
            }
            Ok(ids.clone())
        }
    }
}

pub fn generate_dataset(
    stack: &GeoStack,
    cfg: &SamplerConfig,
    r_train: usize,
    r_test: usize,
    global_seed: u64,
    restriction: &SourceRestriction,
) -> Result<DatasetManifest> {
    if r_train == 0 || r_test == 0 {
        return Err(Error::InvalidCount(format!(
            "train and test counts must be positive (got {r_train}, {r_test})"
        )));
    }
    let train_ids = candidates_for(stack, &restriction.train)?;
    let test_ids = candidates_for(stack, &restriction.test)?;
    let mut samples = Vec::with_capacity(r_train + r_test);
    for i in 0..r_train {
        samples.push(sample_record(stack, cfg, global_seed, Split::Train, i, &train_ids)?);
    }
    for i in 0..r_test {
        samples.push(sample_record(stack, cfg, global_seed, Split::Test, i, &test_ids)?);
    }
    Ok(DatasetManifest {
        global_seed,
        stack_fingerprint: stack_fingerprint(stack),
        view_size: cfg.view_size,
        r_train,
        r_test,
        samples,
    })
}

pub fn render_sample(stack: &GeoStack, record: &SampleRecord) -> Result<Sample> {
    let src = stack
        .image(&record.transform.source_image_id)
        .ok_or_else(|| Error::Manifest(format!("unknown image {:?}", record.transform.source_image_id)))?;
    Ok(Sample {
        image: warp(&src.pixels, &record.transform)?.image,
        record: record.clone(),
    })
}

/// Render a view of a single image (not necessarily part of a stack).
pub fn render_view(src: &GeoImage, t: &ViewTransform) -> Result<Raster> {
    Ok(warp(&src.pixels, t)?.image)
}

const MANIFEST_MAGIC: &str = "# stackguide dataset manifest v1";

impl DatasetManifest {
    pub fn split(&self, split: Split) -> impl Iterator<Item = &SampleRecord> {
        self.samples.iter().filter(move |s| s.split == split)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{MANIFEST_MAGIC}").unwrap();
        writeln!(out, "global_seed {}", self.global_seed).unwrap();
        writeln!(out, "stack {}", self.stack_fingerprint).unwrap();
        writeln!(out, "view_size {}", self.view_size).unwrap();
        writeln!(out, "r_train {}", self.r_train).unwrap();
        writeln!(out, "r_test {}", self.r_test).unwrap();
        writeln!(
            out,
            "# index split source h00 h01 h02 h10 h11 h12 h20 h21 h22 target_u target_v seed"
        )
        .unwrap();
        for s in &self.samples {
            write!(out, "{} {} {}", s.index, s.split.as_str(), s.transform.source_image_id).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    write!(out, " {:.16e}", s.transform.h[(r, c)]).unwrap();
                }
            }
            writeln!(
                out,
                " {:.16e} {:.16e} {}",
                s.target_px.0, s.target_px.1, s.transform.seed
            )
            .unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let bad = |m: String| Error::Manifest(m);
        let mut lines = text.lines();
        if lines.next() != Some(MANIFEST_MAGIC) {
            return Err(bad("missing manifest header".into()));
        }
        let mut header = std::collections::HashMap::new();
        let mut samples = Vec::new();
        for (lineno, line) in lines.enumerate() {
            if line.starts_with('#') || line.trim().is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() == 2 {
                header.insert(toks[0].to_string(), toks[1].to_string());
                continue;
            }
            if toks.len() != 15 {
                return Err(bad(format!("line {}: expected 15 fields, found {}", lineno + 2, toks.len())));
            }
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| bad(format!("line {}: bad number {s:?}", lineno + 2)))
            };
            let mut h = Mat3::zeros();
            for k in 0..9 {
                h[(k / 3, k % 3)] = num(toks[3 + k])?;
            }
            let view_size = header
                .get("view_size")
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| bad("view_size must precede samples".into()))?;
            samples.push(SampleRecord {
                index: toks[0].parse().map_err(|_| bad(format!("bad index {:?}", toks[0])))?,
                split: toks[1].parse()?,
                transform: ViewTransform {
                    h,
                    source_image_id: toks[2].to_string(),
                    seed: toks[14].parse().map_err(|_| bad(format!("bad seed {:?}", toks[14])))?,
                    view_size,
                },
                target_px: (num(toks[12])?, num(toks[13])?),
            });
        }
        let get = |k: &str| -> Result<String> {
            header.get(k).cloned().ok_or_else(|| bad(format!("missing header field {k}")))
        };
        let int = |k: &str| -> Result<u64> {
            get(k)?.parse::<u64>().map_err(|_| bad(format!("bad header field {k}")))
        };
        Ok(DatasetManifest {
            global_seed: int("global_seed")?,
            stack_fingerprint: get("stack")?,
            view_size: int("view_size")? as usize,
            r_train: int("r_train")? as usize,
            r_test: int("r_test")? as usize,
            samples,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::write_failure(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Check the split invariants: disjoint seeds and transforms.
    pub fn check_disjoint(&self) -> Result<()> {
        let train: BTreeSet<u64> = self.split(Split::Train).map(|s| s.transform.seed).collect();
        for s in self.split(Split::Test) {
            if train.contains(&s.transform.seed) {
                return Err(Error::Manifest(format!("test sample {} reuses a train seed", s.index)));
            }
        }
        Ok(())
    }

    /// Write `manifest.txt` and one PGM per sample into `dir`.
    pub fn emit(&self, stack: &GeoStack, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::write_failure(dir, e))?;
        for rec in &self.samples {
            let sample = render_sample(stack, rec)?;
            write_pgm8(&dir.join(rec.file_name()), &sample.image)?;
        }
        self.write(&dir.join("manifest.txt"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::GeoTransform;
    use crate::rng::StreamRng;

    fn stack_with(images: Vec<(&str, Raster)>, target: (f64, f64)) -> GeoStack {
        let imgs = images
            .into_iter()
            .map(|(id, r)| GeoImage {
                pixels: r,
                geo: GeoTransform::IDENTITY,
                image_id: id.into(),
                mode_tag: String::new(),
            })
            .collect();
        GeoStack::new(imgs, target).unwrap()
    }

    fn ramp(n: usize) -> Raster {
        Raster::from_fn(n, n, |x, y| ((x * 7 + y * 13) % 97) as f32 / 96.0)
    }

    fn frozen() -> SamplerConfig {
        SamplerConfig {
            yaw_range: 0.0,
            zoom_min: 1.0,
            zoom_max: 1.0,
            tilt_max: 0.0,
            jitter_translation: 0.0,
            view_size: 64,
            target_in_view_margin: 8.0,
            focal_px: 64.0,
        }
    }

    #[test]
    fn frozen_sampler_is_pure_translation() {
        let stack = stack_with(vec![("a", ramp(128))], (70.0, 50.0));
        let mut rng = StreamRng::new(1);
        let t = sample_view(&mut rng, &frozen(), &stack).unwrap();
        let c = 31.5;
        let expected = homography::translation(70.0 - c, 50.0 - c);
        assert!((t.h - expected).norm() < 1e-12);
        let p = project_target(&t, (70.0, 50.0)).unwrap();
        assert!((p.0 - c).abs() < 1e-12 && (p.1 - c).abs() < 1e-12);
    }

    #[test]
    fn quarter_turn_view_axis() {
        let params = ViewParams {
            yaw: std::f64::consts::FRAC_PI_2,
            zoom: 1.0,
            tilt_x: 0.0,
            tilt_y: 0.0,
            target_view: (31.5, 31.5),
        };
        let h = compose_view(&params, (50.0, 50.0), 64, 64.0).unwrap();
        let a = homography::apply(&h, (31.5, 31.5)).unwrap();
        let b = homography::apply(&h, (32.5, 31.5)).unwrap();
        assert!((b.0 - a.0).abs() < 1e-12 && (b.1 - a.1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejection_overflow_when_infeasible() {
        let stack = stack_with(vec![("a", ramp(128))], (70.0, 50.0));
        let cfg = SamplerConfig {
            target_in_view_margin: 40.0,
            ..frozen()
        };
        let mut rng = StreamRng::new(1);
        assert!(matches!(
            sample_view(&mut rng, &cfg, &stack),
            Err(Error::RejectionOverflow(_))
        ));
    }

    #[test]
    fn seeded_sampling_is_repeatable() {
        let stack = stack_with(vec![("a", ramp(512)), ("b", ramp(512))], (256.0, 256.0));
        let cfg = SamplerConfig::default();
        let draw = || {
            let mut rng = StreamRng::derive(42, domain::TRAIN_VIEWS, 0);
            sample_view(&mut rng, &cfg, &stack).unwrap()
        };
        let (a, b) = (draw(), draw());
        let bytes = |t: &ViewTransform| t.h.iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>();
        assert_eq!(bytes(&a), bytes(&b));
        assert_eq!(a.source_image_id, b.source_image_id);
    }

    #[test]
    fn identity_and_integer_shift_warps() {
        let src = ramp(96);
        let id = ViewTransform::identity("a", 64);
        let out = warp(&src, &id).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(out.image.get(x, y), src.get(x, y));
            }
        }
        let shifted = ViewTransform {
            h: homography::translation(3.0, 0.0),
            ..id
        };
        let out = warp(&src, &shifted).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                assert_eq!(out.image.get(x, y), src.get(x + 3, y));
            }
        }
    }

    #[test]
    fn out_of_bounds_is_zero_and_masked() {
        let src = Raster::from_fn(64, 64, |_, _| 1.0);
        let t = ViewTransform {
            h: homography::translation(-10.0, 0.0),
            ..ViewTransform::identity("a", 64)
        };
        let out = warp(&src, &t).unwrap();
        assert_eq!(out.image.get(5, 5), 0.0);
        assert!(!out.valid[5 * 64 + 5]);
        assert_eq!(out.image.get(20, 5), 1.0);
        assert!(out.valid[5 * 64 + 20]);
    }

    #[test]
    fn half_pixel_bilinear() {
        let src = Raster::from_fn(64, 64, |x, _| if x >= 10 { 1.0 } else { 0.0 });
        let t = ViewTransform {
            h: homography::translation(9.5, 0.0),
            ..ViewTransform::identity("a", 8)
        };
        let out = warp(&src, &t).unwrap();
        assert_eq!(out.image.get(0, 0), 0.5);
    }

    #[test]
    fn singular_warp_rejected() {
        let t = ViewTransform {
            h: Mat3::zeros(),
            ..ViewTransform::identity("a", 8)
        };
        assert!(matches!(warp(&ramp(16), &t), Err(Error::SingularTransform)));
    }

    #[test]
    fn project_target_examples() {
        let id = ViewTransform::identity("a", 64);
        assert_eq!(project_target(&id, (10.0, 20.0)).unwrap(), (10.0, 20.0));
        let t = ViewTransform {
            h: homography::translation(5.0, 7.0),
            ..id
        };
        let p = project_target(&t, (10.0, 20.0)).unwrap();
        assert!((p.0 - 5.0).abs() < 1e-12 && (p.1 - 13.0).abs() < 1e-12);
    }

    #[test]
    fn dataset_counts_and_restriction() {
        let stack = stack_with(
            vec![("i1", ramp(256)), ("i2", ramp(256)), ("i3", ramp(256)), ("i4", ramp(256))],
            (128.0, 128.0),
        );
        let cfg = SamplerConfig {
            view_size: 64,
            zoom_max: 2.0,
            jitter_translation: 20.0,
            ..SamplerConfig::default()
        };
        let restriction = SourceRestriction {
            train: Some(vec!["i1".into(), "i2".into()]),
            test: Some(vec!["i3".into(), "i4".into()]),
        };
        let m = generate_dataset(&stack, &cfg, 40, 40, 5, &restriction).unwrap();
        assert_eq!(m.samples.len(), 80);
        for s in m.split(Split::Test) {
            assert!(!["i1", "i2"].contains(&s.transform.source_image_id.as_str()));
        }
        for s in m.split(Split::Train) {
            assert!(["i1", "i2"].contains(&s.transform.source_image_id.as_str()));
        }
        m.check_disjoint().unwrap();
        assert!(matches!(
            generate_dataset(&stack, &cfg, 0, 1, 5, &SourceRestriction::default()),
            Err(Error::InvalidCount(_))
        ));
    }

    #[test]
    fn manifest_text_round_trip_is_exact() {
        let stack = stack_with(vec![("a", ramp(256))], (128.0, 120.0));
        let cfg = SamplerConfig {
            view_size: 64,
            jitter_translation: 20.0,
            ..SamplerConfig::default()
        };
        let m = generate_dataset(&stack, &cfg, 2, 1, 77, &SourceRestriction::default()).unwrap();
        let text = m.to_text();
        let back = DatasetManifest::parse(&text).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.to_text(), text);
    }
}

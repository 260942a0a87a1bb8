//! Georeferenced reference images: affine geotransforms, world files,
//! radiometric normalization and stack manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::raster::{read_raw, Raster};

/// Smallest side accepted for an image in a reference stack.
pub const MIN_STACK_SIDE: usize = 64;

/// Six-parameter affine map from pixel `(u, v)` = (column, row) to world
/// `(easting, northing)`:
///
/// ```text
/// easting  = origin_easting  + u * pixel_width   + v * row_rotation
/// northing = origin_northing + u * col_rotation  + v * pixel_height
/// ```
///
/// The origin is the center of the upper-left pixel, as in world files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeoTransform {
    pub origin_easting: f64,
    pub origin_northing: f64,
    pub pixel_width: f64,
    pub pixel_height: f64,
    pub row_rotation: f64,
    pub col_rotation: f64,
}

impl GeoTransform {
    pub const IDENTITY: GeoTransform = GeoTransform {
        origin_easting: 0.0,
        origin_northing: 0.0,
        pixel_width: 1.0,
        pixel_height: 1.0,
        row_rotation: 0.0,
        col_rotation: 0.0,
    };

    pub fn north_up(origin_easting: f64, origin_northing: f64, gsd: f64) -> Self {
        GeoTransform {
            origin_easting,
            origin_northing,
            pixel_width: gsd,
            pixel_height: -gsd,
            row_rotation: 0.0,
            col_rotation: 0.0,
        }
    }

    pub fn determinant(&self) -> f64 {
        self.pixel_width * self.pixel_height - self.row_rotation * self.col_rotation
    }

    fn check_invertible(&self) -> Result<f64> {
        let det = self.determinant();
        let scale = (self.pixel_width.abs() + self.row_rotation.abs())
            * (self.pixel_height.abs() + self.col_rotation.abs());
        if !det.is_finite() || det == 0.0 || det.abs() <= 1e-15 * scale {
            return Err(Error::SingularGeoTransform);
        }
        Ok(det)
    }

    pub fn pixel_to_world(&self, (u, v): (f64, f64)) -> (f64, f64) {
        (
            self.origin_easting + u * self.pixel_width + v * self.row_rotation,
            self.origin_northing + u * self.col_rotation + v * self.pixel_height,
        )
    }

    pub fn world_to_pixel(&self, (e, n): (f64, f64)) -> Result<(f64, f64)> {
        let det = self.check_invertible()?;
        let de = e - self.origin_easting;
        let dn = n - self.origin_northing;
        Ok((
            (self.pixel_height * de - self.row_rotation * dn) / det,
            (self.pixel_width * dn - self.col_rotation * de) / det,
        ))
    }

    /// Parse the classic six-line world file (A, D, B, E, C, F).
    pub fn parse_world_file(text: &str) -> Result<Self> {
        let values: Vec<f64> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| Error::MalformedWorldFile(format!("not a number: {tok:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != 6 {
            return Err(Error::MalformedWorldFile(format!(
                "expected 6 values, found {}",
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::MalformedWorldFile("non-finite value".into()));
        }
        let geo = GeoTransform {
            pixel_width: values[0],
            col_rotation: values[1],
            row_rotation: values[2],
            pixel_height: values[3],
            origin_easting: values[4],
            origin_northing: values[5],
        };
        if geo.pixel_width == 0.0 || geo.pixel_height == 0.0 {
            return Err(Error::MalformedWorldFile("zero pixel size".into()));
        }
        geo.check_invertible()
            .map_err(|_| Error::MalformedWorldFile("degenerate affine".into()))?;
        Ok(geo)
    }

    pub fn to_world_file(&self) -> String {
        [
            self.pixel_width,
            self.col_rotation,
            self.row_rotation,
            self.pixel_height,
            self.origin_easting,
            self.origin_northing,
        ]
        .iter()
        .map(|v| format!("{v:.17e}\n"))
        .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeoImage {
    pub pixels: Raster,
    pub geo: GeoTransform,
    pub image_id: String,
    pub mode_tag: String,
}

impl GeoImage {
    pub fn width(&self) -> usize {
        self.pixels.width
    }

    pub fn height(&self) -> usize {
        self.pixels.height
    }

    pub fn contains_pixel(&self, (u, v): (f64, f64)) -> bool {
        u >= 0.0 && v >= 0.0 && u <= (self.width() - 1) as f64 && v <= (self.height() - 1) as f64
    }
}

/// Load a raster plus its world file. Pixels are scaled by the nominal
/// full-scale value of their bit depth.
pub fn load_geo_image(
    raster_path: &Path,
    world_file_path: &Path,
    mode_tag: &str,
) -> Result<GeoImage> {
    let raw = read_raw(raster_path)?;
    let pixels = raw.to_unit()?;
    let text = fs::read_to_string(world_file_path).map_err(|e| {
        Error::MalformedWorldFile(format!("{}: {e}", world_file_path.display()))
    })?;
    let geo = GeoTransform::parse_world_file(&text)?;
    let image_id = raster_path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(GeoImage {
        pixels,
        geo,
        image_id,
        mode_tag: mode_tag.to_string(),
    })
}

/// Quantile by linear interpolation between order statistics
/// (position `p * (n - 1)` in the sorted sample).
pub fn quantile_sorted(sorted: &[f32], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    let frac = pos - lo as f64;
    sorted[lo] as f64 + frac * (sorted[hi] as f64 - sorted[lo] as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Radiometry {
    pub clip_percentile: f64,
    pub gamma: f64,
}

impl Default for Radiometry {
    fn default() -> Self {
        Radiometry {
            clip_percentile: 0.002,
            gamma: 0.5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub image: GeoImage,
    /// Set when the clip quantiles coincide; the image is then all zeros.
    pub degenerate_range: bool,
}

/// Percentile-clipped min-max stretch followed by gamma correction.
pub fn preprocess_radiometry(img: &GeoImage, clip_percentile: f64, gamma: f64) -> Result<Normalized> {
    if !(0.0..0.5).contains(&clip_percentile) || !(gamma > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "radiometry needs 0 <= clip < 0.5 and gamma > 0 (got {clip_percentile}, {gamma})"
        )));
    }
    let mut sorted = img.pixels.data.clone();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let lo = quantile_sorted(&sorted, clip_percentile);
    let hi = quantile_sorted(&sorted, 1.0 - clip_percentile);
    let mut out = img.clone();
    if hi <= lo {
        out.pixels.data.iter_mut().for_each(|v| *v = 0.0);
        return Ok(Normalized {
            image: out,
            degenerate_range: true,
        });
    }
    let span = hi - lo;
    for v in out.pixels.data.iter_mut() {
        let t = ((*v as f64 - lo) / span).clamp(0.0, 1.0);
        *v = t.powf(gamma) as f32;
    }
    Ok(Normalized {
        image: out,
        degenerate_range: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetAnnotation {
    pub world_position: (f64, f64),
    pub per_image_pixel: BTreeMap<String, (f64, f64)>,
}

impl TargetAnnotation {
    /// Project the world position into every image; errors name the first
    /// image that does not contain the target.
    pub fn annotate(world_position: (f64, f64), images: &[GeoImage]) -> Result<Self> {
        let mut per_image_pixel = BTreeMap::new();
        for img in images {
            let px = img.geo.world_to_pixel(world_position)?;
            if !img.contains_pixel(px) {
                return Err(Error::Annotation {
                    image_id: img.image_id.clone(),
                    reason: format!(
                        "target pixel ({:.2}, {:.2}) outside {}x{} image",
                        px.0,
                        px.1,
                        img.width(),
                        img.height()
                    ),
                });
            }
            per_image_pixel.insert(img.image_id.clone(), px);
        }
        Ok(TargetAnnotation {
            world_position,
            per_image_pixel,
        })
    }

    pub fn pixel_in(&self, image_id: &str) -> Result<(f64, f64)> {
        self.per_image_pixel
            .get(image_id)
            .copied()
            .ok_or_else(|| Error::Annotation {
                image_id: image_id.to_string(),
                reason: "image is not annotated".into(),
            })
    }
}

/// A validated reference stack.
#[derive(Debug, Clone)]
pub struct GeoStack {
    pub images: Vec<GeoImage>,
    pub target: TargetAnnotation,
}

impl GeoStack {
    pub fn new(images: Vec<GeoImage>, world_position: (f64, f64)) -> Result<Self> {
        if images.is_empty() {
            return Err(Error::EmptyInput("reference stack"));
        }
        let mut seen = std::collections::BTreeSet::new();
        for img in &images {
            if img.width() < MIN_STACK_SIDE || img.height() < MIN_STACK_SIDE {
                return Err(Error::ImageTooSmall {
                    id: img.image_id.clone(),
                    width: img.width(),
                    height: img.height(),
                    min: MIN_STACK_SIDE,
                });
            }
            if !seen.insert(img.image_id.clone()) {
                return Err(Error::Manifest(format!("duplicate image id {:?}", img.image_id)));
            }
        }
        let target = TargetAnnotation::annotate(world_position, &images)?;
        Ok(GeoStack { images, target })
    }

    pub fn image(&self, id: &str) -> Option<&GeoImage> {
        self.images.iter().find(|i| i.image_id == id)
    }

    pub fn ids(&self) -> Vec<String> {
        self.images.iter().map(|i| i.image_id.clone()).collect()
    }

    /// Sub-stack with the listed ids, in the listed order.
    pub fn subset(&self, ids: &[String]) -> Result<GeoStack> {
        let images = ids
            .iter()
            .map(|id| {
                self.image(id)
                    .cloned()
                    .ok_or_else(|| Error::Manifest(format!("unknown image id {id:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        GeoStack::new(images, self.target.world_position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackEntry {
    pub id: String,
    pub raster: PathBuf,
    pub world_file: PathBuf,
    #[serde(default)]
    pub mode: String,
    /// Optional hand-measured target pixel; must agree with the world position.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_pixel: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetEntry {
    pub easting: f64,
    pub northing: f64,
}

/// On-disk stack description (TOML). Paths are relative to the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackManifest {
    pub target: TargetEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radiometry: Option<Radiometry>,
    #[serde(rename = "image")]
    pub images: Vec<StackEntry>,
}

#[derive(Debug, Clone)]
pub struct LoadedStack {
    pub stack: GeoStack,
    pub degenerate: Vec<String>,
}

impl StackManifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::write_failure(path, e))?;
        fs::write(path, text).map_err(|e| Error::write_failure(path, e))
    }

    pub fn load(&self, base_dir: &Path) -> Result<LoadedStack> {
        let mut images = Vec::with_capacity(self.images.len());
        let mut degenerate = Vec::new();
        for entry in &self.images {
            let mut img = load_geo_image(
                &base_dir.join(&entry.raster),
                &base_dir.join(&entry.world_file),
                &entry.mode,
            )?;
            img.image_id = entry.id.clone();
            if let Some(r) = self.radiometry {
                let n = preprocess_radiometry(&img, r.clip_percentile, r.gamma)?;
                if n.degenerate_range {
                    degenerate.push(entry.id.clone());
                }
                img = n.image;
            }
            images.push(img);
        }
        let stack = GeoStack::new(images, (self.target.easting, self.target.northing))?;
        for entry in &self.images {
            if let Some(measured) = entry.target_pixel {
                let px = stack.target.pixel_in(&entry.id)?;
                let d = ((px.0 - measured.0).powi(2) + (px.1 - measured.1).powi(2)).sqrt();
                if d > 0.5 {
                    return Err(Error::Annotation {
                        image_id: entry.id.clone(),
                        reason: format!("measured target pixel is {d:.2}px from the georeferenced one"),
                    });
                }
            }
        }
        Ok(LoadedStack { stack, degenerate })
    }
}

pub fn load_stack(manifest_path: &Path) -> Result<LoadedStack> {
    let manifest = StackManifest::read(manifest_path)?;
    let base = manifest_path.parent().unwrap_or_else(|| Path::new("."));
    manifest.load(base)
}

use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Matrix3, Vector3};

use super::{SiftConfig, MIN_IMAGE_SIDE};
use crate::error::{Error, Result};
use crate::raster::Raster;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Keypoint {
    /// Position in input-image pixels.
    pub position: (f64, f64),
    /// Blur scale in input-image pixels.
    pub scale: f64,
    /// Dominant gradient direction, `atan2(dy, dx)` in `[0, 2pi)`.
    pub orientation: f64,
    /// Interpolated DoG value at the extremum.
    pub response: f64,
    pub octave: usize,
    /// Gaussian layer of the extremum within its octave.
    pub layer: usize,
    /// Scale relative to the octave's pixel grid.
    pub octave_scale: f64,
}

/// Gaussian and difference-of-Gaussian pyramids of one image.
#[derive(Debug, Clone)]
pub struct ScaleSpace {
    pub gauss: Vec<Vec<Raster>>,
    pub dog: Vec<Vec<Raster>>,
    pub scales_per_octave: usize,
    pub sigma0: f64,
}

fn gaussian_kernel(sigma: f64) -> Vec<f32> {
    let r = (3.0 * sigma).ceil().max(1.0) as isize;
    let mut k: Vec<f64> = (-r..=r).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k.into_iter().map(|v| v as f32).collect()
}

/// Separable Gaussian blur with replicated borders.
pub fn blur(img: &Raster, sigma: f64) -> Raster {
    let k = gaussian_kernel(sigma);
    let r = k.len() / 2;
    let (w, h) = (img.width, img.height);
    let mut tmp = Raster::new(w, h);
    let mut padded = vec![0f32; w + 2 * r];
    for y in 0..h {
        let row = img.row(y);
        padded[r..r + w].copy_from_slice(row);
        for i in 0..r {
            padded[i] = row[0];
            padded[r + w + i] = row[w - 1];
        }
        let out = &mut tmp.data[y * w..(y + 1) * w];
        for (x, o) in out.iter_mut().enumerate() {
            *o = k.iter().zip(&padded[x..x + k.len()]).map(|(a, b)| a * b).sum();
        }
    }
    let mut out = Raster::new(w, h);
    for y in 0..h {
        let dst = &mut out.data[y * w..(y + 1) * w];
        for (j, &kv) in k.iter().enumerate() {
            let sy = (y + j).saturating_sub(r).min(h - 1);
            for (d, &s) in dst.iter_mut().zip(tmp.row(sy)) {
                *d += kv * s;
            }
        }
    }
    out
}

fn downsample(img: &Raster) -> Raster {
    let (w, h) = (img.width / 2, img.height / 2);
    Raster::from_fn(w, h, |x, y| img.get(2 * x, 2 * y))
}

fn subtract(a: &Raster, b: &Raster) -> Raster {
    Raster {
        width: a.width,
        height: a.height,
        data: a.data.iter().zip(&b.data).map(|(x, y)| y - x).collect(),
    }
}

impl ScaleSpace {
    pub fn build(img: &Raster, cfg: &SiftConfig) -> Result<Self> {
        if img.width.min(img.height) < MIN_IMAGE_SIDE {
            return Err(Error::ImageTooSmall {
                id: "sift input".into(),
                width: img.width,
                height: img.height,
                min: MIN_IMAGE_SIDE,
            });
        }
        let s = cfg.scales_per_octave;
        let k = 2f64.powf(1.0 / s as f64);
        let sig: Vec<f64> = (0..s + 3).map(|i| cfg.sigma0 * k.powi(i as i32)).collect();
        let first = (cfg.sigma0 * cfg.sigma0 - cfg.assumed_blur * cfg.assumed_blur).max(0.01).sqrt();
        let mut base = blur(img, first);
        let mut gauss = Vec::new();
        let mut dog = Vec::new();
        loop {
            let mut layers = vec![base];
            for i in 1..s + 3 {
                let inc = (sig[i] * sig[i] - sig[i - 1] * sig[i - 1]).sqrt();
                let next = blur(&layers[i - 1], inc);
                layers.push(next);
            }
            dog.push(layers.windows(2).map(|p| subtract(&p[0], &p[1])).collect());
            let next = downsample(&layers[s]);
            gauss.push(layers);
            if next.width.min(next.height) < cfg.min_octave_side {
                break;
            }
            base = next;
        }
        Ok(ScaleSpace {
            gauss,
            dog,
            scales_per_octave: s,
            sigma0: cfg.sigma0,
        })
    }
}

const BORDER: usize = 5;
const MAX_REFINE_STEPS: usize = 5;
const ORI_BINS: usize = 36;
const ORI_PEAK_RATIO: f64 = 0.8;

fn is_extremum(dog: &[Raster], l: usize, x: usize, y: usize) -> bool {
    let v = dog[l].get(x, y);
    let mut is_max = true;
    let mut is_min = true;
    for (dl, img) in dog[l - 1..=l + 1].iter().enumerate() {
        for yy in y - 1..=y + 1 {
            for xx in x - 1..=x + 1 {
                if dl == 1 && yy == y && xx == x {
                    continue;
                }
                let n = img.get(xx, yy);
                is_max &= v > n;
                is_min &= v < n;
            }
        }
        if !is_max && !is_min {
            return false;
        }
    }
    true
}

/// Quadratic refinement of a DoG extremum; returns `(x, y, layer, offset, value)`.
fn refine(
    dog: &[Raster],
    mut x: usize,
    mut y: usize,
    mut l: usize,
    cfg: &SiftConfig,
) -> Option<(usize, usize, usize, Vector3<f64>, f64)> {
    let s = cfg.scales_per_octave;
    let (w, h) = (dog[0].width, dog[0].height);
    for _ in 0..MAX_REFINE_STEPS {
        let d = |dl: isize, dy: isize, dx: isize| -> f64 {
            dog[(l as isize + dl) as usize].get((x as isize + dx) as usize, (y as isize + dy) as usize) as f64
        };
        let v = d(0, 0, 0);
        let g = Vector3::new(
            (d(0, 0, 1) - d(0, 0, -1)) / 2.0,
            (d(0, 1, 0) - d(0, -1, 0)) / 2.0,
            (d(1, 0, 0) - d(-1, 0, 0)) / 2.0,
        );
        let dxx = d(0, 0, 1) + d(0, 0, -1) - 2.0 * v;
        let dyy = d(0, 1, 0) + d(0, -1, 0) - 2.0 * v;
        let dss = d(1, 0, 0) + d(-1, 0, 0) - 2.0 * v;
        let dxy = (d(0, 1, 1) - d(0, 1, -1) - d(0, -1, 1) + d(0, -1, -1)) / 4.0;
        let dxs = (d(1, 0, 1) - d(1, 0, -1) - d(-1, 0, 1) + d(-1, 0, -1)) / 4.0;
        let dys = (d(1, 1, 0) - d(1, -1, 0) - d(-1, 1, 0) + d(-1, -1, 0)) / 4.0;
        let hess = Matrix3::new(dxx, dxy, dxs, dxy, dyy, dys, dxs, dys, dss);
        let off = -(hess.try_inverse()? * g);
        if off.iter().all(|o| o.abs() < 0.5) {
            let value = v + 0.5 * g.dot(&off);
            if value.abs() * (s as f64) < cfg.contrast_threshold {
                return None;
            }
            let tr = dxx + dyy;
            let det = dxx * dyy - dxy * dxy;
            let r = cfg.edge_ratio;
            if det <= 0.0 || tr * tr * r >= (r + 1.0) * (r + 1.0) * det {
                return None;
            }
            return Some((x, y, l, off, value));
        }
        if off.iter().any(|o| o.abs() > 1e6) {
            return None;
        }
        let nx = x as f64 + off[0].round();
        let ny = y as f64 + off[1].round();
        let nl = l as f64 + off[2].round();
        if nl < 1.0 || nl > s as f64 || nx < BORDER as f64 || ny < BORDER as f64 {
            return None;
        }
        if nx >= (w - BORDER) as f64 || ny >= (h - BORDER) as f64 {
            return None;
        }
        x = nx as usize;
        y = ny as usize;
        l = nl as usize;
    }
    None
}

/// Gradient magnitude and angle at an interior pixel.
#[inline]
pub(crate) fn gradient(img: &Raster, x: usize, y: usize) -> (f64, f64) {
    let dx = img.get(x + 1, y) as f64 - img.get(x - 1, y) as f64;
    let dy = img.get(x, y + 1) as f64 - img.get(x, y - 1) as f64;
    ((dx * dx + dy * dy).sqrt(), dy.atan2(dx))
}

fn orientations(img: &Raster, x: f64, y: f64, sigma: f64) -> Vec<f64> {
    let sig = 1.5 * sigma;
    let radius = (3.0 * sig).round() as isize;
    let (cx, cy) = (x.round() as isize, y.round() as isize);
    let mut hist = [0f64; ORI_BINS];
    for j in -radius..=radius {
        for i in -radius..=radius {
            let (px, py) = (cx + i, cy + j);
            if px < 1 || py < 1 || px >= img.width as isize - 1 || py >= img.height as isize - 1 {
                continue;
            }
            let (mag, ang) = gradient(img, px as usize, py as usize);
            let wt = (-((i * i + j * j) as f64) / (2.0 * sig * sig)).exp();
            let bin = ((ang.rem_euclid(TAU)) * ORI_BINS as f64 / TAU).round() as usize % ORI_BINS;
            hist[bin] += wt * mag;
        }
    }
    let n = ORI_BINS;
    let smooth: Vec<f64> = (0..n)
        .map(|i| {
            (hist[(i + n - 2) % n] + hist[(i + 2) % n]) / 16.0
                + (hist[(i + n - 1) % n] + hist[(i + 1) % n]) * 4.0 / 16.0
                + hist[i] * 6.0 / 16.0
        })
        .collect();
    let max = smooth.iter().cloned().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..n {
        let (l, c, r) = (smooth[(i + n - 1) % n], smooth[i], smooth[(i + 1) % n]);
        if c > l && c > r && c >= ORI_PEAK_RATIO * max {
            let bin = i as f64 + 0.5 * (l - r) / (l - 2.0 * c + r);
            out.push((bin * TAU / n as f64).rem_euclid(TAU));
        }
    }
    out
}

/// Keypoints of an already built scale space.
pub fn detect_in(space: &ScaleSpace, cfg: &SiftConfig) -> Vec<Keypoint> {
    let s = space.scales_per_octave;
    let pre = 0.5 * cfg.contrast_threshold / s as f64;
    let mut kps = Vec::new();
    for (o, dog) in space.dog.iter().enumerate() {
        let (w, h) = (dog[0].width, dog[0].height);
        if w <= 2 * BORDER || h <= 2 * BORDER {
            continue;
        }
        let step = 2f64.powi(o as i32);
        for l in 1..=s {
            for y in BORDER..h - BORDER {
                for x in BORDER..w - BORDER {
                    let v = dog[l].get(x, y) as f64;
                    if v.abs() <= pre || !is_extremum(dog, l, x, y) {
                        continue;
                    }
                    let Some((rx, ry, rl, off, value)) = refine(dog, x, y, l, cfg) else {
                        continue;
                    };
                    let ox = rx as f64 + off[0];
                    let oy = ry as f64 + off[1];
                    let octave_scale = space.sigma0 * 2f64.powf((rl as f64 + off[2]) / s as f64);
                    let g = &space.gauss[o][rl];
                    for ori in orientations(g, ox, oy, octave_scale) {
                        kps.push(Keypoint {
                            position: (ox * step, oy * step),
                            scale: octave_scale * step,
                            orientation: ori,
                            response: value,
                            octave: o,
                            layer: rl,
                            octave_scale,
                        });
                    }
                }
            }
        }
    }
    kps
}

/// Detect keypoints on an image with values in [0, 1].
pub fn detect_keypoints(img: &Raster, cfg: &SiftConfig) -> Result<Vec<Keypoint>> {
    Ok(detect_in(&ScaleSpace::build(img, cfg)?, cfg))
}

/// Tab-separated `u v scale orientation response`, one keypoint per line.
pub fn write_keypoints(path: &Path, kps: &[Keypoint]) -> Result<()> {
    let mut out = String::from("u\tv\tscale\torientation\tresponse\n");
    for k in kps {
        writeln!(
            out,
            "{:.4}\t{:.4}\t{:.4}\t{:.6}\t{:.6e}",
            k.position.0, k.position.1, k.scale, k.orientation, k.response
        )
        .unwrap();
    }
    crate::raster::write_bytes(path, out.as_bytes())
}

//! Procedural reference scenes for experiments without real imagery.
//!
//! A scene is a patchwork of parcels (jittered-grid Voronoi cells, each with
//! its own brightness and crop-row texture) crossed by roads and dotted with
//! buildings, over low-frequency noise. The layout is fixed by the scene
//! seed; each acquisition ("date") perturbs parcel brightness, row phase,
//! gain and fine noise. The snow appearance covers most of the ground with
//! a flat bright layer and inverts the contrast of what remains, keeping
//! only the roads dark.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geo::{GeoImage, GeoStack, GeoTransform};
use crate::raster::Raster;
use crate::rng::{domain, mix64, StreamRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Appearance {
    Base,
    Snow,
}

impl Appearance {
    pub fn tag(self) -> &'static str {
        match self {
            Appearance::Base => "no-snow",
            Appearance::Snow => "snow",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SceneConfig {
    pub size: usize,
    pub seed: u64,
    /// Ground sampling distance, world units per pixel.
    pub gsd: f64,
    pub origin: (f64, f64),
    /// Target position as a fraction of the scene size.
    pub target_frac: (f64, f64),
    pub parcel_spacing: f64,
    pub roads: usize,
    pub buildings: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            size: 1024,
            seed: 7,
            gsd: 10.0,
            origin: (500_000.0, 4_800_000.0),
            target_frac: (0.55, 0.45),
            parcel_spacing: 48.0,
            roads: 14,
            buildings: 500,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Parcel {
    x: f64,
    y: f64,
    level: f64,
    stripe_dir: (f64, f64),
    stripe_freq: f64,
    stripe_amp: f64,
}

#[derive(Debug, Clone, Copy)]
struct Road {
    a: (f64, f64),
    b: (f64, f64),
    half_width: f64,
    level: f64,
}

#[derive(Debug, Clone, Copy)]
struct Building {
    cx: f64,
    cy: f64,
    hw: f64,
    hh: f64,
    angle: f64,
    level: f64,
}

/// Fixed layout of a scene; render it per date and appearance.
#[derive(Debug, Clone)]
pub struct Scene {
    pub config: SceneConfig,
    grid: usize,
    parcels: Vec<Parcel>,
    roads: Vec<Road>,
    buildings: Vec<Building>,
}

/// Smooth lattice noise in [-1, 1] (hash-based value noise, quintic fade).
pub fn value_noise(seed: u64, x: f64, y: f64) -> f64 {
    let xi = x.floor();
    let yi = y.floor();
    let fx = x - xi;
    let fy = y - yi;
    let fade = |t: f64| t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
    let lattice = |ix: i64, iy: i64| -> f64 {
        let h = mix64(seed ^ mix64((ix as u64).wrapping_mul(0x9E37_79B9) ^ (iy as u64).wrapping_shl(32)));
        (h >> 11) as f64 / (1u64 << 52) as f64 - 1.0
    };
    let (ix, iy) = (xi as i64, yi as i64);
    let (u, v) = (fade(fx), fade(fy));
    let a = lattice(ix, iy) + u * (lattice(ix + 1, iy) - lattice(ix, iy));
    let b = lattice(ix, iy + 1) + u * (lattice(ix + 1, iy + 1) - lattice(ix, iy + 1));
    a + v * (b - a)
}

pub fn fbm(seed: u64, x: f64, y: f64, base_period: f64, octaves: usize) -> f64 {
    let mut sum = 0.0;
    let mut amp = 1.0;
    let mut norm = 0.0;
    let mut freq = 1.0 / base_period;
    for o in 0..octaves {
        sum += amp * value_noise(seed.wrapping_add(o as u64 * 7919), x * freq, y * freq);
        norm += amp;
        amp *= 0.5;
        freq *= 2.0;
    }
    sum / norm
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let (qx, qy) = (a.0 + t * dx, a.1 + t * dy);
    ((p.0 - qx).powi(2) + (p.1 - qy).powi(2)).sqrt()
}

impl Scene {
    pub fn new(config: SceneConfig) -> Self {
        let mut rng = StreamRng::derive(config.seed, domain::SCENE, 0);
        let size = config.size as f64;
        let grid = (size / config.parcel_spacing).ceil().max(1.0) as usize;
        let cell = size / grid as f64;
        let mut parcels = Vec::with_capacity(grid * grid);
        for gy in 0..grid {
            for gx in 0..grid {
                let theta = rng.range(0.0, std::f64::consts::PI);
                parcels.push(Parcel {
                    x: (gx as f64 + rng.range(0.1, 0.9)) * cell,
                    y: (gy as f64 + rng.range(0.1, 0.9)) * cell,
                    level: rng.range(0.15, 0.85),
                    stripe_dir: (theta.cos(), theta.sin()),
                    stripe_freq: rng.range(0.15, 0.6),
                    stripe_amp: if rng.uniform() < 0.6 { rng.range(0.04, 0.14) } else { 0.0 },
                });
            }
        }
        let mut roads = Vec::with_capacity(config.roads);
        for _ in 0..config.roads {
            let a = (rng.range(-0.1, 1.1) * size, rng.range(-0.1, 1.1) * size);
            let ang = rng.range(0.0, std::f64::consts::TAU);
            let len = rng.range(0.3, 0.9) * size;
            roads.push(Road {
                a,
                b: (a.0 + len * ang.cos(), a.1 + len * ang.sin()),
                half_width: rng.range(1.2, 3.0),
                level: if rng.uniform() < 0.7 { 0.08 } else { 0.93 },
            });
        }
        let mut buildings = Vec::with_capacity(config.buildings);
        for _ in 0..config.buildings {
            buildings.push(Building {
                cx: rng.range(0.0, size),
                cy: rng.range(0.0, size),
                hw: rng.range(1.5, 6.0),
                hh: rng.range(1.5, 6.0),
                angle: rng.range(0.0, std::f64::consts::PI),
                level: if rng.uniform() < 0.5 { rng.range(0.0, 0.15) } else { rng.range(0.85, 1.0) },
            });
        }
        Scene {
            config,
            grid,
            parcels,
            roads,
            buildings,
        }
    }

    pub fn target_pixel(&self) -> (f64, f64) {
        let s = self.config.size as f64;
        (self.config.target_frac.0 * s + 0.3, self.config.target_frac.1 * s + 0.7)
    }

    pub fn geotransform(&self) -> GeoTransform {
        GeoTransform::north_up(self.config.origin.0, self.config.origin.1, self.config.gsd)
    }

    pub fn target_world(&self) -> (f64, f64) {
        self.geotransform().pixel_to_world(self.target_pixel())
    }

    fn nearest_parcel(&self, x: f64, y: f64) -> usize {
        let cell = self.config.size as f64 / self.grid as f64;
        let gx = ((x / cell).floor() as i64).clamp(0, self.grid as i64 - 1);
        let gy = ((y / cell).floor() as i64).clamp(0, self.grid as i64 - 1);
        let mut best = (f64::INFINITY, 0usize);
        for oy in -2..=2 {
            for ox in -2..=2 {
                let (nx, ny) = (gx + ox, gy + oy);
                if nx < 0 || ny < 0 || nx >= self.grid as i64 || ny >= self.grid as i64 {
                    continue;
                }
                let idx = ny as usize * self.grid + nx as usize;
                let p = &self.parcels[idx];
                let d = (p.x - x).powi(2) + (p.y - y).powi(2);
                if d < best.0 {
                    best = (d, idx);
                }
            }
        }
        best.1
    }

    /// Render one acquisition. Different `date`s of the same appearance
    /// share the layout but not the fine detail.
    pub fn render(&self, date: u64, appearance: Appearance) -> Raster {
        let n = self.config.size;
        let seed = self.config.seed;
        let mut rng = StreamRng::derive(seed, domain::SCENE, 1 + date);
        let gain = rng.range(0.9, 1.1);
        let offset = rng.range(-0.04, 0.04);
        let level_shift: Vec<f64> = (0..self.parcels.len())
            .map(|_| if rng.uniform() < 0.2 { rng.range(-0.15, 0.15) } else { 0.0 })
            .collect();
        let phase: Vec<f64> = (0..self.parcels.len()).map(|_| rng.range(0.0, 1.0)).collect();
        let noise_seed = rng.next_u64();
        let snow_seed = mix64(seed ^ 0x5a5a);

        let mut ground = Raster::from_fn(n, n, |x, y| {
            let (xf, yf) = (x as f64, y as f64);
            let idx = self.nearest_parcel(xf, yf);
            let p = &self.parcels[idx];
            let along = xf * p.stripe_dir.0 + yf * p.stripe_dir.1;
            let stripe = p.stripe_amp * (std::f64::consts::TAU * (along * p.stripe_freq + phase[idx])).sin();
            let low = 0.08 * fbm(seed, xf, yf, 160.0, 3);
            (p.level + level_shift[idx] + stripe + low) as f32
        });
        for b in &self.buildings {
            let (s, c) = b.angle.sin_cos();
            let r = b.hw.max(b.hh) * 1.5;
            let (x0, x1) = ((b.cx - r).floor().max(0.0) as usize, ((b.cx + r).ceil() as usize).min(n - 1));
            let (y0, y1) = ((b.cy - r).floor().max(0.0) as usize, ((b.cy + r).ceil() as usize).min(n - 1));
            for y in y0..=y1 {
                for x in x0..=x1 {
                    let (dx, dy) = (x as f64 - b.cx, y as f64 - b.cy);
                    let (lx, ly) = (c * dx + s * dy, -s * dx + c * dy);
                    if lx.abs() <= b.hw && ly.abs() <= b.hh {
                        ground.set(x, y, b.level as f32);
                    }
                }
            }
        }
        let mut out = Raster::new(n, n);
        for y in 0..n {
            for x in 0..n {
                let (xf, yf) = (x as f64, y as f64);
                let mut v = ground.get(x, y) as f64;
                let mut road = None;
                for r in &self.roads {
                    let d = segment_distance((xf, yf), r.a, r.b);
                    if d <= r.half_width + 0.5 {
                        let w = (r.half_width + 0.5 - d).min(1.0);
                        road = Some((r.level, w));
                    }
                }
                if appearance == Appearance::Snow {
                    let cover = fbm(snow_seed, xf, yf, 90.0, 4);
                    let inverted = 0.25 + 0.65 * (1.0 - v);
                    let t = ((cover + 0.05) / 0.08).clamp(0.0, 1.0);
                    let snow = 0.93 + 0.03 * value_noise(noise_seed ^ 3, xf / 6.0, yf / 6.0);
                    v = inverted + t * (snow - inverted);
                }
                if let Some((level, w)) = road {
                    let level = if appearance == Appearance::Snow { 0.12 } else { level };
                    v += w * (level - v);
                }
                let fine = 0.02 * value_noise(noise_seed, xf / 1.7, yf / 1.7);
                out.set(x, y, (gain * v + offset + fine).clamp(0.0, 1.0) as f32);
            }
        }
        out
    }

    pub fn geo_image(&self, id: &str, date: u64, appearance: Appearance) -> GeoImage {
        GeoImage {
            pixels: self.render(date, appearance),
            geo: self.geotransform(),
            image_id: id.to_string(),
            mode_tag: appearance.tag().to_string(),
        }
    }

    /// Build a stack from `(id, date, appearance)` triples.
    pub fn stack(&self, acquisitions: &[(&str, u64, Appearance)]) -> Result<GeoStack> {
        let images = acquisitions
            .iter()
            .map(|&(id, date, app)| self.geo_image(id, date, app))
            .collect();
        GeoStack::new(images, self.target_world())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Scene {
        Scene::new(SceneConfig {
            size: 192,
            parcel_spacing: 32.0,
            roads: 3,
            buildings: 40,
            ..SceneConfig::default()
        })
    }

    #[test]
    fn render_is_deterministic_and_bounded() {
        let s = small();
        let a = s.render(0, Appearance::Base);
        let b = s.render(0, Appearance::Base);
        assert_eq!(a, b);
        assert!(a.data.iter().all(|v| (0.0..=1.0).contains(v)));
        let (lo, hi) = a.min_max();
        assert!(hi - lo > 0.5);
    }

    #[test]
    fn dates_and_modes_differ() {
        let s = small();
        let a = s.render(0, Appearance::Base);
        let b = s.render(1, Appearance::Base);
        let snow = s.render(0, Appearance::Snow);
        let diff = |p: &Raster, q: &Raster| {
            p.data.iter().zip(&q.data).map(|(x, y)| (x - y).abs() as f64).sum::<f64>() / p.data.len() as f64
        };
        assert!(diff(&a, &b) > 0.01 && diff(&a, &b) < 0.15);
        assert!(diff(&a, &snow) > diff(&a, &b));
    }

    #[test]
    fn target_georeference_round_trips() {
        let s = small();
        let stack = s.stack(&[("a", 0, Appearance::Base), ("b", 0, Appearance::Snow)]).unwrap();
        let px = stack.target.pixel_in("b").unwrap();
        let t = s.target_pixel();
        assert!((px.0 - t.0).abs() < 1e-6 && (px.1 - t.1).abs() < 1e-6);
    }
}

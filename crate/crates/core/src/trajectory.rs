//! Approach trajectories: smoothly evolving views of the target, and the
//! trajectory-level success rule.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::GeoStack;
use crate::homography::Mat3;
use crate::rng::{domain, StreamRng};
use crate::view_synth::{compose_view, project_target, ViewParams, ViewTransform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrajectoryConfig {
    pub frames: usize,
    /// Reference pixels per view pixel at the first and last frame.
    pub zoom_start: f64,
    pub zoom_end: f64,
    /// Roll increment per frame, radians.
    pub roll_rate: f64,
    pub roll_jitter: f64,
    /// Initial distance of the target from the view center, px; decays linearly to 0.
    pub lateral_offset_start: f64,
    pub tilt_jitter: f64,
    pub view_size: usize,
    pub focal_px: f64,
    pub seed: u64,
}

impl Default for TrajectoryConfig {
    fn default() -> Self {
        TrajectoryConfig {
            frames: 30,
            zoom_start: 2.0,
            zoom_end: 0.6,
            roll_rate: 0.03,
            roll_jitter: 0.01,
            lateral_offset_start: 80.0,
            tilt_jitter: 2f64.to_radians(),
            view_size: 256,
            focal_px: 256.0,
            seed: 0,
        }
    }
}

impl TrajectoryConfig {
    pub fn validate(&self) -> Result<()> {
        if self.frames < 8 {
            return Err(Error::InvalidConfig(format!("trajectories need at least 8 frames, got {}", self.frames)));
        }
        if !(self.zoom_end > 0.0 && self.zoom_start >= self.zoom_end) {
            return Err(Error::InvalidConfig(format!(
                "need zoom_start >= zoom_end > 0, got {} and {}",
                self.zoom_start, self.zoom_end
            )));
        }
        if self.view_size == 0 || !(self.focal_px > 0.0) {
            return Err(Error::InvalidConfig("view_size and focal_px must be positive".into()));
        }
        let reach = self.lateral_offset_start + 1.0;
        if reach * 2.0 >= self.view_size as f64 {
            return Err(Error::InvalidConfig(format!(
                "lateral offset {} pushes the target out of a {} px view",
                self.lateral_offset_start, self.view_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFrame {
    pub index: usize,
    pub transform: ViewTransform,
    pub target_px: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub index: usize,
    pub frames: Vec<TrajectoryFrame>,
}

/// Frames of trajectory `index`. Per trajectory the draws are: initial
/// roll, offset direction, source image; then per frame roll noise and
/// the two tilt angles.
pub fn simulate_trajectory(cfg: &TrajectoryConfig, stack: &GeoStack, index: usize) -> Result<Trajectory> {
    cfg.validate()?;
    let mut rng = StreamRng::derive(cfg.seed, domain::TRAJECTORY, index as u64);
    let seed = rng.key();
    let roll0 = rng.range(0.0, std::f64::consts::TAU);
    let phi = rng.range(0.0, std::f64::consts::TAU);
    let ids = stack.ids();
    let source = ids[rng.below(ids.len())].clone();
    let target_ref = stack.target.pixel_in(&source)?;
    let c = (cfg.view_size as f64 - 1.0) / 2.0;
    let last = (cfg.frames - 1) as f64;
    let (lz0, lz1) = (cfg.zoom_start.ln(), cfg.zoom_end.ln());
    let mut frames = Vec::with_capacity(cfg.frames);
    for t in 0..cfg.frames {
        let f = t as f64 / last;
        let yaw = roll0 + cfg.roll_rate * t as f64 + cfg.roll_jitter * rng.normal();
        let tilt_x = cfg.tilt_jitter * rng.normal();
        let tilt_y = cfg.tilt_jitter * rng.normal();
        let off = cfg.lateral_offset_start * (1.0 - f);
        let params = ViewParams {
            yaw,
            zoom: (lz0 + (lz1 - lz0) * f).exp(),
            tilt_x,
            tilt_y,
            target_view: (c + off * phi.cos(), c + off * phi.sin()),
        };
        let h = compose_view(&params, target_ref, cfg.view_size, cfg.focal_px)?;
        let transform = ViewTransform {
            h,
            source_image_id: source.clone(),
            seed,
            view_size: cfg.view_size,
        };
        let target_px = project_target(&transform, target_ref)?;
        frames.push(TrajectoryFrame {
            index: t,
            transform,
            target_px,
        });
    }
    Ok(Trajectory { index, frames })
}

/// Exact rational threshold, e.g. two thirds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub const TWO_THIRDS: Fraction = Fraction { num: 2, den: 3 };

    /// `count / total >= self`, compared in integers.
    pub fn reached_by(self, count: usize, total: usize) -> bool {
        count as u128 * self.den as u128 >= total as u128 * self.num as u128
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuccessRule {
    pub threshold_px: f64,
    pub min_fraction: Fraction,
    pub max_consecutive: usize,
}

impl Default for SuccessRule {
    fn default() -> Self {
        SuccessRule {
            threshold_px: 10.0,
            min_fraction: Fraction::TWO_THIRDS,
            max_consecutive: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryVerdict {
    pub errors: Vec<f64>,
    pub fraction_within: f64,
    pub longest_failure_run: usize,
    pub success: bool,
}

/// A frame is correct iff its error is strictly below the threshold
/// (failed frames carry an infinite or NaN error). Success needs enough
/// correct frames and no run of `max_consecutive` wrong ones.
pub fn judge_trajectory(errors: &[f64], rule: &SuccessRule) -> Result<TrajectoryVerdict> {
    if errors.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let good = errors.iter().filter(|&&e| e < rule.threshold_px).count();
    let (mut run, mut longest) = (0, 0);
    for &e in errors {
        if e < rule.threshold_px {
            run = 0;
        } else {
            run += 1;
            longest = longest.max(run);
        }
    }
    Ok(TrajectoryVerdict {
        errors: errors.to_vec(),
        fraction_within: good as f64 / errors.len() as f64,
        longest_failure_run: longest,
        success: rule.min_fraction.reached_by(good, errors.len()) && longest < rule.max_consecutive,
    })
}

const TRAJECTORY_MAGIC: &str = "# stackguide trajectory v1";

impl Trajectory {
    /// Header plus one line per frame: index, nine H entries, target u v.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{TRAJECTORY_MAGIC}").unwrap();
        let first = self.frames.first();
        writeln!(
            out,
            "index {} source {} seed {} view_size {}",
            self.index,
            first.map_or("-", |f| f.transform.source_image_id.as_str()),
            first.map_or(0, |f| f.transform.seed),
            first.map_or(0, |f| f.transform.view_size)
        )
        .unwrap();
        for f in &self.frames {
            write!(out, "{}", f.index).unwrap();
            for r in 0..3 {
                for c in 0..3 {
                    write!(out, " {:.16e}", f.transform.h[(r, c)]).unwrap();
                }
            }
            writeln!(out, " {:.16e} {:.16e}", f.target_px.0, f.target_px.1).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Trajectory> {
        let bad = |m: String| Error::Manifest(format!("trajectory file: {m}"));
        let mut lines = text.lines();
        if lines.next() != Some(TRAJECTORY_MAGIC) {
            return Err(bad("missing header".into()));
        }
        let head: Vec<&str> = lines.next().unwrap_or("").split_whitespace().collect();
        if head.len() != 8 || head[0] != "index" || head[2] != "source" || head[4] != "seed" || head[6] != "view_size" {
            return Err(bad("malformed second line".into()));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|e| bad(format!("{s:?}: {e}")));
        let index = num(head[1])? as usize;
        let source = head[3].to_string();
        let seed = num(head[5])?;
        let view_size = num(head[7])? as usize;
        let mut frames = Vec::new();
        for (ln, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 12 {
                return Err(bad(format!("frame line {} has {} fields", ln + 3, parts.len())));
            }
            let v: Vec<f64> = parts[1..]
                .iter()
                .map(|s| s.parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
                .collect::<Result<_>>()?;
            frames.push(TrajectoryFrame {
                index: num(parts[0])? as usize,
                transform: ViewTransform {
                    h: Mat3::from_row_slice(&v[..9]),
                    source_image_id: source.clone(),
                    seed,
                    view_size,
                },
                target_px: (v[9], v[10]),
            });
        }
        Ok(Trajectory { index, frames })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        crate::raster::write_bytes(path, self.to_text().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Trajectory> {
        Trajectory::parse(&std::fs::read_to_string(path)?)
    }
}

use std::f64::consts::TAU;

use super::detect::{gradient, Keypoint, ScaleSpace};
use crate::error::{Error, Result};

pub const DESCRIPTOR_LEN: usize = 128;
const D: usize = 4;
const N: usize = 8;
const HIST_WIDTH: f64 = 3.0;
const CLIP: f32 = 0.2;

pub type Descriptor = [f32; DESCRIPTOR_LEN];

/// L2-normalize, clip entries at 0.2, renormalize.
pub fn clip_and_normalize(raw: &mut [f32]) {
    let norm = |v: &[f32]| v.iter().map(|&x| (x as f64) * (x as f64)).sum::<f64>().sqrt();
    let n = norm(raw);
    if n > 0.0 {
        raw.iter_mut().for_each(|x| *x = ((*x as f64 / n) as f32).min(CLIP));
    }
    let n = norm(raw);
    if n > 0.0 {
        raw.iter_mut().for_each(|x| *x = (*x as f64 / n) as f32);
    }
}

/// 4x4 spatial cells x 8 orientation bins around `kp`, rotated by its
/// orientation. Fails when the support window leaves the octave image.
pub fn describe(space: &ScaleSpace, kp: &Keypoint) -> Result<Descriptor> {
    let img = &space.gauss[kp.octave][kp.layer];
    let step = 2f64.powi(kp.octave as i32);
    let (x, y) = (kp.position.0 / step, kp.position.1 / step);
    let hist_w = HIST_WIDTH * kp.octave_scale;
    let radius = (hist_w * std::f64::consts::SQRT_2 * (D as f64 + 1.0) * 0.5).round() as isize;
    let (cx, cy) = (x.round() as isize, y.round() as isize);
    if cx - radius < 1 || cy - radius < 1 || cx + radius >= img.width as isize - 1 || cy + radius >= img.height as isize - 1 {
        return Err(Error::SupportOutOfBounds);
    }
    let (cos_t, sin_t) = (kp.orientation.cos() / hist_w, kp.orientation.sin() / hist_w);
    let half = D as f64 / 2.0;
    let wscale = -1.0 / (2.0 * half * half);
    let mut hist = [0f64; (D + 2) * (D + 2) * (N + 2)];
    let idx = |r: usize, c: usize, o: usize| (r * (D + 2) + c) * (N + 2) + o;
    for i in -radius..=radius {
        for j in -radius..=radius {
            // offset (j, i) in the keypoint frame
            let c_rot = j as f64 * cos_t + i as f64 * sin_t;
            let r_rot = -(j as f64) * sin_t + i as f64 * cos_t;
            let rbin = r_rot + half - 0.5;
            let cbin = c_rot + half - 0.5;
            if rbin <= -1.0 || rbin >= D as f64 || cbin <= -1.0 || cbin >= D as f64 {
                continue;
            }
            let (mag, ang) = gradient(img, (cx + j) as usize, (cy + i) as usize);
            let obin = (ang - kp.orientation).rem_euclid(TAU) * N as f64 / TAU;
            let w = mag * ((c_rot * c_rot + r_rot * r_rot) * wscale).exp();
            let (r0, c0, o0) = (rbin.floor(), cbin.floor(), obin.floor());
            let (dr, dc, dobin) = (rbin - r0, cbin - c0, obin - o0);
            let (r0, c0) = ((r0 + 1.0) as usize, (c0 + 1.0) as usize);
            let o0 = o0 as usize % N;
            for (rr, wr) in [(0, 1.0 - dr), (1, dr)] {
                for (cc, wc) in [(0, 1.0 - dc), (1, dc)] {
                    for (oo, wo) in [(0, 1.0 - dobin), (1, dobin)] {
                        hist[idx(r0 + rr, c0 + cc, o0 + oo)] += w * wr * wc * wo;
                    }
                }
            }
        }
    }
    let mut out = [0f32; DESCRIPTOR_LEN];
    for r in 0..D {
        for c in 0..D {
            for o in 0..N {
                let mut v = hist[idx(r + 1, c + 1, o)];
                if o == 0 {
                    v += hist[idx(r + 1, c + 1, N)];
                }
                out[(r * D + c) * N + o] = v as f32;
            }
        }
    }
    clip_and_normalize(&mut out);
    Ok(out)
}

/// Describe every keypoint whose support fits; returns the kept pairs.
pub fn describe_all(space: &ScaleSpace, kps: &[Keypoint]) -> (Vec<Keypoint>, Vec<Descriptor>) {
    let mut kept = Vec::with_capacity(kps.len());
    let mut descs = Vec::with_capacity(kps.len());
    for kp in kps {
        if let Ok(d) = describe(space, kp) {
            kept.push(*kp);
            descs.push(d);
        }
    }
    (kept, descs)
}

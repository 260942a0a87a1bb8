use nalgebra::{DMatrix, Matrix3};

use super::RansacConfig;
use crate::error::{Error, Result};
use crate::homography::{self, Mat3};
use crate::rng::StreamRng;

#[derive(Debug, Clone, PartialEq)]
pub struct RansacFit {
    /// Maps `src` points to `dst` points.
    pub h: Mat3,
    pub inliers: Vec<bool>,
    pub inlier_count: usize,
    pub iterations: usize,
    /// Minimal samples skipped for near-collinearity.
    pub degenerate_samples: usize,
}

/// Hartley normalization: centroid to origin, mean distance sqrt(2).
fn normalizer(pts: &[(f64, f64)]) -> Mat3 {
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (mx / n, my / n);
    let md = pts.iter().map(|p| ((p.0 - mx).powi(2) + (p.1 - my).powi(2)).sqrt()).sum::<f64>() / n;
    let s = if md > 0.0 { std::f64::consts::SQRT_2 / md } else { 1.0 };
    Matrix3::new(s, 0.0, -s * mx, 0.0, s, -s * my, 0.0, 0.0, 1.0)
}

/// Normalized direct linear transform; least squares for more than 4 pairs.
pub fn fit_homography(src: &[(f64, f64)], dst: &[(f64, f64)]) -> Result<Mat3> {
    if src.len() < 4 || src.len() != dst.len() {
        return Err(Error::NotEnoughMatches(src.len().min(dst.len())));
    }
    let ts = normalizer(src);
    let td = normalizer(dst);
    let rows = 2 * src.len();
    let mut a = DMatrix::<f64>::zeros(rows.max(9), 9);
    for (i, (&p, &q)) in src.iter().zip(dst).enumerate() {
        let (x, y, _) = homography::apply_raw(&ts, p.0, p.1);
        let (u, v, _) = homography::apply_raw(&td, q.0, q.1);
        let r = 2 * i;
        let row0 = [-x, -y, -1.0, 0.0, 0.0, 0.0, u * x, u * y, u];
        let row1 = [0.0, 0.0, 0.0, -x, -y, -1.0, v * x, v * y, v];
        for k in 0..9 {
            a[(r, k)] = row0[k];
            a[(r + 1, k)] = row1[k];
        }
    }
    let svd = a.svd(false, true);
    let vt = svd.v_t.ok_or(Error::DegenerateConfiguration)?;
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |b, (i, &s)| if s < b.1 { (i, s) } else { b });
    let h = vt.row(imin);
    let hn = Matrix3::new(h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7], h[8]);
    let full = homography::invert(&td)? * hn * ts;
    if full[(2, 2)].abs() < 1e-15 {
        return Err(Error::DegenerateConfiguration);
    }
    let full = homography::normalize(&full);
    homography::invert(&full)?;
    Ok(full)
}

fn collinear(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
    let scale = ((b.0 - a.0).hypot(b.1 - a.1)) * ((c.0 - a.0).hypot(c.1 - a.1));
    cross.abs() <= 1e-6 * scale.max(1e-12)
}

fn degenerate(p: &[(f64, f64); 4]) -> bool {
    (0..4).any(|skip| {
        let t: Vec<_> = (0..4).filter(|&i| i != skip).map(|i| p[i]).collect();
        collinear(t[0], t[1], t[2])
    })
}

/// `d(H p, q)^2 + d(p, H^-1 q)^2`; infinite when either side is at infinity.
pub fn symmetric_transfer_sq(h: &Mat3, hinv: &Mat3, p: (f64, f64), q: (f64, f64)) -> f64 {
    match (homography::apply(h, p), homography::apply(hinv, q)) {
        (Ok(f), Ok(b)) => (f.0 - q.0).powi(2) + (f.1 - q.1).powi(2) + (b.0 - p.0).powi(2) + (b.1 - p.1).powi(2),
        _ => f64::INFINITY,
    }
}

fn score(h: &Mat3, src: &[(f64, f64)], dst: &[(f64, f64)], tau2: f64) -> Option<(Vec<bool>, usize, f64)> {
    let hinv = homography::invert(h).ok()?;
    let mut mask = vec![false; src.len()];
    let (mut count, mut err) = (0, 0.0);
    for (i, (&p, &q)) in src.iter().zip(dst).enumerate() {
        let e = symmetric_transfer_sq(h, &hinv, p, q);
        if e < tau2 {
            mask[i] = true;
            count += 1;
            err += e;
        }
    }
    Some((mask, count, err))
}

/// Robust homography `src -> dst` from putative correspondences.
pub fn estimate_homography_ransac(src: &[(f64, f64)], dst: &[(f64, f64)], cfg: &RansacConfig, rng: &mut StreamRng) -> Result<RansacFit> {
    let n = src.len().min(dst.len());
    if n < 4 {
        return Err(Error::NotEnoughMatches(n));
    }
    let tau2 = cfg.inlier_px * cfg.inlier_px;
    let mut best: Option<(Mat3, Vec<bool>, usize, f64)> = None;
    let mut degenerate_samples = 0;
    let mut needed = cfg.max_iters;
    let mut it = 0;
    while it < needed.min(cfg.max_iters) {
        it += 1;
        let mut idx = [0usize; 4];
        for k in 0..4 {
            loop {
                let c = rng.below(n);
                if !idx[..k].contains(&c) {
                    idx[k] = c;
                    break;
                }
            }
        }
        let ps = idx.map(|i| src[i]);
        let qs = idx.map(|i| dst[i]);
        if degenerate(&ps) || degenerate(&qs) {
            degenerate_samples += 1;
            continue;
        }
        let Ok(h) = fit_homography(&ps, &qs) else {
            degenerate_samples += 1;
            continue;
        };
        let Some((mask, count, err)) = score(&h, src, dst, tau2) else {
            continue;
        };
        let better = match &best {
            None => true,
            Some((_, _, bc, be)) => count > *bc || (count == *bc && err < *be),
        };
        if better {
            let w = count as f64 / n as f64;
            let denom = (1.0 - w.powi(4)).ln();
            needed = if denom < 0.0 {
                ((1.0 - cfg.confidence).ln() / denom).ceil().max(1.0) as usize
            } else {
                cfg.max_iters
            };
            best = Some((h, mask, count, err));
        }
    }
    let Some((mut h, mut mask, mut count, _)) = best else {
        return Err(Error::RansacFailed);
    };
    if count < 4 {
        return Err(Error::RansacFailed);
    }
    // refit on the consensus set, then re-score once
    for _ in 0..2 {
        let (ps, qs): (Vec<_>, Vec<_>) = (0..n).filter(|&i| mask[i]).map(|i| (src[i], dst[i])).unzip();
        let Ok(refit) = fit_homography(&ps, &qs) else { break };
        match score(&refit, src, dst, tau2) {
            Some((m, c, _)) if c >= count => {
                h = refit;
                mask = m;
                count = c;
            }
            _ => break,
        }
    }
    Ok(RansacFit {
        h,
        inliers: mask,
        inlier_count: count,
        iterations: it,
        degenerate_samples,
    })
}

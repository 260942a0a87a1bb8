//! Layer primitives on channels-last (`[h, w, c]`) feature maps, with
//! their reverse-mode counterparts. Backward functions accumulate into
//! parameter gradients and overwrite input gradients unless noted.

use super::scalar::{gemm, Real, Trans};
use super::Padding;

/// Reshape non-overlapping `p x p` patches into rows ordered `(ky, kx, c)`.
pub fn patchify<T: Real>(x: &[T], h: usize, w: usize, c: usize, p: usize, cols: &mut Vec<T>) {
    let (ho, wo) = (h / p, w / p);
    cols.clear();
    cols.reserve(ho * wo * p * p * c);
    for oy in 0..ho {
        for ox in 0..wo {
            for ky in 0..p {
                let row = (oy * p + ky) * w;
                let start = (row + ox * p) * c;
                cols.extend_from_slice(&x[start..start + p * c]);
            }
        }
    }
}

/// Adjoint of [`patchify`]: scatter patch-row gradients back to the map.
pub fn unpatchify<T: Real>(dcols: &[T], h: usize, w: usize, c: usize, p: usize, dx: &mut [T]) {
    let (ho, wo) = (h / p, w / p);
    let mut k = 0;
    for oy in 0..ho {
        for ox in 0..wo {
            for ky in 0..p {
                let row = (oy * p + ky) * w;
                let start = (row + ox * p) * c;
                dx[start..start + p * c].copy_from_slice(&dcols[k..k + p * c]);
                k += p * c;
            }
        }
    }
}

/// `out = x W + b` over rows of `x` (`n x cin`), `W` is `cin x cout`.
pub fn linear<T: Real>(x: &[T], n: usize, cin: usize, w: &[T], b: &[T], cout: usize, out: &mut Vec<T>) {
    out.clear();
    out.reserve(n * cout);
    for _ in 0..n {
        out.extend_from_slice(b);
    }
    gemm(n, cin, cout, x, Trans::No, w, Trans::No, out, true);
}

/// Gradients of [`linear`]: `dW += x^T dy`, `db += colsum(dy)`, and
/// `dx = dy W^T` when requested.
#[allow(clippy::too_many_arguments)]
pub fn linear_backward<T: Real>(
    x: &[T],
    dy: &[T],
    n: usize,
    cin: usize,
    w: &[T],
    cout: usize,
    dw: &mut [T],
    db: &mut [T],
    dx: Option<&mut Vec<T>>,
) {
    gemm(cin, n, cout, x, Trans::Yes, dy, Trans::No, dw, true);
    for row in dy.chunks_exact(cout) {
        for (g, &v) in db.iter_mut().zip(row) {
            *g += v;
        }
    }
    if let Some(dx) = dx {
        dx.clear();
        dx.resize(n * cin, T::zero());
        gemm(n, cout, cin, dy, Trans::No, w, Trans::Yes, dx, false);
    }
}

#[derive(Debug, Clone, Default)]
pub struct LnCache<T> {
    pub xhat: Vec<T>,
    pub inv_std: Vec<T>,
    pub out: Vec<T>,
}

/// Layer normalization over the channels of each position.
pub fn layer_norm<T: Real>(x: &[T], c: usize, g: &[T], b: &[T], eps: T, cache: &mut LnCache<T>) {
    let n = x.len() / c;
    cache.xhat.clear();
    cache.xhat.resize(x.len(), T::zero());
    cache.out.clear();
    cache.out.resize(x.len(), T::zero());
    cache.inv_std.clear();
    cache.inv_std.resize(n, T::zero());
    let inv_c = T::one() / T::from_usize(c).unwrap();
    for p in 0..n {
        let xs = &x[p * c..(p + 1) * c];
        let mean = xs.iter().copied().sum::<T>() * inv_c;
        let var = xs.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() * inv_c;
        let is = T::one() / (var + eps).sqrt();
        cache.inv_std[p] = is;
        let xh = &mut cache.xhat[p * c..(p + 1) * c];
        let out = &mut cache.out[p * c..(p + 1) * c];
        for i in 0..c {
            let v = (xs[i] - mean) * is;
            xh[i] = v;
            out[i] = v * g[i] + b[i];
        }
    }
}

pub fn layer_norm_backward<T: Real>(
    dy: &[T],
    c: usize,
    g: &[T],
    cache: &LnCache<T>,
    dx: &mut Vec<T>,
    dg: &mut [T],
    db: &mut [T],
) {
    let n = dy.len() / c;
    dx.clear();
    dx.resize(dy.len(), T::zero());
    let inv_c = T::one() / T::from_usize(c).unwrap();
    for p in 0..n {
        let dys = &dy[p * c..(p + 1) * c];
        let xh = &cache.xhat[p * c..(p + 1) * c];
        let mut m1 = T::zero();
        let mut m2 = T::zero();
        for i in 0..c {
            let dxh = dys[i] * g[i];
            m1 += dxh;
            m2 += dxh * xh[i];
            dg[i] += dys[i] * xh[i];
            db[i] += dys[i];
        }
        m1 *= inv_c;
        m2 *= inv_c;
        let is = cache.inv_std[p];
        let out = &mut dx[p * c..(p + 1) * c];
        for i in 0..c {
            out[i] = is * (dys[i] * g[i] - m1 - xh[i] * m2);
        }
    }
}

const GELU_A: f64 = 0.797_884_560_802_865_4;
const GELU_B: f64 = 0.044_715;

/// Tanh-form Gaussian error linear unit. Stores `tanh(..)` for backward.
pub fn gelu<T: Real>(x: &[T], out: &mut Vec<T>, tanh_cache: &mut Vec<T>) {
    let (a, b, half) = (T::lit(GELU_A), T::lit(GELU_B), T::lit(0.5));
    tanh_cache.clear();
    tanh_cache.resize(x.len(), T::zero());
    for (t, &v) in tanh_cache.iter_mut().zip(x) {
        *t = (a * (v + b * v * v * v)).act_tanh();
    }
    out.clear();
    out.resize(x.len(), T::zero());
    for ((o, &v), &t) in out.iter_mut().zip(x).zip(tanh_cache.iter()) {
        *o = half * v * (T::one() + t);
    }
}

/// `dx = dy * gelu'(x)`, in place on `dy`.
pub fn gelu_backward<T: Real>(x: &[T], tanh_cache: &[T], dy: &mut [T]) {
    let (a, b, half, three) = (T::lit(GELU_A), T::lit(GELU_B), T::lit(0.5), T::lit(3.0));
    for ((d, &v), &t) in dy.iter_mut().zip(x).zip(tanh_cache) {
        let dt = (T::one() - t * t) * a * (T::one() + three * b * v * v);
        *d *= half * (T::one() + t) + half * v * dt;
    }
}

/// Spans `(out_start, in_start, len)` along one axis of length `n` for a
/// tap offset `d`: output index `i` reads input `i + d`.
#[inline]
fn spans(n: usize, d: isize, padding: Padding) -> ([(usize, usize, usize); 2], usize) {
    let n_i = n as isize;
    let mut out = [(0, 0, 0); 2];
    let lo = (-d).max(0);
    let hi = (n_i - d).min(n_i);
    let mut k = 0;
    if hi > lo {
        out[k] = (lo as usize, (lo + d) as usize, (hi - lo) as usize);
        k += 1;
    }
    if padding == Padding::Circular && d != 0 && d.abs() < n_i {
        // wrapped remainder
        if d > 0 {
            let s = (n_i - d) as usize;
            out[k] = (s, 0, d as usize);
        } else {
            out[k] = (0, (n_i + d) as usize, (-d) as usize);
        }
        k += 1;
    }
    (out, k)
}

/// Depthwise `k x k` convolution, stride 1, "same" output size.
/// Weights are tap-major: `w[(ky * k + kx) * c + ch]`.
#[allow(clippy::too_many_arguments)]
pub fn depthwise<T: Real>(
    x: &[T],
    h: usize,
    w: usize,
    c: usize,
    k: usize,
    weights: &[T],
    bias: &[T],
    padding: Padding,
    out: &mut Vec<T>,
) {
    out.clear();
    out.resize(h * w * c, T::zero());
    for o in out.chunks_exact_mut(c) {
        o.copy_from_slice(bias);
    }
    let half = (k / 2) as isize;
    for ky in 0..k {
        let (rows, nr) = spans(h, ky as isize - half, padding);
        for kx in 0..k {
            let (cols, nc) = spans(w, kx as isize - half, padding);
            let wt = &weights[(ky * k + kx) * c..(ky * k + kx + 1) * c];
            for &(oy0, iy0, ny) in &rows[..nr] {
                for r in 0..ny {
                    let (oy, iy) = (oy0 + r, iy0 + r);
                    for &(ox0, ix0, nx) in &cols[..nc] {
                        let o = &mut out[(oy * w + ox0) * c..(oy * w + ox0 + nx) * c];
                        let src = &x[(iy * w + ix0) * c..(iy * w + ix0 + nx) * c];
                        for (orow, srow) in o.chunks_exact_mut(c).zip(src.chunks_exact(c)) {
                            for ((ov, &sv), &wv) in orow.iter_mut().zip(srow).zip(wt) {
                                *ov += sv * wv;
                            }
                        }
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub fn depthwise_backward<T: Real>(
    x: &[T],
    dy: &[T],
    h: usize,
    w: usize,
    c: usize,
    k: usize,
    weights: &[T],
    padding: Padding,
    dweights: &mut [T],
    dbias: &mut [T],
    dx: &mut Vec<T>,
) {
    dx.clear();
    dx.resize(h * w * c, T::zero());
    for g in dy.chunks_exact(c) {
        for (db, &v) in dbias.iter_mut().zip(g) {
            *db += v;
        }
    }
    let half = (k / 2) as isize;
    let mut acc = vec![T::zero(); c];
    for ky in 0..k {
        let (rows, nr) = spans(h, ky as isize - half, padding);
        for kx in 0..k {
            let (cols, nc) = spans(w, kx as isize - half, padding);
            let tap = (ky * k + kx) * c;
            let wt = &weights[tap..tap + c];
            acc.iter_mut().for_each(|a| *a = T::zero());
            for &(oy0, iy0, ny) in &rows[..nr] {
                for r in 0..ny {
                    let (oy, iy) = (oy0 + r, iy0 + r);
                    for &(ox0, ix0, nx) in &cols[..nc] {
                        let g = &dy[(oy * w + ox0) * c..(oy * w + ox0 + nx) * c];
                        let src = &x[(iy * w + ix0) * c..(iy * w + ix0 + nx) * c];
                        let d = &mut dx[(iy * w + ix0) * c..(iy * w + ix0 + nx) * c];
                        for ((grow, srow), drow) in g.chunks_exact(c).zip(src.chunks_exact(c)).zip(d.chunks_exact_mut(c)) {
                            for ch in 0..c {
                                acc[ch] += grow[ch] * srow[ch];
                                drow[ch] += grow[ch] * wt[ch];
                            }
                        }
                    }
                }
            }
            for (dw, &a) in dweights[tap..tap + c].iter_mut().zip(&acc) {
                *dw += a;
            }
        }
    }
}

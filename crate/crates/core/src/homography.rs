//! Plane-projective helpers shared by view synthesis and registration.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;

/// Homogeneous `w` below this magnitude is treated as a point at infinity.
pub const MIN_W: f64 = 1e-12;

#[inline]
pub fn apply(h: &Mat3, (x, y): (f64, f64)) -> Result<(f64, f64)> {
    let p = h * Vector3::new(x, y, 1.0);
    if p.z.abs() < MIN_W {
        return Err(Error::PointAtInfinity(p.z));
    }
    Ok((p.x / p.z, p.y / p.z))
}

/// Same as [`apply`] without the infinity check, for hot loops that test w themselves.
#[inline]
pub fn apply_raw(h: &Mat3, x: f64, y: f64) -> (f64, f64, f64) {
    (
        h[(0, 0)] * x + h[(0, 1)] * y + h[(0, 2)],
        h[(1, 0)] * x + h[(1, 1)] * y + h[(1, 2)],
        h[(2, 0)] * x + h[(2, 1)] * y + h[(2, 2)],
    )
}

pub fn translation(tx: f64, ty: f64) -> Mat3 {
    Mat3::new(1.0, 0.0, tx, 0.0, 1.0, ty, 0.0, 0.0, 1.0)
}

/// Counter-clockwise in a y-up frame, i.e. `(1, 0) -> (cos, sin)`.
pub fn rotation(theta: f64) -> Mat3 {
    let (s, c) = theta.sin_cos();
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

pub fn scaling(s: f64) -> Mat3 {
    Mat3::new(s, 0.0, 0.0, 0.0, s, 0.0, 0.0, 0.0, 1.0)
}

/// Homography induced by rotating a pinhole camera with focal length
/// `focal` (pixels, principal point at the origin) by `rx` about the image
/// x axis then `ry` about the image y axis, viewing a fronto-parallel plane:
/// `K R K^-1` with `K = diag(focal, focal, 1)`.
pub fn tilt(rx: f64, ry: f64, focal: f64) -> Mat3 {
    let (sx, cx) = rx.sin_cos();
    let (sy, cy) = ry.sin_cos();
    let rot_x = Mat3::new(1.0, 0.0, 0.0, 0.0, cx, -sx, 0.0, sx, cx);
    let rot_y = Mat3::new(cy, 0.0, sy, 0.0, 1.0, 0.0, -sy, 0.0, cy);
    let k = Mat3::new(focal, 0.0, 0.0, 0.0, focal, 0.0, 0.0, 0.0, 1.0);
    let k_inv = Mat3::new(1.0 / focal, 0.0, 0.0, 0.0, 1.0 / focal, 0.0, 0.0, 0.0, 1.0);
    k * rot_x * rot_y * k_inv
}

/// Scale so that the bottom-right entry is 1 when it is not vanishing,
/// otherwise to unit Frobenius norm with a positive largest entry.
pub fn normalize(h: &Mat3) -> Mat3 {
    let h22 = h[(2, 2)];
    if h22.abs() > 1e-12 * h.norm() {
        h / h22
    } else {
        let n = h.norm();
        let sign = if h.iter().fold(0.0f64, |m, v| if v.abs() > m.abs() { *v } else { m }) < 0.0 {
            -1.0
        } else {
            1.0
        };
        h * (sign / n)
    }
}

pub fn invert(h: &Mat3) -> Result<Mat3> {
    if h.determinant().abs() <= 1e-12 * h.norm().powi(3).max(1e-300) {
        return Err(Error::SingularTransform);
    }
    h.try_inverse().ok_or(Error::SingularTransform)
}

/// Local similarity of `h` at `p`: isotropic scale and rotation angle of the Jacobian.
pub fn local_similarity(h: &Mat3, p: (f64, f64)) -> Result<(f64, f64)> {
    let eps = 0.5;
    let c = apply(h, p)?;
    let dx = apply(h, (p.0 + eps, p.1))?;
    let dy = apply(h, (p.0, p.1 + eps))?;
    let j00 = (dx.0 - c.0) / eps;
    let j10 = (dx.1 - c.1) / eps;
    let j01 = (dy.0 - c.0) / eps;
    let j11 = (dy.1 - c.1) / eps;
    let scale = (j00 * j11 - j01 * j10).abs().sqrt();
    // rotation of the closest similarity (polar decomposition of the 2x2 block)
    let angle = (j10 - j01).atan2(j00 + j11);
    Ok((scale, angle))
}

use serde::{Deserialize, Serialize};

use super::model::{backward_ws, forward_ws, Gradients, ModelWeights, OutputGrads, Prediction, Workspace};
use super::scalar::Real;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Selection,
    Regression,
    /// Sum of both losses.
    Both,
}

pub fn softmax<T: Real>(logits: &[T]) -> Vec<T> {
    let m = logits.iter().copied().fold(T::neg_infinity(), T::max);
    let e: Vec<T> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: T = e.iter().copied().sum();
    e.into_iter().map(|v| v / s).collect()
}

/// Row-major index of the output cell containing `target_px`.
pub fn target_cell(target_px: (f64, f64), grid: usize, output_stride: usize) -> Result<usize> {
    let s = output_stride as f64;
    let (cu, cv) = ((target_px.0 / s).floor(), (target_px.1 / s).floor());
    let g = grid as f64;
    if !(cu >= 0.0 && cv >= 0.0 && cu < g && cv < g) {
        return Err(Error::TargetOutOfGrid {
            u: target_px.0,
            v: target_px.1,
            grid,
        });
    }
    Ok(cv as usize * grid + cu as usize)
}

/// Cross-entropy of the cell softmax against the target cell.
pub(crate) fn selection_value<T: Real>(logits: &[T], cell: usize) -> T {
    let (imax, m) = logits
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::neg_infinity()), |acc, (i, z)| if z > acc.1 { (i, z) } else { acc });
    // log-sum-exp with the max term pulled out so saturated logits keep precision
    let rest: T = logits
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != imax)
        .map(|(_, &z)| (z - m).exp())
        .sum();
    (m - logits[cell]) + rest.ln_1p()
}

/// `d loss / d logits = softmax - onehot`.
pub fn selection_grad<T: Real>(logits: &[T], cell: usize) -> Vec<T> {
    let mut g = softmax(logits);
    g[cell] -= T::one();
    g
}

pub fn loss_selection<T: Real>(pred: &Prediction<T>, target_px: (f64, f64), output_stride: usize) -> Result<T> {
    let logits = pred
        .heatmap
        .as_ref()
        .ok_or_else(|| Error::ShapeMismatch("prediction has no selection head".into()))?;
    let cell = target_cell(target_px, pred.grid, output_stride)?;
    Ok(selection_value(logits, cell))
}

/// Squared distance between predicted and target coordinates, both as
/// fractions of the input size.
pub fn loss_regression<T: Real>(pred: &Prediction<T>, target_px: (f64, f64)) -> Result<T> {
    let (u, v) = pred
        .coords_norm
        .ok_or_else(|| Error::ShapeMismatch("prediction has no regression head".into()))?;
    let s = pred.input_size as f64;
    let (tu, tv) = (T::lit(target_px.0 / s), T::lit(target_px.1 / s));
    Ok((u - tu) * (u - tu) + (v - tv) * (v - tv))
}

pub(crate) fn regression_grad<T: Real>(pred: &Prediction<T>, target_px: (f64, f64)) -> (T, T) {
    let (u, v) = pred.coords_norm.expect("regression head");
    let s = pred.input_size as f64;
    let two = T::lit(2.0);
    (two * (u - T::lit(target_px.0 / s)), two * (v - T::lit(target_px.1 / s)))
}

/// Forward, loss and backward for one example whose input is already in `ws`.
pub(crate) fn example_step<T: Real>(
    w: &ModelWeights<T>,
    ws: &mut Workspace<T>,
    target_px: (f64, f64),
    kind: LossKind,
    grads: &mut Gradients<T>,
    body: bool,
) -> Result<T> {
    let pred = forward_ws(w, ws)?;
    let stride = w.config.output_stride;
    let mut value = T::zero();
    let mut out = OutputGrads {
        dlogits: None,
        dcoords: None,
    };
    if matches!(kind, LossKind::Selection | LossKind::Both) {
        value += loss_selection(&pred, target_px, stride)?;
        let cell = target_cell(target_px, pred.grid, stride)?;
        out.dlogits = Some(selection_grad(pred.heatmap.as_ref().unwrap(), cell));
    }
    if matches!(kind, LossKind::Regression | LossKind::Both) {
        value += loss_regression(&pred, target_px)?;
        out.dcoords = Some(regression_grad(&pred, target_px));
    }
    backward_ws(w, ws, &out, grads, body)?;
    Ok(value)
}

/// Loss value only (forward pass).
pub(crate) fn example_loss<T: Real>(
    w: &ModelWeights<T>,
    ws: &mut Workspace<T>,
    target_px: (f64, f64),
    kind: LossKind,
) -> Result<T> {
    let pred = forward_ws(w, ws)?;
    let mut value = T::zero();
    if matches!(kind, LossKind::Selection | LossKind::Both) {
        value += loss_selection(&pred, target_px, w.config.output_stride)?;
    }
    if matches!(kind, LossKind::Regression | LossKind::Both) {
        value += loss_regression(&pred, target_px)?;
    }
    Ok(value)
}

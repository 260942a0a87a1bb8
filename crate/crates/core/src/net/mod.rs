//! A small ConvNeXt-style network mapping a view to the target location.
//!
//! ```text
//! image (n x n x 1)
//!   -> 4x4/4 patch conv -> LN                     stage 1 input, n/4
//!   -> blocks: dw 7x7 -> LN -> 1x1 (x4) -> GELU -> 1x1 -> + residual
//!   -> LN -> 2x2/2 patch conv                     stage 2 input, n/8
//!   -> blocks
//!   -> LN -> selection head: 1x1 conv to one logit per 8x8 cell
//!         -> regression head: global average pool -> affine to (u, v) / n
//! ```
//!
//! Everything runs on channels-last buffers and is generic over [`Real`]
//! so that gradients can be checked in double precision.

mod io;
mod loss;
mod model;
mod ops;
mod scalar;
mod train;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_weights, write_weights, WEIGHTS_MAGIC};
pub use loss::{loss_regression, loss_selection, selection_grad, softmax, target_cell, LossKind};
pub use model::{
    backward, forward, forward_with, loss_value, predict_target, Gradients, ModelWeights, Prediction, TargetEstimate, TensorSpec,
    TrainingStage, Workspace,
};
pub use scalar::{gemm, Real, Trans};
pub use train::{
    train, train_with_progress, AdaptiveStage, LossRecord, Example, HeadStage, LossCurve, SgdStage, TrainConfig, TrainOutcome,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeadKind {
    Selection,
    Regression,
    Both,
}

impl HeadKind {
    pub fn has_selection(self) -> bool {
        matches!(self, HeadKind::Selection | HeadKind::Both)
    }

    pub fn has_regression(self) -> bool {
        matches!(self, HeadKind::Regression | HeadKind::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Padding {
    Zero,
    Circular,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetConfig {
    pub input_size: usize,
    pub stem_stride: usize,
    pub stage_widths: Vec<usize>,
    pub blocks_per_stage: Vec<usize>,
    pub output_stride: usize,
    pub head: HeadKind,
    pub kernel_size: usize,
    pub expansion_ratio: usize,
    pub padding: Padding,
    pub ln_eps: f64,
}

impl Default for NetConfig {
    fn default() -> Self {
        NetConfig {
            input_size: 256,
            stem_stride: 4,
            stage_widths: vec![24, 48],
            blocks_per_stage: vec![2, 2],
            output_stride: 8,
            head: HeadKind::Selection,
            kernel_size: 7,
            expansion_ratio: 4,
            padding: Padding::Zero,
            ln_eps: 1e-6,
        }
    }
}

impl NetConfig {
    /// Reduced network used for gradient checks.
    pub fn reduced() -> Self {
        NetConfig {
            input_size: 32,
            stage_widths: vec![4, 8],
            blocks_per_stage: vec![1, 1],
            ..NetConfig::default()
        }
    }

    pub fn grid(&self) -> usize {
        self.input_size / self.output_stride
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.stage_widths.is_empty() || self.stage_widths.len() != self.blocks_per_stage.len() {
            return bad("stage_widths and blocks_per_stage must be nonempty and equally long".into());
        }
        if self.stage_widths.contains(&0) || self.stem_stride == 0 || self.expansion_ratio == 0 {
            return bad("widths, stem stride and expansion must be positive".into());
        }
        let stride = self.stem_stride << (self.stage_widths.len() - 1);
        if stride != self.output_stride {
            return bad(format!(
                "stem stride {} with {} stages gives stride {stride}, not {}",
                self.stem_stride,
                self.stage_widths.len(),
                self.output_stride
            ));
        }
        if self.input_size == 0 || self.input_size % self.output_stride != 0 {
            return bad(format!(
                "input_size {} not divisible by output stride {}",
                self.input_size, self.output_stride
            ));
        }
        if self.kernel_size % 2 == 0 {
            return bad("depthwise kernel must be odd".into());
        }
        if !(self.ln_eps > 0.0) {
            return bad("ln_eps must be positive".into());
        }
        Ok(())
    }
}

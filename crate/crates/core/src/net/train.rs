//! Three-stage training schedule: head alignment, SGD warm-up with
//! momentum, then an adaptive (Adam) phase with cosine decay.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::loss::{example_step, LossKind};
use super::model::{Gradients, ModelWeights, TrainingStage, Workspace};
use super::scalar::Real;
use crate::error::{Error, Result};
use crate::raster::Raster;
use crate::rng::{domain, StreamRng};

/// One training pair with 8-bit pixels.
#[derive(Debug, Clone, PartialEq)]
pub struct Example {
    pub pixels: Vec<u8>,
    pub target_px: (f64, f64),
}

impl Example {
    pub fn from_raster(r: &Raster, target_px: (f64, f64)) -> Self {
        Example {
            pixels: r.to_u8(),
            target_px,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HeadStage {
    pub steps: usize,
    pub lr: f64,
}

impl Default for HeadStage {
    fn default() -> Self {
        HeadStage { steps: 100, lr: 1e-2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgdStage {
    pub steps: usize,
    pub lr: f64,
    pub momentum: f64,
}

impl Default for SgdStage {
    fn default() -> Self {
        SgdStage {
            steps: 100,
            lr: 1e-3,
            momentum: 0.9,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveStage {
    pub steps: usize,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub warmup_steps: usize,
    /// Cosine decay from `lr` down to `lr * final_lr_fraction`.
    pub final_lr_fraction: f64,
}

impl Default for AdaptiveStage {
    fn default() -> Self {
        AdaptiveStage {
            steps: 2000,
            lr: 2e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            warmup_steps: 50,
            final_lr_fraction: 0.05,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub head_only: HeadStage,
    pub sgd_warm: SgdStage,
    pub adaptive: AdaptiveStage,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
    /// Rescale the batch gradient to at most this global L2 norm.
    pub clip_grad_norm: Option<f64>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            head_only: HeadStage::default(),
            sgd_warm: SgdStage::default(),
            adaptive: AdaptiveStage::default(),
            batch_size: 8,
            seed: 0,
            loss: LossKind::Selection,
            clip_grad_norm: Some(5.0),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let lrs = [self.head_only.lr, self.sgd_warm.lr, self.adaptive.lr];
        if lrs.iter().any(|&lr| !(lr > 0.0)) {
            return Err(Error::InvalidConfig("learning rates must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig("batch_size must be positive".into()));
        }
        Ok(())
    }

    pub fn total_steps(&self) -> usize {
        self.head_only.steps + self.sgd_warm.steps + self.adaptive.steps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LossRecord {
    pub step: usize,
    pub stage: TrainingStage,
    pub loss: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LossCurve {
    pub records: Vec<LossRecord>,
}

impl LossCurve {
    /// Tab-separated `step stage loss` with a header row.
    pub fn to_text(&self) -> String {
        let mut out = String::from("step\tstage\tloss\n");
        for r in &self.records {
            writeln!(out, "{}\t{}\t{:.9e}", r.step, r.stage.as_str(), r.loss).unwrap();
        }
        out
    }

    /// Mean loss over the first and last `window` records.
    pub fn head_tail_means(&self, window: usize) -> Option<(f64, f64)> {
        let n = self.records.len();
        if n == 0 {
            return None;
        }
        let w = window.clamp(1, n);
        let mean = |rs: &[LossRecord]| rs.iter().map(|r| r.loss).sum::<f64>() / rs.len() as f64;
        Some((mean(&self.records[..w]), mean(&self.records[n - w..])))
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub weights: ModelWeights<T>,
    pub curve: LossCurve,
}

/// Draws examples epoch by epoch from seeded permutations.
struct EpochSampler {
    seed: u64,
    epoch: u64,
    order: Vec<usize>,
    cursor: usize,
}

impl EpochSampler {
    fn new(n: usize, seed: u64) -> Self {
        let mut s = EpochSampler {
            seed,
            epoch: 0,
            order: (0..n).collect(),
            cursor: 0,
        };
        s.reshuffle();
        s
    }

    fn reshuffle(&mut self) {
        let mut rng = StreamRng::derive(self.seed, domain::SHUFFLE, self.epoch);
        self.order.sort_unstable();
        rng.shuffle(&mut self.order);
        self.cursor = 0;
    }

    fn next(&mut self) -> usize {
        if self.cursor == self.order.len() {
            self.epoch += 1;
            self.reshuffle();
        }
        let i = self.order[self.cursor];
        self.cursor += 1;
        i
    }
}

enum Optimizer<T> {
    Sgd { velocity: Vec<T> },
    Adam { m: Vec<T>, v: Vec<T>, t: i32 },
}

fn head_mask<T: Real>(w: &ModelWeights<T>) -> Vec<bool> {
    let mut mask = vec![false; w.num_params()];
    for t in w.tensors().iter().filter(|t| t.head) {
        mask[t.range()].iter_mut().for_each(|m| *m = true);
    }
    mask
}

fn cosine_lr(a: &AdaptiveStage, step: usize) -> f64 {
    if step < a.warmup_steps {
        return a.lr * (step + 1) as f64 / a.warmup_steps as f64;
    }
    let span = a.steps.saturating_sub(a.warmup_steps).max(1) as f64;
    let progress = ((step - a.warmup_steps) as f64 / span).min(1.0);
    let lo = a.lr * a.final_lr_fraction;
    lo + 0.5 * (a.lr - lo) * (1.0 + (std::f64::consts::PI * progress).cos())
}

/// Train from `init` on `examples`. Each step averages `batch_size`
/// per-example gradients, accumulated in sample order (single-threaded,
/// hence bitwise reproducible for a fixed seed).
pub fn train<T: Real>(init: ModelWeights<T>, examples: &[Example], cfg: &TrainConfig) -> Result<TrainOutcome<T>> {
    train_with_progress(init, examples, cfg, |_| {})
}

pub fn train_with_progress<T: Real>(
    init: ModelWeights<T>,
    examples: &[Example],
    cfg: &TrainConfig,
    mut progress: impl FnMut(&LossRecord),
) -> Result<TrainOutcome<T>> {
    cfg.validate()?;
    if examples.is_empty() {
        return Err(Error::EmptyInput("training examples"));
    }
    let head = init.config.head;
    let needs = (matches!(cfg.loss, LossKind::Selection | LossKind::Both), matches!(cfg.loss, LossKind::Regression | LossKind::Both));
    if (needs.0 && !head.has_selection()) || (needs.1 && !head.has_regression()) {
        return Err(Error::InvalidConfig(format!("loss {:?} does not fit head {:?}", cfg.loss, head)));
    }
    let n = init.config.input_size;
    if let Some(bad) = examples.iter().position(|e| e.pixels.len() != n * n) {
        return Err(Error::ShapeMismatch(format!(
            "example {bad} has {} pixels, network expects {n}x{n}",
            examples[bad].pixels.len()
        )));
    }
    let mut w = init;
    let mut curve = LossCurve::default();
    let mut ws = Workspace::new();
    let mut grads = Gradients::zeros_like(&w);
    let mut sampler = EpochSampler::new(examples.len(), cfg.seed);
    let heads = head_mask(&w);
    let inv_batch = T::one() / T::from_usize(cfg.batch_size).unwrap();
    let mut global = 0usize;

    let stages = [
        (TrainingStage::HeadOnly, cfg.head_only.steps),
        (TrainingStage::SgdWarm, cfg.sgd_warm.steps),
        (TrainingStage::Adaptive, cfg.adaptive.steps),
    ];
    for (stage, steps) in stages {
        if steps == 0 {
            continue;
        }
        let mut opt = match stage {
            TrainingStage::SgdWarm => Optimizer::Sgd {
                velocity: vec![T::zero(); w.num_params()],
            },
            _ => Optimizer::Adam {
                m: vec![T::zero(); w.num_params()],
                v: vec![T::zero(); w.num_params()],
                t: 0,
            },
        };
        let body = stage != TrainingStage::HeadOnly;
        for step in 0..steps {
            grads.clear();
            let mut loss = 0.0;
            for _ in 0..cfg.batch_size {
                let ex = &examples[sampler.next()];
                ws.load_u8(&ex.pixels);
                loss += example_step(&w, &mut ws, ex.target_px, cfg.loss, &mut grads, body)?.f64();
            }
            loss /= cfg.batch_size as f64;
            if !loss.is_finite() {
                return Err(Error::DivergedLoss {
                    stage: stage.as_str(),
                    step: global,
                });
            }
            grads.data.iter_mut().for_each(|g| *g *= inv_batch);
            if let Some(max_norm) = cfg.clip_grad_norm {
                let norm = grads.data.iter().map(|g| g.f64() * g.f64()).sum::<f64>().sqrt();
                if norm > max_norm {
                    let s = T::lit(max_norm / norm);
                    grads.data.iter_mut().for_each(|g| *g *= s);
                }
            }
            match &mut opt {
                Optimizer::Sgd { velocity } => {
                    let (lr, mu) = (T::lit(cfg.sgd_warm.lr), T::lit(cfg.sgd_warm.momentum));
                    for ((p, v), &g) in w.data.iter_mut().zip(velocity.iter_mut()).zip(&grads.data) {
                        *v = mu * *v + g;
                        *p -= lr * *v;
                    }
                }
                Optimizer::Adam { m, v, t } => {
                    *t += 1;
                    let a = &cfg.adaptive;
                    let lr = if stage == TrainingStage::HeadOnly {
                        cfg.head_only.lr
                    } else {
                        cosine_lr(a, step)
                    };
                    let (b1, b2) = (a.beta1, a.beta2);
                    let c1 = 1.0 - b1.powi(*t);
                    let c2 = 1.0 - b2.powi(*t);
                    let step_size = T::lit(lr / c1);
                    let (tb1, tb2, eps, inv_c2) = (T::lit(b1), T::lit(b2), T::lit(a.eps), T::lit(1.0 / c2));
                    for i in 0..w.data.len() {
                        if !body && !heads[i] {
                            continue;
                        }
                        let g = grads.data[i];
                        m[i] = tb1 * m[i] + (T::one() - tb1) * g;
                        v[i] = tb2 * v[i] + (T::one() - tb2) * g * g;
                        w.data[i] -= step_size * m[i] / ((v[i] * inv_c2).sqrt() + eps);
                    }
                }
            }
            let rec = LossRecord {
                step: global,
                stage,
                loss,
            };
            progress(&rec);
            curve.records.push(rec);
            global += 1;
        }
        w.stage = stage;
    }
    if !w.all_finite() {
        return Err(Error::DivergedLoss {
            stage: w.stage.as_str(),
            step: global,
        });
    }
    Ok(TrainOutcome { weights: w, curve })
}

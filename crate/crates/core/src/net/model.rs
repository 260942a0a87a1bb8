use serde::{Deserialize, Serialize};

use super::ops::{self, LnCache};
use super::scalar::{gemm, Real, Trans};
use super::NetConfig;
use crate::error::{Error, Result};
use crate::rng::{domain, StreamRng};

/// One named parameter tensor inside the flat parameter buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TensorSpec {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub fan_in: usize,
    pub kind: ParamKind,
    pub head: bool,
}

impl TensorSpec {
    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn range(&self) -> std::ops::Range<usize> {
        self.offset..self.offset + self.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKind {
    Weight,
    Bias,
    NormScale,
    NormShift,
}

#[derive(Debug, Clone, Copy)]
struct Ln {
    g: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy)]
struct Affine {
    w: usize,
    b: usize,
}

#[derive(Debug, Clone, Copy)]
struct Block {
    dw: Affine,
    ln: Ln,
    pw1: Affine,
    pw2: Affine,
}

#[derive(Debug, Clone)]
struct Stage {
    down: Option<(Ln, Affine)>,
    blocks: Vec<Block>,
}

/// Tensor order of a configuration; it is also the on-disk order.
#[derive(Debug, Clone)]
pub(crate) struct Layout {
    pub tensors: Vec<TensorSpec>,
    pub total: usize,
    stem: Affine,
    stem_ln: Ln,
    stages: Vec<Stage>,
    head_ln: Ln,
    selection: Option<Affine>,
    regression: Option<Affine>,
}

struct LayoutBuilder {
    tensors: Vec<TensorSpec>,
    total: usize,
}

impl LayoutBuilder {
    fn push(&mut self, name: String, shape: Vec<usize>, fan_in: usize, kind: ParamKind, head: bool) -> usize {
        let spec = TensorSpec {
            name,
            shape,
            offset: self.total,
            fan_in,
            kind,
            head,
        };
        self.total += spec.len();
        self.tensors.push(spec);
        self.tensors.len() - 1
    }

    fn affine(&mut self, name: &str, fan_in: usize, shape: Vec<usize>, out: usize, head: bool) -> Affine {
        Affine {
            w: self.push(format!("{name}.weight"), shape, fan_in, ParamKind::Weight, head),
            b: self.push(format!("{name}.bias"), vec![out], fan_in, ParamKind::Bias, head),
        }
    }

    fn ln(&mut self, name: &str, c: usize, head: bool) -> Ln {
        Ln {
            g: self.push(format!("{name}.scale"), vec![c], c, ParamKind::NormScale, head),
            b: self.push(format!("{name}.shift"), vec![c], c, ParamKind::NormShift, head),
        }
    }
}

impl Layout {
    pub fn new(cfg: &NetConfig) -> Self {
        let mut lb = LayoutBuilder {
            tensors: Vec::new(),
            total: 0,
        };
        let p = cfg.stem_stride;
        let c0 = cfg.stage_widths[0];
        let stem = lb.affine("stem", p * p, vec![p * p, c0], c0, false);
        let stem_ln = lb.ln("stem.norm", c0, false);
        let k = cfg.kernel_size;
        let mut stages = Vec::new();
        for (si, (&c, &nb)) in cfg.stage_widths.iter().zip(&cfg.blocks_per_stage).enumerate() {
            let down = (si > 0).then(|| {
                let prev = cfg.stage_widths[si - 1];
                let ln = lb.ln(&format!("down{si}.norm"), prev, false);
                let conv = lb.affine(&format!("down{si}"), 4 * prev, vec![4 * prev, c], c, false);
                (ln, conv)
            });
            let hidden = c * cfg.expansion_ratio;
            let blocks = (0..nb)
                .map(|bi| {
                    let name = format!("stage{si}.block{bi}");
                    Block {
                        dw: lb.affine(&format!("{name}.dwconv"), k * k, vec![k * k, c], c, false),
                        ln: lb.ln(&format!("{name}.norm"), c, false),
                        pw1: lb.affine(&format!("{name}.pwconv1"), c, vec![c, hidden], hidden, false),
                        pw2: lb.affine(&format!("{name}.pwconv2"), hidden, vec![hidden, c], c, false),
                    }
                })
                .collect();
            stages.push(Stage { down, blocks });
        }
        let cl = *cfg.stage_widths.last().unwrap();
        let head_ln = lb.ln("head.norm", cl, true);
        let selection = cfg
            .head
            .has_selection()
            .then(|| lb.affine("head.select", cl, vec![cl, 1], 1, true));
        let regression = cfg
            .head
            .has_regression()
            .then(|| lb.affine("head.regress", cl, vec![cl, 2], 2, true));
        Layout {
            tensors: lb.tensors,
            total: lb.total,
            stem,
            stem_ln,
            stages,
            head_ln,
            selection,
            regression,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrainingStage {
    Initial,
    HeadOnly,
    SgdWarm,
    Adaptive,
}

impl TrainingStage {
    pub fn as_str(self) -> &'static str {
        match self {
            TrainingStage::Initial => "initial",
            TrainingStage::HeadOnly => "head_only",
            TrainingStage::SgdWarm => "sgd_warm",
            TrainingStage::Adaptive => "adaptive",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "initial" => TrainingStage::Initial,
            "head_only" => TrainingStage::HeadOnly,
            "sgd_warm" => TrainingStage::SgdWarm,
            "adaptive" => TrainingStage::Adaptive,
            _ => return None,
        })
    }
}

/// All network parameters in one flat buffer, described by `tensors()`.
#[derive(Debug, Clone)]
pub struct ModelWeights<T> {
    pub config: NetConfig,
    pub stage: TrainingStage,
    pub data: Vec<T>,
    layout: Layout,
}

impl<T: Real> PartialEq for ModelWeights<T> {
    fn eq(&self, other: &Self) -> bool {
        self.config == other.config && self.stage == other.stage && self.data == other.data
    }
}

impl<T: Real> ModelWeights<T> {
    pub fn zeros(config: &NetConfig) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(config);
        Ok(ModelWeights {
            config: config.clone(),
            stage: TrainingStage::Initial,
            data: vec![T::zero(); layout.total],
            layout,
        })
    }

    /// Fan-in scaled uniform weights `U(-sqrt(3/fan_in), sqrt(3/fan_in))`,
    /// zero biases and shifts, unit norm scales. Residual output projections
    /// are scaled down by 0.1 so that blocks start near the identity.
    pub fn init(config: &NetConfig, seed: u64) -> Result<Self> {
        let mut w = Self::zeros(config)?;
        for (ti, spec) in w.layout.tensors.clone().iter().enumerate() {
            let mut rng = StreamRng::derive(seed, domain::INIT, ti as u64);
            let slice = &mut w.data[spec.range()];
            match spec.kind {
                ParamKind::Weight => {
                    let mut bound = (3.0 / spec.fan_in as f64).sqrt();
                    if spec.name.ends_with("pwconv2.weight") {
                        bound *= 0.1;
                    }
                    for v in slice.iter_mut() {
                        *v = T::lit(rng.range(-bound, bound));
                    }
                }
                ParamKind::NormScale => slice.iter_mut().for_each(|v| *v = T::one()),
                ParamKind::Bias | ParamKind::NormShift => {}
            }
        }
        Ok(w)
    }

    pub(crate) fn from_parts(config: NetConfig, stage: TrainingStage, data: Vec<T>) -> Result<Self> {
        config.validate()?;
        let layout = Layout::new(&config);
        if data.len() != layout.total {
            return Err(Error::ShapeMismatch(format!(
                "{} parameters for a layout of {}",
                data.len(),
                layout.total
            )));
        }
        Ok(ModelWeights {
            config,
            stage,
            data,
            layout,
        })
    }

    pub fn tensors(&self) -> &[TensorSpec] {
        &self.layout.tensors
    }

    pub fn num_params(&self) -> usize {
        self.layout.total
    }

    #[inline]
    fn t(&self, idx: usize) -> &[T] {
        &self.data[self.layout.tensors[idx].range()]
    }

    pub fn tensor(&self, name: &str) -> Option<&[T]> {
        self.layout
            .tensors
            .iter()
            .find(|s| s.name == name)
            .map(|s| &self.data[s.range()])
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<U: Real>(&self) -> ModelWeights<U> {
        ModelWeights {
            config: self.config.clone(),
            stage: self.stage,
            data: self.data.iter().map(|v| U::lit(v.f64())).collect(),
            layout: self.layout.clone(),
        }
    }
}

/// Gradient buffer with the same layout as the weights it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub data: Vec<T>,
}

impl<T: Real> Gradients<T> {
    pub fn zeros_like(w: &ModelWeights<T>) -> Self {
        Gradients {
            data: vec![T::zero(); w.num_params()],
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = T::zero());
    }

    pub fn tensor<'a>(&'a self, spec: &TensorSpec) -> &'a [T] {
        &self.data[spec.range()]
    }
}

/// Network output for one view.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction<T> {
    pub grid: usize,
    pub input_size: usize,
    /// Row-major `grid x grid` logits, when the selection head exists.
    pub heatmap: Option<Vec<T>>,
    /// Regression output as a fraction of `input_size`.
    pub coords_norm: Option<(T, T)>,
}

impl<T: Real> Prediction<T> {
    pub fn coords_px(&self) -> Option<(f64, f64)> {
        let s = self.input_size as f64;
        self.coords_norm.map(|(u, v)| (u.f64() * s, v.f64() * s))
    }

    /// Coordinates inside `[-n, 2n]` and heatmap finite.
    pub fn is_sane(&self) -> bool {
        let s = self.input_size as f64;
        self.heatmap.as_ref().map_or(true, |h| h.iter().all(|v| v.is_finite()))
            && self
                .coords_px()
                .map_or(true, |(u, v)| (-s..=2.0 * s).contains(&u) && (-s..=2.0 * s).contains(&v))
    }
}

#[derive(Debug, Clone, Default)]
struct BlockCache<T> {
    input: Vec<T>,
    ln: LnCache<T>,
    pre: Vec<T>,
    act: Vec<T>,
    tanh: Vec<T>,
}

#[derive(Debug, Clone, Default)]
struct StageCache<T> {
    side: usize,
    down_ln: LnCache<T>,
    down_cols: Vec<T>,
    blocks: Vec<BlockCache<T>>,
    output: Vec<T>,
}

/// Reusable activation storage for forward and backward passes.
#[derive(Debug, Clone, Default)]
pub struct Workspace<T> {
    input: Vec<T>,
    stem_cols: Vec<T>,
    stem_pre: Vec<T>,
    stem_ln: LnCache<T>,
    stages: Vec<StageCache<T>>,
    head_ln: LnCache<T>,
    pooled: Vec<T>,
    logits: Vec<T>,
    coords: (T, T),
    s: [Vec<T>; 4],
}

impl<T: Real> Workspace<T> {
    pub fn new() -> Self {
        Workspace::default()
    }

    /// Output of stage `si` from the last forward pass, channels-last,
    /// with its side length.
    pub fn stage_output(&self, si: usize) -> Option<(&[T], usize)> {
        self.stages.get(si).map(|st| (st.output.as_slice(), st.side))
    }

    fn load_input(&mut self, image: &[f32]) {
        self.input.clear();
        self.input.extend(image.iter().map(|&v| T::lit(v as f64)));
    }

    pub(crate) fn load_u8(&mut self, pixels: &[u8]) {
        let scale = 1.0 / 255.0;
        self.input.clear();
        self.input.extend(pixels.iter().map(|&v| T::lit(v as f64 * scale)));
    }
}

fn check_finite<T: Real>(v: &[T], what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFiniteActivation(what))
    }
}

/// Forward pass over `ws.input`, keeping every activation needed by backward.
pub(crate) fn forward_ws<T: Real>(w: &ModelWeights<T>, ws: &mut Workspace<T>) -> Result<Prediction<T>> {
    let cfg = &w.config;
    let lay = &w.layout;
    let n = cfg.input_size;
    if ws.input.len() != n * n {
        return Err(Error::ShapeMismatch(format!(
            "input has {} pixels, network expects {n}x{n}",
            ws.input.len()
        )));
    }
    let eps = T::lit(cfg.ln_eps);
    let k = cfg.kernel_size;
    let p = cfg.stem_stride;
    let mut side = n / p;
    let c0 = cfg.stage_widths[0];

    ops::patchify(&ws.input, n, n, 1, p, &mut ws.stem_cols);
    ops::linear(&ws.stem_cols, side * side, p * p, w.t(lay.stem.w), w.t(lay.stem.b), c0, &mut ws.stem_pre);
    ops::layer_norm(&ws.stem_pre, c0, w.t(lay.stem_ln.g), w.t(lay.stem_ln.b), eps, &mut ws.stem_ln);

    ws.stages.resize_with(lay.stages.len(), StageCache::default);
    let [x, tmp, _, _] = &mut ws.s;
    x.clear();
    x.extend_from_slice(&ws.stem_ln.out);
    let mut c = c0;
    for (si, stage) in lay.stages.iter().enumerate() {
        let sc = &mut ws.stages[si];
        if let Some((ln, conv)) = &stage.down {
            ops::layer_norm(x, c, w.t(ln.g), w.t(ln.b), eps, &mut sc.down_ln);
            ops::patchify(&sc.down_ln.out, side, side, c, 2, &mut sc.down_cols);
            side /= 2;
            let cout = cfg.stage_widths[si];
            ops::linear(&sc.down_cols, side * side, 4 * c, w.t(conv.w), w.t(conv.b), cout, x);
            c = cout;
        }
        sc.side = side;
        let hidden = c * cfg.expansion_ratio;
        let npos = side * side;
        sc.blocks.resize_with(stage.blocks.len(), BlockCache::default);
        for (bi, blk) in stage.blocks.iter().enumerate() {
            let bc = &mut sc.blocks[bi];
            bc.input.clear();
            bc.input.extend_from_slice(x);
            ops::depthwise(x, side, side, c, k, w.t(blk.dw.w), w.t(blk.dw.b), cfg.padding, tmp);
            ops::layer_norm(tmp, c, w.t(blk.ln.g), w.t(blk.ln.b), eps, &mut bc.ln);
            ops::linear(&bc.ln.out, npos, c, w.t(blk.pw1.w), w.t(blk.pw1.b), hidden, &mut bc.pre);
            ops::gelu(&bc.pre, &mut bc.act, &mut bc.tanh);
            // x <- x + act W2 + b2
            let b2 = w.t(blk.pw2.b);
            for row in x.chunks_exact_mut(c) {
                for (v, &b) in row.iter_mut().zip(b2) {
                    *v += b;
                }
            }
            gemm(npos, hidden, c, &bc.act, Trans::No, w.t(blk.pw2.w), Trans::No, x, true);
        }
        sc.output.clear();
        sc.output.extend_from_slice(x);
    }
    check_finite(x, "backbone")?;

    ops::layer_norm(x, c, w.t(lay.head_ln.g), w.t(lay.head_ln.b), eps, &mut ws.head_ln);
    let npos = side * side;
    let feats = &ws.head_ln.out;
    let heatmap = if let Some(sel) = &lay.selection {
        ops::linear(feats, npos, c, w.t(sel.w), w.t(sel.b), 1, &mut ws.logits);
        check_finite(&ws.logits, "selection head")?;
        Some(ws.logits.clone())
    } else {
        None
    };
    let coords_norm = if let Some(reg) = &lay.regression {
        ws.pooled.clear();
        ws.pooled.resize(c, T::zero());
        for row in feats.chunks_exact(c) {
            for (a, &v) in ws.pooled.iter_mut().zip(row) {
                *a += v;
            }
        }
        let inv = T::one() / T::from_usize(npos).unwrap();
        ws.pooled.iter_mut().for_each(|v| *v *= inv);
        let mut out = Vec::with_capacity(2);
        ops::linear(&ws.pooled, 1, c, w.t(reg.w), w.t(reg.b), 2, &mut out);
        check_finite(&out, "regression head")?;
        ws.coords = (out[0], out[1]);
        Some(ws.coords)
    } else {
        None
    };
    Ok(Prediction {
        grid: side,
        input_size: n,
        heatmap,
        coords_norm,
    })
}

/// Run the network on an `input_size x input_size` image with values in [0, 1].
pub fn forward<T: Real>(w: &ModelWeights<T>, image: &[f32]) -> Result<Prediction<T>> {
    let mut ws = Workspace::new();
    forward_with(w, image, &mut ws)
}

pub fn forward_with<T: Real>(w: &ModelWeights<T>, image: &[f32], ws: &mut Workspace<T>) -> Result<Prediction<T>> {
    ws.load_input(image);
    forward_ws(w, ws)
}

/// Gradients of the head outputs for one example.
pub(crate) struct OutputGrads<T> {
    pub dlogits: Option<Vec<T>>,
    pub dcoords: Option<(T, T)>,
}

/// Reverse pass after [`forward_ws`]; accumulates into `grads`. With
/// `body == false` only head tensors receive gradients.
pub(crate) fn backward_ws<T: Real>(
    w: &ModelWeights<T>,
    ws: &mut Workspace<T>,
    out: &OutputGrads<T>,
    grads: &mut Gradients<T>,
    body: bool,
) -> Result<()> {
    let cfg = &w.config;
    let lay = &w.layout;
    let k = cfg.kernel_size;
    let nst = lay.stages.len();
    let mut c = *cfg.stage_widths.last().unwrap();
    let mut side = ws.stages[nst - 1].side;
    let npos = side * side;

    // Split the gradient buffer per tensor without aliasing.
    let specs = &lay.tensors;
    assert_eq!(grads.data.len(), lay.total);
    let base = grads.data.as_mut_ptr();
    macro_rules! grad {
        ($idx:expr) => {{
            let r = specs[$idx].range();
            // SAFETY: ranges lie inside the buffer and distinct tensors are
            // disjoint; no call below takes the same tensor twice.
            unsafe { std::slice::from_raw_parts_mut(base.add(r.start), r.len()) }
        }};
    }

    let [dx, da, db, dc] = &mut ws.s;
    dx.clear();
    dx.resize(npos * c, T::zero());
    if let (Some(sel), Some(dl)) = (&lay.selection, &out.dlogits) {
        let wsel = w.t(sel.w);
        ops::linear_backward(&ws.head_ln.out, dl, npos, c, wsel, 1, grad!(sel.w), grad!(sel.b), None);
        for (row, &d) in dx.chunks_exact_mut(c).zip(dl.iter()) {
            for (v, &wv) in row.iter_mut().zip(wsel) {
                *v += d * wv;
            }
        }
    }
    if let (Some(reg), Some((du, dv))) = (&lay.regression, out.dcoords) {
        let dy = [du, dv];
        let mut dpooled = Vec::new();
        ops::linear_backward(&ws.pooled, &dy, 1, c, w.t(reg.w), 2, grad!(reg.w), grad!(reg.b), Some(&mut dpooled));
        let inv = T::one() / T::from_usize(npos).unwrap();
        for row in dx.chunks_exact_mut(c) {
            for (v, &d) in row.iter_mut().zip(&dpooled) {
                *v += d * inv;
            }
        }
    }
    ops::layer_norm_backward(dx, c, w.t(lay.head_ln.g), &ws.head_ln, da, grad!(lay.head_ln.g), grad!(lay.head_ln.b));
    std::mem::swap(dx, da);
    if !body {
        return Ok(());
    }

    for si in (0..nst).rev() {
        let stage = &lay.stages[si];
        let sc = &ws.stages[si];
        let hidden = c * cfg.expansion_ratio;
        let npos = side * side;
        for (bi, blk) in stage.blocks.iter().enumerate().rev() {
            let bc = &sc.blocks[bi];
            // dx holds d(block output); the residual passes it through unchanged.
            ops::linear_backward(&bc.act, dx, npos, hidden, w.t(blk.pw2.w), c, grad!(blk.pw2.w), grad!(blk.pw2.b), Some(da));
            ops::gelu_backward(&bc.pre, &bc.tanh, da);
            ops::linear_backward(&bc.ln.out, da, npos, c, w.t(blk.pw1.w), hidden, grad!(blk.pw1.w), grad!(blk.pw1.b), Some(db));
            ops::layer_norm_backward(db, c, w.t(blk.ln.g), &bc.ln, dc, grad!(blk.ln.g), grad!(blk.ln.b));
            ops::depthwise_backward(&bc.input, dc, side, side, c, k, w.t(blk.dw.w), cfg.padding, grad!(blk.dw.w), grad!(blk.dw.b), da);
            for (v, &d) in dx.iter_mut().zip(da.iter()) {
                *v += d;
            }
        }
        if let Some((ln, conv)) = &stage.down {
            let prev = cfg.stage_widths[si - 1];
            let cols_w = 4 * prev;
            ops::linear_backward(&sc.down_cols, dx, npos, cols_w, w.t(conv.w), c, grad!(conv.w), grad!(conv.b), Some(da));
            let up = side * 2;
            db.clear();
            db.resize(up * up * prev, T::zero());
            ops::unpatchify(da, up, up, prev, 2, db);
            ops::layer_norm_backward(db, prev, w.t(ln.g), &sc.down_ln, dx, grad!(ln.g), grad!(ln.b));
            side = up;
            c = prev;
        }
    }
    ops::layer_norm_backward(dx, c, w.t(lay.stem_ln.g), &ws.stem_ln, da, grad!(lay.stem_ln.g), grad!(lay.stem_ln.b));
    let p = cfg.stem_stride;
    ops::linear_backward(&ws.stem_cols, da, side * side, p * p, w.t(lay.stem.w), c, grad!(lay.stem.w), grad!(lay.stem.b), None);
    Ok(())
}

/// Loss and exact parameter gradients for one example.
pub fn backward<T: Real>(
    w: &ModelWeights<T>,
    image: &[f32],
    target_px: (f64, f64),
    loss: super::LossKind,
) -> Result<(T, Gradients<T>)> {
    let mut ws = Workspace::new();
    let mut grads = Gradients::zeros_like(w);
    ws.load_input(image);
    let value = super::loss::example_step(w, &mut ws, target_px, loss, &mut grads, true)?;
    for spec in w.tensors() {
        if grads.tensor(spec).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteGradient(spec.name.clone()));
        }
    }
    Ok((value, grads))
}

/// Loss of one example without gradients.
pub fn loss_value<T: Real>(w: &ModelWeights<T>, image: &[f32], target_px: (f64, f64), loss: super::LossKind) -> Result<T> {
    let mut ws = Workspace::new();
    ws.load_input(image);
    super::loss::example_loss(w, &mut ws, target_px, loss)
}

/// Target estimate from one view.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetEstimate {
    pub px: (f64, f64),
    /// Softmax mass of the selected cell (selection head) or 1 (regression only).
    pub confidence: f64,
    /// Selected cell `(col, row)` when the selection head produced the estimate.
    pub cell: Option<(usize, usize)>,
}

/// Selection head wins when both heads exist; ties in the argmax go to
/// the lowest row-major cell index.
pub fn predict_target<T: Real>(pred: &Prediction<T>, output_stride: usize) -> TargetEstimate {
    if let Some(h) = &pred.heatmap {
        let mut best = 0;
        for (i, v) in h.iter().enumerate() {
            if *v > h[best] {
                best = i;
            }
        }
        let probs = super::loss::softmax(h);
        let (col, row) = (best % pred.grid, best / pred.grid);
        let s = output_stride as f64;
        return TargetEstimate {
            px: (col as f64 * s + s / 2.0, row as f64 * s + s / 2.0),
            confidence: probs[best].f64(),
            cell: Some((col, row)),
        };
    }
    TargetEstimate {
        px: pred.coords_px().unwrap_or((f64::NAN, f64::NAN)),
        confidence: 1.0,
        cell: None,
    }
}

use stackguide::net::*;
use stackguide::rng::StreamRng;
use stackguide::Error;

fn image(n: usize, seed: u64) -> Vec<f32> {
    let mut rng = StreamRng::new(seed);
    (0..n * n).map(|_| rng.uniform() as f32).collect()
}

/// A generic parameter point: init plus noise on every entry, so biases,
/// shifts and scales are all away from their special initial values.
fn jittered(cfg: &NetConfig, seed: u64) -> ModelWeights<f64> {
    let mut w = ModelWeights::<f64>::init(cfg, seed).unwrap();
    let mut rng = StreamRng::new(seed ^ 0x5eed);
    for v in w.data.iter_mut() {
        *v += 0.2 * (rng.uniform() - 0.5);
    }
    w
}

fn check_gradients(cfg: &NetConfig, loss: LossKind, target: (f64, f64)) {
    let w = jittered(cfg, 17);
    let img = image(cfg.input_size, 4);
    let (_, grads) = backward(&w, &img, target, loss).unwrap();
    let h = 1e-5;
    for spec in w.tensors() {
        let mut num = Vec::with_capacity(spec.len());
        for i in spec.range() {
            let mut wp = w.clone();
            wp.data[i] += h;
            let mut wm = w.clone();
            wm.data[i] -= h;
            let lp = loss_value(&wp, &img, target, loss).unwrap();
            let lm = loss_value(&wm, &img, target, loss).unwrap();
            num.push((lp - lm) / (2.0 * h));
        }
        let ana = grads.tensor(spec);
        let diff: f64 = ana.iter().zip(&num).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = ana.iter().map(|a| a * a).sum::<f64>().sqrt().max(num.iter().map(|b| b * b).sum::<f64>().sqrt());
        let rel = if scale < 1e-10 { diff } else { diff / scale };
        assert!(rel < 1e-4, "{} ({loss:?}): relative error {rel:e}", spec.name);
    }
}

fn reduced_both() -> NetConfig {
    NetConfig {
        head: HeadKind::Both,
        ..NetConfig::reduced()
    }
}

#[test]
fn gradients_match_finite_differences_selection() {
    check_gradients(&reduced_both(), LossKind::Selection, (13.3, 20.9));
}

#[test]
fn gradients_match_finite_differences_regression() {
    check_gradients(&reduced_both(), LossKind::Regression, (13.3, 20.9));
}

#[test]
fn gradients_match_with_circular_padding() {
    let cfg = NetConfig {
        padding: Padding::Circular,
        ..reduced_both()
    };
    check_gradients(&cfg, LossKind::Both, (3.0, 30.0));
}

#[test]
fn zero_weights_give_zero_outputs() {
    let cfg = NetConfig {
        head: HeadKind::Both,
        ..NetConfig::default()
    };
    assert_eq!(cfg.grid(), 32);
    let w = ModelWeights::<f32>::zeros(&cfg).unwrap();
    let p = forward(&w, &image(256, 1)).unwrap();
    assert_eq!(p.grid, 32);
    let heat = p.heatmap.as_ref().unwrap();
    assert_eq!(heat.len(), 1024);
    assert!(heat.iter().all(|&v| v == 0.0));
    assert_eq!(p.coords_norm, Some((0.0, 0.0)));
}

#[test]
fn circular_padding_is_shift_equivariant() {
    let cfg = NetConfig {
        input_size: 64,
        padding: Padding::Circular,
        ..NetConfig::default()
    };
    let w = ModelWeights::<f64>::init(&cfg, 2).unwrap();
    let n = 64;
    let img = image(n, 9);
    // content moved right by one output cell (8 px)
    let shifted: Vec<f32> = (0..n * n).map(|i| img[(i / n) * n + (i % n + n - 8) % n]).collect();
    let mut wa = Workspace::new();
    let mut wb = Workspace::new();
    let pa = forward_with(&w, &img, &mut wa).unwrap();
    let pb = forward_with(&w, &shifted, &mut wb).unwrap();
    let (oa, side) = wa.stage_output(1).unwrap();
    let (ob, _) = wb.stage_output(1).unwrap();
    let c = cfg.stage_widths[1];
    for y in 0..side {
        for x in 0..side {
            let a = &oa[(y * side + x) * c..(y * side + x + 1) * c];
            let xb = (x + 1) % side;
            let b = &ob[(y * side + xb) * c..(y * side + xb + 1) * c];
            for (u, v) in a.iter().zip(b) {
                assert!((u - v).abs() < 1e-9);
            }
        }
    }
    let (ha, hb) = (pa.heatmap.unwrap(), pb.heatmap.unwrap());
    let g = pa.grid;
    for i in 0..g * g {
        let (x, y) = (i % g, i / g);
        assert!((ha[i] - hb[y * g + (x + 1) % g]).abs() < 1e-9);
    }
}

#[test]
fn head_gradients_vanish_at_zero_loss() {
    let cfg = NetConfig {
        head: HeadKind::Regression,
        ..NetConfig::reduced()
    };
    let mut w = ModelWeights::<f64>::init(&cfg, 5).unwrap();
    let target = (9.0, 21.0);
    let spec = w.tensors().iter().find(|t| t.name == "head.regress.weight").unwrap().clone();
    w.data[spec.range()].iter_mut().for_each(|v| *v = 0.0);
    let bias = w.tensors().iter().find(|t| t.name == "head.regress.bias").unwrap().clone();
    w.data[bias.range()].copy_from_slice(&[9.0 / 32.0, 21.0 / 32.0]);
    let (loss, grads) = backward(&w, &image(32, 3), target, LossKind::Regression).unwrap();
    assert!(loss.abs() < 1e-24);
    assert!(grads.data.iter().all(|g| g.abs() < 1e-12));
}

#[test]
fn backward_is_bitwise_deterministic() {
    let cfg = NetConfig::default();
    let w = ModelWeights::<f32>::init(&cfg, 8).unwrap();
    let img = image(256, 2);
    let a = backward(&w, &img, (100.0, 40.0), LossKind::Selection).unwrap();
    let b = backward(&w, &img, (100.0, 40.0), LossKind::Selection).unwrap();
    assert_eq!(a.0.to_bits(), b.0.to_bits());
    assert!(a.1.data.iter().zip(&b.1.data).all(|(x, y)| x.to_bits() == y.to_bits()));
}

fn examples(n: usize, count: usize, seed: u64) -> Vec<Example> {
    let mut rng = StreamRng::new(seed);
    (0..count)
        .map(|_| {
            let target = (rng.range(0.0, n as f64), rng.range(0.0, n as f64));
            // a bright square marks the target on a noisy background
            let pixels = (0..n * n)
                .map(|i| {
                    let (x, y) = ((i % n) as f64, (i / n) as f64);
                    let near = (x - target.0).abs() < 3.0 && (y - target.1).abs() < 3.0;
                    if near { 250 } else { (rng.below(80)) as u8 }
                })
                .collect();
            Example { pixels, target_px: target }
        })
        .collect()
}

#[test]
fn tiny_set_is_overfit() {
    let cfg = NetConfig::reduced();
    let w = ModelWeights::<f32>::init(&cfg, 1).unwrap();
    let data = examples(32, 8, 4);
    let tc = TrainConfig {
        head_only: HeadStage { steps: 0, lr: 1e-2 },
        sgd_warm: SgdStage {
            steps: 0,
            ..SgdStage::default()
        },
        adaptive: AdaptiveStage {
            steps: 500,
            lr: 1e-2,
            warmup_steps: 10,
            ..AdaptiveStage::default()
        },
        batch_size: 8,
        clip_grad_norm: None,
        ..TrainConfig::default()
    };
    let out = train(w, &data, &tc).unwrap();
    let first = out.curve.records[0].loss;
    let last = out.curve.records.last().unwrap().loss;
    assert!(last < 0.01 * first, "{first} -> {last}");
    assert_eq!(out.weights.stage, TrainingStage::Adaptive);
}

#[test]
fn training_is_reproducible_and_zero_steps_is_identity() {
    let cfg = NetConfig::reduced();
    let w = ModelWeights::<f32>::init(&cfg, 1).unwrap();
    let data = examples(32, 6, 5);
    let tc = TrainConfig {
        head_only: HeadStage { steps: 3, lr: 1e-2 },
        sgd_warm: SgdStage {
            steps: 3,
            ..SgdStage::default()
        },
        adaptive: AdaptiveStage {
            steps: 3,
            ..AdaptiveStage::default()
        },
        batch_size: 4,
        ..TrainConfig::default()
    };
    let a = train(w.clone(), &data, &tc).unwrap();
    let b = train(w.clone(), &data, &tc).unwrap();
    assert_eq!(a.weights, b.weights);
    assert_eq!(a.curve.to_text(), b.curve.to_text());
    assert_eq!(a.curve.records.len(), 9);
    // the head-only stage leaves the body untouched
    let head_only = TrainConfig {
        sgd_warm: SgdStage { steps: 0, ..SgdStage::default() },
        adaptive: AdaptiveStage { steps: 0, ..AdaptiveStage::default() },
        ..tc.clone()
    };
    let h = train(w.clone(), &data, &head_only).unwrap();
    for spec in w.tensors() {
        let same = h.weights.data[spec.range()] == w.data[spec.range()];
        assert_eq!(same, !spec.head, "{}", spec.name);
    }
    let none = TrainConfig {
        head_only: HeadStage { steps: 0, lr: 1e-2 },
        ..head_only
    };
    assert_eq!(train(w.clone(), &data, &none).unwrap().weights, w);
}

#[test]
fn invalid_training_inputs() {
    let cfg = NetConfig::reduced();
    let w = ModelWeights::<f32>::init(&cfg, 1).unwrap();
    assert!(matches!(train(w.clone(), &[], &TrainConfig::default()), Err(Error::EmptyInput(_))));
    let bad = TrainConfig {
        loss: LossKind::Regression,
        ..TrainConfig::default()
    };
    assert!(matches!(train(w.clone(), &examples(32, 2, 1), &bad), Err(Error::InvalidConfig(_))));
    let huge = TrainConfig {
        head_only: HeadStage { steps: 0, lr: 1e-2 },
        sgd_warm: SgdStage { steps: 20, lr: 1e30, momentum: 0.9 },
        adaptive: AdaptiveStage { steps: 0, ..AdaptiveStage::default() },
        clip_grad_norm: None,
        ..TrainConfig::default()
    };
    let err = train(w, &examples(32, 4, 1), &huge).unwrap_err();
    assert!(
        matches!(err, Error::DivergedLoss { .. } | Error::NonFiniteActivation(_)),
        "{err:?}"
    );
}

#[test]
fn cell_centers_and_quantization_bound() {
    let grid = 32;
    let mk = |cell: usize| {
        let mut h = vec![0f32; grid * grid];
        h[cell] = 5.0;
        Prediction {
            grid,
            input_size: 256,
            heatmap: Some(h),
            coords_norm: None,
        }
    };
    assert_eq!(predict_target(&mk(0), 8).px, (4.0, 4.0));
    assert_eq!(predict_target(&mk(grid * grid - 1), 8).px, (252.0, 252.0));
    // worst case inside a correctly selected cell is its corner
    let est = predict_target(&mk(0), 8);
    let corner = ((est.px.0 - 0.0f64).powi(2) + (est.px.1 - 0.0f64).powi(2)).sqrt();
    assert!(corner <= 5.66 + 1e-9);
    // ties go to the lowest index
    let flat = Prediction::<f32> {
        grid,
        input_size: 256,
        heatmap: Some(vec![1.0; grid * grid]),
        coords_norm: None,
    };
    assert_eq!(predict_target(&flat, 8).cell, Some((0, 0)));
    // selection wins over regression when both exist
    let both = Prediction {
        coords_norm: Some((0.9f32, 0.9f32)),
        ..mk(33)
    };
    assert_eq!(predict_target(&both, 8).px, (12.0, 12.0));
}

#[test]
fn weights_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let w = ModelWeights::<f32>::init(&NetConfig::default(), 3).unwrap();
    let path = dir.path().join("w.bin");
    write_weights(&path, &w).unwrap();
    let back = read_weights(&path).unwrap();
    assert_eq!(back, w);
    let again = dir.path().join("w2.bin");
    write_weights(&again, &back).unwrap();
    assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    assert!(std::fs::read(&path).unwrap().starts_with(WEIGHTS_MAGIC.as_bytes()));
}

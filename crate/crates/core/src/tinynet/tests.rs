use super::*;
use crate::sampler::{default_splits, generate, Sample};
use crate::geometry::GeometryParams;

/// Loss evaluated with plain loops, independent of `forward_into`.
#[allow(clippy::needless_range_loop)]
fn reference_loss(layers: &[Layer], batch: &[(FeatureVector, ClassLabel)]) -> f64 {
    let mut total = 0.0;
    for (f, c) in batch {
        let mut a = f.0.to_vec();
        for (l, layer) in layers.iter().enumerate() {
            let mut z = vec![0.0; layer.fan_out];
            for j in 0..layer.fan_out {
                z[j] = layer.biases[j];
                for i in 0..layer.fan_in {
                    z[j] += layer.weights[j * layer.fan_in + i] * a[i];
                }
            }
            if l + 1 < layers.len() {
                for v in &mut z {
                    if *v < 0.0 {
                        *v = 0.0;
                    }
                }
            }
            a = z;
        }
        let norm: f64 = a.iter().map(|z| z.exp()).sum::<f64>().ln();
        total += norm - a[c.index()];
    }
    total / batch.len() as f64
}

fn flatten(layers: &[Layer]) -> Vec<f64> {
    layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied()).collect()
}

fn unflatten(layers: &mut [Layer], params: &[f64]) {
    let mut it = params.iter().copied();
    for l in layers {
        for v in l.weights.iter_mut().chain(l.biases.iter_mut()) {
            *v = it.next().unwrap();
        }
    }
}

/// Central differences of `reference_loss`, in `Gradients::iter` order.
fn finite_difference(net: &Mlp, batch: &[(FeatureVector, ClassLabel)], h: f64) -> Vec<f64> {
    let mut layers = net.layers().to_vec();
    let base = flatten(&layers);
    (0..base.len())
        .map(|i| {
            let mut p = base.clone();
            p[i] = base[i] + h;
            unflatten(&mut layers, &p);
            let up = reference_loss(&layers, batch);
            p[i] = base[i] - h;
            unflatten(&mut layers, &p);
            let down = reference_loss(&layers, batch);
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn random_net(sizes: Vec<usize>, frozen: Vec<bool>, seed: u64) -> Mlp {
    let arch = MlpArchitecture::new(sizes, frozen).unwrap();
    let mut net = Mlp::init(&arch, seed);
    let mut rng = Rng::new(seed ^ 0xb1a5);
    for layer in net.layers_mut() {
        for b in &mut layer.biases {
            *b = rng.uniform_in(-0.5, 0.5);
        }
    }
    net
}

fn batch_from(seed: u64, n: usize) -> Vec<(FeatureVector, ClassLabel)> {
    let g = GeometryParams::default();
    let ds = generate(seed, n, &g).unwrap();
    ds.samples.iter().map(|s| (crate::sampler::features(s, &g), s.label)).collect()
}

#[test]
fn gradients_match_finite_differences() {
    let net = random_net(vec![4, 10, 3], vec![false, false], 17);
    let batch = batch_from(3, 20);
    let (loss, grads) = net.loss_and_grad(&batch).unwrap();
    assert!((loss - reference_loss(net.layers(), &batch)).abs() < 1e-12);
    let numeric = finite_difference(&net, &batch, 1e-6);
    let analytic: Vec<f64> = grads.iter().collect();
    assert_eq!(numeric.len(), analytic.len());
    for (i, (a, n)) in analytic.iter().zip(&numeric).enumerate() {
        let scale = a.abs().max(n.abs());
        assert!((a - n).abs() <= 1e-5 * scale + 1e-9, "param {i}: analytic {a}, numeric {n}");
    }
}

#[test]
fn frozen_layer_gradient_is_exactly_zero() {
    let net = random_net(vec![4, 10, 3], vec![true, false], 5);
    let (_, grads) = net.loss_and_grad(&batch_from(4, 20)).unwrap();
    assert!(grads.layers[0].weights.iter().chain(&grads.layers[0].biases).all(|&g| g == 0.0));
    assert!(grads.layers[1].weights.iter().any(|&g| g != 0.0));
}

#[test]
fn uniform_logits_cost_ln3() {
    let net = Mlp::init(&MlpArchitecture::shallow(), 0);
    let mut zero = net.clone();
    for l in zero.layers_mut() {
        l.weights.fill(0.0);
    }
    let batch = batch_from(1, 9);
    let (loss, _) = zero.loss_and_grad(&batch).unwrap();
    assert!((loss - 3f64.ln()).abs() < 1e-15);
}

#[test]
fn empty_batch_rejected() {
    let net = Mlp::init(&MlpArchitecture::shallow(), 0);
    assert!(net.loss_and_grad(&[]).is_err());
}

#[test]
fn zero_network_outputs_zero_logits() {
    let arch = MlpArchitecture::deep(5);
    let mut net = Mlp::init(&arch, 1);
    for l in net.layers_mut() {
        l.weights.fill(0.0);
    }
    let acts = net.forward(&[0.3, 0.2, 0.7, 0.8]).unwrap();
    assert_eq!(acts.logits(), &[0.0, 0.0, 0.0]);
}

#[test]
fn relu_gate_blocks_negative_unit() {
    // Hidden unit 0 gets a negative pre-activation; its huge outgoing weight must not matter.
    let arch = MlpArchitecture::new(vec![2, 2, 1], vec![false, false]).unwrap();
    let layers = vec![
        Layer { fan_in: 2, fan_out: 2, weights: vec![-1.0, -1.0, 1.0, 0.0], biases: vec![0.0, 0.0] },
        Layer { fan_in: 2, fan_out: 1, weights: vec![1e6, 1.0], biases: vec![0.0] },
    ];
    let net = Mlp::from_layers(arch, layers).unwrap();
    let acts = net.forward(&[0.5, 0.25]).unwrap();
    assert_eq!(acts.pre[0], vec![-0.75, 0.5]);
    assert_eq!(acts.post[0], vec![0.0, 0.5]);
    assert_eq!(acts.logits(), &[0.5]);
}

#[test]
fn hand_computed_two_two_two() {
    // All weights 1, biases (0, -1) then (0, 1); input (1, 2).
    // hidden pre = (3, 2), relu = (3, 2); logits = (5, 6).
    let arch = MlpArchitecture::new(vec![2, 2, 2], vec![false, false]).unwrap();
    let layers = vec![
        Layer { fan_in: 2, fan_out: 2, weights: vec![1.0; 4], biases: vec![0.0, -1.0] },
        Layer { fan_in: 2, fan_out: 2, weights: vec![1.0; 4], biases: vec![0.0, 1.0] },
    ];
    let net = Mlp::from_layers(arch, layers).unwrap();
    let acts = net.forward(&[1.0, 2.0]).unwrap();
    assert_eq!(acts.pre[0], vec![3.0, 2.0]);
    assert_eq!(acts.logits(), &[5.0, 6.0]);
}

#[test]
fn forward_rejects_bad_input() {
    let net = Mlp::init(&MlpArchitecture::deep(3), 0);
    assert!(net.forward(&[0.1, f64::NAN, 0.2, 0.3]).is_err());
    assert!(net.forward(&[0.1, 0.2]).is_err());
}

#[test]
fn init_is_deterministic_with_expected_shapes() {
    let arch = MlpArchitecture::deep(30);
    let a = Mlp::init(&arch, 9);
    assert_eq!(a, Mlp::init(&arch, 9));
    assert_ne!(a, Mlp::init(&arch, 10));
    let shapes: Vec<_> = a.layers().iter().map(|l| (l.fan_out, l.fan_in, l.weights.len())).collect();
    assert_eq!(shapes, [(30, 4, 120), (3, 30, 90)]);
    assert!(a.layers().iter().all(|l| l.biases.iter().all(|&b| b == 0.0)));
}

#[test]
fn shallow_init_bound() {
    let bound = (6.0f64 / 7.0).sqrt();
    for seed in 0..50 {
        let net = Mlp::init(&MlpArchitecture::shallow(), seed);
        assert!(net.layers()[0].weights.iter().all(|w| w.abs() <= bound));
    }
}

#[test]
fn architecture_validation() {
    assert!(MlpArchitecture::new(vec![4], vec![]).is_err());
    assert!(MlpArchitecture::new(vec![4, 0, 3], vec![false, false]).is_err());
    assert!(MlpArchitecture::new(vec![4, 3], vec![false, false]).is_err());
    assert!(MlpArchitecture::new(vec![2, 3], vec![false]).unwrap().check_dataset_shape().is_err());
    assert!(MlpArchitecture::deep(7).check_dataset_shape().is_ok());
}

#[test]
fn softmax_is_a_distribution() {
    let mut rng = Rng::new(4);
    for _ in 0..1000 {
        let z: Vec<f64> = (0..3).map(|_| rng.uniform_in(-50.0, 50.0)).collect();
        let p = softmax(&z);
        assert!(p.iter().all(|&v| v > 0.0));
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn argmax_prefers_lowest_index() {
    assert_eq!(argmax(&[1.0, 1.0, 0.0]), 0);
    assert_eq!(argmax(&[0.0, 2.0, 2.0]), 1);
    assert_eq!(argmax(&[0.0, 0.0, 3.0]), 2);
}

fn scalar_net(weight: f64) -> Mlp {
    let arch = MlpArchitecture::new(vec![1, 1], vec![false]).unwrap();
    Mlp::from_layers(arch, vec![Layer { fan_in: 1, fan_out: 1, weights: vec![weight], biases: vec![0.0] }]).unwrap()
}

fn unit_grad(net: &Mlp, g: f64) -> Gradients {
    let mut grads = Gradients::zeros_like(net);
    grads.layers[0].weights[0] = g;
    grads
}

#[test]
fn adam_zero_gradient_is_a_no_op() {
    let net0 = Mlp::init(&MlpArchitecture::deep(4), 3);
    let mut net = net0.clone();
    let mut opt = AdamState::new(&net, AdamConfig::default());
    opt.step(&mut net, &Gradients::zeros_like(&net0));
    assert_eq!(net, net0);
    assert_eq!(opt.t, 1);
}

#[test]
fn adam_first_step_has_magnitude_lr() {
    for g in [1.0, 1e-3, 250.0] {
        let mut net = scalar_net(0.0);
        let mut opt = AdamState::new(&net, AdamConfig::default());
        let grads = unit_grad(&net, g);
        opt.step(&mut net, &grads);
        // m̂ = g, v̂ = g², so the step is lr·g/(|g| + eps).
        let expected = -0.01 * g / (g + 1e-8);
        assert!((net.layers()[0].weights[0] - expected).abs() < 1e-15, "g={g}");
    }
}

#[test]
fn adam_two_steps_closed_form() {
    // Constant g = 1: m̂ = v̂ = 1 on both steps, so θ₂ = -2·lr/(1 + eps).
    let mut net = scalar_net(0.0);
    let mut opt = AdamState::new(&net, AdamConfig::default());
    let g = unit_grad(&net, 1.0);
    opt.step(&mut net, &g);
    assert!((net.layers()[0].weights[0] - (-0.01 / (1.0 + 1e-8))).abs() < 1e-12);
    opt.step(&mut net, &g);
    assert!((net.layers()[0].weights[0] - (-0.02 / (1.0 + 1e-8))).abs() < 1e-12);
    assert!(opt.v.layers[0].weights[0] >= 0.0);
}

#[test]
fn frozen_layers_survive_training_bit_for_bit() {
    let splits = default_splits();
    let arch = MlpArchitecture::frozen_deep(8);
    let cfg = TrainConfig { epochs: 2, init_seed: 21, ..Default::default() };
    let out = train(&arch, &cfg, &splits.train, &splits.validation).unwrap();
    let init = Mlp::init(&arch, 21);
    assert_eq!(out.net.layers()[0], init.layers()[0]);
    assert_ne!(out.net.layers()[1], init.layers()[1]);
}

#[test]
fn zero_epochs_returns_initial_network() {
    let splits = default_splits();
    let arch = MlpArchitecture::deep(6);
    let cfg = TrainConfig { epochs: 0, init_seed: 2, ..Default::default() };
    let out = train(&arch, &cfg, &splits.train, &splits.validation).unwrap();
    assert_eq!(out.net, Mlp::init(&arch, 2));
    assert!(out.curves.train_error.is_empty() && out.curves.validation_error.is_empty());
}

#[test]
fn training_is_deterministic_and_short_final_batch_counts() {
    let g = GeometryParams::default();
    let train_set = generate(8, 107, &g).unwrap();
    let val = generate(9, 30, &g).unwrap();
    let cfg = TrainConfig { epochs: 3, batch_size: 20, ..Default::default() };
    let a = train(&MlpArchitecture::deep(5), &cfg, &train_set, &val).unwrap();
    let b = train(&MlpArchitecture::deep(5), &cfg, &train_set, &val).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.curves.train_error.len(), 3);
}

#[test]
fn divergence_is_reported() {
    let splits = default_splits();
    let mut cfg = TrainConfig { epochs: 1, ..Default::default() };
    cfg.adam.lr = 1e300;
    let err = train(&MlpArchitecture::deep(4), &cfg, &splits.train, &splits.validation).unwrap_err();
    assert!(matches!(err, Error::Divergence { init_seed: 0, .. }), "{err}");
}

#[test]
fn constant_yin_classifier_on_balanced_set() {
    let g = GeometryParams::default();
    let ds = generate(40, 1000, &g).unwrap();
    let arch = MlpArchitecture::shallow();
    let layers = vec![Layer { fan_in: 4, fan_out: 3, weights: vec![0.0; 12], biases: vec![1.0, 0.0, 0.0] }];
    let net = Mlp::from_layers(arch, layers).unwrap();
    let ev = evaluate(&net, &ds);
    assert!((0.333..=0.334).contains(&ev.accuracy), "{}", ev.accuracy);
    let counts = ds.class_counts();
    for (row, count) in ev.confusion.iter().zip(counts) {
        assert_eq!(row.iter().sum::<usize>(), count);
    }
    assert!(ev.predictions.iter().all(|&p| p == ClassLabel::Yin));
}

#[test]
fn perfect_classifier_confusion_is_diagonal() {
    // A network cannot be hand-made perfect here, so relabel the set with its own predictions.
    let g = GeometryParams::default();
    let mut ds = generate(40, 300, &g).unwrap();
    let net = Mlp::init(&MlpArchitecture::deep(10), 1);
    let preds = evaluate(&net, &ds).predictions;
    for (s, p) in ds.samples.iter_mut().zip(&preds) {
        *s = Sample { label: *p, ..*s };
    }
    let ev = evaluate(&net, &ds);
    assert_eq!(ev.accuracy, 1.0);
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                assert_eq!(ev.confusion[i][j], 0);
            }
        }
    }
}

use serde::{Deserialize, Serialize};

use super::{argmax, AdamConfig, AdamState, Gradients, Mlp, MlpArchitecture, Workspace};
use crate::error::{Error, Result};
use crate::geometry::ClassLabel;
use crate::rng::Rng;
use crate::sampler::Dataset;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub init_seed: u64,
    pub shuffle_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 300, batch_size: 20, adam: AdamConfig::default(), init_seed: 0, shuffle_seed: 1_000_000 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        let a = self.adam;
        if !(a.lr > 0.0 && (0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::config(format!("invalid Adam parameters {a:?}")));
        }
        Ok(())
    }
}

/// Classification error (1 - accuracy) recorded at the end of every epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Curves {
    pub train_error: Vec<f64>,
    pub validation_error: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainOutcome {
    pub net: Mlp,
    pub curves: Curves,
}

/// Mini-batch Adam on softmax cross-entropy.
///
/// Every epoch reshuffles the training order with a stream seeded once from
/// `shuffle_seed`, walks it in batches of `batch_size` (keeping a short final
/// batch), then records train and validation error.
pub fn train(arch: &MlpArchitecture, cfg: &TrainConfig, train_set: &Dataset, val_set: &Dataset) -> Result<TrainOutcome> {
    arch.check_dataset_shape()?;
    cfg.validate()?;
    if train_set.is_empty() {
        return Err(Error::config("training set is empty"));
    }
    let mut net = Mlp::init(arch, cfg.init_seed);
    let mut opt = AdamState::new(&net, cfg.adam);
    let mut shuffler = Rng::new(cfg.shuffle_seed);
    let mut ws = Workspace::new(&net);
    let mut grads = Gradients::zeros_like(&net);

    let inputs = train_set.features();
    let targets: Vec<usize> = train_set.samples.iter().map(|s| s.label.index()).collect();
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut curves = Curves::default();

    for epoch in 0..cfg.epochs {
        shuffler.shuffle(&mut order);
        for batch in order.chunks(cfg.batch_size) {
            let loss = net.batch_loss_and_grad(
                batch.iter().map(|&i| (inputs[i].as_slice(), targets[i])),
                batch.len(),
                &mut ws,
                &mut grads,
            );
            if !loss.is_finite() {
                return Err(Error::Divergence { epoch, init_seed: cfg.init_seed });
            }
            opt.step(&mut net, &grads);
        }
        curves.train_error.push(1.0 - evaluate_with(&net, train_set, &mut ws).accuracy);
        curves.validation_error.push(1.0 - evaluate_with(&net, val_set, &mut ws).accuracy);
    }
    Ok(TrainOutcome { net, curves })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub accuracy: f64,
    /// `confusion[true][predicted]`.
    pub confusion: [[usize; 3]; 3],
    pub predictions: Vec<ClassLabel>,
}

/// Argmax predictions (lowest index on ties), confusion matrix and accuracy.
pub fn evaluate(net: &Mlp, ds: &Dataset) -> Evaluation {
    let mut ws = Workspace::new(net);
    evaluate_with(net, ds, &mut ws)
}

fn evaluate_with(net: &Mlp, ds: &Dataset, ws: &mut Workspace) -> Evaluation {
    let mut confusion = [[0usize; 3]; 3];
    let mut predictions = Vec::with_capacity(ds.len());
    for s in &ds.samples {
        let f = crate::sampler::features(s, &ds.geometry);
        net.forward_into(f.as_slice(), &mut ws.acts);
        let predicted = ClassLabel::from_index(argmax(ws.acts.logits())).unwrap_or(ClassLabel::Dot);
        confusion[s.label.index()][predicted.index()] += 1;
        predictions.push(predicted);
    }
    let correct: usize = (0..3).map(|i| confusion[i][i]).sum();
    let accuracy = if ds.is_empty() { 0.0 } else { correct as f64 / ds.len() as f64 };
    Evaluation { accuracy, confusion, predictions }
}

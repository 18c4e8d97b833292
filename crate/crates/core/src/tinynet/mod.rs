//! A dense ReLU network with a softmax cross-entropy readout.
//!
//! Layer `l` maps `a[l]` to `z[l + 1] = W[l] a[l] + b[l]`; hidden layers apply
//! ReLU, the last layer emits logits. Weight matrices are stored row-major with
//! shape `fan_out × fan_in`. Everything is `f64`.

mod adam;
mod train;

pub use adam::{AdamConfig, AdamState};
pub use train::{evaluate, train, Curves, Evaluation, TrainConfig, TrainOutcome};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ClassLabel;
use crate::rng::Rng;
use crate::sampler::FeatureVector;

/// Input width of every network trained on the dataset.
pub const INPUT_SIZE: usize = 4;
/// One logit per class.
pub const OUTPUT_SIZE: usize = ClassLabel::COUNT;

/// Layer widths and which weight layers are frozen.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpArchitecture {
    layer_sizes: Vec<usize>,
    frozen: Vec<bool>,
}

impl MlpArchitecture {
    /// Any widths are accepted here; [`MlpArchitecture::check_dataset_shape`]
    /// enforces the 4-in/3-out shape that training on the dataset needs.
    pub fn new(layer_sizes: Vec<usize>, frozen: Vec<bool>) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(Error::config("a network needs at least an input and an output layer"));
        }
        if layer_sizes.contains(&0) {
            return Err(Error::config(format!("layer sizes must be positive, got {layer_sizes:?}")));
        }
        if frozen.len() != layer_sizes.len() - 1 {
            return Err(Error::config(format!(
                "{} weight layers but {} frozen flags",
                layer_sizes.len() - 1,
                frozen.len()
            )));
        }
        Ok(Self { layer_sizes, frozen })
    }

    /// `[4, hidden, 3]`, fully trainable.
    pub fn deep(hidden: usize) -> Self {
        Self { layer_sizes: vec![INPUT_SIZE, hidden, OUTPUT_SIZE], frozen: vec![false, false] }
    }

    /// `[4, hidden, 3]` with the input-to-hidden layer frozen at initialization.
    pub fn frozen_deep(hidden: usize) -> Self {
        Self { layer_sizes: vec![INPUT_SIZE, hidden, OUTPUT_SIZE], frozen: vec![true, false] }
    }

    /// `[4, 3]`: inputs straight to labels.
    pub fn shallow() -> Self {
        Self { layer_sizes: vec![INPUT_SIZE, OUTPUT_SIZE], frozen: vec![false] }
    }

    pub fn check_dataset_shape(&self) -> Result<()> {
        let first = self.layer_sizes[0];
        let last = *self.layer_sizes.last().unwrap();
        if first != INPUT_SIZE || last != OUTPUT_SIZE {
            return Err(Error::config(format!(
                "networks for this dataset map {INPUT_SIZE} inputs to {OUTPUT_SIZE} classes, got {first} -> {last}"
            )));
        }
        Ok(())
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn frozen(&self) -> &[bool] {
        &self.frozen
    }

    pub fn num_weight_layers(&self) -> usize {
        self.frozen.len()
    }
}

/// Parameters of one affine layer.
#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub fan_in: usize,
    pub fan_out: usize,
    /// Row-major `fan_out × fan_in`.
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
}

impl Layer {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self { fan_in, fan_out, weights: vec![0.0; fan_in * fan_out], biases: vec![0.0; fan_out] }
    }

    #[inline]
    fn affine(&self, input: &[f64], out: &mut [f64]) {
        for (o, (row, b)) in out.iter_mut().zip(self.weights.chunks_exact(self.fan_in).zip(&self.biases)) {
            *o = b + row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>();
        }
    }

    fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.is_finite())
    }
}

/// Network parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    arch: MlpArchitecture,
    layers: Vec<Layer>,
}

/// Per-layer values from a forward pass.
///
/// `pre[l]` holds the pre-activations of layer `l + 1` and `post[l]` its
/// outputs (ReLU for hidden layers, logits for the last).
#[derive(Clone, Debug, Default)]
pub struct Activations {
    input: Vec<f64>,
    pub pre: Vec<Vec<f64>>,
    pub post: Vec<Vec<f64>>,
}

impl Activations {
    pub fn new(arch: &MlpArchitecture) -> Self {
        let sizes = arch.layer_sizes();
        Self {
            input: vec![0.0; sizes[0]],
            pre: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
            post: sizes[1..].iter().map(|&n| vec![0.0; n]).collect(),
        }
    }

    pub fn logits(&self) -> &[f64] {
        self.post.last().expect("at least one layer")
    }

    fn layer_input(&self, l: usize) -> &[f64] {
        if l == 0 {
            &self.input
        } else {
            &self.post[l - 1]
        }
    }
}

/// Gradients with the same shapes as the network's parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Gradients {
    pub layers: Vec<Layer>,
}

impl Gradients {
    pub fn zeros_like(net: &Mlp) -> Self {
        Self { layers: net.layers.iter().map(|l| Layer::zeros(l.fan_in, l.fan_out)).collect() }
    }

    fn clear(&mut self) {
        for l in &mut self.layers {
            l.weights.fill(0.0);
            l.biases.fill(0.0);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.biases).copied())
    }
}

/// Reusable buffers for allocation-free forward/backward passes.
#[derive(Clone, Debug)]
pub struct Workspace {
    acts: Activations,
    delta: Vec<Vec<f64>>,
}

impl Workspace {
    pub fn new(net: &Mlp) -> Self {
        let acts = Activations::new(&net.arch);
        let delta = acts.pre.clone();
        Self { acts, delta }
    }
}

impl Mlp {
    /// Weights uniform in `±sqrt(6 / (fan_in + fan_out))`, drawn layer by layer
    /// in row-major order from one stream seeded with `seed`; biases zero.
    pub fn init(arch: &MlpArchitecture, seed: u64) -> Self {
        let mut rng = Rng::new(seed);
        let layers = arch
            .layer_sizes
            .windows(2)
            .map(|w| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
                let mut layer = Layer::zeros(fan_in, fan_out);
                for v in &mut layer.weights {
                    *v = rng.uniform_in(-bound, bound);
                }
                layer
            })
            .collect();
        Self { arch: arch.clone(), layers }
    }

    /// Builds a network from explicit parameters, checking every shape.
    pub fn from_layers(arch: MlpArchitecture, layers: Vec<Layer>) -> Result<Self> {
        if layers.len() != arch.num_weight_layers() {
            return Err(Error::config(format!(
                "architecture has {} weight layers, got {}",
                arch.num_weight_layers(),
                layers.len()
            )));
        }
        for (l, (layer, w)) in layers.iter().zip(arch.layer_sizes.windows(2)).enumerate() {
            if layer.fan_in != w[0]
                || layer.fan_out != w[1]
                || layer.weights.len() != w[0] * w[1]
                || layer.biases.len() != w[1]
            {
                return Err(Error::config(format!("layer {l} does not have shape {}x{}", w[1], w[0])));
            }
            if !layer.is_finite() {
                return Err(Error::config(format!("layer {l} contains non-finite values")));
            }
        }
        Ok(Self { arch, layers })
    }

    pub fn architecture(&self) -> &MlpArchitecture {
        &self.arch
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [Layer] {
        &mut self.layers
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.biases.len()).sum()
    }

    /// Forward pass keeping every layer's pre-activation.
    pub fn forward(&self, input: &[f64]) -> Result<Activations> {
        let expected = self.arch.layer_sizes[0];
        if input.len() != expected {
            return Err(Error::config(format!("expected {expected} inputs, got {}", input.len())));
        }
        if let Some(bad) = input.iter().find(|v| !v.is_finite()) {
            return Err(Error::config(format!("non-finite input {bad}")));
        }
        let mut acts = Activations::new(&self.arch);
        self.forward_into(input, &mut acts);
        Ok(acts)
    }

    /// Unchecked forward pass into preallocated buffers.
    pub(crate) fn forward_into(&self, input: &[f64], acts: &mut Activations) {
        acts.input.copy_from_slice(input);
        let last = self.layers.len() - 1;
        for (l, layer) in self.layers.iter().enumerate() {
            let pre = &mut acts.pre[l];
            let input = if l == 0 { &acts.input[..] } else { &acts.post[l - 1][..] };
            layer.affine(input, pre);
            let post = &mut acts.post[l];
            if l == last {
                post.copy_from_slice(pre);
            } else {
                for (p, &z) in post.iter_mut().zip(pre.iter()) {
                    *p = z.max(0.0);
                }
            }
        }
    }

    /// Class with the largest logit; ties go to the lowest index.
    pub fn predict(&self, f: &FeatureVector) -> Result<ClassLabel> {
        let acts = self.forward(f.as_slice())?;
        ClassLabel::from_index(argmax(acts.logits()))
            .ok_or_else(|| Error::config("network output is not a class index"))
    }

    /// Mean softmax cross-entropy over `batch` and its exact gradient.
    /// Gradients of frozen layers are zero.
    pub fn loss_and_grad(&self, batch: &[(FeatureVector, ClassLabel)]) -> Result<(f64, Gradients)> {
        if batch.is_empty() {
            return Err(Error::config("loss_and_grad needs a non-empty batch"));
        }
        self.arch.check_dataset_shape()?;
        let mut ws = Workspace::new(self);
        let mut grads = Gradients::zeros_like(self);
        let loss = self.batch_loss_and_grad(
            batch.iter().map(|(f, c)| (f.as_slice(), c.index())),
            batch.len(),
            &mut ws,
            &mut grads,
        );
        Ok((loss, grads))
    }

    /// Overwrites `grads` with the batch-mean gradient and returns the batch-mean loss.
    pub(crate) fn batch_loss_and_grad<'a>(
        &self,
        batch: impl Iterator<Item = (&'a [f64], usize)>,
        batch_len: usize,
        ws: &mut Workspace,
        grads: &mut Gradients,
    ) -> f64 {
        grads.clear();
        let scale = 1.0 / batch_len as f64;
        let mut total = 0.0;
        for (input, target) in batch {
            total += self.accumulate(input, target, scale, ws, grads);
        }
        for (g, &frozen) in grads.layers.iter_mut().zip(&self.arch.frozen) {
            if frozen {
                g.weights.fill(0.0);
                g.biases.fill(0.0);
            }
        }
        total * scale
    }

    /// Adds `scale * dLoss/dθ` for one example to `grads` and returns its loss.
    fn accumulate(&self, input: &[f64], target: usize, scale: f64, ws: &mut Workspace, grads: &mut Gradients) -> f64 {
        self.forward_into(input, &mut ws.acts);
        let last = self.layers.len() - 1;
        let logits = ws.acts.logits();
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum_exp: f64 = logits.iter().map(|z| (z - max).exp()).sum();
        let log_norm = max + sum_exp.ln();
        let loss = log_norm - logits[target];

        // d loss / d logits = softmax - onehot
        let delta_out = &mut ws.delta[last];
        for (k, (d, z)) in delta_out.iter_mut().zip(logits).enumerate() {
            let p = (z - log_norm).exp();
            *d = p - if k == target { 1.0 } else { 0.0 };
        }

        for l in (0..=last).rev() {
            let layer = &self.layers[l];
            let a_in = ws.acts.layer_input(l);
            let g = &mut grads.layers[l];
            let (below, here) = ws.delta.split_at_mut(l);
            let delta = &here[0];
            for (j, &d) in delta.iter().enumerate() {
                let ds = d * scale;
                g.biases[j] += ds;
                let row = &mut g.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                for (gw, &a) in row.iter_mut().zip(a_in) {
                    *gw += ds * a;
                }
            }
            if l > 0 {
                let prev = &mut below[l - 1];
                prev.fill(0.0);
                for (j, &d) in delta.iter().enumerate() {
                    let row = &layer.weights[j * layer.fan_in..(j + 1) * layer.fan_in];
                    for (p, &w) in prev.iter_mut().zip(row) {
                        *p += w * d;
                    }
                }
                for (p, &z) in prev.iter_mut().zip(&ws.acts.pre[l - 1]) {
                    if z <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
        }
        loss
    }
}

/// Index of the largest value; the first one wins ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

#[cfg(test)]
mod tests;

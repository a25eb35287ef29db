//! Minibatch SGD training, evaluation, and multi-seed sweeps.
//!
//! The trainer is deliberately plain: shuffled minibatches, mean-gradient
//! SGD steps with decoupled-from-nothing weight decay folded into the
//! gradient, and a per-epoch history of loss, accuracy, and the norm of the
//! last layer. All randomness comes from two substreams of the run seed
//! (stream 0 initializes weights, stream 1 shuffles), so a seed pins the
//! entire trajectory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::calibration::{compute_ece, predict, CalibrationReport};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::loss::{softmax, Loss};
use crate::mlp::{Architecture, Gradients, MlpParameters};
use crate::numerics::Rng;

/// Minibatch size policy.
///
/// `Auto` resolves at training time: full batch up to 5000 samples,
/// minibatches of 128 beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSize {
    Auto,
    Full,
    Size(usize),
}

impl BatchSize {
    /// Replaces `Auto` by the concrete policy for `n` samples.
    pub fn resolve(self, n: usize) -> BatchSize {
        match self {
            BatchSize::Auto => {
                if n <= 5000 {
                    BatchSize::Full
                } else {
                    BatchSize::Size(128)
                }
            }
            other => other,
        }
    }
}

impl std::fmt::Display for BatchSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BatchSize::Auto => write!(f, "auto"),
            BatchSize::Full => write!(f, "full"),
            BatchSize::Size(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for BatchSize {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BatchSize::Auto => s.serialize_str("auto"),
            BatchSize::Full => s.serialize_str("full"),
            BatchSize::Size(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for BatchSize {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl serde::de::Visitor<'_> for V {
            type Value = BatchSize;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                write!(f, "\"full\", \"auto\", or a positive integer")
            }
            fn visit_u64<E: serde::de::Error>(self, v: u64) -> std::result::Result<BatchSize, E> {
                if v == 0 {
                    return Err(E::custom("batch size must be positive"));
                }
                Ok(BatchSize::Size(v as usize))
            }
            fn visit_str<E: serde::de::Error>(self, v: &str) -> std::result::Result<BatchSize, E> {
                BatchSize::parse(v).map_err(|e| E::custom(e.to_string()))
            }
        }
        d.deserialize_any(V)
    }
}

impl BatchSize {
    /// Parses `"full"`, `"auto"`, or a positive integer.
    pub fn parse(s: &str) -> Result<BatchSize> {
        match s {
            "full" => Ok(BatchSize::Full),
            "auto" => Ok(BatchSize::Auto),
            other => match other.parse::<usize>() {
                Ok(0) | Err(_) => Err(Error::InvalidArgument(format!(
                    "batch size must be \"full\", \"auto\", or a positive integer, got \"{other}\""
                ))),
                Ok(n) => Ok(BatchSize::Size(n)),
            },
        }
    }
}

/// Everything a single training run needs besides the data.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub arch: Architecture,
    pub loss: Loss,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: BatchSize,
    pub seed: u64,
    pub shuffle: bool,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "learning rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "weight decay must be non-negative and finite, got {}",
                self.weight_decay
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidArgument("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of the training history.
///
/// Loss and accuracy are measured on the fly during the epoch's own
/// minibatch passes, so each sample is seen once at whatever parameters
/// were current when its batch came up. The weight norm is read after the
/// epoch's last update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub last_layer_weight_norm: f64,
}

/// One SGD update with weight decay folded into the gradient:
/// `w <- w - lr * (g + wd * w)`, biases decay-free: `b <- b - lr * g`.
/// Panics when the gradient shapes do not match the parameters.
pub fn sgd_step(params: &mut MlpParameters, grads: &Gradients, lr: f64, weight_decay: f64) {
    assert!(
        params.layers().len() == grads.layers.len(),
        "{} parameter layers but {} gradient layers",
        params.layers().len(),
        grads.layers.len()
    );
    for (layer, grad) in params.layers_mut().iter_mut().zip(&grads.layers) {
        assert!(
            layer.weight.rows() == grad.weight.rows()
                && layer.weight.cols() == grad.weight.cols()
                && layer.bias.len() == grad.bias.len(),
            "gradient shape {}x{} does not match layer {}x{}",
            grad.weight.rows(),
            grad.weight.cols(),
            layer.weight.rows(),
            layer.weight.cols()
        );
        for (w, g) in layer.weight.as_mut_slice().iter_mut().zip(grad.weight.as_slice()) {
            *w -= lr * (g + weight_decay * *w);
        }
        for (b, g) in layer.bias.iter_mut().zip(&grad.bias) {
            *b -= lr * g;
        }
    }
}

fn zero_gradients(params: &MlpParameters) -> Gradients {
    Gradients {
        layers: params
            .layers()
            .iter()
            .map(|layer| crate::mlp::Layer {
                weight: crate::numerics::Matrix::zeros(layer.weight.rows(), layer.weight.cols()),
                bias: vec![0.0; layer.bias.len()],
            })
            .collect(),
    }
}

fn accumulate(into: &mut Gradients, from: &Gradients) {
    for (a, b) in into.layers.iter_mut().zip(&from.layers) {
        for (x, y) in a.weight.as_mut_slice().iter_mut().zip(b.weight.as_slice()) {
            *x += y;
        }
        for (x, y) in a.bias.iter_mut().zip(&b.bias) {
            *x += y;
        }
    }
}

fn scale(grads: &mut Gradients, factor: f64) {
    for layer in &mut grads.layers {
        for x in layer.weight.as_mut_slice() {
            *x *= factor;
        }
        for x in &mut layer.bias {
            *x *= factor;
        }
    }
}

/// Trains a fresh network on `train_set`, returning the final parameters
/// and one [`EpochStats`] row per epoch.
///
/// Epoch structure: optionally shuffle the index order, walk it in
/// minibatches, and for each batch apply one SGD step with the mean of the
/// per-sample logit gradients backpropagated through the network. Returns
/// [`Error::Divergence`] as soon as a non-finite logit or epoch loss shows
/// up.
pub fn train(train_set: &Dataset, config: &TrainConfig) -> Result<(MlpParameters, Vec<EpochStats>)> {
    config.validate()?;
    if train_set.d() != config.arch.input_dim() {
        return Err(Error::Data(format!(
            "dataset has {} features but the architecture expects {}",
            train_set.d(),
            config.arch.input_dim()
        )));
    }
    if train_set.class_count() != config.arch.classes() {
        return Err(Error::Data(format!(
            "dataset has {} classes but the architecture expects {}",
            train_set.class_count(),
            config.arch.classes()
        )));
    }
    let n = train_set.n();
    let batch = match config.batch_size.resolve(n) {
        BatchSize::Full => n,
        BatchSize::Size(b) if b > n => {
            return Err(Error::InvalidArgument(format!(
                "batch size {b} exceeds the {n} training samples"
            )));
        }
        BatchSize::Size(b) => b,
        BatchSize::Auto => unreachable!("resolve removes Auto"),
    };

    let mut init_rng = Rng::substream(config.seed, 0);
    let mut shuffle_rng = Rng::substream(config.seed, 1);
    let mut params = MlpParameters::init(&config.arch, &mut init_rng);
    let mut order: Vec<usize> = (0..n).collect();
    let mut history = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        if config.shuffle {
            shuffle_rng.shuffle(&mut order);
        }
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for chunk in order.chunks(batch) {
            let mut batch_grads = zero_gradients(&params);
            for &i in chunk {
                let pass = params.forward(train_set.sample(i));
                if pass.logits.iter().any(|l| !l.is_finite()) {
                    return Err(Error::Divergence { epoch });
                }
                let label = train_set.label(i);
                let out = config.loss.evaluate(&pass.logits, label);
                loss_sum += out.value;
                if crate::numerics::argmax(&pass.logits) == label {
                    correct += 1;
                }
                let sample_grads = params.backward(&pass, &out.grad);
                accumulate(&mut batch_grads, &sample_grads);
            }
            scale(&mut batch_grads, 1.0 / chunk.len() as f64);
            sgd_step(&mut params, &batch_grads, config.learning_rate, config.weight_decay);
        }
        let train_loss = loss_sum / n as f64;
        if !train_loss.is_finite() {
            return Err(Error::Divergence { epoch });
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            train_accuracy: correct as f64 / n as f64,
            last_layer_weight_norm: params.last_layer_weight_norm(),
        });
    }
    Ok((params, history))
}

/// Accuracy of `params` on `dataset` at the current weights, independent of
/// any training history.
pub fn accuracy(params: &MlpParameters, dataset: &Dataset) -> f64 {
    let correct = (0..dataset.n())
        .filter(|&i| crate::numerics::argmax(&params.logits(dataset.sample(i))) == dataset.label(i))
        .count();
    correct as f64 / dataset.n() as f64
}

/// Evaluates a trained network: softmax probabilities for every sample
/// (square-loss models included), then accuracy and a calibration report
/// over `bins` bins.
///
/// Panics when the dataset shape does not match the architecture; callers
/// validate user-supplied data first.
pub fn evaluate(params: &MlpParameters, test_set: &Dataset, bins: usize) -> (f64, CalibrationReport) {
    assert!(
        test_set.d() == params.arch().input_dim()
            && test_set.class_count() == params.arch().classes(),
        "dataset shape {}x{} classes do not match architecture {}x{}",
        test_set.d(),
        test_set.class_count(),
        params.arch().input_dim(),
        params.arch().classes()
    );
    let predictions: Vec<_> = (0..test_set.n())
        .map(|i| {
            let probs = softmax(&params.logits(test_set.sample(i)));
            predict(probs, test_set.label(i))
        })
        .collect();
    let report = compute_ece(&predictions, bins);
    (report.overall_accuracy, report)
}

/// Result of one seeded run inside a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRun {
    pub seed: u64,
    pub test_accuracy: f64,
    pub test_ece: f64,
}

/// Sweep aggregate: per-seed rows in input order plus mean and sample
/// standard deviation of accuracy and ECE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub runs: Vec<SeedRun>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_ece: f64,
    pub std_ece: f64,
}

fn mean_and_std(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (k - 1.0)).sqrt())
}

/// Aggregates per-seed results. Panics on an empty list; a single run gets
/// a standard deviation of zero.
pub fn summarize(runs: Vec<SeedRun>) -> RunSummary {
    assert!(!runs.is_empty(), "cannot summarize zero runs");
    let accs: Vec<f64> = runs.iter().map(|r| r.test_accuracy).collect();
    let eces: Vec<f64> = runs.iter().map(|r| r.test_ece).collect();
    let (mean_accuracy, std_accuracy) = mean_and_std(&accs);
    let (mean_ece, std_ece) = mean_and_std(&eces);
    RunSummary {
        runs,
        mean_accuracy,
        std_accuracy,
        mean_ece,
        std_ece,
    }
}

/// Trains once per seed (in parallel, results in seed order) and
/// aggregates. Seeds must be distinct and at least two, otherwise the
/// standard deviations would be meaningless.
pub fn sweep(
    train_set: &Dataset,
    test_set: &Dataset,
    config: &TrainConfig,
    seeds: &[u64],
    bins: usize,
) -> Result<RunSummary> {
    if seeds.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "a sweep needs at least two seeds, got {}",
            seeds.len()
        )));
    }
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if let Some(dup) = sorted.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!(
            "duplicate seed {} in sweep",
            dup[0]
        )));
    }
    let runs: Vec<SeedRun> = seeds
        .par_iter()
        .map(|&seed| {
            let run_config = TrainConfig {
                seed,
                ..config.clone()
            };
            let (params, _) = train(train_set, &run_config)?;
            let (test_accuracy, report) = evaluate(&params, test_set, bins);
            Ok(SeedRun {
                seed,
                test_accuracy,
                test_ece: report.ece,
            })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(runs))
}

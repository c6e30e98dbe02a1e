//! Softmax cross-entropy, Adam and the mini-batch training loop.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;
use crate::exec::Execution;
use crate::kan::{backward_with, forward, predict_logits, Gradients, KanError, KanNetwork};
use crate::metrics::{compute_metrics, confusion, ConfusionMatrix, MetricsError, RunMetrics};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error("label {label} out of range for {classes} classes")]
    InvalidLabel { label: usize, classes: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("non-finite loss at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },
    #[error(transparent)]
    Network(#[from] KanError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    pub seed: u64,
    pub shuffle: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 5,
            batch_size: 64,
            learning_rate: 1e-3,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            seed: 0,
            shuffle: true,
        }
    }
}

impl TrainConfig {
    /// Checks the invariants. `learning_rate = 0` is accepted so a run can be
    /// used as a no-op probe.
    pub fn validate(&self) -> Result<(), TrainError> {
        let bad = |m: &str| Err(TrainError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if self.batch_size == 0 {
            return bad("batch size must be at least 1");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning rate must be finite and non-negative");
        }
        for (name, b) in [("beta1", self.adam_beta1), ("beta2", self.adam_beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return Err(TrainError::InvalidConfig(format!("{name} must lie in (0, 1), got {b}")));
            }
        }
        if !(self.adam_epsilon > 0.0 && self.adam_epsilon.is_finite()) {
            return bad("adam epsilon must be positive");
        }
        Ok(())
    }
}

/// Mean loss over the batch and its gradient `(softmax - onehot) / batch`.
pub fn softmax_cross_entropy(logits: &[f64], labels: &[usize], classes: usize) -> Result<(f64, Vec<f64>), TrainError> {
    if classes == 0 || logits.len() != labels.len() * classes {
        return Err(TrainError::ShapeMismatch(format!(
            "{} logits for {} labels of {classes} classes",
            logits.len(),
            labels.len()
        )));
    }
    let batch = labels.len().max(1) as f64;
    let mut grad = vec![0.0; logits.len()];
    let mut total = 0.0;
    for (s, &label) in labels.iter().enumerate() {
        if label >= classes {
            return Err(TrainError::InvalidLabel { label, classes });
        }
        let row = &logits[s * classes..(s + 1) * classes];
        let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
        let log_z = max + sum.ln();
        total += log_z - row[label];
        for (k, g) in grad[s * classes..(s + 1) * classes].iter_mut().enumerate() {
            let p = (row[k] - log_z).exp();
            *g = (p - if k == label { 1.0 } else { 0.0 }) / batch;
        }
    }
    Ok((total / batch, grad))
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerState {
    pub first: Vec<Vec<f64>>,
    pub second: Vec<Vec<f64>>,
    pub step: u64,
}

impl OptimizerState {
    pub fn new(net: &KanNetwork) -> Self {
        let zeros: Vec<Vec<f64>> = net.layers().iter().map(|l| vec![0.0; l.params().len()]).collect();
        Self {
            first: zeros.clone(),
            second: zeros,
            step: 0,
        }
    }
}

/// Bias-corrected Adam applied coefficient-wise.
pub fn adam_step(
    net: &mut KanNetwork,
    grads: &Gradients,
    state: &mut OptimizerState,
    cfg: &TrainConfig,
) -> Result<(), TrainError> {
    let congruent = grads.layers.len() == net.layers().len()
        && state.first.len() == net.layers().len()
        && net.layers().iter().enumerate().all(|(p, l)| {
            let n = l.params().len();
            grads.layers[p].len() == n && state.first[p].len() == n && state.second[p].len() == n
        });
    if !congruent {
        return Err(TrainError::ShapeMismatch("gradients or optimizer state do not match the network".into()));
    }
    state.step += 1;
    let t = state.step as i32;
    let (b1, b2) = (cfg.adam_beta1, cfg.adam_beta2);
    let c1 = 1.0 - b1.powi(t);
    let c2 = 1.0 - b2.powi(t);
    for (p, layer) in net.layers_mut().iter_mut().enumerate() {
        let (m, v, g) = (&mut state.first[p], &mut state.second[p], &grads.layers[p]);
        for (k, c) in layer.params_mut().iter_mut().enumerate() {
            m[k] = b1 * m[k] + (1.0 - b1) * g[k];
            v[k] = b2 * v[k] + (1.0 - b2) * g[k] * g[k];
            let m_hat = m[k] / c1;
            let v_hat = v[k] / c2;
            *c -= cfg.learning_rate * m_hat / (v_hat.sqrt() + cfg.adam_epsilon);
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct EpochRecord {
    pub epoch: usize,
    pub mean_loss: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eval: Option<RunMetrics>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainLog {
    pub epochs: Vec<EpochRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<usize>,
    pub confusion: ConfusionMatrix,
    pub metrics: RunMetrics,
}

const EVAL_CHUNK: usize = 512;

/// First index of the largest logit in each row.
pub fn argmax_rows(logits: &[f64], classes: usize) -> Vec<usize> {
    logits
        .chunks(classes)
        .map(|row| {
            row.iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |best, (k, &v)| if v > best.1 { (k, v) } else { best })
                .0
        })
        .collect()
}

fn check_width(net: &KanNetwork, ds: &Dataset) -> Result<(), TrainError> {
    if ds.dim() != net.input_dim() {
        return Err(TrainError::ShapeMismatch(format!(
            "dataset width {} but network input {}",
            ds.dim(),
            net.input_dim()
        )));
    }
    if ds.num_classes() != net.output_dim() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} classes but network output {}",
            ds.num_classes(),
            net.output_dim()
        )));
    }
    Ok(())
}

pub fn evaluate(net: &KanNetwork, ds: &Dataset, exec: Execution) -> Result<Evaluation, TrainError> {
    check_width(net, ds)?;
    let classes = net.output_dim();
    let mut predictions = Vec::with_capacity(ds.len());
    let all: Vec<usize> = (0..ds.len()).collect();
    for chunk in all.chunks(EVAL_CHUNK) {
        let (x, _) = ds.gather(chunk);
        let logits = predict_logits(net, &x, chunk.len(), exec)?;
        predictions.extend(argmax_rows(&logits, classes));
    }
    let cm = confusion(&predictions, ds.labels(), classes)?;
    let metrics = compute_metrics(&cm)?;
    Ok(Evaluation {
        predictions,
        confusion: cm,
        metrics,
    })
}

/// Trains in place. Each epoch visits every sample once in an order drawn
/// from ChaCha8 seeded by `cfg.seed`.
pub fn fit(
    net: &mut KanNetwork,
    train: &Dataset,
    cfg: &TrainConfig,
    eval_set: Option<&Dataset>,
    exec: Execution,
) -> Result<TrainLog, TrainError> {
    cfg.validate()?;
    check_width(net, train)?;
    if let Some(ds) = eval_set {
        check_width(net, ds)?;
    }
    if train.is_empty() {
        return Err(TrainError::ShapeMismatch("empty training set".into()));
    }
    let classes = net.output_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut state = OptimizerState::new(net);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut log = TrainLog::default();
    for epoch in 1..=cfg.epochs {
        if cfg.shuffle {
            order.shuffle(&mut rng);
        }
        let mut loss_sum = 0.0;
        for (b, chunk) in order.chunks(cfg.batch_size).enumerate() {
            let (x, y) = train.gather(chunk);
            let (logits, trace) = forward(net, &x, chunk.len(), exec)?;
            let (loss, grad) = softmax_cross_entropy(&logits, &y, classes)?;
            if !loss.is_finite() {
                return Err(TrainError::NonFiniteLoss { epoch, batch: b });
            }
            loss_sum += loss * chunk.len() as f64;
            let grads = backward_with(net, &trace, &grad, exec, false)?;
            adam_step(net, &grads, &mut state, cfg)?;
        }
        let eval = eval_set.map(|ds| evaluate(net, ds, exec)).transpose()?.map(|e| e.metrics);
        log.epochs.push(EpochRecord {
            epoch,
            mean_loss: loss_sum / train.len() as f64,
            eval,
        });
    }
    Ok(log)
}

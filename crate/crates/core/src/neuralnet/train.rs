use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::{DatasetSplit, LabeledDataset};
use crate::error::{Error, Result};
use crate::metrics::ConfusionMatrix;
use crate::scalar::Scalar;
use crate::signalgen::SignalClass;

use super::adam::{adam_step, AdamState};
use super::model::{Batch, CnnModel, NUM_CLASSES};
use super::ops::argmax;

/// Windows used to measure the loss before the first update.
const INITIAL_LOSS_WINDOWS: usize = 2048;
const EVAL_CHUNK: usize = 256;

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub epochs: usize,
    /// Drives the per-epoch shuffles.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 64,
            epochs: 20,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad(format!("learning_rate must be > 0, got {}", self.learning_rate));
        }
        for (name, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(b > 0.0 && b < 1.0) {
                return bad(format!("{name} must lie in (0, 1), got {b}"));
            }
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return bad(format!("epsilon must be >= 0, got {}", self.epsilon));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EpochStats {
    /// 1-based.
    pub epoch: usize,
    /// Mean cross-entropy over the epoch's mini-batches.
    pub train_loss: f64,
    /// Fraction of training windows classified correctly while training.
    pub train_accuracy: f64,
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainReport {
    pub param_count: usize,
    /// Loss of the initial model on the first training windows.
    pub initial_loss: f64,
    pub epochs: Vec<EpochStats>,
    pub test_accuracy: f64,
    pub per_class_accuracy: [f64; 4],
    pub confusion: ConfusionMatrix,
}

/// Confusion matrix of `model` on every window of `ds`.
pub fn evaluate<T: Scalar>(model: &CnnModel<T>, ds: &LabeledDataset) -> Result<ConfusionMatrix> {
    if ds.window_len() != model.window_len() {
        return Err(Error::LengthMismatch {
            expected: model.window_len(),
            got: ds.window_len(),
        });
    }
    let mut cm = ConfusionMatrix::new();
    for chunk in ds.windows().chunks(EVAL_CHUNK) {
        let batch = Batch::<T>::from_windows(chunk, ds.window_len())?;
        let logits = model.logits(&batch.inputs, batch.len())?;
        for (row, &label) in logits.chunks_exact(NUM_CLASSES).zip(&batch.labels) {
            cm.record(SignalClass::ALL[label], SignalClass::ALL[argmax(row)]);
        }
    }
    Ok(cm)
}

/// Mean loss over at most `limit` windows taken at an even stride, so every
/// class is represented whatever the storage order.
fn mean_loss<T: Scalar>(model: &CnnModel<T>, ds: &LabeledDataset, limit: usize) -> Result<f64> {
    let stride = ds.len().div_ceil(limit).max(1);
    let windows: Vec<_> = ds.windows().iter().step_by(stride).collect();
    let mut total = 0.0;
    for chunk in windows.chunks(EVAL_CHUNK) {
        let batch = Batch::<T>::from_windows(chunk.iter().copied(), ds.window_len())?;
        let logits = model.logits(&batch.inputs, batch.len())?;
        for (row, &label) in logits.chunks_exact(NUM_CLASSES).zip(&batch.labels) {
            total += super::ops::cross_entropy(row, label).as_f64();
        }
    }
    Ok(total / windows.len() as f64)
}

pub fn train<T: Scalar>(
    model: CnnModel<T>,
    split: &DatasetSplit,
    config: &TrainConfig,
) -> Result<(CnnModel<T>, TrainReport)> {
    train_with_progress(model, split, config, |_| {})
}

/// Mini-batch Adam on shuffled epochs; `on_epoch` sees each epoch's statistics.
pub fn train_with_progress<T: Scalar>(
    mut model: CnnModel<T>,
    split: &DatasetSplit,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochStats),
) -> Result<(CnnModel<T>, TrainReport)> {
    config.validate()?;
    let train = &split.train;
    if train.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if train.window_len() != model.window_len() {
        return Err(Error::LengthMismatch {
            expected: model.window_len(),
            got: train.window_len(),
        });
    }

    let initial_loss = mean_loss(&model, train, INITIAL_LOSS_WINDOWS)?;

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut state = AdamState::new(model.param_count());
    let mut step = 0u64;
    let mut epochs = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0;
        for idx in order.chunks(config.batch_size) {
            let batch = Batch::<T>::from_windows(idx.iter().map(|&i| &train.windows()[i]), train.window_len())?;
            let g = model.backward(&batch)?;
            step += 1;
            adam_step(model.params_mut(), &g.values, &mut state, step, config)?;
            loss_sum += g.loss.as_f64() * idx.len() as f64;
            correct += g.correct;
        }
        let stats = EpochStats {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            train_accuracy: correct as f64 / train.len() as f64,
        };
        on_epoch(&stats);
        epochs.push(stats);
    }

    let confusion = evaluate(&model, &split.test)?;
    let report = TrainReport {
        param_count: model.param_count(),
        initial_loss,
        epochs,
        test_accuracy: confusion.overall_accuracy().unwrap_or(f64::NAN),
        per_class_accuracy: confusion.per_class_accuracy().map(|a| a.unwrap_or(f64::NAN)),
        confusion,
    };
    Ok((model, report))
}

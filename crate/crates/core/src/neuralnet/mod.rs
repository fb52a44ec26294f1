//! From-scratch 1-D CNN classifier over `(2, L)` I/Q windows.
//!
//! Architecture: conv(ReLU) → conv(ReLU) → dense(ReLU) → dense(softmax).
//! No pooling, dropout or normalization layers. Training uses mini-batch
//! Adam on the mean cross-entropy; every layer runs on im2col + GEMM.

mod adam;
mod checkpoint;
mod gemm;
mod model;
mod ops;
mod tensor;
mod train;

pub use adam::{adam_step, AdamState};
pub use checkpoint::{load_model, model_from_bytes, model_to_bytes, save_model, MODEL_MAGIC, MODEL_VERSION};
pub use model::{backward, Architecture, Batch, CnnModel, Gradients, LayerParams, INPUT_CHANNELS, NUM_CLASSES};
pub use ops::{argmax, conv1d_forward, cross_entropy, dense_forward, log_softmax, softmax, Activation};
pub use tensor::Tensor;
pub use train::{evaluate, train, train_with_progress, EpochStats, TrainConfig, TrainReport};

//! Spectrum-learning-aided ON/OFF control of reconfigurable intelligent surfaces.
//!
//! The crate is split along the processing chain:
//!
//! - [`signalgen`] synthesizes labeled I/Q windows for the four occupancy classes,
//! - [`dataset`] builds, splits and persists them (`.risl` files),
//! - [`neuralnet`] is a small from-scratch CNN with Adam training (`.rism` checkpoints),
//! - [`channel`] is the geometric link budget and SINR model,
//! - [`controller`] turns classifier posteriors into per-RIS ON/OFF states,
//! - [`harness`] drives the Monte Carlo sweeps and the end-to-end pipeline.
//!
//! The numerical core is generic over [`Scalar`] (`f32`/`f64`); the aliases
//! below pin the `f64` instantiations used by the pipeline.

pub mod channel;
pub mod controller;
pub mod dataset;
mod error;
pub mod harness;
pub mod metrics;
pub mod neuralnet;
mod scalar;
pub mod signalgen;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use channel::{Layout, RisStates, ScenarioParams, SinrBreakdown};
pub use controller::{Decision, Rationale};
pub use dataset::{DatasetSplit, LabeledDataset};
pub use harness::ExperimentConfig;
pub use metrics::ConfusionMatrix;
pub use neuralnet::{Architecture, TrainConfig, TrainReport};
pub use signalgen::{Modulation, SignalClass, UserSignature};

/// Double-precision tensor used throughout training.
pub type Tensor = neuralnet::Tensor<f64>;
/// Single-precision tensor.
pub type Tensor32 = neuralnet::Tensor<f32>;
/// The classifier as trained and checkpointed by the pipeline.
pub type CnnModel = neuralnet::CnnModel<f64>;
/// Single-precision classifier, e.g. for cheaper inference.
pub type CnnModel32 = neuralnet::CnnModel<f32>;
/// Window as produced by the generator.
pub type IqWindow = signalgen::IqWindow<f64>;
/// Window as stored in a dataset file.
pub type StoredWindow = signalgen::IqWindow<f32>;
/// Complex baseband sample.
pub type ComplexSample = num_complex::Complex<f64>;

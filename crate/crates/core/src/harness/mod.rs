//! Experiment orchestration: configuration, Monte Carlo sweeps, classifier
//! evaluation and the end-to-end pipeline behind the CLI.

mod config;
mod csv;
mod eval;
mod pipeline;
mod sweep;

pub use config::{ExperimentConfig, Scheme};
pub use csv::{format_sig6, sweep_csv};
pub use eval::{eval_classifier, Classifier, ClassifierEval, TruthClassifier};
pub use pipeline::{derive_seed, generate_dataset, run_all, train_classifier, PipelineArtifacts, SeedDomain};
pub use sweep::{
    realization_rng, run_realization, score, sense, sweep_k, sweep_theta, ClassifierMode, Observation,
    RealizationOutcome, SweepRow,
};

use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::{self, LabeledDataset};
use crate::error::{Error, Result};
use crate::neuralnet::{self, Architecture, CnnModel, EpochStats, TrainReport};

use super::config::ExperimentConfig;
use super::csv::sweep_csv;
use super::eval::eval_classifier;
use super::sweep::{sweep_k, sweep_theta, ClassifierMode};

/// Independent seed streams derived from the one experiment seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum SeedDomain {
    Dataset = 1,
    Split = 2,
    Init = 3,
    Shuffle = 4,
    SweepTheta = 5,
    SweepK = 6,
}

/// splitmix64 of `seed` mixed with the domain tag.
pub fn derive_seed(seed: u64, domain: SeedDomain) -> u64 {
    let mut z = seed ^ (domain as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn generate_dataset(config: &ExperimentConfig) -> Result<LabeledDataset> {
    let (sig_d, sig_i) = config.signatures();
    dataset::build_dataset(
        config.n_per_class,
        config.window_len,
        (config.snr_min, config.snr_max),
        &sig_d,
        &sig_i,
        derive_seed(config.seed, SeedDomain::Dataset),
    )
}

/// Stratified split, fresh model, Adam training, test-set report.
pub fn train_classifier(
    config: &ExperimentConfig,
    ds: &LabeledDataset,
    on_epoch: impl FnMut(&EpochStats),
) -> Result<(CnnModel<f64>, TrainReport)> {
    let split = dataset::split(ds, config.split_ratio, derive_seed(config.seed, SeedDomain::Split))?;
    let arch = Architecture::for_window_len(ds.window_len());
    let model = CnnModel::init(arch, derive_seed(config.seed, SeedDomain::Init))?;
    let train_cfg = config.train_config(derive_seed(config.seed, SeedDomain::Shuffle));
    neuralnet::train_with_progress(model, &split, &train_cfg, on_epoch)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineArtifacts {
    pub dataset: PathBuf,
    pub model: PathBuf,
    pub report: PathBuf,
    pub confusion: PathBuf,
    pub sweep_theta: PathBuf,
    pub sweep_k: PathBuf,
}

impl PipelineArtifacts {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            dataset: dir.join("dataset.risl"),
            model: dir.join("model.rism"),
            report: dir.join("train_report.json"),
            confusion: dir.join("confusion.csv"),
            sweep_theta: dir.join("sweep_theta.csv"),
            sweep_k: dir.join("sweep_k.csv"),
        }
    }

    pub fn all(&self) -> [&Path; 6] {
        [
            &self.dataset,
            &self.model,
            &self.report,
            &self.confusion,
            &self.sweep_theta,
            &self.sweep_k,
        ]
    }
}

/// Dataset → training → evaluation → both sweeps, every artifact written to `out_dir`.
pub fn run_all(config: &ExperimentConfig, out_dir: &Path, mut log: impl FnMut(&str)) -> Result<PipelineArtifacts> {
    fs::create_dir_all(out_dir)?;
    let paths = PipelineArtifacts::in_dir(out_dir);

    log(&format!(
        "generating {} windows/class at L={}",
        config.n_per_class, config.window_len
    ));
    let ds = generate_dataset(config)?;
    dataset::save(&ds, &paths.dataset)?;

    let (model, report) = train_classifier(config, &ds, |e| {
        log(&format!(
            "epoch {:>3}  loss {:.5}  train acc {:.4}",
            e.epoch, e.train_loss, e.train_accuracy
        ))
    })?;
    neuralnet::save_model(&model, &paths.model)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Config(e.to_string()))?;
    fs::write(&paths.report, json + "\n")?;

    let split = dataset::split(&ds, config.split_ratio, derive_seed(config.seed, SeedDomain::Split))?;
    let eval = eval_classifier(&model, &split.test)?;
    fs::write(&paths.confusion, eval.confusion.to_csv())?;
    log(&format!("test accuracy {:.4}", eval.overall_accuracy));

    let classifier = ClassifierMode::from_config(config, Some(&model))?;
    let theta_cfg = ExperimentConfig {
        seed: derive_seed(config.seed, SeedDomain::SweepTheta),
        ..config.clone()
    };
    fs::write(&paths.sweep_theta, sweep_csv(&sweep_theta(&theta_cfg, classifier)?))?;
    log("theta sweep done");

    let k_cfg = ExperimentConfig {
        seed: derive_seed(config.seed, SeedDomain::SweepK),
        ..config.clone()
    };
    fs::write(&paths.sweep_k, sweep_csv(&sweep_k(&k_cfg, classifier)?))?;
    log("K sweep done");

    Ok(paths)
}

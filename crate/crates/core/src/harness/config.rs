use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crate::channel::ScenarioParams;
use crate::error::{Error, Result};
use crate::neuralnet::TrainConfig;
use crate::signalgen::{self, UserSignature};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Scheme {
    Proposed,
    AlwaysOn,
    AlwaysOff,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Proposed, Scheme::AlwaysOn, Scheme::AlwaysOff];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Proposed => "Proposed",
            Scheme::AlwaysOn => "AlwaysOn",
            Scheme::AlwaysOff => "AlwaysOff",
        }
    }
}

/// Everything one experiment needs; read from a flat `key = value` TOML file.
#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    #[serde(flatten)]
    pub scenario: ScenarioParams,

    /// θ grid of the angle sweep, degrees.
    pub theta_min: f64,
    pub theta_max: f64,
    pub theta_step: f64,
    /// K grid of the RIS-count sweep.
    pub k_min: usize,
    pub k_max: usize,
    /// θ is drawn uniformly from this range in the RIS-count sweep.
    pub theta_rand_min: f64,
    pub theta_rand_max: f64,

    /// Trained checkpoint used by the sweeps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classifier: Option<PathBuf>,
    pub perfect_classifier: bool,
    /// Probability of replacing the true label by a wrong one (oracle-based classifier).
    pub label_corruption: f64,
    pub realizations: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub out: PathBuf,

    pub window_len: usize,
    pub n_per_class: usize,
    pub snr_min: f64,
    pub snr_max: f64,
    pub split_ratio: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioParams::default(),
            theta_min: 30.0,
            theta_max: 150.0,
            theta_step: 10.0,
            k_min: 1,
            k_max: 10,
            theta_rand_min: 30.0,
            theta_rand_max: 120.0,
            classifier: None,
            perfect_classifier: false,
            label_corruption: 0.0,
            realizations: 10_000,
            schemes: Scheme::ALL.to_vec(),
            seed: 0,
            out: PathBuf::from("out"),
            window_len: 512,
            n_per_class: 10_000,
            snr_min: 0.0,
            snr_max: 20.0,
            split_ratio: 0.8,
            epochs: 20,
            batch_size: 64,
            learning_rate: 1e-3,
        }
    }
}

fn known_keys() -> BTreeSet<String> {
    let table = toml::Table::try_from(ExperimentConfig::default()).expect("default config serializes");
    let mut keys: BTreeSet<String> = table.keys().cloned().collect();
    keys.insert("classifier".into());
    keys
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_table(text.parse().map_err(|e: toml::de::Error| Error::Config(e.to_string()))?)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&fs::read_to_string(path)?)
    }

    /// Config file (if any) with `key = value` overrides applied on top.
    pub fn load(path: Option<&Path>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table = match path {
            Some(p) => fs::read_to_string(p)?
                .parse::<toml::Table>()
                .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
            None => toml::Table::new(),
        };
        for (key, raw) in overrides {
            table.insert(key.clone(), parse_value(raw));
        }
        Self::from_table(table)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let known = known_keys();
        if let Some(unknown) = table.keys().find(|k| !known.contains(*k)) {
            return Err(Error::Config(format!("unknown key `{unknown}`")));
        }
        let cfg: Self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        self.scenario.validate().map_err(|e| Error::Config(e.to_string()))?;
        if self.realizations == 0 {
            return bad("realizations must be >= 1".into());
        }
        if self.schemes.is_empty() {
            return bad("schemes must not be empty".into());
        }
        if self.theta_step.is_nan() || self.theta_step <= 0.0 || self.theta_min > self.theta_max {
            return bad(format!(
                "theta grid [{}, {}] step {} is empty",
                self.theta_min, self.theta_max, self.theta_step
            ));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return bad(format!("K grid [{}, {}] is empty", self.k_min, self.k_max));
        }
        if !(self.theta_rand_min > 0.0 && self.theta_rand_min <= self.theta_rand_max && self.theta_rand_max <= 150.0) {
            return bad(format!(
                "random theta range [{}, {}] must lie in (0, 150]",
                self.theta_rand_min, self.theta_rand_max
            ));
        }
        if !(0.0..=1.0).contains(&self.label_corruption) {
            return bad(format!("label_corruption must lie in [0, 1], got {}", self.label_corruption));
        }
        signalgen::check_window_len(self.window_len).map_err(|e| Error::Config(e.to_string()))?;
        if !(self.snr_min.is_finite() && self.snr_max.is_finite() && self.snr_min <= self.snr_max) {
            return bad(format!("invalid snr range [{}, {}]", self.snr_min, self.snr_max));
        }
        if self.n_per_class == 0 {
            return bad("n_per_class must be >= 1".into());
        }
        if !(self.split_ratio > 0.0 && self.split_ratio < 1.0) {
            return bad(format!("split_ratio must lie in (0, 1), got {}", self.split_ratio));
        }
        self.train_config(0).validate().map_err(|e| Error::Config(e.to_string()))
    }

    /// θ values of the angle sweep, inclusive of both ends.
    pub fn theta_grid(&self) -> Vec<f64> {
        if self.theta_step.is_nan() || self.theta_step <= 0.0 || self.theta_min > self.theta_max {
            return Vec::new();
        }
        let steps = ((self.theta_max - self.theta_min) / self.theta_step + 1e-9).floor() as usize;
        (0..=steps).map(|i| self.theta_min + i as f64 * self.theta_step).collect()
    }

    pub fn k_grid(&self) -> Vec<usize> {
        (self.k_min..=self.k_max).collect()
    }

    pub fn signatures(&self) -> (UserSignature, UserSignature) {
        (UserSignature::desired_default(), UserSignature::interferer_default())
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            epochs: self.epochs,
            seed,
            ..TrainConfig::default()
        }
    }
}

/// Parses a CLI override as a TOML value, falling back to a plain string.
fn parse_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

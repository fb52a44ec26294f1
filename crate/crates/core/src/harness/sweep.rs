//! Monte Carlo sweeps over θ and K.
//!
//! A realization has two stages. Sensing draws the window the RIS
//! controller sees and classifies it; it does not depend on θ or K, so each
//! realization is sensed once and then scored at every grid point (common
//! random numbers across cells). Scoring runs the controller and evaluates
//! every scheme under the true occupancy, where both users transmit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{layout, LinkBudget, RisStates};
use crate::controller::decide;
use crate::error::{Error, Result};
use crate::neuralnet::{argmax, CnnModel};
use crate::signalgen::{make_window, SignalClass};

use super::config::{ExperimentConfig, Scheme};

/// Who stands in for the spectrum classifier.
#[derive(Clone, Copy, Debug)]
pub enum ClassifierMode<'a> {
    /// Ground truth.
    Perfect,
    /// Ground truth, replaced by a uniformly chosen wrong class with probability `rate`.
    Corrupted { rate: f64 },
    Model(&'a CnnModel<f64>),
}

impl<'a> ClassifierMode<'a> {
    pub fn from_config(config: &ExperimentConfig, model: Option<&'a CnnModel<f64>>) -> Result<Self> {
        if config.perfect_classifier {
            return Ok(if config.label_corruption > 0.0 {
                ClassifierMode::Corrupted { rate: config.label_corruption }
            } else {
                ClassifierMode::Perfect
            });
        }
        model
            .map(ClassifierMode::Model)
            .ok_or_else(|| Error::Config("no classifier: pass a model or enable perfect_classifier".into()))
    }
}

/// What the controller learned from one sensing window.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Observation {
    pub posterior: [f64; 4],
    pub predicted: SignalClass,
}

impl Observation {
    fn one_hot(class: SignalClass) -> Self {
        let mut posterior = [0.0; 4];
        posterior[class.index()] = 1.0;
        Self { posterior, predicted: class }
    }

    pub fn correct(&self) -> bool {
        self.predicted == SignalClass::Both
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RealizationOutcome {
    pub proposed_db: f64,
    pub always_on_db: f64,
    pub always_off_db: f64,
    pub predicted: SignalClass,
    pub correct: bool,
}

impl RealizationOutcome {
    pub fn sinr_db(&self, scheme: Scheme) -> f64 {
        match scheme {
            Scheme::Proposed => self.proposed_db,
            Scheme::AlwaysOn => self.always_on_db,
            Scheme::AlwaysOff => self.always_off_db,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    /// θ in degrees or K.
    pub sweep_var: f64,
    pub scheme: Scheme,
    pub mean_sinr_db: f64,
    pub n: usize,
    /// Fraction of realizations classified as U_D+U_I.
    pub cls_accuracy: f64,
}

/// Random stream of realization `index`; shared by every cell of a sweep.
pub fn realization_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Draws and classifies the window seen at the RIS.
///
/// The corruption draws and the SNR are always taken, in this order, so
/// that outcomes stay aligned across classifier modes and corruption rates.
pub fn sense<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    classifier: ClassifierMode<'_>,
    rng: &mut R,
) -> Result<Observation> {
    let u: f64 = rng.random();
    let replacement = rng.random_range(0..3usize);
    let snr_db = rng.random_range(config.snr_min..=config.snr_max);
    match classifier {
        ClassifierMode::Perfect => Ok(Observation::one_hot(SignalClass::Both)),
        ClassifierMode::Corrupted { rate } => {
            if u < rate {
                Ok(Observation::one_hot(SignalClass::ALL[replacement]))
            } else {
                Ok(Observation::one_hot(SignalClass::Both))
            }
        }
        ClassifierMode::Model(model) => {
            let (sig_d, sig_i) = config.signatures();
            let window = make_window(SignalClass::Both, config.window_len, snr_db, &sig_d, &sig_i, rng)?;
            let posterior = model.predict(&window)?;
            Ok(Observation {
                posterior,
                predicted: SignalClass::ALL[argmax(&posterior)],
            })
        }
    }
}

/// Runs the controller on `obs` and scores all schemes with both users active.
pub fn score(config: &ExperimentConfig, obs: &Observation, theta: f64, k: usize) -> Result<RealizationOutcome> {
    let params = config.scenario.with_theta(theta).with_k(k);
    let layout = layout(&params);
    let truth = LinkBudget::new(&params, &layout)?;
    let decision = decide(&obs.posterior, &params, &layout)?;
    Ok(RealizationOutcome {
        proposed_db: truth.sinr_db(decision.states.as_slice()),
        always_on_db: truth.sinr_db(RisStates::all_on(k).as_slice()),
        always_off_db: truth.sinr_db(RisStates::all_off(k).as_slice()),
        predicted: obs.predicted,
        correct: obs.correct(),
    })
}

/// One full realization: sense, decide, score.
pub fn run_realization<R: Rng + ?Sized>(
    config: &ExperimentConfig,
    classifier: ClassifierMode<'_>,
    theta: f64,
    k: usize,
    rng: &mut R,
) -> Result<RealizationOutcome> {
    let obs = sense(config, classifier, rng)?;
    score(config, &obs, theta, k)
}

fn aggregate(config: &ExperimentConfig, sweep_var: f64, outcomes: &[RealizationOutcome]) -> Vec<SweepRow> {
    let n = outcomes.len();
    let correct = outcomes.iter().filter(|o| o.correct).count();
    config
        .schemes
        .iter()
        .map(|&scheme| SweepRow {
            sweep_var,
            scheme,
            mean_sinr_db: outcomes.iter().map(|o| o.sinr_db(scheme)).sum::<f64>() / n as f64,
            n,
            cls_accuracy: correct as f64 / n as f64,
        })
        .collect()
}

/// Mean SINR per scheme at each θ of the grid, with K fixed to `config.scenario.k`.
pub fn sweep_theta(config: &ExperimentConfig, classifier: ClassifierMode<'_>) -> Result<Vec<SweepRow>> {
    let grid = config.theta_grid();
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let observations = (0..config.realizations as u64)
        .into_par_iter()
        .map(|i| sense(config, classifier, &mut realization_rng(config.seed, i)))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for theta in grid {
        let outcomes = observations
            .par_iter()
            .map(|obs| score(config, obs, theta, config.scenario.k))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(aggregate(config, theta, &outcomes));
    }
    Ok(rows)
}

/// Mean SINR per scheme for each K, θ drawn per realization from the random range.
pub fn sweep_k(config: &ExperimentConfig, classifier: ClassifierMode<'_>) -> Result<Vec<SweepRow>> {
    let grid = config.k_grid();
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let (lo, hi) = (config.theta_rand_min, config.theta_rand_max);
    let draws = (0..config.realizations as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = realization_rng(config.seed, i);
            let theta = rng.random_range(lo..=hi);
            sense(config, classifier, &mut rng).map(|obs| (theta, obs))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for k in grid {
        let outcomes = draws
            .par_iter()
            .map(|(theta, obs)| score(config, obs, *theta, k))
            .collect::<Result<Vec<_>>>()?;
        rows.extend(aggregate(config, k as f64, &outcomes));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ExperimentConfig {
        ExperimentConfig {
            realizations: 50,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn perfect_single_ris_is_pointwise_max() {
        let c = cfg();
        let mut rng = realization_rng(1, 0);
        for theta in [30.0, 60.0, 150.0] {
            let o = run_realization(&c, ClassifierMode::Perfect, theta, 1, &mut rng).unwrap();
            assert_eq!(o.proposed_db, o.always_on_db.max(o.always_off_db));
            assert!(o.correct);
        }
    }

    #[test]
    fn always_off_independent_of_k() {
        let c = cfg();
        let obs = Observation::one_hot(SignalClass::Both);
        let reference = score(&c, &obs, 75.0, 1).unwrap().always_off_db;
        for k in 2..=10 {
            assert_eq!(score(&c, &obs, 75.0, k).unwrap().always_off_db, reference);
        }
    }

    #[test]
    fn model_length_mismatch_is_an_error() {
        let arch = crate::neuralnet::Architecture::for_window_len(32);
        let model = CnnModel::<f64>::zeros(arch).unwrap();
        let c = cfg(); // window_len 512
        let mut rng = realization_rng(0, 0);
        assert!(matches!(
            run_realization(&c, ClassifierMode::Model(&model), 60.0, 1, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn corruption_rate_extremes() {
        let c = cfg();
        for i in 0..20 {
            let never = sense(&c, ClassifierMode::Corrupted { rate: 0.0 }, &mut realization_rng(3, i)).unwrap();
            assert!(never.correct());
            let always = sense(&c, ClassifierMode::Corrupted { rate: 1.0 }, &mut realization_rng(3, i)).unwrap();
            assert!(!always.correct());
        }
    }

    #[test]
    fn empty_grid_errors() {
        let mut c = cfg();
        c.theta_min = 100.0;
        c.theta_max = 90.0;
        assert!(matches!(sweep_theta(&c, ClassifierMode::Perfect), Err(Error::EmptyGrid)));
        let mut c = cfg();
        c.k_min = 5;
        c.k_max = 4;
        assert!(matches!(sweep_k(&c, ClassifierMode::Perfect), Err(Error::EmptyGrid)));
    }

    #[test]
    fn rows_per_value_and_scheme() {
        let c = cfg();
        let rows = sweep_theta(&c, ClassifierMode::Perfect).unwrap();
        assert_eq!(rows.len(), 13 * 3);
        assert!(rows.iter().all(|r| r.n == 50 && r.cls_accuracy == 1.0));
    }
}

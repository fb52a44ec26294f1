//! ON/OFF control of the RISs from the classifier's view of the spectrum.
//!
//! The classifier decides who is transmitting; the channel model then says
//! whether reflecting helps. With no desired signal there is nothing to
//! reflect, so everything is switched OFF; with the desired user alone,
//! reflection can only help, so everything is ON. With both users present
//! each RIS is visited once in index order and switched ON only if that
//! strictly raises the SINR ("no worse when OFF" keeps it OFF).
//!
//! Online cost is one CNN forward pass per RIS controller plus `K` SINR
//! evaluations, i.e. linear in `K`. For a CNN with `C` layers of at most
//! `M` neurons that is `O(M²·C·K)` multiply-accumulates; see
//! [`crate::neuralnet::Architecture::inference_macs`] for the exact count.

use crate::channel::{Layout, LinkBudget, RisStates, ScenarioParams};
use crate::error::{Error, Result};
use crate::neuralnet::argmax;
use crate::signalgen::SignalClass;

/// Largest K the exhaustive oracle accepts.
pub const MAX_ORACLE_RIS: usize = 16;

const POSTERIOR_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rationale {
    /// Idle or U_I only: nothing worth reflecting.
    NoDesiredSignal,
    /// U_D only: reflection cannot hurt.
    NoInterference,
    /// Both users present: per-RIS SINR comparison.
    SinrComparison,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub inferred_class: SignalClass,
    pub states: RisStates,
    /// SINR at `states` under the inferred occupancy.
    pub predicted_sinr_db: f64,
    pub rationale: Rationale,
}

fn check_posterior(posterior: &[f64]) -> Result<()> {
    if posterior.len() != SignalClass::COUNT {
        return Err(Error::LengthMismatch {
            expected: SignalClass::COUNT,
            got: posterior.len(),
        });
    }
    if posterior.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument(format!(
            "posterior entries must be finite and non-negative: {posterior:?}"
        )));
    }
    let sum: f64 = posterior.iter().sum();
    if (sum - 1.0).abs() > POSTERIOR_SUM_TOLERANCE {
        return Err(Error::InvalidArgument(format!(
            "posterior sums to {sum}, expected 1"
        )));
    }
    Ok(())
}

/// Scenario as the controller believes it: absent users transmit nothing.
fn believed(params: &ScenarioParams, class: SignalClass) -> ScenarioParams {
    let mut p = params.clone();
    if !class.has_desired() {
        p.p_d = f64::NEG_INFINITY;
    }
    if !class.has_interferer() {
        p.p_i = f64::NEG_INFINITY;
    }
    p
}

pub fn decide(posterior: &[f64], params: &ScenarioParams, layout: &Layout) -> Result<Decision> {
    check_posterior(posterior)?;
    let inferred_class = SignalClass::ALL[argmax(posterior)];
    let belief = believed(params, inferred_class);
    let budget = LinkBudget::new(&belief, layout)?;

    let (states, rationale) = match inferred_class {
        SignalClass::Idle | SignalClass::IOnly => (RisStates::all_off(params.k), Rationale::NoDesiredSignal),
        SignalClass::DOnly => (RisStates::all_on(params.k), Rationale::NoInterference),
        SignalClass::Both => (greedy_from_budget(&budget), Rationale::SinrComparison),
    };
    Ok(Decision {
        inferred_class,
        predicted_sinr_db: budget.sinr_db(states.as_slice()),
        states,
        rationale,
    })
}

fn greedy_from_budget(budget: &LinkBudget) -> RisStates {
    let mut states = vec![false; budget.k()];
    let mut current = budget.sinr_db(&states);
    for k in 0..states.len() {
        states[k] = true;
        let candidate = budget.sinr_db(&states);
        if candidate > current {
            current = candidate;
        } else {
            states[k] = false;
        }
    }
    RisStates(states)
}

/// Sequential per-RIS decisions starting from all OFF, with both users active.
pub fn greedy_states(params: &ScenarioParams, layout: &Layout) -> Result<RisStates> {
    Ok(greedy_from_budget(&LinkBudget::new(params, layout)?))
}

/// Exhaustive search over all `2^K` configurations.
///
/// Ties go to fewer ON surfaces, then to the lexicographically smallest
/// state vector (RIS_1 first, OFF < ON).
pub fn oracle_states(params: &ScenarioParams, layout: &Layout) -> Result<RisStates> {
    if params.k > MAX_ORACLE_RIS {
        return Err(Error::TooManyRis {
            max: MAX_ORACLE_RIS,
            got: params.k,
        });
    }
    let budget = LinkBudget::new(params, layout)?;
    let k = params.k;
    let mut best: Option<(f64, RisStates)> = None;
    for mask in 0..(1u32 << k) {
        let states = RisStates::from_mask(mask, k);
        let s = budget.sinr_db(states.as_slice());
        let better = match &best {
            None => true,
            Some((bs, b)) => {
                s > *bs
                    || (s == *bs
                        && (states.count_on(), states.as_slice()) < (b.count_on(), b.as_slice()))
            }
        };
        if better {
            best = Some((s, states));
        }
    }
    Ok(best.expect("at least one configuration").1)
}

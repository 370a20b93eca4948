use rayon::prelude::*;
use serde::Serialize;

use super::{build_morse_complex, MorseError};
use crate::flow::{perturb, FlowScene};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub seed: u64,
    pub identical: bool,
    /// Why the trial did not produce a comparable complex, if it did not.
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub family: String,
    pub delta: f64,
    pub trials: usize,
    pub identical: usize,
    pub baseline: Vec<Vec<Vec<i64>>>,
    pub outcomes: Vec<TrialOutcome>,
    pub pass: bool,
}

/// Rebuilds the Morse complex for `trials` seeded perturbations of size
/// `delta` (seeds `seed, seed + 1, ...`) and compares incidence matrices
/// entrywise, critical points identified by label.
pub fn stability_experiment(scene: &FlowScene, delta: f64, trials: usize, seed: u64) -> Result<StabilityReport, MorseError> {
    let base = build_morse_complex(scene)?;
    let baseline = base.incidences();
    let outcomes: Vec<TrialOutcome> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let s = seed.wrapping_add(i);
            let rebuilt = perturb(scene, s, delta).map_err(MorseError::from).and_then(|p| build_morse_complex(&p));
            match rebuilt {
                Ok(m) => TrialOutcome {
                    seed: s,
                    identical: m.complex.bases() == base.complex.bases() && m.incidences() == baseline,
                    error: None,
                },
                Err(e) => TrialOutcome { seed: s, identical: false, error: Some(e.to_string()) },
            }
        })
        .collect();
    let identical = outcomes.iter().filter(|o| o.identical).count();
    Ok(StabilityReport {
        family: scene.family().to_string(),
        delta,
        trials,
        identical,
        baseline,
        outcomes,
        pass: identical == trials,
    })
}

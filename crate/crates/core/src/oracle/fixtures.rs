//! Random instance generation for the verification suites: the weekly
//! single-zone benchmark with parameters drawn from its sweep ranges.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Horizon, ModelParams, ProductionSpec, ScenarioInputs};
use crate::rng::{substream, Stream};
use crate::synth::{benchmark_inputs, benchmark_params};

/// One random conditioned instance: weekly benchmark inputs, parameters
/// within the sweep ranges and a non-empty participation vector.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub inputs: ScenarioInputs,
    pub params: ModelParams,
    pub delta: Vec<bool>,
    pub locations: Vec<usize>,
    pub horizon: Horizon,
}

pub fn instance_rng(seed: u64) -> ChaCha8Rng {
    substream(seed, Stream::Scenario, 0x7e57)
}

/// Draws a linear-production instance: `gamma` in (0.6, 1.4), `q0` in
/// (-0.4, 0.4), `q2` in (0.2, 0.8), slope 0.5.
pub fn random_linear_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let gamma = rng.gen_range(0.6..=1.4);
    let q0 = rng.gen_range(-0.4..=0.4);
    let q2 = rng.gen_range(0.2..=0.8);
    let params = benchmark_params(gamma, ProductionSpec::Linear { q0, p1: 0.5, q2 });
    random_pattern_instance(rng, params, None)
}

/// Same ranges with a random concave 2-3 segment production curve.
pub fn random_piecewise_instance(rng: &mut ChaCha8Rng) -> RandomInstance {
    let gamma = rng.gen_range(0.6..=1.4);
    let q0 = rng.gen_range(-0.4..=0.4);
    let q2 = rng.gen_range(0.2..=0.8);
    let n_seg = rng.gen_range(2usize..=3);
    let mut slopes = vec![rng.gen_range(0.8..=2.0)];
    for _ in 1..n_seg {
        let last = *slopes.last().unwrap();
        slopes.push(last * rng.gen_range(0.2..=0.8));
    }
    let mut breaks = vec![rng.gen_range(0.2..=0.8)];
    for _ in 2..n_seg {
        let last = *breaks.last().unwrap();
        breaks.push(last + rng.gen_range(0.5..=2.0));
    }
    let params = benchmark_params(gamma, ProductionSpec::Piecewise { q0, q2, slopes, breaks });
    random_pattern_instance(rng, params, None)
}

/// Draws the participation vector, optionally forcing the active-day count.
pub fn random_pattern_instance(
    rng: &mut ChaCha8Rng,
    params: ModelParams,
    active_days: Option<usize>,
) -> RandomInstance {
    let delta = match active_days {
        None => {
            let mask = rng.gen_range(1u32..128);
            (0..7).map(|t| mask >> t & 1 == 1).collect()
        }
        Some(m) => {
            // Uniform pattern with exactly m active days.
            let mut days: Vec<usize> = (0..7).collect();
            for k in 0..m {
                let pick = rng.gen_range(k..7);
                days.swap(k, pick);
            }
            let mut delta = vec![false; 7];
            for &d in &days[..m] {
                delta[d] = true;
            }
            delta
        }
    };
    RandomInstance {
        inputs: benchmark_inputs(),
        params,
        delta,
        locations: vec![0; 7],
        horizon: Horizon::week(),
    }
}

impl RandomInstance {
    pub fn problem(&self) -> crate::solver::ConditionedProblem<'_> {
        crate::solver::ConditionedProblem {
            delta: &self.delta,
            locations: &self.locations,
            inputs: &self.inputs,
            params: &self.params,
            horizon: &self.horizon,
        }
    }
}

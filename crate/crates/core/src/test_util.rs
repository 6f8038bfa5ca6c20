//! Shared fixtures for unit tests: the single-zone weekly benchmark
//! instance and random conditioned problems drawn from its parameter
//! ranges.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::{Horizon, ModelParams, ProductionSpec, ScenarioInputs};

/// Weekly single-zone scenario: attractiveness 100, one hour of two-way
/// travel, 10 money units of two-way travel cost, 2 h free on weekdays and
/// 6 h on weekend days.
pub(crate) fn weekly_inputs() -> ScenarioInputs {
    ScenarioInputs {
        locations: vec!["zone-0".into()],
        attractiveness: vec![vec![100.0; 7]],
        travel_time: vec![vec![1.0; 7]],
        travel_cost: vec![vec![10.0; 7]],
        free_time: vec![2.0, 2.0, 2.0, 2.0, 2.0, 6.0, 6.0],
        size_measures: vec![],
        measure_names: vec![],
    }
}

/// Base behavioral parameters of the weekly benchmark with a linear
/// production curve.
pub(crate) fn linear_params(p1: f64, gamma: f64, q0: f64, q2: f64) -> ModelParams {
    ModelParams::new(1.0, gamma, 30.0, 30.0, 15.0, ProductionSpec::Linear { q0, p1, q2 }).unwrap()
}

pub(crate) fn base_params() -> ModelParams {
    linear_params(0.5, 1.2, 0.0, 0.4)
}

pub(crate) fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-empty weekly participation vector.
pub(crate) fn random_delta(rng: &mut ChaCha8Rng) -> Vec<bool> {
    let mask = rng.gen_range(1u32..128);
    (0..7).map(|t| mask >> t & 1 == 1).collect()
}

/// Random parameters within the benchmark sweep ranges.
pub(crate) fn random_params(rng: &mut ChaCha8Rng) -> ModelParams {
    let gamma = rng.gen_range(0.6..=1.4);
    let q0 = rng.gen_range(-0.4..=0.4);
    let q2 = rng.gen_range(0.2..=0.8);
    linear_params(0.5, gamma, q0, q2)
}

/// Random piecewise parameters with concave 2-3 segment curves.
pub(crate) fn random_piecewise_params(rng: &mut ChaCha8Rng) -> ModelParams {
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
    let production = ProductionSpec::Piecewise { q0, q2, slopes, breaks };
    ModelParams::new(1.0, gamma, 30.0, 30.0, 15.0, production).unwrap()
}

pub(crate) fn week() -> Horizon {
    Horizon::week()
}

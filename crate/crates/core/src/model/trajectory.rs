//! Objective evaluation, trajectory reconstruction and feasibility checks.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

use super::{
    consumption_vector, production, ActivityPattern, Horizon, InventoryTrajectory, ModelParams,
    ScenarioInputs,
};

/// Tolerance for the exact constraint identities (balance, replenishment).
pub(crate) const FEAS_EPS: f64 = 1e-9;

/// Inventory path with the stock pinned to zero at `anchor`, following the
/// conservation recursion forward in cyclic order from there.
pub fn reconstruct_anchored(production: &[f64], lambda: &[f64], anchor: usize) -> Vec<f64> {
    let h = production.len();
    let mut inventory = vec![0.0; h];
    let mut level = 0.0;
    inventory[anchor] = 0.0;
    for step in 0..h - 1 {
        let day = (anchor + step) % h;
        level += production[day] - lambda[day];
        inventory[(day + 1) % h] = level;
    }
    inventory
}

/// Inventory path shifted so its minimum sits at zero. This is the
/// canonical reconstruction for plans whose anchor day is unknown.
pub fn reconstruct_min_anchored(production: &[f64], lambda: &[f64]) -> Vec<f64> {
    let mut inventory = reconstruct_anchored(production, lambda, 0);
    let min = inventory.iter().copied().fold(f64::INFINITY, f64::min);
    for v in &mut inventory {
        *v -= min;
    }
    inventory
}

/// Average daily utility of a pattern and its trajectory: inventory benefit
/// minus the time, safety-stock and travel-cost terms.
pub fn evaluate_objective(
    pattern: &ActivityPattern,
    trajectory: &InventoryTrajectory,
    inputs: &ScenarioInputs,
    params: &ModelParams,
    h: &Horizon,
) -> Result<f64, ModelError> {
    let days = h.len();
    for (what, len) in [
        ("pattern", pattern.delta.len()),
        ("inventory", trajectory.inventory.len()),
        ("production", trajectory.production.len()),
    ] {
        if len != days {
            return Err(ModelError::DimensionMismatch {
                what,
                expected: days,
                got: len,
            });
        }
    }
    let lambda = consumption_vector(h, params);
    let hf = days as f64;

    let mut benefit = 0.0;
    let mut time_cost = 0.0;
    let mut travel_cost = 0.0;
    for t in 0..days {
        benefit += trajectory.inventory[t] + trajectory.production[t] - 0.5 * lambda[t];
        time_cost += pattern.durations[t];
        if pattern.delta[t] {
            let loc = pattern.locations[t];
            time_cost += inputs.travel_time[loc][t];
            travel_cost += inputs.travel_cost[loc][t];
        }
    }
    let safety_stock = trajectory
        .inventory
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(params.rho3 / hf * benefit
        - params.rho1 / hf * time_cost
        - params.rho2 * safety_stock
        - travel_cost / hf)
}

/// Objective in the balance-substituted form used by the slope analysis:
/// the inventory path is taken anchored at zero on `anchor` and the total
/// production term is replaced by total consumption. Coincides with
/// [`evaluate_objective`] on balanced plans.
pub fn reformed_objective(
    pattern: &ActivityPattern,
    production: &[f64],
    anchor: usize,
    inputs: &ScenarioInputs,
    params: &ModelParams,
    h: &Horizon,
) -> f64 {
    let days = h.len();
    let lambda = consumption_vector(h, params);
    let hf = days as f64;

    let mut benefit: f64 = lambda.iter().map(|l| 0.5 * l).sum();
    for step in 0..days {
        let day = (anchor + step) % days;
        let weight = (days - 1 - step) as f64;
        benefit += weight * (production[day] - lambda[day]);
    }
    let mut time_cost = 0.0;
    let mut travel_cost = 0.0;
    for t in 0..days {
        time_cost += pattern.durations[t];
        if pattern.delta[t] {
            let loc = pattern.locations[t];
            time_cost += inputs.travel_time[loc][t];
            travel_cost += inputs.travel_cost[loc][t];
        }
    }
    params.rho3 / hf * benefit - params.rho1 / hf * time_cost - travel_cost / hf
}

/// One violated constraint, with 1-based day indices where relevant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Total production does not meet total consumption, so no trajectory
    /// satisfies conservation together with periodicity.
    Balance { production: f64, consumption: f64 },
    /// Post-replenishment stock cannot cover the day's consumption.
    Replenish { day: usize },
    /// Activity plus travel exceeds the day's free time.
    DailyTime { day: usize },
    /// Participation flag and duration disagree.
    DurationMismatch { day: usize },
}

/// Outcome of [`check_feasibility`]: feasible when no violations remain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }

    /// Feasibility of the four hard constraint families only, ignoring the
    /// participation/duration consistency check. Solver outputs may park a
    /// forced participation day at zero duration and still satisfy these.
    pub fn is_constraint_feasible(&self) -> bool {
        self.violations
            .iter()
            .all(|v| matches!(v, Violation::DurationMismatch { .. }))
    }
}

/// Reconstructs the trajectory implied by the pattern (minimum inventory
/// anchored at zero) and reports every violated constraint.
pub fn check_feasibility(
    pattern: &ActivityPattern,
    inputs: &ScenarioInputs,
    params: &ModelParams,
    h: &Horizon,
) -> Result<FeasibilityReport, ModelError> {
    let days = h.len();
    if pattern.delta.len() != days {
        return Err(ModelError::DimensionMismatch {
            what: "pattern",
            expected: days,
            got: pattern.delta.len(),
        });
    }
    let lambda = consumption_vector(h, params);
    let mut violations = Vec::new();

    let mut q = vec![0.0; days];
    for t in 0..days {
        let active = pattern.delta[t];
        let d = pattern.durations[t];
        if active != (d > 0.0) {
            violations.push(Violation::DurationMismatch { day: t + 1 });
        }
        if active {
            let loc = pattern.locations[t];
            q[t] = production(&params.production, d.max(0.0), inputs.attractiveness[loc][t], true)?;
            if d + inputs.travel_time[loc][t] > inputs.free_time[t] + FEAS_EPS {
                violations.push(Violation::DailyTime { day: t + 1 });
            }
        } else if d > inputs.free_time[t] + FEAS_EPS {
            violations.push(Violation::DailyTime { day: t + 1 });
        }
    }

    let total_q: f64 = q.iter().sum();
    let total_lambda: f64 = lambda.iter().sum();
    if (total_q - total_lambda).abs() > FEAS_EPS * total_lambda.max(1.0) {
        violations.push(Violation::Balance {
            production: total_q,
            consumption: total_lambda,
        });
    }

    let inventory = reconstruct_min_anchored(&q, &lambda);
    for t in 0..days {
        if inventory[t] + q[t] < lambda[t] - FEAS_EPS {
            violations.push(Violation::Replenish { day: t + 1 });
        }
    }

    Ok(FeasibilityReport { violations })
}

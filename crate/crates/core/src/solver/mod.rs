//! Exact solvers for the deterministic model.
//!
//! [`solve_conditioned`] optimizes durations with participation and
//! locations fixed, trying every candidate anchor day (a participation day
//! whose starting inventory is zero at the optimum) and keeping the best.
//! [`solve_full`] enumerates participation vectors and locations on top of
//! it, and [`solve_multiweek`] extends the horizon week by week until the
//! optimal utility turns non-negative.

mod anchored;

use crate::error::{ModelError, SolveError};
use crate::model::{
    evaluate_objective, ActivityPattern, Horizon, InventoryTrajectory, ModelParams,
    ScenarioInputs, SolveResult,
};
use crate::par;

/// Default cap on the multi-week extension loop.
pub const DEFAULT_MAX_WEEKS: usize = 8;

/// The duration problem with participation and locations held fixed.
#[derive(Debug, Clone, Copy)]
pub struct ConditionedProblem<'a> {
    pub delta: &'a [bool],
    /// Location index per day; read only on participation days.
    pub locations: &'a [usize],
    pub inputs: &'a ScenarioInputs,
    pub params: &'a ModelParams,
    pub horizon: &'a Horizon,
}

impl<'a> ConditionedProblem<'a> {
    pub fn new(
        delta: &'a [bool],
        locations: &'a [usize],
        inputs: &'a ScenarioInputs,
        params: &'a ModelParams,
        horizon: &'a Horizon,
    ) -> Result<Self, ModelError> {
        let days = horizon.len();
        if delta.len() != days || locations.len() != days {
            return Err(ModelError::DimensionMismatch {
                what: "conditioned pattern",
                expected: days,
                got: delta.len().min(locations.len()),
            });
        }
        for t in 0..days {
            if delta[t] && locations[t] >= inputs.n_locations() {
                return Err(ModelError::invalid(
                    "locations",
                    format!("day {}: zone index {} out of range", t + 1, locations[t]),
                ));
            }
        }
        Ok(Self {
            delta,
            locations,
            inputs,
            params,
            horizon,
        })
    }

    pub fn active_count(&self) -> usize {
        self.delta.iter().filter(|d| **d).count()
    }
}

/// Marginal utility of duration per day, for a fixed anchor day.
///
/// Slopes strictly decrease as the day moves cyclically forward from the
/// anchor, which is what makes the greedy duration assignment optimal.
#[derive(Debug, Clone)]
pub struct SlopeTable {
    /// 0-based anchor day.
    pub anchor: usize,
    /// Marginal utility (money per hour) of each day's duration.
    pub slopes: Vec<f64>,
}

/// Slope of the balance-substituted objective with respect to each day's
/// duration, for anchor day `anchor` (0-based), production constant `c`
/// and linear slope `p1`.
pub fn slopes(anchor: usize, c: f64, p1: f64, params: &ModelParams, h: &Horizon) -> SlopeTable {
    let days = h.len();
    assert!(anchor < days, "anchor outside horizon");
    let hf = days as f64;
    let slopes = (0..days)
        .map(|t| {
            let pos = (t + days - anchor) % days;
            (hf - 1.0 - pos as f64) * c * p1 * params.rho3 / hf - params.rho1 / hf
        })
        .collect();
    SlopeTable { anchor, slopes }
}

/// Solves the conditioned problem exactly. Cobb-Douglas production has no
/// piecewise structure for the condition-based steps and is routed to the
/// projected-gradient reference solver instead; the fitted piecewise spec
/// is the intended fast path.
pub fn solve_conditioned(prob: &ConditionedProblem<'_>) -> Result<SolveResult, SolveError> {
    if prob.params.production.is_cobb_douglas() {
        return crate::oracle::gradient_conditioned(prob);
    }
    let (plan, _anchor) = best_anchored_plan(prob).ok_or(SolveError::Infeasible)?;
    finish_result(prob, plan)
}

/// Objective value of the conditioned optimum without materializing the
/// full result; used by the enumeration in [`solve_full`].
fn solve_conditioned_value(prob: &ConditionedProblem<'_>) -> Option<f64> {
    if prob.params.production.is_cobb_douglas() {
        return crate::oracle::gradient_conditioned(prob).ok().map(|r| r.objective);
    }
    best_anchored_plan(prob).map(|(plan, _)| plan.value)
}

fn best_anchored_plan(
    prob: &ConditionedProblem<'_>,
) -> Option<(anchored::AnchoredPlan, usize)> {
    if prob.active_count() == 0 {
        return None;
    }
    let prep = match anchored::prepare(prob) {
        Ok(prep) => prep,
        Err(anchored::PrepError::TravelExceedsFreeTime) => return None,
    };
    let mut best: Option<(anchored::AnchoredPlan, usize)> = None;
    for &anchor in &prep.active {
        if let Some(plan) = anchored::solve_anchor(&prep, prob, anchor) {
            let better = match &best {
                None => true,
                Some((current, _)) => plan.value > current.value,
            };
            if better {
                best = Some((plan, anchor));
            }
        }
    }
    best
}

fn finish_result(
    prob: &ConditionedProblem<'_>,
    plan: anchored::AnchoredPlan,
) -> Result<SolveResult, SolveError> {
    let pattern = ActivityPattern {
        delta: prob.delta.to_vec(),
        durations: plan.durations,
        locations: prob.locations.to_vec(),
    };
    let safety_stock = plan.inventory.iter().copied().fold(f64::INFINITY, f64::min);
    let trajectory = InventoryTrajectory {
        inventory: plan.inventory,
        production: plan.production,
        safety_stock,
    };
    let objective = evaluate_objective(&pattern, &trajectory, prob.inputs, prob.params, prob.horizon)?;
    Ok(SolveResult {
        pattern,
        trajectory,
        objective,
        weeks: prob.horizon.weeks_count(),
    })
}

/// Location handling for the unconditioned search.
#[derive(Debug, Clone, Copy)]
pub enum LocationPolicy<'a> {
    /// The same zone is visited on every participation day; all zones are
    /// tried as candidates.
    SingleLocation,
    /// Locations fixed a priori, one per day.
    FixedLocations(&'a [usize]),
}

/// Solves the full deterministic model by enumerating every non-empty
/// participation vector (and candidate zone under the single-location
/// policy), then re-solving the best candidate for its full trajectory.
pub fn solve_full(
    inputs: &ScenarioInputs,
    params: &ModelParams,
    h: &Horizon,
    policy: LocationPolicy<'_>,
) -> Result<SolveResult, SolveError> {
    inputs.validate(h)?;
    let days = h.len();
    if days > 28 {
        // 2^H conditioned solves beyond four weeks is no longer a desk-scale
        // enumeration.
        return Err(SolveError::Unsupported("full enumeration beyond 28 days"));
    }
    let n_masks = (1u64 << days) - 1;
    let zones: Vec<usize> = match policy {
        LocationPolicy::SingleLocation => (0..inputs.n_locations()).collect(),
        LocationPolicy::FixedLocations(_) => vec![0],
    };

    // Candidate ranking: value desc, then lexicographically smallest delta
    // (day 1 first), then smallest zone. The order is total, so the argmax
    // does not depend on evaluation order or thread count.
    let rank_of = |mask: u64| mask.reverse_bits() >> (64 - days as u32);
    let best = par::map_range(n_masks as usize, |idx| {
        let mask = idx as u64 + 1;
        let delta: Vec<bool> = (0..days).map(|t| mask >> t & 1 == 1).collect();
        let mut local: Option<(f64, u64, usize)> = None;
        let mut locations = vec![0usize; days];
        for &zone in &zones {
            if let LocationPolicy::FixedLocations(fixed) = policy {
                locations.copy_from_slice(fixed);
            } else {
                locations.fill(zone);
            }
            let prob = ConditionedProblem {
                delta: &delta,
                locations: &locations,
                inputs,
                params,
                horizon: h,
            };
            if let Some(value) = solve_conditioned_value(&prob) {
                let candidate = (value, mask, zone);
                let better = match local {
                    None => true,
                    Some((v, m, z)) => {
                        value > v
                            || (value == v && (rank_of(mask), zone) < (rank_of(m), z))
                    }
                };
                if better {
                    local = Some(candidate);
                }
            }
        }
        local
    })
    .into_iter()
    .flatten()
    .max_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then_with(|| rank_of(b.1).cmp(&rank_of(a.1)))
            .then_with(|| b.2.cmp(&a.2))
    });

    let (_, mask, zone) = best.ok_or(SolveError::Infeasible)?;
    let delta: Vec<bool> = (0..days).map(|t| mask >> t & 1 == 1).collect();
    let locations: Vec<usize> = match policy {
        LocationPolicy::SingleLocation => vec![zone; days],
        LocationPolicy::FixedLocations(fixed) => fixed.to_vec(),
    };
    let prob = ConditionedProblem {
        delta: &delta,
        locations: &locations,
        inputs,
        params,
        horizon: h,
    };
    solve_conditioned(&prob)
}

/// Replicates a weekly horizon `k` times, preserving its weekend mask.
pub fn replicate_horizon(base: &Horizon, k: usize) -> Horizon {
    assert_eq!(base.len(), 7, "weekly replication needs a 7-day base");
    let weekend = (0..7 * k).filter_map(|t| base.is_weekend(t % 7).then_some(t + 1));
    Horizon::new(7 * k, weekend).expect("replicated horizon is valid")
}

/// Extends the horizon one week at a time (replicating consumption, free
/// time and zone attributes) until the optimal utility is non-negative.
pub fn solve_multiweek(
    inputs: &ScenarioInputs,
    params: &ModelParams,
    base_week: &Horizon,
    policy: LocationPolicy<'_>,
    max_weeks: usize,
) -> Result<SolveResult, SolveError> {
    assert!(max_weeks >= 1);
    let mut result = solve_full(inputs, params, base_week, policy)?;
    let mut weeks = 1;
    while result.objective < 0.0 {
        weeks += 1;
        if weeks > max_weeks {
            return Err(SolveError::NoNonNegativeHorizon { max_weeks });
        }
        let h = replicate_horizon(base_week, weeks);
        let wide = inputs.replicate_weeks(weeks);
        result = solve_full(&wide, params, &h, policy)?;
        result.weeks = weeks;
    }
    Ok(result)
}

/// Conditioned counterpart of the multi-week loop: the weekly participation
/// and location choice are replicated across weeks while durations stay
/// free per week. When the utility is still negative at `max_weeks`, the
/// capped solution is returned rather than an error, since a finite (if
/// poor) utility is still meaningful to a choice model.
pub fn solve_conditioned_multiweek(
    delta_week: &[bool],
    locations_week: &[usize],
    inputs: &ScenarioInputs,
    params: &ModelParams,
    base_week: &Horizon,
    max_weeks: usize,
) -> Result<SolveResult, SolveError> {
    assert!(max_weeks >= 1);
    let prob = ConditionedProblem::new(delta_week, locations_week, inputs, params, base_week)?;
    let mut result = solve_conditioned(&prob)?;
    let mut weeks = 1;
    while result.objective < 0.0 && weeks < max_weeks {
        weeks += 1;
        let h = replicate_horizon(base_week, weeks);
        let wide = inputs.replicate_weeks(weeks);
        let delta: Vec<bool> = (0..7 * weeks).map(|t| delta_week[t % 7]).collect();
        let locations: Vec<usize> = (0..7 * weeks).map(|t| locations_week[t % 7]).collect();
        let prob = ConditionedProblem::new(&delta, &locations, &wide, params, &h)?;
        result = solve_conditioned(&prob)?;
        result.weeks = weeks;
    }
    Ok(result)
}

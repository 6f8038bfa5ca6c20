//! Exact solve of the duration problem for one anchor day.
//!
//! With participation and locations fixed and the inventory pinned to zero
//! on the anchor day, the duration problem becomes a linear program in
//! production space: every unit produced at cyclic position `pos` (counting
//! from the anchor) earns `(H - 1 - pos) * rho3 / H` in inventory benefit
//! and costs `rho1 / (H * scale * p)` in time, subject to total balance,
//! per-day capacity and the replenishment ("serve consumption no later
//! than it occurs") constraints. The greedy fill below solves it exactly:
//! chunks are visited by decreasing marginal value and each serves the
//! earliest still-uncovered consumption it can reach.

use crate::model::consumption_vector;

use super::ConditionedProblem;

const SERVE_EPS: f64 = 1e-9;

/// One production "chunk": a segment of an active day's piecewise
/// production curve, truncated to the day's free-time capacity.
#[derive(Debug, Clone)]
struct Chunk {
    active_idx: usize,
    segment: usize,
    /// Marginal production rate, `scale * p`.
    rate: f64,
    /// Production capacity of the chunk.
    cap: f64,
}

/// Preprocessed conditioned problem, shared across anchors.
#[derive(Debug)]
pub(super) struct Prepared {
    pub days: usize,
    pub lambda: Vec<f64>,
    pub total_lambda: f64,
    /// Active day indices in ascending order.
    pub active: Vec<usize>,
    /// Free time net of travel per active day.
    pub cap_hours: Vec<f64>,
    /// Per active day, the segment chunks in order.
    chunks: Vec<Vec<Chunk>>,
    /// Fixed per-day cost of the pattern: travel time and money.
    pub fixed_time: f64,
    pub fixed_money: f64,
}

/// Why preparation can fail outright, before any anchor is tried.
pub(super) enum PrepError {
    /// An active day's travel alone exceeds its free time.
    TravelExceedsFreeTime,
}

pub(super) fn prepare(prob: &ConditionedProblem<'_>) -> Result<Prepared, PrepError> {
    let days = prob.horizon.len();
    let lambda = consumption_vector(prob.horizon, prob.params);
    let total_lambda: f64 = lambda.iter().sum();
    let (slopes, breaks) = prob
        .params
        .production
        .segments()
        .expect("anchored solver requires linear or piecewise production");

    let mut active = Vec::new();
    let mut cap_hours = Vec::new();
    let mut chunks = Vec::new();
    let mut fixed_time = 0.0;
    let mut fixed_money = 0.0;
    for t in 0..days {
        if !prob.delta[t] {
            continue;
        }
        let loc = prob.locations[t];
        let tt = prob.inputs.travel_time[loc][t];
        let cap = prob.inputs.free_time[t] - tt;
        if cap < 0.0 {
            return Err(PrepError::TravelExceedsFreeTime);
        }
        fixed_time += tt;
        fixed_money += prob.inputs.travel_cost[loc][t];
        let scale = prob.params.production.scale(prob.inputs.attractiveness[loc][t]);

        let mut day_chunks = Vec::with_capacity(slopes.len());
        let mut lower = 0.0;
        for (segment, p) in slopes.iter().enumerate() {
            let upper = breaks.get(segment).copied().unwrap_or(f64::INFINITY).min(cap);
            if upper > lower {
                day_chunks.push(Chunk {
                    active_idx: active.len(),
                    segment,
                    rate: scale * p,
                    cap: scale * p * (upper - lower),
                });
            }
            lower = lower.max(upper);
            if lower >= cap {
                break;
            }
        }
        active.push(t);
        cap_hours.push(cap);
        chunks.push(day_chunks);
    }

    Ok(Prepared {
        days,
        lambda,
        total_lambda,
        active,
        cap_hours,
        chunks,
        fixed_time,
        fixed_money,
    })
}

/// Solution of one anchored subproblem.
pub(super) struct AnchoredPlan {
    /// Production per day (full horizon indexing).
    pub production: Vec<f64>,
    /// Duration hours per day.
    pub durations: Vec<f64>,
    /// Inventory anchored at zero on the anchor day.
    pub inventory: Vec<f64>,
    /// Average daily utility.
    pub value: f64,
}

/// Runs the greedy fill for `anchor` (a day index with `delta = 1`).
/// Returns `None` when no duration assignment can cover consumption in
/// time from this anchor.
pub(super) fn solve_anchor(
    prep: &Prepared,
    prob: &ConditionedProblem<'_>,
    anchor: usize,
) -> Option<AnchoredPlan> {
    let days = prep.days;
    let hf = days as f64;
    let rho1 = prob.params.rho1;
    let rho3 = prob.params.rho3;
    let pos_of = |day: usize| (day + days - anchor) % days;

    // Score each chunk by its slope per unit production and order by
    // decreasing value; ties fall to the earlier position, then to the
    // earlier segment, which keeps output deterministic.
    let mut order: Vec<(f64, usize, usize, &Chunk)> = Vec::new();
    for (i, day_chunks) in prep.chunks.iter().enumerate() {
        let pos = pos_of(prep.active[i]);
        for chunk in day_chunks {
            let theta = (hf - 1.0 - pos as f64) * rho3 / hf - rho1 / (hf * chunk.rate);
            order.push((theta, pos, chunk.segment, chunk));
        }
    }
    order.sort_unstable_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap()
            .then(a.1.cmp(&b.1))
            .then(a.2.cmp(&b.2))
    });

    // Consumption demand by position; a chunk at position `pos` may only
    // serve demand at positions >= pos (production cannot arrive after the
    // day it is consumed, given zero inventory on the anchor).
    let mut demand: Vec<f64> = (0..days).map(|pos| prep.lambda[(anchor + pos) % days]).collect();
    let mut remaining = prep.total_lambda;

    let n_active = prep.active.len();
    let mut q_active = vec![0.0; n_active];
    let mut d_active = vec![0.0; n_active];
    for (_, pos, _, chunk) in &order {
        if remaining <= SERVE_EPS {
            break;
        }
        let mut budget = chunk.cap;
        let mut served = 0.0;
        for r in demand[*pos..].iter_mut() {
            if budget <= 0.0 {
                break;
            }
            let take = budget.min(*r);
            *r -= take;
            budget -= take;
            served += take;
        }
        if served > 0.0 {
            remaining -= served;
            q_active[chunk.active_idx] += served;
            d_active[chunk.active_idx] += served / chunk.rate;
        }
    }
    if remaining > SERVE_EPS * prep.total_lambda.max(1.0) {
        return None;
    }

    let mut production = vec![0.0; days];
    let mut durations = vec![0.0; days];
    for i in 0..n_active {
        let day = prep.active[i];
        production[day] = q_active[i];
        durations[day] = d_active[i].min(prep.cap_hours[i]);
    }
    let total_hours: f64 = durations.iter().sum();

    let inventory = crate::model::reconstruct_anchored(&production, &prep.lambda, anchor);
    let safety_stock = inventory.iter().copied().fold(f64::INFINITY, f64::min);
    debug_assert!(safety_stock > -1e-7, "anchored plan dipped below zero stock");

    let benefit = inventory.iter().sum::<f64>() + prep.total_lambda - 0.5 * prep.total_lambda;
    let value = rho3 / hf * benefit
        - rho1 / hf * (total_hours + prep.fixed_time)
        - prob.params.rho2 * safety_stock
        - prep.fixed_money / hf;

    Some(AnchoredPlan {
        production,
        durations,
        inventory,
        value,
    })
}


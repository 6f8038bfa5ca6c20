//! Independent, slow, trusted reference solvers for the conditioned
//! duration problem: exhaustive grid search, an anchored simplex for the
//! piecewise-linear cases, projected gradient ascent for Cobb-Douglas, and
//! tiny-scale full enumeration.
//!
//! Used by tests, the acceptance suite and the `verify` CLI subcommand;
//! the production solver only calls in here to handle Cobb-Douglas
//! production, which has no piecewise structure to exploit.

pub mod fixtures;
mod simplex;

use crate::error::SolveError;
use crate::model::{
    consumption_vector, evaluate_objective, reconstruct_min_anchored, ActivityPattern, Horizon,
    InventoryTrajectory, ModelParams, ProductionSpec, ScenarioInputs, SolveResult,
};
use crate::model::{production, reconstruct_anchored};
use crate::solver::ConditionedProblem;

use simplex::{LpOutcome, Sense};

const EPS: f64 = 1e-9;

/// Exhaustive grid search over duration vectors. The last active day is
/// pinned by total balance (production must equal consumption), the rest
/// sweep `{0, step, 2 step, ..., cap}`. Every evaluated point is a feasible
/// solution under the minimum-anchored trajectory reconstruction, so the
/// returned objective is optimal up to [`grid_error_bound`].
pub fn oracle_grid(prob: &ConditionedProblem<'_>, step: f64) -> Result<SolveResult, SolveError> {
    assert!(step > 0.0);
    let days = prob.horizon.len();
    let active: Vec<usize> = (0..days).filter(|t| prob.delta[*t]).collect();
    let m = active.len();
    if m == 0 {
        return Err(SolveError::Infeasible);
    }
    if m > 5 {
        return Err(SolveError::Unsupported(
            "grid oracle handles at most 5 active days",
        ));
    }
    let lambda = consumption_vector(prob.horizon, prob.params);
    let total_lambda: f64 = lambda.iter().sum();

    let mut caps = Vec::with_capacity(m);
    for &t in &active {
        let loc = prob.locations[t];
        let cap = prob.inputs.free_time[t] - prob.inputs.travel_time[loc][t];
        if cap < 0.0 {
            return Err(SolveError::Infeasible);
        }
        caps.push(cap);
    }
    let produce = |i: usize, d: f64| -> f64 {
        let t = active[i];
        let a = prob.inputs.attractiveness[prob.locations[t]][t];
        crate::model::production(&prob.params.production, d, a, true).expect("validated inputs")
    };

    // Grid values per free day, with the capacity endpoint always included.
    let grid_for = |cap: f64| -> Vec<f64> {
        let mut values: Vec<f64> = (0..).map(|i| i as f64 * step).take_while(|d| *d < cap).collect();
        values.push(cap);
        values
    };

    let mut best: Option<SolveResult> = None;
    let mut durations = vec![0.0; m];
    let free = m - 1;
    let grids: Vec<Vec<f64>> = caps[..free].iter().map(|c| grid_for(*c)).collect();
    let mut cursor = vec![0usize; free];

    'sweep: loop {
        // Fill durations from the cursor, with production running totals.
        let mut produced = 0.0;
        for i in 0..free {
            durations[i] = grids[i][cursor[i]];
            produced += produce(i, durations[i]);
        }
        if produced <= total_lambda + EPS {
            let need = (total_lambda - produced).max(0.0);
            if let Some(d_last) = invert_production(prob, active[m - 1], need, caps[m - 1]) {
                durations[m - 1] = d_last;
                let candidate = evaluate_plan(prob, &active, &durations, &lambda)?;
                if best.as_ref().is_none_or(|b| candidate.objective > b.objective) {
                    best = Some(candidate);
                }
            }
        }
        // Odometer increment.
        for i in (0..free).rev() {
            cursor[i] += 1;
            if cursor[i] < grids[i].len() {
                continue 'sweep;
            }
            cursor[i] = 0;
        }
        break;
    }
    best.ok_or(SolveError::Infeasible)
}

/// Duration on `day` that produces exactly `need`, when it fits within
/// `cap` hours.
fn invert_production(
    prob: &ConditionedProblem<'_>,
    day: usize,
    need: f64,
    cap: f64,
) -> Option<f64> {
    let a = prob.inputs.attractiveness[prob.locations[day]][day];
    let scale = prob.params.production.scale(a);
    let d = match &prob.params.production {
        ProductionSpec::CobbDouglas { q1, .. } => {
            if need <= 0.0 {
                0.0
            } else {
                (need / scale).powf(1.0 / q1)
            }
        }
        ProductionSpec::Linear { p1, .. } => need / (scale * p1),
        ProductionSpec::Piecewise { slopes, breaks, .. } => {
            crate::model::piecewise_inverse_hours(slopes, breaks, need / scale)
        }
    };
    (d <= cap + EPS).then(|| d.min(cap))
}

/// Builds the trajectory for a balanced duration plan and evaluates it.
fn evaluate_plan(
    prob: &ConditionedProblem<'_>,
    active: &[usize],
    active_durations: &[f64],
    lambda: &[f64],
) -> Result<SolveResult, SolveError> {
    let days = prob.horizon.len();
    let mut durations = vec![0.0; days];
    let mut q = vec![0.0; days];
    for (i, &t) in active.iter().enumerate() {
        durations[t] = active_durations[i];
        let a = prob.inputs.attractiveness[prob.locations[t]][t];
        q[t] = production(&prob.params.production, durations[t], a, true)?;
    }
    let inventory = reconstruct_min_anchored(&q, lambda);
    let pattern = ActivityPattern {
        delta: prob.delta.to_vec(),
        durations,
        locations: prob.locations.to_vec(),
    };
    let trajectory = InventoryTrajectory {
        safety_stock: 0.0,
        inventory,
        production: q,
    };
    let objective = evaluate_objective(&pattern, &trajectory, prob.inputs, prob.params, prob.horizon)?;
    Ok(SolveResult {
        pattern,
        trajectory,
        objective,
        weeks: prob.horizon.weeks_count(),
    })
}

/// Conservative bound on how far the grid optimum can sit below the true
/// optimum: every free day may be off by one step, each worth at most the
/// largest slope magnitude, plus the pinned day's compensation.
pub fn grid_error_bound(prob: &ConditionedProblem<'_>, step: f64) -> f64 {
    let days = prob.horizon.len() as f64;
    let mut max_rate: f64 = 0.0;
    for t in 0..prob.horizon.len() {
        if !prob.delta[t] {
            continue;
        }
        let a = prob.inputs.attractiveness[prob.locations[t]][t];
        let scale = prob.params.production.scale(a);
        let steepest = match &prob.params.production {
            ProductionSpec::CobbDouglas { .. } => scale, // slope at d = 1
            ProductionSpec::Linear { p1, .. } => scale * p1,
            ProductionSpec::Piecewise { slopes, .. } => scale * slopes[0],
        };
        max_rate = max_rate.max(steepest);
    }
    let m = prob.active_count() as f64;
    let slope_cap = prob.params.rho3 * max_rate + prob.params.rho1 / days + prob.params.rho2 * max_rate;
    4.0 * m * step * slope_cap
}

/// Exact reference solve of the conditioned problem.
///
/// Linear and piecewise production reduce, anchor by anchor, to a linear
/// program that a two-phase simplex solves exactly; Cobb-Douglas production
/// is handled by projected gradient ascent with Dykstra projection onto the
/// feasible polytope. Both paths are independent of the production solver's
/// greedy fill.
pub fn oracle_gradient(prob: &ConditionedProblem<'_>) -> Result<SolveResult, SolveError> {
    match &prob.params.production {
        ProductionSpec::CobbDouglas { .. } => gradient_solve(prob),
        _ => anchored_lp_solve(prob),
    }
}

/// Internal entry point used by the production solver to handle
/// Cobb-Douglas conditioned problems.
pub(crate) fn gradient_conditioned(
    prob: &ConditionedProblem<'_>,
) -> Result<SolveResult, SolveError> {
    gradient_solve(prob)
}

/// Full enumeration of participation vectors and per-day location
/// assignments at tiny scale, each solved by the grid oracle.
pub fn oracle_full_tiny(
    inputs: &ScenarioInputs,
    params: &ModelParams,
    h: &Horizon,
    step: f64,
) -> Result<SolveResult, SolveError> {
    let days = h.len();
    let zones = inputs.n_locations();
    if days > 4 || zones > 3 {
        return Err(SolveError::Unsupported("tiny oracle handles H <= 4 and at most 3 zones"));
    }
    let mut best: Option<SolveResult> = None;
    for mask in 1u32..1 << days {
        let delta: Vec<bool> = (0..days).map(|t| mask >> t & 1 == 1).collect();
        let active: Vec<usize> = (0..days).filter(|t| delta[*t]).collect();
        let assignments = zones.pow(active.len() as u32);
        for code in 0..assignments {
            let mut locations = vec![0usize; days];
            let mut rem = code;
            for &t in &active {
                locations[t] = rem % zones;
                rem /= zones;
            }
            let prob = ConditionedProblem {
                delta: &delta,
                locations: &locations,
                inputs,
                params,
                horizon: h,
            };
            if let Ok(candidate) = oracle_grid(&prob, step) {
                if best.as_ref().is_none_or(|b| candidate.objective > b.objective) {
                    best = Some(candidate);
                }
            }
        }
    }
    best.ok_or(SolveError::Infeasible)
}

// ---------------------------------------------------------------------------
// Anchored formulation shared by the simplex and projected-gradient paths.
// ---------------------------------------------------------------------------

struct AnchorContext {
    days: usize,
    lambda: Vec<f64>,
    total_lambda: f64,
    active: Vec<usize>,
    scales: Vec<f64>,
    cap_hours: Vec<f64>,
}

fn anchor_context(prob: &ConditionedProblem<'_>) -> Result<AnchorContext, SolveError> {
    let days = prob.horizon.len();
    let lambda = consumption_vector(prob.horizon, prob.params);
    let total_lambda = lambda.iter().sum();
    let mut active = Vec::new();
    let mut scales = Vec::new();
    let mut cap_hours = Vec::new();
    for t in 0..days {
        if !prob.delta[t] {
            continue;
        }
        let loc = prob.locations[t];
        let cap = prob.inputs.free_time[t] - prob.inputs.travel_time[loc][t];
        if cap < 0.0 {
            return Err(SolveError::Infeasible);
        }
        active.push(t);
        scales.push(prob.params.production.scale(prob.inputs.attractiveness[loc][t]));
        cap_hours.push(cap);
    }
    if active.is_empty() {
        return Err(SolveError::Infeasible);
    }
    Ok(AnchorContext {
        days,
        lambda,
        total_lambda,
        active,
        scales,
        cap_hours,
    })
}

fn anchored_lp_solve(prob: &ConditionedProblem<'_>) -> Result<SolveResult, SolveError> {
    let ctx = anchor_context(prob)?;
    let (slopes, breaks) = prob.params.production.segments().expect("piecewise path");
    let days = ctx.days;
    let hf = days as f64;

    let mut best: Option<(f64, Vec<f64>)> = None;
    for &anchor in &ctx.active {
        let pos_of = |day: usize| (day + days - anchor) % days;

        // Chunk variables for this anchor.
        let mut var_day = Vec::new();
        let mut var_rate = Vec::new();
        let mut var_pos = Vec::new();
        let mut caps = Vec::new();
        for (i, &t) in ctx.active.iter().enumerate() {
            let mut lower = 0.0;
            for (s, p) in slopes.iter().enumerate() {
                let upper = breaks.get(s).copied().unwrap_or(f64::INFINITY).min(ctx.cap_hours[i]);
                if upper > lower {
                    var_day.push(i);
                    var_rate.push(ctx.scales[i] * p);
                    var_pos.push(pos_of(t));
                    caps.push(ctx.scales[i] * p * (upper - lower));
                }
                lower = lower.max(upper);
                if lower >= ctx.cap_hours[i] {
                    break;
                }
            }
        }
        let n = var_day.len();
        if n == 0 {
            continue;
        }

        // Objective: inventory-holding value of production at this cyclic
        // position net of its time cost. Constant terms are re-added by the
        // exact evaluation below.
        let c: Vec<f64> = (0..n)
            .map(|j| {
                (hf - 1.0 - var_pos[j] as f64) * prob.params.rho3 / hf
                    - prob.params.rho1 / (hf * var_rate[j])
            })
            .collect();

        let mut rows = Vec::new();
        let mut senses = Vec::new();
        let mut rhs = Vec::new();
        // Balance.
        rows.push(vec![1.0; n]);
        senses.push(Sense::Eq);
        rhs.push(ctx.total_lambda);
        // Capacity per chunk.
        for j in 0..n {
            let mut row = vec![0.0; n];
            row[j] = 1.0;
            rows.push(row);
            senses.push(Sense::Le);
            rhs.push(caps[j]);
        }
        // Replenishment: cumulative production from the anchor covers
        // cumulative consumption at every position.
        let mut demand_cum = 0.0;
        for pos in 0..days - 1 {
            demand_cum += ctx.lambda[(anchor + pos) % days];
            let row: Vec<f64> = (0..n)
                .map(|j| if var_pos[j] <= pos { 1.0 } else { 0.0 })
                .collect();
            rows.push(row);
            senses.push(Sense::Ge);
            rhs.push(demand_cum);
        }

        match simplex::maximize(&c, &rows, &senses, &rhs) {
            LpOutcome::Infeasible => continue,
            LpOutcome::Optimal { x } => {
                let mut day_production = vec![0.0; ctx.active.len()];
                for j in 0..n {
                    day_production[var_day[j]] += x[j];
                }
                let value = anchored_value(prob, &ctx, anchor, &day_production);
                if best.as_ref().is_none_or(|b| value > b.0) {
                    best = Some((value, day_production));
                }
            }
        }
    }
    let (_, day_production) = best.ok_or(SolveError::Infeasible)?;
    finish_anchored(prob, &ctx, &day_production)
}

/// Hours needed on active day `i` for production `q`.
fn hours_for(prob: &ConditionedProblem<'_>, ctx: &AnchorContext, i: usize, q: f64) -> f64 {
    match &prob.params.production {
        ProductionSpec::CobbDouglas { q1, .. } => {
            if q <= 0.0 {
                0.0
            } else {
                (q / ctx.scales[i]).powf(1.0 / q1)
            }
        }
        ProductionSpec::Linear { p1, .. } => q / (ctx.scales[i] * p1),
        ProductionSpec::Piecewise { slopes, breaks, .. } => {
            crate::model::piecewise_inverse_hours(slopes, breaks, q / ctx.scales[i])
        }
    }
}

/// Exact objective of a balanced anchored plan given per-active-day
/// production.
fn anchored_value(
    prob: &ConditionedProblem<'_>,
    ctx: &AnchorContext,
    anchor: usize,
    day_production: &[f64],
) -> f64 {
    let days = ctx.days;
    let hf = days as f64;
    let mut q = vec![0.0; days];
    let mut hours = 0.0;
    let mut fixed_time = 0.0;
    let mut fixed_money = 0.0;
    for (i, &t) in ctx.active.iter().enumerate() {
        q[t] = day_production[i];
        hours += hours_for(prob, ctx, i, day_production[i]);
        let loc = prob.locations[t];
        fixed_time += prob.inputs.travel_time[loc][t];
        fixed_money += prob.inputs.travel_cost[loc][t];
    }
    let inventory = reconstruct_anchored(&q, &ctx.lambda, anchor);
    let safety = inventory.iter().copied().fold(f64::INFINITY, f64::min);
    let benefit: f64 =
        inventory.iter().sum::<f64>() + ctx.total_lambda - 0.5 * ctx.total_lambda;
    prob.params.rho3 / hf * benefit
        - prob.params.rho1 / hf * (hours + fixed_time)
        - prob.params.rho2 * safety
        - fixed_money / hf
}

fn finish_anchored(
    prob: &ConditionedProblem<'_>,
    ctx: &AnchorContext,
    day_production: &[f64],
) -> Result<SolveResult, SolveError> {
    let days = ctx.days;
    let mut durations = vec![0.0; days];
    let mut q = vec![0.0; days];
    for (i, &t) in ctx.active.iter().enumerate() {
        durations[t] = hours_for(prob, ctx, i, day_production[i]).min(ctx.cap_hours[i]);
        q[t] = day_production[i];
    }
    let inventory = reconstruct_min_anchored(&q, &ctx.lambda);
    let pattern = ActivityPattern {
        delta: prob.delta.to_vec(),
        durations,
        locations: prob.locations.to_vec(),
    };
    let trajectory = InventoryTrajectory {
        safety_stock: 0.0,
        inventory,
        production: q,
    };
    let objective = evaluate_objective(&pattern, &trajectory, prob.inputs, prob.params, prob.horizon)?;
    Ok(SolveResult {
        pattern,
        trajectory,
        objective,
        weeks: prob.horizon.weeks_count(),
    })
}

// ---------------------------------------------------------------------------
// Projected gradient ascent for Cobb-Douglas production.
// ---------------------------------------------------------------------------

/// Result of one anchored projected-gradient run.
struct PgRun {
    day_production: Vec<f64>,
    value: f64,
}

fn gradient_solve(prob: &ConditionedProblem<'_>) -> Result<SolveResult, SolveError> {
    let ProductionSpec::CobbDouglas { q1, .. } = prob.params.production else {
        return anchored_lp_solve(prob);
    };
    let ctx = anchor_context(prob)?;
    let mut best: Option<(PgRun, usize)> = None;
    for &anchor in &ctx.active {
        if let Some(run) = pg_anchor(prob, &ctx, anchor, q1) {
            if best.as_ref().is_none_or(|(b, _)| run.value > b.value) {
                best = Some((run, anchor));
            }
        }
    }
    let (run, _) = best.ok_or(SolveError::Infeasible)?;
    finish_anchored(prob, &ctx, &run.day_production)
}

/// Fixed-point residual of the projected-gradient map at the solution
/// returned by [`oracle_gradient`] for a Cobb-Douglas problem: zero exactly
/// at a KKT point of the concave program.
pub fn kkt_residual(prob: &ConditionedProblem<'_>, result: &SolveResult) -> f64 {
    let ProductionSpec::CobbDouglas { q1, .. } = prob.params.production else {
        return f64::NAN;
    };
    let ctx = anchor_context(prob).expect("feasible problem");
    let anchor = result
        .trajectory
        .inventory
        .iter()
        .enumerate()
        .filter(|(t, _)| prob.delta[*t])
        .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .map(|(t, _)| t)
        .expect("active anchor");
    let q: Vec<f64> = ctx.active.iter().map(|t| result.trajectory.production[*t]).collect();
    let sets = anchor_sets(&ctx, anchor, q1);
    let grad = pg_gradient(prob, &ctx, anchor, q1, &q);
    let stepped: Vec<f64> = q.iter().zip(&grad).map(|(qi, gi)| qi + gi).collect();
    let projected = dykstra(&stepped, &sets);
    l2_distance(&projected, &q)
}

struct AnchorSets {
    total: f64,
    caps: Vec<f64>,
    /// `(positions mask, cumulative demand)` per replenishment constraint.
    prefixes: Vec<(Vec<bool>, f64)>,
}

fn anchor_sets(ctx: &AnchorContext, anchor: usize, q1: f64) -> AnchorSets {
    let days = ctx.days;
    let pos_of = |day: usize| (day + days - anchor) % days;
    let caps: Vec<f64> = ctx
        .active
        .iter()
        .enumerate()
        .map(|(i, _)| ctx.scales[i] * ctx.cap_hours[i].powf(q1))
        .collect();
    let mut prefixes = Vec::new();
    let mut demand_cum = 0.0;
    for pos in 0..days - 1 {
        demand_cum += ctx.lambda[(anchor + pos) % days];
        let mask: Vec<bool> = ctx.active.iter().map(|t| pos_of(*t) <= pos).collect();
        prefixes.push((mask, demand_cum));
    }
    AnchorSets {
        total: ctx.total_lambda,
        caps,
        prefixes,
    }
}

fn pg_gradient(
    prob: &ConditionedProblem<'_>,
    ctx: &AnchorContext,
    anchor: usize,
    q1: f64,
    q: &[f64],
) -> Vec<f64> {
    let days = ctx.days;
    let hf = days as f64;
    let pos_of = |day: usize| (day + days - anchor) % days;
    ctx.active
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let pos = pos_of(t) as f64;
            let holding = prob.params.rho3 * (hf - pos) / hf;
            let marginal_hours = if q[i] <= 0.0 {
                0.0
            } else {
                (q[i] / ctx.scales[i]).powf(1.0 / q1 - 1.0) / (q1 * ctx.scales[i])
            };
            holding - prob.params.rho1 / hf * marginal_hours
        })
        .collect()
}

fn pg_value(
    prob: &ConditionedProblem<'_>,
    ctx: &AnchorContext,
    anchor: usize,
    q1: f64,
    q: &[f64],
) -> f64 {
    let days = ctx.days;
    let hf = days as f64;
    let pos_of = |day: usize| (day + days - anchor) % days;
    let mut value = 0.0;
    for (i, &t) in ctx.active.iter().enumerate() {
        let pos = pos_of(t) as f64;
        value += prob.params.rho3 * (hf - pos) / hf * q[i];
        if q[i] > 0.0 {
            value -= prob.params.rho1 / hf * (q[i] / ctx.scales[i]).powf(1.0 / q1);
        }
    }
    value
}

fn pg_anchor(
    prob: &ConditionedProblem<'_>,
    ctx: &AnchorContext,
    anchor: usize,
    q1: f64,
) -> Option<PgRun> {
    let sets = anchor_sets(ctx, anchor, q1);

    // Hall-style precheck: cumulative capacity must cover cumulative
    // demand at every position, otherwise the polytope is empty.
    for (mask, demand) in &sets.prefixes {
        let cap: f64 = mask
            .iter()
            .zip(&sets.caps)
            .filter(|(m, _)| **m)
            .map(|(_, c)| c)
            .sum();
        if cap + EPS < *demand {
            return None;
        }
    }
    if sets.caps.iter().sum::<f64>() + EPS < sets.total {
        return None;
    }

    // Earliest-deadline fill gives a feasible starting point.
    let n = ctx.active.len();
    let mut q = vec![0.0; n];
    {
        let days = ctx.days;
        let pos_of = |day: usize| (day + days - anchor) % days;
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_unstable_by_key(|i| pos_of(ctx.active[*i]));
        let mut remaining: Vec<f64> = (0..days).map(|pos| ctx.lambda[(anchor + pos) % days]).collect();
        for &i in &order {
            let pos = pos_of(ctx.active[i]);
            let mut budget = sets.caps[i];
            for r in remaining[pos..].iter_mut() {
                let take = budget.min(*r);
                *r -= take;
                budget -= take;
                q[i] += take;
            }
        }
        if remaining.iter().sum::<f64>() > EPS * sets.total.max(1.0) {
            return None;
        }
    }

    let mut value = pg_value(prob, ctx, anchor, q1, &q);
    let mut step = 1.0;
    let mut residual = f64::INFINITY;
    for iter in 0..4000 {
        let grad = pg_gradient(prob, ctx, anchor, q1, &q);
        let mut accepted = false;
        for _ in 0..40 {
            let trial: Vec<f64> = q.iter().zip(&grad).map(|(qi, gi)| qi + step * gi).collect();
            let projected = dykstra(&trial, &sets);
            let new_value = pg_value(prob, ctx, anchor, q1, &projected);
            let move_gain: f64 = grad
                .iter()
                .zip(projected.iter().zip(&q))
                .map(|(g, (p, qi))| g * (p - qi))
                .sum();
            if new_value >= value + 0.1 * move_gain - 1e-14 {
                let moved = l2_distance(&projected, &q);
                q = projected;
                value = new_value;
                accepted = true;
                if moved < 1e-12 * (1.0 + sets.total) {
                    residual = moved;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step = (step * 2.0).min(1e3);
        if iter % 8 == 0 {
            let grad = pg_gradient(prob, ctx, anchor, q1, &q);
            let stepped: Vec<f64> = q.iter().zip(&grad).map(|(qi, gi)| qi + gi).collect();
            residual = l2_distance(&dykstra(&stepped, &sets), &q);
            if residual < 1e-8 {
                break;
            }
        }
    }
    let _ = residual;
    Some(PgRun {
        value: anchored_value(prob, ctx, anchor, &q),
        day_production: q,
    })
}

/// Dykstra's alternating projection onto the intersection of the balance
/// hyperplane, the capacity box and the replenishment half-spaces.
fn dykstra(start: &[f64], sets: &AnchorSets) -> Vec<f64> {
    let n = start.len();
    let n_sets = 2 + sets.prefixes.len();
    let mut x = start.to_vec();
    let mut corrections = vec![vec![0.0; n]; n_sets];
    for _cycle in 0..600 {
        let mut movement: f64 = 0.0;
        for (s, correction) in corrections.iter_mut().enumerate() {
            let mut y: Vec<f64> = x.iter().zip(correction.iter()).map(|(xi, ci)| xi + ci).collect();
            match s {
                0 => {
                    // Balance hyperplane.
                    let shift = (y.iter().sum::<f64>() - sets.total) / n as f64;
                    for v in &mut y {
                        *v -= shift;
                    }
                }
                1 => {
                    for (v, cap) in y.iter_mut().zip(&sets.caps) {
                        *v = v.clamp(0.0, *cap);
                    }
                }
                _ => {
                    let (mask, demand) = &sets.prefixes[s - 2];
                    let count = mask.iter().filter(|m| **m).count();
                    if count > 0 {
                        let sum: f64 = y
                            .iter()
                            .zip(mask.iter())
                            .filter(|(_, m)| **m)
                            .map(|(v, _)| v)
                            .sum();
                        if sum < *demand {
                            let shift = (*demand - sum) / count as f64;
                            for (v, m) in y.iter_mut().zip(mask.iter()) {
                                if *m {
                                    *v += shift;
                                }
                            }
                        }
                    }
                }
            }
            for i in 0..n {
                let new_correction = x[i] + correction[i] - y[i];
                movement += (correction[i] - new_correction).abs();
                correction[i] = new_correction;
            }
            x = y;
        }
        if movement < 1e-13 {
            break;
        }
    }
    x
}

fn l2_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

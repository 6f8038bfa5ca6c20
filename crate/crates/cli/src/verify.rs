//! Verification suites backing the `verify` subcommand: solver-oracle
//! equivalence with the structural invariants, the speedup measurement
//! against the grid oracle, and a reduced piecewise-approximation sweep.

use std::time::Instant;

use needs_core::model::consumption_vector;
use needs_core::oracle::{self, fixtures};
use needs_core::pwl::{fit_pwl, PwlFitConfig};
use needs_core::solver::{self, LocationPolicy};
use needs_core::synth::{benchmark_inputs, benchmark_params};
use needs_core::{Horizon, ProductionSpec, SolveError, SolveResult};

fn report(name: &str, pass: bool, detail: &str) -> bool {
    println!("[{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn invariants_hold(result: &SolveResult, params: &needs_core::ModelParams, h: &Horizon) -> bool {
    let lambda = consumption_vector(h, params);
    let total_q: f64 = result.trajectory.production.iter().sum();
    let total_l: f64 = lambda.iter().sum();
    let min_inv = result
        .trajectory
        .inventory
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    (total_q - total_l).abs() <= 1e-9 * total_l.max(1.0) && min_inv.abs() <= 1e-9
}

/// Solver-oracle equivalence on random weekly instances plus the zero
/// safety stock and total balance invariants.
pub fn solver_suite(instances: usize, seed: u64) -> bool {
    let mut rng = fixtures::instance_rng(seed);
    let mut max_rel = 0.0f64;
    let mut solved = 0usize;
    let mut feasibility_disagreements = 0usize;
    let mut invariant_failures = 0usize;
    let mut grid_checked = 0usize;
    let mut grid_failures = 0usize;

    for _ in 0..instances {
        let instance = fixtures::random_linear_instance(&mut rng);
        let prob = instance.problem();
        let mine = solver::solve_conditioned(&prob);
        let reference = oracle::oracle_gradient(&prob);
        match (mine, reference) {
            (Ok(a), Ok(b)) => {
                let rel = (a.objective - b.objective).abs() / b.objective.abs().max(1.0);
                max_rel = max_rel.max(rel);
                solved += 1;
                if !invariants_hold(&a, &instance.params, &instance.horizon) {
                    invariant_failures += 1;
                }
                if prob.active_count() <= 3 {
                    grid_checked += 1;
                    let step = 1e-2;
                    match oracle::oracle_grid(&prob, step) {
                        Ok(grid) => {
                            let bound = oracle::grid_error_bound(&prob, step);
                            if a.objective < grid.objective - 1e-9
                                || a.objective - grid.objective > bound
                            {
                                grid_failures += 1;
                            }
                        }
                        Err(_) => grid_failures += 1,
                    }
                }
            }
            (Err(SolveError::Infeasible), Err(SolveError::Infeasible)) => {}
            _ => feasibility_disagreements += 1,
        }
    }

    let mut ok = true;
    ok &= report(
        "solver-oracle objective",
        max_rel <= 1e-6 && feasibility_disagreements == 0,
        &format!("{solved}/{instances} feasible, max rel diff {max_rel:.2e}, {feasibility_disagreements} feasibility disagreements"),
    );
    ok &= report(
        "grid cross-check",
        grid_failures == 0,
        &format!("{grid_checked} instances within the grid bound, {grid_failures} failures"),
    );
    ok &= report(
        "zero safety stock and total balance",
        invariant_failures == 0,
        &format!("{invariant_failures} violations over {solved} solutions"),
    );
    ok
}

/// Median runtime ratio of the grid oracle over the exact solver on
/// instances with at least three active days.
pub fn speedup_suite(instances: usize, seed: u64) -> bool {
    let mut rng = fixtures::instance_rng(seed ^ 0x5eed);
    let mut ratios = Vec::new();
    while ratios.len() < instances {
        let gamma: f64 = 1.2;
        let instance = fixtures::random_pattern_instance(
            &mut rng,
            benchmark_params(gamma, ProductionSpec::Linear { q0: 0.0, p1: 0.5, q2: 0.4 }),
            Some(3),
        );
        let prob = instance.problem();
        let start = Instant::now();
        let mine = solver::solve_conditioned(&prob);
        let solver_time = start.elapsed().as_secs_f64();
        let start = Instant::now();
        let reference = oracle::oracle_grid(&prob, 1e-2);
        let oracle_time = start.elapsed().as_secs_f64();
        if mine.is_ok() && reference.is_ok() {
            ratios.push(oracle_time / solver_time.max(1e-9));
        }
    }
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = ratios[ratios.len() / 2];
    report(
        "speedup vs grid oracle",
        median >= 100.0,
        &format!("median {median:.0}x over {} instances", ratios.len()),
    )
}

/// Reduced approximation sweep: a handful of parameter combinations,
/// comparing solver metrics under 3-segment fits against the Cobb-Douglas
/// reference solve.
pub fn piecewise_suite(seed: u64) -> bool {
    let inputs = benchmark_inputs();
    let week = Horizon::week();
    let combos = [
        (0.8, -0.2, 0.4),
        (1.2, 0.0, 0.4),
        (1.0, 0.2, 0.6),
        (1.4, -0.4, 0.2),
        (0.6, 0.4, 0.8),
        (1.2, 0.4, 0.6),
    ];
    let mut worst: f64 = 0.0;
    for (gamma, q0, q2) in combos {
        let target = ProductionSpec::CobbDouglas { q0, q1: 0.5, q2 };
        let fit = fit_pwl(&target, &PwlFitConfig { seed, ..Default::default() })
            .expect("fit on a Cobb-Douglas target");
        let cd = solver::solve_full(&inputs, &benchmark_params(gamma, target), &week, LocationPolicy::SingleLocation);
        let pw = solver::solve_full(&inputs, &benchmark_params(gamma, fit.spec), &week, LocationPolicy::SingleLocation);
        match (cd, pw) {
            (Ok(cd), Ok(pw)) => {
                let ratio = pw.objective / cd.objective;
                worst = worst.max((ratio - 1.0).abs());
            }
            _ => {
                return report("piecewise approximation", false, "reference solve failed");
            }
        }
    }
    report(
        "piecewise approximation",
        worst <= 0.05,
        &format!("worst objective deviation {:.2}% over {} combos", worst * 100.0, combos.len()),
    )
}

use approx::assert_relative_eq;

use super::*;
use crate::math::normal_pdf;
use crate::synth::{generate_population, generate_scenario, grocery_population, FreeTimeDistributions};

fn tiny_scenario() -> ZoneScenario {
    generate_scenario(3, 17)
}

fn observation_on(zone: usize, days: &[usize], scenario: &ZoneScenario) -> Observation {
    let mut pattern = ActivityPattern {
        delta: vec![false; 7],
        durations: vec![0.0; 7],
        locations: vec![zone; 7],
    };
    for &d in days {
        pattern.delta[d] = true;
        pattern.durations[d] = 1.0 + d as f64 * 0.1;
    }
    let _ = scenario;
    Observation {
        person: 1,
        pattern,
        home_zone: 0,
        ft_weekday: 2.5,
        ft_weekend: 5.0,
    }
}

#[test]
fn transform_matches_reference_arithmetic() {
    let zeta = RandomParams { r_rho1: 3.0, r_kappa: 1.0, q0: -0.5 };
    let t = transform_random(&zeta, 2.0, 5.0);
    assert_relative_eq!(t.rho1, 20.085_536_923_187_668, max_relative = 1e-12);
    assert_relative_eq!(t.rho3, t.rho1 * 2.0 / (1.0 + 1f64.exp()), max_relative = 1e-12);
    assert_eq!(t.rho2, 2.0 * t.rho3);
    assert_eq!(t.q0, -0.5);

    // kappa = rho3 / rho1 always stays below the tighter free-time bound.
    for r_kappa in [-30.0, -2.0, 0.0, 4.0] {
        let t = transform_random(&RandomParams { r_rho1: 1.0, r_kappa, q0: 0.0 }, 2.0, 5.0);
        assert!(t.rho3 / t.rho1 < 2.0);
    }

    // Large r_kappa sends the inventory value to zero.
    let t = transform_random(&RandomParams { r_rho1: 1.0, r_kappa: 60.0, q0: 0.0 }, 2.0, 5.0);
    assert!(t.rho3 < 1e-20);
}

#[test]
fn size_measure_reference_value() {
    let scenario = ZoneScenario {
        zones: vec![Zone { name: "z".into(), retail: 80.0, area: 1.0, attractiveness: 80.0 }],
        travel_time: vec![vec![0.1]],
        travel_cost: vec![vec![1.0]],
        use_size_measures: true,
    };
    let m = scenario.size_measure(0, &[0.5, 1.0]);
    assert_relative_eq!(m, 41.0, max_relative = 1e-12);
}

#[test]
fn symmetric_zones_get_equal_utilities() {
    let scenario = ZoneScenario {
        zones: vec![
            Zone { name: "a".into(), retail: 70.0, area: 1.0, attractiveness: 70.0 },
            Zone { name: "b".into(), retail: 70.0, area: 1.0, attractiveness: 70.0 },
        ],
        travel_time: vec![vec![0.3, 0.3], vec![0.3, 0.3]],
        travel_cost: vec![vec![3.0, 3.0], vec![3.0, 3.0]],
        use_size_measures: true,
    };
    let pop = grocery_population();
    let zeta = RandomParams { r_rho1: 2.5, r_kappa: 1.0, q0: -0.5 };
    let inputs = person_inputs(&scenario, 0, 2.5, 5.0);
    let mask = 0b100_0000u8;
    let a = systematic_utility(
        &Alternative { zone: 0, mask },
        &inputs,
        &zeta,
        &pop.xi,
        &scenario,
        2.5,
        5.0,
        8,
    )
    .unwrap();
    let b = systematic_utility(
        &Alternative { zone: 1, mask },
        &inputs,
        &zeta,
        &pop.xi,
        &scenario,
        2.5,
        5.0,
        8,
    )
    .unwrap();
    assert_relative_eq!(a.v_solver + a.ln_size, b.v_solver + b.ln_size, max_relative = 1e-12);
}

#[test]
fn choice_probability_reference_values() {
    // Two equal alternatives split evenly.
    let p = choice_probability(&[Some(2.0), Some(2.0)], 0, 0.5).unwrap();
    assert_relative_eq!(p, 0.5, max_relative = 1e-12);

    // V = (1, 0, 0) at scale 0.2: p1 = e^0.2 / (e^0.2 + 2).
    let p = choice_probability(&[Some(1.0), Some(0.0), Some(0.0)], 0, 0.2).unwrap();
    assert_relative_eq!(p, 0.379_152_453_093_988_8, max_relative = 1e-9);

    // Vanishing scale approaches uniform over feasible alternatives.
    let utilities = [Some(5.0), Some(-3.0), None, Some(0.4)];
    let p = choice_probability(&utilities, 1, 1e-12).unwrap();
    assert_relative_eq!(p, 1.0 / 3.0, max_relative = 1e-6);

    // Probabilities sum to one over the set.
    let total: f64 = (0..utilities.len())
        .map(|i| choice_probability(&utilities, i, 0.7).unwrap())
        .sum();
    assert_relative_eq!(total, 1.0, epsilon = 1e-12);
}

#[test]
fn mu_scaling_leaves_probabilities_unchanged() {
    let utilities = [Some(3.0), Some(1.2), Some(-0.4)];
    let c = 7.3;
    let scaled: Vec<Option<f64>> = utilities.iter().map(|u| u.map(|v| v / c)).collect();
    for i in 0..utilities.len() {
        let a = choice_probability(&utilities, i, 0.2).unwrap();
        let b = choice_probability(&scaled, i, 0.2 * c).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-12);
    }
}

#[test]
fn degenerate_choice_set_is_an_error() {
    assert!(matches!(
        choice_probability(&[None, None], 0, 0.2),
        Err(LikelihoodError::DegenerateChoiceSet { .. })
    ));
}

#[test]
fn duration_density_reference_points() {
    let d_star = 1.7;
    let sigma = 0.2;
    // A one-active-day, one-week solve centred exactly on the observation.
    let solve = SolveResult {
        pattern: ActivityPattern {
            delta: vec![false, false, true, false, false, false, false],
            durations: vec![0.0, 0.0, d_star, 0.0, 0.0, 0.0, 0.0],
            locations: vec![0; 7],
        },
        trajectory: crate::model::InventoryTrajectory {
            inventory: vec![0.0; 7],
            production: vec![0.0; 7],
            safety_stock: 0.0,
        },
        objective: 0.0,
        weeks: 1,
    };
    let mut observed = solve.pattern.clone();
    let g = duration_density(&observed, &solve, sigma).unwrap();
    assert_relative_eq!(
        g,
        1.0 / (d_star * sigma * (2.0 * std::f64::consts::PI).sqrt()),
        max_relative = 1e-12
    );

    // One-sigma point: g = phi(1) / (d * sigma).
    observed.durations[2] = d_star * sigma.exp();
    let g = duration_density(&observed, &solve, sigma).unwrap();
    assert_relative_eq!(
        g,
        normal_pdf(1.0) / (observed.durations[2] * sigma),
        max_relative = 1e-12
    );
}

#[test]
fn two_week_density_averages_weekly_terms() {
    let sigma = 0.3;
    let solve = SolveResult {
        pattern: ActivityPattern {
            delta: vec![true, false, false, false, false, false, false]
                .into_iter()
                .chain([true, false, false, false, false, false, false])
                .collect(),
            durations: {
                let mut d = vec![0.0; 14];
                d[0] = 1.2;
                d[7] = 2.4;
                d
            },
            locations: vec![0; 14],
        },
        trajectory: crate::model::InventoryTrajectory {
            inventory: vec![0.0; 14],
            production: vec![0.0; 14],
            safety_stock: 0.0,
        },
        objective: 0.0,
        weeks: 2,
    };
    let observed = ActivityPattern {
        delta: vec![true, false, false, false, false, false, false],
        durations: vec![1.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        locations: vec![0; 7],
    };
    let lognormal = |d: f64, center: f64| -> f64 {
        normal_pdf((d.ln() - center.ln()) / sigma) / (d * sigma)
    };
    let expected = 0.5 * (lognormal(1.5, 1.2) + lognormal(1.5, 2.4));
    let got = duration_density(&observed, &solve, sigma).unwrap();
    assert_relative_eq!(got, expected, max_relative = 1e-12);
}

#[test]
fn duration_density_integrates_to_one() {
    // Quadrature over ln d: the density must integrate to one.
    for (d_star, sigma) in [(0.8, 0.2), (2.5, 0.45)] {
        let solve = SolveResult {
            pattern: ActivityPattern {
                delta: vec![true, false, false, false, false, false, false],
                durations: vec![d_star, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
                locations: vec![0; 7],
            },
            trajectory: crate::model::InventoryTrajectory {
                inventory: vec![0.0; 7],
                production: vec![0.0; 7],
                safety_stock: 0.0,
            },
            objective: 0.0,
            weeks: 1,
        };
        let mut observed = solve.pattern.clone();
        let n = 4000;
        let lo = (d_star as f64).ln() - 10.0 * sigma;
        let hi = (d_star as f64).ln() + 10.0 * sigma;
        let step = (hi - lo) / n as f64;
        let mut integral = 0.0;
        for i in 0..=n {
            let u: f64 = lo + i as f64 * step;
            observed.durations[0] = u.exp();
            let g = duration_density(&observed, &solve, sigma).unwrap();
            // Transform to ln-space: dd = e^u du.
            let weight = if i == 0 || i == n {
                0.5
            } else {
                1.0
            };
            integral += weight * g * u.exp() * step;
        }
        assert!((integral - 1.0).abs() < 1e-6, "integral {integral}");
    }
}

#[test]
fn joint_probability_factorizes() {
    let scenario = tiny_scenario();
    let pop = grocery_population();
    let obs = observation_on(1, &[5], &scenario);
    let set = sample_choice_set(&obs, scenario.n_zones(), 16, 3);
    let zeta = RandomParams { r_rho1: 2.8, r_kappa: 1.2, q0: -0.4 };
    let nest = vec![0.3, -0.2, 0.1];
    let joint = joint_probability(&obs, &set, &zeta, &nest, &pop.xi, &scenario, 8).unwrap();

    // Recompose by hand.
    let inputs = obs.inputs(&scenario);
    let mut utilities = Vec::new();
    let mut chosen_solve = None;
    for (i, alt) in set.alternatives.iter().enumerate() {
        let parts = systematic_utility(
            alt, &inputs, &zeta, &pop.xi, &scenario, obs.ft_weekday, obs.ft_weekend, 8,
        );
        utilities.push(parts.as_ref().map(|p| p.v_solver + p.ln_size + nest[alt.zone]));
        if i == set.chosen {
            chosen_solve = parts.map(|p| p.solve);
        }
    }
    let p = choice_probability(&utilities, set.chosen, pop.xi.mu_scale).unwrap();
    let f = duration_density(&obs.pattern, &chosen_solve.unwrap(), pop.xi.sigma_dur).unwrap();
    assert_relative_eq!(joint, p * f, max_relative = 1e-12);
    assert!(joint > 0.0);
}

#[test]
fn choice_set_sampling_contract() {
    let scenario = tiny_scenario();
    let obs = observation_on(2, &[4, 6], &scenario);
    let universe = scenario.n_zones() * N_PATTERNS;

    let set = sample_choice_set(&obs, scenario.n_zones(), 64, 7);
    assert_eq!(set.alternatives.len(), 64);
    assert!(set.sampled);
    assert_eq!(set.chosen, 0);
    assert_eq!(set.alternatives[0].zone, 2);
    assert_eq!(set.alternatives[0].mask, obs.pattern_mask());
    let mut seen = std::collections::HashSet::new();
    for alt in &set.alternatives {
        assert!(seen.insert((alt.zone, alt.mask)), "duplicate alternative");
    }

    // Requests beyond the universe return the full set.
    let full = sample_choice_set(&obs, scenario.n_zones(), universe + 10, 7);
    assert_eq!(full.alternatives.len(), universe);
    assert!(!full.sampled);
    assert_eq!(full.alternatives[full.chosen].zone, 2);
    assert_eq!(full.alternatives[full.chosen].mask, obs.pattern_mask());
}

#[test]
fn single_draw_loglik_is_log_of_one_joint() {
    let scenario = tiny_scenario();
    let pop = grocery_population();
    let persons = generate_population(1, &scenario, &FreeTimeDistributions::default(), 21);
    let out = crate::synth::simulate_patterns(
        &persons,
        &scenario,
        &pop,
        &crate::synth::SynthConfig { seed: 21, max_weeks: 8 },
    );
    let obs = &out.observations[0];
    let cfg = LikelihoodConfig {
        draws: 1,
        sample_alternatives: 32,
        max_weeks: 8,
        seed: 99,
    };
    let report = simulated_loglik(std::slice::from_ref(obs), &scenario, &pop, &cfg).unwrap();

    // Rebuild the single draw by hand from the same stream.
    let mut rng = substream(cfg.seed, Stream::Likelihood, obs.person);
    let zeta = pop.draw_zeta(&mut rng);
    let nest: Vec<f64> = (0..scenario.n_zones())
        .map(|_| pop.xi.sigma_nest * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let set = sample_choice_set(obs, scenario.n_zones(), 32, cfg.seed);
    let joint = joint_probability(obs, &set, &zeta, &nest, &pop.xi, &scenario, 8).unwrap();
    assert_relative_eq!(report.loglik, joint.ln(), max_relative = 1e-12);
}

#[test]
fn loglik_is_deterministic_and_prefix_stable() {
    let scenario = tiny_scenario();
    let pop = grocery_population();
    let persons = generate_population(6, &scenario, &FreeTimeDistributions::default(), 33);
    let out = crate::synth::simulate_patterns(
        &persons,
        &scenario,
        &pop,
        &crate::synth::SynthConfig { seed: 33, max_weeks: 8 },
    );
    let cfg = LikelihoodConfig {
        draws: 20,
        sample_alternatives: 40,
        max_weeks: 8,
        seed: 5,
    };
    let a = simulated_loglik(&out.observations, &scenario, &pop, &cfg).unwrap();
    let b = simulated_loglik(&out.observations, &scenario, &pop, &cfg).unwrap();
    assert_eq!(a.loglik.to_bits(), b.loglik.to_bits());

    // More draws with the same seed only adds simulation noise; the value
    // stays in the same ballpark (the draws share a common prefix).
    let wider = LikelihoodConfig { draws: 40, ..cfg };
    let c = simulated_loglik(&out.observations, &scenario, &pop, &wider).unwrap();
    assert!((c.loglik - a.loglik).abs() < 0.25 * a.loglik.abs().max(1.0));
}

#[test]
fn nest_errors_correlate_same_zone_utilities() {
    // The shared random coefficients already correlate every alternative;
    // the nest error adds correlation to same-zone pairs specifically, so
    // the within-nest minus cross-nest correlation gap widens with
    // sigma_nest.
    let scenario = tiny_scenario();
    let mut pop = grocery_population();
    let obs = observation_on(0, &[5], &scenario);
    let inputs = obs.inputs(&scenario);
    let same_a = Alternative { zone: 1, mask: 0b010_0000 };
    let same_b = Alternative { zone: 1, mask: 0b100_0000 };
    let cross = Alternative { zone: 2, mask: 0b100_0000 };

    let correlation_gap = |sigma: f64, pop: &mut PopulationParams| -> f64 {
        pop.xi.sigma_nest = sigma;
        let mut rng = substream(4, Stream::Likelihood, 0);
        let mut ua = Vec::new();
        let mut ub = Vec::new();
        let mut uc = Vec::new();
        for _ in 0..400 {
            let zeta = pop.draw_zeta(&mut rng);
            let nest: Vec<f64> = (0..scenario.n_zones())
                .map(|_| pop.xi.sigma_nest * rng.sample::<f64, _>(StandardNormal))
                .collect();
            let u = |alt: &Alternative| {
                systematic_utility(alt, &inputs, &zeta, &pop.xi, &scenario, 2.5, 5.0, 8)
                    .map(|p| p.v_solver + p.ln_size + nest[alt.zone])
            };
            if let (Some(a), Some(b), Some(c)) = (u(&same_a), u(&same_b), u(&cross)) {
                ua.push(a);
                ub.push(b);
                uc.push(c);
            }
        }
        pearson(&ua, &ub) - pearson(&ua, &uc)
    };
    let gap_low = correlation_gap(0.0, &mut pop);
    let gap_high = correlation_gap(8.0, &mut pop);
    assert!(
        gap_high > 100.0 * gap_low.abs().max(1e-6),
        "within-nest correlation gap did not widen: {gap_low} vs {gap_high}"
    );
}

fn pearson(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}

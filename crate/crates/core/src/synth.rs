//! Monte Carlo synthesis of zones, individuals and observed activity
//! patterns, plus the canned benchmark and e-commerce scenarios.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::empirical::{
    full_universe, person_inputs, systematic_utility, FixedParams, Observation, PopulationParams,
    ProductionShape, Zone, ZoneScenario, WEEK_DAYS,
};
use crate::model::{ActivityPattern, ModelParams, ProductionSpec, ScenarioInputs};
use crate::par;
use crate::rng::{substream, Stream};

/// One synthetic individual.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Person {
    pub id: u64,
    pub home_zone: usize,
    pub ft_weekday: f64,
    pub ft_weekend: f64,
}

/// Zones and travel matrices drawn from the benchmark distributions:
/// retail employment uniform on (50, 100), zone area uniform on
/// (0.1, 2) square miles, attractiveness = retail employment density.
/// Travel times start uniform on (5/60, 1) hours, are symmetrized by
/// copying the upper triangle, then perturbed elementwise by a factor
/// uniform on (0.9, 1.1); travel cost is the perturbed time valued at
/// 12.8 money units per hour with its own elementwise perturbation.
pub fn generate_scenario(n_zones: usize, seed: u64) -> ZoneScenario {
    assert!(n_zones >= 1);
    let mut rng = substream(seed, Stream::Scenario, 0);
    let retail: Vec<f64> = (0..n_zones).map(|_| rng.gen_range(50.0..100.0)).collect();
    let area: Vec<f64> = (0..n_zones).map(|_| rng.gen_range(0.1..2.0)).collect();
    let zones = (0..n_zones)
        .map(|j| Zone {
            name: format!("zone-{j}"),
            retail: retail[j],
            area: area[j],
            attractiveness: retail[j] / area[j],
        })
        .collect();

    let (_, symmetric, travel_time) = travel_time_steps(n_zones, &mut rng);
    let _ = symmetric;
    let travel_cost = travel_time
        .iter()
        .map(|row| {
            row.iter()
                .map(|tt| tt * rng.gen_range(0.9..1.1) * 12.8)
                .collect()
        })
        .collect();

    ZoneScenario {
        zones,
        travel_time,
        travel_cost,
        use_size_measures: true,
    }
}

/// The three construction stages of the one-way travel time matrix:
/// raw uniform draws, the symmetrized matrix, and the perturbed final.
fn travel_time_steps<R: Rng>(
    n: usize,
    rng: &mut R,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let raw: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..n).map(|_| rng.gen_range(5.0 / 60.0..1.0)).collect())
        .collect();
    let mut symmetric = raw.clone();
    for i in 0..n {
        for j in i + 1..n {
            symmetric[j][i] = symmetric[i][j];
        }
    }
    let perturbed = symmetric
        .iter()
        .map(|row| row.iter().map(|tt| tt * rng.gen_range(0.9..1.1)).collect())
        .collect();
    (raw, symmetric, perturbed)
}

/// Free-time distributions: logistic transforms of normal draws bounded
/// by 8 weekday and 16 weekend hours.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeTimeDistributions {
    pub weekday_cap: f64,
    pub weekday_mu: f64,
    pub weekday_sigma: f64,
    pub weekend_cap: f64,
    pub weekend_mu: f64,
    pub weekend_sigma: f64,
}

impl Default for FreeTimeDistributions {
    fn default() -> Self {
        Self {
            weekday_cap: 8.0,
            weekday_mu: 1.0,
            weekday_sigma: 0.5,
            weekend_cap: 16.0,
            weekend_mu: 0.8,
            weekend_sigma: 0.4,
        }
    }
}

/// Draws individuals: free time from the logistic-normal transforms and a
/// uniformly random home zone. Streams are keyed per person, so the
/// population is reproducible and independent of generation order.
pub fn generate_population(
    n_persons: usize,
    scenario: &ZoneScenario,
    ft: &FreeTimeDistributions,
    seed: u64,
) -> Vec<Person> {
    let n_zones = scenario.n_zones();
    (0..n_persons as u64)
        .map(|id| {
            let mut rng = substream(seed, Stream::Population, id);
            let r_wd: f64 = ft.weekday_mu + ft.weekday_sigma * rng.sample::<f64, _>(StandardNormal);
            let r_we: f64 = ft.weekend_mu + ft.weekend_sigma * rng.sample::<f64, _>(StandardNormal);
            Person {
                id,
                home_zone: rng.gen_range(0..n_zones),
                ft_weekday: ft.weekday_cap / (1.0 + r_wd.exp()),
                ft_weekend: ft.weekend_cap / (1.0 + r_we.exp()),
            }
        })
        .collect()
}

/// Settings for pattern synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub seed: u64,
    pub max_weeks: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { seed: 0, max_weeks: 8 }
    }
}

/// Synthesis output: valid observations plus the ids of persons with no
/// feasible alternative at all (recorded as no-activity weeks and left
/// out of the observation set).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthOutput {
    pub observations: Vec<Observation>,
    pub excluded: Vec<u64>,
}

/// Generates one observed week per person: random coefficients and nest
/// errors are drawn, every single-zone alternative is valued, Gumbel noise
/// scaled by `1/mu` picks the winner (equivalent to sampling from the
/// choice probabilities), and the winner's optimal durations receive
/// multiplicative lognormal measurement error. Days whose optimal duration
/// is zero are recorded as non-participation.
pub fn simulate_patterns(
    persons: &[Person],
    scenario: &ZoneScenario,
    pop: &PopulationParams,
    cfg: &SynthConfig,
) -> SynthOutput {
    let items: Vec<Person> = persons.to_vec();
    let results = par::map_collect(items, |person| one_pattern(&person, scenario, pop, cfg));
    let mut observations = Vec::new();
    let mut excluded = Vec::new();
    for (person, obs) in persons.iter().zip(results) {
        match obs {
            Some(obs) => observations.push(obs),
            None => excluded.push(person.id),
        }
    }
    SynthOutput {
        observations,
        excluded,
    }
}

fn one_pattern(
    person: &Person,
    scenario: &ZoneScenario,
    pop: &PopulationParams,
    cfg: &SynthConfig,
) -> Option<Observation> {
    let mut rng = substream(cfg.seed, Stream::Pattern, person.id);
    let zeta = pop.draw_zeta(&mut rng);
    let nest_draws: Vec<f64> = (0..scenario.n_zones())
        .map(|_| pop.xi.sigma_nest * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let inputs = person_inputs(scenario, person.home_zone, person.ft_weekday, person.ft_weekend);

    let universe = full_universe(scenario.n_zones());
    let mut best: Option<(f64, usize)> = None;
    let mut solves = Vec::with_capacity(universe.len());
    for (i, alt) in universe.iter().enumerate() {
        let parts = systematic_utility(
            alt,
            &inputs,
            &zeta,
            &pop.xi,
            scenario,
            person.ft_weekday,
            person.ft_weekend,
            cfg.max_weeks,
        );
        let utility = parts.as_ref().map(|p| {
            let gumbel = standard_gumbel(&mut rng) / pop.xi.mu_scale;
            p.v_solver + p.ln_size + nest_draws[alt.zone] + gumbel
        });
        if let Some(u) = utility {
            if best.map_or(true, |(b, _)| u > b) {
                best = Some((u, i));
            }
        }
        solves.push(parts.map(|p| p.solve));
    }
    let (_, winner) = best?;
    let alt = universe[winner];
    let solve = solves[winner].take().expect("winner is feasible");

    // Observed week: one of the solved weeks, uniformly when the optimum
    // spans several.
    let week = if solve.weeks > 1 {
        rng.gen_range(0..solve.weeks)
    } else {
        0
    };
    let noise: Vec<f64> = (0..WEEK_DAYS)
        .map(|_| pop.xi.sigma_dur * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let mut delta = vec![false; WEEK_DAYS];
    let mut durations = vec![0.0; WEEK_DAYS];
    for t in 0..WEEK_DAYS {
        let d_star = solve.pattern.durations[7 * week + t];
        if d_star > 0.0 {
            delta[t] = true;
            durations[t] = d_star * noise[t].exp();
        }
    }
    if delta.iter().all(|d| !d) {
        // A multi-week plan can leave whole weeks idle; an observed idle
        // week carries no pattern to estimate on and is excluded like the
        // no-feasible-alternative case.
        return None;
    }
    if solve.weeks > 1 {
        // The observed week of a multi-week plan must itself be a viable
        // weekly pattern, or the choice model assigns it zero probability
        // structurally. Lightly-loaded off weeks can fail this.
        let mask = (0..WEEK_DAYS).fold(0u8, |m, t| m | (u8::from(delta[t]) << t));
        let check = systematic_utility(
            &crate::empirical::Alternative { zone: alt.zone, mask },
            &inputs,
            &zeta,
            &pop.xi,
            scenario,
            person.ft_weekday,
            person.ft_weekend,
            cfg.max_weeks,
        );
        if check.is_none() {
            return None;
        }
    }
    Some(Observation {
        person: person.id,
        pattern: ActivityPattern {
            delta,
            durations,
            locations: vec![alt.zone; WEEK_DAYS],
        },
        home_zone: person.home_zone,
        ft_weekday: person.ft_weekday,
        ft_weekend: person.ft_weekend,
    })
}

fn standard_gumbel<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
    -(-u.ln()).ln()
}

/// Summary statistics of a synthesized sample, the plot-ready series for
/// participation, duration and travel-time figures.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthSummary {
    pub n_observations: usize,
    pub n_excluded: usize,
    pub mean_weekly_participation: f64,
    /// Mean one-way travel time of performed activities, minutes.
    pub mean_oneway_travel_minutes: f64,
    /// Participation count by day of week.
    pub participation_by_day: [usize; 7],
    /// Mean activity duration (hours) by day of week.
    pub mean_duration_by_day: [f64; 7],
    /// One-way travel minutes of each performed activity.
    pub travel_minutes: Vec<f64>,
    /// Duration in hours of each performed activity.
    pub durations_hours: Vec<f64>,
    /// Weekly participation count per person.
    pub weekly_participation: Vec<usize>,
}

pub fn summarize(observations: &[Observation], scenario: &ZoneScenario, n_excluded: usize) -> SynthSummary {
    let mut participation_by_day = [0usize; 7];
    let mut duration_sum_by_day = [0.0f64; 7];
    let mut travel_minutes = Vec::new();
    let mut durations_hours = Vec::new();
    let mut weekly = Vec::with_capacity(observations.len());
    for obs in observations {
        let mut count = 0;
        for t in 0..WEEK_DAYS {
            if obs.pattern.delta[t] {
                count += 1;
                participation_by_day[t] += 1;
                duration_sum_by_day[t] += obs.pattern.durations[t];
                durations_hours.push(obs.pattern.durations[t]);
                let zone = obs.pattern.locations[t];
                travel_minutes.push(60.0 * scenario.travel_time[obs.home_zone][zone]);
            }
        }
        weekly.push(count);
    }
    let n_activities = durations_hours.len().max(1);
    let mean_duration_by_day =
        std::array::from_fn(|t| duration_sum_by_day[t] / (participation_by_day[t].max(1)) as f64);
    SynthSummary {
        n_observations: observations.len(),
        n_excluded,
        mean_weekly_participation: weekly.iter().sum::<usize>() as f64
            / observations.len().max(1) as f64,
        mean_oneway_travel_minutes: travel_minutes.iter().sum::<f64>() / n_activities as f64,
        participation_by_day,
        mean_duration_by_day,
        travel_minutes,
        durations_hours,
        weekly_participation: weekly,
    }
}

/// Benchmark population parameters: linear production with slope 0.8,
/// attractiveness elasticity 0.5, choice scale 0.2, size-measure
/// coefficients (0.5, 1.0), nest error scale 5, duration error scale 0.2,
/// and random coefficients `r_rho1 ~ N(3, 1)`, `r_kappa ~ N(1, 0.5^2)`,
/// `q0 ~ N(-0.5, 0.5^2)`.
pub fn grocery_population() -> PopulationParams {
    PopulationParams {
        mu_d: [3.0, 1.0, -0.5],
        omega_diag: [1.0, 0.25, 0.25],
        xi: FixedParams {
            lambda_weekday: 1.0,
            gamma: 1.2,
            production: ProductionShape::Linear { p1: 0.8 },
            q2: 0.5,
            mu_scale: 0.2,
            beta: vec![0.5, 1.0],
            sigma_nest: 5.0,
            sigma_dur: 0.2,
        },
    }
}

/// E-commerce variant: a single "online" location with attractiveness
/// fixed at 100, no travel, no size measures, weekend consumption ratio
/// 1.4 and a flatter choice scale of 0.1.
pub fn ecommerce_preset() -> (ZoneScenario, PopulationParams) {
    let scenario = ZoneScenario {
        zones: vec![Zone {
            name: "online".into(),
            retail: 0.0,
            area: 0.0,
            attractiveness: 100.0,
        }],
        travel_time: vec![vec![0.0]],
        travel_cost: vec![vec![0.0]],
        use_size_measures: false,
    };
    let mut pop = grocery_population();
    pop.xi.gamma = 1.4;
    pop.xi.mu_scale = 0.1;
    pop.xi.beta = vec![];
    (scenario, pop)
}

/// The single-zone weekly benchmark instance used by the solver
/// experiments: attractiveness 100, half an hour of one-way travel, 5
/// money units of one-way travel cost, 2 weekday and 6 weekend free hours.
pub fn benchmark_inputs() -> ScenarioInputs {
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

/// Benchmark behavioral parameters; the production spec is the caller's
/// choice (linear 0.5 slope in the solver experiments, Cobb-Douglas for
/// the approximation sweep).
pub fn benchmark_params(gamma: f64, production: ProductionSpec) -> ModelParams {
    ModelParams::new(1.0, gamma, 30.0, 30.0, 15.0, production).expect("valid benchmark parameters")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scenario_generation_bounds_and_symmetry() {
        let mut rng = substream(3, Stream::Scenario, 0);
        let (raw, symmetric, perturbed) = travel_time_steps(6, &mut rng);
        for i in 0..6 {
            for j in 0..6 {
                assert_eq!(symmetric[i][j], symmetric[j][i]);
                if j >= i {
                    assert_eq!(symmetric[i][j], raw[i][j]);
                }
                let ratio = perturbed[i][j] / symmetric[i][j];
                assert!(ratio > 0.9 && ratio < 1.1);
                assert!(perturbed[i][j] >= 0.9 * (5.0 / 60.0) && perturbed[i][j] <= 1.1);
            }
        }

        let scenario = generate_scenario(6, 3);
        for i in 0..6 {
            for j in 0..6 {
                let ratio = scenario.travel_cost[i][j] / scenario.travel_time[i][j];
                assert!(ratio > 0.9 * 12.8 && ratio < 1.1 * 12.8);
            }
        }
        for z in &scenario.zones {
            assert!(z.retail >= 50.0 && z.retail <= 100.0);
            assert!(z.area >= 0.1 && z.area <= 2.0);
            assert_eq!(z.attractiveness, z.retail / z.area);
        }
    }

    #[test]
    fn population_free_time_stays_under_caps() {
        let scenario = generate_scenario(4, 9);
        let persons = generate_population(4000, &scenario, &FreeTimeDistributions::default(), 9);
        for p in &persons {
            assert!(p.ft_weekday > 0.0 && p.ft_weekday < 8.0);
            assert!(p.ft_weekend > 0.0 && p.ft_weekend < 16.0);
            assert!(p.home_zone < 4);
        }
        // Median of the weekday transform sits at 8 / (1 + e).
        let mut wd: Vec<f64> = persons.iter().map(|p| p.ft_weekday).collect();
        wd.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = wd[wd.len() / 2];
        assert!((median - 8.0 / (1.0 + std::f64::consts::E)).abs() < 0.1);
    }

    #[test]
    fn same_seed_reproduces_population_and_patterns() {
        let scenario = generate_scenario(3, 5);
        let persons = generate_population(20, &scenario, &FreeTimeDistributions::default(), 5);
        let pop = grocery_population();
        let cfg = SynthConfig { seed: 5, max_weeks: 4 };
        let a = simulate_patterns(&persons, &scenario, &pop, &cfg);
        let b = simulate_patterns(&persons, &scenario, &pop, &cfg);
        assert_eq!(a.observations, b.observations);
        assert_eq!(a.excluded, b.excluded);
    }

    #[test]
    fn vanishing_duration_noise_reproduces_solver_optima() {
        let scenario = generate_scenario(3, 11);
        let persons = generate_population(10, &scenario, &FreeTimeDistributions::default(), 11);
        let mut pop = grocery_population();
        pop.xi.sigma_dur = 1e-12;
        // A high inventory value keeps weekly utility positive for every
        // draw, so plans stay single-week and the observed week is the
        // weekly optimum itself.
        pop.mu_d[1] = -2.0;
        let cfg = SynthConfig { seed: 11, max_weeks: 8 };
        let out = simulate_patterns(&persons, &scenario, &pop, &cfg);
        assert!(!out.observations.is_empty());
        for obs in &out.observations {
            // Re-solve the observed alternative under the same draw; its
            // positive durations must match the recorded ones.
            let zone = obs.chosen_zone().unwrap();
            let inputs = obs.inputs(&scenario);
            let mut rng = substream(cfg.seed, Stream::Pattern, obs.person);
            let zeta = pop.draw_zeta(&mut rng);
            let parts = systematic_utility(
                &crate::empirical::Alternative { zone, mask: obs.pattern_mask() },
                &inputs,
                &zeta,
                &pop.xi,
                &scenario,
                obs.ft_weekday,
                obs.ft_weekend,
                8,
            )
            .expect("observed alternative is feasible under its own draw");
            assert_eq!(parts.solve.weeks, 1, "plans should stay single-week here");
            for t in 0..WEEK_DAYS {
                let diff = (parts.solve.pattern.durations[t] - obs.pattern.durations[t]).abs();
                assert!(diff < 1e-6, "day {t}: {diff}");
            }
        }
    }

    #[test]
    fn ecommerce_preset_has_no_travel_terms() {
        let (scenario, pop) = ecommerce_preset();
        assert_eq!(scenario.travel_time, vec![vec![0.0]]);
        assert_eq!(scenario.travel_cost, vec![vec![0.0]]);
        assert!(!scenario.use_size_measures);
        assert_eq!(pop.xi.gamma, 1.4);
        assert_eq!(pop.xi.mu_scale, 0.1);
        // gamma reaches the consumption vector.
        let params = crate::model::ModelParams::new(
            1.0,
            pop.xi.gamma,
            1.0,
            2.0,
            1.0,
            pop.xi.production_spec(0.0),
        )
        .unwrap();
        let lambda = crate::model::consumption_vector(&crate::model::Horizon::week(), &params);
        assert_eq!(lambda[5], 1.4);
    }
}

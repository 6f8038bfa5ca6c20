//! Empirical layer: logit-mixture choice over joint location/participation
//! alternatives with nest error components, lognormal duration measurement
//! error, and the simulated log-likelihood that ties them together.
//!
//! Alternatives follow the single-location simplification: one zone is
//! visited on every participation day, so the universe is
//! `zones x (2^7 - 1)` weekly patterns.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{LikelihoodError, ModelError};
use crate::math::{ln_lognormal_pdf, logsumexp};
use crate::model::{
    ActivityPattern, Horizon, ModelParams, ProductionSpec, ScenarioInputs, SolveResult,
};
use crate::par;
use crate::rng::{substream, Stream};
use crate::solver::solve_conditioned_multiweek;

/// Days in the observation window.
pub const WEEK_DAYS: usize = 7;
/// Number of non-empty weekly participation patterns.
pub const N_PATTERNS: usize = (1 << WEEK_DAYS) - 1;

/// Production shape shared by the whole population; the constant `q0`
/// comes from the per-person random draw.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProductionShape {
    Linear { p1: f64 },
    CobbDouglas { q1: f64 },
    Piecewise { slopes: Vec<f64>, breaks: Vec<f64> },
}

/// Non-random parameters: consumption ratio, production shape, choice
/// scale, size-measure coefficients and the two error scales.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixedParams {
    /// Weekday consumption rate; fixed to 1 for identification.
    pub lambda_weekday: f64,
    pub gamma: f64,
    pub production: ProductionShape,
    pub q2: f64,
    /// Scale of the Gumbel kernel in the choice probability.
    pub mu_scale: f64,
    /// Size-measure coefficients; empty disables the size term.
    pub beta: Vec<f64>,
    /// Standard deviation of the per-nest error component, shared across
    /// nests.
    pub sigma_nest: f64,
    /// Standard deviation of the multiplicative duration error.
    pub sigma_dur: f64,
}

impl FixedParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.lambda_weekday != 1.0 {
            return Err(ModelError::invalid(
                "lambda_weekday",
                "fixed to 1 for identification",
            ));
        }
        if !(self.mu_scale > 0.0) {
            return Err(ModelError::invalid("mu_scale", "must be positive"));
        }
        if self.sigma_nest < 0.0 {
            return Err(ModelError::invalid("sigma_nest", "must be non-negative"));
        }
        if !(self.sigma_dur > 0.0) {
            return Err(ModelError::invalid("sigma_dur", "must be positive"));
        }
        self.production_spec(0.0).validate()
    }

    /// Builds the production spec for a person with constant `q0`.
    pub fn production_spec(&self, q0: f64) -> ProductionSpec {
        match &self.production {
            ProductionShape::Linear { p1 } => ProductionSpec::Linear { q0, p1: *p1, q2: self.q2 },
            ProductionShape::CobbDouglas { q1 } => {
                ProductionSpec::CobbDouglas { q0, q1: *q1, q2: self.q2 }
            }
            ProductionShape::Piecewise { slopes, breaks } => ProductionSpec::Piecewise {
                q0,
                q2: self.q2,
                slopes: slopes.clone(),
                breaks: breaks.clone(),
            },
        }
    }
}

/// Raw per-person random draws, before transformation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomParams {
    /// Log value of time.
    pub r_rho1: f64,
    /// Logistic-transformed inventory value.
    pub r_kappa: f64,
    /// Production constant.
    pub q0: f64,
}

/// Behavioral parameters implied by one random draw.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedParams {
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub q0: f64,
}

/// Maps raw draws to behavioral parameters: the value of time is
/// lognormal, the inventory value is the value of time scaled by a
/// logistic replenishment-time fraction (so one consumption-day is always
/// replenishable within a day's free time), and the safety-stock value is
/// pinned to twice the inventory value.
pub fn transform_random(
    zeta: &RandomParams,
    ft_weekday: f64,
    ft_weekend: f64,
) -> TransformedParams {
    let rho1 = zeta.r_rho1.exp();
    let rho3 = rho1 * ft_weekday.min(ft_weekend) / (1.0 + zeta.r_kappa.exp());
    TransformedParams {
        rho1,
        rho2: 2.0 * rho3,
        rho3,
        q0: zeta.q0,
    }
}

/// Hyperparameters of the random-coefficient distribution plus the fixed
/// parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationParams {
    /// Means of `(r_rho1, r_kappa, q0)`.
    pub mu_d: [f64; 3],
    /// Diagonal of the covariance matrix (variances).
    pub omega_diag: [f64; 3],
    pub xi: FixedParams,
}

impl PopulationParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.omega_diag.iter().any(|v| *v < 0.0) {
            return Err(ModelError::invalid("omega_diag", "variances must be non-negative"));
        }
        self.xi.validate()
    }

    pub fn draw_zeta<R: Rng>(&self, rng: &mut R) -> RandomParams {
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        RandomParams {
            r_rho1: self.mu_d[0] + self.omega_diag[0].sqrt() * z[0],
            r_kappa: self.mu_d[1] + self.omega_diag[1].sqrt() * z[1],
            q0: self.mu_d[2] + self.omega_diag[2].sqrt() * z[2],
        }
    }
}

/// One zone with its size measures and attractiveness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Zone {
    pub name: String,
    pub retail: f64,
    pub area: f64,
    pub attractiveness: f64,
}

/// Shared zone-level data: attributes plus travel matrices indexed
/// `[origin][destination]`. The entries enter the utility as the two-way
/// home-location travel time and cost; the synthesis summary reports the
/// same values as its one-way travel-time series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneScenario {
    pub zones: Vec<Zone>,
    pub travel_time: Vec<Vec<f64>>,
    pub travel_cost: Vec<Vec<f64>>,
    /// Whether the size-measure term enters the utility.
    pub use_size_measures: bool,
}

impl ZoneScenario {
    pub fn n_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.zones.len();
        if n == 0 {
            return Err(ModelError::invalid("zones", "need at least one zone"));
        }
        for (what, m) in [
            ("travel_time", &self.travel_time),
            ("travel_cost", &self.travel_cost),
        ] {
            if m.len() != n || m.iter().any(|row| row.len() != n) {
                return Err(ModelError::DimensionMismatch {
                    what,
                    expected: n,
                    got: m.len(),
                });
            }
        }
        if self.zones.iter().any(|z| !(z.attractiveness > 0.0)) {
            return Err(ModelError::invalid("attractiveness", "must be positive"));
        }
        Ok(())
    }

    /// Linear size measure of a zone under coefficients `beta`.
    pub fn size_measure(&self, zone: usize, beta: &[f64]) -> f64 {
        let z = &self.zones[zone];
        let values = [z.retail, z.area];
        beta.iter().zip(values).map(|(b, x)| b * x).sum()
    }
}

/// One person's observed week plus their individual inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub person: u64,
    pub pattern: ActivityPattern,
    pub home_zone: usize,
    pub ft_weekday: f64,
    pub ft_weekend: f64,
}

impl Observation {
    pub fn validate(&self, n_zones: usize) -> Result<(), LikelihoodError> {
        let h = Horizon::week();
        self.pattern
            .validate(&h, n_zones)
            .map_err(|e| LikelihoodError::BadObservation {
                person: self.person,
                reason: e.to_string(),
            })?;
        if self.home_zone >= n_zones {
            return Err(LikelihoodError::BadObservation {
                person: self.person,
                reason: format!("home zone {} out of range", self.home_zone),
            });
        }
        if self.chosen_zone().is_none() {
            return Err(LikelihoodError::BadObservation {
                person: self.person,
                reason: "participation days must share a single zone".into(),
            });
        }
        if !(self.ft_weekday > 0.0 && self.ft_weekend > 0.0) {
            return Err(LikelihoodError::BadObservation {
                person: self.person,
                reason: "free time must be positive".into(),
            });
        }
        Ok(())
    }

    /// The single zone visited this week, when the pattern is single-zone
    /// and non-empty.
    pub fn chosen_zone(&self) -> Option<usize> {
        let mut zone = None;
        for t in 0..WEEK_DAYS {
            if self.pattern.delta[t] {
                match zone {
                    None => zone = Some(self.pattern.locations[t]),
                    Some(z) if z != self.pattern.locations[t] => return None,
                    _ => {}
                }
            }
        }
        zone
    }

    /// Participation bitmask, day 1 in the lowest bit.
    pub fn pattern_mask(&self) -> u8 {
        (0..WEEK_DAYS).fold(0u8, |m, t| m | (u8::from(self.pattern.delta[t]) << t))
    }

    /// Per-day scenario inputs for this person.
    pub fn inputs(&self, scenario: &ZoneScenario) -> ScenarioInputs {
        person_inputs(scenario, self.home_zone, self.ft_weekday, self.ft_weekend)
    }
}

/// Builds the 7-day [`ScenarioInputs`] for a person: two-way travel from
/// the home zone, constant attractiveness, weekday/weekend free time.
pub fn person_inputs(
    scenario: &ZoneScenario,
    home_zone: usize,
    ft_weekday: f64,
    ft_weekend: f64,
) -> ScenarioInputs {
    let n = scenario.n_zones();
    let attractiveness = (0..n)
        .map(|j| vec![scenario.zones[j].attractiveness; WEEK_DAYS])
        .collect();
    let travel_time = (0..n)
        .map(|j| vec![scenario.travel_time[home_zone][j]; WEEK_DAYS])
        .collect();
    let travel_cost = (0..n)
        .map(|j| vec![scenario.travel_cost[home_zone][j]; WEEK_DAYS])
        .collect();
    let free_time = (0..WEEK_DAYS)
        .map(|t| if t >= 5 { ft_weekend } else { ft_weekday })
        .collect();
    let size_measures = if scenario.use_size_measures {
        scenario.zones.iter().map(|z| vec![z.retail, z.area]).collect()
    } else {
        vec![]
    };
    ScenarioInputs {
        locations: scenario.zones.iter().map(|z| z.name.clone()).collect(),
        attractiveness,
        travel_time,
        travel_cost,
        free_time,
        size_measures,
        measure_names: if scenario.use_size_measures {
            vec!["retail".into(), "area".into()]
        } else {
            vec![]
        },
    }
}

/// One joint location/participation alternative, single-zone form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alternative {
    pub zone: usize,
    /// Non-zero participation bitmask, day 1 in the lowest bit.
    pub mask: u8,
}

impl Alternative {
    pub fn delta(&self) -> [bool; WEEK_DAYS] {
        std::array::from_fn(|t| self.mask >> t & 1 == 1)
    }

    fn universe_index(&self) -> usize {
        self.zone * N_PATTERNS + (self.mask as usize - 1)
    }

    fn from_universe_index(idx: usize) -> Self {
        Alternative {
            zone: idx / N_PATTERNS,
            mask: (idx % N_PATTERNS) as u8 + 1,
        }
    }
}

/// Every single-zone alternative, zone-major.
pub fn full_universe(n_zones: usize) -> Vec<Alternative> {
    (0..n_zones * N_PATTERNS).map(Alternative::from_universe_index).collect()
}

/// Subset of alternatives entering the choice probability; the chosen one
/// always sits at index 0 of a sampled set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceSet {
    pub alternatives: Vec<Alternative>,
    pub chosen: usize,
    pub sampled: bool,
}

/// Uniform sampling without replacement of `size - 1` non-chosen
/// alternatives plus the chosen one. Uniform sampling keeps the plain
/// logit over the subset consistent, so no correction term is applied.
/// Requests at or beyond the universe size return the full set.
pub fn sample_choice_set(obs: &Observation, n_zones: usize, size: usize, seed: u64) -> ChoiceSet {
    let chosen = Alternative {
        zone: obs.chosen_zone().expect("validated single-zone observation"),
        mask: obs.pattern_mask(),
    };
    let universe = n_zones * N_PATTERNS;
    if size >= universe {
        return ChoiceSet {
            alternatives: full_universe(n_zones),
            chosen: chosen.universe_index(),
            sampled: false,
        };
    }
    let mut rng = substream(seed, Stream::ChoiceSet, obs.person);
    let mut pool: Vec<usize> = (0..universe).filter(|i| *i != chosen.universe_index()).collect();
    let mut alternatives = Vec::with_capacity(size);
    alternatives.push(chosen);
    for k in 0..size - 1 {
        let pick = rng.gen_range(k..pool.len());
        pool.swap(k, pick);
        alternatives.push(Alternative::from_universe_index(pool[k]));
    }
    ChoiceSet {
        alternatives,
        chosen: 0,
        sampled: true,
    }
}

/// Settings of the simulated likelihood.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LikelihoodConfig {
    /// Simulation draws per person.
    pub draws: usize,
    /// Choice-set size including the chosen alternative.
    pub sample_alternatives: usize,
    /// Cap on the week-extension loop inside conditioned solves.
    pub max_weeks: usize,
    pub seed: u64,
}

impl Default for LikelihoodConfig {
    fn default() -> Self {
        Self {
            draws: 200,
            sample_alternatives: 128,
            max_weeks: 8,
            seed: 0,
        }
    }
}

/// Utility pieces of one alternative before the nest error is added.
#[derive(Debug, Clone)]
pub struct UtilityParts {
    /// Optimal per-day utility from the conditioned solve.
    pub v_solver: f64,
    /// `ln` of the size measure; zero when size measures are disabled.
    pub ln_size: f64,
    pub solve: SolveResult,
}

/// Systematic utility of an alternative: the conditioned optimum of the
/// deterministic model plus the log size measure. Returns `None` when the
/// alternative is infeasible, which excludes it from the choice set.
#[allow(clippy::too_many_arguments)]
pub fn systematic_utility(
    alt: &Alternative,
    inputs: &ScenarioInputs,
    zeta: &RandomParams,
    xi: &FixedParams,
    scenario: &ZoneScenario,
    ft_weekday: f64,
    ft_weekend: f64,
    max_weeks: usize,
) -> Option<UtilityParts> {
    let transformed = transform_random(zeta, ft_weekday, ft_weekend);
    let params = ModelParams {
        lambda_weekday: xi.lambda_weekday,
        gamma: xi.gamma,
        rho1: transformed.rho1,
        rho2: transformed.rho2,
        rho3: transformed.rho3,
        production: xi.production_spec(transformed.q0),
    };
    let delta = alt.delta();
    let locations = [alt.zone; WEEK_DAYS];
    let week = Horizon::week();
    let solve =
        solve_conditioned_multiweek(&delta, &locations, inputs, &params, &week, max_weeks).ok()?;
    let ln_size = if scenario.use_size_measures && !xi.beta.is_empty() {
        let m = scenario.size_measure(alt.zone, &xi.beta);
        if m <= 0.0 {
            return None;
        }
        m.ln()
    } else {
        0.0
    };
    Some(UtilityParts {
        v_solver: solve.objective,
        ln_size,
        solve,
    })
}

/// Softmax choice probability with scale `mu` over utilities; `None`
/// entries are infeasible alternatives and drop out of the denominator.
pub fn choice_probability(
    utilities: &[Option<f64>],
    chosen: usize,
    mu: f64,
) -> Result<f64, LikelihoodError> {
    let scaled: Vec<f64> = utilities
        .iter()
        .map(|u| u.map_or(f64::NEG_INFINITY, |v| mu * v))
        .collect();
    let denominator = logsumexp(&scaled);
    if denominator == f64::NEG_INFINITY {
        return Err(LikelihoodError::DegenerateChoiceSet { person: 0 });
    }
    Ok(match utilities[chosen] {
        None => 0.0,
        Some(v) => (mu * v - denominator).exp(),
    })
}

/// Log of the duration density: the average over solved weeks of the
/// product of per-active-day lognormal densities around that week's
/// optimal durations. A week whose optimum idles an observed activity day
/// contributes zero probability.
pub fn ln_duration_density(observed: &ActivityPattern, solve: &SolveResult, sigma_dur: f64) -> f64 {
    let weeks = solve.weeks.max(1);
    let mut ln_weeks = Vec::with_capacity(weeks);
    for k in 0..weeks {
        let mut ln_g = 0.0;
        for t in 0..WEEK_DAYS {
            if !observed.delta[t] {
                continue;
            }
            let d_star = solve.pattern.durations[7 * k + t];
            let ln_center = if d_star > 0.0 { d_star.ln() } else { f64::NEG_INFINITY };
            ln_g += ln_lognormal_pdf(observed.durations[t], ln_center, sigma_dur);
        }
        ln_weeks.push(ln_g);
    }
    logsumexp(&ln_weeks) - (weeks as f64).ln()
}

/// Duration density in levels; see [`ln_duration_density`].
pub fn duration_density(
    observed: &ActivityPattern,
    solve: &SolveResult,
    sigma_dur: f64,
) -> Result<f64, LikelihoodError> {
    for t in 0..WEEK_DAYS {
        if observed.delta[t] && observed.durations[t] <= 0.0 {
            return Err(LikelihoodError::BadObservation {
                person: 0,
                reason: format!("day {}: zero duration on an activity day", t + 1),
            });
        }
    }
    Ok(ln_duration_density(observed, solve, sigma_dur).exp())
}

/// Joint probability of the observed location/participation and duration
/// for one draw: choice probability times duration density.
pub fn joint_probability(
    obs: &Observation,
    choice_set: &ChoiceSet,
    zeta: &RandomParams,
    nest_draws: &[f64],
    xi: &FixedParams,
    scenario: &ZoneScenario,
    max_weeks: usize,
) -> Result<f64, LikelihoodError> {
    let inputs = obs.inputs(scenario);
    let ln_joint = ln_joint_probability(
        obs,
        &inputs,
        choice_set,
        zeta,
        nest_draws,
        xi,
        scenario,
        max_weeks,
    )?;
    Ok(ln_joint.exp())
}

/// Log joint probability of one draw. `-inf` marks a zero-probability
/// draw, including draws under which no alternative at all is feasible.
#[allow(clippy::too_many_arguments)]
fn ln_joint_probability(
    obs: &Observation,
    inputs: &ScenarioInputs,
    choice_set: &ChoiceSet,
    zeta: &RandomParams,
    nest_draws: &[f64],
    xi: &FixedParams,
    scenario: &ZoneScenario,
    max_weeks: usize,
) -> Result<f64, LikelihoodError> {
    let mut utilities = Vec::with_capacity(choice_set.alternatives.len());
    let mut chosen_solve = None;
    for (i, alt) in choice_set.alternatives.iter().enumerate() {
        let parts = systematic_utility(
            alt,
            inputs,
            zeta,
            xi,
            scenario,
            obs.ft_weekday,
            obs.ft_weekend,
            max_weeks,
        );
        match parts {
            Some(parts) => {
                let v = parts.v_solver + parts.ln_size + nest_draws[alt.zone];
                if i == choice_set.chosen {
                    chosen_solve = Some(parts.solve);
                }
                utilities.push(Some(v));
            }
            None => utilities.push(None),
        }
    }
    let Some(chosen_solve) = chosen_solve else {
        // The observed alternative (and possibly everything else) is
        // infeasible under this draw; the draw contributes nothing.
        return Ok(f64::NEG_INFINITY);
    };
    let p_choice = choice_probability(&utilities, choice_set.chosen, xi.mu_scale)?;
    let ln_dur = ln_duration_density(&obs.pattern, &chosen_solve, xi.sigma_dur);
    Ok(p_choice.ln() + ln_dur)
}

/// Per-person log-likelihoods plus their sum.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LoglikReport {
    pub loglik: f64,
    pub per_person: Vec<f64>,
}

/// Simulated sample log-likelihood: for every person, the joint
/// probability is averaged over `draws` simulations of the random
/// parameters and nest errors, then logged and summed over persons.
///
/// The draw stream is keyed by `(seed, person, draw index)` only, so the
/// same seed reuses common random numbers across parameter values and the
/// result does not depend on thread count.
pub fn simulated_loglik(
    observations: &[Observation],
    scenario: &ZoneScenario,
    pop: &PopulationParams,
    cfg: &LikelihoodConfig,
) -> Result<LoglikReport, LikelihoodError> {
    scenario.validate()?;
    pop.validate()?;
    let n_zones = scenario.n_zones();
    for obs in observations {
        obs.validate(n_zones)?;
    }
    let items: Vec<&Observation> = observations.iter().collect();
    let results = par::map_collect(items, |obs| person_loglik(obs, scenario, pop, cfg));
    let mut per_person = Vec::with_capacity(results.len());
    for r in results {
        per_person.push(r?);
    }
    Ok(LoglikReport {
        loglik: per_person.iter().sum(),
        per_person,
    })
}

fn person_loglik(
    obs: &Observation,
    scenario: &ZoneScenario,
    pop: &PopulationParams,
    cfg: &LikelihoodConfig,
) -> Result<f64, LikelihoodError> {
    let n_zones = scenario.n_zones();
    let choice_set = sample_choice_set(obs, n_zones, cfg.sample_alternatives, cfg.seed);
    let inputs = obs.inputs(scenario);
    let mut rng = substream(cfg.seed, Stream::Likelihood, obs.person);
    let mut ln_joints = Vec::with_capacity(cfg.draws);
    for _ in 0..cfg.draws {
        let zeta = pop.draw_zeta(&mut rng);
        let nest_draws: Vec<f64> = (0..n_zones)
            .map(|_| pop.xi.sigma_nest * rng.sample::<f64, _>(StandardNormal))
            .collect();
        let ln_joint = ln_joint_probability(
            obs,
            &inputs,
            &choice_set,
            &zeta,
            &nest_draws,
            &pop.xi,
            scenario,
            cfg.max_weeks,
        )?;
        ln_joints.push(ln_joint);
    }
    Ok(logsumexp(&ln_joints) - (cfg.draws as f64).ln())
}

#[cfg(test)]
mod tests;

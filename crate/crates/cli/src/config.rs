//! TOML configuration shared by the subcommands.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use needs_core::empirical::{FixedParams, PopulationParams, ProductionShape};
use needs_core::{ModelParams, ProductionSpec, ScenarioInputs};

/// Top-level config file; every section is optional and only read by the
/// subcommands that need it.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: Option<ModelSection>,
    pub scenario: Option<ScenarioSection>,
    pub population: Option<PopulationSection>,
    pub estimation: Option<EstimationSection>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "one")]
    pub lambda: f64,
    pub gamma: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub production: ProductionSection,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProductionSection {
    CobbDouglas { q0: f64, q1: f64, q2: f64 },
    Linear { q0: f64, p1: f64, q2: f64 },
    Piecewise {
        q0: f64,
        q2: f64,
        slopes: Vec<f64>,
        breaks: Vec<f64>,
    },
}

impl ModelSection {
    pub fn to_params(&self) -> Result<ModelParams> {
        let production = match &self.production {
            ProductionSection::CobbDouglas { q0, q1, q2 } => {
                ProductionSpec::CobbDouglas { q0: *q0, q1: *q1, q2: *q2 }
            }
            ProductionSection::Linear { q0, p1, q2 } => {
                ProductionSpec::Linear { q0: *q0, p1: *p1, q2: *q2 }
            }
            ProductionSection::Piecewise { q0, q2, slopes, breaks } => ProductionSpec::Piecewise {
                q0: *q0,
                q2: *q2,
                slopes: slopes.clone(),
                breaks: breaks.clone(),
            },
        };
        Ok(ModelParams::new(
            self.lambda,
            self.gamma,
            self.rho1,
            self.rho2,
            self.rho3,
            production,
        )?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    /// Named preset ("benchmark") or a path to a scenario-inputs JSON.
    pub preset: Option<String>,
    pub file: Option<String>,
}

impl ScenarioSection {
    pub fn to_inputs(&self, config_dir: &Path) -> Result<ScenarioInputs> {
        match (&self.preset, &self.file) {
            (Some(name), None) => match name.as_str() {
                "benchmark" => Ok(needs_core::synth::benchmark_inputs()),
                other => bail!("unknown scenario preset `{other}`"),
            },
            (None, Some(file)) => {
                let path = config_dir.join(file);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading scenario {}", path.display()))?;
                Ok(serde_json::from_str(&text)?)
            }
            _ => bail!("scenario section needs exactly one of `preset` or `file`"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSection {
    pub mu_rho1: f64,
    pub mu_kappa: f64,
    pub mu_q0: f64,
    pub var_rho1: f64,
    pub var_kappa: f64,
    pub var_q0: f64,
    #[serde(default = "one")]
    pub lambda: f64,
    pub gamma: f64,
    pub p1: Option<f64>,
    pub q1: Option<f64>,
    pub pwl_slopes: Option<Vec<f64>>,
    pub pwl_breaks: Option<Vec<f64>>,
    pub q2: f64,
    pub mu: f64,
    #[serde(default)]
    pub beta: Vec<f64>,
    pub sigma_nest: f64,
    pub sigma_dur: f64,
}

impl PopulationSection {
    pub fn to_params(&self) -> Result<PopulationParams> {
        let production = match (&self.p1, &self.q1, &self.pwl_slopes) {
            (Some(p1), None, None) => ProductionShape::Linear { p1: *p1 },
            (None, Some(q1), None) => ProductionShape::CobbDouglas { q1: *q1 },
            (None, None, Some(slopes)) => ProductionShape::Piecewise {
                slopes: slopes.clone(),
                breaks: self.pwl_breaks.clone().unwrap_or_default(),
            },
            _ => bail!("population section needs exactly one of `p1`, `q1` or `pwl_slopes`"),
        };
        let pop = PopulationParams {
            mu_d: [self.mu_rho1, self.mu_kappa, self.mu_q0],
            omega_diag: [self.var_rho1, self.var_kappa, self.var_q0],
            xi: FixedParams {
                lambda_weekday: self.lambda,
                gamma: self.gamma,
                production,
                q2: self.q2,
                mu_scale: self.mu,
                beta: self.beta.clone(),
                sigma_nest: self.sigma_nest,
                sigma_dur: self.sigma_dur,
            },
        };
        pop.validate()?;
        Ok(pop)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationSection {
    pub draws: Option<usize>,
    pub alternatives: Option<usize>,
    pub max_weeks: Option<usize>,
}

fn one() -> f64 {
    1.0
}

//! Simulated maximum likelihood: derivative-free ascent over selected
//! parameters and log-likelihood surface scans.
//!
//! The optimizer works in transformed coordinates (log for positive
//! parameters, logit for the duration elasticity) so the simplex never
//! leaves the valid domain. All likelihood evaluations in one run share
//! the same seeded draw streams: differences across parameter values are
//! then smooth rather than resampled noise.

use serde::{Deserialize, Serialize};

use crate::empirical::{
    simulated_loglik, LikelihoodConfig, Observation, PopulationParams, ProductionShape,
    ZoneScenario,
};
use crate::error::LikelihoodError;
use crate::math::{logistic, logit};
use crate::optim::{self, NmOptions};
use crate::par;

/// A parameter that the estimator may move, addressed by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParam {
    /// Linear production slope.
    P1,
    /// Cobb-Douglas duration elasticity, bounded in (0, 1).
    Q1,
    /// Attractiveness elasticity.
    Q2,
    /// Weekend consumption ratio.
    Gamma,
    /// Choice scale.
    Mu,
    /// Size-measure coefficient by index.
    Beta(usize),
    SigmaNest,
    SigmaDur,
    MuRho1,
    MuKappa,
    MuQ0,
    VarRho1,
    VarKappa,
    VarQ0,
}

impl FreeParam {
    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "p1" => Self::P1,
            "q1" => Self::Q1,
            "q2" => Self::Q2,
            "gamma" => Self::Gamma,
            "mu" => Self::Mu,
            "sigma_nest" => Self::SigmaNest,
            "sigma_dur" => Self::SigmaDur,
            "mu_rho1" => Self::MuRho1,
            "mu_kappa" => Self::MuKappa,
            "mu_q0" => Self::MuQ0,
            "var_rho1" => Self::VarRho1,
            "var_kappa" => Self::VarKappa,
            "var_q0" => Self::VarQ0,
            other => {
                let idx = other.strip_prefix("beta")?.parse().ok()?;
                Self::Beta(idx)
            }
        })
    }

    pub fn name(&self) -> String {
        match self {
            Self::P1 => "p1".into(),
            Self::Q1 => "q1".into(),
            Self::Q2 => "q2".into(),
            Self::Gamma => "gamma".into(),
            Self::Mu => "mu".into(),
            Self::Beta(i) => format!("beta{i}"),
            Self::SigmaNest => "sigma_nest".into(),
            Self::SigmaDur => "sigma_dur".into(),
            Self::MuRho1 => "mu_rho1".into(),
            Self::MuKappa => "mu_kappa".into(),
            Self::MuQ0 => "mu_q0".into(),
            Self::VarRho1 => "var_rho1".into(),
            Self::VarKappa => "var_kappa".into(),
            Self::VarQ0 => "var_q0".into(),
        }
    }

    /// Checks that this parameter exists under the population's
    /// production shape and coefficient layout.
    pub fn check(&self, pop: &PopulationParams) -> Result<(), crate::error::ModelError> {
        let ok = match self {
            Self::P1 => matches!(pop.xi.production, ProductionShape::Linear { .. }),
            Self::Q1 => matches!(pop.xi.production, ProductionShape::CobbDouglas { .. }),
            Self::Beta(i) => *i < pop.xi.beta.len(),
            _ => true,
        };
        if ok {
            Ok(())
        } else {
            Err(crate::error::ModelError::invalid(
                "free_params",
                format!("`{}` does not exist under this configuration", self.name()),
            ))
        }
    }

    pub fn get(&self, pop: &PopulationParams) -> f64 {
        match self {
            Self::P1 => match &pop.xi.production {
                ProductionShape::Linear { p1 } => *p1,
                _ => panic!("p1 is only free under linear production"),
            },
            Self::Q1 => match &pop.xi.production {
                ProductionShape::CobbDouglas { q1 } => *q1,
                _ => panic!("q1 is only free under Cobb-Douglas production"),
            },
            Self::Q2 => pop.xi.q2,
            Self::Gamma => pop.xi.gamma,
            Self::Mu => pop.xi.mu_scale,
            Self::Beta(i) => pop.xi.beta[*i],
            Self::SigmaNest => pop.xi.sigma_nest,
            Self::SigmaDur => pop.xi.sigma_dur,
            Self::MuRho1 => pop.mu_d[0],
            Self::MuKappa => pop.mu_d[1],
            Self::MuQ0 => pop.mu_d[2],
            Self::VarRho1 => pop.omega_diag[0],
            Self::VarKappa => pop.omega_diag[1],
            Self::VarQ0 => pop.omega_diag[2],
        }
    }

    pub fn set(&self, pop: &mut PopulationParams, value: f64) {
        match self {
            Self::P1 => {
                pop.xi.production = ProductionShape::Linear { p1: value };
            }
            Self::Q1 => {
                pop.xi.production = ProductionShape::CobbDouglas { q1: value };
            }
            Self::Q2 => pop.xi.q2 = value,
            Self::Gamma => pop.xi.gamma = value,
            Self::Mu => pop.xi.mu_scale = value,
            Self::Beta(i) => pop.xi.beta[*i] = value,
            Self::SigmaNest => pop.xi.sigma_nest = value,
            Self::SigmaDur => pop.xi.sigma_dur = value,
            Self::MuRho1 => pop.mu_d[0] = value,
            Self::MuKappa => pop.mu_d[1] = value,
            Self::MuQ0 => pop.mu_d[2] = value,
            Self::VarRho1 => pop.omega_diag[0] = value,
            Self::VarKappa => pop.omega_diag[1] = value,
            Self::VarQ0 => pop.omega_diag[2] = value,
        }
    }

    /// Natural value to unconstrained optimizer coordinate.
    fn to_unconstrained(&self, value: f64) -> f64 {
        match self {
            Self::Q1 => logit(value),
            Self::Beta(_) | Self::MuRho1 | Self::MuKappa | Self::MuQ0 => value,
            _ => value.ln(),
        }
    }

    fn from_unconstrained(&self, x: f64) -> f64 {
        match self {
            Self::Q1 => logistic(x),
            Self::Beta(_) | Self::MuRho1 | Self::MuKappa | Self::MuQ0 => x,
            _ => x.clamp(-60.0, 60.0).exp(),
        }
    }
}

/// One row of the optimization trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub loglik: f64,
    /// Values of the free parameters, in request order.
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateResult {
    pub params: PopulationParams,
    pub loglik: f64,
    pub trace: Vec<TraceRow>,
}

/// Maximizes the simulated log-likelihood over `free` by Nelder-Mead with
/// at most `budget` simplex iterations. An empty `free` list evaluates the
/// likelihood once at `init` and returns it.
pub fn maximize(
    observations: &[Observation],
    scenario: &ZoneScenario,
    init: &PopulationParams,
    free: &[FreeParam],
    budget: usize,
    cfg: &LikelihoodConfig,
) -> Result<EstimateResult, LikelihoodError> {
    for param in free {
        param.check(init)?;
    }
    let at = |x: &[f64]| -> PopulationParams {
        let mut pop = init.clone();
        for (param, xi) in free.iter().zip(x) {
            param.set(&mut pop, param.from_unconstrained(*xi));
        }
        pop
    };

    let init_ll = simulated_loglik(observations, scenario, init, cfg)?.loglik;
    if !init_ll.is_finite() {
        return Err(LikelihoodError::NonFinite {
            person: 0,
            detail: format!("log-likelihood {init_ll} at the initial point"),
        });
    }
    if free.is_empty() {
        return Ok(EstimateResult {
            params: init.clone(),
            loglik: init_ll,
            trace: vec![TraceRow {
                iteration: 0,
                loglik: init_ll,
                values: vec![],
            }],
        });
    }

    let x0: Vec<f64> = free
        .iter()
        .map(|p| p.to_unconstrained(p.get(init)))
        .collect();
    let mut objective = |x: &[f64]| -> f64 {
        let pop = at(x);
        simulated_loglik(observations, scenario, &pop, cfg)
            .map(|r| r.loglik)
            .unwrap_or(f64::NEG_INFINITY)
    };
    let nm = optim::maximize(
        &mut objective,
        &x0,
        &NmOptions {
            max_iters: budget,
            init_step: 0.15,
            ftol: 1e-10,
        },
    );

    let trace = nm
        .trace
        .iter()
        .enumerate()
        .map(|(i, step)| TraceRow {
            iteration: i + 1,
            loglik: step.value,
            values: free
                .iter()
                .zip(&step.x)
                .map(|(p, xi)| p.from_unconstrained(*xi))
                .collect(),
        })
        .collect();
    Ok(EstimateResult {
        params: at(&nm.x),
        loglik: nm.value,
        trace,
    })
}

/// Log-likelihood values over a two-parameter grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceResult {
    pub param1: String,
    pub param2: String,
    pub grid1: Vec<f64>,
    pub grid2: Vec<f64>,
    /// `values[i][j]` is the log-likelihood at `(grid1[i], grid2[j])`.
    pub values: Vec<Vec<f64>>,
    /// Indices of the maximizing cell.
    pub argmax: (usize, usize),
}

/// Evaluates the simulated log-likelihood on a grid over two parameters,
/// with common random numbers across cells.
pub fn loglik_surface(
    observations: &[Observation],
    scenario: &ZoneScenario,
    base: &PopulationParams,
    axis1: (FreeParam, Vec<f64>),
    axis2: (FreeParam, Vec<f64>),
    cfg: &LikelihoodConfig,
) -> Result<SurfaceResult, LikelihoodError> {
    let (p1, grid1) = axis1;
    let (p2, grid2) = axis2;
    p1.check(base)?;
    p2.check(base)?;
    let cells: Vec<(usize, usize)> = (0..grid1.len())
        .flat_map(|i| (0..grid2.len()).map(move |j| (i, j)))
        .collect();
    let evaluated = par::map_collect(cells, |(i, j)| {
        let mut pop = base.clone();
        p1.set(&mut pop, grid1[i]);
        p2.set(&mut pop, grid2[j]);
        simulated_loglik(observations, scenario, &pop, cfg).map(|r| (i, j, r.loglik))
    });

    let mut values = vec![vec![f64::NEG_INFINITY; grid2.len()]; grid1.len()];
    for cell in evaluated {
        let (i, j, ll) = cell?;
        values[i][j] = ll;
    }
    let mut argmax = (0, 0);
    for i in 0..grid1.len() {
        for j in 0..grid2.len() {
            if values[i][j] > values[argmax.0][argmax.1] {
                argmax = (i, j);
            }
        }
    }
    Ok(SurfaceResult {
        param1: p1.name(),
        param2: p2.name(),
        grid1,
        grid2,
        values,
        argmax,
    })
}

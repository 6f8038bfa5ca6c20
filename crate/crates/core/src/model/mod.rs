//! Domain types for the inventory model: horizon, parameters, scenario
//! inputs, activity patterns and solved trajectories.
//!
//! All types are immutable value objects after construction and every
//! operation on them is a pure function, so they can be shared freely
//! across threads.

mod production;
mod trajectory;

pub use production::{production, PIECEWISE_MIN_SLOPE};
pub(crate) use production::piecewise_unit;
pub(crate) use production::piecewise_unit_inverse as piecewise_inverse_hours;
pub use trajectory::{
    check_feasibility, evaluate_objective, reconstruct_anchored, reconstruct_min_anchored,
    reformed_objective, FeasibilityReport, Violation,
};

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// Planning horizon: a number of days plus the set of days treated as
/// weekend (higher consumption rate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Horizon {
    days: usize,
    weekend: Vec<bool>,
}

impl Horizon {
    /// Builds a horizon of `days` days. `weekend_days` holds 1-based day
    /// numbers, matching the day-of-week convention used everywhere in
    /// the public interfaces.
    pub fn new(
        days: usize,
        weekend_days: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        if days == 0 {
            return Err(ModelError::invalid("horizon", "must cover at least one day"));
        }
        let mut weekend = vec![false; days];
        for day in weekend_days {
            if day == 0 || day > days {
                return Err(ModelError::invalid(
                    "weekend_days",
                    format!("day {day} outside 1..={days}"),
                ));
            }
            weekend[day - 1] = true;
        }
        Ok(Self { days, weekend })
    }

    /// One week with weekend days 6 and 7.
    pub fn week() -> Self {
        Self::weeks(1)
    }

    /// `k` replicated weeks with weekend days 6 and 7 of each week.
    pub fn weeks(k: usize) -> Self {
        assert!(k >= 1, "horizon needs at least one week");
        let days = 7 * k;
        let weekend = (0..days).map(|t| t % 7 >= 5).collect();
        Self { days, weekend }
    }

    pub fn len(&self) -> usize {
        self.days
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Whether 0-based day index `t` is a weekend day.
    pub fn is_weekend(&self, t: usize) -> bool {
        self.weekend[t]
    }

    /// Number of whole weeks, at least 1 (a 3-day horizon counts as one).
    pub fn weeks_count(&self) -> usize {
        (self.days / 7).max(1)
    }
}

/// Shape of the activity production function.
///
/// `Linear` is the one-segment special case of `Piecewise`; both share the
/// multiplicative constant `exp(q0) * A^q2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ProductionSpec {
    CobbDouglas { q0: f64, q1: f64, q2: f64 },
    Linear { q0: f64, p1: f64, q2: f64 },
    Piecewise {
        q0: f64,
        q2: f64,
        /// Segment slopes, strictly decreasing and positive.
        slopes: Vec<f64>,
        /// Upper breakpoints of all but the last segment, strictly increasing.
        breaks: Vec<f64>,
    },
}

impl ProductionSpec {
    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            ProductionSpec::CobbDouglas { q1, .. } => {
                if !(*q1 > 0.0 && *q1 < 1.0) {
                    return Err(ModelError::invalid("q1", "must lie strictly in (0, 1)"));
                }
            }
            ProductionSpec::Linear { p1, .. } => {
                if *p1 <= 0.0 {
                    return Err(ModelError::invalid("p1", "must be positive"));
                }
            }
            ProductionSpec::Piecewise { slopes, breaks, .. } => {
                if slopes.is_empty() {
                    return Err(ModelError::invalid("slopes", "need at least one segment"));
                }
                if breaks.len() + 1 != slopes.len() {
                    return Err(ModelError::invalid(
                        "breaks",
                        format!("expected {} breakpoints for {} slopes", slopes.len() - 1, slopes.len()),
                    ));
                }
                let decreasing = slopes.windows(2).all(|w| w[0] > w[1]);
                if !decreasing || *slopes.last().unwrap() <= 0.0 {
                    return Err(ModelError::invalid(
                        "slopes",
                        "must be strictly decreasing and positive",
                    ));
                }
                let increasing = breaks.windows(2).all(|w| w[0] < w[1]);
                if !increasing || breaks.first().is_some_and(|b| *b <= 0.0) {
                    return Err(ModelError::invalid(
                        "breaks",
                        "must be strictly increasing and positive",
                    ));
                }
            }
        }
        Ok(())
    }

    /// The multiplicative constant `exp(q0) * A^q2` in front of the
    /// duration term.
    pub fn scale(&self, attractiveness: f64) -> f64 {
        let (q0, q2) = match self {
            ProductionSpec::CobbDouglas { q0, q2, .. } => (*q0, *q2),
            ProductionSpec::Linear { q0, q2, .. } => (*q0, *q2),
            ProductionSpec::Piecewise { q0, q2, .. } => (*q0, *q2),
        };
        (q0 + q2 * attractiveness.ln()).exp()
    }

    pub fn is_cobb_douglas(&self) -> bool {
        matches!(self, ProductionSpec::CobbDouglas { .. })
    }

    /// Unit-scale segment view: slopes plus upper breakpoints. `Linear`
    /// yields one unbounded segment; Cobb-Douglas yields none.
    pub(crate) fn segments(&self) -> Option<(&[f64], &[f64])> {
        match self {
            ProductionSpec::CobbDouglas { .. } => None,
            ProductionSpec::Linear { p1, .. } => Some((std::slice::from_ref(p1), &[])),
            ProductionSpec::Piecewise { slopes, breaks, .. } => Some((slopes, breaks)),
        }
    }
}

/// Behavioral parameters of one individual instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Weekday consumption rate; fixed to 1 in estimation contexts.
    pub lambda_weekday: f64,
    /// Weekend over weekday consumption ratio.
    pub gamma: f64,
    /// Value of time, money per hour.
    pub rho1: f64,
    /// Value of safety stock, money per consumption-day. Must exceed `rho3`
    /// or the objective is unbounded.
    pub rho2: f64,
    /// Value of inventory, money per consumption-day.
    pub rho3: f64,
    pub production: ProductionSpec,
}

impl ModelParams {
    pub fn new(
        lambda_weekday: f64,
        gamma: f64,
        rho1: f64,
        rho2: f64,
        rho3: f64,
        production: ProductionSpec,
    ) -> Result<Self, ModelError> {
        if !(lambda_weekday > 0.0) {
            return Err(ModelError::invalid("lambda_weekday", "must be positive"));
        }
        if !(gamma > 0.0) {
            return Err(ModelError::invalid("gamma", "must be positive"));
        }
        if !(rho1 > 0.0) {
            return Err(ModelError::invalid("rho1", "must be positive"));
        }
        if !(rho3 > 0.0) {
            return Err(ModelError::invalid("rho3", "must be positive"));
        }
        if !(rho2 > rho3) {
            return Err(ModelError::invalid(
                "rho2",
                format!("must exceed rho3 for boundedness (rho2 = {rho2}, rho3 = {rho3})"),
            ));
        }
        production.validate()?;
        Ok(Self {
            lambda_weekday,
            gamma,
            rho1,
            rho2,
            rho3,
            production,
        })
    }
}

/// Per-day consumption rates over the horizon.
pub fn consumption_vector(h: &Horizon, params: &ModelParams) -> Vec<f64> {
    (0..h.len())
        .map(|t| {
            if h.is_weekend(t) {
                params.gamma * params.lambda_weekday
            } else {
                params.lambda_weekday
            }
        })
        .collect()
}

/// Zones, their attributes and the individual's daily free time.
///
/// Matrices are indexed `[location][day]`; travel time and cost are
/// two-way (home to location and back).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioInputs {
    pub locations: Vec<String>,
    pub attractiveness: Vec<Vec<f64>>,
    pub travel_time: Vec<Vec<f64>>,
    pub travel_cost: Vec<Vec<f64>>,
    pub free_time: Vec<f64>,
    /// Size measures per location (e.g. retail employment, area), indexed
    /// `[location][measure]`. May be empty.
    pub size_measures: Vec<Vec<f64>>,
    pub measure_names: Vec<String>,
}

impl ScenarioInputs {
    pub fn n_locations(&self) -> usize {
        self.locations.len()
    }

    pub fn validate(&self, h: &Horizon) -> Result<(), ModelError> {
        let n = self.locations.len();
        let days = h.len();
        if n == 0 {
            return Err(ModelError::invalid("locations", "need at least one zone"));
        }
        for (what, matrix) in [
            ("attractiveness", &self.attractiveness),
            ("travel_time", &self.travel_time),
            ("travel_cost", &self.travel_cost),
        ] {
            if matrix.len() != n {
                return Err(ModelError::DimensionMismatch {
                    what,
                    expected: n,
                    got: matrix.len(),
                });
            }
            for row in matrix {
                if row.len() != days {
                    return Err(ModelError::DimensionMismatch {
                        what,
                        expected: days,
                        got: row.len(),
                    });
                }
            }
        }
        if self.free_time.len() != days {
            return Err(ModelError::DimensionMismatch {
                what: "free_time",
                expected: days,
                got: self.free_time.len(),
            });
        }
        if self.attractiveness.iter().flatten().any(|a| !(*a > 0.0)) {
            return Err(ModelError::invalid("attractiveness", "entries must be positive"));
        }
        if self.travel_time.iter().flatten().any(|x| *x < 0.0)
            || self.travel_cost.iter().flatten().any(|x| *x < 0.0)
        {
            return Err(ModelError::invalid("travel", "entries must be non-negative"));
        }
        if self.free_time.iter().any(|ft| !(*ft > 0.0)) {
            return Err(ModelError::invalid("free_time", "entries must be positive"));
        }
        if !self.size_measures.is_empty() {
            if self.size_measures.len() != n {
                return Err(ModelError::DimensionMismatch {
                    what: "size_measures",
                    expected: n,
                    got: self.size_measures.len(),
                });
            }
            let k = self.measure_names.len();
            for row in &self.size_measures {
                if row.len() != k {
                    return Err(ModelError::DimensionMismatch {
                        what: "size_measures row",
                        expected: k,
                        got: row.len(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Replicates day columns week by week, for the multi-week loop.
    /// Requires a 7-day base.
    pub fn replicate_weeks(&self, weeks: usize) -> ScenarioInputs {
        assert_eq!(self.free_time.len(), 7, "weekly replication needs a 7-day base");
        let rep = |row: &Vec<f64>| -> Vec<f64> {
            (0..7 * weeks).map(|t| row[t % 7]).collect()
        };
        ScenarioInputs {
            locations: self.locations.clone(),
            attractiveness: self.attractiveness.iter().map(&rep).collect(),
            travel_time: self.travel_time.iter().map(&rep).collect(),
            travel_cost: self.travel_cost.iter().map(&rep).collect(),
            free_time: rep(&self.free_time),
            size_measures: self.size_measures.clone(),
            measure_names: self.measure_names.clone(),
        }
    }
}

/// A multi-day activity pattern: participation, durations and locations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityPattern {
    pub delta: Vec<bool>,
    /// Activity duration in hours, zero on non-participation days.
    pub durations: Vec<f64>,
    /// Location index per day; ignored where `delta` is false.
    pub locations: Vec<usize>,
}

impl ActivityPattern {
    /// Validates the pattern as observed input: `delta` and `durations`
    /// must agree day by day and locations must exist.
    pub fn validate(&self, h: &Horizon, n_locations: usize) -> Result<(), ModelError> {
        for (what, len) in [
            ("delta", self.delta.len()),
            ("durations", self.durations.len()),
            ("locations", self.locations.len()),
        ] {
            if len != h.len() {
                return Err(ModelError::DimensionMismatch {
                    what,
                    expected: h.len(),
                    got: len,
                });
            }
        }
        for t in 0..h.len() {
            let active = self.delta[t];
            let d = self.durations[t];
            if d < 0.0 || (active && d <= 0.0) || (!active && d != 0.0) {
                return Err(ModelError::DurationMismatch { day: t + 1 });
            }
            if active && self.locations[t] >= n_locations {
                return Err(ModelError::invalid(
                    "locations",
                    format!("day {}: zone index {} out of range", t + 1, self.locations[t]),
                ));
            }
        }
        Ok(())
    }

    pub fn active_days(&self) -> impl Iterator<Item = usize> + '_ {
        self.delta.iter().enumerate().filter(|(_, d)| **d).map(|(t, _)| t)
    }

    pub fn participation_count(&self) -> usize {
        self.delta.iter().filter(|d| **d).count()
    }
}

/// Inventory path implied by a production plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InventoryTrajectory {
    /// Stock at the start of each day, before that day's replenishment.
    pub inventory: Vec<f64>,
    /// Production added at the start of each day.
    pub production: Vec<f64>,
    /// Minimum of `inventory`; zero at every optimum.
    pub safety_stock: f64,
}

/// Solution of the optimization: pattern, trajectory, per-day objective
/// value and the number of weeks in the horizon actually solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub pattern: ActivityPattern,
    pub trajectory: InventoryTrajectory,
    /// Utility in money per day.
    pub objective: f64,
    pub weeks: usize,
}

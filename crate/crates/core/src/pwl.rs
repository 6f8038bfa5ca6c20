//! Least-squares piecewise-linear approximation of the Cobb-Douglas
//! production curve.
//!
//! The fit runs at unit scale on `d^q1` over an equidistant duration grid;
//! the multiplicative constant `exp(q0) * A^q2` carries over unchanged, so
//! fitted slopes and breakpoints do not depend on `q0` or attractiveness.

use rand::Rng;

use crate::error::FitError;
use crate::model::ProductionSpec;
use crate::optim::{self, NmOptions};
use crate::par;
use crate::rng::{substream, Stream};

/// Grid and segment-count settings for the fit.
#[derive(Debug, Clone)]
pub struct PwlFitConfig {
    pub n_segments: usize,
    pub grid_lo: f64,
    pub grid_hi: f64,
    pub grid_points: usize,
    /// Random multi-starts beyond the deterministic ones.
    pub n_starts: usize,
    pub seed: u64,
}

impl Default for PwlFitConfig {
    fn default() -> Self {
        Self {
            n_segments: 3,
            grid_lo: 0.01,
            grid_hi: 8.0,
            grid_points: 800,
            n_starts: 16,
            seed: 0,
        }
    }
}

impl PwlFitConfig {
    fn validate(&self) -> Result<(), FitError> {
        if self.n_segments == 0 {
            return Err(FitError::Config("need at least one segment".into()));
        }
        if !(self.grid_lo > 0.0) || self.grid_hi <= self.grid_lo {
            return Err(FitError::Config("grid must satisfy 0 < lo < hi".into()));
        }
        if self.grid_points < 2 * self.n_segments {
            return Err(FitError::Config(format!(
                "{} grid points cannot support {} segments",
                self.grid_points, self.n_segments
            )));
        }
        Ok(())
    }
}

/// Result of a fit: the piecewise spec plus its squared error on the grid.
#[derive(Debug, Clone)]
pub struct PwlFit {
    pub spec: ProductionSpec,
    /// Sum of squared errors against `d^q1` at unit scale.
    pub sse: f64,
}

/// Fits a concave piecewise-linear approximation to a Cobb-Douglas target.
/// Slopes and breakpoints are optimized jointly by multi-start Nelder-Mead;
/// the parameterization keeps slopes strictly decreasing, so the output is
/// always concave.
pub fn fit_pwl(target: &ProductionSpec, cfg: &PwlFitConfig) -> Result<PwlFit, FitError> {
    let ProductionSpec::CobbDouglas { q0, q1, q2 } = *target else {
        return Err(FitError::NotCobbDouglas);
    };
    cfg.validate()?;

    let grid: Vec<f64> = (0..cfg.grid_points)
        .map(|i| {
            cfg.grid_lo + (cfg.grid_hi - cfg.grid_lo) * i as f64 / (cfg.grid_points - 1) as f64
        })
        .collect();
    let values: Vec<f64> = grid.iter().map(|d| d.powf(q1)).collect();

    let mut best = fit_segments(&grid, &values, 1, cfg, None);
    for n in 2..=cfg.n_segments {
        // Extend the previous solution with a last segment that only
        // engages beyond the grid, so the deeper fit starts from exactly
        // the shallow fit's error and can only improve.
        let mut slopes = best.0.clone();
        let mut breaks = best.1.clone();
        let tail = breaks.last().copied().unwrap_or(cfg.grid_lo);
        breaks.push((1.05 * cfg.grid_hi).max(tail * 1.01 + 1e-3));
        slopes.push(slopes.last().unwrap() * 0.999);
        let warm = encode(&slopes, &breaks, cfg);
        best = fit_segments(&grid, &values, n, cfg, Some(warm));
    }

    let (slopes, breaks, sse) = (best.0, best.1, best.2);
    Ok(PwlFit {
        spec: ProductionSpec::Piecewise { q0, q2, slopes, breaks },
        sse,
    })
}

/// Closed-form best single slope through the origin, the seed for all
/// deeper fits and an oracle in its own right.
pub fn best_single_slope(grid: &[f64], values: &[f64]) -> f64 {
    let num: f64 = grid.iter().zip(values).map(|(d, v)| d * v).sum();
    let den: f64 = grid.iter().map(|d| d * d).sum();
    num / den
}

fn fit_segments(
    grid: &[f64],
    values: &[f64],
    n: usize,
    cfg: &PwlFitConfig,
    warm: Option<Vec<f64>>,
) -> (Vec<f64>, Vec<f64>, f64) {
    if n == 1 {
        let p = best_single_slope(grid, values);
        let sse = sse_of(grid, values, &[p], &[]);
        return (vec![p], vec![], sse);
    }

    // Deterministic starts: even breakpoints with secant slopes, plus the
    // warm start extended from the (n-1)-segment solution.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    starts.push(encode(&secant_start(grid, values, n).0, &secant_start(grid, values, n).1, cfg));
    if let Some(warm) = warm {
        starts.push(warm);
    }
    let mut rng = substream(cfg.seed, Stream::Scenario, n as u64);
    let dim = 2 * n - 1;
    while starts.len() < cfg.n_starts {
        let base = starts[0].clone();
        let jittered: Vec<f64> = base
            .iter()
            .map(|x| x + rng.gen_range(-0.7..0.7))
            .collect();
        let _ = dim;
        starts.push(jittered);
    }

    let runs = par::map_collect(starts, |start| {
        let mut objective = |x: &[f64]| -> f64 {
            let (slopes, breaks) = decode(x, n, cfg);
            -sse_of(grid, values, &slopes, &breaks)
        };
        let result = optim::maximize(
            &mut objective,
            &start,
            &NmOptions {
                max_iters: 400 * n,
                init_step: 0.2,
                ftol: 1e-14,
            },
        );
        (result.value, result.x)
    });
    let best = runs
        .into_iter()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .expect("at least one start");
    let (slopes, breaks) = decode(&best.1, n, cfg);
    let sse = sse_of(grid, values, &slopes, &breaks);
    (slopes, breaks, sse)
}

/// Quick concave start: breakpoints at even quantiles, slopes from secants
/// (strictly decreasing by concavity of the target).
fn secant_start(grid: &[f64], values: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let lo = grid[0];
    let hi = grid[grid.len() - 1];
    let value_at = |d: f64| -> f64 {
        // The target is d^q1 sampled on the grid; interpolate.
        let idx = ((d - lo) / (hi - lo) * (grid.len() - 1) as f64).round() as usize;
        values[idx.min(grid.len() - 1)]
    };
    let knots: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let mut slopes = Vec::with_capacity(n);
    let mut prev_point = (0.0, 0.0);
    for i in 0..n {
        let d = knots[i + 1];
        let v = value_at(d);
        let slope = (v - prev_point.1) / (d - prev_point.0);
        slopes.push(slope.max(1e-6));
        prev_point = (d, v);
    }
    for i in 1..n {
        if slopes[i] >= slopes[i - 1] {
            slopes[i] = slopes[i - 1] * 0.9;
        }
    }
    let breaks = knots[1..n].to_vec();
    (slopes, breaks)
}

/// Unconstrained coordinates: `[ln p1, logit sigma_2.., ln b1, ln gaps..]`
/// where `p_i = p_1 * sigma_2 * ... * sigma_i` keeps slopes decreasing and
/// cumulative positive gaps keep breakpoints increasing.
fn encode(slopes: &[f64], breaks: &[f64], _cfg: &PwlFitConfig) -> Vec<f64> {
    let n = slopes.len();
    let mut x = Vec::with_capacity(2 * n - 1);
    x.push(slopes[0].ln());
    for i in 1..n {
        let ratio = (slopes[i] / slopes[i - 1]).clamp(1e-6, 1.0 - 1e-6);
        x.push(crate::math::logit(ratio));
    }
    if !breaks.is_empty() {
        x.push(breaks[0].ln());
        for i in 1..breaks.len() {
            x.push((breaks[i] - breaks[i - 1]).max(1e-9).ln());
        }
    }
    x
}

fn decode(x: &[f64], n: usize, _cfg: &PwlFitConfig) -> (Vec<f64>, Vec<f64>) {
    let mut slopes = Vec::with_capacity(n);
    slopes.push(x[0].clamp(-30.0, 30.0).exp());
    for i in 1..n {
        let sigma = crate::math::logistic(x[i]);
        slopes.push(slopes[i - 1] * sigma);
    }
    let mut breaks = Vec::with_capacity(n - 1);
    if n > 1 {
        breaks.push(x[n].clamp(-30.0, 30.0).exp());
        for i in 1..n - 1 {
            let gap = x[n + i].clamp(-30.0, 30.0).exp();
            breaks.push(breaks[i - 1] + gap);
        }
    }
    (slopes, breaks)
}

fn sse_of(grid: &[f64], values: &[f64], slopes: &[f64], breaks: &[f64]) -> f64 {
    grid.iter()
        .zip(values)
        .map(|(d, v)| {
            let fitted = crate::model::piecewise_unit(slopes, breaks, *d);
            (v - fitted) * (v - fitted)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn target() -> ProductionSpec {
        ProductionSpec::CobbDouglas { q0: -0.2, q1: 0.5, q2: 0.4 }
    }

    #[test]
    fn one_segment_reaches_the_closed_form_slope() {
        let cfg = PwlFitConfig { n_segments: 1, ..Default::default() };
        let fit = fit_pwl(&target(), &cfg).unwrap();
        let grid: Vec<f64> = (0..800).map(|i| 0.01 + (8.0 - 0.01) * i as f64 / 799.0).collect();
        let values: Vec<f64> = grid.iter().map(|d| d.powf(0.5)).collect();
        let expected = best_single_slope(&grid, &values);
        let ProductionSpec::Piecewise { slopes, .. } = &fit.spec else {
            panic!("expected piecewise spec");
        };
        assert_eq!(slopes.len(), 1);
        assert_relative_eq!(slopes[0], expected, max_relative = 1e-9);
    }

    #[test]
    fn three_segments_beat_one_segment() {
        let one = fit_pwl(&target(), &PwlFitConfig { n_segments: 1, ..Default::default() }).unwrap();
        let three = fit_pwl(&target(), &PwlFitConfig { n_segments: 3, ..Default::default() }).unwrap();
        assert!(three.sse < one.sse);
    }

    #[test]
    fn fit_error_is_monotone_in_segment_count() {
        let mut last = f64::INFINITY;
        for n in 1..=5 {
            let fit = fit_pwl(&target(), &PwlFitConfig { n_segments: n, ..Default::default() }).unwrap();
            assert!(
                fit.sse <= last + 1e-12,
                "sse went up at {n} segments: {} after {last}",
                fit.sse
            );
            last = fit.sse;
        }
    }

    #[test]
    fn fitted_spec_is_concave_and_scale_free() {
        let fit = fit_pwl(&target(), &PwlFitConfig::default()).unwrap();
        let ProductionSpec::Piecewise { slopes, breaks, q0, q2 } = &fit.spec else {
            panic!("expected piecewise spec");
        };
        assert!(slopes.windows(2).all(|w| w[0] > w[1]));
        assert!(breaks.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*q0, -0.2);
        assert_eq!(*q2, 0.4);
        fit.spec.validate().unwrap();

        // Same target with different q0 yields identical slopes: the fit
        // works at unit scale.
        let other = ProductionSpec::CobbDouglas { q0: 0.4, q1: 0.5, q2: 0.4 };
        let fit2 = fit_pwl(&other, &PwlFitConfig::default()).unwrap();
        let ProductionSpec::Piecewise { slopes: s2, .. } = &fit2.spec else {
            panic!();
        };
        for (a, b) in slopes.iter().zip(s2) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_targets_and_configs() {
        let lin = ProductionSpec::Linear { q0: 0.0, p1: 0.5, q2: 0.4 };
        assert_eq!(fit_pwl(&lin, &PwlFitConfig::default()).unwrap_err(), FitError::NotCobbDouglas);
        let bad = PwlFitConfig { n_segments: 500, ..Default::default() };
        assert!(matches!(fit_pwl(&target(), &bad), Err(FitError::Config(_))));
    }

    #[test]
    fn same_seed_reproduces_the_fit() {
        let a = fit_pwl(&target(), &PwlFitConfig::default()).unwrap();
        let b = fit_pwl(&target(), &PwlFitConfig::default()).unwrap();
        assert_eq!(a.spec, b.spec);
    }
}

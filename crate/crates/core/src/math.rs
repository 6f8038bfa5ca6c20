//! Small numeric helpers used throughout the crate.

/// Natural log of the standard normal density.
pub fn ln_normal_pdf(z: f64) -> f64 {
    const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    ln_normal_pdf(z).exp()
}

/// Log of the lognormal density with log-scale `ln_center` and shape `sigma`,
/// evaluated at `x > 0`. Returns `-inf` when the center is degenerate.
pub fn ln_lognormal_pdf(x: f64, ln_center: f64, sigma: f64) -> f64 {
    if !ln_center.is_finite() || x <= 0.0 || sigma <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = (x.ln() - ln_center) / sigma;
    ln_normal_pdf(z) - x.ln() - sigma.ln()
}

/// Numerically stable `ln(sum(exp(x_i)))`. Empty input and all `-inf`
/// both yield `-inf`.
pub fn logsumexp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Logistic function `1 / (1 + exp(-x))`.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Inverse of [`logistic`]; panics outside (0, 1).
pub fn logit(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "logit argument must lie in (0, 1)");
    (p / (1.0 - p)).ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn logsumexp_matches_naive_on_moderate_values() {
        let xs = [0.5f64, 2.0, -1.0];
        let naive = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert_relative_eq!(logsumexp(&xs), naive, max_relative = 1e-14);
    }

    #[test]
    fn logsumexp_handles_extremes() {
        assert_eq!(logsumexp(&[]), f64::NEG_INFINITY);
        assert_eq!(
            logsumexp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
        // Shift invariance at magnitudes that overflow exp directly.
        let shifted = logsumexp(&[1234.0, 1232.0]);
        assert_relative_eq!(shifted, 1234.0 + (1.0 + (-2.0f64).exp()).ln(), max_relative = 1e-15);
    }

    #[test]
    fn lognormal_density_peaks_at_center() {
        let d_star = 1.7;
        let sigma = 0.2;
        let at_center = ln_lognormal_pdf(d_star, d_star.ln(), sigma).exp();
        assert_relative_eq!(
            at_center,
            1.0 / (d_star * sigma * (2.0 * std::f64::consts::PI).sqrt()),
            max_relative = 1e-12
        );
    }

    #[test]
    fn logistic_logit_roundtrip() {
        for &x in &[-3.0, -0.2, 0.0, 1.5, 10.0] {
            assert_relative_eq!(logit(logistic(x)), x, epsilon = 1e-9);
        }
    }
}

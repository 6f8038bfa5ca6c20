//! Activity production functions.

use crate::error::ModelError;

use super::ProductionSpec;

/// Smallest slope accepted for a piecewise segment; keeps inverses finite.
pub const PIECEWISE_MIN_SLOPE: f64 = 1e-9;

/// Inventory produced by performing the activity for `d` hours at a
/// location with attractiveness `a`. Returns zero on non-participation
/// days (`participate = false` requires `d = 0`).
pub fn production(
    spec: &ProductionSpec,
    d: f64,
    a: f64,
    participate: bool,
) -> Result<f64, ModelError> {
    if d < 0.0 {
        return Err(ModelError::domain("production", "duration must be non-negative"));
    }
    if !(a > 0.0) {
        return Err(ModelError::domain("production", "attractiveness must be positive"));
    }
    if !participate {
        if d != 0.0 {
            return Err(ModelError::domain(
                "production",
                "non-participation day with positive duration",
            ));
        }
        return Ok(0.0);
    }
    Ok(produce_unchecked(spec, d, a))
}

/// Same as [`production`] for a participation day, without input checks.
/// Used on solver hot paths where inputs were validated up front.
pub(crate) fn produce_unchecked(spec: &ProductionSpec, d: f64, a: f64) -> f64 {
    match spec {
        ProductionSpec::CobbDouglas { q0, q1, q2 } => {
            if d == 0.0 {
                0.0
            } else {
                (q0 + q1 * d.ln() + q2 * a.ln()).exp()
            }
        }
        ProductionSpec::Linear { p1, .. } => spec.scale(a) * p1 * d,
        ProductionSpec::Piecewise { slopes, breaks, .. } => {
            spec.scale(a) * piecewise_unit(slopes, breaks, d)
        }
    }
}

/// Piecewise value at unit scale: sum of filled segment areas.
pub(crate) fn piecewise_unit(slopes: &[f64], breaks: &[f64], d: f64) -> f64 {
    let mut total = 0.0;
    let mut lower = 0.0;
    for (i, p) in slopes.iter().enumerate() {
        let upper = breaks.get(i).copied().unwrap_or(f64::INFINITY);
        if d <= upper {
            return total + p * (d - lower);
        }
        total += p * (upper - lower);
        lower = upper;
    }
    total
}

/// Hours needed to reach unit-scale production `q` (inverse of
/// [`piecewise_unit`]).
pub(crate) fn piecewise_unit_inverse(slopes: &[f64], breaks: &[f64], q: f64) -> f64 {
    let mut remaining = q;
    let mut hours = 0.0;
    let mut lower = 0.0;
    for (i, p) in slopes.iter().enumerate() {
        let upper = breaks.get(i).copied().unwrap_or(f64::INFINITY);
        let seg_capacity = p * (upper - lower);
        if remaining <= seg_capacity || i + 1 == slopes.len() {
            return hours + remaining / p.max(PIECEWISE_MIN_SLOPE);
        }
        remaining -= seg_capacity;
        hours += upper - lower;
        lower = upper;
    }
    hours
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn cd() -> ProductionSpec {
        ProductionSpec::CobbDouglas { q0: -0.2, q1: 0.5, q2: 0.4 }
    }

    #[test]
    fn cobb_douglas_at_unit_duration() {
        // exp(-0.2) * 100^0.4 evaluated independently.
        let expected = (-0.2f64).exp() * 100f64.powf(0.4);
        assert_relative_eq!(expected, 5.165_841_818_063_523, max_relative = 1e-12);
        let got = production(&cd(), 1.0, 100.0, true).unwrap();
        assert_relative_eq!(got, expected, max_relative = 1e-12);
    }

    #[test]
    fn non_participation_produces_nothing() {
        for spec in [
            cd(),
            ProductionSpec::Linear { q0: 0.3, p1: 0.8, q2: 0.5 },
        ] {
            assert_eq!(production(&spec, 0.0, 50.0, false).unwrap(), 0.0);
        }
    }

    #[test]
    fn piecewise_matches_reference_segments() {
        // Three segments with slopes (2, 0.5, 0.25) and breakpoints (0.3, 2):
        // at d = 1 the value is C * (0.5 * (1 - 0.3) + 2 * 0.3) = C * 0.95.
        let spec = ProductionSpec::Piecewise {
            q0: -0.2,
            q2: 0.4,
            slopes: vec![2.0, 0.5, 0.25],
            breaks: vec![0.3, 2.0],
        };
        let c = (-0.2f64).exp() * 100f64.powf(0.4);
        let got = production(&spec, 1.0, 100.0, true).unwrap();
        assert_relative_eq!(got, c * 0.95, max_relative = 1e-12);

        // Third segment engages past d = 2.
        let got = production(&spec, 3.0, 100.0, true).unwrap();
        assert_relative_eq!(
            got,
            c * (2.0 * 0.3 + 0.5 * 1.7 + 0.25 * 1.0),
            max_relative = 1e-12
        );
    }

    #[test]
    fn rejects_domain_violations() {
        assert!(production(&cd(), -0.1, 100.0, true).is_err());
        assert!(production(&cd(), 1.0, 0.0, true).is_err());
        assert!(production(&cd(), 0.5, 100.0, false).is_err());
    }

    #[test]
    fn single_segment_piecewise_equals_linear() {
        let lin = ProductionSpec::Linear { q0: 0.1, p1: 0.7, q2: 0.3 };
        let pw = ProductionSpec::Piecewise {
            q0: 0.1,
            q2: 0.3,
            slopes: vec![0.7],
            breaks: vec![],
        };
        for d in [0.0, 0.4, 1.9, 7.3] {
            let a = 80.0;
            assert_eq!(
                production(&lin, d, a, true).unwrap(),
                production(&pw, d, a, true).unwrap()
            );
        }
    }

    proptest! {
        // Concavity: midpoint value dominates the chord for both curved specs.
        #[test]
        fn production_is_concave_in_duration(
            d1 in 0.01f64..6.0,
            d2 in 0.01f64..6.0,
            q1 in 0.1f64..0.9,
        ) {
            let specs = [
                ProductionSpec::CobbDouglas { q0: -0.2, q1, q2: 0.4 },
                ProductionSpec::Piecewise {
                    q0: -0.2,
                    q2: 0.4,
                    slopes: vec![2.0, 0.5, 0.25],
                    breaks: vec![0.3, 2.0],
                },
            ];
            for spec in specs {
                let mid = production(&spec, 0.5 * (d1 + d2), 100.0, true).unwrap();
                let chord = 0.5 * production(&spec, d1, 100.0, true).unwrap()
                    + 0.5 * production(&spec, d2, 100.0, true).unwrap();
                prop_assert!(mid >= chord - 1e-9 * chord.abs().max(1.0));
            }
        }

        #[test]
        fn piecewise_inverse_roundtrips(d in 0.0f64..8.0) {
            let slopes = [2.0, 0.5, 0.25];
            let breaks = [0.3, 2.0];
            let q = piecewise_unit(&slopes, &breaks, d);
            let back = piecewise_unit_inverse(&slopes, &breaks, q);
            prop_assert!((back - d).abs() < 1e-9);
        }
    }
}

//! Guarded exponentials and Gaussian half-line probabilities.

/// Exponent below which a closed form is reported as underflowed.
pub const UNDERFLOW_EXPONENT: f64 = -700.0;

/// A closed-form value `exp(exponent)` that keeps its exponent, so callers
/// can compare values in log space when the linear value underflows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    pub exponent: f64,
    pub underflow: bool,
}

impl ClosedForm {
    pub fn exp(exponent: f64) -> Self {
        if exponent < UNDERFLOW_EXPONENT {
            Self {
                value: 0.0,
                exponent,
                underflow: true,
            }
        } else {
            Self {
                value: exponent.exp(),
                exponent,
                underflow: false,
            }
        }
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Probability mass of a normal distribution N(center, std²) on (threshold, +inf).
///
/// Uses `erfc` on both sides so that tiny tails keep full relative accuracy.
pub fn normal_mass_above(threshold: f64, center: f64, std: f64) -> f64 {
    0.5 * erfc((threshold - center) / (std * std::f64::consts::SQRT_2))
}

/// Probability mass of N(center, std²) on (-inf, threshold).
pub fn normal_mass_below(threshold: f64, center: f64, std: f64) -> f64 {
    0.5 * erfc((center - threshold) / (std * std::f64::consts::SQRT_2))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn underflow_is_flagged_and_zero() {
        let c = ClosedForm::exp(-701.0);
        assert!(c.underflow);
        assert_eq!(c.value, 0.0);
        let c = ClosedForm::exp(-699.0);
        assert!(!c.underflow);
        assert!(c.value > 0.0);
    }

    #[test]
    fn erf_reference_values() {
        // A&S table values
        assert!((erf(0.5) - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
        assert!((erfc(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-19);
    }

    #[test]
    fn half_masses_sum_to_one() {
        for &(t, c, s) in &[(0.0, 0.3, 1.0), (1.0, -2.0, 0.5), (-4.0, 4.0, 2.0)] {
            let sum = normal_mass_above(t, c, s) + normal_mass_below(t, c, s);
            assert!((sum - 1.0).abs() < 1e-15);
        }
        assert_eq!(normal_mass_above(0.0, 0.0, 1.0), 0.5);
    }
}

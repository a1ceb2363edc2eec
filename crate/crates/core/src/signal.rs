//! EPR-Bohm bookkeeping for the spin-flip signaling argument.
//!
//! Particle 2 passes the magnet, so the singlet becomes
//! `(ψ- |↑↓⟩ - ψ+ |↓↑⟩)/√2`. Flipping the spin of the particles 2 that went
//! up leaves `(ψ- |↑↓⟩ - ψ+ |↓↓⟩)/√2`, and the particle-2 spin no longer
//! separates the two terms: a particle-1 observable picks up a cross term
//! proportional to `⟨ψ-|ψ+⟩ A₁₂`.
//!
//! The literal expectation after the flip, `½(A₁₁ + A₂₂) + ⟨ψ-|ψ+⟩ A₁₂`,
//! is complex for a general overlap. It is kept as the primary
//! ("literal") value. The partial trace of the normalized state gives the
//! real value `½(A₁₁ + A₂₂) - Re(⟨ψ-|ψ+⟩ A₁₂)`, reported as `traced`. Both
//! are bounded in modulus by `|⟨ψ-|ψ+⟩| |A₁₂|`.

use crate::error::{Error, Result};
use crate::metrics::{self, Regime, INEQUALITY_SLACK};
use crate::packets::SGParams;
use num_complex::Complex64;

const HERMITIAN_TOL: f64 = 1e-14;

/// 2×2 observable on particle 1 in the `{|↑⟩, |↓⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinObservable {
    m: [[Complex64; 2]; 2],
}

impl SpinObservable {
    pub fn new(m: [[Complex64; 2]; 2]) -> Result<Self> {
        let mut deviation: f64 = 0.0;
        for (i, row) in m.iter().enumerate() {
            for (j, a) in row.iter().enumerate() {
                deviation = deviation.max((a - m[j][i].conj()).norm());
            }
        }
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitian { deviation });
        }
        Ok(Self { m })
    }

    /// `n̂·σ` for the normalized direction of `n`.
    pub fn from_direction(n: [f64; 3]) -> Self {
        let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let [x, y, z] = n.map(|c| c / len);
        Self {
            m: [
                [Complex64::new(z, 0.0), Complex64::new(x, -y)],
                [Complex64::new(x, y), Complex64::new(-z, 0.0)],
            ],
        }
    }

    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Self {
            m: [[one, zero], [zero, one]],
        }
    }

    pub fn sigma_x() -> Self {
        Self::from_direction([1.0, 0.0, 0.0])
    }

    pub fn sigma_y() -> Self {
        Self::from_direction([0.0, 1.0, 0.0])
    }

    pub fn sigma_z() -> Self {
        Self::from_direction([0.0, 0.0, 1.0])
    }

    pub fn matrix(&self) -> [[Complex64; 2]; 2] {
        self.m
    }

    /// `⟨↑|A|↓⟩`.
    pub fn off_diagonal(&self) -> Complex64 {
        self.m[0][1]
    }

    fn half_trace(&self) -> f64 {
        0.5 * (self.m[0][0].re + self.m[1][1].re)
    }
}

fn check_overlap(inner: Complex64) -> Result<()> {
    let modulus = inner.norm();
    if modulus.is_nan() || modulus > 1.0 + 1e-12 {
        return Err(Error::OverlapOutOfRange { modulus });
    }
    Ok(())
}

/// `⟨A⟩` on particle 1 without the spin flip: `½ Tr A`.
pub fn expectation_sg(a: &SpinObservable) -> f64 {
    a.half_trace()
}

/// Literal `⟨A⟩` after the flip, `½ Tr A + ⟨ψ-|ψ+⟩ A₁₂`.
pub fn expectation_sg_sf(a: &SpinObservable, inner: Complex64) -> Result<Complex64> {
    check_overlap(inner)?;
    Ok(a.half_trace() + inner * a.off_diagonal())
}

/// Partial-trace `⟨A⟩` after the flip, `½ Tr A - Re(⟨ψ-|ψ+⟩ A₁₂)`.
pub fn expectation_sg_sf_traced(a: &SpinObservable, inner: Complex64) -> Result<f64> {
    check_overlap(inner)?;
    Ok(a.half_trace() - (inner * a.off_diagonal()).re)
}

/// Change of a particle-1 expectation caused by the flip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalReport {
    pub expect_sg: f64,
    pub expect_sg_sf: Complex64,
    /// Literal `Δ = ⟨ψ-|ψ+⟩ A₁₂`.
    pub delta: Complex64,
    pub delta_abs: f64,
    /// Partial-trace change `-Re(⟨ψ-|ψ+⟩ A₁₂)`.
    pub delta_traced: f64,
    /// `|⟨ψ-|ψ+⟩| |A₁₂|`.
    pub delta_max_bound: f64,
    pub audit_ok: bool,
}

/// Signaling parameter for observable `a` and overlap `inner = ⟨ψ-|ψ+⟩`.
pub fn delta(a: &SpinObservable, inner: Complex64) -> Result<SignalReport> {
    let expect_sg = expectation_sg(a);
    let expect_sg_sf = expectation_sg_sf(a, inner)?;
    let delta = inner * a.off_diagonal();
    let delta_abs = delta.norm();
    let delta_max_bound = inner.norm() * a.off_diagonal().norm();
    Ok(SignalReport {
        expect_sg,
        expect_sg_sf,
        delta,
        delta_abs,
        delta_traced: -delta.re,
        delta_max_bound,
        audit_ok: delta_abs <= delta_max_bound + INEQUALITY_SLACK,
    })
}

/// Largest `|Δ|` over the given unit directions, with the maximizing direction.
pub fn max_delta_over_directions(
    inner: Complex64,
    directions: &[[f64; 3]],
) -> Result<Option<(f64, [f64; 3])>> {
    let mut best: Option<(f64, [f64; 3])> = None;
    for &n in directions {
        let d = delta(&SpinObservable::from_direction(n), inner)?.delta_abs;
        if best.is_none_or(|(b, _)| d > b) {
            best = Some((d, n));
        }
    }
    Ok(best)
}

/// No-signaling audit of one setup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuditReport {
    pub inner: f64,
    /// `⟨ψ-|ψ+⟩` at the audit time.
    pub overlap: Complex64,
    pub m_t: f64,
    pub m_s: f64,
    /// Largest attainable `|Δ|`, equal to `I`.
    pub delta_max: f64,
    pub regime: Regime,
    /// `M_s ≥ Δ_max`.
    pub verdict_ok: bool,
    /// Report for `A = σ_x`, which attains `Δ_max`.
    pub sigma_x: SignalReport,
}

/// Computes `I`, `M_s`, `Δ_max = I` and checks `M_s ≥ Δ_max`.
///
/// A forbidden verdict is returned as [`Error::Forbidden`].
pub fn signaling_audit(params: &SGParams, t1: f64, epsilon: f64) -> Result<AuditReport> {
    let check = metrics::check_constraint(params, epsilon)?.into_result()?;
    let overlap = metrics::inner_product_complex(params, t1)?.conj();
    let m_t = metrics::overlap_m_closed(params, t1)?.value;
    let delta_max = check.inner;
    Ok(AuditReport {
        inner: check.inner,
        overlap,
        m_t,
        m_s: check.saturated,
        delta_max,
        regime: check.regime,
        verdict_ok: check.saturated >= delta_max - INEQUALITY_SLACK,
        sigma_x: delta(&SpinObservable::sigma_x(), overlap)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn traceless_and_identity() {
        assert_eq!(expectation_sg(&SpinObservable::sigma_z()), 0.0);
        assert_eq!(expectation_sg(&SpinObservable::sigma_x()), 0.0);
        assert_eq!(expectation_sg(&SpinObservable::identity()), 1.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = [[c(1.0, 0.0), c(0.5, 0.0)], [c(0.2, 0.0), c(0.0, 0.0)]];
        assert!(matches!(
            SpinObservable::new(m),
            Err(Error::NonHermitian { .. })
        ));
        let m = [[c(1.0, 0.0), c(0.5, 0.3)], [c(0.5, -0.3), c(-2.0, 0.0)]];
        assert!(SpinObservable::new(m).is_ok());
    }

    #[test]
    fn zero_overlap_means_no_signal() {
        let a = SpinObservable::from_direction([0.3, -0.2, 0.9]);
        let e = expectation_sg_sf(&a, c(0.0, 0.0)).unwrap();
        assert_eq!(e, c(expectation_sg(&a), 0.0));
        assert_eq!(delta(&a, c(0.0, 0.0)).unwrap().delta_abs, 0.0);
    }

    #[test]
    fn diagonal_observable_ignores_overlap() {
        let a = SpinObservable::sigma_z();
        for inner in [c(0.3, 0.4), c(-0.9, 0.1)] {
            assert_eq!(delta(&a, inner).unwrap().delta, c(0.0, 0.0));
        }
    }

    #[test]
    fn sigma_x_attains_the_overlap() {
        let r = delta(&SpinObservable::sigma_x(), c(0.1, 0.0)).unwrap();
        assert!((r.delta_abs - 0.1).abs() < 1e-16);
        assert_eq!(
            expectation_sg_sf(&SpinObservable::sigma_x(), c(0.1, 0.0)).unwrap(),
            c(0.1, 0.0)
        );
        assert!(r.audit_ok);
    }

    #[test]
    fn overlap_above_one_is_rejected() {
        assert!(expectation_sg_sf(&SpinObservable::sigma_x(), c(1.0, 0.1)).is_err());
    }

    #[test]
    fn delta_depends_only_on_off_diagonal() {
        let inner = c(0.3, -0.2);
        let a = SpinObservable::new([[c(2.0, 0.0), c(0.4, 0.1)], [c(0.4, -0.1), c(-1.0, 0.0)]])
            .unwrap();
        let b = SpinObservable::new([[c(-7.0, 0.0), c(0.4, 0.1)], [c(0.4, -0.1), c(5.0, 0.0)]])
            .unwrap();
        assert_eq!(
            delta(&a, inner).unwrap().delta,
            delta(&b, inner).unwrap().delta
        );
    }

    #[test]
    fn audit_boundary_cases() {
        let free = SGParams::natural(1.0, 0.0, 1.0, 0.0);
        let r = signaling_audit(&free, 0.0, 1e-3).unwrap();
        assert_eq!((r.delta_max, r.m_s), (1.0, 1.0));
        assert!(r.verdict_ok);

        let p = SGParams::from_groups(2.0, 1.0, 1.0, 0.0).unwrap();
        let r = signaling_audit(&p, 0.0, 1e-3).unwrap();
        assert!((r.delta_max - (-2.5f64).exp()).abs() < 1e-15);
        assert!(r.delta_max < r.m_s && r.verdict_ok);
        assert!((r.sigma_x.delta_abs - r.delta_max).abs() < 1e-14);

        let ideal = SGParams::from_groups(10.0, 5.0, 1.0, 0.0).unwrap();
        let r = signaling_audit(&ideal, 0.0, 1e-3).unwrap();
        assert!(r.delta_max < 1e-10 && r.m_s < 1e-10);
        assert_eq!(r.regime, Regime::Ideal);
        assert!(r.verdict_ok);
    }
}

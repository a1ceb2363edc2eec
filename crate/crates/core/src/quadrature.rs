//! Uniform trapezoid quadrature with a halving convergence guard.
//!
//! The integrands here are Gaussians times bounded-wavenumber oscillations,
//! for which the trapezoid rule on a uniform grid converges geometrically.
//! Every integral is evaluated on `n` intervals and again on the `n/2`
//! intervals given by every other node; the difference is the convergence
//! estimate.

use crate::error::{invalid, Error, Result};
use num_complex::Complex64;

/// Quadrature window and resolution settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    /// Half-extent of the window beyond each packet center, in current widths.
    pub extent_widths: f64,
    /// Starting number of intervals per axis. Doubled automatically until the
    /// local wavenumber and width resolution rules hold.
    pub intervals: usize,
    pub max_intervals: usize,
    /// Largest accepted change between the full and the halved grid.
    pub convergence_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            extent_widths: 12.0,
            intervals: 2048,
            max_intervals: 1 << 22,
            convergence_tol: 1e-9,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if self.intervals < 64 {
            return Err(invalid("intervals", "need at least 64 nodes"));
        }
        if self.extent_widths.is_nan() || self.extent_widths < 6.0 {
            return Err(invalid(
                "extent_widths",
                "window must span at least 6 widths",
            ));
        }
        if self.max_intervals < self.intervals {
            return Err(invalid("max_intervals", "must be >= intervals"));
        }
        Ok(())
    }

    /// Interval count for a window of length `len` that keeps
    /// `step * max_wavenumber < 0.5` and `step <= min_width / 4`.
    pub fn intervals_for(&self, len: f64, max_wavenumber: f64, min_width: f64) -> usize {
        let mut n = self.intervals.next_power_of_two();
        while n < self.max_intervals {
            let h = len / n as f64;
            if h * max_wavenumber < 0.5 && h <= 0.25 * min_width {
                break;
            }
            n *= 2;
        }
        n
    }
}

/// Samples of a function on `lo + i*h`, `i = 0..=n`.
#[derive(Debug, Clone)]
pub struct UniformSamples<T> {
    pub lo: f64,
    pub step: f64,
    pub values: Vec<T>,
}

impl<T: Copy> UniformSamples<T> {
    pub fn sample(f: impl Fn(f64) -> T, lo: f64, hi: f64, intervals: usize) -> Self {
        let step = (hi - lo) / intervals as f64;
        let values = (0..=intervals).map(|i| f(lo + i as f64 * step)).collect();
        Self { lo, step, values }
    }
}

fn trapezoid_strided<T>(values: &[T], step: f64, stride: usize) -> T
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let n = values.len() - 1;
    let mut acc = T::default();
    let mut i = stride;
    while i < n {
        acc = acc + values[i];
        i += stride;
    }
    (acc + (values[0] + values[n]) * 0.5) * (step * stride as f64)
}

/// Trapezoid integral of samples, plus the halved-grid value.
pub fn trapezoid_pair<T>(samples: &UniformSamples<T>) -> (T, T)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
{
    let full = trapezoid_strided(&samples.values, samples.step, 1);
    let half = trapezoid_strided(&samples.values, samples.step, 2);
    (full, half)
}

pub fn integrate_complex(
    what: &'static str,
    f: impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    intervals: usize,
    tol: f64,
) -> Result<Complex64> {
    debug_assert!(intervals.is_multiple_of(2));
    let samples = UniformSamples::sample(f, lo, hi, intervals);
    let (full, half) = trapezoid_pair(&samples);
    let change = (full - half).norm();
    if change > tol || !change.is_finite() {
        return Err(Error::NonConvergence { what, change });
    }
    Ok(full)
}

pub fn integrate_real(
    what: &'static str,
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    intervals: usize,
    tol: f64,
) -> Result<f64> {
    debug_assert!(intervals.is_multiple_of(2));
    let samples = UniformSamples::sample(f, lo, hi, intervals);
    let (full, half) = trapezoid_pair(&samples);
    let change = (full - half).abs();
    if change > tol || !change.is_finite() {
        return Err(Error::NonConvergence { what, change });
    }
    Ok(full)
}

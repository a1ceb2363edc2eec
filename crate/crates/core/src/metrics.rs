//! Distinguishability and nonidealness metrics of the two spin branches.
//!
//! `I = |⟨ψ+|ψ-⟩|` and `M(t) = ∫|ψ+||ψ-|` are computed twice: from closed
//! forms in the dimensionless groups `P` and `K`, and by quadrature of the
//! factorized analytic components. `I ≤ M(t)` holds for any pair of
//! functions; a violation here can only come from a bug.

use crate::error::{invalid, Error, Result};
use crate::packets::{packet, AxisFactor, Branch, PacketFactors, PhaseConvention, SGParams};
use crate::quadrature::{
    integrate_complex, integrate_real, trapezoid_pair, QuadratureSpec, UniformSamples,
};
use crate::special::{normal_mass_above, normal_mass_below, ClosedForm};
use num_complex::Complex64;

/// Absolute slack applied to every `≥` comparison between metrics.
pub const INEQUALITY_SLACK: f64 = 1e-12;
/// Default threshold below which `I` or `M_s` counts as vanishing.
pub const DEFAULT_EPSILON: f64 = 1e-3;

/// `I = exp(-P²/8 - 2K²)`.
pub fn inner_product_closed(params: &SGParams) -> Result<ClosedForm> {
    let d = params.derive()?;
    Ok(ClosedForm::exp(-d.p * d.p / 8.0 - 2.0 * d.k * d.k))
}

/// `M(τ + t1) = exp(-v_z² (τ + 2 t1)² / 8 σ²_{τ+t1})` with the physical width.
pub fn overlap_m_closed(params: &SGParams, t1: f64) -> Result<ClosedForm> {
    check_t1(t1)?;
    let d = params.derive()?;
    let sigma = params.width_at(params.tau + t1).sigma;
    let sep = d.vz * (params.tau + 2.0 * t1);
    Ok(ClosedForm::exp(-sep * sep / (8.0 * sigma * sigma)))
}

/// Saturated overlap `M_s = exp(-2K²)`.
pub fn m_saturated(params: &SGParams) -> Result<ClosedForm> {
    let d = params.derive()?;
    Ok(ClosedForm::exp(-2.0 * d.k * d.k))
}

fn check_t1(t1: f64) -> Result<()> {
    if !(t1.is_finite() && t1 >= 0.0) {
        return Err(invalid("t1", format!("must be finite and >= 0, got {t1}")));
    }
    Ok(())
}

fn branch_pair(params: &SGParams, t1: f64) -> (PacketFactors, PacketFactors) {
    (
        packet(Branch::Plus, t1, params, PhaseConvention::Printed),
        packet(Branch::Minus, t1, params, PhaseConvention::Printed),
    )
}

/// Complex `⟨ψ+|ψ-⟩` at `τ + t1` from closed-form Gaussian overlaps per axis.
pub fn inner_product_complex(params: &SGParams, t1: f64) -> Result<Complex64> {
    check_t1(t1)?;
    params.validate()?;
    let (plus, minus) = branch_pair(params, t1);
    let spatial: Complex64 = plus
        .axes()
        .iter()
        .zip(minus.axes())
        .map(|(a, b)| a.overlap(b))
        .product();
    Ok(spatial * Complex64::from_polar(1.0, minus.phase - plus.phase))
}

struct AxisWindow {
    lo: f64,
    hi: f64,
    intervals: usize,
}

fn axis_window(
    a: &AxisFactor,
    b: &AxisFactor,
    spec: &QuadratureSpec,
    oscillating: bool,
) -> AxisWindow {
    let sigma = a.width.sigma.min(b.width.sigma);
    let reach = spec.extent_widths * a.width.sigma.max(b.width.sigma);
    let lo = a.center.min(b.center) - reach;
    let hi = a.center.max(b.center) + reach;
    let kmax = if oscillating {
        a.max_local_wavenumber(hi - lo) + b.max_local_wavenumber(hi - lo)
    } else {
        0.0
    };
    AxisWindow {
        lo,
        hi,
        intervals: spec.intervals_for(hi - lo, kmax, sigma),
    }
}

/// `⟨ψ+|ψ-⟩` at `τ + t1` by trapezoid quadrature of each axis factor.
pub fn inner_product_numeric(
    params: &SGParams,
    t1: f64,
    spec: &QuadratureSpec,
) -> Result<Complex64> {
    check_t1(t1)?;
    params.validate()?;
    spec.validate()?;
    let (plus, minus) = branch_pair(params, t1);
    let mut total = Complex64::from_polar(1.0, minus.phase - plus.phase);
    for (a, b) in plus.axes().into_iter().zip(minus.axes()) {
        let w = axis_window(a, b, spec, true);
        total *= integrate_complex(
            "inner product",
            |u| a.value(u).conj() * b.value(u),
            w.lo,
            w.hi,
            w.intervals,
            spec.convergence_tol,
        )?;
    }
    Ok(total)
}

/// `M(τ + t1) = ∫|ψ+||ψ-| d³x` by trapezoid quadrature of each axis factor.
pub fn overlap_m_numeric(params: &SGParams, t1: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_t1(t1)?;
    params.validate()?;
    spec.validate()?;
    let (plus, minus) = branch_pair(params, t1);
    let mut total = 1.0;
    for (a, b) in plus.axes().into_iter().zip(minus.axes()) {
        let w = axis_window(a, b, spec, false);
        total *= integrate_real(
            "position overlap",
            |u| (a.density(u) * b.density(u)).sqrt(),
            w.lo,
            w.hi,
            w.intervals,
            spec.convergence_tol,
        )?;
    }
    Ok(total)
}

/// Result of a saturation-time search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Saturation {
    /// `M` is already within tolerance of `M_s` at the magnet exit.
    AlreadySaturated,
    /// Post-exit time `t1` from which `M` stays within tolerance.
    At(f64),
}

impl Saturation {
    pub fn time(self) -> f64 {
        match self {
            Saturation::AlreadySaturated => 0.0,
            Saturation::At(t) => t,
        }
    }
}

/// Relative deviation `|M(t1)/M_s - 1|`, evaluated in log space.
pub fn saturation_deviation(params: &SGParams, t1: f64) -> Result<f64> {
    let m = overlap_m_closed(params, t1)?;
    let ms = m_saturated(params)?;
    Ok((m.exponent - ms.exponent).exp_m1().abs())
}

const OCTAVES: i32 = 48;
const SAMPLES_PER_OCTAVE: i32 = 8;

fn saturated_from(params: &SGParams, t1: f64, rel_tol: f64) -> Result<bool> {
    if saturation_deviation(params, t1)? > rel_tol {
        return Ok(false);
    }
    let base = t1.max(f64::MIN_POSITIVE);
    for j in 1..=(OCTAVES * SAMPLES_PER_OCTAVE) {
        let t = base * (j as f64 / SAMPLES_PER_OCTAVE as f64).exp2();
        if saturation_deviation(params, t)? > rel_tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Smallest post-exit time from which `|M(t1) - M_s| ≤ rel_tol · M_s` holds
/// at all larger sampled times.
///
/// Doubling from `10⁻³ t_spread` brackets the time, then bisection narrows
/// the bracket to `10⁻³ t_spread`. The returned time is the bracket's upper
/// end, so the tolerance always holds there.
pub fn saturation_time(params: &SGParams, rel_tol: f64) -> Result<Saturation> {
    if !(rel_tol > 0.0 && rel_tol < 0.1) {
        return Err(invalid("rel_tol", "must lie in (0, 0.1)"));
    }
    let d = params.derive()?;
    let resolution = 1e-3 * d.t_spread;
    if d.k == 0.0
        || (saturated_from(params, 0.0, rel_tol)? && saturated_from(params, resolution, rel_tol)?)
    {
        return Ok(Saturation::AlreadySaturated);
    }
    let mut lo = 0.0;
    let mut hi = resolution;
    let mut doublings = 0;
    while !saturated_from(params, hi, rel_tol)? {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 1100 {
            return Err(Error::NonConvergence {
                what: "saturation time bracket",
                change: hi,
            });
        }
    }
    while hi - lo > resolution {
        let mid = 0.5 * (lo + hi);
        if saturated_from(params, mid, rel_tol)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Saturation::At(hi))
}

/// Half-plane probabilities of the spin branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfPlaneProbs {
    /// `∫_{y>0, z<0} |ψ+|²`, equal by mirror symmetry to `∫_{y>0, z>0} |ψ-|²`.
    pub alpha2: f64,
    /// `∫_{y>0, z>0} |ψ+|²`, equal by mirror symmetry to `∫_{y>0, z<0} |ψ-|²`.
    pub beta2: f64,
    /// `∫_{y>0} |ψ+|²`, the sum `alpha2 + beta2`.
    pub upper_mass: f64,
}

/// `|α|²` and `|β|²` at `τ + t1` from error functions of the live centers and widths.
pub fn half_plane_probs(params: &SGParams, t1: f64) -> Result<HalfPlaneProbs> {
    check_t1(t1)?;
    params.validate()?;
    let (plus, minus) = branch_pair(params, t1);
    let sigma = plus.z.width.sigma;
    let y_upper = normal_mass_above(0.0, plus.y.center, sigma);
    let alpha2 = y_upper * normal_mass_below(0.0, plus.z.center, sigma);
    let beta2 = y_upper * normal_mass_above(0.0, plus.z.center, sigma);

    let minus_upper = normal_mass_above(0.0, minus.y.center, sigma);
    let alpha2_minus = minus_upper * normal_mass_above(0.0, minus.z.center, sigma);
    let beta2_minus = minus_upper * normal_mass_below(0.0, minus.z.center, sigma);
    debug_assert!((alpha2 - alpha2_minus).abs() <= 1e-15 && (beta2 - beta2_minus).abs() <= 1e-15);

    Ok(HalfPlaneProbs {
        alpha2,
        beta2,
        upper_mass: alpha2 + beta2,
    })
}

/// Classification of a setup by its `I` and `M_s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Regime {
    /// `I < ε` and `M_s < ε`.
    Ideal,
    /// `I < ε ≤ M_s`: branches orthogonal but still overlapping in space.
    Orthogonal,
    /// `I ≥ ε` and `M_s ≥ ε`.
    GeneralNonideal,
    /// `I > M_s`: would allow signaling. Never produced by correct code.
    Forbidden,
}

impl Regime {
    pub fn classify(inner: f64, saturated: f64, epsilon: f64) -> Self {
        if inner > saturated + INEQUALITY_SLACK {
            Regime::Forbidden
        } else if inner < epsilon && saturated < epsilon {
            Regime::Ideal
        } else if inner >= epsilon && saturated >= epsilon {
            Regime::GeneralNonideal
        } else {
            Regime::Orthogonal
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Ideal => "ideal",
            Regime::Orthogonal => "orthogonal",
            Regime::GeneralNonideal => "general_nonideal",
            Regime::Forbidden => "forbidden",
        }
    }
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCheck {
    pub constraint_ok: bool,
    pub regime: Regime,
    pub inner: f64,
    pub saturated: f64,
}

impl ConstraintCheck {
    /// Turns a forbidden verdict into an error.
    pub fn into_result(self) -> Result<Self> {
        if self.regime == Regime::Forbidden {
            Err(Error::Forbidden {
                inner: self.inner,
                saturated: self.saturated,
            })
        } else {
            Ok(self)
        }
    }
}

/// Checks `M_s ≥ I` with the closed forms and classifies the setup.
pub fn check_constraint(params: &SGParams, epsilon: f64) -> Result<ConstraintCheck> {
    let inner = inner_product_closed(params)?.value;
    let saturated = m_saturated(params)?.value;
    Ok(ConstraintCheck {
        constraint_ok: saturated >= inner - INEQUALITY_SLACK,
        regime: Regime::classify(inner, saturated, epsilon),
        inner,
        saturated,
    })
}

/// Outcome of the modulus inequality `∫|f||g| ≥ |∫ f* g|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// Evaluates both sides of `∫|f||g| ≥ |∫ f* g|` on `window`.
pub fn cauchy_schwarz_property(
    f: impl Fn(f64) -> Complex64,
    g: impl Fn(f64) -> Complex64,
    window: (f64, f64),
    spec: &QuadratureSpec,
) -> Result<SchwarzCheck> {
    spec.validate()?;
    let n = spec.intervals.next_power_of_two();
    let samples = UniformSamples::sample(|u| (f(u), g(u)), window.0, window.1, n);
    let modulus = UniformSamples {
        lo: samples.lo,
        step: samples.step,
        values: samples
            .values
            .iter()
            .map(|(a, b)| a.norm() * b.norm())
            .collect(),
    };
    let product = UniformSamples {
        lo: samples.lo,
        step: samples.step,
        values: samples.values.iter().map(|(a, b)| a.conj() * b).collect(),
    };
    let (lhs, lhs_half) = trapezoid_pair(&modulus);
    let (rhs_c, rhs_half) = trapezoid_pair(&product);
    let change = (lhs - lhs_half).abs().max((rhs_c - rhs_half).norm());
    if change > spec.convergence_tol {
        return Err(Error::NonConvergence {
            what: "modulus inequality",
            change,
        });
    }
    let rhs = rhs_c.norm();
    Ok(SchwarzCheck {
        lhs,
        rhs,
        ok: lhs >= rhs - 1e-10,
    })
}

/// All metrics of one parameter point at one post-exit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub t1: f64,
    pub inner: f64,
    pub inner_complex: Complex64,
    pub m_t: f64,
    pub m_s: f64,
    pub alpha2: f64,
    pub beta2: f64,
    pub saturation: Saturation,
    pub regime: Regime,
    pub constraint_ok: bool,
    /// Any closed-form exponent fell below the underflow threshold.
    pub underflow: bool,
}

/// Relative tolerance used for `t_s` in metric records.
pub const SATURATION_REL_TOL: f64 = 1e-3;

/// Closed-form metrics plus error-function half-plane probabilities.
pub fn metrics_record(params: &SGParams, t1: f64, epsilon: f64) -> Result<MetricsRecord> {
    let inner = inner_product_closed(params)?;
    let m_t = overlap_m_closed(params, t1)?;
    let m_s = m_saturated(params)?;
    let probs = half_plane_probs(params, t1)?;
    let check = check_constraint(params, epsilon)?;
    Ok(MetricsRecord {
        t1,
        inner: inner.value,
        inner_complex: inner_product_complex(params, t1)?,
        m_t: m_t.value,
        m_s: m_s.value,
        alpha2: probs.alpha2,
        beta2: probs.beta2,
        saturation: saturation_time(params, SATURATION_REL_TOL)?,
        regime: check.regime,
        constraint_ok: check.constraint_ok,
        underflow: inner.underflow || m_t.underflow || m_s.underflow,
    })
}

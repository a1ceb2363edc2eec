//! Exact Gaussian spinor components of the Stern-Gerlach problem.
//!
//! Inside the magnet the two spin components obey decoupled Schrödinger
//! equations with linear potentials, so each stays a Gaussian whose envelope
//! is a freely spreading packet displaced by `±v_z t²/2τ`. After the exit at
//! `t = τ` both components move freely with transverse velocity `±v_z`.
//! Every component factors into one-dimensional Gaussians along x, y and z,
//! which is what the quadratures in [`crate::metrics`] exploit.

mod params;

pub use params::{DerivedParams, SGParams, HBAR, NEUTRON_MASS, NEUTRON_MOMENT};

use num_complex::Complex64;
use std::f64::consts::PI;

/// Spin component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Spin up, deflected toward +z.
    Plus,
    /// Spin down, deflected toward -z.
    Minus,
}

impl Branch {
    pub fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn other(self) -> Self {
        match self {
            Branch::Plus => Branch::Minus,
            Branch::Minus => Branch::Plus,
        }
    }
}

/// Which constant phase `Δ±` the component carries.
///
/// The constant does not enter any modulus-based metric. `Printed` keeps
/// the reference form
/// `Δ± = ±μB0τ/ħ + m²v_z²τ²/(6ħ²)` unchanged. `Exact` is the
/// constant of the true solution of the decoupled equations with the
/// spin-up component pushed toward +z, `Δ± = ∓μB0τ/ħ + m v_z² τ/(6ħ)`;
/// only comparisons against a numerical solver need it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    #[default]
    Printed,
    Exact,
}

/// Complex width `s_t` and physical width `σ_t = |s_t|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexWidth {
    pub s: Complex64,
    pub sigma: f64,
}

impl ComplexWidth {
    /// `s = σ0 (1 + i t/t_spread)`.
    pub fn new(sigma0: f64, reduced_time: f64) -> Self {
        let s = Complex64::new(sigma0, sigma0 * reduced_time);
        Self {
            s,
            sigma: sigma0 * reduced_time.hypot(1.0),
        }
    }
}

/// One-dimensional Gaussian factor
/// `(2π s²)^(-1/4) exp(-(u - center)² / (4 σ0 s) + i k (u - phase_origin))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisFactor {
    pub center: f64,
    pub wavenumber: f64,
    pub phase_origin: f64,
    pub sigma0: f64,
    pub width: ComplexWidth,
}

impl AxisFactor {
    fn norm_factor(&self) -> Complex64 {
        (2.0 * PI * self.width.s * self.width.s).powf(-0.25)
    }

    /// Coefficient `a` of `-a (u - c)²` in the exponent.
    fn curvature(&self) -> Complex64 {
        1.0 / (4.0 * self.sigma0 * self.width.s)
    }

    pub fn value(&self, u: f64) -> Complex64 {
        let d = u - self.center;
        let exponent =
            -self.curvature() * d * d + Complex64::i() * self.wavenumber * (u - self.phase_origin);
        self.norm_factor() * exponent.exp()
    }

    /// Modulus squared, a normal density with mean `center` and std `σ_t`.
    pub fn density(&self, u: f64) -> f64 {
        let sigma = self.width.sigma;
        let d = (u - self.center) / sigma;
        (-0.5 * d * d).exp() / (sigma * (2.0 * PI).sqrt())
    }

    /// Closed-form `∫ conj(self(u)) other(u) du` by completing the square.
    pub fn overlap(&self, other: &AxisFactor) -> Complex64 {
        let af = self.curvature().conj();
        let ag = other.curvature();
        let i = Complex64::i();
        let a = af + ag;
        let b = 2.0 * af * self.center
            + 2.0 * ag * other.center
            + i * (other.wavenumber - self.wavenumber);
        let c = -af * self.center * self.center - ag * other.center * other.center
            + i * (self.wavenumber * self.phase_origin - other.wavenumber * other.phase_origin);
        let gauss = (Complex64::from(PI) / a).sqrt() * (b * b / (4.0 * a) + c).exp();
        self.norm_factor().conj() * other.norm_factor() * gauss
    }

    /// Largest local wavenumber of the factor within `half_window` of its center.
    pub fn max_local_wavenumber(&self, half_window: f64) -> f64 {
        // Chirp from Im of the curvature term grows linearly off center.
        let chirp = 2.0 * self.curvature().im.abs();
        self.wavenumber.abs() + chirp * half_window
    }
}

/// A spinor component written as a product of axis factors and a constant phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketFactors {
    pub x: AxisFactor,
    pub y: AxisFactor,
    pub z: AxisFactor,
    /// Constant phase `-Δ±` in radians.
    pub phase: f64,
}

impl PacketFactors {
    pub fn value(&self, pos: [f64; 3]) -> Complex64 {
        self.x.value(pos[0])
            * self.y.value(pos[1])
            * self.z.value(pos[2])
            * Complex64::from_polar(1.0, self.phase)
    }

    pub fn axes(&self) -> [&AxisFactor; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// Constant phase `Δ±` of the chosen branch.
pub fn phase_constant(branch: Branch, params: &SGParams, convention: PhaseConvention) -> f64 {
    let vz = params.moment * params.gradient_b * params.tau / params.mass;
    let zeeman = params.moment * params.b0 * params.tau / params.hbar;
    match convention {
        PhaseConvention::Printed => {
            let m_vz_tau = params.mass * vz * params.tau;
            branch.sign() * zeeman + m_vz_tau * m_vz_tau / (6.0 * params.hbar * params.hbar)
        }
        PhaseConvention::Exact => {
            -branch.sign() * zeeman + params.mass * vz * vz * params.tau / (6.0 * params.hbar)
        }
    }
}

/// Factorized component `ψ±` at `t = τ + t1`.
///
/// The y phase of the Minus branch is taken as `k_y (y - v_y(τ+t1)/2)` for
/// both branches; the reference Minus formula has `v_z` in that slot, which
/// is inconsistent with the Plus branch and with free motion along y.
pub fn packet(
    branch: Branch,
    t1: f64,
    params: &SGParams,
    convention: PhaseConvention,
) -> PacketFactors {
    let t = params.tau + t1;
    let width = params.width_at(t);
    let sigma0 = params.sigma0;
    let vz = params.moment * params.gradient_b * params.tau / params.mass;
    let kz = params.mass * vz / params.hbar;
    let ky = params.mass * params.vy / params.hbar;
    let sign = branch.sign();
    PacketFactors {
        x: AxisFactor {
            center: 0.0,
            wavenumber: 0.0,
            phase_origin: 0.0,
            sigma0,
            width,
        },
        y: AxisFactor {
            center: params.vy * t,
            wavenumber: ky,
            phase_origin: params.vy * t / 2.0,
            sigma0,
            width,
        },
        z: AxisFactor {
            center: sign * (vz * params.tau / 2.0 + vz * t1),
            wavenumber: sign * kz,
            phase_origin: sign * vz * t1 / 2.0,
            sigma0,
            width,
        },
        phase: -phase_constant(branch, params, convention),
    }
}

/// Entry-time packet `(2πσ0²)^(-3/4) exp(-x²/4σ0² + i k_y y)`.
pub fn initial_packet(pos: [f64; 3], params: &SGParams) -> Complex64 {
    let s0 = params.sigma0;
    let r2 = pos[0] * pos[0] + pos[1] * pos[1] + pos[2] * pos[2];
    let ky = params.mass * params.vy / params.hbar;
    let exponent = Complex64::new(-r2 / (4.0 * s0 * s0), ky * pos[1]);
    (2.0 * PI * s0 * s0).powf(-0.75) * exponent.exp()
}

/// `ψ±(x; τ)` as the components leave the magnet.
pub fn psi_at_exit(pos: [f64; 3], branch: Branch, params: &SGParams) -> Complex64 {
    packet(branch, 0.0, params, PhaseConvention::Printed).value(pos)
}

/// `ψ±(x; τ + t1)` during free flight after the magnet.
pub fn psi_free(pos: [f64; 3], t1: f64, branch: Branch, params: &SGParams) -> Complex64 {
    packet(branch, t1, params, PhaseConvention::Printed).value(pos)
}

/// Mean momentum `(0, m v_y, ±μbτ)` of a branch.
pub fn peak_momentum(branch: Branch, params: &SGParams) -> [f64; 3] {
    [
        0.0,
        params.mass * params.vy,
        branch.sign() * params.moment * params.gradient_b * params.tau,
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SGParams {
        SGParams::from_groups(2.0, 1.0, 5.0, 3.0).unwrap()
    }

    fn trapezoid(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
        let h = (hi - lo) / n as f64;
        let inner: f64 = (1..n).map(|i| f(lo + i as f64 * h)).sum();
        h * (inner + 0.5 * (f(lo) + f(hi)))
    }

    #[test]
    fn initial_packet_peak_and_profile() {
        let p = SGParams::neutron(1.0, 10.0, 1e-3, 3e-6, 100.0);
        let peak = initial_packet([0.0; 3], &p).norm();
        let expected = (2.0 * PI * p.sigma0 * p.sigma0).powf(-0.75);
        assert!((peak - expected).abs() <= 1e-14 * expected);
        let off = initial_packet([p.sigma0, 0.0, 0.0], &p).norm();
        assert!((off / peak - (-0.25f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn exit_peak_value() {
        let p = sample();
        let d = p.derive().unwrap();
        let w = p.width_at(p.tau);
        let peak = psi_at_exit([0.0, p.vy * p.tau, d.vz * p.tau / 2.0], Branch::Plus, &p).norm();
        // |(2π s²)^(-3/4)| = (2π σ_τ²)^(-3/4)
        let expected = (2.0 * PI * w.sigma * w.sigma).powf(-0.75);
        assert!((peak - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn free_flight_starts_at_exit() {
        let p = sample();
        for pos in [[0.1, 6.2, 0.9], [-1.0, 5.0, -2.0], [0.0, 0.0, 0.0]] {
            for br in [Branch::Plus, Branch::Minus] {
                let a = psi_at_exit(pos, br, &p);
                let b = psi_free(pos, 0.0, br, &p);
                assert!((a - b).norm() <= 1e-12 * a.norm());
            }
        }
    }

    #[test]
    fn branches_mirror_in_z() {
        let p = sample();
        for t1 in [0.0, 0.7, 5.0] {
            for pos in [[0.3, 6.0, 1.2], [-0.4, 2.0, -0.3]] {
                let a = psi_free(pos, t1, Branch::Plus, &p).norm();
                let b = psi_free([pos[0], pos[1], -pos[2]], t1, Branch::Minus, &p).norm();
                assert!((a - b).abs() <= 1e-13 * a.max(1e-300));
            }
        }
    }

    #[test]
    fn no_gradient_means_equal_moduli() {
        let p = SGParams::natural(2.0, 0.0, 1.5, 1.0);
        for pos in [[0.2, 1.0, 0.5], [1.0, -1.0, -2.0]] {
            let a = psi_at_exit(pos, Branch::Plus, &p).norm();
            let b = psi_at_exit(pos, Branch::Minus, &p).norm();
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn z_center_separation_grows_as_vz_tau_plus_two_t1() {
        let p = sample();
        let d = p.derive().unwrap();
        for t1 in [0.0, 1.0, 10.0] {
            let plus = packet(Branch::Plus, t1, &p, PhaseConvention::Printed);
            let minus = packet(Branch::Minus, t1, &p, PhaseConvention::Printed);
            let sep = plus.z.center - minus.z.center;
            let expected = d.vz * (p.tau + 2.0 * t1);
            assert!((sep - expected).abs() < 1e-13 * expected);
        }
    }

    #[test]
    fn width_grows_monotonically_toward_asymptote() {
        let p = SGParams::natural(0.0, 0.0, 0.0, 0.0);
        let ts = p.spread_time();
        let mut last = 0.0;
        for i in 0..200 {
            let w = p.width_at(i as f64 * 0.1 * ts);
            assert!(w.sigma >= last);
            last = w.sigma;
        }
        assert_eq!(p.width_at(0.0).s, Complex64::new(p.sigma0, 0.0));
        let t = 100.0 * ts;
        let asym = p.hbar * t / (2.0 * p.mass * p.sigma0);
        assert!((p.width_at(t).sigma - asym).abs() / asym < 1e-3);
    }

    #[test]
    fn axis_factors_are_normalized() {
        let p = sample();
        for t1 in [0.0, 3.0] {
            let f = packet(Branch::Minus, t1, &p, PhaseConvention::Printed);
            for axis in f.axes() {
                let s = axis.width.sigma;
                let n = trapezoid(
                    |u| axis.value(u).norm_sqr(),
                    axis.center - 14.0 * s,
                    axis.center + 14.0 * s,
                    4000,
                );
                assert!((n - 1.0).abs() < 1e-12, "norm {n}");
                assert!(
                    (axis.value(axis.center + 0.3).norm_sqr() - axis.density(axis.center + 0.3))
                        .abs()
                        < 1e-14
                );
            }
        }
    }

    #[test]
    fn closed_overlap_matches_trapezoid() {
        let p = sample();
        let plus = packet(Branch::Plus, 0.4, &p, PhaseConvention::Printed);
        let minus = packet(Branch::Minus, 0.4, &p, PhaseConvention::Printed);
        let closed = plus.z.overlap(&minus.z);
        let n = 8000;
        let (lo, hi) = (-20.0, 20.0);
        let h = (hi - lo) / n as f64;
        let sum: Complex64 = (0..=n)
            .map(|i| {
                let u = lo + i as f64 * h;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                plus.z.value(u).conj() * minus.z.value(u) * w
            })
            .sum();
        assert!((closed - sum * h).norm() < 1e-13);
    }

    #[test]
    fn exact_phase_differs_from_printed_only_by_a_constant() {
        let p = sample();
        let a = packet(Branch::Plus, 0.0, &p, PhaseConvention::Printed);
        let b = packet(Branch::Plus, 0.0, &p, PhaseConvention::Exact);
        let r1 = a.value([0.1, 5.9, 0.8]) / b.value([0.1, 5.9, 0.8]);
        let r2 = a.value([-0.5, 6.3, 1.7]) / b.value([-0.5, 6.3, 1.7]);
        assert!((r1 - r2).norm() < 1e-12);
        assert!((r1.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn momentum_of_branches() {
        let p = SGParams::natural(1.0, 0.0, 2.0, 3.0);
        assert_eq!(peak_momentum(Branch::Plus, &p), [0.0, 3.0, 0.0]);
        assert_eq!(peak_momentum(Branch::Minus, &p), [0.0, 3.0, 0.0]);
        let p = sample();
        let d = p.derive().unwrap();
        let speed = |br| {
            let q = peak_momentum(br, &p);
            (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt() / p.mass
        };
        let expected = p.vy.hypot(d.vz);
        assert!((speed(Branch::Plus) - expected).abs() < 1e-14 * expected);
        assert_eq!(speed(Branch::Plus), speed(Branch::Minus));
    }
}

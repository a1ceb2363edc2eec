//! Split-step Fourier integration of the two-component Pauli equation.
//!
//! The y axis carries no potential and separates exactly, so the solver
//! evolves `ψ±(x, z)` on a periodic 2D grid and keeps the free y factor
//! analytic. Internally everything runs in natural units
//! (`ħ = m = σ0 = 1`); [`NaturalUnits`] converts at the boundary.
//!
//! Each Strang step is half a kinetic step (spectral), a full potential
//! step (pointwise), and another half kinetic step. The coupled potential
//! `-μ σ·B` with `B = (-b x, 0, B0 + b z)` is exponentiated exactly with
//! `exp(-iθ n̂·σ) = cos θ - i sin θ n̂·σ`. The moment enters with a negative
//! sign so that spin up is pushed toward +z, matching the analytic branches.

mod fft;
pub mod snapshot;
pub mod validation;

use crate::error::{Error, Result};
use crate::packets::{packet, Branch, PhaseConvention, SGParams};
use crate::special::normal_mass_above;
use fft::{wavenumbers, Fft2};
use num_complex::Complex64;
use rayon::prelude::*;

/// Largest norm change tolerated in one step.
pub const STEP_NORM_LIMIT: f64 = 1e-8;
/// Largest packet mass allowed within the boundary margin.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-12;
/// Boundary margin in initial widths.
pub const BOUNDARY_MARGIN: f64 = 6.0;

/// Conversion between SI and natural units of a parameter set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NaturalUnits {
    pub length: f64,
    pub time: f64,
    pub energy: f64,
    pub momentum: f64,
}

impl NaturalUnits {
    pub fn of(params: &SGParams) -> Self {
        let length = params.sigma0;
        let time = params.mass * length * length / params.hbar;
        Self {
            length,
            time,
            energy: params.hbar / time,
            momentum: params.hbar / length,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Full `σ·B` coupling including the transverse `-b x` component.
    Coupled,
    /// Only the `σ_z (B0 + b z)` part; components evolve independently.
    Decoupled,
}

/// Magnet field `B = (-b x, 0, B0 + b z)`; divergence-free for any `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldModel {
    pub b0: f64,
    pub gradient_b: f64,
    pub mode: Mode,
}

impl FieldModel {
    pub fn of(params: &SGParams, mode: Mode) -> Self {
        Self {
            b0: params.b0,
            gradient_b: params.gradient_b,
            mode,
        }
    }

    pub fn free() -> Self {
        Self {
            b0: 0.0,
            gradient_b: 0.0,
            mode: Mode::Decoupled,
        }
    }

    pub fn at(&self, x: f64, z: f64) -> [f64; 3] {
        [-self.gradient_b * x, 0.0, self.b0 + self.gradient_b * z]
    }
}

/// Grid geometry in SI units. Nodes sit at `-half + i·(2 half / n)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub nz: usize,
    pub half_x: f64,
    pub half_z: f64,
    pub dt: f64,
}

/// Predicted packet geometry over a run, in natural units.
struct Envelope {
    center_z: f64,
    sigma: f64,
    kz: f64,
}

fn envelope(params: &SGParams, field: &FieldModel, duration: f64) -> Envelope {
    let u = NaturalUnits::of(params);
    let t = duration / u.time;
    let force = params.moment * field.gradient_b * u.length / u.energy;
    Envelope {
        center_z: 0.5 * force * t * t,
        sigma: (1.0 + 0.25 * t * t).sqrt(),
        kz: force * t,
    }
}

// two-sided tail of a unit normal beyond this many std is below 1e-12
const TAIL_STDS: f64 = 7.2;

impl GridSpec {
    /// Default grid for running `duration` seconds in `field`: `n × n` nodes,
    /// `dt = 10⁻³ t_spread`, half-extents of at least `16 σ0` grown until
    /// the packet stays clear of the boundary margin.
    pub fn auto(params: &SGParams, field: &FieldModel, duration: f64, n: usize) -> Result<Self> {
        params.validate()?;
        let env = envelope(params, field, duration);
        let base = TAIL_STDS * env.sigma + BOUNDARY_MARGIN;
        let half_x = base.max(16.0) * params.sigma0;
        let half_z = (env.center_z + base).max(16.0) * params.sigma0;
        let grid = Self {
            nx: n,
            nz: n,
            half_x,
            half_z,
            dt: 1e-3 * params.derive()?.t_spread,
        };
        grid.check(params, field, duration)?;
        Ok(grid)
    }

    pub fn with_dt(self, dt: f64) -> Self {
        Self { dt, ..self }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_x / self.nx as f64
    }

    pub fn dz(&self) -> f64 {
        2.0 * self.half_z / self.nz as f64
    }

    /// Checks resolution, time step and boundary clearance for a run.
    ///
    /// The energy scale bounding `dt` is the one the packet actually
    /// samples (its mean plus eight momentum widths, and the potential over
    /// its support), not the grid Nyquist energy: the kinetic propagator is
    /// exact for every grid mode.
    pub fn check(&self, params: &SGParams, field: &FieldModel, duration: f64) -> Result<()> {
        for (name, n) in [("nx", self.nx), ("nz", self.nz)] {
            if n < 16 || !n.is_power_of_two() {
                return Err(Error::Grid(format!(
                    "{name} = {n} must be a power of two >= 16"
                )));
            }
        }
        if !(self.half_x > 0.0 && self.half_z > 0.0 && self.dt > 0.0) {
            return Err(Error::Grid("extents and dt must be positive".into()));
        }
        let u = NaturalUnits::of(params);
        let env = envelope(params, field, duration);
        let k_spread = 0.5;
        let kmax = env.kz.abs().max(k_spread);
        let (dx, dz) = (self.dx() / u.length, self.dz() / u.length);
        if dx * kmax >= 0.5 || dz * kmax >= 0.5 {
            return Err(Error::Grid(format!(
                "spatial step {:.3e}/{:.3e} too coarse for wavenumber {kmax:.3e}",
                dx, dz
            )));
        }
        let reach_z = env.center_z + 8.0 * env.sigma;
        let reach_x = 8.0 * env.sigma;
        let zeeman = params.moment * field.b0 / u.energy;
        let force = params.moment * field.gradient_b * u.length / u.energy;
        let potential = match field.mode {
            Mode::Decoupled => zeeman + force * reach_z,
            Mode::Coupled => (zeeman + force * reach_z).hypot(force * reach_x),
        };
        let kinetic = 0.5 * (env.kz.abs() + 8.0 * k_spread).powi(2);
        let scale = (self.dt / u.time) * (kinetic + potential);
        if scale >= 0.5 {
            return Err(Error::Grid(format!(
                "dt·E_max/ħ = {scale:.3} must stay below 0.5"
            )));
        }
        let margin_x = self.half_x / u.length - BOUNDARY_MARGIN;
        let margin_z = self.half_z / u.length - BOUNDARY_MARGIN;
        let mass_x = 2.0 * normal_mass_above(margin_x, 0.0, env.sigma);
        let mass_z = normal_mass_above(margin_z, env.center_z, env.sigma)
            + normal_mass_above(margin_z, -env.center_z, env.sigma);
        if mass_x.max(mass_z) >= BOUNDARY_MASS_LIMIT {
            return Err(Error::Grid(format!(
                "packet mass {:.3e} reaches the boundary margin; enlarge the box",
                mass_x.max(mass_z)
            )));
        }
        Ok(())
    }
}

/// Two-component field on the grid, in natural units.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorField {
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
    pub nx: usize,
    pub nz: usize,
    /// Node spacings in natural units.
    pub dx: f64,
    pub dz: f64,
    /// Elapsed time in seconds.
    pub t: f64,
    /// Beam speed of the analytic y factor.
    pub vy: f64,
    units: NaturalUnits,
    params: SGParams,
}

impl SpinorField {
    fn cell(&self) -> f64 {
        self.dx * self.dz
    }

    pub fn component_norms(&self) -> (f64, f64) {
        let n = |v: &[Complex64]| v.iter().map(|c| c.norm_sqr()).sum::<f64>() * self.cell();
        (n(&self.plus), n(&self.minus))
    }

    pub fn norm(&self) -> f64 {
        let (a, b) = self.component_norms();
        a + b
    }

    /// `x`, `z` coordinates (SI) of node `(ix, iz)`.
    pub fn position(&self, ix: usize, iz: usize) -> (f64, f64) {
        let x = (ix as f64 - (self.nx / 2) as f64) * self.dx;
        let z = (iz as f64 - (self.nz / 2) as f64) * self.dz;
        (x * self.units.length, z * self.units.length)
    }

    /// Free y factor of the full 3D spinor at the current time.
    pub fn y_factor(&self, y: f64) -> Complex64 {
        let p = SGParams {
            vy: self.vy,
            tau: self.t,
            ..self.params
        };
        packet(Branch::Plus, 0.0, &p, PhaseConvention::Printed)
            .y
            .value(y)
    }

    /// L2 distance `‖self - other‖` over both components.
    pub fn l2_distance(&self, other: &SpinorField) -> f64 {
        let d = |a: &[Complex64], b: &[Complex64]| {
            a.iter()
                .zip(b)
                .map(|(u, v)| (u - v).norm_sqr())
                .sum::<f64>()
        };
        ((d(&self.plus, &other.plus) + d(&self.minus, &other.minus)) * self.cell()).sqrt()
    }

    pub fn units(&self) -> NaturalUnits {
        self.units
    }
}

/// Grid diagnostics of one snapshot. Lengths and momenta in SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observables {
    pub t: f64,
    pub norm_plus: f64,
    pub norm_minus: f64,
    pub mean_z: [f64; 2],
    pub mean_pz: [f64; 2],
    /// `⟨σ_x⟩` and `⟨σ_z⟩` of the full spinor.
    pub sigma_x: f64,
    pub sigma_z: f64,
    /// `|⟨ψ+|ψ-⟩|` of the normalized components.
    pub inner: f64,
    /// `∫|ψ+||ψ-|` of the normalized components.
    pub overlap: f64,
}

enum Potential {
    Diagonal {
        plus: Vec<Complex64>,
        minus: Vec<Complex64>,
    },
    Coupled {
        cos: Vec<f64>,
        sin_x: Vec<f64>,
        sin_z: Vec<f64>,
    },
}

/// Solver instance; owns transforms, propagators and scratch space.
pub struct PauliSolver {
    grid: GridSpec,
    params: SGParams,
    units: NaturalUnits,
    fft: Fft2,
    half_kinetic: Vec<Complex64>,
    full_kinetic: Vec<Complex64>,
    kz: Vec<f64>,
    potential: Potential,
    spectrum: Vec<Complex64>,
}

impl PauliSolver {
    /// Builds a solver for `grid`. `duration` is the longest run planned and
    /// is used only for the grid checks.
    pub fn new(grid: GridSpec, params: SGParams, field: FieldModel, duration: f64) -> Result<Self> {
        params.validate()?;
        grid.check(&params, &field, duration)?;
        let units = NaturalUnits::of(&params);
        let (nx, nz) = (grid.nx, grid.nz);
        let dx = grid.dx() / units.length;
        let dz = grid.dz() / units.length;
        let dt = grid.dt / units.time;
        let kx = wavenumbers(nx, dx);
        let kz = wavenumbers(nz, dz);
        let norm = 1.0 / (nx * nz) as f64;
        let kinetic = |fraction: f64| -> Vec<Complex64> {
            let mut out = Vec::with_capacity(nx * nz);
            for kzv in &kz {
                for kxv in &kx {
                    let e = 0.5 * (kxv * kxv + kzv * kzv);
                    out.push(Complex64::from_polar(norm, -e * dt * fraction));
                }
            }
            out
        };
        let zeeman = params.moment * field.b0 / units.energy;
        let force = params.moment * field.gradient_b * units.length / units.energy;
        let coords = |i: usize| {
            let (ix, iz) = (i / nz, i % nz);
            (
                (ix as f64 - (nx / 2) as f64) * dx,
                (iz as f64 - (nz / 2) as f64) * dz,
            )
        };
        let potential = match field.mode {
            Mode::Decoupled => {
                let plus: Vec<Complex64> = (0..nx * nz)
                    .map(|i| {
                        let (_, z) = coords(i);
                        Complex64::from_polar(1.0, (zeeman + force * z) * dt)
                    })
                    .collect();
                let minus = plus.iter().map(|c| c.conj()).collect();
                Potential::Diagonal { plus, minus }
            }
            Mode::Coupled => {
                let mut cos = Vec::with_capacity(nx * nz);
                let mut sin_x = Vec::with_capacity(nx * nz);
                let mut sin_z = Vec::with_capacity(nx * nz);
                for i in 0..nx * nz {
                    let (x, z) = coords(i);
                    // H = h·σ with h = (F x, 0, -(Z + F z))
                    let hx = force * x;
                    let hz = -(zeeman + force * z);
                    let len = hx.hypot(hz);
                    let theta = len * dt;
                    cos.push(theta.cos());
                    if len > 0.0 {
                        sin_x.push(theta.sin() * hx / len);
                        sin_z.push(theta.sin() * hz / len);
                    } else {
                        sin_x.push(0.0);
                        sin_z.push(0.0);
                    }
                }
                Potential::Coupled { cos, sin_x, sin_z }
            }
        };
        Ok(Self {
            grid,
            params,
            units,
            fft: Fft2::new(nx, nz),
            half_kinetic: kinetic(0.5),
            full_kinetic: kinetic(1.0),
            kz,
            potential,
            spectrum: vec![Complex64::default(); nx * nz],
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn units(&self) -> NaturalUnits {
        self.units
    }

    fn empty_field(&self) -> SpinorField {
        let n = self.grid.nx * self.grid.nz;
        SpinorField {
            plus: vec![Complex64::default(); n],
            minus: vec![Complex64::default(); n],
            nx: self.grid.nx,
            nz: self.grid.nz,
            dx: self.grid.dx() / self.units.length,
            dz: self.grid.dz() / self.units.length,
            t: 0.0,
            vy: self.params.vy,
            units: self.units,
            params: self.params,
        }
    }

    /// Entry-time state `(c_up ψ0, c_dn ψ0)` restricted to the (x, z) plane.
    pub fn init_state(&self, spin: (Complex64, Complex64)) -> Result<SpinorField> {
        let total = spin.0.norm_sqr() + spin.1.norm_sqr();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParams {
                field: "spin",
                reason: format!("|c_up|² + |c_dn|² = {total}, expected 1"),
            });
        }
        let mut state = self.empty_field();
        let amp = (2.0 * std::f64::consts::PI).powf(-0.5);
        for ix in 0..state.nx {
            for iz in 0..state.nz {
                let x = (ix as f64 - (state.nx / 2) as f64) * state.dx;
                let z = (iz as f64 - (state.nz / 2) as f64) * state.dz;
                let psi0 = amp * (-(x * x + z * z) / 4.0).exp();
                let i = ix * state.nz + iz;
                state.plus[i] = spin.0 * psi0;
                state.minus[i] = spin.1 * psi0;
            }
        }
        Ok(state)
    }

    /// Analytic decoupled solution on the grid `t1` after a magnet of
    /// transit time `params.tau`, with the y factor divided out.
    pub fn analytic_state(
        &self,
        params: &SGParams,
        t1: f64,
        spin: (Complex64, Complex64),
        convention: PhaseConvention,
    ) -> SpinorField {
        let mut state = self.empty_field();
        let scale = self.units.length;
        let plus = packet(Branch::Plus, t1, params, convention);
        let minus = packet(Branch::Minus, t1, params, convention);
        for ix in 0..state.nx {
            for iz in 0..state.nz {
                let (x, z) = state.position(ix, iz);
                let i = ix * state.nz + iz;
                let slice = |f: &crate::packets::PacketFactors| {
                    f.x.value(x) * f.z.value(z) * Complex64::from_polar(scale, f.phase)
                };
                state.plus[i] = spin.0 * slice(&plus);
                state.minus[i] = spin.1 * slice(&minus);
            }
        }
        state.t = params.tau + t1;
        state
    }

    fn kinetic(&mut self, state: &mut SpinorField, full: bool) {
        let mult = if full {
            &self.full_kinetic
        } else {
            &self.half_kinetic
        };
        for comp in [&mut state.plus, &mut state.minus] {
            self.fft.forward(comp, &mut self.spectrum);
            self.spectrum
                .par_iter_mut()
                .zip(mult.par_iter())
                .for_each(|(s, m)| *s *= m);
            self.fft.inverse(&mut self.spectrum, comp);
        }
    }

    fn apply_potential(&self, state: &mut SpinorField) {
        match &self.potential {
            Potential::Diagonal { plus, minus } => {
                state
                    .plus
                    .par_iter_mut()
                    .zip(plus.par_iter())
                    .for_each(|(p, m)| *p *= m);
                state
                    .minus
                    .par_iter_mut()
                    .zip(minus.par_iter())
                    .for_each(|(p, m)| *p *= m);
            }
            Potential::Coupled { cos, sin_x, sin_z } => {
                let i = Complex64::i();
                state
                    .plus
                    .par_iter_mut()
                    .zip(state.minus.par_iter_mut())
                    .zip(cos.par_iter().zip(sin_x.par_iter().zip(sin_z.par_iter())))
                    .for_each(|((p, m), (c, (sx, sz)))| {
                        let (up, dn) = (*p, *m);
                        *p = c * up - i * (sz * up + sx * dn);
                        *m = c * dn - i * (sx * up - sz * dn);
                    });
            }
        }
    }

    fn checked_norm(&self, state: &SpinorField, before: f64) -> Result<f64> {
        let now = state.norm();
        let drift = (now - before).abs();
        if drift.is_nan() || drift > STEP_NORM_LIMIT {
            return Err(Error::NormDrift {
                drift,
                t: state.t,
                limit: STEP_NORM_LIMIT,
            });
        }
        Ok(now)
    }

    /// One Strang step: half kinetic, full potential, half kinetic.
    pub fn step(&mut self, state: &mut SpinorField) -> Result<()> {
        let before = state.norm();
        self.kinetic(state, false);
        self.apply_potential(state);
        self.kinetic(state, false);
        state.t += self.grid.dt;
        self.checked_norm(state, before)?;
        Ok(())
    }

    fn step_count(&self, duration: f64) -> Result<usize> {
        let n = (duration / self.grid.dt).round();
        if n.is_nan() || n < 0.0 || (n * self.grid.dt - duration).abs() > 1e-6 * self.grid.dt {
            return Err(Error::Grid(format!(
                "duration {duration:e} is not a multiple of dt = {:e}",
                self.grid.dt
            )));
        }
        Ok(n as usize)
    }

    /// Advances `duration` seconds, an integer number of steps. Adjacent
    /// half kinetic steps are merged into full ones.
    pub fn evolve(&mut self, state: &mut SpinorField, duration: f64) -> Result<()> {
        let n = self.step_count(duration)?;
        self.evolve_steps(state, n)
    }

    fn evolve_steps(&mut self, state: &mut SpinorField, n: usize) -> Result<()> {
        if n == 0 {
            return Ok(());
        }
        let mut norm = state.norm();
        self.kinetic(state, false);
        for i in 0..n {
            self.apply_potential(state);
            state.t += self.grid.dt;
            norm = self.checked_norm(state, norm)?;
            self.kinetic(state, i + 1 < n);
        }
        Ok(())
    }

    /// Like [`PauliSolver::evolve`], recording observables before the first
    /// step and after every `every` steps.
    pub fn evolve_recording(
        &mut self,
        state: &mut SpinorField,
        duration: f64,
        every: usize,
    ) -> Result<Vec<Observables>> {
        let n = self.step_count(duration)?;
        let every = every.max(1);
        let mut out = vec![self.observables(state)];
        let mut done = 0;
        while done < n {
            let chunk = every.min(n - done);
            self.evolve_steps(state, chunk)?;
            done += chunk;
            out.push(self.observables(state));
        }
        Ok(out)
    }

    /// Norms, means, spin components and the grid `I` and `M`.
    pub fn observables(&mut self, state: &SpinorField) -> Observables {
        let cell = state.cell();
        let (norm_plus, norm_minus) = state.component_norms();
        let nz = state.nz;
        let mean_z = |v: &[Complex64], n: f64| -> f64 {
            if n == 0.0 {
                return 0.0;
            }
            let s: f64 = v
                .iter()
                .enumerate()
                .map(|(i, c)| c.norm_sqr() * (((i % nz) as f64) - (nz / 2) as f64) * state.dz)
                .sum();
            s * cell / n * self.units.length
        };
        let mut mean_pz = [0.0; 2];
        for (slot, comp) in mean_pz.iter_mut().zip([&state.plus, &state.minus]) {
            let mut work = comp.clone();
            self.fft.forward(&mut work, &mut self.spectrum);
            let nx = state.nx;
            let (mut num, mut den) = (0.0, 0.0);
            for (j, s) in self.spectrum.iter().enumerate() {
                let w = s.norm_sqr();
                num += w * self.kz[j / nx];
                den += w;
            }
            *slot = if den > 0.0 {
                num / den * self.units.momentum
            } else {
                0.0
            };
        }
        let cross: Complex64 = state
            .plus
            .iter()
            .zip(&state.minus)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * cell;
        let modulus: f64 = state
            .plus
            .iter()
            .zip(&state.minus)
            .map(|(a, b)| a.norm() * b.norm())
            .sum::<f64>()
            * cell;
        let scale = (norm_plus * norm_minus).sqrt();
        let (inner, overlap) = if scale > 0.0 {
            (cross.norm() / scale, modulus / scale)
        } else {
            (0.0, 0.0)
        };
        Observables {
            t: state.t,
            norm_plus,
            norm_minus,
            mean_z: [
                mean_z(&state.plus, norm_plus),
                mean_z(&state.minus, norm_minus),
            ],
            mean_pz,
            sigma_x: 2.0 * cross.re,
            sigma_z: norm_plus - norm_minus,
            inner,
            overlap,
        }
    }
}

/// `(1/√2, 1/√2)`, spin polarized along +x.
pub fn x_polarized() -> (Complex64, Complex64) {
    let a = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    (a, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup(mode: Mode, n: usize) -> (SGParams, PauliSolver) {
        let params = SGParams::from_groups(2.0, 1.0, 20.0, 0.0).unwrap();
        let field = FieldModel::of(&params, mode);
        let grid = GridSpec::auto(&params, &field, params.tau, n).unwrap();
        let solver = PauliSolver::new(grid, params, field, params.tau).unwrap();
        (params, solver)
    }

    #[test]
    fn init_state_spin_cases() {
        let (_, solver) = setup(Mode::Decoupled, 128);
        let up = solver
            .init_state((Complex64::new(1.0, 0.0), Complex64::default()))
            .unwrap();
        assert!(up.minus.iter().all(|c| *c == Complex64::default()));
        assert!((up.norm() - 1.0).abs() < 1e-12);
        let x = solver.init_state(x_polarized()).unwrap();
        let (a, b) = x.component_norms();
        assert!((a - 0.5).abs() < 1e-12 && (b - 0.5).abs() < 1e-12);
        assert!(solver
            .init_state((Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)))
            .is_err());
    }

    #[test]
    fn coarse_grid_is_rejected() {
        let params = SGParams::from_groups(2.0, 1.0, 0.0, 0.0).unwrap();
        let field = FieldModel::of(&params, Mode::Decoupled);
        let grid = GridSpec {
            nx: 16,
            nz: 16,
            half_x: 16.0,
            half_z: 16.0,
            dt: 0.002,
        };
        assert!(matches!(
            grid.check(&params, &field, params.tau),
            Err(Error::Grid(_))
        ));
        let grid = GridSpec {
            nx: 256,
            nz: 256,
            half_x: 8.0,
            half_z: 8.0,
            dt: 0.002,
        };
        assert!(matches!(
            grid.check(&params, &field, params.tau),
            Err(Error::Grid(_))
        ));
        let grid = GridSpec {
            nx: 256,
            nz: 256,
            half_x: 20.0,
            half_z: 20.0,
            dt: 0.5,
        };
        assert!(matches!(
            grid.check(&params, &field, params.tau),
            Err(Error::Grid(_))
        ));
        let grid = GridSpec { nx: 100, ..grid };
        assert!(grid.check(&params, &field, params.tau).is_err());
    }

    #[test]
    fn decoupled_spin_up_stays_up() {
        let (params, mut solver) = setup(Mode::Decoupled, 128);
        let mut s = solver
            .init_state((Complex64::new(1.0, 0.0), Complex64::default()))
            .unwrap();
        for _ in 0..20 {
            solver.step(&mut s).unwrap();
        }
        assert!(s.minus.iter().all(|c| *c == Complex64::default()));
        let _ = params;
    }

    #[test]
    fn fused_evolution_matches_single_steps() {
        let (_, mut solver) = setup(Mode::Coupled, 128);
        let mut a = solver.init_state(x_polarized()).unwrap();
        let mut b = a.clone();
        let dt = solver.grid().dt;
        for _ in 0..25 {
            solver.step(&mut a).unwrap();
        }
        solver.evolve(&mut b, 25.0 * dt).unwrap();
        assert!(a.l2_distance(&b) < 1e-12);
        assert!((a.t - b.t).abs() < 1e-12);
    }

    #[test]
    fn duration_must_be_whole_steps() {
        let (_, mut solver) = setup(Mode::Decoupled, 128);
        let mut s = solver.init_state(x_polarized()).unwrap();
        let dt = solver.grid().dt;
        assert!(solver.evolve(&mut s, 2.5 * dt).is_err());
    }

    #[test]
    fn larmor_precession_in_uniform_field() {
        let params = SGParams::natural(3.0, 0.0, 1.0, 0.0);
        let field = FieldModel::of(&params, Mode::Coupled);
        let grid = GridSpec::auto(&params, &field, 1.0, 64).unwrap();
        let mut solver = PauliSolver::new(grid, params, field, 1.0).unwrap();
        let mut s = solver.init_state(x_polarized()).unwrap();
        let obs = solver.evolve_recording(&mut s, 1.0, 50).unwrap();
        for o in obs {
            let expected = (2.0 * 3.0 * o.t).cos();
            assert!(
                (o.sigma_x - expected).abs() < 1e-6,
                "t={} {} vs {}",
                o.t,
                o.sigma_x,
                expected
            );
        }
    }

    #[test]
    fn y_factor_is_the_free_packet() {
        let (params, solver) = setup(Mode::Decoupled, 128);
        let s = solver.init_state(x_polarized()).unwrap();
        let v = s.y_factor(0.0);
        let expected = (2.0 * std::f64::consts::PI * params.sigma0 * params.sigma0).powf(-0.25);
        assert!((v.norm() - expected).abs() < 1e-14);
    }
}

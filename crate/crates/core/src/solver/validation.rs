//! Solver validation battery: analytic, momentum, unitarity, time-step,
//! decoupling and free-particle checks with measured errors.

use super::{x_polarized, FieldModel, GridSpec, Mode, Observables, PauliSolver, SpinorField};
use crate::error::Result;
use crate::metrics::inner_product_closed;
use crate::packets::{PhaseConvention, SGParams};
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationConfig {
    /// Dimensionless groups `(P, K)` of the natural-unit test setup.
    pub groups: (f64, f64),
    /// Ratio `r = b σ0 / B0` for the decoupled run.
    pub r_decoupled: f64,
    pub n: usize,
    /// Default time step as a fraction of `t_spread`.
    pub dt_fraction: f64,
    /// Coarse and halved time steps for the order check.
    pub halving_fractions: (f64, f64),
    pub r_values: Vec<f64>,
    pub record_every: usize,
    pub l2_tol: f64,
    pub pz_tol: f64,
    pub drift_tol: f64,
    pub grid_i_tol: f64,
    pub width_tol: f64,
    pub halving_ratio: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        Self {
            groups: (2.0, 1.0),
            r_decoupled: 0.1,
            n: 256,
            dt_fraction: 1e-3,
            halving_fractions: (1e-2, 5e-3),
            r_values: vec![0.1, 0.03, 0.01],
            record_every: 100,
            l2_tol: 1e-4,
            pz_tol: 1e-3,
            drift_tol: 1e-10,
            grid_i_tol: 1e-4,
            width_tol: 1e-10,
            halving_ratio: 4.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub pass: bool,
}

impl CheckResult {
    fn below(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
            pass: value < threshold,
        }
    }

    fn at_least(name: &'static str, value: f64, threshold: f64) -> Self {
        Self {
            name,
            value,
            threshold,
            pass: value >= threshold,
        }
    }
}

/// Measured quantities of the decoupled run against the analytic solution.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoupledOutcome {
    pub steps: usize,
    pub l2_error: f64,
    /// Worst relative `⟨p_z⟩` error over both components.
    pub pz_rel_error: f64,
    pub drift_per_1e3: f64,
    pub population_change: f64,
    pub grid_i_error: f64,
    /// Smallest `M_grid - I_grid` over the recorded snapshots.
    pub min_snapshot_gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledRow {
    pub r: f64,
    pub discrepancy: f64,
    pub min_snapshot_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub decoupled: DecoupledOutcome,
    pub halving_errors: (f64, f64),
    pub coupled: Vec<CoupledRow>,
    pub free_width_error: f64,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }
}

fn test_params(cfg: &ValidationConfig, r: f64) -> Result<SGParams> {
    let (p, k) = cfg.groups;
    let mut params = SGParams::from_groups(p, k, 0.0, 0.0)?;
    params.b0 = params.gradient_b * params.sigma0 / r;
    Ok(params)
}

fn solver_for(
    cfg: &ValidationConfig,
    params: &SGParams,
    mode: Mode,
    dt_fraction: f64,
) -> Result<PauliSolver> {
    let field = FieldModel::of(params, mode);
    let t_spread = params.derive()?.t_spread;
    let grid = GridSpec::auto(params, &field, params.tau, cfg.n)?.with_dt(dt_fraction * t_spread);
    PauliSolver::new(grid, *params, field, params.tau)
}

fn min_gap(obs: &[Observables]) -> f64 {
    obs.iter()
        .map(|o| o.overlap - o.inner)
        .fold(f64::INFINITY, f64::min)
}

/// Runs the decoupled system through the magnet from an x-polarized start.
pub fn decoupled_run(cfg: &ValidationConfig) -> Result<DecoupledOutcome> {
    let params = test_params(cfg, cfg.r_decoupled)?;
    let mut solver = solver_for(cfg, &params, Mode::Decoupled, cfg.dt_fraction)?;
    let spin = x_polarized();
    let mut state = solver.init_state(spin)?;
    let start = solver.observables(&state);
    let obs = solver.evolve_recording(&mut state, params.tau, cfg.record_every)?;
    let end = *obs.last().expect("at least the initial snapshot");
    let steps = (params.tau / solver.grid().dt).round() as usize;
    let analytic = solver.analytic_state(&params, 0.0, spin, PhaseConvention::Exact);
    let units = solver.units();
    let expected_pz = params.moment * params.gradient_b * params.tau;
    let pz_rel_error = if expected_pz > 0.0 {
        ((end.mean_pz[0] - expected_pz).abs() / expected_pz)
            .max((end.mean_pz[1] + expected_pz).abs() / expected_pz)
    } else {
        end.mean_pz[0].abs().max(end.mean_pz[1].abs()) / units.momentum
    };
    let start_norm = start.norm_plus + start.norm_minus;
    let end_norm = end.norm_plus + end.norm_minus;
    Ok(DecoupledOutcome {
        steps,
        l2_error: state.l2_distance(&analytic),
        pz_rel_error,
        drift_per_1e3: (end_norm - start_norm).abs() * 1e3 / steps.max(1) as f64,
        population_change: (end.norm_plus - start.norm_plus).abs(),
        grid_i_error: (end.inner - inner_product_closed(&params)?.value).abs(),
        min_snapshot_gap: min_gap(&obs),
    })
}

/// Decoupled-vs-analytic L2 error at a given time step.
pub fn decoupled_error(cfg: &ValidationConfig, dt_fraction: f64) -> Result<f64> {
    let params = test_params(cfg, cfg.r_decoupled)?;
    let mut solver = solver_for(cfg, &params, Mode::Decoupled, dt_fraction)?;
    let spin = x_polarized();
    let mut state = solver.init_state(spin)?;
    solver.evolve(&mut state, params.tau)?;
    let analytic = solver.analytic_state(&params, 0.0, spin, PhaseConvention::Exact);
    Ok(state.l2_distance(&analytic))
}

fn run_mode(cfg: &ValidationConfig, params: &SGParams, mode: Mode) -> Result<(SpinorField, f64)> {
    let mut solver = solver_for(cfg, params, mode, cfg.dt_fraction)?;
    let mut state = solver.init_state(x_polarized())?;
    let obs = solver.evolve_recording(&mut state, params.tau, cfg.record_every)?;
    Ok((state, min_gap(&obs)))
}

/// `‖ψ_coupled − ψ_decoupled‖` at magnet exit for each `r` in the config.
pub fn coupled_trend(cfg: &ValidationConfig) -> Result<Vec<CoupledRow>> {
    cfg.r_values
        .iter()
        .map(|&r| {
            let params = test_params(cfg, r)?;
            let (coupled, gap_c) = run_mode(cfg, &params, Mode::Coupled)?;
            let (decoupled, gap_d) = run_mode(cfg, &params, Mode::Decoupled)?;
            Ok(CoupledRow {
                r,
                discrepancy: coupled.l2_distance(&decoupled),
                min_snapshot_gap: gap_c.min(gap_d),
            })
        })
        .collect()
}

/// Relative error of the grid rms width after one `t_spread` of free flight.
pub fn free_particle_width_error(cfg: &ValidationConfig) -> Result<f64> {
    let t_spread = 2.0;
    let params = SGParams::natural(0.0, 0.0, t_spread, 0.0);
    let field = FieldModel::free();
    let grid =
        GridSpec::auto(&params, &field, t_spread, cfg.n)?.with_dt(cfg.dt_fraction * t_spread);
    let mut solver = PauliSolver::new(grid, params, field, t_spread)?;
    let mut state = solver.init_state((Complex64::new(1.0, 0.0), Complex64::default()))?;
    solver.evolve(&mut state, t_spread)?;
    let expected = (1.0f64 + 1.0).sqrt();
    let (mut sx, mut sz, mut total) = (0.0, 0.0, 0.0);
    for ix in 0..state.nx {
        for iz in 0..state.nz {
            let w = state.plus[ix * state.nz + iz].norm_sqr();
            let (x, z) = state.position(ix, iz);
            sx += w * x * x;
            sz += w * z * z;
            total += w;
        }
    }
    let wx = (sx / total).sqrt();
    let wz = (sz / total).sqrt();
    Ok(((wx - expected).abs()).max((wz - expected).abs()) / expected)
}

fn strictly_decreasing(rows: &[CoupledRow]) -> bool {
    rows.windows(2).all(|w| w[1].discrepancy < w[0].discrepancy)
}

/// Runs every check and collects the measured values.
pub fn run_solver_validation(cfg: &ValidationConfig) -> Result<ValidationReport> {
    let decoupled = decoupled_run(cfg)?;
    let coarse = decoupled_error(cfg, cfg.halving_fractions.0)?;
    let fine = decoupled_error(cfg, cfg.halving_fractions.1)?;
    let coupled = coupled_trend(cfg)?;
    let free_width_error = free_particle_width_error(cfg)?;
    let trend_ok = strictly_decreasing(&coupled);
    let min_snapshot = coupled
        .iter()
        .map(|r| r.min_snapshot_gap)
        .fold(decoupled.min_snapshot_gap, f64::min);
    let checks = vec![
        CheckResult::below("decoupled_l2", decoupled.l2_error, cfg.l2_tol),
        CheckResult::below("pz_relative", decoupled.pz_rel_error, cfg.pz_tol),
        CheckResult::below("norm_drift_per_1e3", decoupled.drift_per_1e3, cfg.drift_tol),
        CheckResult::below(
            "population_freeze",
            decoupled.population_change,
            cfg.drift_tol,
        ),
        CheckResult::below("grid_inner_product", decoupled.grid_i_error, cfg.grid_i_tol),
        CheckResult::at_least("dt_halving_ratio", coarse / fine, cfg.halving_ratio),
        CheckResult {
            name: "coupled_trend",
            value: coupled.last().map_or(f64::NAN, |r| r.discrepancy),
            threshold: coupled.first().map_or(f64::NAN, |r| r.discrepancy),
            pass: trend_ok,
        },
        CheckResult::at_least("snapshot_inequality", min_snapshot, -1e-12),
        CheckResult::below("free_width", free_width_error, cfg.width_tol),
    ];
    Ok(ValidationReport {
        checks,
        decoupled,
        halving_errors: (coarse, fine),
        coupled,
        free_width_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ValidationConfig {
        ValidationConfig {
            n: 128,
            dt_fraction: 2e-3,
            r_values: vec![0.1, 0.01],
            ..Default::default()
        }
    }

    #[test]
    fn decoupled_run_tracks_the_analytic_branches() {
        let out = decoupled_run(&small()).unwrap();
        assert!(out.l2_error < 1e-3, "{out:?}");
        assert!(out.pz_rel_error < 1e-3, "{out:?}");
        assert!(out.population_change < 1e-10);
        assert!(out.min_snapshot_gap >= -1e-12);
    }

    #[test]
    fn free_width_follows_spreading_law() {
        let err = free_particle_width_error(&small()).unwrap();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn strictly_decreasing_rejects_ties() {
        let row = |d| CoupledRow {
            r: 0.0,
            discrepancy: d,
            min_snapshot_gap: 0.0,
        };
        assert!(strictly_decreasing(&[row(3.0), row(2.0), row(1.0)]));
        assert!(!strictly_decreasing(&[row(3.0), row(3.0)]));
    }
}

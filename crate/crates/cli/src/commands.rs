//! Subcommand bodies. Each writes its artifacts through an [`OutputSet`] and
//! reports how the process should exit.

use crate::config::{ConfigError, SweepConfig};
use crate::output::OutputSet;
use crate::sweep::{self, Summary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sglab::families::{kind_for_index, FunctionPair, WINDOW};
use sglab::metrics::cauchy_schwarz_property;
use sglab::quadrature::QuadratureSpec;
use sglab::signal::{max_delta_over_directions, signaling_audit};
use sglab::solver::validation::{run_solver_validation, ValidationConfig, ValidationReport};
use sglab::Error;
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Numerical(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Numerical(Error::InvalidParams { .. } | Error::Grid(_)) => 1,
            CliError::Numerical(Error::Forbidden { .. }) => 3,
            CliError::Numerical(_) => 2,
        }
    }
}

/// Exit status of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    /// A constraint violation was found and recorded.
    Forbidden,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Ok => 0,
            Verdict::Forbidden => 3,
        }
    }
}

pub fn sweep(cfg: &SweepConfig, out: &Path) -> Result<(Summary, Verdict), CliError> {
    let points = sweep::expand_points(cfg)?;
    let rows = sweep::run_sweep(cfg, &points)?;
    let summary = sweep::summarize(points.len(), &rows);
    let plots = sweep::emit_plotdata(&points, &rows, cfg.saturation_curves)?;
    let mut set = OutputSet::new(out)?;
    let mut csv = Vec::new();
    sweep::write_csv(&mut csv, &rows)?;
    set.stage("sweep.csv", &csv)?;
    let mut text = Vec::new();
    sweep::write_summary(&mut text, &summary)?;
    set.stage("summary.txt", &text)?;
    set.stage("plot/ratio.csv", &plots.ratio)?;
    set.stage("plot/saturation.csv", &plots.saturation)?;
    set.stage("plot/audit.csv", &plots.audit)?;
    set.commit()?;
    let verdict = if summary.forbidden() > 0 {
        Verdict::Forbidden
    } else {
        Verdict::Ok
    };
    Ok((summary, verdict))
}

pub fn validation_config(cfg: &SweepConfig) -> ValidationConfig {
    let s = &cfg.solver;
    ValidationConfig {
        groups: s.groups,
        r_decoupled: s.r_decoupled,
        n: s.grid,
        dt_fraction: s.dt_spread,
        r_values: s.r_values.clone(),
        l2_tol: s.l2_tol,
        ..Default::default()
    }
}

pub fn solve(cfg: &SweepConfig, out: &Path) -> Result<ValidationReport, CliError> {
    let report = run_solver_validation(&validation_config(cfg))?;
    let mut text = String::new();
    writeln!(text, "check,value,threshold,verdict").unwrap();
    for c in &report.checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        writeln!(
            text,
            "{},{:.6e},{:.6e},{verdict}",
            c.name, c.value, c.threshold
        )
        .unwrap();
    }
    let mut trend = String::from("r,discrepancy\n");
    for row in &report.coupled {
        writeln!(trend, "{:.16e},{:.16e}", row.r, row.discrepancy).unwrap();
    }
    let mut set = OutputSet::new(out)?;
    set.stage("solver_report.csv", text.as_bytes())?;
    set.stage("solver_trend.csv", trend.as_bytes())?;
    set.commit()?;
    Ok(report)
}

/// Directions used for the brute-force `|Δ|` maximization.
fn random_directions(rng: &mut ChaCha8Rng, n: usize) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| {
            let cos_theta: f64 = rng.random_range(-1.0..=1.0);
            let phi: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let s = (1.0 - cos_theta * cos_theta).sqrt();
            [s * phi.cos(), s * phi.sin(), cos_theta]
        })
        .collect()
}

pub fn audit(cfg: &SweepConfig, out: &Path) -> Result<(String, Verdict), CliError> {
    let params = cfg.base;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let dirs = random_directions(&mut rng, 1000);
    let mut text = String::from("t1,inner,m_t,m_s,delta_max,delta_brute,regime,verdict\n");
    let mut verdict = Verdict::Ok;
    for t1 in cfg.t1_values(&params) {
        match signaling_audit(&params, t1, cfg.epsilon) {
            Ok(a) => {
                let brute = max_delta_over_directions(a.overlap, &dirs)?.map_or(0.0, |b| b.0);
                writeln!(
                    text,
                    "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}",
                    t1,
                    a.inner,
                    a.m_t,
                    a.m_s,
                    a.delta_max,
                    brute,
                    a.regime,
                    if a.verdict_ok { "ok" } else { "violated" }
                )
                .unwrap();
                if !a.verdict_ok {
                    verdict = Verdict::Forbidden;
                }
            }
            Err(Error::Forbidden { inner, saturated }) => {
                writeln!(
                    text,
                    "{t1:.16e},{inner:.16e},nan,{saturated:.16e},{inner:.16e},nan,forbidden,violated"
                )
                .unwrap();
                verdict = Verdict::Forbidden;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let mut set = OutputSet::new(out)?;
    set.stage("audit.csv", text.as_bytes())?;
    set.commit()?;
    Ok((text, verdict))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzSummary {
    pub pairs: usize,
    pub violations: usize,
    /// Largest `|lhs - rhs|` over the identical pairs.
    pub equality_gap: f64,
}

pub fn schwarz(cfg: &SweepConfig, out: &Path) -> Result<(SchwarzSummary, Verdict), CliError> {
    let spec = QuadratureSpec {
        intervals: cfg.schwarz_intervals,
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut text = String::from("pair,kind,lhs,rhs,ok\n");
    let mut summary = SchwarzSummary {
        pairs: cfg.schwarz_pairs,
        violations: 0,
        equality_gap: 0.0,
    };
    for i in 0..cfg.schwarz_pairs {
        let kind = kind_for_index(i);
        let pair = FunctionPair::random(&mut rng, kind);
        let c = cauchy_schwarz_property(|u| pair.f(u), |u| pair.g(u), WINDOW, &spec)?;
        if !c.ok {
            summary.violations += 1;
        }
        if kind == sglab::families::PairKind::Identical {
            summary.equality_gap = summary.equality_gap.max((c.lhs - c.rhs).abs());
        }
        writeln!(
            text,
            "{i},{},{:.16e},{:.16e},{}",
            kind.as_str(),
            c.lhs,
            c.rhs,
            c.ok
        )
        .unwrap();
    }
    let mut set = OutputSet::new(out)?;
    set.stage("schwarz.csv", text.as_bytes())?;
    set.commit()?;
    let verdict = if summary.violations > 0 {
        Verdict::Forbidden
    } else {
        Verdict::Ok
    };
    Ok((summary, verdict))
}

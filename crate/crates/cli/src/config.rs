//! Run configuration: a TOML file of `[section]` headers and `key = value`
//! lines. Physical quantities are SI and carry their unit in the key name.
//!
//! ```toml
//! [params]
//! units = "si"              # or "natural": ħ = m = μ = σ0 = 1
//! b0_t = 1.0
//! gradient_t_per_m = 10.0
//! tau_s = 1e-4
//! sigma0_m = 1e-6
//! vy_m_per_s = 500.0
//!
//! [sweep]
//! gradient_t_per_m = { scale = "log", from = 1.0, to = 1e3, count = 20 }
//! tau_s = [1e-4, 2e-4]
//! t1_spread = [0.0, 1.0, 10.0]
//! epsilon = 1e-3
//! ```
//!
//! In natural units `p` and `k` may replace `gradient_t_per_m` and `tau_s`,
//! both in `[params]` and as `[sweep]` axes.

use serde::Deserialize;
use sglab::packets::{HBAR, NEUTRON_MASS, NEUTRON_MOMENT};
use sglab::SGParams;
use std::path::Path;
use thiserror::Error;

/// Largest number of parameter points a sweep may expand to by default.
pub const DEFAULT_MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("`{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Units {
    #[default]
    Si,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Lin,
    Log,
}

/// Values an axis takes: a single value, an explicit list or a grid.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    Single(f64),
    List(Vec<f64>),
    Grid {
        scale: Scale,
        from: f64,
        to: f64,
        count: usize,
    },
}

impl AxisSpec {
    pub fn len(&self) -> usize {
        match self {
            AxisSpec::Single(_) => 1,
            AxisSpec::List(v) => v.len(),
            AxisSpec::Grid { count, .. } => *count,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn check(&self, field: &str) -> Result<(), ConfigError> {
        match self {
            AxisSpec::Single(v) if !v.is_finite() => Err(invalid(field, "value must be finite")),
            AxisSpec::List(v) if v.iter().any(|x| !x.is_finite()) => {
                Err(invalid(field, "list values must be finite"))
            }
            AxisSpec::List(v) if v.is_empty() => Err(invalid(field, "list must not be empty")),
            AxisSpec::Grid {
                scale,
                from,
                to,
                count,
            } => {
                if *count == 0 {
                    return Err(invalid(field, "count must be >= 1"));
                }
                if !(from.is_finite() && to.is_finite()) {
                    return Err(invalid(field, "range ends must be finite"));
                }
                if *scale == Scale::Log && (*from <= 0.0 || *to <= 0.0) {
                    return Err(invalid(field, "log ranges need positive ends"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// The `j`-th grid value.
    pub fn value(&self, j: usize) -> f64 {
        match self {
            AxisSpec::Single(v) => *v,
            AxisSpec::List(v) => v[j],
            AxisSpec::Grid {
                scale,
                from,
                to,
                count,
            } => {
                if *count == 1 {
                    return *from;
                }
                let f = j as f64 / (*count - 1) as f64;
                match scale {
                    Scale::Lin => from + (to - from) * f,
                    Scale::Log => (from.ln() + (to.ln() - from.ln()) * f).exp(),
                }
            }
        }
    }

    /// A uniform (or log-uniform) draw from the axis range; lists pick an entry.
    pub fn draw(&self, u: f64) -> f64 {
        match self {
            AxisSpec::Single(v) => *v,
            AxisSpec::List(v) => v[((u * v.len() as f64) as usize).min(v.len() - 1)],
            AxisSpec::Grid {
                scale, from, to, ..
            } => match scale {
                Scale::Lin => from + (to - from) * u,
                Scale::Log => (from.ln() + (to.ln() - from.ln()) * u).exp(),
            },
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    units: Option<Units>,
    mass_kg: Option<f64>,
    moment_j_per_t: Option<f64>,
    b0_t: Option<f64>,
    gradient_t_per_m: Option<f64>,
    tau_s: Option<f64>,
    sigma0_m: Option<f64>,
    vy_m_per_s: Option<f64>,
    hbar_js: Option<f64>,
    p: Option<f64>,
    k: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    gradient_t_per_m: Option<AxisSpec>,
    b0_t: Option<AxisSpec>,
    tau_s: Option<AxisSpec>,
    sigma0_m: Option<AxisSpec>,
    vy_m_per_s: Option<AxisSpec>,
    p: Option<AxisSpec>,
    k: Option<AxisSpec>,
    #[serde(default)]
    t1_s: Vec<f64>,
    #[serde(default)]
    t1_spread: Vec<f64>,
    epsilon: Option<f64>,
    max_points: Option<usize>,
    random_points: Option<usize>,
    saturation_curves: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    p: Option<f64>,
    k: Option<f64>,
    grid: Option<usize>,
    dt_spread: Option<f64>,
    r_decoupled: Option<f64>,
    r_values: Option<Vec<f64>>,
    l2_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchwarz {
    pairs: Option<usize>,
    intervals: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    params: RawParams,
    #[serde(default)]
    sweep: RawSweep,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    schwarz: RawSchwarz,
    seed: Option<u64>,
}

/// Parameter axes of a sweep, expanded in this order (last fastest).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gradient,
    Tau,
    P,
    K,
    B0,
    Sigma0,
    Vy,
}

impl Axis {
    pub fn key(self) -> &'static str {
        match self {
            Axis::Gradient => "gradient_t_per_m",
            Axis::Tau => "tau_s",
            Axis::P => "p",
            Axis::K => "k",
            Axis::B0 => "b0_t",
            Axis::Sigma0 => "sigma0_m",
            Axis::Vy => "vy_m_per_s",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub groups: (f64, f64),
    pub grid: usize,
    pub dt_spread: f64,
    pub r_decoupled: f64,
    pub r_values: Vec<f64>,
    pub l2_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            groups: (2.0, 1.0),
            grid: 256,
            dt_spread: 1e-3,
            r_decoupled: 0.1,
            r_values: vec![0.1, 0.03, 0.01],
            l2_tol: 1e-4,
        }
    }
}

/// Validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub units: Units,
    pub base: SGParams,
    /// `p` and `k` of the base point, natural units only.
    pub base_groups: Option<(f64, f64)>,
    pub axes: Vec<(Axis, AxisSpec)>,
    pub t1_s: Vec<f64>,
    pub t1_spread: Vec<f64>,
    pub epsilon: f64,
    pub max_points: usize,
    pub random_points: Option<usize>,
    pub saturation_curves: usize,
    pub seed: u64,
    pub solver: SolverSettings,
    pub schwarz_pairs: usize,
    pub schwarz_intervals: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        from_str("").expect("empty config is valid")
    }
}

pub fn load(path: &Path) -> Result<SweepConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    from_str(&text).map_err(|e| match e {
        ConfigError::Parse(msg) => ConfigError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

pub fn from_str(text: &str) -> Result<SweepConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let p = &raw.params;
    let units = p.units.unwrap_or_default();
    let (mass, moment, hbar, sigma0) = match units {
        Units::Si => (NEUTRON_MASS, NEUTRON_MOMENT, HBAR, 1e-6),
        Units::Natural => (1.0, 1.0, 1.0, 1.0),
    };
    let mut base = SGParams {
        mass: p.mass_kg.unwrap_or(mass),
        moment: p.moment_j_per_t.unwrap_or(moment),
        b0: p.b0_t.unwrap_or(0.0),
        gradient_b: p.gradient_t_per_m.unwrap_or(0.0),
        tau: p.tau_s.unwrap_or(1.0),
        sigma0: p.sigma0_m.unwrap_or(sigma0),
        vy: p.vy_m_per_s.unwrap_or(0.0),
        hbar: p.hbar_js.unwrap_or(hbar),
    };
    let base_groups = match (p.p, p.k) {
        (None, None) => None,
        (Some(pv), Some(kv)) => {
            if units != Units::Natural {
                return Err(invalid(
                    "params.p",
                    "P and K are only accepted with units = \"natural\"",
                ));
            }
            if p.gradient_t_per_m.is_some() || p.tau_s.is_some() {
                return Err(invalid(
                    "params.p",
                    "give either p/k or gradient_t_per_m/tau_s",
                ));
            }
            Some((pv, kv))
        }
        _ => return Err(invalid("params.p", "p and k must be given together")),
    };
    if let Some((pv, kv)) = base_groups {
        base = apply_groups(base, pv, kv).map_err(|e| invalid("params.p", e.to_string()))?;
    }
    base.validate()
        .map_err(|e| invalid("params", e.to_string()))?;

    let s = &raw.sweep;
    let mut axes = Vec::new();
    for (axis, spec) in [
        (Axis::Gradient, &s.gradient_t_per_m),
        (Axis::Tau, &s.tau_s),
        (Axis::P, &s.p),
        (Axis::K, &s.k),
        (Axis::B0, &s.b0_t),
        (Axis::Sigma0, &s.sigma0_m),
        (Axis::Vy, &s.vy_m_per_s),
    ] {
        if let Some(spec) = spec {
            spec.check(&format!("sweep.{}", axis.key()))?;
            axes.push((axis, spec.clone()));
        }
    }
    let has = |a: Axis| axes.iter().any(|(x, _)| *x == a);
    let groups = has(Axis::P) || has(Axis::K);
    if groups {
        if units != Units::Natural {
            return Err(invalid("sweep.p", "P/K axes need units = \"natural\""));
        }
        if has(Axis::Gradient) || has(Axis::Tau) {
            return Err(invalid(
                "sweep.p",
                "P/K axes replace gradient_t_per_m and tau_s",
            ));
        }
        if !(has(Axis::P) && has(Axis::K)) && base_groups.is_none() {
            return Err(invalid(
                "sweep.p",
                "a single P or K axis needs p and k in [params]",
            ));
        }
    }
    for (name, list) in [("sweep.t1_s", &s.t1_s), ("sweep.t1_spread", &s.t1_spread)] {
        if list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(invalid(name, "times must be finite and >= 0"));
        }
    }
    let epsilon = s.epsilon.unwrap_or(sglab::metrics::DEFAULT_EPSILON);
    let epsilon = positive("sweep.epsilon", epsilon)?;
    if epsilon >= 1.0 {
        return Err(invalid("sweep.epsilon", "must be < 1"));
    }
    let max_points = s.max_points.unwrap_or(DEFAULT_MAX_POINTS);
    if max_points == 0 {
        return Err(invalid("sweep.max_points", "must be >= 1"));
    }

    let sv = &raw.solver;
    let defaults = SolverSettings::default();
    let solver = SolverSettings {
        groups: (
            sv.p.unwrap_or(defaults.groups.0),
            sv.k.unwrap_or(defaults.groups.1),
        ),
        grid: sv.grid.unwrap_or(defaults.grid),
        dt_spread: positive(
            "solver.dt_spread",
            sv.dt_spread.unwrap_or(defaults.dt_spread),
        )?,
        r_decoupled: positive(
            "solver.r_decoupled",
            sv.r_decoupled.unwrap_or(defaults.r_decoupled),
        )?,
        r_values: sv.r_values.clone().unwrap_or(defaults.r_values),
        l2_tol: positive("solver.l2_tol", sv.l2_tol.unwrap_or(defaults.l2_tol))?,
    };
    if solver.grid < 16 || !solver.grid.is_power_of_two() {
        return Err(invalid("solver.grid", "must be a power of two >= 16"));
    }
    for r in &solver.r_values {
        positive("solver.r_values", *r)?;
    }

    let cfg = SweepConfig {
        units,
        base,
        base_groups,
        axes,
        t1_s: s.t1_s.clone(),
        t1_spread: s.t1_spread.clone(),
        epsilon,
        max_points,
        random_points: s.random_points,
        saturation_curves: s.saturation_curves.unwrap_or(4),
        seed: raw.seed.unwrap_or(0),
        solver,
        schwarz_pairs: raw.schwarz.pairs.unwrap_or(1000),
        schwarz_intervals: raw.schwarz.intervals.unwrap_or(8192),
    };
    let n = cfg.point_count();
    if n > cfg.max_points {
        return Err(invalid(
            "sweep",
            format!("{n} points exceed the cap of {}", cfg.max_points),
        ));
    }
    Ok(cfg)
}

fn apply_groups(base: SGParams, p: f64, k: f64) -> sglab::Result<SGParams> {
    let g = SGParams::from_groups(p, k, base.b0, base.vy)?;
    Ok(SGParams {
        gradient_b: g.gradient_b,
        tau: g.tau,
        ..base
    })
}

impl SweepConfig {
    /// Points in the sweep: the random count if set, else the grid product.
    pub fn point_count(&self) -> usize {
        match self.random_points {
            Some(n) => n,
            None => self
                .axes
                .iter()
                .map(|(_, s)| s.len())
                .try_fold(1usize, |acc, n| acc.checked_mul(n))
                .unwrap_or(usize::MAX),
        }
    }

    /// Parameters of the point with per-axis values `values` (axis order).
    pub fn point_params(&self, values: &[f64]) -> Result<SGParams, ConfigError> {
        let mut p = self.base;
        let mut groups = self.base_groups;
        for ((axis, _), v) in self.axes.iter().zip(values) {
            match axis {
                Axis::Gradient => p.gradient_b = *v,
                Axis::Tau => p.tau = *v,
                Axis::B0 => p.b0 = *v,
                Axis::Sigma0 => p.sigma0 = *v,
                Axis::Vy => p.vy = *v,
                Axis::P => groups = Some((*v, groups.map_or(f64::NAN, |g| g.1))),
                Axis::K => groups = Some((groups.map_or(f64::NAN, |g| g.0), *v)),
            }
        }
        if let Some((pv, kv)) = groups {
            p = apply_groups(p, pv, kv).map_err(|e| invalid("sweep", e.to_string()))?;
        }
        p.validate().map_err(|e| invalid("sweep", e.to_string()))?;
        Ok(p)
    }

    /// Post-exit evaluation times for `params`: absolute times, then
    /// multiples of `t_spread`. Defaults to `[0]`.
    pub fn t1_values(&self, params: &SGParams) -> Vec<f64> {
        let ts = 2.0 * params.mass * params.sigma0 * params.sigma0 / params.hbar;
        let mut out: Vec<f64> = self.t1_s.clone();
        out.extend(self.t1_spread.iter().map(|m| m * ts));
        if out.is_empty() {
            out.push(0.0);
        }
        out
    }
}

//! Metric sweeps over parameter grids.

use crate::config::{ConfigError, SweepConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sglab::metrics::{metrics_record, overlap_m_closed, MetricsRecord, Regime};
use sglab::signal::signaling_audit;
use sglab::{DerivedParams, Error, SGParams};
use std::io::{self, Write};

/// Bumped whenever the column list or its meaning changes.
pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 30] = [
    "point",
    "t1",
    "mass",
    "moment",
    "b0",
    "gradient_b",
    "tau",
    "sigma0",
    "vy",
    "hbar",
    "vz",
    "ky",
    "kz",
    "p",
    "k",
    "r",
    "t_spread",
    "inner_re",
    "inner_im",
    "i",
    "m_t",
    "m_s",
    "alpha2",
    "beta2",
    "t_s",
    "regime",
    "constraint_ok",
    "delta_max",
    "audit_ok",
    "underflow",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub point: usize,
    pub params: SGParams,
    pub derived: DerivedParams,
    pub record: MetricsRecord,
    pub delta_max: f64,
    pub audit_ok: bool,
}

/// Expands the configured grid, or draws the random points, in index order.
pub fn expand_points(cfg: &SweepConfig) -> Result<Vec<SGParams>, ConfigError> {
    let n = cfg.point_count();
    let mut out = Vec::with_capacity(n);
    if cfg.random_points.is_some() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..n {
            let values: Vec<f64> = cfg.axes.iter().map(|(_, s)| s.draw(rng.random())).collect();
            out.push(cfg.point_params(&values)?);
        }
        return Ok(out);
    }
    let lens: Vec<usize> = cfg.axes.iter().map(|(_, s)| s.len()).collect();
    let mut values = vec![0.0; lens.len()];
    for index in 0..n {
        let mut rem = index;
        for a in (0..lens.len()).rev() {
            values[a] = cfg.axes[a].1.value(rem % lens[a]);
            rem /= lens[a];
        }
        out.push(cfg.point_params(&values)?);
    }
    Ok(out)
}

fn point_rows(point: usize, params: &SGParams, cfg: &SweepConfig) -> Result<Vec<SweepRow>, Error> {
    let derived = params.derive()?;
    cfg.t1_values(params)
        .into_iter()
        .map(|t1| {
            let record = metrics_record(params, t1, cfg.epsilon)?;
            let (delta_max, audit_ok) = match signaling_audit(params, t1, cfg.epsilon) {
                Ok(a) => (a.delta_max, a.verdict_ok),
                Err(Error::Forbidden { inner, .. }) => (inner, false),
                Err(e) => return Err(e),
            };
            Ok(SweepRow {
                point,
                params: *params,
                derived,
                record,
                delta_max,
                audit_ok,
            })
        })
        .collect()
}

/// Computes all rows in parallel; the output order is point-major, then t1.
pub fn run_sweep(cfg: &SweepConfig, points: &[SGParams]) -> Result<Vec<SweepRow>, Error> {
    let nested: Vec<Vec<SweepRow>> = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| point_rows(i, p, cfg))
        .collect::<Result<_, _>>()?;
    Ok(nested.into_iter().flatten().collect())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(out: &mut W, rows: &[SweepRow]) -> io::Result<()> {
    writeln!(out, "{}", COLUMNS.join(","))?;
    for r in rows {
        let p = &r.params;
        let d = &r.derived;
        let m = &r.record;
        let fields = [
            r.point.to_string(),
            num(m.t1),
            num(p.mass),
            num(p.moment),
            num(p.b0),
            num(p.gradient_b),
            num(p.tau),
            num(p.sigma0),
            num(p.vy),
            num(p.hbar),
            num(d.vz),
            num(d.ky),
            num(d.kz),
            num(d.p),
            num(d.k),
            num(d.r),
            num(d.t_spread),
            num(m.inner_complex.re),
            num(m.inner_complex.im),
            num(m.inner),
            num(m.m_t),
            num(m.m_s),
            num(m.alpha2),
            num(m.beta2),
            num(m.saturation.time()),
            m.regime.as_str().to_string(),
            m.constraint_ok.to_string(),
            num(r.delta_max),
            r.audit_ok.to_string(),
            m.underflow.to_string(),
        ];
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub points: usize,
    pub rows: usize,
    pub counts: [(Regime, usize); 4],
    /// Smallest `M_s - I` over all rows; `+inf` for an empty sweep.
    pub min_gap: f64,
    pub max_delta: f64,
}

impl Summary {
    pub fn forbidden(&self) -> usize {
        self.counts
            .iter()
            .find(|(r, _)| *r == Regime::Forbidden)
            .map_or(0, |(_, n)| *n)
    }
}

pub fn summarize(points: usize, rows: &[SweepRow]) -> Summary {
    let mut counts = [
        (Regime::Ideal, 0),
        (Regime::Orthogonal, 0),
        (Regime::GeneralNonideal, 0),
        (Regime::Forbidden, 0),
    ];
    let mut min_gap = f64::INFINITY;
    let mut max_delta = 0.0f64;
    for r in rows {
        for slot in counts.iter_mut() {
            if slot.0 == r.record.regime {
                slot.1 += 1;
            }
        }
        min_gap = min_gap.min(r.record.m_s - r.record.inner);
        max_delta = max_delta.max(r.delta_max);
    }
    Summary {
        points,
        rows: rows.len(),
        counts,
        min_gap,
        max_delta,
    }
}

pub fn write_summary<W: Write>(out: &mut W, s: &Summary) -> io::Result<()> {
    writeln!(out, "schema_version = {SCHEMA_VERSION}")?;
    writeln!(out, "points = {}", s.points)?;
    writeln!(out, "rows = {}", s.rows)?;
    for (regime, n) in &s.counts {
        writeln!(out, "regime.{regime} = {n}")?;
    }
    writeln!(out, "min_ms_minus_i = {}", num(s.min_gap))?;
    writeln!(out, "max_delta_max = {}", num(s.max_delta))?;
    Ok(())
}

/// Post-exit times of the saturation curves, in multiples of `t_spread`:
/// zero, then eight per decade from `10⁻³` to `10⁴`.
pub fn curve_times() -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend((0..=56).map(|j| 10f64.powf(-3.0 + j as f64 / 8.0)));
    out
}

/// Long-format plot tables: `ratio.csv`, `saturation.csv` and `audit.csv`.
pub struct PlotData {
    pub ratio: Vec<u8>,
    pub saturation: Vec<u8>,
    pub audit: Vec<u8>,
}

pub fn emit_plotdata(
    points: &[SGParams],
    rows: &[SweepRow],
    curves: usize,
) -> Result<PlotData, Error> {
    let mut ratio = b"point,p,k,i,m_s,ratio\n".to_vec();
    let mut audit = b"point,t1,delta_max,m_s\n".to_vec();
    let mut saturation = b"point,t1,t1_spread,m_t\n".to_vec();
    let mut last = None;
    for r in rows {
        let m = &r.record;
        if last != Some(r.point) {
            let q = if m.m_s > 0.0 {
                m.inner / m.m_s
            } else {
                f64::NAN
            };
            let line = format!(
                "{},{},{},{},{},{}\n",
                r.point,
                num(r.derived.p),
                num(r.derived.k),
                num(m.inner),
                num(m.m_s),
                num(q)
            );
            ratio.extend_from_slice(line.as_bytes());
            last = Some(r.point);
        }
        let line = format!(
            "{},{},{},{}\n",
            r.point,
            num(m.t1),
            num(r.delta_max),
            num(m.m_s)
        );
        audit.extend_from_slice(line.as_bytes());
    }
    for (i, p) in points.iter().enumerate().take(curves) {
        let ts = p.derive()?.t_spread;
        for f in curve_times() {
            let m = overlap_m_closed(p, f * ts)?.value;
            let line = format!("{},{},{},{}\n", i, num(f * ts), num(f), num(m));
            saturation.extend_from_slice(line.as_bytes());
        }
    }
    Ok(PlotData {
        ratio,
        saturation,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::from_str;

    #[test]
    fn no_gradient_point_is_general_nonideal() {
        let cfg = from_str("[params]\nb0_t = 1.0\n").unwrap();
        let points = expand_points(&cfg).unwrap();
        let rows = run_sweep(&cfg, &points).unwrap();
        assert_eq!(rows.len(), 1);
        let m = &rows[0].record;
        assert_eq!((m.inner, m.m_s), (1.0, 1.0));
        assert_eq!(m.regime, Regime::GeneralNonideal);
        assert!(m.constraint_ok);
    }

    #[test]
    fn grid_expansion_order_is_last_axis_fastest() {
        let cfg =
            from_str("[sweep]\nb0_t = [1.0, 2.0]\nvy_m_per_s = [10.0, 20.0, 30.0]\n").unwrap();
        let pts = expand_points(&cfg).unwrap();
        let pairs: Vec<(f64, f64)> = pts.iter().map(|p| (p.b0, p.vy)).collect();
        assert_eq!(pairs[0], (1.0, 10.0));
        assert_eq!(pairs[1], (1.0, 20.0));
        assert_eq!(pairs[3], (2.0, 10.0));
    }

    #[test]
    fn random_points_depend_only_on_seed() {
        let text = "seed = 5\n[sweep]\nrandom_points = 10\nb0_t = { scale = \"log\", from = 0.1, to = 10.0, count = 1 }\n";
        let a = expand_points(&from_str(text).unwrap()).unwrap();
        let b = expand_points(&from_str(text).unwrap()).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|p| p.b0 >= 0.1 && p.b0 <= 10.0));
    }

    #[test]
    fn empty_sweep_gives_headers_only() {
        let data = emit_plotdata(&[], &[], 4).unwrap();
        assert_eq!(data.ratio, b"point,p,k,i,m_s,ratio\n");
        let mut buf = Vec::new();
        write_csv(&mut buf, &[]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1);
    }

    #[test]
    fn summary_tracks_worst_gap() {
        let cfg = from_str("[params]\nunits = \"natural\"\n[sweep]\np = [1.0, 4.0]\nk = [0.5]\n")
            .unwrap();
        let points = expand_points(&cfg).unwrap();
        let rows = run_sweep(&cfg, &points).unwrap();
        let s = summarize(points.len(), &rows);
        assert_eq!(s.forbidden(), 0);
        let expected = (-0.5f64).exp() - (-1.0 / 8.0 - 0.5f64).exp();
        assert!((s.min_gap - expected).abs() < 1e-15);
    }
}

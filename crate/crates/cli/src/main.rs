use clap::{Parser, Subcommand};
use sglab_cli::commands::{self, CliError};
use sglab_cli::config::{self, SweepConfig};
use std::path::PathBuf;
use std::process::ExitCode;

/// Nonideal Stern-Gerlach metrics, solver validation and no-signaling audits.
///
/// Every flag can also be set through an environment variable with the
/// `SGLAB_` prefix; flags win over the environment.
#[derive(Parser, Debug)]
#[command(name = "sglab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run configuration (TOML). Built-in defaults are used when absent.
    #[arg(long, global = true, env = "SGLAB_CONFIG")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, env = "SGLAB_OUT", default_value = "sglab-out")]
    out: PathBuf,
    /// Seed for random points, directions and function pairs.
    #[arg(long, global = true, env = "SGLAB_SEED")]
    seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long, global = true, env = "SGLAB_THREADS")]
    threads: Option<usize>,
    /// Regime threshold ε.
    #[arg(long, global = true, env = "SGLAB_EPSILON")]
    epsilon: Option<f64>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Metrics corpus over the configured parameter grid.
    Sweep,
    /// Solver validation battery.
    Solve,
    /// No-signaling report for the base parameter set.
    Audit,
    /// Randomized run of the modulus inequality.
    Schwarz,
}

fn load(cli: &Cli) -> Result<SweepConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => config::load(path)?,
        None => SweepConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(eps) = cli.epsilon {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(config::ConfigError::Invalid {
                field: "--epsilon".into(),
                reason: format!("must lie in (0, 1), got {eps}"),
            }
            .into());
        }
        cfg.epsilon = eps;
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let cfg = load(cli)?;
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| config::ConfigError::Invalid {
                field: "--threads".into(),
                reason: e.to_string(),
            })?;
    }
    match cli.command {
        Command::Sweep => {
            let (s, verdict) = commands::sweep(&cfg, &cli.out)?;
            println!("points {} rows {}", s.points, s.rows);
            for (regime, n) in s.counts {
                println!("{regime:>17} {n}");
            }
            println!(
                "min(M_s - I) {:.6e}  max Δ_max {:.6e}",
                s.min_gap, s.max_delta
            );
            Ok(verdict.exit_code())
        }
        Command::Solve => {
            let report = commands::solve(&cfg, &cli.out)?;
            for c in &report.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!(
                    "{tag} {:<20} {:.6e} (threshold {:.6e})",
                    c.name, c.value, c.threshold
                );
            }
            for row in &report.coupled {
                println!("r = {:<6} discrepancy {:.6e}", row.r, row.discrepancy);
            }
            Ok(0)
        }
        Command::Audit => {
            let (text, verdict) = commands::audit(&cfg, &cli.out)?;
            print!("{text}");
            Ok(verdict.exit_code())
        }
        Command::Schwarz => {
            let (s, verdict) = commands::schwarz(&cfg, &cli.out)?;
            println!(
                "pairs {} violations {} equality gap {:.3e}",
                s.pairs, s.violations, s.equality_gap
            );
            Ok(verdict.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("sglab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

fn sglab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sglab"))
        .args(args)
        .current_dir(dir)
        .env_remove("SGLAB_SEED")
        .env_remove("SGLAB_CONFIG")
        .env_remove("SGLAB_OUT")
        .env_remove("SGLAB_EPSILON")
        .env_remove("SGLAB_THREADS")
        .output()
        .expect("binary runs")
}

const PINNED_HEADER: &str =
    "point,t1,mass,moment,b0,gradient_b,tau,sigma0,vy,hbar,vz,ky,kz,p,k,r,t_spread,\
inner_re,inner_im,i,m_t,m_s,alpha2,beta2,t_s,regime,constraint_ok,delta_max,audit_ok,underflow";

#[test]
fn csv_header_is_pinned() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[params]\ngradient_t_per_m = 10.0\ntau_s = 1e-4\n",
    )
    .unwrap();
    let out = sglab(&["sweep", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = std::fs::read_to_string(dir.path().join("o/sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), PINNED_HEADER);
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row.len(), 30);
    // 17 significant digits, round-trip exact
    let tau: f64 = row[6].parse().unwrap();
    assert_eq!(tau, 1e-4);
    assert_eq!(row[6], "1.0000000000000000e-4");
    let summary = std::fs::read_to_string(dir.path().join("o/summary.txt")).unwrap();
    assert!(summary.starts_with("schema_version = 1\n"));
}

#[test]
fn config_errors_exit_1_with_field_and_leave_no_output() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.toml"),
        "[sweep]\ntau_s = [1.0, -2.0]\n",
    )
    .unwrap();
    let out = sglab(&["sweep", "--config", "bad.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tau"), "{err}");
    assert!(!dir.path().join("o/sweep.csv").exists());

    std::fs::write(dir.path().join("syntax.toml"), "[params]\nb0_t = \n").unwrap();
    let out = sglab(
        &["sweep", "--config", "syntax.toml", "--out", "o"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let out = sglab(&["sweep", "--config", "missing.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let out = sglab(&["sweep", "--epsilon", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn empty_sweep_writes_headers_only() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[sweep]\nrandom_points = 0\nb0_t = [1.0]\n",
    )
    .unwrap();
    let out = sglab(&["sweep", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    for f in [
        "sweep.csv",
        "plot/ratio.csv",
        "plot/saturation.csv",
        "plot/audit.csv",
    ] {
        let text = std::fs::read_to_string(dir.path().join("o").join(f)).unwrap();
        assert_eq!(text.lines().count(), 1, "{f}");
    }
}

#[test]
fn seed_comes_from_flag_or_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[sweep]\nrandom_points = 5\nb0_t = { scale = \"lin\", from = 0.0, to = 1.0, count = 1 }\n",
    )
    .unwrap();
    let flag = sglab(
        &["sweep", "--config", "c.toml", "--out", "a", "--seed", "9"],
        dir.path(),
    );
    assert_eq!(flag.status.code(), Some(0));
    let env = Command::new(env!("CARGO_BIN_EXE_sglab"))
        .args(["sweep", "--config", "c.toml", "--out", "b"])
        .env("SGLAB_SEED", "9")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(env.status.code(), Some(0));
    let other = sglab(
        &["sweep", "--config", "c.toml", "--out", "c", "--seed", "10"],
        dir.path(),
    );
    assert_eq!(other.status.code(), Some(0));
    let read = |d: &str| std::fs::read(dir.path().join(d).join("sweep.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
}

#[test]
fn audit_and_schwarz_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[params]\nunits = \"natural\"\np = 2.0\nk = 1.0\nb0_t = 5.0\n[sweep]\nt1_spread = [0.0, 10.0]\n\
         [schwarz]\npairs = 30\n",
    )
    .unwrap();
    let out = sglab(&["audit", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let audit = std::fs::read_to_string(dir.path().join("o/audit.csv")).unwrap();
    assert_eq!(audit.lines().count(), 3);
    let row: Vec<&str> = audit.lines().nth(1).unwrap().split(',').collect();
    let inner: f64 = row[1].parse().unwrap();
    let brute: f64 = row[5].parse().unwrap();
    assert!((inner - (-0.5f64 - 2.0).exp()).abs() < 1e-15);
    assert!((brute - inner).abs() < 1e-3);
    assert_eq!(row[7], "ok");

    let out = sglab(
        &["schwarz", "--config", "c.toml", "--out", "o", "--seed", "3"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("o/schwarz.csv")).unwrap();
    assert_eq!(csv.lines().count(), 31);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

#[test]
fn solve_writes_report_and_trend() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "[solver]\ngrid = 128\ndt_spread = 2e-3\nr_values = [0.1, 0.01]\nl2_tol = 1e-3\n",
    )
    .unwrap();
    let out = sglab(&["solve", "--config", "c.toml", "--out", "o"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(dir.path().join("o/solver_report.csv")).unwrap();
    let line = |name: &str| {
        report
            .lines()
            .find(|l| l.starts_with(name))
            .unwrap()
            .to_string()
    };
    assert!(line("decoupled_l2").ends_with("PASS"));
    assert!(line("coupled_trend").ends_with("PASS"));
    assert!(line("free_width").ends_with("PASS"));
    let trend = std::fs::read_to_string(dir.path().join("o/solver_trend.csv")).unwrap();
    assert_eq!(trend.lines().count(), 3);
}

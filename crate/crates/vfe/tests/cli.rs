//! Drives the installed binary end to end: artifact layout, CSV formats,
//! summary lines, config handling, exit codes, and thread-count invariance.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_vfe"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "vfe {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path)
        .unwrap_or_else(|e| panic!("cannot read {}: {e}", path.display()));
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect();
    (header, rows)
}

/// `-d.dddddddddddddddde-d`-shaped: 17 significant digits, '.' separator.
fn assert_full_precision(field: &str) {
    let s = field.strip_prefix('-').unwrap_or(field);
    let (mantissa, exponent) = s.split_once('e').unwrap_or_else(|| {
        panic!("{field:?} is not in scientific notation");
    });
    let (lead, frac) = mantissa
        .split_once('.')
        .unwrap_or_else(|| panic!("{field:?} has no decimal point"));
    assert_eq!(lead.len(), 1, "{field:?} leading digit");
    assert!(lead.chars().all(|c| c.is_ascii_digit()), "{field:?}");
    assert_eq!(frac.len(), 16, "{field:?} should carry 16 fractional digits");
    assert!(frac.chars().all(|c| c.is_ascii_digit()), "{field:?}");
    let exp = exponent.strip_prefix('-').unwrap_or(exponent);
    assert!(!exp.is_empty() && exp.chars().all(|c| c.is_ascii_digit()), "{field:?}");
    // and the text is the shortest 17-digit form of the value it encodes
    let v: f64 = field.parse().unwrap();
    assert_eq!(format!("{v:.16e}"), field, "field does not round-trip");
}

#[test]
fn every_subcommand_runs_at_defaults() {
    let expected: &[(&str, &[&str])] = &[
        ("ball-setup", &["ball_axis.csv"]),
        ("isoflux-maximize", &["maximize_trace.csv"]),
        ("q-spectrum", &["q_spectrum.csv"]),
        ("wn-minimize", &["wn_family.csv", "wn_trace.csv"]),
        ("critical-fields", &["critical_fields.csv"]),
        ("optimal-n", &["optimal_n.csv"]),
        ("profile-gamma", &["profile.csv", "gamma_convergence.csv"]),
        ("perforated-check", &["perforated.csv"]),
        ("c-omega", &["c_omega.csv"]),
    ];
    for (cmd, artifacts) in expected {
        let dir = tempfile::tempdir().unwrap();
        let out = run_ok(&[cmd, "--out", dir.path().to_str().unwrap()]);
        for name in *artifacts {
            let path = dir.path().join(name);
            assert!(path.is_file(), "{cmd} did not write {name}");
            let (header, rows) = read_csv(&path);
            assert!(!header.is_empty(), "{name} lacks a header row");
            assert!(!rows.is_empty(), "{name} carries no data rows");
        }
        let echo = dir.path().join("resolved_config.txt");
        assert!(echo.is_file(), "{cmd} did not echo its resolved config");
        let echo_text = std::fs::read_to_string(&echo).unwrap();
        assert!(
            echo_text.lines().any(|l| l.starts_with("seed=")),
            "{cmd}: resolved config misses the seed"
        );
        assert!(
            !stdout_of(&out).is_empty(),
            "{cmd} printed no summary lines"
        );
    }
}

#[test]
fn critical_fields_table_has_the_ladder_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "critical-fields",
        "--set",
        "scenario.eps=1e-3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let (header, rows) = read_csv(&dir.path().join("critical_fields.csv"));
    assert_eq!(header, "N,k_N,H_N,g_eps_N");
    assert_eq!(rows.len(), 5);
    let mut prev_h = f64::NEG_INFINITY;
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row[0], (i + 1).to_string());
        let _k: f64 = row[1].parse().unwrap();
        let h: f64 = row[2].parse().unwrap();
        assert!(h > prev_h, "ladder not increasing at N={}", i + 1);
        prev_h = h;
        for field in &row[1..] {
            assert_full_precision(field);
        }
    }
    let text = stdout_of(&out);
    assert!(text.lines().any(|l| l.starts_with("h_1=")), "{text}");
    assert!(text.lines().any(|l| l == "monotone=true"), "{text}");
}

#[test]
fn wn_family_reaches_constant_root2_separation() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&["wn-minimize", "--out", dir.path().to_str().unwrap()]);
    let (header, rows) = read_csv(&dir.path().join("wn_family.csv"));
    assert_eq!(header, "curve_index,z,u_x,u_y");
    let mut curves: Vec<Vec<(f64, f64)>> = Vec::new();
    for row in &rows {
        let idx: usize = row[0].parse().unwrap();
        if curves.len() <= idx {
            curves.resize(idx + 1, Vec::new());
        }
        curves[idx].push((row[2].parse().unwrap(), row[3].parse().unwrap()));
    }
    assert_eq!(curves.len(), 2);
    assert_eq!(curves[0].len(), curves[1].len());
    let target = 2.0_f64.sqrt();
    for (a, b) in curves[0].iter().zip(&curves[1]) {
        let sep = (a.0 - b.0).hypot(a.1 - b.1);
        assert!(
            (sep - target).abs() <= 1e-4,
            "separation {sep} at some node"
        );
    }
    let (th, trace_rows) = read_csv(&dir.path().join("wn_trace.csv"));
    assert_eq!(th, "iter,energy,grad_norm,min_separation");
    assert!(trace_rows.len() >= 2);
}

#[test]
fn profile_gamma_emits_the_summary_contract() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&["profile-gamma", "--out", dir.path().to_str().unwrap()]);
    let text = stdout_of(&out);
    let line = text
        .lines()
        .find(|l| l.starts_with("gamma_est="))
        .unwrap_or_else(|| panic!("no gamma summary in {text:?}"));
    let rest = line.strip_prefix("gamma_est=").unwrap();
    let (gamma_s, err_s) = rest.split_once(" err=").unwrap();
    let gamma: f64 = gamma_s.parse().unwrap();
    let err: f64 = err_s.parse().unwrap();
    assert!((gamma - 1.1966).abs() < 1e-3, "gamma {gamma}");
    assert!(err.abs() < 1e-2, "window error {err}");

    let (ph, prows) = read_csv(&dir.path().join("profile.csv"));
    assert_eq!(ph, "r,f");
    assert!(prows.len() > 1000);
    let (gh, grows) = read_csv(&dir.path().join("gamma_convergence.csv"));
    assert_eq!(gh, "R,gamma_est");
    assert!(grows.len() >= 3);
}

#[test]
fn validation_problems_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    // unknown config key
    let out = bin()
        .args(["ball-setup", "--set", "geometry.ball.radius=0.1", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("unknown config key"), "{err}");

    // malformed --set pair
    let out = bin()
        .args(["ball-setup", "--set", "geometry.ball.rho", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unparsable value
    let out = bin()
        .args(["ball-setup", "--set", "geometry.ball.rho=big", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // config file with an unknown key
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "geometry.ball.rho=0.1\nnot.a.key=1\n").unwrap();
    let out = bin()
        .args(["ball-setup", "--config", cfg.to_str().unwrap(), "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));

    // unknown subcommand (argument parsing)
    let out = bin().args(["no-such-command"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solver_failures_exit_with_code_3() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    // iteration budget too small: non-convergence
    let out = bin()
        .args(["wn-minimize", "--set", "wn.max_iter=3", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("iterations"), "{err}");

    // unreachable tolerance: stagnation at the descent floor
    let out = bin()
        .args(["wn-minimize", "--set", "wn.grad_tol=0", "--out", out_dir])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no further energy decrease"), "{err}");
}

#[test]
fn artifacts_are_invariant_under_the_thread_cap() {
    let dir1 = tempfile::tempdir().unwrap();
    let dir2 = tempfile::tempdir().unwrap();
    let st = bin()
        .args(["perforated-check", "--out", dir1.path().to_str().unwrap()])
        .env("VFE_THREADS", "1")
        .output()
        .unwrap();
    assert!(st.status.success());
    let st = bin()
        .args(["perforated-check", "--out", dir2.path().to_str().unwrap()])
        .env("VFE_THREADS", "4")
        .output()
        .unwrap();
    assert!(st.status.success());
    let a = std::fs::read(dir1.path().join("perforated.csv")).unwrap();
    let b = std::fs::read(dir2.path().join("perforated.csv")).unwrap();
    assert_eq!(a, b, "thread count changed the reduction result");
}

#[test]
fn seed_flag_wins_over_the_config_key() {
    let dir_flag = tempfile::tempdir().unwrap();
    let dir_plain = tempfile::tempdir().unwrap();
    let cfg = dir_flag.path().join("seeded.cfg");
    std::fs::write(&cfg, "seed=5\n").unwrap();

    run_ok(&[
        "isoflux-maximize",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--out",
        dir_flag.path().to_str().unwrap(),
    ]);
    run_ok(&[
        "isoflux-maximize",
        "--seed",
        "7",
        "--out",
        dir_plain.path().to_str().unwrap(),
    ]);

    let echo = std::fs::read_to_string(dir_flag.path().join("resolved_config.txt")).unwrap();
    assert!(echo.lines().any(|l| l == "seed=7"), "{echo}");
    let a = std::fs::read(dir_flag.path().join("maximize_trace.csv")).unwrap();
    let b = std::fs::read(dir_plain.path().join("maximize_trace.csv")).unwrap();
    assert_eq!(a, b, "the --seed flag should fully determine the start");
}

#[test]
fn nested_output_directories_are_created() {
    let dir = tempfile::tempdir().unwrap();
    let nested = dir.path().join("a").join("b").join("c");
    run_ok(&["ball-setup", "--out", nested.to_str().unwrap()]);
    assert!(nested.join("ball_axis.csv").is_file());
    let (header, rows) = read_csv(&nested.join("ball_axis.csv"));
    assert_eq!(header, "s,z,g_perp,field_quad");
    for row in &rows {
        for field in row {
            assert_full_precision(field);
        }
    }
}

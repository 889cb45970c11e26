use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use chlab::experiments::{ExperimentResult, Verdict};
use chlab::io::{load_field, load_trajectory};
use chlab::littlewood_paley::{besov_norm, BesovParams};

const SMALL: [&str; 6] = ["--N", "4096", "--n-min", "3", "--n-max", "5"];

fn chlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chlab"))
        .args(args)
        .output()
        .expect("spawn chlab")
}

fn with_out<'a>(args: &[&'a str], out: &'a Path) -> Vec<&'a str> {
    let mut v = args.to_vec();
    v.extend(["--out", out.to_str().unwrap()]);
    v
}

#[test]
fn help_exits_zero() {
    assert_eq!(chlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn unknown_experiment_is_a_usage_error() {
    let out = chlab(&["experiment", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("scaling"), "{err}");
}

#[test]
fn unknown_config_key_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "[grid]\nwidth = 3\n").unwrap();
    let out = chlab(&with_out(
        &["experiment", "scaling", "--config", cfg.to_str().unwrap()],
        dir.path(),
    ));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("width"));
}

#[test]
fn band_violation_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = chlab(&with_out(
        &["construct", "--n", "8", "--N", "4096"],
        dir.path(),
    ));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn construct_solve_and_measure() {
    let dir = tempfile::tempdir().unwrap();
    let out = chlab(&with_out(
        &["construct", "--n", "4", "--N", "4096", "--n-max", "5"],
        dir.path(),
    ));
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    for name in ["f", "g", "u0", "v0"] {
        assert!(dir.path().join(format!("{name}_n4.bin")).exists());
    }

    let g_path = dir.path().join("g_n4.bin");
    let out = chlab(&["besov", "--input", g_path.to_str().unwrap(), "--N", "4096"]);
    assert_eq!(out.status.code(), Some(0));
    let printed: f64 = String::from_utf8(out.stdout)
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    let g = load_field(&g_path).unwrap();
    let direct = besov_norm(&g, BesovParams::new(2.0, 2.0, 2.0).unwrap()).unwrap();
    assert_eq!(printed, direct);

    let u0 = dir.path().join("u0_n4.bin");
    let sim = dir.path().join("sim");
    let out = chlab(&with_out(
        &[
            "solve",
            "--input",
            u0.to_str().unwrap(),
            "--records",
            "4",
            "--T",
            "0.1",
        ],
        &sim,
    ));
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let traj = load_trajectory(&sim.join("trajectory.bin")).unwrap();
    assert_eq!(traj.times.len(), 5);
    assert_eq!(traj.states[0].samples(), load_field(&u0).unwrap().samples());
    let csv = fs::read_to_string(sim.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 4096);

    let out = chlab(&[
        "besov",
        "--input",
        sim.join("trajectory.bin").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}

#[test]
fn missing_input_is_reported() {
    let out = chlab(&["besov", "--input", "/nonexistent/field.bin"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn experiment_writes_results_and_exit_code_tracks_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["scaling", "lower-bounds"] {
        let mut args = vec!["experiment", name];
        args.extend(SMALL);
        let out = chlab(&with_out(&args, dir.path()));
        let result = ExperimentResult::load(dir.path(), name).unwrap();
        let failed = result.verdicts.values().any(|v| *v == Verdict::Fail);
        assert_eq!(
            out.status.code(),
            Some(if failed { 1 } else { 0 }),
            "{name}"
        );
        assert!(dir.path().join(format!("{name}.csv")).exists());
        let stdout = String::from_utf8(out.stdout).unwrap();
        assert!(stdout.starts_with(&format!("{name} [{}]", result.config_digest)));
    }
    assert!(fs::read_dir(dir.path().join("plots")).unwrap().count() > 0);
    let scaling = ExperimentResult::load(dir.path(), "scaling").unwrap();
    assert!(scaling.passed());
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[grid]\nN = 8192\n[run]\nn_min = 3\nn_max = 5\nseed = 11\n",
    )
    .unwrap();
    let out = chlab(&with_out(
        &[
            "experiment",
            "scaling",
            "--config",
            cfg.to_str().unwrap(),
            "--N",
            "4096",
        ],
        dir.path(),
    ));
    assert_eq!(out.status.code(), Some(0), "{out:?}");
    let result = ExperimentResult::load(dir.path(), "scaling").unwrap();
    assert!(result.config.contains("N = 4096"));
    assert!(result.config.contains("seed = 11"));
}

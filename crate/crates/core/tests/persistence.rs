use std::fs;
use std::path::Path;

use chlab::evolution::{solve, Equation, SolverConfig};
use chlab::experiments::{emit_plotdata, run_all, ExperimentConfig, ExperimentResult};
use chlab::io::{load_field, load_trajectory, save_field, save_trajectory, write_trajectory_csv};
use chlab::spectral::{make_grid, Field};
use proptest::prelude::*;

/// A configuration small enough for a debug-speed rerun.
fn small_config() -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.apply_text(
        "[grid]\nN = 4096\n[run]\nn_min = 3\nn_max = 5\n\
         [solver]\nT = 0.2\nrecord_times = [0, 0.05, 0.1, 0.2]\n\
         [main]\nwindow = [0.05, 0.2]\n[products]\ntrials = 8\n",
    )
    .unwrap();
    cfg.validate().unwrap();
    cfg
}

fn persist_all(cfg: &ExperimentConfig, dir: &Path) -> Vec<ExperimentResult> {
    let results = run_all(cfg).unwrap();
    for r in &results {
        r.persist(dir).unwrap();
        emit_plotdata(r, &dir.join("plots")).unwrap();
    }
    results
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).unwrap().display().to_string();
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn consecutive_runs_are_byte_identical() {
    let cfg = small_config();
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    persist_all(&cfg, a.path());
    persist_all(&cfg, b.path());
    let ta = read_tree(a.path());
    let tb = read_tree(b.path());
    assert!(ta.len() >= 16, "{} files", ta.len());
    assert_eq!(
        ta.iter().map(|(n, _)| n).collect::<Vec<_>>(),
        tb.iter().map(|(n, _)| n).collect::<Vec<_>>()
    );
    for ((name, x), (_, y)) in ta.iter().zip(&tb) {
        assert!(x == y, "{name} differs");
    }
}

#[test]
fn persisted_results_load_back() {
    let cfg = small_config();
    let dir = tempfile::tempdir().unwrap();
    for r in persist_all(&cfg, dir.path()) {
        let back = ExperimentResult::load(dir.path(), &r.experiment).unwrap();
        assert_eq!(back.experiment, r.experiment);
        assert_eq!(back.config_digest, cfg.digest());
        assert_eq!(back.records.len(), r.records.len());
        assert_eq!(back.verdicts, r.verdicts);
        assert_eq!(back.to_json(), r.to_json());
        let csv = fs::read_to_string(dir.path().join(format!("{}.csv", r.experiment))).unwrap();
        assert!(csv.starts_with("experiment,n,t,norm_name,value\n"));
        assert_eq!(csv.lines().count(), r.records.len() + 1);
    }
}

#[test]
fn seed_changes_only_the_random_experiment() {
    let cfg = small_config();
    let mut other = cfg.clone();
    other.set("run", "seed", "7").unwrap();
    assert_ne!(cfg.digest(), other.digest());
    let a = run_all(&cfg).unwrap();
    let b = run_all(&other).unwrap();
    for (x, y) in a.iter().zip(&b) {
        let same = x.to_csv().unwrap() == y.to_csv().unwrap();
        assert_eq!(same, x.experiment != "products", "{}", x.experiment);
    }
}

#[test]
fn config_rejects_unknown_keys() {
    let mut cfg = ExperimentConfig::default();
    assert!(cfg.apply_text("[grid]\nM = 3\n").is_err());
    assert!(cfg.apply_text("[nowhere]\nL = 3\n").is_err());
    assert!(cfg.apply_text("L = 3\n").is_err());
}

#[test]
fn trajectory_files_round_trip() {
    let g = make_grid(8.0, 128).unwrap();
    let u0 = Field::from_fn(g, |x| 0.2 * (-(x * x)).exp()).unwrap();
    let traj = solve(
        &u0,
        &SolverConfig::new(0.2, Some(0.01), vec![0.0, 0.1, 0.2]),
        Equation::Ch,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.bin");
    save_trajectory(&path, &traj).unwrap();
    assert_eq!(load_trajectory(&path).unwrap(), traj);
    assert!(load_field(&path).is_err());
    let single = dir.path().join("u.bin");
    save_field(&single, &u0).unwrap();
    assert_eq!(load_field(&single).unwrap().samples(), u0.samples());

    let mut csv = Vec::new();
    write_trajectory_csv(&mut csv, &traj).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 128);
    let last = text.lines().last().unwrap();
    let v: f64 = last.split(',').nth(2).unwrap().parse().unwrap();
    assert_eq!(v, traj.states[2].samples()[127]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn config_text_round_trips(
        l in 8.0..128.0f64,
        log_n in 10u32..16,
        s in 1.6..4.0f64,
        seed in any::<u64>(),
        dt in 1e-4..0.05f64,
        trials in 1usize..200,
    ) {
        let mut cfg = ExperimentConfig::default();
        cfg.set("grid", "L", &l.to_string()).unwrap();
        cfg.set("grid", "N", &(1u64 << log_n).to_string()).unwrap();
        cfg.set("params", "s", &s.to_string()).unwrap();
        cfg.set("run", "seed", &seed.to_string()).unwrap();
        cfg.set("solver", "dt", &dt.to_string()).unwrap();
        cfg.set("products", "trials", &trials.to_string()).unwrap();
        let back = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        prop_assert_eq!(back.to_text(), cfg.to_text());
        prop_assert_eq!(back.digest(), cfg.digest());
    }
}

//! Acceptance report at the default configuration: one line per criterion.
//! Exits nonzero when a criterion fails, except for those listed in
//! `KNOWN_FAILURES`, which are reported as FAIL but do not abort the run.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use chlab::constructions::{bump_profile, lemma_m_quantity};
use chlab::evolution::{solve_transport, Equation, Steady};
use chlab::experiments::products::random_field;
use chlab::experiments::{
    emit_plotdata, Experiment, ExperimentConfig, ExperimentResult, Lab, Verdict,
};
use chlab::littlewood_paley::LittlewoodPaley;
use chlab::spectral::{make_grid, to_field, Field};
use common::{conservation_drift, max_diff, phi_sq_l2_squared_oracle, rk4_order_study};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The short-time rate of `‖u(t) - u₀ - t v₀‖` is 1, not 2, because
/// `v₀ = -u₀∂u₀` leaves out the nonlocal term of the true `∂_t u(0)`.
const KNOWN_FAILURES: [u32; 1] = [7];

struct Line {
    k: u32,
    pass: bool,
    detail: String,
}

fn verdicts_pass(r: &ExperimentResult, names: &[&str]) -> bool {
    names
        .iter()
        .all(|n| r.verdicts.get(*n) == Some(&Verdict::Pass))
}

fn c(r: &ExperimentResult, name: &str) -> f64 {
    r.constants.get(name).copied().unwrap_or(f64::NAN)
}

fn slope(r: &ExperimentResult, name: &str) -> f64 {
    r.fits.get(name).map(|f| f.slope).unwrap_or(f64::NAN)
}

fn persist(results: &[ExperimentResult], dir: &Path) {
    for r in results {
        r.persist(dir).expect("persist");
        emit_plotdata(r, &dir.join("plots")).expect("plot data");
    }
}

fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in fs::read_dir(&d).expect("read dir") {
            let p = entry.expect("entry").path();
            if p.is_dir() {
                stack.push(p);
            } else {
                let rel = p.strip_prefix(dir).expect("prefix").display().to_string();
                out.insert(rel, fs::read(&p).expect("read"));
            }
        }
    }
    out
}

fn criterion_1(cfg: &ExperimentConfig) -> Line {
    let grid = cfg.grid().expect("grid");
    let lp = LittlewoodPaley::for_grid(grid);
    let partition = lp
        .partition_sum()
        .iter()
        .map(|v| (v - 1.0).abs())
        .fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut recon = 0.0f64;
    for _ in 0..100 {
        let u = to_field(&random_field(&mut rng, grid, grid.nyquist()).expect("field"));
        let sum = lp
            .decompose(&u)
            .expect("decompose")
            .reconstruct()
            .expect("blocks");
        recon = recon.max(max_diff(&sum, &u) / u.max_abs());
    }
    Line {
        k: 1,
        pass: partition <= 1e-12 && recon <= 1e-10,
        detail: format!(
            "partition {partition:.2e} (<= 1e-12), reconstruction {recon:.2e} (<= 1e-10)"
        ),
    }
}

fn criterion_3(lab: &Lab, lower: &ExperimentResult) -> Line {
    let oracle = phi_sq_l2_squared_oracle();
    let bump = bump_profile(lab.grid()).expect("bump");
    let worst = lab
        .sets()
        .iter()
        .filter(|s| s.n >= 6)
        .map(|s| {
            let m = lemma_m_quantity(&bump, s.n, 2.0).expect("M");
            (m * m / (0.5 * oracle) - 1.0).abs()
        })
        .fold(0.0, f64::max);
    let pass =
        verdicts_pass(lower, &["cos_mean_full_periods", "cos_mean_p1_rate"]) && worst <= 0.05;
    Line {
        k: 3,
        pass,
        detail: format!(
            "cos_mean(2,k*pi) {}, cos_mean(1,X) rate {}, |M^2/(phi^4/2) - 1| {worst:.2e} (<= 0.05, quadrature oracle)",
            lower.verdicts["cos_mean_full_periods"].as_str(),
            lower.verdicts["cos_mean_p1_rate"].as_str()
        ),
    }
}

fn criterion_5(lab: &Lab) -> Line {
    let grid = lab.grid();
    let mut mass = 0.0f64;
    let mut energy = 0.0f64;
    for set in [&lab.sets()[0], lab.sets().last().expect("sets")] {
        let (m, e) = conservation_drift(&set.u0, 0.5, lab.config().dt);
        mass = mass.max(m);
        energy = energy.max(e);
    }
    let circle = make_grid(std::f64::consts::PI, 128).expect("grid");
    let smooth = Field::from_fn(circle, |x| 0.5 + 0.3 * x.sin()).expect("field");
    let (m, e) = conservation_drift(&smooth, 0.5, 0.004);
    mass = mass.max(m);
    energy = energy.max(e);

    let (_, o1) = rk4_order_study(&smooth, 0.5, 0.016, Equation::Ch);
    let (_, o2) = rk4_order_study(&lab.sets()[0].u0, 0.5, 0.1, Equation::Ch);
    let order = o1.iter().chain(&o2).cloned().fold(f64::INFINITY, f64::min);

    let speed = 0.75;
    let t = 0.5;
    let profile = |x: f64| (-(x * x)).exp();
    let f0 = Field::from_fn(grid, profile).expect("field");
    let traj = solve_transport(
        &f0,
        &Steady(Field::from_fn(grid, |_| speed).expect("field")),
        &Steady(Field::zeros(grid)),
        &[0.0, t],
        1e-3,
    )
    .expect("transport");
    let exact = Field::from_fn(grid, |x| profile(x - speed * t)).expect("field");
    let shift = max_diff(traj.final_state().expect("state"), &exact);

    Line {
        k: 5,
        pass: mass <= 1e-8 && energy <= 1e-8 && order >= 3.8 && shift <= 1e-8,
        detail: format!(
            "mass drift {mass:.2e}, H1 drift {energy:.2e} (<= 1e-8), RK4 order {order:.3} (>= 3.8), translation {shift:.2e} (<= 1e-8)"
        ),
    }
}

fn main() -> ExitCode {
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    let lab = Lab::new(&cfg).expect("lab");
    let mut results = BTreeMap::new();
    for e in Experiment::ALL {
        let r = e.run(&lab).expect("experiment");
        results.insert(e.name(), r);
    }
    let get = |name: &str| &results[name];

    let mut lines = vec![criterion_1(&cfg)];

    let sc = get("scaling");
    lines.push(Line {
        k: 2,
        pass: verdicts_pass(
            sc,
            &["off_block", "slope_sm1", "slope_s", "slope_sp1", "bound"],
        ),
        detail: format!(
            "off-block {:.2e} (<= 1e-10), slopes {:.4}/{:.4}/{:.4} (-1/0/1 +- 0.05), bound {}",
            c(sc, "off_block_max"),
            slope(sc, "slope_sm1"),
            slope(sc, "slope_s"),
            slope(sc, "slope_sp1"),
            sc.verdicts["bound"].as_str()
        ),
    });

    let lower = get("lower-bounds");
    lines.push(criterion_3(&lab, lower));
    lines.push(Line {
        k: 4,
        pass: verdicts_pass(
            lower,
            &[
                "single_block_identity",
                "M_tilde_positive",
                "M_tilde_stable",
            ],
        ),
        detail: format!(
            "identity residual {:.2e} (<= 1e-10), M_tilde {:.6} (> 0), spread {:.2e} (<= 0.10)",
            c(lower, "single_block_residual_max"),
            c(lower, "M_tilde"),
            c(lower, "M_tilde_spread")
        ),
    });

    lines.push(criterion_5(&lab));

    let p1 = get("prop1");
    lines.push(Line {
        k: 6,
        pass: verdicts_pass(p1, &["dist_slope", "plus_slope", "minus_slope"]),
        detail: format!(
            "distance slope {:.4} (<= {:.2}), B^(s+1) slope {:.4}, B^(s-1) slope {:.4} (+-1 +- 0.15)",
            slope(p1, "dist_slope"),
            c(p1, "dist_slope_bound"),
            slope(p1, "plus_slope"),
            slope(p1, "minus_slope")
        ),
    });

    let p2 = get("prop2");
    lines.push(Line {
        k: 7,
        pass: verdicts_pass(p2, &["two_term_residual", "offset_slope", "small_t_slope"]),
        detail: format!(
            "two-term residual {:.3} (<= 0.10), offset slope {} (<= {:.2}), small-t slope {:.3} (2 +- 0.1); \
             with the nonlocal term in v0: residual {:.3}, small-t slope {:.3}",
            c(p2, "two_term_residual"),
            p2.fits
                .get("offset_slope")
                .map(|f| format!("{:.3}", f.slope))
                .unwrap_or_else(|| "undefined".into()),
            c(p2, "offset_slope_bound"),
            c(p2, "small_t_slope"),
            c(p2, "two_term_residual_with_P"),
            slope(p2, &format!("small_t_slope_with_P_n{}", cfg.n_max)),
        ),
    });

    let main = get("main");
    lines.push(Line {
        k: 8,
        pass: verdicts_pass(main, &["D0_slope", "lower_bound", "c0_leading_term", "g_bound"]),
        detail: format!(
            "D(n,0) slope {:.4} (-1 +- 0.1), c0 {:.6} (> 0), c0/leading {:.4} (within 2x), g bound {}",
            slope(main, "D0_slope"),
            c(main, "c0"),
            c(main, "c0_over_leading"),
            main.verdicts["g_bound"].as_str()
        ),
    });

    let first = tempfile::tempdir().expect("tempdir");
    let second = tempfile::tempdir().expect("tempdir");
    let ordered: Vec<ExperimentResult> = Experiment::ALL
        .iter()
        .map(|e| results[e.name()].clone())
        .collect();
    persist(&ordered, first.path());
    let rerun = chlab::experiments::run_all(&cfg).expect("rerun");
    persist(&rerun, second.path());
    let (a, b) = (tree(first.path()), tree(second.path()));
    let differing: Vec<&String> = a
        .iter()
        .filter(|(name, bytes)| b.get(*name) != Some(*bytes))
        .map(|(name, _)| name)
        .collect();
    lines.push(Line {
        k: 9,
        pass: a.len() == b.len() && differing.is_empty() && !a.is_empty(),
        detail: format!("{} files compared, {} differ", a.len(), differing.len()),
    });

    let products = get("products");
    let transport = get("transport");
    lines.push(Line {
        k: 10,
        pass: verdicts_pass(products, &["C_finite", "N_doubling"])
            && verdicts_pass(transport, &["C_finite", "dt_stable"]),
        detail: format!(
            "C_le1 {:.3e}/{:.3e}, C_le1_p {:.3e}/{:.3e}, C_le2 {:.3e}/{:.3e} (N, 2N), transport C {:.2e}/{:.2e} (forced/pure), dt-halving {}",
            c(products, "C_le1"),
            c(products, "C_le1_refined"),
            c(products, "C_le1_p"),
            c(products, "C_le1_p_refined"),
            c(products, "C_le2"),
            c(products, "C_le2_refined"),
            c(transport, "C_forced_max"),
            c(transport, "C_pure_max"),
            transport.verdicts["dt_stable"].as_str()
        ),
    });

    let mut unexpected = Vec::new();
    for line in &lines {
        let status = if line.pass { "PASS" } else { "FAIL" };
        let known = KNOWN_FAILURES.contains(&line.k);
        let tag = match (line.pass, known) {
            (false, true) => " [known failure]",
            (true, true) => " [known failure now passes]",
            _ => "",
        };
        println!("criterion {}: {status}{tag} {}", line.k, line.detail);
        if !line.pass && !known {
            unexpected.push(line.k);
        }
    }
    println!(
        "acceptance finished in {:.1} s",
        start.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}

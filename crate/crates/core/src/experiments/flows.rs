//! Experiments on solved flows: approximation of `S_t(f_n)`, the error
//! `w_n`, and the separation `D(n, t)` of the two flows.

use rayon::prelude::*;

use super::lab::Lab;
use super::result::ExperimentResult;
use super::thresholds::*;
use crate::error::Result;
use crate::evolution::{solve, Equation, SolverConfig};
use crate::fit::{log2_slope, loglog_slope, quadratic_with_offsets};
use crate::spectral::{lp_norm, nonlocal_p, Field};

/// `S_t(u₀) - u₀ - t v₀`.
fn w(state: &Field, u0: &Field, v0: &Field, t: f64) -> Result<Field> {
    (state - u0).axpy(-t, v0)
}

pub fn prop1(lab: &Lab) -> Result<ExperimentResult> {
    let cfg = lab.config();
    let params = lab.params();
    let s = params.s;
    let mut res = ExperimentResult::new("prop1", cfg);
    let flows = lab.flows(Equation::Ch)?;
    let ns = lab.ns();

    let mut dist_sup = Vec::new();
    let mut plus_sup = Vec::new();
    let mut minus_sup = Vec::new();
    let mut norm_sup = 0.0f64;
    let mut ratio_sup = 0.0f64;
    let mut zero_at_start = true;
    for (set, fl) in lab.sets().iter().zip(flows.iter()) {
        let n = Some(set.n);
        let f_norm = lab.besov(&set.f, params)?;
        let (mut d, mut pl, mut mi) = (0.0f64, 0.0f64, 0.0f64);
        for (&t, state) in fl.f.times.iter().zip(&fl.f.states) {
            let dist = lab.besov(&(state - &set.f), params)?;
            let norm = lab.besov(state, params)?;
            let plus = lab.besov(state, params.with_s(s + 1.0))?;
            let minus = lab.besov(state, params.with_s(s - 1.0))?;
            res.record(n, Some(t), "dist_Bs", dist);
            res.record(n, Some(t), "norm_Bs", norm);
            res.record(n, Some(t), "norm_Bsp1", plus);
            res.record(n, Some(t), "norm_Bsm1", minus);
            if t == 0.0 {
                zero_at_start &= dist == 0.0;
            }
            d = d.max(dist);
            pl = pl.max(plus);
            mi = mi.max(minus);
            norm_sup = norm_sup.max(norm);
            ratio_sup = ratio_sup.max(norm / f_norm);
        }
        res.record(n, None, "sup_dist_Bs", d);
        dist_sup.push(d);
        plus_sup.push(pl);
        minus_sup.push(mi);
    }
    res.check("dist_zero_at_t0", zero_at_start);

    let dist_fit = log2_slope(&ns, &dist_sup)?;
    let predicted = -(s - 1.5) / 2.0;
    res.fit("dist_slope", dist_fit);
    res.constant("dist_slope_bound", predicted + SLOPE_MARGIN);
    res.check("dist_slope", dist_fit.slope <= predicted + SLOPE_MARGIN);

    // Second harmonic 2ω_n beyond the dealiasing cutoff is discarded by the
    // Galerkin truncation, which shrinks the distance artificially.
    let cutoff = lab.grid().dealias_cutoff();
    let resolved: Vec<usize> = (0..ns.len())
        .filter(|&i| 2.0 * crate::constructions::carrier_frequency(lab.sets()[i].n) + 1.0 <= cutoff)
        .collect();
    if resolved.len() >= 2 {
        let xs: Vec<f64> = resolved.iter().map(|&i| ns[i]).collect();
        let ys: Vec<f64> = resolved.iter().map(|&i| dist_sup[i]).collect();
        res.fit("dist_slope_harmonic_resolved", log2_slope(&xs, &ys)?);
        res.info("dist_slope_harmonic_resolved");
    }
    if resolved.len() < ns.len() {
        res.note(format!(
            "for n > {} the second harmonic 2*omega_n exceeds the dealiasing cutoff {cutoff:.1}; \
             the measured distance there reflects the truncated flow",
            resolved.last().map(|&i| lab.sets()[i].n).unwrap_or(0)
        ));
    }

    for (name, ys, expected) in [
        ("plus_slope", &plus_sup, 1.0),
        ("minus_slope", &minus_sup, -1.0),
    ] {
        let fit = log2_slope(&ns, ys)?;
        res.fit(name, fit);
        res.check(name, (fit.slope - expected).abs() <= SLOPE_MARGIN);
    }
    res.constant("sup_norm_Bs", norm_sup);
    res.constant("sup_ratio_Bs", ratio_sup);
    res.info("uniform_Bs_bound");
    Ok(res)
}

pub fn prop2(lab: &Lab) -> Result<ExperimentResult> {
    let cfg = lab.config();
    let params = lab.params();
    let s = params.s;
    let mut res = ExperimentResult::new("prop2", cfg);
    let flows = lab.flows(Equation::Ch)?;
    let ns = lab.ns();

    let mut samples = Vec::new();
    let mut samples_p = Vec::new();
    let mut zero_at_start = true;
    for (set, fl) in lab.sets().iter().zip(flows.iter()) {
        let n = Some(set.n);
        let p_u0 = nonlocal_p(&set.u0);
        for (&t, state) in fl.u.times.iter().zip(&fl.u.states) {
            let wn = w(state, &set.u0, &set.v0, t)?;
            let ws = lab.besov(&wn, params)?;
            let wm = lab.besov(&wn, params.with_s(s - 1.0))?;
            res.record(n, Some(t), "w_Bs", ws);
            res.record(n, Some(t), "w_Bsm1", wm);
            if t == 0.0 {
                zero_at_start &= wn.max_abs() == 0.0;
            } else {
                samples.push((set.n, t, ws));
                let wp = lab.besov(&wn.axpy(-t, &p_u0)?, params)?;
                res.record(n, Some(t), "w_with_P_Bs", wp);
                samples_p.push((set.n, t, wp));
            }
        }
        res.record(n, None, "P_u0_Bs", lab.besov(&p_u0, params)?);
    }
    res.check("w_zero_at_t0", zero_at_start);

    let two = quadratic_with_offsets(&samples)?;
    res.constant("two_term_a", two.a);
    res.constant("two_term_residual", two.relative_residual);
    res.check(
        "two_term_residual",
        two.relative_residual <= TWO_TERM_RESIDUAL,
    );
    for &(n, b) in &two.offsets {
        res.record(Some(n), None, "two_term_b", b);
    }
    let offsets: Vec<f64> = two.offsets.iter().map(|(_, b)| *b).collect();
    let predicted = -(s - 1.5).min(1.0);
    res.constant("offset_slope_bound", predicted + SLOPE_MARGIN);
    match log2_slope(&ns, &offsets) {
        Ok(fit) => {
            res.fit("offset_slope", fit);
            res.check("offset_slope", fit.slope <= predicted + SLOPE_MARGIN);
        }
        Err(_) => {
            res.check("offset_slope", false);
            res.note("two-term offsets b(n) are not all positive; no log2 slope exists");
        }
    }

    // Same model for S_t(u₀) - u₀ - t(v₀ + P(u₀)), which has no linear term.
    let two_p = quadratic_with_offsets(&samples_p)?;
    res.constant("two_term_residual_with_P", two_p.relative_residual);
    let offsets_p: Vec<f64> = two_p.offsets.iter().map(|(_, b)| *b).collect();
    if let Ok(fit) = log2_slope(&ns, &offsets_p) {
        res.fit("offset_slope_with_P", fit);
    }
    res.info("with_P_diagnostic");

    // Short-time Taylor check with a finer step.
    let small = &cfg.small_times;
    let final_time = *small.last().expect("validated nonempty");
    let mut times = vec![0.0];
    times.extend_from_slice(small);
    let mut sc = SolverConfig::new(final_time, Some(cfg.small_dt), times);
    sc.cfl = cfg.cfl;
    sc.blowup_factor = cfg.blowup_factor;
    let short: Vec<Vec<(f64, f64)>> = lab
        .sets()
        .par_iter()
        .map(|set| {
            let traj = solve(&set.u0, &sc, Equation::Ch)?;
            let p_u0 = nonlocal_p(&set.u0);
            traj.times
                .iter()
                .zip(&traj.states)
                .skip(1)
                .map(|(&t, state)| {
                    let wn = w(state, &set.u0, &set.v0, t)?;
                    Ok((
                        lab.besov(&wn, params)?,
                        lab.besov(&wn.axpy(-t, &p_u0)?, params)?,
                    ))
                })
                .collect::<Result<Vec<(f64, f64)>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let n_max = cfg.n_max;
    for (set, pairs) in lab.sets().iter().zip(&short) {
        let (ws, wps): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        for ((&t, &v), &vp) in small.iter().zip(&ws).zip(&wps) {
            res.record(Some(set.n), Some(t), "w_Bs_small", v);
            res.record(Some(set.n), Some(t), "w_with_P_Bs_small", vp);
        }
        let fit = loglog_slope(small, &ws)?;
        res.fit(&format!("small_t_slope_n{}", set.n), fit);
        if let Ok(fit_p) = loglog_slope(small, &wps) {
            res.fit(&format!("small_t_slope_with_P_n{}", set.n), fit_p);
        }
        if set.n == n_max {
            res.constant("small_t_slope", fit.slope);
            res.check(
                "small_t_slope",
                (fit.slope - SMALL_T_SLOPE).abs() <= SMALL_T_SLOPE_TOL,
            );
        }
    }

    let (a, b) = cfg.window;
    let top = flows.last().expect("at least three n");
    let top_set = lab.sets().last().expect("at least three n");
    let (wt, wv): (Vec<f64>, Vec<f64>) = top
        .u
        .times
        .iter()
        .zip(&top.u.states)
        .filter(|(t, _)| **t >= a && **t <= b)
        .map(|(&t, st)| Ok((t, lab.besov(&w(st, &top_set.u0, &top_set.v0, t)?, params)?)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .unzip();
    if wt.len() >= 2 {
        res.fit("window_slope", loglog_slope(&wt, &wv)?);
        res.info("window_slope");
    }

    for &t in cfg.record_times.iter().filter(|t| **t > 0.0) {
        let ys: Vec<f64> = lab
            .sets()
            .iter()
            .map(|set| res.value("w_Bsm1", Some(set.n), Some(t)).unwrap_or(0.0))
            .collect();
        if let Ok(fit) = log2_slope(&ns, &ys) {
            res.fit(&format!("w_Bsm1_slope_t{t}"), fit);
        }
    }
    res.info("w_Bsm1_bound");
    res.note(
        "v0 = -u0 u0_x omits the nonlocal term P(u0), so w_n = t P(u0) + O(t^2); \
         P_u0_Bs records the size of that linear part.",
    );
    Ok(res)
}

/// Separation of the flows from `f_n + g_n` and `f_n`.
pub fn separation(lab: &Lab, equation: Equation) -> Result<ExperimentResult> {
    let cfg = lab.config();
    let params = lab.params();
    let inf = params.with_r(f64::INFINITY);
    let name = match equation {
        Equation::Ch => "main",
        Equation::Dp => "dp",
    };
    let mut res = ExperimentResult::new(name, cfg);
    let flows = lab.flows(equation)?;
    let ns = lab.ns();

    let mut d0 = Vec::new();
    let mut gdf_terms = Vec::new();
    let mut d0_ok = true;
    let mut triangle_ok = true;
    let mut decomposition_ok = true;
    for (set, fl) in lab.sets().iter().zip(flows.iter()) {
        let n = Some(set.n);
        let g_norm = lab.besov(&set.g, params)?;
        let v0_r = lab.besov(&set.v0, params)?;
        let v0_inf = lab.besov(&set.v0, inf)?;
        res.record(n, None, "g_Bs", g_norm);
        res.record(n, None, "v0_Bs", v0_r);
        res.record(n, None, "v0_Bs_inf", v0_inf);
        let terms = set.v0_terms()?;
        let mut term_norms = [0.0; 4];
        for ((label, term), slot) in ["fdf", "fdg", "gdg", "gdf"]
            .iter()
            .zip(&terms)
            .zip(&mut term_norms)
        {
            *slot = lab.besov(term, inf)?;
            res.record(n, None, &format!("term_{label}"), *slot);
        }
        let lower = term_norms[3] - term_norms[0] - term_norms[1] - term_norms[2];
        res.record(n, None, "v0_lower_estimate", lower);
        decomposition_ok &= v0_inf >= lower * (1.0 - 1e-12);
        gdf_terms.push(term_norms[3]);

        for (i, &t) in fl.u.times.iter().enumerate() {
            let su = &fl.u.states[i];
            let sf = &fl.f.states[i];
            let d = lab.besov(&(su - sf), params)?;
            let dist_f = lab.besov(&(sf - &set.f), params)?;
            let wn = lab.besov(&w(su, &set.u0, &set.v0, t)?, params)?;
            res.record(n, Some(t), "D", d);
            res.record(n, Some(t), "t_v0_Bs_inf", t * v0_inf);
            res.record(n, Some(t), "dist_f", dist_f);
            res.record(n, Some(t), "w_Bs", wn);
            let slack = 1e-12 * (d + t * v0_r + g_norm + dist_f + wn) + 1e-300;
            triangle_ok &= (d - t * v0_r).abs() <= g_norm + dist_f + wn + slack;
            if t == 0.0 {
                d0_ok &= (d - g_norm).abs() <= INITIAL_DISTANCE;
                d0.push(d);
            }
        }
    }
    res.check("D0_equals_g", d0_ok);
    res.check("triangle", triangle_ok);
    res.check("v0_decomposition", decomposition_ok);

    let decay = log2_slope(&ns, &d0)?;
    res.fit("D0_slope", decay);
    let decay_tol = match equation {
        Equation::Ch => DECAY_SLOPE_TOL,
        Equation::Dp => SLOPE_MARGIN,
    };
    res.check("D0_slope", (decay.slope + 1.0).abs() <= decay_tol);

    let (a, b) = cfg.window;
    let top = flows.last().expect("at least three n");
    let top_set = lab.sets().last().expect("at least three n");
    let c0 = top
        .u
        .times
        .iter()
        .filter(|t| **t >= a && **t <= b)
        .map(|&t| res.value("D", Some(top_set.n), Some(t)).expect("recorded") / t)
        .fold(f64::INFINITY, f64::min);
    res.constant("c0", c0);
    res.constant("window_start", a);
    res.constant("window_end", b);
    res.check("lower_bound", c0 > 0.0 && c0.is_finite());

    let leading = *gdf_terms.last().expect("at least three n");
    let m_tilde = gdf_terms[gdf_terms.len() - 3..]
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    res.constant("leading_term", leading);
    res.constant("M_tilde", m_tilde);
    res.constant("c0_over_leading", c0 / leading);
    let consistent = c0 / leading <= LEADING_TERM_FACTOR && leading / c0 <= LEADING_TERM_FACTOR;
    match equation {
        Equation::Ch => {
            res.check("c0_leading_term", consistent);
            res.check("c0_vs_M_tilde", c0 >= 0.5 * m_tilde);
        }
        Equation::Dp => {
            res.info("c0_leading_term");
            res.info("c0_vs_M_tilde");
        }
    }

    let phi_lp = lp_norm(lab.bump().phi(), params.p)?;
    let g_top = res.value("g_Bs", Some(top_set.n), None).expect("recorded");
    let g_bound = 2f64.powf(-(top_set.n as f64) - params.s) * (12.0 / 17.0) * phi_lp;
    res.constant("g_bound", g_bound);
    res.check("g_bound", g_top <= g_bound * (1.0 + 1e-6));
    res.note(format!(
        "c0 is the minimum of D(n_max, t)/t over recorded t in [{a}, {b}]; the window is an \
         implementation choice since the lower bound is asserted only for small t."
    ));
    Ok(res)
}

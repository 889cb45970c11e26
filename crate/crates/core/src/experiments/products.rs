//! Empirical constants of the product estimates on random band-limited
//! pairs.
//!
//! Each field has coefficients `û(ξ_k) = A e^{-(|ξ_k| - ξ_c)² / (2w²)} z_k`
//! for `0 < |ξ_k| < ξ_max/3`, with `z_k` standard complex normal (made
//! Hermitian), `ξ_c` uniform in `[0, ξ_max/3)` and `w` uniform in
//! `[0.5, 8]`; `A` normalizes `max|u| = 1`. Products then stay inside the
//! dealiasing band, so every product is computed exactly.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::lab::Lab;
use super::result::ExperimentResult;
use super::thresholds::REFINEMENT_FACTOR;
use crate::error::Result;
use crate::littlewood_paley::{BesovParams, LittlewoodPaley};
use crate::spectral::{nonlocal_p, product, Field, GridSpec, Spectrum};

/// Ratio labels: the product estimate, its corollary for `P`, and the
/// algebra estimate with `L^∞` factors.
pub const RATIOS: [&str; 3] = ["le1", "le1_p", "le2"];

/// `num / den`, or `None` when the denominator vanishes.
pub fn guarded_ratio(num: f64, den: f64) -> Option<f64> {
    if den > 0.0 && den.is_finite() {
        Some(num / den)
    } else {
        None
    }
}

/// The three ratios for a pair; `None` where a ratio is 0/0.
pub fn product_ratios(
    lp: &LittlewoodPaley,
    u: &Field,
    v: &Field,
    params: BesovParams,
) -> Result<[Option<f64>; 3]> {
    let s = params.s;
    let at = |x: &Field, sigma: f64| lp.besov_norm(x, params.with_s(sigma));
    let uv = product(u, v)?;
    let le1 = guarded_ratio(at(&uv, s - 2.0)?, at(u, s - 2.0)? * at(v, s - 1.0)?);
    let diff = u - v;
    let sum = u + v;
    let dp = &nonlocal_p(u) - &nonlocal_p(v);
    let le1_p = guarded_ratio(at(&dp, s - 1.0)?, at(&diff, s - 1.0)? * at(&sum, s)?);
    let le2 = guarded_ratio(
        at(&uv, s)?,
        at(u, s)? * v.max_abs() + at(v, s)? * u.max_abs(),
    );
    Ok([le1, le1_p, le2])
}

/// Draws one random band-limited field following the module description.
pub fn random_field(rng: &mut impl Rng, grid: GridSpec, band: f64) -> Result<Spectrum> {
    let center = rng.gen_range(0.0..band);
    let width = rng.gen_range(0.5..8.0);
    let kmax = (band / grid.dxi()).ceil() as i64;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.points()];
    let n = grid.points() as i64;
    for k in 1..=kmax {
        let xi = k as f64 * grid.dxi();
        if xi >= band {
            break;
        }
        let env = (-(xi - center).powi(2) / (2.0 * width * width)).exp();
        let z = Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)) * env;
        coeffs[k as usize] = z;
        coeffs[(n - k) as usize] = z.conj();
    }
    let spec = Spectrum::new(grid, coeffs)?;
    let peak = spec.to_field().max_abs();
    let scale = if peak > 0.0 { 1.0 / peak } else { 1.0 };
    Spectrum::new(
        grid,
        spec.coefficients().iter().map(|c| c * scale).collect(),
    )
}

pub fn product_estimates(lab: &Lab) -> Result<ExperimentResult> {
    let cfg = lab.config();
    let params = lab.params();
    let mut res = ExperimentResult::new("products", cfg);
    let base = lab.grid();
    let refined = base.refined();
    let band = base.nyquist() / 3.0;
    res.constant("band", band);

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pairs = (0..cfg.trials)
        .map(|_| {
            Ok((
                random_field(&mut rng, base, band)?,
                random_field(&mut rng, base, band)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let lp_base = LittlewoodPaley::for_grid(base);
    let lp_fine = LittlewoodPaley::for_grid(refined);
    let ratios = pairs
        .par_iter()
        .map(|(a, b)| {
            let coarse = product_ratios(&lp_base, &a.to_field(), &b.to_field(), params)?;
            let fine = product_ratios(
                &lp_fine,
                &a.resample(refined)?.to_field(),
                &b.resample(refined)?.to_field(),
                params,
            )?;
            Ok((coarse, fine))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut finite = true;
    let mut stable = true;
    for (r, name) in RATIOS.iter().enumerate() {
        let mut c_base = 0.0f64;
        let mut c_fine = 0.0f64;
        for (trial, (coarse, fine)) in ratios.iter().enumerate() {
            if let Some(v) = coarse[r] {
                res.record(None, None, &format!("{name}_ratio_{trial:03}"), v);
                c_base = c_base.max(v);
            }
            if let Some(v) = fine[r] {
                res.record(None, None, &format!("{name}_ratio_refined_{trial:03}"), v);
                c_fine = c_fine.max(v);
            }
        }
        res.constant(&format!("C_{name}"), c_base);
        res.constant(&format!("C_{name}_refined"), c_fine);
        finite &= c_base.is_finite() && c_fine.is_finite() && c_base > 0.0;
        stable &= c_fine <= REFINEMENT_FACTOR * c_base && c_base <= REFINEMENT_FACTOR * c_fine;
    }
    res.check("C_finite", finite);
    res.check("N_doubling", stable);
    Ok(res)
}

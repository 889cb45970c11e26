//! Explicit initial data: the bump profile `φ`, the high-frequency wave
//! `f_n = 2^{-ns} φ(x) sin(ω_n x)`, the low-frequency companion
//! `g_n = (12/17) 2^{-n} φ(x)` with `ω_n = (17/12) 2^n`, and the scalar
//! quantities built from them.
//!
//! Everything is synthesized in frequency space from the continuum symbol
//! `φ̂`, so spectral supports are exact on the torus.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::littlewood_paley::{smooth_step, BesovParams, LittlewoodPaley};
use crate::quadrature::integrate;
use crate::spectral::{
    derivative, imaginary_residue, lp_norm, product, to_field, Field, GridSpec, Spectrum,
};

/// Required number of grid frequencies strictly inside `|ξ| < 1/2`.
pub const MIN_BUMP_SAMPLES: usize = 16;

/// `φ̂`: 1 on `|ξ| ≤ 1/4`, 0 on `|ξ| ≥ 1/2`, smooth step between.
pub fn phi_hat(xi: f64) -> f64 {
    smooth_step((0.5 - xi.abs()) / 0.25)
}

/// `ω_n = 17·2^n / 12`.
pub fn carrier_frequency(n: u32) -> f64 {
    17.0 * 2f64.powi(n as i32) / 12.0
}

/// Largest `n` with `ω_n + 1 ≤ (2/3) ξ_max`.
pub fn max_admissible_n(grid: &GridSpec) -> i64 {
    let cutoff = grid.dealias_cutoff();
    let mut n: i64 = -1;
    while carrier_frequency((n + 1) as u32) + 1.0 <= cutoff {
        n += 1;
        if n > 60 {
            break;
        }
    }
    n
}

fn check_band(n: u32, grid: &GridSpec) -> Result<()> {
    let frequency = carrier_frequency(n);
    let cutoff = grid.dealias_cutoff();
    if frequency + 1.0 > cutoff {
        return Err(LabError::BandViolation {
            n,
            frequency,
            cutoff,
            max_n: max_admissible_n(grid),
        });
    }
    Ok(())
}

/// The profile `φ` on a grid.
#[derive(Debug, Clone)]
pub struct BumpProfile {
    phi: Field,
}

impl BumpProfile {
    pub fn phi(&self) -> &Field {
        &self.phi
    }

    pub fn grid(&self) -> GridSpec {
        self.phi.grid()
    }

    pub fn phi_hat(&self, xi: f64) -> f64 {
        phi_hat(xi)
    }

    /// `φ(0)`, read off the grid point `x = 0`.
    pub fn value_at_origin(&self) -> f64 {
        self.phi.samples()[self.grid().points() / 2]
    }

    /// Largest grid radius `δ` with `φ ≥ ‖φ‖_∞ / 2` on `|x| < δ`.
    pub fn half_height_radius(&self) -> f64 {
        let g = self.grid();
        let half = 0.5 * self.phi.max_abs();
        let mid = g.points() / 2;
        let s = self.phi.samples();
        let mut i = 0;
        while mid + i + 1 < g.points() && s[mid + i + 1] >= half && s[mid - i - 1] >= half {
            i += 1;
        }
        (i as f64 + 1.0) * g.dx()
    }
}

/// Synthesizes `φ` from `φ̂` sampled at the grid frequencies.
pub fn bump_profile(grid: GridSpec) -> Result<BumpProfile> {
    let samples = (0..grid.points())
        .filter(|&m| grid.xi(m).abs() < 0.5)
        .count();
    if samples < MIN_BUMP_SAMPLES {
        return Err(LabError::CoarseFrequency {
            samples,
            required: MIN_BUMP_SAMPLES,
        });
    }
    let spec = Spectrum::from_fn(grid, |xi| Complex64::new(phi_hat(xi), 0.0))?;
    let residue = imaginary_residue(&spec);
    if residue > 1e-13 {
        return Err(LabError::Format(format!(
            "bump synthesis left imaginary residue {residue:e}"
        )));
    }
    Ok(BumpProfile {
        phi: to_field(&spec),
    })
}

/// `f_n`, synthesized from
/// `f̂_n(ξ) = 2^{-ns-1} i [φ̂(ξ + ω_n) - φ̂(ξ - ω_n)]`.
pub fn make_f(n: u32, params: BesovParams, grid: GridSpec) -> Result<Field> {
    check_band(n, &grid)?;
    let w = carrier_frequency(n);
    let amp = 2f64.powf(-(n as f64) * params.s - 1.0);
    let spec = Spectrum::from_fn(grid, |xi| {
        Complex64::new(0.0, amp * (phi_hat(xi + w) - phi_hat(xi - w)))
    })?;
    Ok(to_field(&spec))
}

/// `g_n = (12/17) 2^{-n} φ`.
pub fn make_g(n: u32, grid: GridSpec) -> Result<Field> {
    check_band(n, &grid)?;
    let amp = 12.0 / 17.0 * 2f64.powi(-(n as i32));
    let spec = Spectrum::from_fn(grid, |xi| Complex64::new(amp * phi_hat(xi), 0.0))?;
    Ok(to_field(&spec))
}

/// The family `{f_n, g_n, u₀ = f_n + g_n, v₀ = -u₀ ∂_x u₀}`.
#[derive(Debug, Clone)]
pub struct ConstructionSet {
    pub n: u32,
    pub params: BesovParams,
    pub f: Field,
    pub g: Field,
    pub u0: Field,
    pub v0: Field,
}

impl ConstructionSet {
    /// The four products with `-v₀ = f∂f + f∂g + g∂g + g∂f`, in that order.
    pub fn v0_terms(&self) -> Result<[Field; 4]> {
        let df = derivative(&self.f);
        let dg = derivative(&self.g);
        Ok([
            product(&self.f, &df)?,
            product(&self.f, &dg)?,
            product(&self.g, &dg)?,
            product(&self.g, &df)?,
        ])
    }
}

pub fn make_set(n: u32, params: BesovParams, grid: GridSpec) -> Result<ConstructionSet> {
    let f = make_f(n, params, grid)?;
    let g = make_g(n, grid)?;
    let u0 = &f + &g;
    let v0 = product(&u0, &derivative(&u0))?.scale(-1.0);
    Ok(ConstructionSet {
        n,
        params,
        f,
        g,
        u0,
        v0,
    })
}

/// `‖φ² cos(ω_n x)‖_{L^p}` by the rectangle rule on the grid.
pub fn lemma_m_quantity(bump: &BumpProfile, n: u32, p: f64) -> Result<f64> {
    let grid = bump.grid();
    check_band(n, &grid)?;
    let w = carrier_frequency(n);
    let samples = bump
        .phi()
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| v * v * (w * grid.x(i)).cos())
        .collect();
    lp_norm(&Field::new(grid, samples)?, p)
}

/// `(1/X) ∫_0^X |cos x|^p dx`, split into whole half-periods plus a
/// remainder.
pub fn cos_mean(p: f64, x: f64) -> Result<f64> {
    if !(x.is_finite() && x > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "X must be positive, got {x}"
        )));
    }
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(LabError::InvalidExponent {
            name: "p",
            value: p,
        });
    }
    let f = |t: f64| t.cos().abs().powf(p);
    let half = 0.5 * PI;
    // ∫_0^π |cos|^p = 2 ∫_0^{π/2} cos^p
    let period = 2.0 * integrate(f, 0.0, half, 1e-15);
    let whole = (x / PI).floor();
    let rest = x - whole * PI;
    let tail = if rest <= half {
        integrate(f, 0.0, rest, 1e-15)
    } else {
        integrate(f, 0.0, half, 1e-15) + integrate(f, half, rest, 1e-15)
    };
    Ok((whole * period + tail) / x)
}

/// `(1/π) ∫_0^π |cos x|^p dx`, the limit of [`cos_mean`].
pub fn cos_mean_limit(p: f64) -> f64 {
    2.0 / PI * integrate(|t: f64| t.cos().abs().powf(p), 0.0, 0.5 * PI, 1e-15)
}

/// `‖g_n ∂_x f_n‖_{B^s_{p,∞}}` and its single-block counterpart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GdfReport {
    /// Besov norm with `r = ∞`.
    pub besov: f64,
    /// `2^{ns} ‖g_n ∂_x f_n‖_{L^p}`.
    pub single_block: f64,
    /// `|besov - single_block| / single_block`.
    pub residual: f64,
    /// Largest `‖Δ_j(g_n ∂_x f_n)‖_{L^p}` over `j ≠ n`, relative to the total.
    pub off_block: f64,
}

pub fn gdf_besov_sup(set: &ConstructionSet) -> Result<GdfReport> {
    let grid = set.f.grid();
    let prod = product(&set.g, &derivative(&set.f))?;
    let lp = LittlewoodPaley::for_grid(grid);
    let norms = lp.block_norms(&prod, set.params.p)?;
    let besov = norms.besov(set.params.s, f64::INFINITY);
    let total = lp_norm(&prod, set.params.p)?;
    let single_block = 2f64.powf(set.n as f64 * set.params.s) * total;
    let off_block = norms
        .norms
        .iter()
        .filter(|(j, _)| *j != set.n as i32)
        .map(|(_, v)| *v)
        .fold(0.0, f64::max)
        / total;
    Ok(GdfReport {
        besov,
        single_block,
        residual: (besov - single_block).abs() / single_block,
        off_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;

    fn grid() -> GridSpec {
        make_grid(64.0, 4096).unwrap()
    }

    #[test]
    fn phi_hat_support() {
        assert_eq!(phi_hat(0.2), 1.0);
        assert_eq!(phi_hat(-0.25), 1.0);
        assert_eq!(phi_hat(0.6), 0.0);
        assert_eq!(phi_hat(0.5), 0.0);
        assert!(phi_hat(0.4) > 0.0 && phi_hat(0.4) < 1.0);
        assert_eq!(phi_hat(0.37), phi_hat(-0.37));
    }

    #[test]
    fn bump_is_even_and_positive_at_origin() {
        let b = bump_profile(grid()).unwrap();
        let s = b.phi().samples();
        let n = s.len();
        for i in 1..n / 2 {
            assert!((s[n / 2 + i] - s[n / 2 - i]).abs() <= 1e-12 * b.phi().max_abs());
        }
        assert!(b.value_at_origin() > 0.0);
        assert_eq!(b.value_at_origin(), b.phi().max_abs());
        assert!(b.half_height_radius() > 0.0);
    }

    #[test]
    fn bump_rejects_coarse_frequency_grid() {
        let g = make_grid(8.0, 256).unwrap();
        assert!(matches!(
            bump_profile(g),
            Err(LabError::CoarseFrequency { .. })
        ));
    }

    #[test]
    fn band_violation_names_max_n() {
        let g = grid();
        // (2/3) ξ_max = 64π/3 ≈ 67.0, ω_5 ≈ 45.3, ω_6 ≈ 90.7
        assert_eq!(max_admissible_n(&g), 5);
        let params = BesovParams::new(2.0, 2.0, 2.0).unwrap();
        match make_f(6, params, g) {
            Err(LabError::BandViolation { max_n, .. }) => assert_eq!(max_n, 5),
            other => panic!("expected band violation, got {other:?}"),
        }
        assert!(make_f(5, params, g).is_ok());
    }

    #[test]
    fn cos_mean_whole_periods() {
        for k in 1..20 {
            let v = cos_mean(2.0, k as f64 * PI).unwrap();
            assert!((v - 0.5).abs() < 1e-15, "k={k} v={v}");
        }
        assert!(cos_mean(2.0, 0.0).is_err());
        assert!(cos_mean(0.5, 1.0).is_err());
    }

    #[test]
    fn cos_mean_limits_match_closed_forms() {
        assert!((cos_mean_limit(1.0) - 2.0 / PI).abs() < 1e-14);
        assert!((cos_mean_limit(2.0) - 0.5).abs() < 1e-14);
        assert!((cos_mean_limit(4.0) - 0.375).abs() < 1e-14);
    }

    #[test]
    fn v0_terms_sum_to_minus_v0() {
        let g = grid();
        let params = BesovParams::new(2.0, 2.0, 2.0).unwrap();
        let set = make_set(4, params, g).unwrap();
        let terms = set.v0_terms().unwrap();
        let sum = terms.iter().skip(1).fold(terms[0].clone(), |a, t| &a + t);
        let err = (&sum + &set.v0).max_abs();
        assert!(err <= 1e-12 * set.v0.max_abs(), "err={err}");
    }
}

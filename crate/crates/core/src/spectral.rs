//! Periodic grid, discrete Fourier transform with continuum normalization,
//! Fourier multipliers and quadrature norms.
//!
//! The real line is replaced by the torus `[-L, L)`. Transforms follow the
//! convention `û(ξ) = ∫ e^{-ixξ} u(x) dx` with inverse `(1/2π) ∫ e^{ixξ} û dξ`,
//! discretized as `û(ξ_k) = dx Σ_i e^{-i x_i ξ_k} u(x_i)` and
//! `u(x_i) = (1/2L) Σ_k e^{i x_i ξ_k} û(ξ_k)`.
//!
//! Spectral coefficients are stored in FFT order: slot `m` holds wavenumber
//! `k = m` for `m < N/2` and `k = m - N` otherwise, so slot `N/2` is the
//! Nyquist mode `k = -N/2`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{LabError, Result};

/// Uniform periodic grid on `[-L, L)` with `N` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    half_length: f64,
    points: usize,
}

/// Builds a grid, rejecting odd or tiny `N` and nonpositive `L`.
pub fn make_grid(half_length: f64, points: usize) -> Result<GridSpec> {
    GridSpec::new(half_length, points)
}

impl GridSpec {
    pub const MIN_POINTS: usize = 16;

    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(LabError::InvalidGrid(format!(
                "half length must be positive and finite, got {half_length}"
            )));
        }
        if !points.is_multiple_of(2) || points < Self::MIN_POINTS {
            return Err(LabError::InvalidGrid(format!(
                "point count must be even and >= {}, got {points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self {
            half_length,
            points,
        })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.points as f64
    }

    /// Spacing of the frequency grid, `π/L`.
    pub fn dxi(&self) -> f64 {
        PI / self.half_length
    }

    pub fn nyquist(&self) -> f64 {
        PI * self.points as f64 / (2.0 * self.half_length)
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx()
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.points).map(|i| self.x(i)).collect()
    }

    /// Signed wavenumber stored in FFT slot `m`.
    pub fn wavenumber(&self, m: usize) -> i64 {
        let n = self.points as i64;
        let m = m as i64;
        if m < n / 2 {
            m
        } else {
            m - n
        }
    }

    /// Frequency `ξ_k = πk/L` of FFT slot `m`.
    pub fn xi(&self, m: usize) -> f64 {
        self.wavenumber(m) as f64 * self.dxi()
    }

    /// All frequencies in FFT order.
    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.points).map(|m| self.xi(m)).collect()
    }

    pub fn nyquist_slot(&self) -> usize {
        self.points / 2
    }

    /// Frequency below which the 2/3 rule keeps modes.
    pub fn dealias_cutoff(&self) -> f64 {
        2.0 * self.nyquist() / 3.0
    }

    /// Whether slot `m` survives the 2/3 rule (`3|k| < N`).
    pub fn keeps(&self, m: usize) -> bool {
        3 * self.wavenumber(m).unsigned_abs() < self.points as u64
    }

    /// Same half length, twice the points.
    pub fn refined(&self) -> GridSpec {
        GridSpec {
            half_length: self.half_length,
            points: self.points * 2,
        }
    }
}

fn planner() -> &'static Mutex<FftPlanner<f64>> {
    static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();
    PLANNER.get_or_init(|| Mutex::new(FftPlanner::new()))
}

fn plans(n: usize) -> (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>) {
    let mut planner = planner().lock().unwrap_or_else(|e| e.into_inner());
    (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
}

#[inline]
fn parity(m: usize) -> f64 {
    if m.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Real grid function.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    samples: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.points() {
            return Err(LabError::InvalidArgument(format!(
                "expected {} samples, got {}",
                grid.points(),
                samples.len()
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(LabError::NonFinite(i));
        }
        Ok(Self { grid, samples })
    }

    pub(crate) fn from_vec_unchecked(grid: GridSpec, samples: Vec<f64>) -> Self {
        debug_assert_eq!(samples.len(), grid.points());
        Self { grid, samples }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            samples: vec![0.0; grid.points()],
        }
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.xs().into_iter().map(f).collect())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn is_finite(&self) -> bool {
        self.samples.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Rectangle-rule integral `dx Σ u_i`.
    pub fn integral(&self) -> f64 {
        self.grid.dx() * self.samples.iter().sum::<f64>()
    }

    pub fn scale(&self, a: f64) -> Field {
        self.map(|v| a * v)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field::from_vec_unchecked(self.grid, self.samples.iter().map(|&v| f(v)).collect())
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: f64, other: &Field) -> Result<Field> {
        self.zip_with(other, |x, y| x + a * y)
    }

    /// Pointwise product without dealiasing.
    pub fn pointwise(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |x, y| x * y)
    }

    pub fn zip_with(&self, other: &Field, f: impl Fn(f64, f64) -> f64) -> Result<Field> {
        if self.grid != other.grid {
            return Err(LabError::GridMismatch);
        }
        Ok(Field::from_vec_unchecked(
            self.grid,
            self.samples
                .iter()
                .zip(&other.samples)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        ))
    }

    pub fn to_spectrum(&self) -> Spectrum {
        to_spectrum(self)
    }
}

impl Add for &Field {
    type Output = Field;
    fn add(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a + b)
            .expect("grid mismatch in Field addition")
    }
}

impl Sub for &Field {
    type Output = Field;
    fn sub(self, rhs: &Field) -> Field {
        self.zip_with(rhs, |a, b| a - b)
            .expect("grid mismatch in Field subtraction")
    }
}

impl Neg for &Field {
    type Output = Field;
    fn neg(self) -> Field {
        self.scale(-1.0)
    }
}

impl Mul<&Field> for f64 {
    type Output = Field;
    fn mul(self, rhs: &Field) -> Field {
        rhs.scale(self)
    }
}

/// Fourier coefficients `û(ξ_k)` in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: GridSpec,
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(grid: GridSpec, coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() != grid.points() {
            return Err(LabError::InvalidArgument(format!(
                "expected {} coefficients, got {}",
                grid.points(),
                coefficients.len()
            )));
        }
        if let Some(i) = coefficients.iter().position(|c| !c.is_finite()) {
            return Err(LabError::NonFinite(i));
        }
        Ok(Self { grid, coefficients })
    }

    /// Samples a continuum transform `ξ ↦ û(ξ)` at the grid frequencies.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        Self::new(grid, (0..grid.points()).map(|m| f(grid.xi(m))).collect())
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coefficients: vec![Complex64::new(0.0, 0.0); grid.points()],
        }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    /// Coefficient at signed wavenumber `k`.
    pub fn at_wavenumber(&self, k: i64) -> Complex64 {
        let n = self.grid.points() as i64;
        self.coefficients[k.rem_euclid(n) as usize]
    }

    /// Multiplies slot by slot, no symmetry checks.
    pub fn multiply(&self, m: impl Fn(f64) -> Complex64) -> Spectrum {
        let grid = self.grid;
        Spectrum {
            grid,
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * m(grid.xi(i)))
                .collect(),
        }
    }

    pub fn multiply_real(&self, m: impl Fn(f64) -> f64) -> Spectrum {
        let grid = self.grid;
        Spectrum {
            grid,
            coefficients: self
                .coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| c * m(grid.xi(i)))
                .collect(),
        }
    }

    /// Zeroes every slot outside the 2/3-rule band.
    pub fn dealiased(mut self) -> Spectrum {
        let grid = self.grid;
        for (m, c) in self.coefficients.iter_mut().enumerate() {
            if !grid.keeps(m) {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    /// `(1/2L) Σ |û_k|²`, equal to `∫|u|²` for the synthesized field.
    pub fn energy(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum::<f64>()
            / (2.0 * self.grid.half_length())
    }

    /// Spectral interpolation onto a grid with the same half length.
    pub fn resample(&self, target: GridSpec) -> Result<Spectrum> {
        if target.half_length() != self.grid.half_length() {
            return Err(LabError::InvalidArgument(
                "spectral resampling requires equal half lengths".into(),
            ));
        }
        let mut out = Spectrum::zeros(target);
        let half_src = (self.grid.points() / 2) as i64;
        let half_dst = (target.points() / 2) as i64;
        let kmax = half_src.min(half_dst);
        for k in -kmax + 1..kmax {
            let n = target.points() as i64;
            out.coefficients[k.rem_euclid(n) as usize] = self.at_wavenumber(k);
        }
        Ok(out)
    }

    pub fn to_field(&self) -> Field {
        to_field(self)
    }
}

/// Forward transform with continuum normalization.
pub fn to_spectrum(u: &Field) -> Spectrum {
    let grid = u.grid();
    let n = grid.points();
    let (fwd, _) = plans(n);
    let mut buf: Vec<Complex64> = u
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    fwd.process(&mut buf);
    let dx = grid.dx();
    for (m, c) in buf.iter_mut().enumerate() {
        *c *= dx * parity(m);
    }
    Spectrum {
        grid,
        coefficients: buf,
    }
}

/// Inverse transform; the imaginary residue of the synthesis is dropped.
pub fn to_field(spectrum: &Spectrum) -> Field {
    let grid = spectrum.grid();
    let n = grid.points();
    let (_, inv) = plans(n);
    let mut buf: Vec<Complex64> = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(m, c)| c * parity(m))
        .collect();
    inv.process(&mut buf);
    let w = 1.0 / (2.0 * grid.half_length());
    Field::from_vec_unchecked(grid, buf.into_iter().map(|c| c.re * w).collect())
}

/// Largest imaginary part produced by synthesizing `spectrum`, relative to
/// the largest real part. Zero for Hermitian spectra up to rounding.
pub fn imaginary_residue(spectrum: &Spectrum) -> f64 {
    let n = spectrum.grid().points();
    let (_, inv) = plans(n);
    let mut buf: Vec<Complex64> = spectrum
        .coefficients()
        .iter()
        .enumerate()
        .map(|(m, c)| c * parity(m))
        .collect();
    inv.process(&mut buf);
    let re = buf.iter().fold(0.0f64, |a, c| a.max(c.re.abs()));
    let im = buf.iter().fold(0.0f64, |a, c| a.max(c.im.abs()));
    if re == 0.0 {
        im
    } else {
        im / re
    }
}

const HERMITIAN_TOL: f64 = 1e-12;

/// Checks `m(-ξ) = conj(m(ξ))` on every grid frequency pair.
pub fn check_hermitian(grid: GridSpec, m: &impl Fn(f64) -> Complex64) -> Result<()> {
    let half = grid.points() / 2;
    let values: Vec<Complex64> = (0..grid.points()).map(|i| m(grid.xi(i))).collect();
    let scale = values.iter().fold(1.0f64, |a, c| a.max(c.norm()));
    if values[0].im.abs() > HERMITIAN_TOL * scale {
        return Err(LabError::NonHermitian(0.0));
    }
    for k in 1..half {
        let pos = values[k];
        let neg = values[grid.points() - k];
        if (neg - pos.conj()).norm() > HERMITIAN_TOL * scale {
            return Err(LabError::NonHermitian(grid.xi(k)));
        }
    }
    Ok(())
}

/// Applies the multiplier `m(D)` and returns the real field. The Nyquist
/// slot has no partner on the grid and is scaled by `Re m` there.
pub fn apply_multiplier(u: &Field, m: impl Fn(f64) -> Complex64) -> Result<Field> {
    let grid = u.grid();
    check_hermitian(grid, &m)?;
    let ny = grid.nyquist_slot();
    let spec = to_spectrum(u);
    let coefficients = spec
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let mv = m(grid.xi(i));
            if i == ny {
                c * mv.re
            } else {
                c * mv
            }
        })
        .collect();
    Ok(to_field(&Spectrum { grid, coefficients }))
}

fn ik(xi: f64) -> Complex64 {
    Complex64::new(0.0, xi)
}

/// Spectral derivative of a spectrum, Nyquist slot zeroed.
pub fn derivative_spectrum(s: &Spectrum) -> Spectrum {
    let ny = s.grid().nyquist_slot();
    let mut out = s.multiply(ik);
    out.coefficients[ny] = Complex64::new(0.0, 0.0);
    out
}

/// `∂_x u` via the multiplier `iξ`.
pub fn derivative(u: &Field) -> Field {
    to_field(&derivative_spectrum(&to_spectrum(u)))
}

/// Derivative together with a resolution flag (see [`is_resolved`]).
pub fn derivative_flagged(u: &Field) -> (Field, bool) {
    let spec = to_spectrum(u);
    let resolved = peak_ratio_top_third(&spec) <= RESOLVED_PEAK_RATIO;
    (to_field(&derivative_spectrum(&spec)), resolved)
}

/// Zero-mean antiderivative via `1/(iξ)`; the mean mode and Nyquist slot
/// are dropped.
pub fn antiderivative(u: &Field) -> Field {
    let spec = to_spectrum(u);
    let ny = u.grid().nyquist_slot();
    let mut out = spec.multiply(|xi| {
        if xi == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / xi)
        }
    });
    out.coefficients[ny] = Complex64::new(0.0, 0.0);
    to_field(&out)
}

/// `(1 - ∂²)^{-1}` as the multiplier `1/(1+ξ²)`.
pub fn helmholtz_inverse(u: &Field) -> Field {
    to_field(&to_spectrum(u).multiply_real(|xi| 1.0 / (1.0 + xi * xi)))
}

/// Multiplier of `-∂_x (1 - ∂²)^{-1}`.
pub fn nonlocal_symbol(xi: f64) -> Complex64 {
    Complex64::new(0.0, -xi / (1.0 + xi * xi))
}

/// Dealiased pointwise product of two fields.
pub fn product(u: &Field, v: &Field) -> Result<Field> {
    if u.grid() != v.grid() {
        return Err(LabError::GridMismatch);
    }
    let u = dealias(u);
    let v = dealias(v);
    Ok(dealias(&u.pointwise(&v)?))
}

/// Projects onto the 2/3-rule band.
pub fn dealias(u: &Field) -> Field {
    to_field(&to_spectrum(u).dealiased())
}

/// Camassa-Holm nonlocal term `P(u) = -∂_x(1-∂²)^{-1}(u² + ½ u_x²)`.
pub fn nonlocal_p(u: &Field) -> Field {
    let spec = to_spectrum(u).dealiased();
    let ux = to_field(&derivative_spectrum(&spec));
    let u = to_field(&spec);
    let source = u
        .zip_with(&ux, |a, b| a * a + 0.5 * b * b)
        .expect("same grid");
    let ny = source.grid().nyquist_slot();
    let mut out = to_spectrum(&source).dealiased().multiply(nonlocal_symbol);
    out.coefficients[ny] = Complex64::new(0.0, 0.0);
    to_field(&out)
}

/// L^p norm by the rectangle rule; `p = ∞` gives the max norm.
pub fn lp_norm(u: &Field, p: f64) -> Result<f64> {
    check_exponent("p", p)?;
    Ok(lp_norm_unchecked(u.samples(), u.grid().dx(), p))
}

pub(crate) fn lp_norm_unchecked(samples: &[f64], dx: f64, p: f64) -> f64 {
    if p.is_infinite() {
        return samples.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    if p == 2.0 {
        return (dx * samples.iter().map(|v| v * v).sum::<f64>()).sqrt();
    }
    if p == 1.0 {
        return dx * samples.iter().map(|v| v.abs()).sum::<f64>();
    }
    // Scale by the max to keep |u|^p away from under/overflow.
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    let sum: f64 = samples.iter().map(|v| (v.abs() / peak).powf(p)).sum();
    peak * (dx * sum).powf(1.0 / p)
}

pub(crate) fn check_exponent(name: &'static str, value: f64) -> Result<()> {
    if value.is_nan() || value < 1.0 {
        return Err(LabError::InvalidExponent { name, value });
    }
    Ok(())
}

/// Threshold on `max|û|` over the top third relative to the peak.
pub const RESOLVED_PEAK_RATIO: f64 = 1e-10;
/// Threshold on the energy fraction in the top third of the spectrum.
pub const RESOLVED_ENERGY_FRACTION: f64 = 1e-6;

fn peak_ratio_top_third(spec: &Spectrum) -> f64 {
    let grid = spec.grid();
    let mut peak = 0.0f64;
    let mut top = 0.0f64;
    for (m, c) in spec.coefficients().iter().enumerate() {
        let a = c.norm();
        peak = peak.max(a);
        if !grid.keeps(m) {
            top = top.max(a);
        }
    }
    if peak == 0.0 {
        0.0
    } else {
        top / peak
    }
}

/// Fraction of spectral energy carried by the top third of the spectrum.
pub fn top_band_energy_fraction(u: &Field) -> f64 {
    let spec = to_spectrum(u);
    let grid = spec.grid();
    let mut total = 0.0;
    let mut top = 0.0;
    for (m, c) in spec.coefficients().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        if !grid.keeps(m) {
            top += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        top / total
    }
}

/// Fraction of energy in the outer quarter of the retained (2/3) band.
/// Grows when a solution cascades toward the dealiasing cutoff.
pub fn cutoff_shell_fraction(u: &Field) -> f64 {
    let spec = to_spectrum(u);
    let grid = spec.grid();
    let kc = grid.points() as f64 / 3.0;
    let mut total = 0.0;
    let mut shell = 0.0;
    for (m, c) in spec.coefficients().iter().enumerate() {
        let e = c.norm_sqr();
        total += e;
        let k = grid.wavenumber(m).unsigned_abs() as f64;
        if k >= 0.75 * kc {
            shell += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        shell / total
    }
}

/// `max|û|` over the top third is below `1e-10` of the peak.
pub fn is_resolved(u: &Field) -> bool {
    peak_ratio_top_third(&to_spectrum(u)) <= RESOLVED_PEAK_RATIO
}

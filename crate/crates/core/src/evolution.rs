//! Method-of-lines time integration: pseudospectral right-hand sides for the
//! Camassa-Holm and Degasperis-Procesi equations in nonlocal transport form,
//! classical RK4 in time, plus a linear transport solver and a Gronwall
//! bound check for it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::littlewood_paley::{BesovParams, LittlewoodPaley};
use crate::spectral::{
    cutoff_shell_fraction, derivative, derivative_spectrum, nonlocal_symbol, product, to_field,
    to_spectrum, top_band_energy_fraction, Field, GridSpec, Spectrum, RESOLVED_ENERGY_FRACTION,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Equation {
    /// `u_t + u u_x = -∂_x(1-∂²)^{-1}(u² + ½u_x²)`
    Ch,
    /// `u_t + u u_x = -(3/2)∂_x(1-∂²)^{-1} u²`
    Dp,
}

impl std::fmt::Display for Equation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Equation::Ch => "ch",
            Equation::Dp => "dp",
        })
    }
}

fn check_resolved(u: &Field) -> Result<()> {
    let frac = top_band_energy_fraction(u);
    if frac > RESOLVED_ENERGY_FRACTION {
        return Err(LabError::Unresolved(frac));
    }
    Ok(())
}

/// Right-hand side without the resolution check. The input is projected
/// onto the 2/3 band first, so the output always lies in that band.
fn rhs_unchecked(eq: Equation, u: &Field) -> Field {
    let spec = to_spectrum(u).dealiased();
    let u = to_field(&spec);
    let ux = to_field(&derivative_spectrum(&spec));
    let transport = to_spectrum(&u.pointwise(&ux).expect("same grid")).dealiased();
    let (source, weight) = match eq {
        Equation::Ch => (
            u.zip_with(&ux, |a, b| a * a + 0.5 * b * b)
                .expect("same grid"),
            1.0,
        ),
        Equation::Dp => (u.map(|a| a * a), 1.5),
    };
    let source = to_spectrum(&source).dealiased();
    let grid = spec.grid();
    let coefficients: Vec<Complex64> = transport
        .coefficients()
        .iter()
        .zip(source.coefficients())
        .enumerate()
        .map(|(m, (t, s))| -t + s * (weight * nonlocal_symbol(grid.xi(m))))
        .collect();
    to_field(&Spectrum::new(grid, coefficients).expect("finite rhs"))
}

/// `-u ∂_x u + P(u)` with dealiased products.
pub fn rhs_ch(u: &Field) -> Result<Field> {
    check_resolved(u)?;
    Ok(rhs_unchecked(Equation::Ch, u))
}

/// `-u ∂_x u - (3/2) ∂_x (1-∂²)^{-1} u²` with dealiased products.
pub fn rhs_dp(u: &Field) -> Result<Field> {
    check_resolved(u)?;
    Ok(rhs_unchecked(Equation::Dp, u))
}

pub fn rhs(eq: Equation, u: &Field) -> Result<Field> {
    match eq {
        Equation::Ch => rhs_ch(u),
        Equation::Dp => rhs_dp(u),
    }
}

/// Integrator settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub final_time: f64,
    /// Fixed step; `None` picks `cfl / (ξ_max max|u₀| + 1)`.
    pub dt: Option<f64>,
    pub cfl: f64,
    /// Output times in `[0, final_time]`, ascending.
    pub record_times: Vec<f64>,
    /// Abort once `max|u_x|` exceeds this multiple of its initial value.
    pub blowup_factor: f64,
}

impl SolverConfig {
    pub fn new(final_time: f64, dt: Option<f64>, record_times: Vec<f64>) -> Self {
        Self {
            final_time,
            dt,
            cfl: 1.0,
            record_times,
            blowup_factor: 10.0,
        }
    }

    /// Records every step `0, dt, 2dt, …, T`.
    pub fn every_step(final_time: f64, dt: f64) -> Self {
        let steps = (final_time / dt).round().max(1.0) as usize;
        let times = (0..=steps)
            .map(|i| final_time * i as f64 / steps as f64)
            .collect();
        Self::new(final_time, Some(dt), times)
    }

    pub fn stability_limit(&self, grid: &GridSpec, u0: &Field) -> f64 {
        self.cfl / (grid.nyquist() * u0.max_abs() + 1.0)
    }

    fn validate(&self) -> Result<()> {
        if !(self.final_time.is_finite() && self.final_time >= 0.0) {
            return Err(LabError::InvalidArgument(format!(
                "final time must be nonnegative, got {}",
                self.final_time
            )));
        }
        if let Some(dt) = self.dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(LabError::InvalidArgument(format!(
                    "dt must be positive, got {dt}"
                )));
            }
        }
        let mut prev = f64::NEG_INFINITY;
        for &t in &self.record_times {
            if !(t >= 0.0 && t <= self.final_time * (1.0 + 1e-12)) || t <= prev {
                return Err(LabError::InvalidArgument(format!(
                    "record times must be ascending within [0, {}]",
                    self.final_time
                )));
            }
            prev = t;
        }
        Ok(())
    }
}

/// Per-record diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// `∫(u² + u_x²) dx`.
    pub energy_h1: f64,
    /// `∫u dx`.
    pub mass: f64,
    /// Energy fraction in the outer quarter of the dealiased band.
    pub tail_fraction: f64,
}

impl Diagnostics {
    pub fn of(u: &Field) -> Self {
        let spec = to_spectrum(u);
        let grid = spec.grid();
        let energy_h1 = spec
            .coefficients()
            .iter()
            .enumerate()
            .map(|(m, c)| (1.0 + grid.xi(m).powi(2)) * c.norm_sqr())
            .sum::<f64>()
            / (2.0 * grid.half_length());
        Self {
            energy_h1,
            mass: spec.coefficients()[0].re,
            tail_fraction: cutoff_shell_fraction(u),
        }
    }
}

/// Time-sampled solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Field>,
    pub diagnostics: Vec<Diagnostics>,
}

impl Trajectory {
    pub fn grid(&self) -> Option<GridSpec> {
        self.states.first().map(Field::grid)
    }

    /// State recorded at exactly `t` (within `1e-12`).
    pub fn state_at(&self, t: f64) -> Option<&Field> {
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .map(|i| &self.states[i])
    }

    pub fn final_state(&self) -> Option<&Field> {
        self.states.last()
    }
}

/// A field indexed by time.
pub trait TimeField {
    fn span(&self) -> (f64, f64);
    fn at(&self, t: f64) -> Result<Field>;
}

impl TimeField for Trajectory {
    fn span(&self) -> (f64, f64) {
        match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => (0.0, -1.0),
        }
    }

    /// Linear interpolation between recorded states.
    fn at(&self, t: f64) -> Result<Field> {
        let (a, b) = self.span();
        let slack = 1e-12 * (1.0 + b.abs());
        if t < a - slack || t > b + slack {
            return Err(LabError::TimeRange {
                requested: t,
                start: a,
                end: b,
            });
        }
        let i = self.times.partition_point(|&s| s <= t);
        if i == 0 {
            return Ok(self.states[0].clone());
        }
        if i >= self.times.len() {
            return Ok(self.states[self.times.len() - 1].clone());
        }
        let (t0, t1) = (self.times[i - 1], self.times[i]);
        let w = (t - t0) / (t1 - t0);
        if w == 0.0 {
            return Ok(self.states[i - 1].clone());
        }
        self.states[i - 1].zip_with(&self.states[i], |x, y| (1.0 - w) * x + w * y)
    }
}

/// The same field at every time.
#[derive(Debug, Clone)]
pub struct Steady(pub Field);

impl TimeField for Steady {
    fn span(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn at(&self, _t: f64) -> Result<Field> {
        Ok(self.0.clone())
    }
}

fn rk4_step(
    u: &Field,
    h: f64,
    f: &mut impl FnMut(f64, &Field) -> Result<Field>,
    t: f64,
) -> Result<Field> {
    let k1 = f(t, u)?;
    let k2 = f(t + 0.5 * h, &u.axpy(0.5 * h, &k1)?)?;
    let k3 = f(t + 0.5 * h, &u.axpy(0.5 * h, &k2)?)?;
    let k4 = f(t + h, &u.axpy(h, &k3)?)?;
    let samples = u
        .samples()
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            v + h / 6.0
                * (k1.samples()[i]
                    + 2.0 * k2.samples()[i]
                    + 2.0 * k3.samples()[i]
                    + k4.samples()[i])
        })
        .collect();
    Ok(Field::from_vec_unchecked(u.grid(), samples))
}

/// Marches `u0` through the record times with uniform sub-steps of size at
/// most `dt` between consecutive records. `after_step` sees every accepted
/// state and may abort.
fn march(
    u0: &Field,
    record_times: &[f64],
    dt: f64,
    mut f: impl FnMut(f64, &Field) -> Result<Field>,
    mut after_step: impl FnMut(f64, &Field) -> Result<()>,
) -> Result<Vec<Field>> {
    let mut states = Vec::with_capacity(record_times.len());
    let mut u = u0.clone();
    let mut t = 0.0;
    for &target in record_times {
        let span = target - t;
        if span > 0.0 {
            let steps = ((span / dt) - 1e-9).ceil().max(1.0) as usize;
            for i in 0..steps {
                let t_start = t + span * i as f64 / steps as f64;
                let t_end = t + span * (i + 1) as f64 / steps as f64;
                u = rk4_step(&u, t_end - t_start, &mut f, t_start)?;
                after_step(t_end, &u)?;
            }
            t = target;
        }
        if target == 0.0 {
            states.push(u0.clone());
        } else {
            states.push(u.clone());
        }
    }
    Ok(states)
}

/// Integrates `equation` from `u0` with RK4.
pub fn solve(u0: &Field, cfg: &SolverConfig, equation: Equation) -> Result<Trajectory> {
    cfg.validate()?;
    check_resolved(u0)?;
    let grid = u0.grid();
    let limit = cfg.stability_limit(&grid, u0);
    let dt = cfg.dt.unwrap_or(limit);
    if dt > limit {
        return Err(LabError::Cfl { dt, limit });
    }
    let initial_slope = derivative(u0).max_abs();
    let threshold = cfg.blowup_factor * initial_slope;
    let states = march(
        u0,
        &cfg.record_times,
        dt,
        |_, u| Ok(rhs_unchecked(equation, u)),
        |t, u| {
            if !u.is_finite() {
                return Err(LabError::NotFinite(t));
            }
            let slope = derivative(u).max_abs();
            if slope > threshold {
                return Err(LabError::BlowUp {
                    t,
                    slope,
                    threshold,
                });
            }
            Ok(())
        },
    )?;
    let diagnostics = states.iter().map(Diagnostics::of).collect();
    Ok(Trajectory {
        times: cfg.record_times.clone(),
        states,
        diagnostics,
    })
}

fn check_span(field: &dyn TimeField, final_time: f64) -> Result<()> {
    let (a, b) = field.span();
    let slack = 1e-12 * (1.0 + final_time);
    if a > slack || b < final_time - slack {
        return Err(LabError::TimeRange {
            requested: final_time,
            start: a,
            end: b,
        });
    }
    Ok(())
}

/// RK4 for `∂_t f + u ∂_x f = g` with time-dependent velocity and forcing.
pub fn solve_transport(
    f0: &Field,
    velocity: &dyn TimeField,
    forcing: &dyn TimeField,
    record_times: &[f64],
    dt: f64,
) -> Result<Trajectory> {
    let final_time = record_times.last().copied().unwrap_or(0.0);
    check_span(velocity, final_time)?;
    check_span(forcing, final_time)?;
    if !(dt.is_finite() && dt > 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let states = march(
        f0,
        record_times,
        dt,
        |t, f| {
            let u = velocity.at(t)?;
            let g = forcing.at(t)?;
            let adv = product(&u, &derivative(f))?;
            g.axpy(-1.0, &adv)
        },
        |t, f| {
            if f.is_finite() {
                Ok(())
            } else {
                Err(LabError::NotFinite(t))
            }
        },
    )?;
    let diagnostics = states.iter().map(Diagnostics::of).collect();
    Ok(Trajectory {
        times: record_times.to_vec(),
        states,
        diagnostics,
    })
}

/// Both sides of the transport estimate
/// `‖f(t)‖ ≤ e^{CV(t)} (‖f₀‖ + ∫_0^t e^{-CV(τ)} ‖g(τ)‖ dτ)` in `B^σ_{p,r}`
/// with `V(t) = ∫_0^t ‖∂_x u‖_{B^{σ-1}_{p,r}}`.
#[derive(Debug, Clone, PartialEq)]
pub struct GronwallReport {
    pub times: Vec<f64>,
    pub solution_norms: Vec<f64>,
    pub forcing_norms: Vec<f64>,
    pub v: Vec<f64>,
    /// Smallest `C ≥ 0` for which the estimate holds at every recorded
    /// time; infinite if no finite constant works.
    pub constant: f64,
}

impl GronwallReport {
    /// Right-hand side of the estimate at record `i` for a given `C`.
    pub fn bound(&self, c: f64, i: usize) -> f64 {
        let mut integral = 0.0;
        for k in 1..=i {
            let h = self.times[k] - self.times[k - 1];
            let a = (-c * self.v[k - 1]).exp() * self.forcing_norms[k - 1];
            let b = (-c * self.v[k]).exp() * self.forcing_norms[k];
            integral += 0.5 * h * (a + b);
        }
        (c * self.v[i]).exp() * (self.solution_norms[0] + integral)
    }

    pub fn holds(&self, c: f64) -> bool {
        (0..self.times.len()).all(|i| {
            let lhs = self.solution_norms[i];
            lhs <= self.bound(c, i) * (1.0 + 1e-12) + 1e-300
        })
    }
}

/// Fits the minimal Gronwall constant over a transport trajectory. Only the
/// branch `σ > 1 + 1/p` is supported.
pub fn gronwall_bound_check(
    solution: &Trajectory,
    velocity: &dyn TimeField,
    forcing: &dyn TimeField,
    params: BesovParams,
) -> Result<GronwallReport> {
    if params.s <= 1.0 + params.inv_p() {
        return Err(LabError::InvalidArgument(format!(
            "transport estimate implemented for sigma > 1 + 1/p only (sigma = {}, p = {})",
            params.s, params.p
        )));
    }
    let grid = solution
        .grid()
        .ok_or_else(|| LabError::InvalidArgument("empty trajectory".into()))?;
    let lp = LittlewoodPaley::for_grid(grid);
    let mut solution_norms = Vec::new();
    let mut forcing_norms = Vec::new();
    let mut slopes = Vec::new();
    for (i, &t) in solution.times.iter().enumerate() {
        solution_norms.push(lp.besov_norm(&solution.states[i], params)?);
        forcing_norms.push(lp.besov_norm(&forcing.at(t)?, params)?);
        let du = derivative(&velocity.at(t)?);
        slopes.push(lp.besov_norm(&du, params.with_s(params.s - 1.0))?);
    }
    let mut v = vec![0.0; slopes.len()];
    for k in 1..slopes.len() {
        v[k] = v[k - 1]
            + 0.5 * (solution.times[k] - solution.times[k - 1]) * (slopes[k] + slopes[k - 1]);
    }
    let mut report = GronwallReport {
        times: solution.times.clone(),
        solution_norms,
        forcing_norms,
        v,
        constant: 0.0,
    };
    if report.holds(0.0) {
        return Ok(report);
    }
    let mut hi = 1.0;
    while !report.holds(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            report.constant = f64::INFINITY;
            return Ok(report);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if report.holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    report.constant = hi;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::make_grid;
    use std::f64::consts::PI;

    fn torus() -> GridSpec {
        make_grid(PI, 32).unwrap()
    }

    #[test]
    fn rhs_trivial_cases() {
        let g = torus();
        for eq in [Equation::Ch, Equation::Dp] {
            assert_eq!(rhs(eq, &Field::zeros(g)).unwrap().max_abs(), 0.0);
            let c = Field::from_fn(g, |_| 1.3).unwrap();
            assert!(rhs(eq, &c).unwrap().max_abs() < 1e-14);
        }
    }

    #[test]
    fn rhs_on_sine() {
        // CH: -½ sin2x - (1/10) sin2x; DP: -½ sin2x - (3/10) sin2x
        let g = torus();
        let u = Field::from_fn(g, f64::sin).unwrap();
        let ch = rhs_ch(&u).unwrap();
        let dp = rhs_dp(&u).unwrap();
        for i in 0..g.points() {
            let s2 = (2.0 * g.x(i)).sin();
            assert!((ch.samples()[i] + 0.6 * s2).abs() < 1e-14);
            assert!((dp.samples()[i] + 0.8 * s2).abs() < 1e-14);
        }
    }

    #[test]
    fn rhs_refuses_unresolved_input() {
        let g = torus();
        let u = Field::from_fn(g, |x| (14.0 * x).cos()).unwrap();
        assert!(matches!(rhs_ch(&u), Err(LabError::Unresolved(_))));
    }

    #[test]
    fn zero_data_stays_zero() {
        let g = torus();
        let cfg = SolverConfig::new(0.5, Some(0.01), vec![0.0, 0.25, 0.5]);
        let traj = solve(&Field::zeros(g), &cfg, Equation::Ch).unwrap();
        assert!(traj.states.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn first_state_is_initial_data() {
        let g = torus();
        let u0 = Field::from_fn(g, |x| 0.1 * x.sin()).unwrap();
        let cfg = SolverConfig::new(0.1, Some(0.01), vec![0.0, 0.1]);
        let traj = solve(&u0, &cfg, Equation::Ch).unwrap();
        assert_eq!(traj.states[0], u0);
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = make_grid(PI, 64).unwrap();
        let u0 = Field::from_fn(g, |x| x.sin()).unwrap();
        let cfg = SolverConfig::new(0.1, Some(0.1), vec![0.0, 0.1]);
        assert!(matches!(
            solve(&u0, &cfg, Equation::Ch),
            Err(LabError::Cfl { .. })
        ));
        let auto = SolverConfig::new(0.1, None, vec![0.0, 0.1]);
        assert!(solve(&u0, &auto, Equation::Ch).is_ok());
    }

    #[test]
    fn blowup_guard_trips() {
        // a steep negative slope steepens quickly under CH
        let g = make_grid(PI, 128).unwrap();
        let u0 = Field::from_fn(g, |x| -2.0 * x.sin()).unwrap();
        let mut cfg = SolverConfig::new(3.0, Some(0.002), vec![0.0, 3.0]);
        cfg.blowup_factor = 3.0;
        assert!(matches!(
            solve(&u0, &cfg, Equation::Ch),
            Err(LabError::BlowUp { .. })
        ));
    }

    #[test]
    fn interpolation_is_linear_between_records() {
        let g = torus();
        let a = Field::from_fn(g, |_| 1.0).unwrap();
        let b = Field::from_fn(g, |_| 3.0).unwrap();
        let traj = Trajectory {
            times: vec![0.0, 1.0],
            diagnostics: vec![Diagnostics::of(&a), Diagnostics::of(&b)],
            states: vec![a, b],
        };
        assert!((traj.at(0.25).unwrap().samples()[3] - 1.5).abs() < 1e-15);
        assert!(traj.at(1.5).is_err());
    }

    #[test]
    fn transport_trivial_cases() {
        let g = torus();
        let f0 = Field::from_fn(g, |x| x.cos() + 0.2 * (3.0 * x).sin()).unwrap();
        let zero = Steady(Field::zeros(g));
        let times = [0.0, 0.5, 1.0];
        let traj = solve_transport(&f0, &zero, &zero, &times, 0.01).unwrap();
        for s in &traj.states {
            assert!((s - &f0).max_abs() < 1e-14);
        }
        let vel = Steady(Field::from_fn(g, |x| 0.3 * x.sin()).unwrap());
        let traj = solve_transport(&Field::zeros(g), &vel, &zero, &times, 0.01).unwrap();
        assert!(traj.states.iter().all(|s| s.max_abs() == 0.0));
    }

    #[test]
    fn transport_span_mismatch() {
        let g = torus();
        let short = Trajectory {
            times: vec![0.0, 0.5],
            states: vec![Field::zeros(g), Field::zeros(g)],
            diagnostics: vec![Diagnostics::of(&Field::zeros(g)); 2],
        };
        let zero = Steady(Field::zeros(g));
        let err = solve_transport(&Field::zeros(g), &short, &zero, &[0.0, 1.0], 0.1).unwrap_err();
        assert!(matches!(err, LabError::TimeRange { .. }));
    }

    #[test]
    fn gronwall_trivial_cases() {
        let g = make_grid(PI, 64).unwrap();
        let params = BesovParams::new(2.0, 2.0, 2.0).unwrap();
        let f0 = Field::from_fn(g, |x| x.cos()).unwrap();
        let zero = Steady(Field::zeros(g));
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let traj = solve_transport(&f0, &zero, &zero, &times, 0.05).unwrap();
        let rep = gronwall_bound_check(&traj, &zero, &zero, params).unwrap();
        assert_eq!(rep.constant, 0.0);
        for i in 0..times.len() {
            assert!(
                (rep.bound(0.0, i) - rep.solution_norms[i]).abs() < 1e-12 * rep.solution_norms[0]
            );
        }
        // forcing only: ‖f(t)‖ ≤ ‖f₀‖ + ∫‖g‖
        let forcing = Steady(Field::from_fn(g, |x| (2.0 * x).sin()).unwrap());
        let traj = solve_transport(&f0, &zero, &forcing, &times, 0.05).unwrap();
        let rep = gronwall_bound_check(&traj, &zero, &forcing, params).unwrap();
        assert_eq!(rep.constant, 0.0);
        let low = BesovParams::new(1.2, 2.0, 2.0).unwrap();
        assert!(gronwall_bound_check(&traj, &zero, &forcing, low).is_err());
    }
}

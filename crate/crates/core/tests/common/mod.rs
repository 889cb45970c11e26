//! Helpers shared by integration test targets.

#![allow(dead_code)]

use std::f64::consts::PI;

use chlab::evolution::{solve, Equation, SolverConfig};
use chlab::spectral::Field;

/// Final state of a fixed-step solve over `[0, t]`.
pub fn final_state(u0: &Field, t: f64, dt: f64, eq: Equation) -> Field {
    let cfg = SolverConfig::new(t, Some(dt), vec![0.0, t]);
    solve(u0, &cfg, eq)
        .expect("solve")
        .final_state()
        .expect("final state")
        .clone()
}

pub fn max_diff(a: &Field, b: &Field) -> f64 {
    a.samples()
        .iter()
        .zip(b.samples())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Errors against a `dt/8` reference and the observed orders
/// `log2(e_k / e_{k+1})` for steps `dt, dt/2, dt/4`.
pub fn rk4_order_study(u0: &Field, t: f64, dt: f64, eq: Equation) -> (Vec<f64>, Vec<f64>) {
    let reference = final_state(u0, t, dt / 8.0, eq);
    let errors: Vec<f64> = [1.0, 2.0, 4.0]
        .iter()
        .map(|k| max_diff(&final_state(u0, t, dt / k, eq), &reference))
        .collect();
    let orders = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    (errors, orders)
}

/// Largest relative drift of `∫u` and `∫(u² + u_x²)` along a solve.
pub fn conservation_drift(u0: &Field, t: f64, dt: f64) -> (f64, f64) {
    let cfg = SolverConfig::every_step(t, dt);
    let traj = solve(u0, &cfg, Equation::Ch).expect("solve");
    let d0 = traj.diagnostics[0];
    let mass_scale = d0
        .mass
        .abs()
        .max(u0.samples().iter().map(|v| v.abs()).sum::<f64>() * u0.grid().dx());
    let mut mass: f64 = 0.0;
    let mut energy: f64 = 0.0;
    for d in &traj.diagnostics {
        mass = mass.max((d.mass - d0.mass).abs() / mass_scale);
        energy = energy.max((d.energy_h1 - d0.energy_h1).abs() / d0.energy_h1);
    }
    (mass, energy)
}

/// Smooth step rebuilt from its definition.
pub fn step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, intervals: usize) -> f64 {
    let n = intervals + intervals % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        acc += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

/// Continuum `φ(x) = (1/π) ∫_0^{1/2} φ̂(ξ) cos(xξ) dξ`; the flat part
/// `ξ ≤ 1/4` is integrated in closed form.
pub fn phi_oracle(x: f64) -> f64 {
    let flat = if x == 0.0 { 0.25 } else { (0.25 * x).sin() / x };
    let ramp = simpson(
        |xi| step((0.5 - xi) / 0.25) * (x * xi).cos(),
        0.25,
        0.5,
        2000,
    );
    (flat + ramp) / PI
}

/// `‖φ²‖²_{L²(ℝ)} = ∫ φ⁴`, by Simpson on `[-256, 256]`.
pub fn phi_sq_l2_squared_oracle() -> f64 {
    2.0 * simpson(|x| phi_oracle(x).powi(4), 0.0, 256.0, 8192)
}

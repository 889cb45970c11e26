//! Least-squares fits used for rate verdicts.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// `y ≈ slope·x + intercept`; `residual` is the RMS of the fit residuals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn linear(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(LabError::InvalidArgument(format!(
            "linear fit needs at least two paired points, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(LabError::InvalidArgument(
            "linear fit needs distinct abscissae".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(Fit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Slope of `log2 y` against `x`. All `y` must be positive.
pub fn log2_slope(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if let Some(bad) = ys.iter().find(|y| !(**y > 0.0 && y.is_finite())) {
        return Err(LabError::InvalidArgument(format!(
            "log fit needs positive finite values, got {bad}"
        )));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    linear(xs, &logs)
}

/// Slope of `log2 y` against `log2 x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<Fit> {
    if let Some(bad) = xs.iter().find(|x| x.is_nan() || **x <= 0.0) {
        return Err(LabError::InvalidArgument(format!(
            "log-log fit needs positive abscissae, got {bad}"
        )));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    log2_slope(&lx, ys)
}

/// Fit of `y(n, t) ≈ a·t² + b_n` with one offset per group.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticOffsetFit {
    pub a: f64,
    /// `(group, b_n)` in input order of first appearance.
    pub offsets: Vec<(u32, f64)>,
    /// `‖residual‖₂ / ‖y‖₂`.
    pub relative_residual: f64,
}

/// Least squares for `y ≈ a t² + b_group`: for fixed `a` each `b` is the
/// group mean of `y - a t²`, which leaves a one-dimensional problem in `a`.
pub fn quadratic_with_offsets(samples: &[(u32, f64, f64)]) -> Result<QuadraticOffsetFit> {
    let mut groups: Vec<u32> = Vec::new();
    for (g, _, _) in samples {
        if !groups.contains(g) {
            groups.push(*g);
        }
    }
    let mean_of = |g: u32, f: &dyn Fn(f64, f64) -> f64| {
        let pts: Vec<f64> = samples
            .iter()
            .filter(|(h, _, _)| *h == g)
            .map(|(_, t, y)| f(*t, *y))
            .collect();
        pts.iter().sum::<f64>() / pts.len() as f64
    };
    let mut num = 0.0;
    let mut den = 0.0;
    for &g in &groups {
        let mq = mean_of(g, &|t, _| t * t);
        let my = mean_of(g, &|_, y| y);
        for (_, t, y) in samples.iter().filter(|(h, _, _)| *h == g) {
            num += (t * t - mq) * (y - my);
            den += (t * t - mq).powi(2);
        }
    }
    if den == 0.0 {
        return Err(LabError::InvalidArgument(
            "quadratic fit needs at least two distinct times per group".into(),
        ));
    }
    let a = num / den;
    let offsets: Vec<(u32, f64)> = groups
        .iter()
        .map(|&g| (g, mean_of(g, &|t, y| y - a * t * t)))
        .collect();
    let b = |g: u32| {
        offsets
            .iter()
            .find(|(h, _)| *h == g)
            .map(|(_, b)| *b)
            .unwrap_or(0.0)
    };
    let res: f64 = samples
        .iter()
        .map(|(g, t, y)| (y - a * t * t - b(*g)).powi(2))
        .sum();
    let norm: f64 = samples.iter().map(|(_, _, y)| y * y).sum();
    Ok(QuadraticOffsetFit {
        a,
        offsets,
        relative_residual: if norm == 0.0 {
            0.0
        } else {
            (res / norm).sqrt()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = linear(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15);
        assert!((f.intercept - 1.0).abs() < 1e-15);
        assert!(f.residual < 1e-15);
    }

    #[test]
    fn power_law_slopes() {
        let ns = [4.0, 5.0, 6.0, 7.0];
        let ys: Vec<f64> = ns.iter().map(|n: &f64| 3.0 * 2f64.powf(-1.5 * n)).collect();
        assert!((log2_slope(&ns, &ys).unwrap().slope + 1.5).abs() < 1e-12);
        let ts = [1e-3, 2e-3, 5e-3, 1e-2];
        let ys: Vec<f64> = ts.iter().map(|t: &f64| 7.0 * t * t).collect();
        assert!((loglog_slope(&ts, &ys).unwrap().slope - 2.0).abs() < 1e-12);
        assert!(log2_slope(&ns, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn quadratic_offsets_recovered() {
        let mut s = Vec::new();
        for n in 4..7u32 {
            for t in [0.1, 0.2, 0.3, 0.5] {
                s.push((n, t, 2.0 * t * t + 0.01 * n as f64));
            }
        }
        let f = quadratic_with_offsets(&s).unwrap();
        assert!((f.a - 2.0).abs() < 1e-12);
        assert!((f.offsets[1].1 - 0.05).abs() < 1e-12);
        assert!(f.relative_residual < 1e-12);
    }
}

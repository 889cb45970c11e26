//! Experiment configuration and its canonical `key = value` text form.
//!
//! ```text
//! [grid]
//! L = 64
//! N = 32768
//! [params]
//! s = 2
//! ...
//! ```
//!
//! The text is TOML restricted to one level of sections; lists are TOML
//! arrays. Every key belongs to a section; unknown sections, unknown keys
//! and repeated keys are errors. Keys missing from a file keep their
//! defaults.

use sha2::{Digest, Sha256};

use crate::constructions::{bump_profile, carrier_frequency};
use crate::error::{LabError, Result};
use crate::littlewood_paley::{format_exponent, parse_exponent, BesovParams};
use crate::spectral::GridSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub half_length: f64,
    pub points: usize,
    pub params: BesovParams,
    pub n_min: u32,
    pub n_max: u32,
    /// Seed for the randomized product probes.
    pub seed: u64,
    pub final_time: f64,
    pub dt: f64,
    pub cfl: f64,
    pub blowup_factor: f64,
    pub record_times: Vec<f64>,
    /// Times for the short-time Taylor check of `w_n`.
    pub small_times: Vec<f64>,
    pub small_dt: f64,
    /// Interval on which `D(n_max, t)/t` is bounded below.
    pub window: (f64, f64),
    pub trials: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            half_length: 64.0,
            points: 1 << 15,
            params: BesovParams {
                s: 2.0,
                p: 2.0,
                r: 2.0,
            },
            n_min: 4,
            n_max: 8,
            seed: 20_240_917,
            final_time: 0.5,
            dt: 0.01,
            cfl: 1.0,
            blowup_factor: 10.0,
            record_times: vec![0.0, 0.05, 0.1, 0.2, 0.35, 0.5],
            small_times: vec![1e-3, 2e-3, 5e-3, 1e-2],
            small_dt: 1e-4,
            window: (0.05, 0.5),
            trials: 64,
        }
    }
}

const KEYS: &[(&str, &[&str])] = &[
    ("grid", &["L", "N"]),
    ("params", &["s", "p", "r"]),
    ("run", &["n_min", "n_max", "seed"]),
    (
        "solver",
        &["T", "dt", "cfl", "blowup_factor", "record_times"],
    ),
    ("prop2", &["small_times", "small_dt"]),
    ("main", &["window"]),
    ("products", &["trials"]),
];

fn config_err(msg: String) -> LabError {
    LabError::Config(msg)
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim()
        .parse::<f64>()
        .map_err(|_| config_err(format!("{key}: not a number: {v:?}")))
}

fn parse_int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse::<T>()
        .map_err(|_| config_err(format!("{key}: not a nonnegative integer: {v:?}")))
}

/// Comma-separated numbers, optionally in brackets.
fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let v = v.trim();
    let inner = v
        .strip_prefix('[')
        .and_then(|r| r.strip_suffix(']'))
        .unwrap_or(v);
    inner.split(',').map(|x| parse_f64(key, x)).collect()
}

fn format_list(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
    format!("[{}]", items.join(", "))
}

/// TOML integers are signed, so seeds above `i64::MAX` are quoted.
fn format_seed(seed: u64) -> String {
    if i64::try_from(seed).is_ok() {
        seed.to_string()
    } else {
        format!("\"{seed}\"")
    }
}

/// A TOML value in the string form accepted by [`ExperimentConfig::set`].
fn scalar_text(section: &str, key: &str, value: &toml::Value) -> Result<String> {
    match value {
        toml::Value::Integer(i) => Ok(i.to_string()),
        toml::Value::Float(x) => Ok(format!("{x}")),
        toml::Value::String(s) => Ok(s.clone()),
        toml::Value::Array(items) => {
            let parts = items
                .iter()
                .map(|v| match v {
                    toml::Value::Array(_) => Err(config_err(format!(
                        "{section}.{key}: nested lists are not allowed"
                    ))),
                    v => scalar_text(section, key, v),
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(parts.join(","))
        }
        other => Err(config_err(format!(
            "{section}.{key}: unsupported value {other}"
        ))),
    }
}

impl ExperimentConfig {
    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.half_length, self.points)
    }

    pub fn n_values(&self) -> Vec<u32> {
        (self.n_min..=self.n_max).collect()
    }

    /// Sets one key. Used by the file parser and by command-line overrides.
    pub fn set(&mut self, section: &str, key: &str, value: &str) -> Result<()> {
        let name = format!("{section}.{key}");
        let known = KEYS
            .iter()
            .find(|(s, _)| *s == section)
            .ok_or_else(|| config_err(format!("unknown section [{section}]")))?;
        if !known.1.contains(&key) {
            return Err(config_err(format!("unknown key {key:?} in [{section}]")));
        }
        let exponent = |v: &str| parse_exponent(v).map_err(|e| config_err(format!("{name}: {e}")));
        match (section, key) {
            ("grid", "L") => self.half_length = parse_f64(&name, value)?,
            ("grid", "N") => self.points = parse_int(&name, value)?,
            ("params", "s") => self.params.s = parse_f64(&name, value)?,
            ("params", "p") => self.params.p = exponent(value)?,
            ("params", "r") => self.params.r = exponent(value)?,
            ("run", "n_min") => self.n_min = parse_int(&name, value)?,
            ("run", "n_max") => self.n_max = parse_int(&name, value)?,
            ("run", "seed") => self.seed = parse_int(&name, value)?,
            ("solver", "T") => self.final_time = parse_f64(&name, value)?,
            ("solver", "dt") => self.dt = parse_f64(&name, value)?,
            ("solver", "cfl") => self.cfl = parse_f64(&name, value)?,
            ("solver", "blowup_factor") => self.blowup_factor = parse_f64(&name, value)?,
            ("solver", "record_times") => self.record_times = parse_list(&name, value)?,
            ("prop2", "small_times") => self.small_times = parse_list(&name, value)?,
            ("prop2", "small_dt") => self.small_dt = parse_f64(&name, value)?,
            ("main", "window") => {
                let w = parse_list(&name, value)?;
                if w.len() != 2 {
                    return Err(config_err(format!("{name}: expected two values")));
                }
                self.window = (w[0], w[1]);
            }
            ("products", "trials") => self.trials = parse_int(&name, value)?,
            _ => unreachable!("key table and setter disagree on {name}"),
        }
        Ok(())
    }

    /// Applies a config file on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        let doc: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        for (section, body) in &doc {
            let table = body
                .as_table()
                .ok_or_else(|| config_err(format!("key {section:?} outside of any section")))?;
            if !KEYS.iter().any(|(s, _)| s == section) {
                return Err(config_err(format!("unknown section [{section}]")));
            }
            for (key, value) in table {
                self.set(section, key, &scalar_text(section, key, value)?)?;
            }
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Canonical rendering; `from_text(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let p = &self.params;
        format!(
            "[grid]\nL = {}\nN = {}\n\n\
             [params]\ns = {}\np = {}\nr = {}\n\n\
             [run]\nn_min = {}\nn_max = {}\nseed = {}\n\n\
             [solver]\nT = {}\ndt = {}\ncfl = {}\nblowup_factor = {}\nrecord_times = {}\n\n\
             [prop2]\nsmall_times = {}\nsmall_dt = {}\n\n\
             [main]\nwindow = [{}, {}]\n\n\
             [products]\ntrials = {}\n",
            self.half_length,
            self.points,
            p.s,
            format_exponent(p.p),
            format_exponent(p.r),
            self.n_min,
            self.n_max,
            format_seed(self.seed),
            self.final_time,
            self.dt,
            self.cfl,
            self.blowup_factor,
            format_list(&self.record_times),
            format_list(&self.small_times),
            self.small_dt,
            self.window.0,
            self.window.1,
            self.trials,
        )
    }

    /// Hex SHA-256 of the canonical text.
    pub fn digest(&self) -> String {
        let hash = Sha256::digest(self.to_text().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.grid().map_err(|e| config_err(e.to_string()))?;
        BesovParams::new(self.params.s, self.params.p, self.params.r)
            .map_err(|e| config_err(e.to_string()))?;
        if !self.params.admissible_ch() {
            return Err(config_err(format!(
                "(s, p, r) = ({}, {}, {}) outside s > max(1 + 1/p, 3/2), r < inf",
                self.params.s,
                format_exponent(self.params.p),
                format_exponent(self.params.r)
            )));
        }
        if self.n_max < self.n_min + 2 {
            return Err(config_err(format!(
                "need at least three values of n, got {}..={}",
                self.n_min, self.n_max
            )));
        }
        let top = carrier_frequency(self.n_max) + 1.0;
        if top > grid.dealias_cutoff() {
            return Err(config_err(format!(
                "band condition fails: (17/12)2^{} + 1 = {top:.3} > (2/3) xi_max = {:.3}",
                self.n_max,
                grid.dealias_cutoff()
            )));
        }
        bump_profile(grid).map_err(|e| config_err(e.to_string()))?;
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(config_err(format!("{name} must be positive, got {v}")))
            }
        };
        positive("T", self.final_time)?;
        positive("dt", self.dt)?;
        positive("cfl", self.cfl)?;
        positive("blowup_factor", self.blowup_factor)?;
        positive("small_dt", self.small_dt)?;
        ascending("record_times", &self.record_times, 0.0, self.final_time)?;
        if self.record_times.first() != Some(&0.0) || self.record_times.len() < 3 {
            return Err(config_err(
                "record_times must start at 0 and hold at least three times".into(),
            ));
        }
        ascending("small_times", &self.small_times, 0.0, self.final_time)?;
        if self.small_times.len() < 2 || self.small_times[0] <= 0.0 {
            return Err(config_err(
                "small_times needs at least two positive times".into(),
            ));
        }
        let (a, b) = self.window;
        if !(a > 0.0 && a < b && b <= self.final_time) {
            return Err(config_err(format!(
                "window ({a}, {b}) must satisfy 0 < a < b <= T"
            )));
        }
        if !self.record_times.iter().any(|&t| t >= a && t <= b) {
            return Err(config_err("window contains no record time".into()));
        }
        if self.trials == 0 {
            return Err(config_err("trials must be at least 1".into()));
        }
        Ok(())
    }
}

fn ascending(name: &str, v: &[f64], lo: f64, hi: f64) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for &t in v {
        if !(t >= lo && t <= hi) || t <= prev {
            return Err(config_err(format!(
                "{name} must be ascending within [{lo}, {hi}]"
            )));
        }
        prev = t;
    }
    Ok(())
}

//! Reproduction experiments: measured tables, fitted rates and verdicts.

pub mod config;
pub mod flows;
pub mod lab;
pub mod plotdata;
pub mod products;
pub mod result;
pub mod statics;
pub mod thresholds;
pub mod transport;

use std::fmt;
use std::str::FromStr;

pub use config::ExperimentConfig;
pub use lab::Lab;
pub use plotdata::emit_plotdata;
pub use result::{ExperimentResult, Record, Verdict};

use crate::error::{LabError, Result};
use crate::evolution::Equation;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Scaling,
    LowerBounds,
    Prop1,
    Prop2,
    Main,
    Products,
    Transport,
    Dp,
}

impl Experiment {
    pub const ALL: [Experiment; 8] = [
        Experiment::Scaling,
        Experiment::LowerBounds,
        Experiment::Prop1,
        Experiment::Prop2,
        Experiment::Main,
        Experiment::Products,
        Experiment::Transport,
        Experiment::Dp,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Scaling => "scaling",
            Experiment::LowerBounds => "lower-bounds",
            Experiment::Prop1 => "prop1",
            Experiment::Prop2 => "prop2",
            Experiment::Main => "main",
            Experiment::Products => "products",
            Experiment::Transport => "transport",
            Experiment::Dp => "dp",
        }
    }

    pub fn run(&self, lab: &Lab) -> Result<ExperimentResult> {
        match self {
            Experiment::Scaling => statics::besov_scaling(lab),
            Experiment::LowerBounds => statics::lower_bounds(lab),
            Experiment::Prop1 => flows::prop1(lab),
            Experiment::Prop2 => flows::prop2(lab),
            Experiment::Main => flows::separation(lab, Equation::Ch),
            Experiment::Products => products::product_estimates(lab),
            Experiment::Transport => transport::transport(lab),
            Experiment::Dp => flows::separation(lab, Equation::Dp),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Experiment::ALL.iter().map(|e| e.name()).collect();
                LabError::InvalidArgument(format!(
                    "unknown experiment {s:?}; expected one of {}",
                    names.join(", ")
                ))
            })
    }
}

pub fn run(experiment: Experiment, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    experiment.run(&Lab::new(cfg)?)
}

/// Every experiment in `Experiment::ALL` order, sharing one set of flows.
pub fn run_all(cfg: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    let lab = Lab::new(cfg)?;
    Experiment::ALL.iter().map(|e| e.run(&lab)).collect()
}

pub fn exp_besov_scaling(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Scaling, cfg)
}

pub fn exp_lower_bounds(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::LowerBounds, cfg)
}

pub fn exp_prop1(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Prop1, cfg)
}

pub fn exp_prop2(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Prop2, cfg)
}

pub fn exp_main(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Main, cfg)
}

pub fn exp_product_estimates(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Products, cfg)
}

pub fn exp_transport(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Transport, cfg)
}

pub fn exp_dp_smoke(cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    run(Experiment::Dp, cfg)
}

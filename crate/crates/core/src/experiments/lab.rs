//! Shared state for one experiment configuration: grid, constructions and
//! lazily computed flows, so that several experiments reuse the same solves.

use std::sync::{Arc, Mutex};

use rayon::prelude::*;

use super::config::ExperimentConfig;
use crate::constructions::{bump_profile, make_set, BumpProfile, ConstructionSet};
use crate::error::Result;
use crate::evolution::{solve, Equation, SolverConfig, Trajectory};
use crate::littlewood_paley::{BesovParams, LittlewoodPaley};
use crate::spectral::{Field, GridSpec};

/// Flows of `f_n` and `u₀ⁿ = f_n + g_n` at the configured record times.
#[derive(Debug, Clone)]
pub struct Flows {
    pub n: u32,
    pub f: Trajectory,
    pub u: Trajectory,
}

type FlowCache = Mutex<Option<Arc<Vec<Flows>>>>;

pub struct Lab {
    cfg: ExperimentConfig,
    grid: GridSpec,
    lp: Arc<LittlewoodPaley>,
    bump: BumpProfile,
    sets: Vec<ConstructionSet>,
    ch: FlowCache,
    dp: FlowCache,
}

impl Lab {
    pub fn new(cfg: &ExperimentConfig) -> Result<Self> {
        cfg.validate()?;
        let grid = cfg.grid()?;
        let sets = cfg
            .n_values()
            .into_par_iter()
            .map(|n| make_set(n, cfg.params, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            cfg: cfg.clone(),
            grid,
            lp: LittlewoodPaley::for_grid(grid),
            bump: bump_profile(grid)?,
            sets,
            ch: Mutex::new(None),
            dp: Mutex::new(None),
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.cfg
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn params(&self) -> BesovParams {
        self.cfg.params
    }

    pub fn bump(&self) -> &BumpProfile {
        &self.bump
    }

    /// Constructions in increasing `n`.
    pub fn sets(&self) -> &[ConstructionSet] {
        &self.sets
    }

    pub fn ns(&self) -> Vec<f64> {
        self.sets.iter().map(|s| s.n as f64).collect()
    }

    pub fn besov(&self, u: &Field, params: BesovParams) -> Result<f64> {
        self.lp.besov_norm(u, params)
    }

    pub fn lp(&self) -> &LittlewoodPaley {
        &self.lp
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut sc = SolverConfig::new(
            self.cfg.final_time,
            Some(self.cfg.dt),
            self.cfg.record_times.clone(),
        );
        sc.cfl = self.cfg.cfl;
        sc.blowup_factor = self.cfg.blowup_factor;
        sc
    }

    /// Flows for every `n`, solved in parallel on first use.
    pub fn flows(&self, equation: Equation) -> Result<Arc<Vec<Flows>>> {
        let cache = match equation {
            Equation::Ch => &self.ch,
            Equation::Dp => &self.dp,
        };
        let mut slot = cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(flows) = slot.as_ref() {
            return Ok(flows.clone());
        }
        let sc = self.solver_config();
        let flows = self
            .sets
            .par_iter()
            .map(|set| {
                let (f, u) = rayon::join(
                    || solve(&set.f, &sc, equation),
                    || solve(&set.u0, &sc, equation),
                );
                Ok(Flows {
                    n: set.n,
                    f: f?,
                    u: u?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let flows = Arc::new(flows);
        *slot = Some(flows.clone());
        Ok(flows)
    }
}

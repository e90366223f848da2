//! Step-size policies: the n/m heuristic, accuracy-driven ceilings, the
//! exact `Gamma0 <= delta/2` solve, and the decreasing-rho schedule with
//! exact warm-start semantics on the dual lattice.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bq::{self, BqConfig, BqError, IntState, RunOutcome};
use crate::quantizer::QuantizerSpec;

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("schedule factor must be an integer >= 2, got {0}")]
    BadFactor(u64),
    #[error("schedule block must be >= 1")]
    BadBlock,
    #[error("schedule floor must be positive, got {0}")]
    BadFloor(f64),
    #[error(transparent)]
    Engine(#[from] BqError),
}

/// `rho = n / m`; with the edge count unknown, fall back to 1.
pub fn rho_heuristic(n: usize, m: Option<usize>) -> f64 {
    match m {
        Some(m) => n as f64 / m as f64,
        None => 1.0,
    }
}

/// Step size guaranteeing consensus within one quantization resolution:
/// `min{n/(4m), delta/(8nL)} = delta/(8nL)`.
pub fn rho_for_resolution(n: usize, spec: &QuantizerSpec) -> f64 {
    spec.delta / (8.0 * n as f64 * spec.range_l)
}

pub use crate::ebq::rho_gamma_max;

/// Decreasing step-size schedule: stages `rho0 / factor^j` of `block`
/// iterations each while the stage value exceeds `floor`, then one final
/// run to detection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RhoSchedule {
    pub rho0: f64,
    pub factor: u64,
    pub block: u64,
    pub floor: f64,
}

impl Default for RhoSchedule {
    fn default() -> Self {
        RhoSchedule {
            rho0: 1.0,
            factor: 10,
            block: 50,
            floor: 1e-4,
        }
    }
}

impl RhoSchedule {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if self.factor < 2 {
            return Err(ScheduleError::BadFactor(self.factor));
        }
        if self.block < 1 {
            return Err(ScheduleError::BadBlock);
        }
        if !(self.floor > 0.0) {
            return Err(ScheduleError::BadFloor(self.floor));
        }
        Ok(())
    }

    /// Stage step sizes above the floor (the final to-detection stage runs
    /// at the next division below the floor).
    pub fn stages(&self) -> Vec<f64> {
        let mut out = Vec::new();
        let mut rho = self.rho0;
        while rho > self.floor {
            out.push(rho);
            rho /= self.factor as f64;
        }
        out
    }
}

/// Outcome of a schedule run, with per-stage accounting.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScheduleOutcome {
    pub outcome: RunOutcome,
    pub total_iterations: u64,
    /// `(rho, iterations spent)` per stage, final detection stage included.
    pub stage_boundaries: Vec<(f64, u64)>,
    pub final_rho: f64,
}

/// Run BQ-CADMM under a decreasing-rho schedule. Each stage transition
/// multiplies the integer duals by `factor`, which leaves the real dual
/// values unchanged while keeping the lattice exact.
pub fn run_with_schedule(
    cfg: &BqConfig,
    sched: &RhoSchedule,
) -> Result<ScheduleOutcome, ScheduleError> {
    sched.validate()?;
    let n = cfg.graph.n();
    let mut state = cfg.init.clone().unwrap_or_else(|| IntState::zero(n));
    let mut stage_boundaries = Vec::new();
    let mut total = 0u64;
    let mut rho = sched.rho0;
    while rho > sched.floor {
        for _ in 0..sched.block {
            state = bq::bq_step(&state, cfg.graph, rho, cfg.r, &cfg.spec)?;
        }
        total += sched.block;
        stage_boundaries.push((rho, sched.block));
        // rho shrinks by an integer factor, so a (units of rho * delta) grows
        // by the same factor exactly
        for ai in state.a.iter_mut() {
            *ai *= sched.factor as i64;
        }
        rho /= sched.factor as f64;
    }
    state.k = 0;
    let final_cfg = BqConfig {
        graph: cfg.graph,
        r: cfg.r,
        rho,
        spec: cfg.spec,
        max_iter: cfg.max_iter,
        init: Some(state),
        record_trace: cfg.record_trace,
    };
    let outcome = bq::run(&final_cfg)?;
    let final_iters = outcome
        .convergence_time()
        .unwrap_or(outcome.iterations);
    total += final_iters;
    stage_boundaries.push((rho, final_iters));
    Ok(ScheduleOutcome {
        outcome,
        total_iterations: total,
        stage_boundaries,
        final_rho: rho,
    })
}

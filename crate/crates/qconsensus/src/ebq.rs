//! Extended BQ-CADMM: repeated BQ-CADMM runs with accumulated data offsets
//! of +/- L, until the inner run stops at an interior level or a cycle.

use serde::Serialize;
use thiserror::Error;

use crate::bq::{self, BqConfig, IntState, OutcomeKind, RunOutcome};
use crate::graph::Graph;
use crate::quantizer::QuantizerSpec;

#[derive(Debug, Error, PartialEq)]
pub enum EbqError {
    #[error(
        "rho = {rho} violates the Gamma0 <= delta/2 precondition (largest admissible rho is {max_rho})"
    )]
    RhoTooLarge { rho: f64, max_rho: f64 },
    #[error("inner BQ-CADMM run unresolved at max_iter = {0}")]
    InnerUnresolved(u64),
    #[error(transparent)]
    Bq(#[from] bq::BqError),
}

/// Knobs beyond the plain BQ configuration.
#[derive(Debug, Clone, Copy)]
pub struct EbqOptions {
    /// Enforce the `Gamma0 <= delta/2` step-size precondition. Disabling it
    /// drops the error guarantee of [`theorem3_bound`] but lets experiments
    /// run at much larger step sizes, where the driver still does well in
    /// practice.
    pub enforce_precondition: bool,
    /// When set, every inner call consumes exactly this many iterations
    /// (fixed-budget mode); otherwise each call runs to detection.
    pub inner_budget: Option<u64>,
}

impl Default for EbqOptions {
    fn default() -> Self {
        EbqOptions {
            enforce_precondition: true,
            inner_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EbqOutcome {
    /// Accumulated offset, an integer multiple of L, identical at all nodes.
    pub t_star: f64,
    /// Final consensus value of the last inner call (level or cyclic average).
    pub x_bq: f64,
    pub calls: Vec<RunOutcome>,
    pub total_iterations: u64,
    /// `|t* + x_bq - rbar|`.
    pub consensus_error: f64,
    /// True when the warning-level `L >> bound` assumption fails.
    pub range_assumption_violated: bool,
    #[serde(skip_serializing)]
    pub final_state: IntState,
    #[serde(skip_serializing)]
    pub shifted_r: Vec<f64>,
}

/// Largest step size keeping `Gamma0 = delta/2`; `None` when `4L <= delta`
/// (then `Gamma0 = delta/2` for every rho).
pub fn rho_gamma_max(n: usize, spec: &QuantizerSpec) -> Option<f64> {
    let denom = 2.0 * n as f64 * (4.0 * spec.range_l - spec.delta);
    (denom > 0.0).then(|| spec.delta / denom)
}

/// Guaranteed error radius of the extended driver under the step-size
/// precondition: `(1 + 4 rho m / n) delta / 2`.
pub fn theorem3_bound(rho: f64, g: &Graph, spec: &QuantizerSpec) -> f64 {
    (1.0 + 4.0 * rho * g.m() as f64 / g.n() as f64) * spec.delta / 2.0
}

/// Run Algorithm 2: repeat BQ-CADMM, offsetting the data by `sgn(x_bq) L`
/// whenever an inner call converges exactly at the range boundary.
pub fn run_ebq(cfg: &BqConfig, opts: &EbqOptions) -> Result<EbqOutcome, EbqError> {
    let spec = cfg.spec;
    if opts.enforce_precondition {
        if let Some(max_rho) = rho_gamma_max(cfg.graph.n(), &spec) {
            if cfg.rho > max_rho * (1.0 + 1e-12) {
                return Err(EbqError::RhoTooLarge {
                    rho: cfg.rho,
                    max_rho,
                });
            }
        }
    }
    let bound = theorem3_bound(cfg.rho, cfg.graph, &spec);
    let range_assumption_violated = spec.range_l < 5.0 * bound;

    let n = cfg.graph.n();
    let rbar = cfg.r.iter().sum::<f64>() / n as f64;
    let max_calls = (rbar.abs() / spec.range_l).ceil() as u64 + 1;

    let mut t_star = 0.0_f64;
    let mut shifted_r: Vec<f64> = cfg.r.to_vec();
    let mut calls = Vec::new();
    let mut total_iterations = 0u64;
    loop {
        let inner_cfg = BqConfig {
            graph: cfg.graph,
            r: &shifted_r,
            rho: cfg.rho,
            spec,
            max_iter: opts.inner_budget.unwrap_or(cfg.max_iter),
            init: None,
            record_trace: cfg.record_trace,
        };
        let out = bq::run(&inner_cfg)?;
        total_iterations += match opts.inner_budget {
            Some(budget) => budget,
            None => out.iterations,
        };
        let boundary_level = match &out.kind {
            OutcomeKind::Converged { q_star, .. } if q_star.abs() == spec.max_level() => {
                Some(*q_star)
            }
            OutcomeKind::Converged { .. } => None,
            // a cyclic sample average is compared against +/-L as a rational;
            // even exact equality stops the loop since the test of Algorithm 2
            // is on converged levels
            OutcomeKind::Cyclic { .. } => None,
            OutcomeKind::Unresolved { max_iter } => {
                return Err(EbqError::InnerUnresolved(*max_iter))
            }
        };
        match boundary_level {
            Some(level) if (calls.len() as u64) < max_calls => {
                let offset = level.signum() as f64 * spec.range_l;
                t_star += offset;
                for ri in shifted_r.iter_mut() {
                    *ri -= offset;
                }
                calls.push(out);
            }
            _ => {
                let x_bq = out.consensus_value(&spec).expect("resolved outcome");
                let final_state = out.final_state.clone();
                calls.push(out);
                debug_assert!(calls.len() as u64 <= max_calls);
                return Ok(EbqOutcome {
                    t_star,
                    x_bq,
                    total_iterations,
                    consensus_error: (t_star + x_bq - rbar).abs(),
                    range_assumption_violated,
                    final_state,
                    shifted_r,
                    calls,
                });
            }
        }
    }
}

/// Residual data `-alpha_i + r_i - t*` left at each node after an EBQ run;
/// their mean is exactly `rbar - t*` since the duals sum to zero.
pub fn recovery_residuals(
    final_state: &IntState,
    t_star: f64,
    rho: f64,
    spec: &QuantizerSpec,
    r: &[f64],
) -> Vec<f64> {
    final_state
        .a
        .iter()
        .zip(r)
        .map(|(&ai, &ri)| -(rho * spec.delta * ai as f64) + ri - t_star)
        .collect()
}

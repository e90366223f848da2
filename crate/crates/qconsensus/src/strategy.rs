//! Algorithm variants behind a common trait, registered by name and selected
//! at runtime from scenario configuration.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::bq::{self, BqConfig, OutcomeKind};
use crate::cadmm::{self, CadmmState};
use crate::ebq::{self, EbqOptions};
use crate::graph::Graph;
use crate::params::{self, RhoSchedule};
use crate::quantizer::QuantizerSpec;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("unknown algorithm {0:?}")]
    UnknownAlgorithm(String),
    #[error("algorithm {algorithm:?} does not support a {policy} step-size policy")]
    UnsupportedPolicy {
        algorithm: &'static str,
        policy: &'static str,
    },
    #[error(transparent)]
    Bq(#[from] bq::BqError),
    #[error(transparent)]
    Ebq(#[from] ebq::EbqError),
    #[error(transparent)]
    Schedule(#[from] params::ScheduleError),
}

/// Step size after policy resolution against the realized graph.
#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedRho {
    Fixed(f64),
    Schedule(RhoSchedule),
}

impl ResolvedRho {
    /// The step size bounds are evaluated at: final stage value for a
    /// schedule, the value itself otherwise.
    pub fn effective(&self) -> f64 {
        match self {
            ResolvedRho::Fixed(v) => *v,
            ResolvedRho::Schedule(s) => {
                let stages = s.stages().len() as i32;
                s.rho0 / (s.factor as f64).powi(stages)
            }
        }
    }
}

/// Everything one repetition needs, shared read-only.
pub struct RunContext<'a> {
    pub graph: &'a Graph,
    pub r: &'a [f64],
    pub rho: ResolvedRho,
    pub spec: QuantizerSpec,
    pub max_iter: u64,
    /// Fixed per-call iteration budget for the extended driver.
    pub inner_budget: Option<u64>,
    pub enforce_ebq_precondition: bool,
    pub trace: bool,
}

/// Normalized result of one repetition, algorithm-independent.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct AlgoResult {
    pub kind: String,
    pub k0: Option<u64>,
    pub period: Option<u64>,
    /// Final consensus value, offsets included.
    pub value: Option<f64>,
    /// Consensus error against the relevant target (projected mean for a
    /// convergent quantized run, plain mean otherwise).
    pub error: Option<f64>,
    pub iterations: u64,
    pub calls: Option<u64>,
    pub t_star: Option<f64>,
    pub rho: f64,
    pub gamma0: f64,
    pub bound_convergent: f64,
    pub bound_cyclic: f64,
    pub lemma2_violations: u64,
    /// Per-iteration error `||value_k - rbar 1|| / sqrt(n)` when tracing.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iterative_error: Option<Vec<f64>>,
}

pub trait ConsensusAlgorithm: Send + Sync {
    fn name(&self) -> &'static str;
    fn execute(&self, ctx: &RunContext) -> Result<AlgoResult, RunError>;
}

/// Name-keyed registry of algorithm strategies.
pub struct AlgorithmRegistry {
    map: BTreeMap<&'static str, Box<dyn ConsensusAlgorithm>>,
}

impl AlgorithmRegistry {
    pub fn empty() -> Self {
        AlgorithmRegistry {
            map: BTreeMap::new(),
        }
    }

    pub fn with_builtins() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(CadmmAlgorithm));
        reg.register(Box::new(BqAlgorithm));
        reg.register(Box::new(EbqAlgorithm));
        reg
    }

    pub fn register(&mut self, algo: Box<dyn ConsensusAlgorithm>) {
        self.map.insert(algo.name(), algo);
    }

    pub fn get(&self, name: &str) -> Result<&dyn ConsensusAlgorithm, RunError> {
        self.map
            .get(name)
            .map(|b| b.as_ref())
            .ok_or_else(|| RunError::UnknownAlgorithm(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.map.keys().copied().collect()
    }
}

fn rms_error(values: impl Iterator<Item = f64>, rbar: f64, n: usize) -> f64 {
    let sq: f64 = values.map(|v| (v - rbar) * (v - rbar)).sum();
    (sq / n as f64).sqrt()
}

/// Exact real-valued baseline; stops when the iterates agree with the data
/// mean to machine-level accuracy or the cap hits.
pub struct CadmmAlgorithm;

impl ConsensusAlgorithm for CadmmAlgorithm {
    fn name(&self) -> &'static str {
        "cadmm"
    }

    fn execute(&self, ctx: &RunContext) -> Result<AlgoResult, RunError> {
        let ResolvedRho::Fixed(rho) = ctx.rho else {
            return Err(RunError::UnsupportedPolicy {
                algorithm: "cadmm",
                policy: "schedule",
            });
        };
        let n = ctx.graph.n();
        let rbar = ctx.r.iter().sum::<f64>() / n as f64;
        let mut s = CadmmState::zero(n);
        let mut errors = ctx.trace.then(Vec::new);
        let mut iterations = 0;
        let mut inf_err = f64::INFINITY;
        while iterations < ctx.max_iter && inf_err > 1e-12 {
            s = cadmm_step_once(&s, ctx.graph, rho, ctx.r);
            iterations += 1;
            inf_err = s
                .x
                .iter()
                .map(|&xi| (xi - rbar).abs())
                .fold(0.0, f64::max);
            if let Some(e) = errors.as_mut() {
                e.push(rms_error(s.x.iter().copied(), rbar, n));
            }
        }
        let value = s.x.iter().sum::<f64>() / n as f64;
        let b = bq::bounds(rho, ctx.graph, &ctx.spec, 0.0);
        Ok(AlgoResult {
            kind: "exact".into(),
            k0: None,
            period: None,
            value: Some(value),
            error: Some(inf_err),
            iterations,
            calls: None,
            t_star: None,
            rho,
            gamma0: b.gamma0,
            bound_convergent: b.bound_convergent,
            bound_cyclic: b.bound_cyclic,
            lemma2_violations: 0,
            iterative_error: errors,
        })
    }
}

fn cadmm_step_once(s: &CadmmState, g: &Graph, rho: f64, r: &[f64]) -> CadmmState {
    cadmm::cadmm_step(s, g, rho, r, None)
}

/// Quantized state machine, fixed step size or decreasing schedule.
pub struct BqAlgorithm;

impl ConsensusAlgorithm for BqAlgorithm {
    fn name(&self) -> &'static str {
        "bq"
    }

    fn execute(&self, ctx: &RunContext) -> Result<AlgoResult, RunError> {
        let n = ctx.graph.n();
        let rbar = ctx.r.iter().sum::<f64>() / n as f64;
        let (outcome, total_iterations, rho) = match &ctx.rho {
            ResolvedRho::Fixed(rho) => {
                let mut cfg = BqConfig::new(ctx.graph, ctx.r, *rho, ctx.spec);
                cfg.max_iter = ctx.max_iter;
                cfg.record_trace = ctx.trace;
                let out = bq::run(&cfg)?;
                let iters = out.iterations;
                (out, iters, *rho)
            }
            ResolvedRho::Schedule(sched) => {
                let mut cfg = BqConfig::new(ctx.graph, ctx.r, sched.rho0, ctx.spec);
                cfg.max_iter = ctx.max_iter;
                cfg.record_trace = ctx.trace;
                let so = params::run_with_schedule(&cfg, sched)?;
                (so.outcome, so.total_iterations, so.final_rho)
            }
        };
        let iterative_error = outcome.trace.as_ref().map(|trace| {
            trace
                .iter()
                .map(|p| {
                    rms_error(
                        p.q.iter().map(|&q| q as f64 * ctx.spec.delta),
                        rbar,
                        n,
                    )
                })
                .collect()
        });
        let (kind, k0, period) = match &outcome.kind {
            OutcomeKind::Converged { k0, .. } => ("converged", Some(*k0), None),
            OutcomeKind::Cyclic { k0, period, .. } => ("cyclic", Some(*k0), Some(*period)),
            OutcomeKind::Unresolved { .. } => ("unresolved", None, None),
        };
        Ok(AlgoResult {
            kind: kind.into(),
            k0,
            period,
            value: outcome.consensus_value(&ctx.spec),
            error: outcome.consensus_error,
            iterations: total_iterations,
            calls: None,
            t_star: None,
            rho,
            gamma0: outcome.bounds.gamma0,
            bound_convergent: outcome.bounds.bound_convergent,
            bound_cyclic: outcome.bounds.bound_cyclic,
            lemma2_violations: outcome.lemma2_violations,
            iterative_error,
        })
    }
}

/// Extended driver with per-call data offsets.
pub struct EbqAlgorithm;

impl ConsensusAlgorithm for EbqAlgorithm {
    fn name(&self) -> &'static str {
        "ebq"
    }

    fn execute(&self, ctx: &RunContext) -> Result<AlgoResult, RunError> {
        let ResolvedRho::Fixed(rho) = ctx.rho else {
            return Err(RunError::UnsupportedPolicy {
                algorithm: "ebq",
                policy: "schedule",
            });
        };
        let n = ctx.graph.n();
        let rbar = ctx.r.iter().sum::<f64>() / n as f64;
        let mut cfg = BqConfig::new(ctx.graph, ctx.r, rho, ctx.spec);
        cfg.max_iter = ctx.max_iter;
        cfg.record_trace = ctx.trace;
        let opts = EbqOptions {
            enforce_precondition: ctx.enforce_ebq_precondition,
            inner_budget: ctx.inner_budget,
        };
        let out = ebq::run_ebq(&cfg, &opts)?;
        let iterative_error = ctx.trace.then(|| {
            // stitch per-call traces with the offset accumulated before each call
            let mut t = 0.0;
            let mut errors = Vec::new();
            for (idx, call) in out.calls.iter().enumerate() {
                if let Some(trace) = &call.trace {
                    for p in trace.iter().skip(if idx == 0 { 0 } else { 1 }) {
                        errors.push(rms_error(
                            p.q.iter().map(|&q| q as f64 * ctx.spec.delta + t),
                            rbar,
                            n,
                        ));
                    }
                }
                if idx + 1 < out.calls.len() {
                    if let OutcomeKind::Converged { q_star, .. } = call.kind {
                        t += (q_star.signum() as f64) * ctx.spec.range_l;
                    }
                }
            }
            errors
        });
        let last = out.calls.last().expect("at least one call");
        let (kind, k0, period) = match &last.kind {
            OutcomeKind::Converged { k0, .. } => ("converged", Some(*k0), None),
            OutcomeKind::Cyclic { k0, period, .. } => ("cyclic", Some(*k0), Some(*period)),
            OutcomeKind::Unresolved { .. } => ("unresolved", None, None),
        };
        let mut lemma2 = 0;
        for call in &out.calls {
            lemma2 += call.lemma2_violations;
        }
        Ok(AlgoResult {
            kind: kind.into(),
            k0,
            period,
            value: Some(out.t_star + out.x_bq),
            error: Some(out.consensus_error),
            iterations: out.total_iterations,
            calls: Some(out.calls.len() as u64),
            t_star: Some(out.t_star),
            rho,
            gamma0: last.bounds.gamma0,
            bound_convergent: last.bounds.bound_convergent,
            bound_cyclic: last.bounds.bound_cyclic,
            lemma2_violations: lemma2,
            iterative_error,
        })
    }
}

//! BQ-CADMM state machine on an exact integer lattice.
//!
//! Quantized levels are kept in units of `delta` and duals in units of
//! `rho * delta`, so the per-iteration map on `(q, a)` is exact integer
//! arithmetic and repeats are detected by equality, immune to floating-point
//! drift. A run classifies as convergent (period-1 repeat), cyclic (period
//! >= 2), or unresolved at the iteration cap.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::quantizer::{project, QuantizerSpec};

/// Visited-state table size beyond which detection falls back to Brent's
/// cycle finding on the deterministic map.
const STATE_TABLE_CAP: usize = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum BqError {
    #[error("integer overflow in dual update at iteration {k}")]
    Overflow { k: u64 },
    #[error("warm-start state has wrong dimension (expected {expected}, got {got})")]
    BadInit { expected: usize, got: usize },
    #[error("cycle statistics requested for a non-cyclic outcome")]
    NotCyclic,
}

/// Exact per-iteration state: quantized levels `q` (units of delta), duals
/// `a` (units of rho * delta), and the real local variables `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct IntState {
    pub q: Vec<i64>,
    pub a: Vec<i64>,
    pub x: Vec<f64>,
    pub k: u64,
}

impl IntState {
    pub fn zero(n: usize) -> Self {
        IntState {
            q: vec![0; n],
            a: vec![0; n],
            x: vec![0.0; n],
            k: 0,
        }
    }

    /// Warm start from real local variables and lattice duals; `q` is
    /// recomputed from `x` so the stored pair stays consistent.
    pub fn from_x(x: Vec<f64>, a: Vec<i64>, spec: &QuantizerSpec) -> Self {
        let q = x
            .iter()
            .map(|&xi| spec.bounded_level(xi).expect("finite warm start"))
            .collect();
        IntState { q, a, x, k: 0 }
    }

    fn key(&self) -> Vec<i64> {
        let mut key = Vec::with_capacity(2 * self.q.len());
        key.extend_from_slice(&self.q);
        key.extend_from_slice(&self.a);
        key
    }
}

/// One BQ-CADMM run: topology, data, step size, quantizer, iteration cap,
/// and an optional warm start.
pub struct BqConfig<'a> {
    pub graph: &'a Graph,
    pub r: &'a [f64],
    pub rho: f64,
    pub spec: QuantizerSpec,
    pub max_iter: u64,
    pub init: Option<IntState>,
    pub record_trace: bool,
}

impl<'a> BqConfig<'a> {
    pub fn new(graph: &'a Graph, r: &'a [f64], rho: f64, spec: QuantizerSpec) -> Self {
        BqConfig {
            graph,
            r,
            rho,
            spec,
            max_iter: 1_000_000,
            init: None,
            record_trace: false,
        }
    }
}

/// Error radii and state-count diagnostic from the outcome analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundSet {
    pub gamma0: f64,
    pub bound_convergent: f64,
    pub bound_cyclic: f64,
    pub state_count_b: f64,
}

/// `Gamma_0 = max{delta/2, 4 rho n L / (1 + 2 rho n)}`.
pub fn gamma0(rho: f64, n: usize, spec: &QuantizerSpec) -> f64 {
    assert!(rho > 0.0);
    let nl = n as f64 * spec.range_l;
    (spec.delta / 2.0).max(4.0 * rho * nl / (1.0 + 2.0 * rho * n as f64))
}

/// Evaluate all bound formulas for one configuration. `r_max` is the largest
/// data magnitude, entering only the per-node state-count diagnostic.
pub fn bounds(rho: f64, g: &Graph, spec: &QuantizerSpec, r_max: f64) -> BoundSet {
    let n = g.n() as f64;
    let m = g.m() as f64;
    let edge_factor = 1.0 + 4.0 * rho * m / n;
    let g0 = gamma0(rho, g.n(), spec);
    let levels = 2.0 * spec.range_l / spec.delta + 1.0;
    let state_count_b = levels
        * ((spec.range_l + r_max) / (rho * spec.delta) + 6.0 * n * spec.range_l / spec.delta);
    BoundSet {
        gamma0: g0,
        bound_convergent: edge_factor * spec.delta / 2.0,
        bound_cyclic: edge_factor * g0,
        state_count_b,
    }
}

/// Consensus level forced when the data mean lies far outside the quantizer
/// range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum ForcedOutcome {
    /// Convergence forced to this specific level (units of delta).
    Level(i64),
    /// Convergence forced, level not pinned down.
    SomeLevel,
}

/// Convergence is forced when `|rbar| - L` exceeds the cyclic error radius;
/// with `rho < n / (4m)` the level is additionally `sgn(rbar) * L`.
pub fn corollary1_predict(
    rho: f64,
    g: &Graph,
    spec: &QuantizerSpec,
    rbar: f64,
) -> Option<ForcedOutcome> {
    let b = bounds(rho, g, spec, 0.0);
    if rbar.abs() - spec.range_l <= b.bound_cyclic {
        return None;
    }
    if rho < g.n() as f64 / (4.0 * g.m() as f64) {
        Some(ForcedOutcome::Level(rbar.signum() as i64 * spec.max_level()))
    } else {
        Some(ForcedOutcome::SomeLevel)
    }
}

/// One iteration of Algorithm 1 on the integer lattice.
pub fn bq_step(
    s: &IntState,
    g: &Graph,
    rho: f64,
    r: &[f64],
    spec: &QuantizerSpec,
) -> Result<IntState, BqError> {
    let n = g.n();
    debug_assert_eq!(s.q.len(), n);
    let rho_delta = rho * spec.delta;
    let mut x_new = vec![0.0; n];
    let mut q_new = vec![0i64; n];
    for i in 0..n {
        let deg = g.degree(i) as i64;
        let level_sum: i64 = deg * s.q[i] + g.neighbors(i).iter().map(|&j| s.q[j]).sum::<i64>();
        let xi = (rho_delta * (level_sum - s.a[i]) as f64 + r[i])
            / (1.0 + 2.0 * rho * deg as f64);
        x_new[i] = xi;
        q_new[i] = spec.bounded_level(xi).expect("finite iterate");
    }
    let mut a_new = vec![0i64; n];
    for i in 0..n {
        let deg = g.degree(i) as i64;
        let flow = deg as i128 * q_new[i] as i128
            - g.neighbors(i)
                .iter()
                .map(|&j| q_new[j] as i128)
                .sum::<i128>();
        let ai = s.a[i] as i128 + flow;
        a_new[i] = i64::try_from(ai).map_err(|_| BqError::Overflow { k: s.k + 1 })?;
    }
    Ok(IntState {
        q: q_new,
        a: a_new,
        x: x_new,
        k: s.k + 1,
    })
}

/// Per-iteration snapshot kept when tracing is enabled.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TracePoint {
    pub k: u64,
    pub x: Vec<f64>,
    pub q: Vec<i64>,
    pub a: Vec<i64>,
}

/// Classification of a finished run.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OutcomeKind {
    Converged {
        k0: u64,
        q_star: i64,
    },
    Cyclic {
        k0: u64,
        period: u64,
        /// Level vectors over one period, period-major: `levels[l][i]` is the
        /// level of node `i` at cycle step `l`.
        levels: Vec<Vec<i64>>,
        xbar_q: f64,
    },
    Unresolved {
        max_iter: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunOutcome {
    #[serde(flatten)]
    pub kind: OutcomeKind,
    pub iterations: u64,
    pub bounds: BoundSet,
    /// `|q* delta - T_X(rbar)|` when convergent, `|xbar_Q - rbar|` when cyclic.
    pub consensus_error: Option<f64>,
    pub lemma2_violations: u64,
    #[serde(skip_serializing)]
    pub final_state: IntState,
    #[serde(skip_serializing)]
    pub trace: Option<Vec<TracePoint>>,
}

impl RunOutcome {
    /// Consensus value: converged level as a real, or the cyclic sample average.
    pub fn consensus_value(&self, spec: &QuantizerSpec) -> Option<f64> {
        match &self.kind {
            OutcomeKind::Converged { q_star, .. } => Some(*q_star as f64 * spec.delta),
            OutcomeKind::Cyclic { xbar_q, .. } => Some(*xbar_q),
            OutcomeKind::Unresolved { .. } => None,
        }
    }

    /// `k0` for convergent runs, `k0 + T` for cyclic ones.
    pub fn convergence_time(&self) -> Option<u64> {
        match &self.kind {
            OutcomeKind::Converged { k0, .. } => Some(*k0),
            OutcomeKind::Cyclic { k0, period, .. } => Some(k0 + period),
            OutcomeKind::Unresolved { .. } => None,
        }
    }

    pub fn is_resolved(&self) -> bool {
        !matches!(self.kind, OutcomeKind::Unresolved { .. })
    }
}

/// Per-node sample averages over one cycle period; all must agree exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleStats {
    pub per_node_avg: Vec<f64>,
    pub xbar_q: f64,
}

/// Verify the cyclic-consensus identity with integer sums (level sums over
/// one period must be identical across nodes) and return the common average.
pub fn cycle_stats(o: &RunOutcome, spec: &QuantizerSpec) -> Result<CycleStats, BqError> {
    let OutcomeKind::Cyclic { levels, period, .. } = &o.kind else {
        return Err(BqError::NotCyclic);
    };
    let n = levels[0].len();
    let t = *period as i64;
    let sums: Vec<i64> = (0..n)
        .map(|i| levels.iter().map(|row| row[i]).sum())
        .collect();
    debug_assert_eq!(levels.len() as i64, t);
    if sums.iter().any(|&s| s != sums[0]) {
        // cannot happen for cycles of the algorithm itself: the dual update
        // conserves the level sum across nodes over one period
        panic!("cyclic sample averages differ across nodes: {sums:?}");
    }
    let avg = sums[0] as f64 * spec.delta / t as f64;
    Ok(CycleStats {
        per_node_avg: vec![avg; n],
        xbar_q: avg,
    })
}

fn lemma2_ok(a: &[i64], g: &Graph, rho: f64, spec: &QuantizerSpec, r: &[f64]) -> bool {
    let rho_delta = rho * spec.delta;
    a.iter().enumerate().all(|(i, &ai)| {
        let bound = (1.0 + 6.0 * rho * g.degree(i) as f64) * spec.range_l + r[i].abs();
        rho_delta * ai.abs() as f64 <= bound * (1.0 + 1e-12) + 1e-12
    })
}

/// Run BQ-CADMM until the integer state repeats or the iteration cap hits.
pub fn run(cfg: &BqConfig) -> Result<RunOutcome, BqError> {
    let n = cfg.graph.n();
    let init = match &cfg.init {
        Some(s) => {
            if s.q.len() != n || s.a.len() != n || s.x.len() != n {
                return Err(BqError::BadInit {
                    expected: n,
                    got: s.q.len(),
                });
            }
            s.clone()
        }
        None => IntState::zero(n),
    };

    let mut lemma2_violations = 0u64;
    let mut trace: Option<Vec<TracePoint>> = cfg.record_trace.then(Vec::new);

    let mut seen: HashMap<Vec<i64>, u64> = HashMap::new();
    let mut state = init.clone();
    let mut detected: Option<(u64, u64)> = None; // (k0, period)
    let mut steps = 0u64;

    seen.insert(state.key(), 0);
    if let Some(t) = trace.as_mut() {
        t.push(TracePoint {
            k: 0,
            x: state.x.clone(),
            q: state.q.clone(),
            a: state.a.clone(),
        });
    }

    while steps < cfg.max_iter {
        state = bq_step(&state, cfg.graph, cfg.rho, cfg.r, &cfg.spec)?;
        steps += 1;
        if !lemma2_ok(&state.a, cfg.graph, cfg.rho, &cfg.spec, cfg.r) {
            lemma2_violations += 1;
        }
        if let Some(t) = trace.as_mut() {
            t.push(TracePoint {
                k: steps,
                x: state.x.clone(),
                q: state.q.clone(),
                a: state.a.clone(),
            });
        }
        let key = state.key();
        if let Some(&first) = seen.get(&key) {
            detected = Some((first, steps - first));
            break;
        }
        if seen.len() >= STATE_TABLE_CAP {
            seen.clear();
            detected = brent_detect(&init, cfg, cfg.max_iter.saturating_sub(steps))?;
            break;
        }
        seen.insert(key, steps);
    }
    drop(seen);

    let r_max = cfg.r.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let bound_set = bounds(cfg.rho, cfg.graph, &cfg.spec, r_max);
    let rbar = cfg.r.iter().sum::<f64>() / n as f64;

    let Some((k0, period)) = detected else {
        return Ok(RunOutcome {
            kind: OutcomeKind::Unresolved {
                max_iter: cfg.max_iter,
            },
            iterations: steps,
            bounds: bound_set,
            consensus_error: None,
            lemma2_violations,
            final_state: state,
            trace,
        });
    };

    if period == 1 {
        // period-1 repeat forces Lminus q = 0, i.e. a common level
        assert!(
            state.q.iter().all(|&qi| qi == state.q[0]),
            "period-1 repeat with non-constant levels"
        );
        let q_star = state.q[0];
        let target = project(rbar, cfg.spec.range_l).expect("finite mean");
        let err = (q_star as f64 * cfg.spec.delta - target).abs();
        return Ok(RunOutcome {
            kind: OutcomeKind::Converged { k0, q_star },
            iterations: steps,
            bounds: bound_set,
            consensus_error: Some(err),
            lemma2_violations,
            final_state: state,
            trace,
        });
    }

    // Re-simulate to the cycle start and collect one full period of levels.
    let mut probe = init;
    for _ in 0..k0 {
        probe = bq_step(&probe, cfg.graph, cfg.rho, cfg.r, &cfg.spec)?;
    }
    let mut levels = Vec::with_capacity(period as usize);
    for _ in 0..period {
        levels.push(probe.q.clone());
        probe = bq_step(&probe, cfg.graph, cfg.rho, cfg.r, &cfg.spec)?;
    }
    let sums: Vec<i64> = (0..n)
        .map(|i| levels.iter().map(|row| row[i]).sum())
        .collect();
    assert!(
        sums.iter().all(|&s| s == sums[0]),
        "cyclic sample averages differ across nodes"
    );
    let xbar_q = sums[0] as f64 * cfg.spec.delta / period as f64;
    Ok(RunOutcome {
        kind: OutcomeKind::Cyclic {
            k0,
            period,
            levels,
            xbar_q,
        },
        iterations: steps,
        bounds: bound_set,
        consensus_error: Some((xbar_q - rbar).abs()),
        lemma2_violations,
        final_state: state,
        trace,
    })
}

/// Brent's cycle finding on the deterministic lattice map; O(1) memory
/// fallback when the visited-state table overflows.
fn brent_detect(
    init: &IntState,
    cfg: &BqConfig,
    budget: u64,
) -> Result<Option<(u64, u64)>, BqError> {
    let step = |s: &IntState| bq_step(s, cfg.graph, cfg.rho, cfg.r, &cfg.spec);
    let eq = |a: &IntState, b: &IntState| a.q == b.q && a.a == b.a;

    let mut power = 1u64;
    let mut lam = 1u64;
    let mut tortoise = init.clone();
    let mut hare = step(init)?;
    let mut spent = 1u64;
    while !eq(&tortoise, &hare) {
        if spent >= budget {
            return Ok(None);
        }
        if power == lam {
            tortoise = hare.clone();
            power *= 2;
            lam = 0;
        }
        hare = step(&hare)?;
        lam += 1;
        spent += 1;
    }

    let mut tortoise = init.clone();
    let mut hare = init.clone();
    for _ in 0..lam {
        hare = step(&hare)?;
    }
    let mut mu = 0u64;
    while !eq(&tortoise, &hare) {
        tortoise = step(&tortoise)?;
        hare = step(&hare)?;
        mu += 1;
    }
    Ok(Some((mu, lam)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn two_node() -> Graph {
        Graph::build(2, &[(0, 1)]).unwrap()
    }

    fn spec15() -> QuantizerSpec {
        QuantizerSpec::new(1.0, 5.0).unwrap()
    }

    #[test]
    fn step_matches_hand_oracle() {
        // 2-node, r = (0.3, 1.7), rho = 0.25, delta = 1, L = 5, zero init:
        // x1 = 0.3/1.5 = 0.2, x2 = 1.7/1.5 = 1.1333..., q = (0, 1), a = (-1, 1)
        let g = two_node();
        let r = [0.3, 1.7];
        let spec = spec15();
        let s1 = bq_step(&IntState::zero(2), &g, 0.25, &r, &spec).unwrap();
        assert!((s1.x[0] - 0.2).abs() < 1e-15);
        assert!((s1.x[1] - 17.0 / 15.0).abs() < 1e-15);
        assert_eq!(s1.q, vec![0, 1]);
        assert_eq!(s1.a, vec![-1, 1]);
        // step 2: x = (0.8/1.5, 1.7/1.5), q = (1, 1), a unchanged
        let s2 = bq_step(&s1, &g, 0.25, &r, &spec).unwrap();
        assert!((s2.x[0] - 0.8 / 1.5).abs() < 1e-15);
        assert!((s2.x[1] - 17.0 / 15.0).abs() < 1e-15);
        assert_eq!(s2.q, vec![1, 1]);
        assert_eq!(s2.a, vec![-1, 1]);
        // step 3 repeats the (q, a) pair: period-1 fixed point
        let s3 = bq_step(&s2, &g, 0.25, &r, &spec).unwrap();
        assert_eq!((s3.q, s3.a), (s2.q.clone(), s2.a.clone()));
    }

    #[test]
    fn run_detects_convergence() {
        let g = two_node();
        let r = [0.3, 1.7];
        let cfg = BqConfig::new(&g, &r, 0.25, spec15());
        let out = run(&cfg).unwrap();
        match out.kind {
            OutcomeKind::Converged { k0, q_star } => {
                assert_eq!(k0, 2);
                assert_eq!(q_star, 1);
            }
            ref other => panic!("expected convergence, got {other:?}"),
        }
        // consensus value 1 equals the data mean exactly here
        assert_eq!(out.consensus_error, Some(0.0));
        assert_eq!(out.lemma2_violations, 0);
    }

    #[test]
    fn large_rho_converges_at_zero_in_one_step() {
        // rho > max|r_i| / delta forces |x^1| < delta/2 and an immediate
        // period-1 repeat of the zero state
        let g = two_node();
        let r = [0.3, 1.7];
        let cfg = BqConfig::new(&g, &r, 2.0, spec15());
        let out = run(&cfg).unwrap();
        match out.kind {
            OutcomeKind::Converged { k0, q_star } => {
                assert_eq!(k0, 0);
                assert_eq!(q_star, 0);
                assert_eq!(out.iterations, 1);
            }
            ref other => panic!("expected convergence at zero, got {other:?}"),
        }
    }

    #[test]
    fn gamma0_examples() {
        let spec = QuantizerSpec::new(1.0, 25.0).unwrap();
        // rho = 1/(8 n L): 4 rho n L = 0.5, 1 + 2 rho n = 1.01 -> max is delta/2
        let rho = 1.0 / (8.0 * 50.0 * 25.0);
        assert_eq!(gamma0(rho, 50, &spec), 0.5);
        // large rho limit approaches 2L
        assert!((gamma0(1e9, 50, &spec) - 50.0).abs() < 1e-3);
        // below the exact threshold the max is still delta/2
        let thresh = 1.0 / (2.0 * 50.0 * (4.0 * 25.0 - 1.0));
        assert_eq!(gamma0(thresh, 50, &spec), 0.5);
        assert!(gamma0(thresh * 1.01, 50, &spec) > 0.5);
    }

    #[test]
    fn bound_formulas() {
        let spec = QuantizerSpec::new(1.0, 25.0).unwrap();
        let g = Graph::random_connected(50, 100, &mut crate::rng::Rng::seed_from(3)).unwrap();
        let b = bounds(0.5, &g, &spec, 0.0);
        assert!((b.bound_convergent - 2.5).abs() < 1e-12);
        // n=75, m=200: (1 + 16/3) / 2
        let g = Graph::random_connected(75, 200, &mut crate::rng::Rng::seed_from(3)).unwrap();
        let b = bounds(0.5, &g, &spec, 0.0);
        assert!((b.bound_convergent - (1.0 + 16.0 / 3.0) / 2.0).abs() < 1e-12);
        // Gamma0 = delta/2 makes the two radii coincide
        let g2 = two_node();
        let rho = 1.0 / (2.0 * 2.0 * (4.0 * 5.0 - 1.0));
        let b = bounds(rho, &g2, &spec15(), 0.0);
        assert_eq!(b.bound_cyclic, b.bound_convergent);
    }

    #[test]
    fn state_count_diagnostic() {
        let g = two_node();
        let spec = spec15();
        let b = bounds(0.5, &g, &spec, 3.0);
        // (2L + 1) ((L + max|r|) / rho + 6 n L) with delta = 1
        let want = 11.0 * ((5.0 + 3.0) / 0.5 + 6.0 * 2.0 * 5.0);
        assert_eq!(b.state_count_b, want);
    }

    #[test]
    fn corollary1_cases() {
        let g = two_node();
        let spec = spec15();
        // rho = 0.01 < n/(4m) = 0.5; Gamma0 = 0.5 so radius = 0.51 < 13 - 5
        let pred = corollary1_predict(0.01, &g, &spec, 13.0);
        assert_eq!(pred, Some(ForcedOutcome::Level(5)));
        let pred = corollary1_predict(0.01, &g, &spec, -13.0);
        assert_eq!(pred, Some(ForcedOutcome::Level(-5)));
        assert_eq!(corollary1_predict(0.01, &g, &spec, 0.0), None);
        // large rho: premise can hold but the level is not pinned
        let pred = corollary1_predict(1.0, &g, &spec, 200.0);
        assert_eq!(pred, Some(ForcedOutcome::SomeLevel));
    }

    #[test]
    fn forced_level_reached() {
        let g = two_node();
        let spec = spec15();
        let r = [12.5, 13.5];
        let cfg = BqConfig::new(&g, &r, 0.01, spec);
        let out = run(&cfg).unwrap();
        match out.kind {
            OutcomeKind::Converged { q_star, .. } => assert_eq!(q_star, 5),
            ref other => panic!("expected forced convergence, got {other:?}"),
        }
    }

    #[test]
    fn determinism() {
        let g = Graph::random_connected(10, 20, &mut crate::rng::Rng::seed_from(1)).unwrap();
        let r: Vec<f64> = (0..10).map(|i| (i as f64) * 1.7 - 5.0).collect();
        let spec = QuantizerSpec::new(1.0, 30.0).unwrap();
        let cfg = BqConfig::new(&g, &r, 0.5, spec);
        let a = run(&cfg).unwrap();
        let b = run(&cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dual_sum_zero_every_iteration() {
        let g = Graph::star(6).unwrap();
        let r = [4.0, -2.0, 7.5, 0.3, -9.0, 1.0];
        let spec = QuantizerSpec::new(1.0, 10.0).unwrap();
        let mut s = IntState::zero(6);
        for _ in 0..200 {
            s = bq_step(&s, &g, 0.4, &r, &spec).unwrap();
            assert_eq!(s.a.iter().sum::<i64>(), 0);
        }
    }

    #[test]
    fn trace_recorded_when_requested() {
        let g = two_node();
        let r = [0.3, 1.7];
        let mut cfg = BqConfig::new(&g, &r, 0.25, spec15());
        cfg.record_trace = true;
        let out = run(&cfg).unwrap();
        let trace = out.trace.unwrap();
        assert_eq!(trace[0].k, 0);
        assert_eq!(trace.len() as u64, out.iterations + 1);
    }

    #[test]
    fn warm_start_dimension_checked() {
        let g = two_node();
        let r = [0.3, 1.7];
        let mut cfg = BqConfig::new(&g, &r, 0.25, spec15());
        cfg.init = Some(IntState::zero(3));
        assert!(matches!(run(&cfg), Err(BqError::BadInit { .. })));
    }

    #[test]
    fn brent_agrees_with_table_detection() {
        let g = Graph::star(5).unwrap();
        let r = [3.3, -1.2, 0.7, 2.9, -4.1];
        let spec = QuantizerSpec::new(1.0, 30.0).unwrap();
        for rho_mult in [0.3, 0.5, 1.0, 5.0] {
            let rho = rho_mult * 5.0 / 4.0;
            let cfg = BqConfig::new(&g, &r, rho, spec);
            let out = run(&cfg).unwrap();
            let brent = brent_detect(&IntState::zero(5), &cfg, 1_000_000)
                .unwrap()
                .expect("cycle exists");
            match out.kind {
                OutcomeKind::Converged { k0, .. } => assert_eq!(brent, (k0, 1)),
                OutcomeKind::Cyclic { k0, period, .. } => assert_eq!(brent, (k0, period)),
                OutcomeKind::Unresolved { .. } => panic!("unresolved"),
            }
        }
    }

    #[test]
    fn cycle_stats_consistent_when_cycling() {
        // scan a rho grid on small instances until a cycle turns up
        let spec = QuantizerSpec::new(1.0, 30.0).unwrap();
        let mut found = false;
        'outer: for seed in 0..40u64 {
            let mut rng = crate::rng::Rng::seed_from(seed);
            let g = Graph::star(5).unwrap();
            let r: Vec<f64> = (0..5).map(|_| 10.0 * rng.next_normal()).collect();
            for mult in [0.2, 0.35, 0.5, 0.75, 1.0, 2.0, 5.0] {
                let rho = mult * g.n() as f64 / g.m() as f64;
                let cfg = BqConfig::new(&g, &r, rho, spec);
                let out = run(&cfg).unwrap();
                if let OutcomeKind::Cyclic { period, .. } = out.kind {
                    assert!(period >= 2);
                    let stats = cycle_stats(&out, &spec).unwrap();
                    assert!(stats.per_node_avg.iter().all(|&v| v == stats.xbar_q));
                    let err = out.consensus_error.unwrap();
                    assert!(err <= out.bounds.bound_cyclic + 1e-12);
                    found = true;
                    break 'outer;
                }
            }
        }
        assert!(found, "no cyclic instance located in the scan grid");
    }

    #[test]
    fn cycle_stats_rejects_converged() {
        let g = two_node();
        let r = [0.3, 1.7];
        let out = run(&BqConfig::new(&g, &r, 0.25, spec15())).unwrap();
        assert_eq!(cycle_stats(&out, &spec15()), Err(BqError::NotCyclic));
    }
}

//! Seeded Monte Carlo harness: scenario configuration, data sampling,
//! repeated runs, and the sweep/table summaries behind the reproduction
//! commands.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::params::{rho_heuristic, RhoSchedule};
use crate::quantizer::{QuantizerError, QuantizerSpec};
use crate::rng::{sub_seed, Rng};
use crate::strategy::{AlgoResult, AlgorithmRegistry, ResolvedRho, RunContext, RunError};

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("runs must be at least 1")]
    NoRuns,
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Quantizer(#[from] QuantizerError),
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("invalid step size {0}")]
    BadRho(f64),
}

/// Graph family plus size; random families are redrawn per run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Star { n: usize },
    Complete { n: usize },
    /// Random connected with edge count halfway between tree and complete:
    /// `m = ceil((n + 2)(n - 1) / 4)`.
    Intermediate { n: usize },
    RandomConnected { n: usize, m: usize },
    Explicit { n: usize, edges: Vec<(usize, usize)> },
}

/// Edge count used by the intermediate family.
pub fn intermediate_m(n: usize) -> usize {
    ((n + 2) * (n - 1) + 3) / 4
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::Star { n }
            | GraphSpec::Complete { n }
            | GraphSpec::Intermediate { n }
            | GraphSpec::RandomConnected { n, .. }
            | GraphSpec::Explicit { n, .. } => n,
        }
    }

    /// Whether realizations differ across runs.
    pub fn is_random(&self) -> bool {
        matches!(
            self,
            GraphSpec::Intermediate { .. } | GraphSpec::RandomConnected { .. }
        )
    }

    pub fn realize(&self, rng: &mut Rng) -> Result<Graph, GraphError> {
        match self {
            GraphSpec::Star { n } => Graph::star(*n),
            GraphSpec::Complete { n } => Graph::complete(*n),
            GraphSpec::Intermediate { n } => Graph::random_connected(*n, intermediate_m(*n), rng),
            GraphSpec::RandomConnected { n, m } => Graph::random_connected(*n, *m, rng),
            GraphSpec::Explicit { n, edges } => Graph::build(*n, edges),
        }
    }
}

/// Per-node data model: `r_i = mean + std z_i + r0 + offset` with
/// `r0 = common_std z0` shared across nodes.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct DataSpec {
    pub mean: f64,
    pub std: f64,
    pub common_std: f64,
    pub offset: f64,
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec {
            mean: 0.0,
            std: 1.0,
            common_std: 0.0,
            offset: 0.0,
        }
    }
}

/// Sample one run's data vector. The shared shift is drawn first so the
/// stream layout is stable regardless of `common_std`.
pub fn sample_data(spec: &DataSpec, n: usize, rng: &mut Rng) -> Vec<f64> {
    let r0 = spec.common_std * rng.next_normal();
    (0..n)
        .map(|_| spec.mean + spec.std * rng.next_normal() + r0 + spec.offset)
        .collect()
}

/// Step-size policy; `heuristic` means `rho = n / m` of the realized graph.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "policy", rename_all = "snake_case", deny_unknown_fields)]
pub enum RhoPolicy {
    Fixed { value: f64 },
    Heuristic,
    Schedule(RhoSchedule),
}

impl RhoPolicy {
    pub fn resolve(&self, g: &Graph) -> Result<ResolvedRho, ScenarioError> {
        match self {
            RhoPolicy::Fixed { value } => {
                if !value.is_finite() || *value <= 0.0 {
                    return Err(ScenarioError::BadRho(*value));
                }
                Ok(ResolvedRho::Fixed(*value))
            }
            RhoPolicy::Heuristic => Ok(ResolvedRho::Fixed(rho_heuristic(g.n(), Some(g.m())))),
            RhoPolicy::Schedule(s) => Ok(ResolvedRho::Schedule(s.clone())),
        }
    }
}

fn default_max_iter() -> u64 {
    1_000_000
}

fn default_true() -> bool {
    true
}

/// Full description of a repeatable experiment.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub graph: GraphSpec,
    #[serde(default)]
    pub data: DataSpec,
    pub delta: f64,
    pub range_l: f64,
    pub rho: RhoPolicy,
    pub algorithm: String,
    pub runs: u64,
    pub seed: u64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
    #[serde(default)]
    pub inner_budget: Option<u64>,
    #[serde(default = "default_true")]
    pub enforce_ebq_precondition: bool,
    #[serde(default)]
    pub trace: bool,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if self.runs == 0 {
            return Err(ScenarioError::NoRuns);
        }
        QuantizerSpec::new(self.delta, self.range_l)?;
        // realize once to catch graph/rho problems up front
        let mut rng = Rng::seed_from(sub_seed(self.seed, 0));
        let g = self.graph.realize(&mut rng)?;
        self.rho.resolve(&g)?;
        Ok(())
    }
}

/// One line of JSONL output: the normalized result plus run bookkeeping.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunRecord {
    pub run: u64,
    pub n: usize,
    pub m: usize,
    pub rbar: f64,
    #[serde(flatten)]
    pub result: AlgoResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Execute every repetition of a scenario. Runs are independent — each one
/// reseeds from `sub_seed(seed, run)` — so the output is identical whether
/// or not they execute in parallel. Per-run algorithm failures become
/// records with `kind = "failed"` rather than aborting the batch.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Vec<RunRecord>, ScenarioError> {
    cfg.validate()?;
    let registry = AlgorithmRegistry::with_builtins();
    let spec = QuantizerSpec::new(cfg.delta, cfg.range_l)?;
    registry.get(&cfg.algorithm)?;
    let records: Vec<RunRecord> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| single_run(cfg, &registry, spec, run))
        .collect();
    Ok(records)
}

/// Same as [`run_scenario`] but sequential; byte-identical output.
pub fn run_scenario_serial(cfg: &ScenarioConfig) -> Result<Vec<RunRecord>, ScenarioError> {
    cfg.validate()?;
    let registry = AlgorithmRegistry::with_builtins();
    let spec = QuantizerSpec::new(cfg.delta, cfg.range_l)?;
    registry.get(&cfg.algorithm)?;
    Ok((0..cfg.runs)
        .map(|run| single_run(cfg, &registry, spec, run))
        .collect())
}

fn single_run(
    cfg: &ScenarioConfig,
    registry: &AlgorithmRegistry,
    spec: QuantizerSpec,
    run: u64,
) -> RunRecord {
    let mut rng = Rng::seed_from(sub_seed(cfg.seed, run));
    let g = match cfg.graph.realize(&mut rng) {
        Ok(g) => g,
        Err(e) => return failed_record(run, cfg.graph.n(), 0, 0.0, e.to_string()),
    };
    let r = sample_data(&cfg.data, g.n(), &mut rng);
    let rbar = r.iter().sum::<f64>() / g.n() as f64;
    let rho = match cfg.rho.resolve(&g) {
        Ok(rho) => rho,
        Err(e) => return failed_record(run, g.n(), g.m(), rbar, e.to_string()),
    };
    let ctx = RunContext {
        graph: &g,
        r: &r,
        rho,
        spec,
        max_iter: cfg.max_iter,
        inner_budget: cfg.inner_budget,
        enforce_ebq_precondition: cfg.enforce_ebq_precondition,
        trace: cfg.trace,
    };
    let algo = registry.get(&cfg.algorithm).expect("checked in caller");
    match algo.execute(&ctx) {
        Ok(result) => RunRecord {
            run,
            n: g.n(),
            m: g.m(),
            rbar,
            result,
            note: None,
        },
        Err(e) => failed_record(run, g.n(), g.m(), rbar, e.to_string()),
    }
}

fn failed_record(run: u64, n: usize, m: usize, rbar: f64, note: String) -> RunRecord {
    RunRecord {
        run,
        n,
        m,
        rbar,
        result: AlgoResult {
            kind: "failed".into(),
            k0: None,
            period: None,
            value: None,
            error: None,
            iterations: 0,
            calls: None,
            t_star: None,
            rho: 0.0,
            gamma0: 0.0,
            bound_convergent: 0.0,
            bound_cyclic: 0.0,
            lemma2_violations: 0,
            iterative_error: None,
        },
        note: Some(note),
    }
}

/// Serialize records as JSON Lines, one record per line.
pub fn to_jsonl(records: &[RunRecord]) -> String {
    let mut out = String::new();
    for rec in records {
        out.push_str(&serde_json::to_string(rec).expect("record serializes"));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// Sweeps over (family, n, rho) grids.

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    Star,
    Intermediate,
    Complete,
}

impl FamilyKind {
    pub fn label(&self) -> &'static str {
        match self {
            FamilyKind::Star => "star",
            FamilyKind::Intermediate => "intermediate",
            FamilyKind::Complete => "complete",
        }
    }

    pub fn spec(&self, n: usize) -> GraphSpec {
        match self {
            FamilyKind::Star => GraphSpec::Star { n },
            FamilyKind::Intermediate => GraphSpec::Intermediate { n },
            FamilyKind::Complete => GraphSpec::Complete { n },
        }
    }

    pub fn edge_count(&self, n: usize) -> usize {
        match self {
            FamilyKind::Star => n - 1,
            FamilyKind::Intermediate => intermediate_m(n),
            FamilyKind::Complete => n * (n - 1) / 2,
        }
    }
}

/// Default grid of step-size multipliers of `n / m`, log-spaced.
pub fn default_multipliers() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2]
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub families: Vec<FamilyKind>,
    pub n_list: Vec<usize>,
    /// Multipliers applied to the `n / m` baseline of each cell.
    pub multipliers: Vec<f64>,
    pub runs: u64,
    pub seed: u64,
    #[serde(default)]
    pub data: DataSpec,
    pub delta: f64,
    pub range_l: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: u64,
}

/// One summary row of a sweep grid cell.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct SweepRow {
    pub family: String,
    pub n: usize,
    pub m: usize,
    pub rho: f64,
    pub metric: String,
    pub value: f64,
    pub runs: u64,
    pub seed: u64,
}

fn sweep_cells(cfg: &SweepConfig) -> Vec<(FamilyKind, usize, f64, u64)> {
    let mut cells = Vec::new();
    let mut idx = 0u64;
    for &family in &cfg.families {
        for &n in &cfg.n_list {
            for &mult in &cfg.multipliers {
                cells.push((family, n, mult, sub_seed(cfg.seed, idx)));
                idx += 1;
            }
        }
    }
    cells
}

fn cell_scenario(
    cfg: &SweepConfig,
    family: FamilyKind,
    n: usize,
    rho: f64,
    seed: u64,
) -> ScenarioConfig {
    ScenarioConfig {
        graph: family.spec(n),
        data: cfg.data,
        delta: cfg.delta,
        range_l: cfg.range_l,
        rho: RhoPolicy::Fixed { value: rho },
        algorithm: "bq".into(),
        runs: cfg.runs,
        seed,
        max_iter: cfg.max_iter,
        inner_budget: None,
        enforce_ebq_precondition: true,
        trace: false,
    }
}

/// Fraction of runs that end in a cycle, per grid cell.
pub fn cyclic_probability_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ScenarioError> {
    sweep_metric(cfg, "cyclic_fraction", |records| {
        let cyclic = records.iter().filter(|r| r.result.kind == "cyclic").count();
        cyclic as f64 / records.len() as f64
    })
}

/// Mean convergence time (`k0`, plus the period for cyclic runs), per cell.
/// Unresolved runs count at the iteration cap.
pub fn convergence_time_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>, ScenarioError> {
    sweep_metric(cfg, "mean_convergence_time", |records| {
        let total: f64 = records
            .iter()
            .map(|r| match r.result.kind.as_str() {
                "converged" => r.result.k0.unwrap_or(0) as f64,
                "cyclic" => {
                    (r.result.k0.unwrap_or(0) + r.result.period.unwrap_or(0)) as f64
                }
                _ => r.result.iterations as f64,
            })
            .sum();
        total / records.len() as f64
    })
}

fn sweep_metric(
    cfg: &SweepConfig,
    metric: &str,
    summarize: impl Fn(&[RunRecord]) -> f64 + Sync,
) -> Result<Vec<SweepRow>, ScenarioError> {
    let cells = sweep_cells(cfg);
    let rows: Result<Vec<SweepRow>, ScenarioError> = cells
        .into_par_iter()
        .map(|(family, n, mult, seed)| {
            let m = family.edge_count(n);
            let rho = mult * n as f64 / m as f64;
            let scenario = cell_scenario(cfg, family, n, rho, seed);
            let records = run_scenario_serial(&scenario)?;
            Ok(SweepRow {
                family: family.label().into(),
                n,
                m,
                rho,
                metric: metric.into(),
                value: summarize(&records),
                runs: cfg.runs,
                seed,
            })
        })
        .collect();
    rows
}

/// Mean iteration counts of the decreasing-step schedule against a small
/// fixed step equal to the schedule floor, per (family, n) cell.
pub fn table1_comparison(
    cfg: &SweepConfig,
    schedule: &RhoSchedule,
) -> Result<Vec<SweepRow>, ScenarioError> {
    let mut rows = Vec::new();
    let mut idx = 0u64;
    for &family in &cfg.families {
        for &n in &cfg.n_list {
            let m = family.edge_count(n);
            let seed = sub_seed(cfg.seed, idx);
            idx += 1;
            let mut sched = schedule.clone();
            sched.rho0 = n as f64 / m as f64;
            let mut scen = cell_scenario(cfg, family, n, sched.rho0, seed);
            scen.rho = RhoPolicy::Schedule(sched.clone());
            let dec = run_scenario(&scen)?;
            let mut fixed_scen = cell_scenario(cfg, family, n, schedule.floor, seed);
            fixed_scen.max_iter = cfg.max_iter;
            let fixed = run_scenario(&fixed_scen)?;
            let mean_iters = |records: &[RunRecord]| {
                records
                    .iter()
                    .map(|r| match r.result.kind.as_str() {
                        "converged" => r.result.k0.unwrap_or(r.result.iterations) as f64,
                        "cyclic" => {
                            (r.result.k0.unwrap_or(0) + r.result.period.unwrap_or(0)) as f64
                        }
                        _ => r.result.iterations as f64,
                    })
                    .sum::<f64>()
                    / records.len() as f64
            };
            // schedule totals include every stage, not just the last
            let dec_mean = dec
                .iter()
                .map(|r| r.result.iterations as f64)
                .sum::<f64>()
                / dec.len() as f64;
            rows.push(SweepRow {
                family: family.label().into(),
                n,
                m,
                rho: sched.rho0,
                metric: "mean_iters_decreasing".into(),
                value: dec_mean,
                runs: cfg.runs,
                seed,
            });
            rows.push(SweepRow {
                family: family.label().into(),
                n,
                m,
                rho: schedule.floor,
                metric: "mean_iters_fixed".into(),
                value: mean_iters(&fixed),
                runs: cfg.runs,
                seed,
            });
        }
    }
    Ok(rows)
}

/// Hand-formatted CSV so reruns are byte identical across platforms.
pub fn to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("family,n,m,rho,metric,value,runs,seed\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            row.family, row.n, row.m, row.rho, row.metric, row.value, row.runs, row.seed
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_scenario() -> ScenarioConfig {
        ScenarioConfig {
            graph: GraphSpec::Star { n: 5 },
            data: DataSpec {
                mean: 0.0,
                std: 2.0,
                common_std: 0.0,
                offset: 0.0,
            },
            delta: 1.0,
            range_l: 10.0,
            rho: RhoPolicy::Heuristic,
            algorithm: "bq".into(),
            runs: 8,
            seed: 42,
            max_iter: 100_000,
            inner_budget: None,
            enforce_ebq_precondition: true,
            trace: false,
        }
    }

    #[test]
    fn intermediate_edge_counts() {
        // halfway between tree (n-1) and complete (n(n-1)/2), rounded up
        assert_eq!(intermediate_m(5), 7);
        assert_eq!(intermediate_m(10), 27);
        assert_eq!(intermediate_m(20), 105);
        assert_eq!(intermediate_m(50), 637);
        for n in 2..60 {
            let lo = n - 1;
            let hi = n * (n - 1) / 2;
            let m = intermediate_m(n);
            assert!(m >= lo && m <= hi);
        }
    }

    #[test]
    fn sample_data_layout_is_stable() {
        let spec = DataSpec {
            mean: 3.0,
            std: 0.0,
            common_std: 0.0,
            offset: 1.0,
        };
        let mut rng = Rng::seed_from(7);
        let r = sample_data(&spec, 4, &mut rng);
        assert_eq!(r, vec![4.0; 4]);
        // same per-node draws regardless of the shared-shift width
        let mut rng_a = Rng::seed_from(9);
        let mut rng_b = Rng::seed_from(9);
        let a = sample_data(
            &DataSpec {
                mean: 0.0,
                std: 1.0,
                common_std: 0.0,
                offset: 0.0,
            },
            3,
            &mut rng_a,
        );
        let b = sample_data(
            &DataSpec {
                mean: 0.0,
                std: 1.0,
                common_std: 5.0,
                offset: 0.0,
            },
            3,
            &mut rng_b,
        );
        let r0 = b[0] - a[0];
        for i in 0..3 {
            assert!((b[i] - a[i] - r0).abs() < 1e-12);
        }
    }

    #[test]
    fn scenario_runs_are_deterministic_and_parallel_safe() {
        let cfg = small_scenario();
        let par = run_scenario(&cfg).unwrap();
        let ser = run_scenario_serial(&cfg).unwrap();
        assert_eq!(par, ser);
        assert_eq!(to_jsonl(&par), to_jsonl(&ser));
        assert_eq!(par.len(), 8);
        for (i, rec) in par.iter().enumerate() {
            assert_eq!(rec.run, i as u64);
            assert_ne!(rec.result.kind, "failed");
        }
        // reruns of a single run match the batch entry
        let mut one = cfg.clone();
        one.runs = 1;
        one.seed = cfg.seed;
        let first = run_scenario(&one).unwrap();
        assert_eq!(first[0], par[0]);
    }

    #[test]
    fn scenario_config_json_round_trip() {
        let cfg = small_scenario();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        // unknown fields rejected
        let bad = r#"{"graph":{"family":"star","n":5},"delta":1.0,"range_l":10.0,
            "rho":{"policy":"heuristic"},"algorithm":"bq","runs":1,"seed":1,"bogus":3}"#;
        assert!(serde_json::from_str::<ScenarioConfig>(bad).is_err());
    }

    #[test]
    fn scenario_validation_errors() {
        let mut cfg = small_scenario();
        cfg.runs = 0;
        assert!(matches!(cfg.validate(), Err(ScenarioError::NoRuns)));
        let mut cfg = small_scenario();
        cfg.delta = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = small_scenario();
        cfg.rho = RhoPolicy::Fixed { value: 0.0 };
        assert!(matches!(cfg.validate(), Err(ScenarioError::BadRho(_))));
        let mut cfg = small_scenario();
        cfg.algorithm = "nope".into();
        assert!(run_scenario(&cfg).is_err());
    }

    #[test]
    fn heuristic_rho_matches_realized_graph() {
        let cfg = ScenarioConfig {
            graph: GraphSpec::Complete { n: 4 },
            rho: RhoPolicy::Heuristic,
            ..small_scenario()
        };
        let recs = run_scenario(&cfg).unwrap();
        for rec in &recs {
            assert!((rec.result.rho - 4.0 / 6.0).abs() < 1e-15);
            assert_eq!(rec.m, 6);
        }
    }

    #[test]
    fn sweep_rows_cover_grid_and_csv_is_stable() {
        let cfg = SweepConfig {
            families: vec![FamilyKind::Star, FamilyKind::Complete],
            n_list: vec![5],
            multipliers: vec![0.1, 1.0],
            runs: 4,
            seed: 11,
            data: DataSpec::default(),
            delta: 1.0,
            range_l: 10.0,
            max_iter: 100_000,
        };
        let rows = cyclic_probability_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 4);
        assert_eq!(rows[0].family, "star");
        assert_eq!(rows[0].m, 4);
        assert_eq!(rows[3].family, "complete");
        assert!((rows[3].rho - 5.0 / 10.0).abs() < 1e-15);
        for row in &rows {
            assert!((0.0..=1.0).contains(&row.value));
        }
        let csv_a = to_csv(&rows);
        let csv_b = to_csv(&cyclic_probability_sweep(&cfg).unwrap());
        assert_eq!(csv_a, csv_b);
        assert!(csv_a.starts_with("family,n,m,rho,metric,value,runs,seed\n"));

        let times = convergence_time_sweep(&cfg).unwrap();
        assert_eq!(times.len(), 4);
        for row in &times {
            assert_eq!(row.metric, "mean_convergence_time");
            assert!(row.value >= 0.0);
        }
    }

    #[test]
    fn table_rows_pair_schedule_and_fixed() {
        let cfg = SweepConfig {
            families: vec![FamilyKind::Star],
            n_list: vec![5],
            multipliers: vec![1.0],
            runs: 3,
            seed: 3,
            data: DataSpec::default(),
            delta: 1.0,
            range_l: 10.0,
            max_iter: 200_000,
        };
        let sched = RhoSchedule {
            rho0: 1.0,
            factor: 10,
            block: 50,
            floor: 1e-2,
        };
        let rows = table1_comparison(&cfg, &sched).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].metric, "mean_iters_decreasing");
        assert_eq!(rows[1].metric, "mean_iters_fixed");
        // schedule start is rebased to n / m for each cell
        assert!((rows[0].rho - 5.0 / 4.0).abs() < 1e-15);
        assert!((rows[1].rho - 1e-2).abs() < 1e-15);
        assert!(rows[0].value > 0.0 && rows[1].value > 0.0);
    }

    #[test]
    fn ebq_scenario_reaches_out_of_range_mean() {
        let cfg = ScenarioConfig {
            graph: GraphSpec::Star { n: 4 },
            data: DataSpec {
                mean: 25.0,
                std: 0.5,
                common_std: 0.0,
                offset: 0.0,
            },
            delta: 1.0,
            range_l: 10.0,
            rho: RhoPolicy::Fixed { value: 1.0 / 320.0 },
            algorithm: "ebq".into(),
            runs: 4,
            seed: 5,
            max_iter: 1_000_000,
            inner_budget: None,
            enforce_ebq_precondition: true,
            trace: false,
        };
        let recs = run_scenario(&cfg).unwrap();
        for rec in &recs {
            assert_eq!(rec.result.kind, "converged");
            let err = rec.result.error.unwrap();
            assert!(err <= rec.result.bound_convergent + 1e-12);
        }
    }
}

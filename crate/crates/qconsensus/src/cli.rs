//! Command-line front end: scenario runs, sweep grids, canned reproduction
//! targets, graph generation, and config validation.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bq::{self, BqConfig, OutcomeKind};
use crate::cadmm::{self, CadmmState};
use crate::ebq::{self, EbqOptions};
use crate::experiments::{
    self, cyclic_probability_sweep, convergence_time_sweep, default_multipliers, run_scenario,
    table1_comparison, to_csv, to_jsonl, DataSpec, FamilyKind, GraphSpec, RhoPolicy,
    ScenarioConfig, SweepConfig,
};
use crate::graph::Graph;
use crate::params::RhoSchedule;
use crate::quantizer::QuantizerSpec;
use crate::rng::{sub_seed, Rng};

/// Exit code 1: bad input (flags, config files, infeasible parameters).
/// Exit code 2: failure while running or writing output.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "qconsensus",
    version,
    about = "Distributed averaging with quantized ADMM: simulation and experiments"
)]
pub struct Cli {
    /// Worker threads for parallel runs (default: all cores).
    #[arg(long, global = true)]
    pub parallel: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Execute a scenario config and emit one JSON record per run.
    Run {
        /// Scenario config (JSON).
        config: PathBuf,
        /// Override the config's base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the number of repetitions.
        #[arg(long)]
        runs: Option<u64>,
        /// Override the per-run iteration cap.
        #[arg(long)]
        max_iter: Option<u64>,
        /// Output JSONL path (stdout if omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write a per-iteration trace CSV of run 0 to this path.
        #[arg(long)]
        trace_out: Option<PathBuf>,
    },
    /// Summarize a (family, n, rho) grid into CSV.
    Sweep {
        /// Sweep config (JSON).
        config: PathBuf,
        #[arg(long, value_enum, default_value = "cyclic")]
        metric: SweepMetric,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild a canned experiment and write its outputs to a directory.
    Reproduce {
        target: ReproduceTarget,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 12345)]
        seed: u64,
        /// Override the default repetition count of the target.
        #[arg(long)]
        runs: Option<u64>,
    },
    /// Generate a graph file.
    GraphGen {
        #[arg(value_enum)]
        family: GraphFamily,
        n: usize,
        /// Edge count (random family only).
        #[arg(long)]
        m: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a scenario config without running it.
    Validate {
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
pub enum SweepMetric {
    Cyclic,
    Time,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum ReproduceTarget {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Table1,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum GraphFamily {
    Star,
    Complete,
    Intermediate,
    Random,
}

pub fn main_entry<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Validation(e.to_string()))?;
    if let Some(threads) = cli.parallel {
        // best effort; a pool may already exist in-process (tests)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    dispatch(cli.command)
}

fn dispatch(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Run {
            config,
            seed,
            runs,
            max_iter,
            out,
            trace_out,
        } => {
            let mut cfg = load_scenario(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(r) = runs {
                cfg.runs = r;
            }
            if let Some(mi) = max_iter {
                cfg.max_iter = mi;
            }
            cfg.validate().map_err(validation)?;
            if trace_out.is_some() {
                cfg.trace = true;
            }
            let records = run_scenario(&cfg).map_err(runtime)?;
            emit(out.as_deref(), &to_jsonl(&records))?;
            if let Some(path) = trace_out {
                let csv = trace_csv(&cfg)?;
                emit(Some(&path), &csv)?;
            }
            Ok(())
        }
        Command::Sweep {
            config,
            metric,
            out,
        } => {
            let cfg = load_sweep(&config)?;
            let rows = match metric {
                SweepMetric::Cyclic => cyclic_probability_sweep(&cfg),
                SweepMetric::Time => convergence_time_sweep(&cfg),
            }
            .map_err(runtime)?;
            emit(out.as_deref(), &to_csv(&rows))
        }
        Command::Reproduce {
            target,
            out_dir,
            seed,
            runs,
        } => reproduce(target, &out_dir, seed, runs),
        Command::GraphGen {
            family,
            n,
            m,
            seed,
            out,
        } => {
            let mut rng = Rng::seed_from(seed);
            let g = match family {
                GraphFamily::Star => Graph::star(n),
                GraphFamily::Complete => Graph::complete(n),
                GraphFamily::Intermediate => {
                    Graph::random_connected(n, experiments::intermediate_m(n), &mut rng)
                }
                GraphFamily::Random => {
                    let m = m.ok_or_else(|| {
                        CliError::Validation("--m is required for the random family".into())
                    })?;
                    Graph::random_connected(n, m, &mut rng)
                }
            }
            .map_err(validation)?;
            let text = serde_json::to_string_pretty(&g.to_file()).expect("graph serializes");
            emit(out.as_deref(), &(text + "\n"))
        }
        Command::Validate { config } => {
            let cfg = load_scenario(&config)?;
            cfg.validate().map_err(validation)?;
            println!("ok");
            Ok(())
        }
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_scenario(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn load_sweep(path: &Path) -> Result<SweepConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            if let Some(parent) = p.parent() {
                if !parent.as_os_str().is_empty() {
                    fs::create_dir_all(parent)
                        .map_err(|e| CliError::Runtime(format!("{}: {e}", parent.display())))?;
                }
            }
            fs::write(p, text).map_err(|e| CliError::Runtime(format!("{}: {e}", p.display())))
        }
    }
}

/// Per-iteration trace of run 0 of a scenario, as CSV.
///
/// Quantized algorithms use `k,node,x,q_level,alpha`; the exact baseline
/// uses `k,node,x,alpha`. The extended driver concatenates its inner calls
/// with `x` shifted by the offset accumulated so far.
pub fn trace_csv(cfg: &ScenarioConfig) -> Result<String, CliError> {
    let spec = QuantizerSpec::new(cfg.delta, cfg.range_l).map_err(validation)?;
    let mut rng = Rng::seed_from(sub_seed(cfg.seed, 0));
    let g = cfg.graph.realize(&mut rng).map_err(validation)?;
    let r = experiments::sample_data(&cfg.data, g.n(), &mut rng);
    let rho = match cfg.rho.resolve(&g).map_err(validation)? {
        crate::strategy::ResolvedRho::Fixed(v) => v,
        crate::strategy::ResolvedRho::Schedule(s) => s.rho0,
    };
    match cfg.algorithm.as_str() {
        "cadmm" => {
            let rbar = r.iter().sum::<f64>() / g.n() as f64;
            let mut out = String::from("k,node,x,alpha\n");
            let mut s = CadmmState::zero(g.n());
            push_cadmm_rows(&mut out, &s);
            for _ in 0..cfg.max_iter {
                s = cadmm::cadmm_step(&s, &g, rho, &r, None);
                push_cadmm_rows(&mut out, &s);
                let err = s
                    .x
                    .iter()
                    .map(|&xi| (xi - rbar).abs())
                    .fold(0.0, f64::max);
                if err <= 1e-12 {
                    break;
                }
            }
            Ok(out)
        }
        "bq" => {
            let mut bcfg = BqConfig::new(&g, &r, rho, spec);
            bcfg.max_iter = cfg.max_iter;
            bcfg.record_trace = true;
            let outcome = bq::run(&bcfg).map_err(runtime)?;
            let mut out = String::from("k,node,x,q_level,alpha\n");
            for p in outcome.trace.as_deref().unwrap_or(&[]) {
                push_bq_rows(&mut out, p.k, &p.x, &p.q, &p.a, rho, spec.delta, 0.0);
            }
            Ok(out)
        }
        "ebq" => {
            let mut bcfg = BqConfig::new(&g, &r, rho, spec);
            bcfg.max_iter = cfg.max_iter;
            bcfg.record_trace = true;
            let opts = EbqOptions {
                enforce_precondition: cfg.enforce_ebq_precondition,
                inner_budget: cfg.inner_budget,
            };
            let outcome = ebq::run_ebq(&bcfg, &opts).map_err(runtime)?;
            let mut out = String::from("k,node,x,q_level,alpha\n");
            let mut t = 0.0;
            let mut k = 0u64;
            for (idx, call) in outcome.calls.iter().enumerate() {
                for p in call
                    .trace
                    .as_deref()
                    .unwrap_or(&[])
                    .iter()
                    .skip(if idx == 0 { 0 } else { 1 })
                {
                    let shifted: Vec<f64> = p.x.iter().map(|&xi| xi + t).collect();
                    push_bq_rows(&mut out, k, &shifted, &p.q, &p.a, rho, spec.delta, t);
                    k += 1;
                }
                if idx + 1 < outcome.calls.len() {
                    if let OutcomeKind::Converged { q_star, .. } = call.kind {
                        t += (q_star.signum() as f64) * spec.range_l;
                    }
                }
            }
            Ok(out)
        }
        other => Err(CliError::Validation(format!(
            "no trace format for algorithm {other:?}"
        ))),
    }
}

fn push_cadmm_rows(out: &mut String, s: &CadmmState) {
    for (i, (&x, &a)) in s.x.iter().zip(&s.alpha).enumerate() {
        out.push_str(&format!("{},{},{},{}\n", s.k, i, x, a));
    }
}

#[allow(clippy::too_many_arguments)]
fn push_bq_rows(
    out: &mut String,
    k: u64,
    x: &[f64],
    q: &[i64],
    a: &[i64],
    rho: f64,
    delta: f64,
    _t: f64,
) {
    for i in 0..x.len() {
        let alpha = a[i] as f64 * rho * delta;
        out.push_str(&format!("{},{},{},{},{}\n", k, i, x[i], q[i], alpha));
    }
}

// ---------------------------------------------------------------------------
// Canned reproduction targets.

fn reproduce(
    target: ReproduceTarget,
    out_dir: &Path,
    seed: u64,
    runs: Option<u64>,
) -> Result<(), CliError> {
    fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", out_dir.display())))?;
    match target {
        ReproduceTarget::Fig1 => reproduce_fig1(out_dir, seed, runs.unwrap_or(200)),
        ReproduceTarget::Fig2 => reproduce_fig2(out_dir, seed),
        ReproduceTarget::Fig3 => reproduce_grid(out_dir, seed, runs.unwrap_or(1000), true),
        ReproduceTarget::Fig4 => reproduce_grid(out_dir, seed, runs.unwrap_or(1000), false),
        ReproduceTarget::Table1 => reproduce_table1(out_dir, seed, runs.unwrap_or(100)),
    }
}

/// Out-of-range data on a moderate random graph with a large step size:
/// per-run results plus the per-iteration error of each run.
fn reproduce_fig1(out_dir: &Path, seed: u64, runs: u64) -> Result<(), CliError> {
    let cfg = ScenarioConfig {
        graph: GraphSpec::RandomConnected { n: 50, m: 100 },
        data: DataSpec {
            mean: 50.0,
            std: 50.0,
            common_std: 0.0,
            offset: 0.0,
        },
        delta: 1.0,
        range_l: 25.0,
        rho: RhoPolicy::Fixed { value: 0.5 },
        algorithm: "ebq".into(),
        runs,
        seed,
        max_iter: 1_000_000,
        inner_budget: Some(50),
        enforce_ebq_precondition: false,
        trace: true,
    };
    let records = run_scenario(&cfg).map_err(runtime)?;
    emit(Some(&out_dir.join("fig1_runs.jsonl")), &to_jsonl(&records))?;
    let mut csv = String::from("run,k,error\n");
    for rec in &records {
        if let Some(errs) = &rec.result.iterative_error {
            for (k, e) in errs.iter().enumerate() {
                csv.push_str(&format!("{},{},{}\n", rec.run, k, e));
            }
        }
    }
    emit(Some(&out_dir.join("fig1_errors.csv")), &csv)
}

/// Error trajectories of all three algorithms on one shared instance.
fn reproduce_fig2(out_dir: &Path, seed: u64) -> Result<(), CliError> {
    let base = ScenarioConfig {
        graph: GraphSpec::RandomConnected { n: 50, m: 100 },
        data: DataSpec {
            mean: 5.0,
            std: 5.0,
            common_std: 0.0,
            offset: 0.0,
        },
        delta: 1.0,
        range_l: 30.0,
        rho: RhoPolicy::Heuristic,
        algorithm: "bq".into(),
        runs: 1,
        seed,
        max_iter: 2_000,
        inner_budget: None,
        enforce_ebq_precondition: false,
        trace: true,
    };
    let mut csv = String::from("algorithm,k,error\n");
    for algorithm in ["cadmm", "bq", "ebq"] {
        let mut cfg = base.clone();
        cfg.algorithm = algorithm.into();
        let records = run_scenario(&cfg).map_err(runtime)?;
        if let Some(errs) = &records[0].result.iterative_error {
            for (k, e) in errs.iter().enumerate() {
                csv.push_str(&format!("{algorithm},{},{}\n", k + 1, e));
            }
        }
    }
    emit(Some(&out_dir.join("fig2_errors.csv")), &csv)
}

fn grid_config(seed: u64, runs: u64) -> SweepConfig {
    SweepConfig {
        families: vec![
            FamilyKind::Star,
            FamilyKind::Intermediate,
            FamilyKind::Complete,
        ],
        n_list: vec![5, 10, 20, 50],
        multipliers: default_multipliers(),
        runs,
        seed,
        data: DataSpec {
            mean: 0.0,
            std: 10.0,
            common_std: 0.0,
            offset: 0.0,
        },
        delta: 1.0,
        range_l: 30.0,
        max_iter: 1_000_000,
    }
}

fn reproduce_grid(out_dir: &Path, seed: u64, runs: u64, cyclic: bool) -> Result<(), CliError> {
    let cfg = grid_config(seed, runs);
    let (rows, name) = if cyclic {
        (cyclic_probability_sweep(&cfg).map_err(runtime)?, "fig3_cyclic.csv")
    } else {
        (
            convergence_time_sweep(&cfg).map_err(runtime)?,
            "fig4_times.csv",
        )
    };
    emit(Some(&out_dir.join(name)), &to_csv(&rows))
}

fn reproduce_table1(out_dir: &Path, seed: u64, runs: u64) -> Result<(), CliError> {
    let cfg = SweepConfig {
        multipliers: vec![1.0],
        n_list: vec![20, 50],
        ..grid_config(seed, runs)
    };
    let rows = table1_comparison(&cfg, &RhoSchedule::default()).map_err(runtime)?;
    emit(Some(&out_dir.join("table1.csv")), &to_csv(&rows))
}

//! The `uca` command line: one subcommand per stage plus `bench` and
//! `pipeline`, which read flat `key = value` config files.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or config error.

mod config;
mod pipeline;

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{
    self, benchmark_curves, estimate_positive_probability, prediction_error_report, value_histogram, BenchInstance,
    EstimatorKind, InstancePlan, DEFAULT_CHECKPOINTS,
};
use crate::dataset::{build_dataset, split_dataset, Dataset, DatasetConfig};
use crate::domain::{ProblemSpec, ValueTable};
use crate::error::{Error, Result};
use crate::exact::{solve_exact, DEFAULT_NODE_BUDGET};
use crate::neural::{grid_search, MlpModel, TrainConfig, DEFAULT_BATCH_GRID, DEFAULT_LR_GRID};
use crate::search::{best_of_n, Estimator};
use crate::seeds;
use crate::valuegen::{NpdParams, TrapParams, ValueDistribution};

pub use config::KeyValues;
pub use pipeline::{run_pipeline, PipelineSummary};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "uca", version, about = "Exact, greedy and learned search over element-to-alternative assignments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Draw a value table and write it to a table file
    Generate(GenerateArgs),
    /// Print the optimal value and labels of a table as one CSV line
    Solve(SolveArgs),
    /// Build an exactly labeled dataset of partial assignments
    Label(LabelArgs),
    /// Grid-search a value-to-go network on a dataset
    Train(TrainArgs),
    /// Best-of-N greedy rollouts; prints checkpoint,best_value
    Rollout(RolloutArgs),
    /// Run one experiment described by a config file
    Bench(BenchArgs),
    /// generate, label, train and benchmark from one config file
    Pipeline(PipelineArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum DistKind {
    Npd,
    Trap,
}

#[derive(Args, Debug)]
struct DistArgs {
    #[arg(long, value_enum)]
    dist: DistKind,
    /// NPD mean
    #[arg(long)]
    mu: Option<f64>,
    /// Noise standard deviation (both distributions)
    #[arg(long)]
    sigma: Option<f64>,
    /// TRAP scale
    #[arg(long)]
    delta: Option<f64>,
    /// TRAP threshold (default n/2)
    #[arg(long)]
    tau: Option<f64>,
    /// TRAP exponent bump
    #[arg(long)]
    eps: Option<f64>,
}

struct DistChoice {
    kind: DistKind,
    mu: Option<f64>,
    sigma: Option<f64>,
    delta: Option<f64>,
    tau: Option<f64>,
    eps: Option<f64>,
}

impl DistChoice {
    fn resolve(&self, n: usize) -> Result<ValueDistribution> {
        match self.kind {
            DistKind::Npd => {
                if self.delta.is_some() || self.tau.is_some() || self.eps.is_some() {
                    return Err(Error::usage("delta, tau and eps only apply to trap"));
                }
                let d = NpdParams::default();
                Ok(ValueDistribution::Npd(NpdParams {
                    mu: self.mu.unwrap_or(d.mu),
                    sigma: self.sigma.unwrap_or(d.sigma),
                }))
            }
            DistKind::Trap => {
                if self.mu.is_some() {
                    return Err(Error::usage("mu only applies to npd"));
                }
                let d = TrapParams::for_elements(n);
                Ok(ValueDistribution::Trap(TrapParams {
                    sigma: self.sigma.unwrap_or(d.sigma),
                    delta: self.delta.unwrap_or(d.delta),
                    tau_threshold: self.tau.unwrap_or(d.tau_threshold),
                    epsilon: self.eps.unwrap_or(d.epsilon),
                }))
            }
        }
    }

    fn from_args(a: &DistArgs) -> Self {
        Self {
            kind: a.dist,
            mu: a.mu,
            sigma: a.sigma,
            delta: a.delta,
            tau: a.tau,
            eps: a.eps,
        }
    }

    fn from_config(kv: &KeyValues) -> Result<Self> {
        let dist: String = kv.require("dist")?;
        let kind = DistKind::from_str(&dist, true)
            .map_err(|_| Error::Config(format!("config key `dist`: expected npd or trap, got `{dist}`")))?;
        Ok(Self {
            kind,
            mu: kv.optional("mu")?,
            sigma: kv.optional("sigma")?,
            delta: kv.optional("delta")?,
            tau: kv.optional("tau")?,
            eps: kv.optional("eps")?,
        })
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[command(flatten)]
    dist: DistArgs,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[arg(long)]
    table: PathBuf,
    /// Maximum number of search nodes
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
struct LabelArgs {
    #[arg(long)]
    table: PathBuf,
    /// Largest number of unassigned elements
    #[arg(long)]
    kappa: usize,
    /// Pairs per unassigned count
    #[arg(long)]
    pairs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Node budget per level
    #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
    budget: u64,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Comma-separated learning rates
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_LR_GRID)]
    lr_grid: Vec<f64>,
    /// Comma-separated batch sizes
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_BATCH_GRID)]
    batch_grid: Vec<usize>,
    #[arg(long, default_value_t = TrainConfig::default().epochs)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Share of pairs held out for testing
    #[arg(long, default_value_t = 0.10)]
    split: f64,
    /// Loss trace path (default: training_trace.csv next to the model)
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EstimatorArg {
    Current,
    Random,
    Neural,
}

#[derive(Args, Debug)]
struct RolloutArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long, value_enum)]
    estimator: EstimatorArg,
    /// Required for the neural estimator
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    evals: usize,
    /// Comma-separated, ascending (default: the standard checkpoints up to --evals)
    #[arg(long, value_delimiter = ',')]
    checkpoints: Option<Vec<usize>>,
    #[arg(long)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Probability,
    Histogram,
    Prediction,
    Curves,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args, Debug)]
struct PipelineArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's out_dir
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

/// Entry point for the binary: parse `std::env::args_os` and run.
pub fn main() -> i32 {
    run(std::env::args_os())
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Config(_) => EXIT_USAGE,
        Error::Stage { source, .. } => exit_code(source),
        _ => EXIT_RUNTIME,
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Solve(a) => solve(a),
        Command::Label(a) => label(a),
        Command::Train(a) => train(a),
        Command::Rollout(a) => rollout(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Pipeline(a) => {
            let summary = run_pipeline(&a.config, a.out_dir.as_deref())?;
            println!("pipeline complete: {}", summary.manifest.display());
            Ok(())
        }
    }
}

fn generate(a: GenerateArgs) -> Result<()> {
    let spec = ProblemSpec::new(a.n, a.m, a.seed)?;
    let dist = DistChoice::from_args(&a.dist).resolve(a.n)?;
    let table = dist.generate(&spec)?;
    at(&a.out, |p| table.save(p))?;
    println!("{} table n={} m={} seed={} -> {}", dist.name(), a.n, a.m, a.seed, a.out.display());
    Ok(())
}

fn solve(a: SolveArgs) -> Result<()> {
    let table = at(&a.table, |p| ValueTable::load(p))?;
    let (best, value) = solve_exact(&table, a.budget)?;
    let labels: Vec<String> = (0..best.n())
        .map(|j| best.label(j).expect("complete").to_string())
        .collect();
    println!("{value},{}", labels.join(","));
    Ok(())
}

fn label(a: LabelArgs) -> Result<()> {
    let table = at(&a.table, |p| ValueTable::load(p))?;
    let cfg = DatasetConfig {
        node_budget: a.budget,
        ..DatasetConfig::new(a.kappa, a.pairs, a.seed)
    };
    let data = build_dataset(&table, &cfg)?;
    at(&a.out, |p| data.save(p))?;
    println!("{} pairs -> {}", data.pairs.len(), a.out.display());
    Ok(())
}

fn train(a: TrainArgs) -> Result<()> {
    let data = at(&a.data, |p| Dataset::load(p))?;
    let split_seed = seeds::derive(a.seed, "split");
    let (train_set, test_set) = split_dataset(data.pairs, a.split, &mut seeds::rng(split_seed));
    let base = TrainConfig {
        epochs: a.epochs,
        seed: a.seed,
        ..TrainConfig::default()
    };
    let grid = grid_search(&train_set, &test_set, &a.lr_grid, &a.batch_grid, &base)?;
    at(&a.out, |p| grid.outcome.model.save(p))?;
    let trace = a.trace.unwrap_or_else(|| sibling(&a.out, "training_trace.csv"));
    fs::write(&trace, grid.outcome.trace_csv())?;
    for c in &grid.cells {
        println!("lr={} batch={} test_loss={}", c.learning_rate, c.batch_size, c.test_loss);
    }
    println!(
        "selected lr={} batch={} -> {} (trace {})",
        grid.best.learning_rate,
        grid.best.batch_size,
        a.out.display(),
        trace.display()
    );
    Ok(())
}

/// Prefix I/O errors with the offending path.
fn at<T>(path: &Path, f: impl FnOnce(&Path) -> Result<T>) -> Result<T> {
    f(path).map_err(|e| match e {
        Error::Io(io) => Error::Io(std::io::Error::new(io.kind(), format!("{}: {io}", path.display()))),
        other => other,
    })
}

fn sibling(path: &Path, name: &str) -> PathBuf {
    path.parent().map_or_else(|| PathBuf::from(name), |p| p.join(name))
}

/// Standard checkpoints up to `evals`, always ending at `evals`.
pub fn default_checkpoints(evals: usize) -> Vec<usize> {
    let mut cps: Vec<usize> = DEFAULT_CHECKPOINTS.iter().copied().filter(|&c| c < evals).collect();
    cps.push(evals);
    cps
}

fn rollout(a: RolloutArgs) -> Result<()> {
    let table = at(&a.table, |p| ValueTable::load(p))?;
    let model = match (&a.estimator, &a.model) {
        (EstimatorArg::Neural, Some(p)) => Some(at(p, |p| MlpModel::load(p))?),
        (EstimatorArg::Neural, None) => return Err(Error::usage("--estimator neural needs --model")),
        (_, Some(_)) => return Err(Error::usage("--model only applies to --estimator neural")),
        _ => None,
    };
    let est = match a.estimator {
        EstimatorArg::Current => Estimator::CurrentValue,
        EstimatorArg::Random => Estimator::Random,
        EstimatorArg::Neural => Estimator::Neural(model.as_ref().expect("loaded")),
    };
    let checkpoints = a.checkpoints.unwrap_or_else(|| default_checkpoints(a.evals));
    let res = best_of_n(&table, &est, a.evals, &checkpoints, &mut seeds::rng(a.seed))?;
    let mut out = String::from("checkpoint,best_value\n");
    for (c, v) in &res.checkpoints {
        out.push_str(&format!("{c},{v}\n"));
    }
    std::io::stdout().write_all(out.as_bytes())?;
    Ok(())
}

/// Table from `table = <file>` or generated from `dist`, `n`, `m` and
/// the table seed.
fn table_from_config(kv: &KeyValues, seed: u64) -> Result<ValueTable> {
    if let Some(path) = kv.optional::<PathBuf>("table")? {
        return at(&path, |p| ValueTable::load(p));
    }
    let n: usize = kv.require("n")?;
    let m: usize = kv.require("m")?;
    let dist = DistChoice::from_config(kv)?.resolve(n)?;
    let table_seed = kv.or("table_seed", seeds::derive(seed, "generate"))?;
    dist.generate(&ProblemSpec::new(n, m, table_seed)?)
}

/// Shared keys for experiments that train their own models.
pub(crate) fn plan_from_config(kv: &KeyValues) -> Result<InstancePlan> {
    let n: usize = kv.require("n")?;
    let m: usize = kv.require("m")?;
    let distribution = DistChoice::from_config(kv)?.resolve(n)?;
    let kappa: usize = kv.require("kappa")?;
    let pairs: usize = kv.require("pairs_per_level")?;
    let dataset = DatasetConfig {
        split_fraction: kv.or("split", 0.10)?,
        node_budget: kv.or("label_budget", DEFAULT_NODE_BUDGET)?,
        ..DatasetConfig::new(kappa, pairs, 0)
    };
    let d = TrainConfig::default();
    let train = TrainConfig {
        epochs: kv.or("epochs", d.epochs)?,
        ..d
    };
    Ok(InstancePlan {
        distribution,
        n,
        m,
        dataset,
        train,
        lr_grid: kv.list("lr_grid")?.unwrap_or_else(|| DEFAULT_LR_GRID.to_vec()),
        batch_grid: kv.list("batch_grid")?.unwrap_or_else(|| DEFAULT_BATCH_GRID.to_vec()),
        exact_budget: kv.or("budget", DEFAULT_NODE_BUDGET)?,
    })
}

pub(crate) fn estimators_from_config(kv: &KeyValues) -> Result<Vec<EstimatorKind>> {
    match kv.list::<String>("estimators")? {
        None => Ok(EstimatorKind::ALL.to_vec()),
        Some(names) => names
            .iter()
            .map(|s| {
                EstimatorKind::parse(s)
                    .ok_or_else(|| Error::Config(format!("config key `estimators`: unknown estimator `{s}`")))
            })
            .collect(),
    }
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    fs::write(&path, contents)?;
    println!("wrote {}", path.display());
    Ok(path)
}

/// Every key any experiment reads, so one config can serve all four.
const BENCH_KEYS: &[&str] = &[
    "seed", "table", "table_seed", "dist", "n", "m", "mu", "sigma", "delta", "tau", "eps", "samples", "bins",
    "model", "levels", "budget", "samples_per_level", "kappa", "pairs_per_level", "split", "label_budget", "epochs",
    "lr_grid", "batch_grid", "instances", "evals", "checkpoints", "estimators",
];

fn bench_cmd(a: BenchArgs) -> Result<()> {
    let kv = KeyValues::load(&a.config)?;
    fs::create_dir_all(&a.out_dir)?;
    let dir = a.out_dir.as_path();
    let seed: u64 = kv.require("seed")?;
    match a.experiment {
        Experiment::Probability => {
            let table = table_from_config(&kv, seed)?;
            let samples = kv.or("samples", 100_000_000u64)?;
            kv.reject_unknown(BENCH_KEYS)?;
            let est = estimate_positive_probability(&table, samples, &mut seeds::rng(seeds::derive(seed, "probability")))?;
            print!("{}", est.to_csv());
            write_out(dir, "probability.csv", &est.to_csv())?;
        }
        Experiment::Histogram => {
            let table = table_from_config(&kv, seed)?;
            let samples = kv.or("samples", 100_000_000u64)?;
            let bins = kv.or("bins", 100usize)?;
            kv.reject_unknown(BENCH_KEYS)?;
            let h = value_histogram(&table, samples, bins, &mut seeds::rng(seeds::derive(seed, "histogram")))?;
            write_out(dir, "histogram.csv", &h.to_csv())?;
            write_out(dir, "histogram.svg", &h.to_svg("Distribution of V(S) over uniform assignments"))?;
        }
        Experiment::Prediction => {
            let samples = kv.or("samples_per_level", 200usize)?;
            let (table, model, levels, budget) = if kv.contains("model") {
                let table = table_from_config(&kv, seed)?;
                let model = at(&kv.require::<PathBuf>("model")?, |p| MlpModel::load(p))?;
                let levels = kv
                    .list("levels")?
                    .ok_or_else(|| Error::Config("missing config key `levels`".into()))?;
                let budget = kv.or("budget", DEFAULT_NODE_BUDGET)?;
                (table, model, levels, budget)
            } else {
                let plan = plan_from_config(&kv)?;
                let levels = kv.list("levels")?.unwrap_or_else(|| (1..=plan.dataset.kappa).collect());
                let prepared = bench::prepare_instance(&plan, seeds::derive(seed, "instance/0"))?;
                write_out(dir, "training_trace.csv", &prepared.grid.outcome.trace_csv())?;
                let model = prepared.grid.outcome.model;
                (prepared.instance.table, model, levels, plan.exact_budget)
            };
            kv.reject_unknown(BENCH_KEYS)?;
            let report = prediction_error_report(
                &model,
                &table,
                &levels,
                samples,
                &mut seeds::rng(seeds::derive(seed, "prediction")),
                budget,
            )?;
            write_out(dir, "prediction_error.csv", &report.to_csv())?;
            write_out(dir, "prediction_scatter.csv", &report.scatter_csv())?;
            write_out(dir, "prediction_error.svg", &report.error_svg("Prediction error by unassigned elements"))?;
            write_out(dir, "prediction_scatter.svg", &report.scatter_svg("Predicted vs true value-to-go"))?;
        }
        Experiment::Curves => {
            let plan = plan_from_config(&kv)?;
            let count = kv.or("instances", 5usize)?;
            let evals = kv.or("evals", 2000usize)?;
            let checkpoints = kv.list("checkpoints")?.unwrap_or_else(|| default_checkpoints(evals));
            let estimators = estimators_from_config(&kv)?;
            kv.reject_unknown(BENCH_KEYS)?;
            let instances: Vec<BenchInstance> = if estimators.contains(&EstimatorKind::Neural) {
                bench::prepare_instances(&plan, count, seed)?
                    .into_iter()
                    .map(|p| p.instance)
                    .collect()
            } else {
                (0..count)
                    .map(|i| {
                        let s = bench::StageSeeds::from_instance(seeds::derive(seed, &format!("instance/{i}")));
                        let table = plan.distribution.generate(&ProblemSpec::new(plan.n, plan.m, s.table)?)?;
                        BenchInstance::with_optimum(table, None, plan.exact_budget)
                    })
                    .collect::<Result<_>>()?
            };
            let report = benchmark_curves(&instances, &estimators, evals, &checkpoints, seeds::derive(seed, "curves"))?;
            write_out(dir, "curves.csv", &report.to_csv())?;
            write_out(
                dir,
                "curves.svg",
                &report.to_svg(&format!("Best of N, {}", plan.distribution.name())),
            )?;
        }
    }
    Ok(())
}

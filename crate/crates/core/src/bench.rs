//! Experiment drivers: Monte Carlo estimates over uniform assignments,
//! prediction-error statistics by unassigned count, and best-of-N curves
//! averaged over problem instances. Every report renders to CSV (the source
//! of truth) and to an SVG chart.

use std::fmt::Write;

use rand::Rng;

use crate::dataset::{build_dataset, sample_partial_assignment, split_dataset, Dataset, DatasetConfig};
use crate::domain::{ProblemSpec, ValueTable, MAX_ALTERNATIVES};
use crate::error::{Error, Result};
use crate::exact;
use crate::neural::{grid_search, GridOutcome, MlpModel, TrainConfig, ValuePredictor};
use crate::valuegen::ValueDistribution;
use crate::search::{best_of_n, Estimator};
use crate::seeds;
use crate::svg::{Plot, Series};
use crate::workers;

/// Monte Carlo samples per substream chunk.
const CHUNK: u64 = 1 << 16;

/// Checkpoints of the reference best-of-N protocol.
pub const DEFAULT_CHECKPOINTS: [usize; 9] = [10, 50, 100, 250, 500, 750, 1000, 1500, 2000];

/// Normal quantile for a two-sided 95% interval.
pub const CI_Z: f64 = 1.96;

/// Value of one uniformly random complete assignment.
#[inline]
fn sample_value<R: Rng + ?Sized>(v: &ValueTable, masks: &mut [u32], rng: &mut R) -> f64 {
    masks.iter_mut().for_each(|b| *b = 0);
    let m = v.m() as u32;
    for j in 0..v.n() {
        masks[rng.random_range(0..m) as usize] |= 1 << j;
    }
    v.sum_bundles(masks)
}

/// Fold `f` over `samples` uniform assignment values, chunked into
/// independent substreams of `base`; per-chunk results are returned in
/// chunk order.
fn fold_samples<T, F>(v: &ValueTable, samples: u64, base: u64, init: T, f: F) -> Vec<T>
where
    T: Clone + Send + Sync,
    F: Fn(&mut T, f64) + Sync,
{
    let chunks = samples.div_ceil(CHUNK) as usize;
    workers::map_indexed(chunks, |c| {
        let mut rng = seeds::substream(base, c as u64);
        let mut masks = [0u32; MAX_ALTERNATIVES];
        let masks = &mut masks[..v.m()];
        let count = CHUNK.min(samples - c as u64 * CHUNK);
        let mut acc = init.clone();
        for _ in 0..count {
            f(&mut acc, sample_value(v, masks, &mut rng));
        }
        acc
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PositiveEstimate {
    pub probability: f64,
    pub positives: u64,
    pub samples: u64,
}

/// Estimate `P(V(S) > 0)` for uniformly random complete assignments.
pub fn estimate_positive_probability<R: Rng + ?Sized>(
    v: &ValueTable,
    samples: u64,
    rng: &mut R,
) -> Result<PositiveEstimate> {
    if samples == 0 {
        return Err(Error::usage("need at least one sample"));
    }
    let base: u64 = rng.random();
    let positives: u64 = fold_samples(v, samples, base, 0u64, |acc, x| {
        if x > 0.0 {
            *acc += 1;
        }
    })
    .into_iter()
    .sum();
    Ok(PositiveEstimate {
        probability: positives as f64 / samples as f64,
        positives,
        samples,
    })
}

impl PositiveEstimate {
    pub fn to_csv(&self) -> String {
        format!(
            "samples,positives,probability\n{},{},{:e}\n",
            self.samples, self.positives, self.probability
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub low: f64,
    pub high: f64,
    pub counts: Vec<u64>,
    pub samples: u64,
    pub mean: f64,
}

/// Histogram of `V(S)` over uniformly random complete assignments.
///
/// Two passes over the same substreams: the first fixes the range, the
/// second bins. A zero-width range puts every sample in the first bin.
pub fn value_histogram<R: Rng + ?Sized>(
    v: &ValueTable,
    samples: u64,
    bins: usize,
    rng: &mut R,
) -> Result<Histogram> {
    if bins == 0 || samples == 0 {
        return Err(Error::usage("histogram needs at least one bin and one sample"));
    }
    let base: u64 = rng.random();
    let (low, high) = fold_samples(v, samples, base, (f64::INFINITY, f64::NEG_INFINITY), |acc, x| {
        acc.0 = acc.0.min(x);
        acc.1 = acc.1.max(x);
    })
    .into_iter()
    .fold((f64::INFINITY, f64::NEG_INFINITY), |a, b| (a.0.min(b.0), a.1.max(b.1)));
    let width = high - low;
    let partial = fold_samples(v, samples, base, (vec![0u64; bins], 0.0f64), |acc, x| {
        let bin = if width > 0.0 {
            (((x - low) / width * bins as f64) as usize).min(bins - 1)
        } else {
            0
        };
        acc.0[bin] += 1;
        acc.1 += x;
    });
    let mut counts = vec![0u64; bins];
    let mut sum = 0.0;
    for (c, s) in partial {
        counts.iter_mut().zip(c).for_each(|(a, b)| *a += b);
        sum += s;
    }
    Ok(Histogram {
        low,
        high,
        counts,
        samples,
        mean: sum / samples as f64,
    })
}

impl Histogram {
    pub fn bin_edges(&self, i: usize) -> (f64, f64) {
        let w = (self.high - self.low) / self.counts.len() as f64;
        (self.low + w * i as f64, self.low + w * (i + 1) as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("bin_low,bin_high,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(i);
            let _ = writeln!(out, "{lo},{hi},{c}");
        }
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        Plot {
            title: title.into(),
            x_label: "V(S)".into(),
            y_label: "relative frequency".into(),
            bars: (0..self.counts.len())
                .map(|i| {
                    let (lo, hi) = self.bin_edges(i);
                    (lo, hi, self.counts[i] as f64 / self.samples as f64)
                })
                .collect(),
            notes: vec![format!("{} samples", self.samples), format!("mean {:.4}", self.mean)],
            ..Plot::default()
        }
        .render()
    }
}

/// Mean and sample standard deviation (`n − 1`); zero spread for `n < 2`.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, 0.0);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelError {
    pub unassigned: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PredictionReport {
    pub levels: Vec<LevelError>,
    /// `(unassigned, true V*, predicted)` per sample.
    pub scatter: Vec<(usize, f64, f64)>,
}

/// Prediction error `V*(S) − prediction` grouped by the number of
/// unassigned elements. Sample `j` of the `i`-th level uses substream
/// `i * samples_per_level + j` of a base seed drawn from `rng`.
pub fn prediction_error_report<P, R>(
    predictor: &P,
    v: &ValueTable,
    levels: &[usize],
    samples_per_level: usize,
    rng: &mut R,
    node_budget: u64,
) -> Result<PredictionReport>
where
    P: ValuePredictor + Sync + ?Sized,
    R: Rng + ?Sized,
{
    let (n, m) = (v.n(), v.m());
    if let Some(&bad) = levels.iter().find(|&&k| k > n) {
        return Err(Error::usage(format!("cannot leave {bad} of {n} elements unassigned")));
    }
    for &k in levels {
        let required = exact::search_nodes(m, k);
        if required > node_budget {
            return Err(Error::Budget {
                required,
                budget: node_budget,
                context: Some(format!("labeling {k} unassigned")),
            });
        }
    }
    let base: u64 = rng.random();
    let rows = workers::map_indexed(levels.len() * samples_per_level, |idx| {
        let k = levels[idx / samples_per_level.max(1)];
        let mut rng = seeds::substream(base, idx as u64);
        let s = sample_partial_assignment(n, m, n - k, &mut rng)?;
        let truth = exact::value_to_go(&s, v, node_budget)?;
        let pred = predictor.predict(&s, v)?;
        Ok((k, truth, pred))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;

    let levels = levels
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let errors: Vec<f64> = rows[i * samples_per_level..(i + 1) * samples_per_level]
                .iter()
                .map(|(_, t, p)| t - p)
                .collect();
            let (mean_error, std_error) = mean_std(&errors);
            LevelError {
                unassigned: k,
                mean_error,
                std_error,
                samples: errors.len(),
            }
        })
        .collect();
    Ok(PredictionReport {
        levels,
        scatter: rows,
    })
}

impl PredictionReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,mean_error,std_error,n_samples\n");
        for l in &self.levels {
            let _ = writeln!(out, "{},{},{},{}", l.unassigned, l.mean_error, l.std_error, l.samples);
        }
        out
    }

    pub fn scatter_csv(&self) -> String {
        let mut out = String::from("true_value,predicted_value\n");
        for (_, t, p) in &self.scatter {
            let _ = writeln!(out, "{t},{p}");
        }
        out
    }

    /// Mean error with ±2 standard deviation bars per level.
    pub fn error_svg(&self, title: &str) -> String {
        Plot {
            title: title.into(),
            x_label: "unassigned elements".into(),
            y_label: "V* - prediction".into(),
            lines: vec![Series {
                name: "mean error ± 2 sd".into(),
                points: self.levels.iter().map(|l| (l.unassigned as f64, l.mean_error)).collect(),
                error: Some(
                    self.levels
                        .iter()
                        .map(|l| (l.mean_error - 2.0 * l.std_error, l.mean_error + 2.0 * l.std_error))
                        .collect(),
                ),
            }],
            hlines: vec![("zero".into(), 0.0)],
            ..Plot::default()
        }
        .render()
    }

    pub fn scatter_svg(&self, title: &str) -> String {
        Plot {
            title: title.into(),
            x_label: "true V*".into(),
            y_label: "predicted".into(),
            scatter: vec![Series {
                name: "samples".into(),
                points: self.scatter.iter().map(|&(_, t, p)| (t, p)).collect(),
                error: None,
            }],
            diagonal: true,
            ..Plot::default()
        }
        .render()
    }
}

/// Estimator family, independent of any particular trained model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorKind {
    CurrentValue,
    Random,
    Neural,
}

impl EstimatorKind {
    pub const ALL: [EstimatorKind; 3] = [EstimatorKind::CurrentValue, EstimatorKind::Neural, EstimatorKind::Random];

    pub fn name(&self) -> &'static str {
        match self {
            EstimatorKind::CurrentValue => "current",
            EstimatorKind::Random => "random",
            EstimatorKind::Neural => "neural",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "current" | "current-value" | "current_value" => Some(EstimatorKind::CurrentValue),
            "random" => Some(EstimatorKind::Random),
            "neural" => Some(EstimatorKind::Neural),
            _ => None,
        }
    }
}

/// One problem of a benchmark: its table, the model trained on it (if any)
/// and its exact optimum when that is tractable.
#[derive(Clone, Debug)]
pub struct BenchInstance {
    pub table: ValueTable,
    pub model: Option<MlpModel>,
    pub optimum: Option<f64>,
}

impl BenchInstance {
    /// Attach the exact optimum if a full search fits `node_budget`.
    pub fn with_optimum(table: ValueTable, model: Option<MlpModel>, node_budget: u64) -> Result<Self> {
        let optimum = match exact::solve_exact(&table, node_budget) {
            Ok((_, value)) => Some(value),
            Err(Error::Budget { .. }) => None,
            Err(e) => return Err(e),
        };
        Ok(Self { table, model, optimum })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvePoint {
    pub estimator: EstimatorKind,
    pub checkpoint: usize,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Best value per instance at this checkpoint.
    pub per_instance: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurveReport {
    pub points: Vec<CurvePoint>,
    /// Mean exact optimum over instances, when every instance has one.
    pub optimum: Option<f64>,
    pub instances: usize,
}

/// Best-of-N curves for each estimator, averaged over instances with a
/// normal-approximation 95% interval (`1.96 · sd / √k`).
///
/// The rollout stream for estimator `e` on instance `i` is derived from
/// `(seed, "curves/e/i")`, so adding an estimator leaves the others unchanged.
pub fn benchmark_curves(
    instances: &[BenchInstance],
    estimators: &[EstimatorKind],
    n_evals: usize,
    checkpoints: &[usize],
    seed: u64,
) -> Result<CurveReport> {
    if instances.is_empty() {
        return Err(Error::usage("benchmark needs at least one instance"));
    }
    let mut points = Vec::new();
    for &kind in estimators {
        let mut per_instance: Vec<Vec<f64>> = Vec::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            let est = match kind {
                EstimatorKind::CurrentValue => Estimator::CurrentValue,
                EstimatorKind::Random => Estimator::Random,
                EstimatorKind::Neural => Estimator::Neural(inst.model.as_ref().ok_or_else(|| {
                    Error::usage(format!("instance {i} has no model for the neural estimator"))
                })?),
            };
            let mut rng = seeds::rng(seeds::derive(seed, &format!("curves/{}/{i}", kind.name())));
            let res = best_of_n(&inst.table, &est, n_evals, checkpoints, &mut rng)?;
            per_instance.push(res.checkpoints.iter().map(|&(_, b)| b).collect());
        }
        for (c, &checkpoint) in checkpoints.iter().enumerate() {
            let values: Vec<f64> = per_instance.iter().map(|p| p[c]).collect();
            let (mean, sd) = mean_std(&values);
            let half = CI_Z * sd / (values.len() as f64).sqrt();
            points.push(CurvePoint {
                estimator: kind,
                checkpoint,
                mean,
                ci_low: mean - half,
                ci_high: mean + half,
                per_instance: values,
            });
        }
    }
    let optimum = instances
        .iter()
        .map(|i| i.optimum)
        .collect::<Option<Vec<f64>>>()
        .map(|o| o.iter().sum::<f64>() / o.len() as f64);
    Ok(CurveReport {
        points,
        optimum,
        instances: instances.len(),
    })
}

/// Everything needed to turn a seed into a benchmark instance.
#[derive(Clone, Debug)]
pub struct InstancePlan {
    pub distribution: ValueDistribution,
    pub n: usize,
    pub m: usize,
    /// `seed` is ignored; each instance derives its own.
    pub dataset: DatasetConfig,
    /// `learning_rate`, `batch_size` and `seed` are overridden.
    pub train: TrainConfig,
    pub lr_grid: Vec<f64>,
    pub batch_grid: Vec<usize>,
    /// Node budget for the exact optimum; over budget means no optimum line.
    pub exact_budget: u64,
}

/// Stage seeds of one instance, all derived from its instance seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageSeeds {
    pub table: u64,
    pub label: u64,
    pub split: u64,
    pub train: u64,
}

impl StageSeeds {
    pub fn from_instance(seed: u64) -> Self {
        Self {
            table: seeds::derive(seed, "generate"),
            label: seeds::derive(seed, "label"),
            split: seeds::derive(seed, "split"),
            train: seeds::derive(seed, "train"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct PreparedInstance {
    pub instance: BenchInstance,
    pub dataset: Dataset,
    pub grid: GridOutcome,
    pub seeds: StageSeeds,
}

/// Generate a table, label a dataset on it, train a model by grid search
/// and attach the exact optimum when affordable.
pub fn prepare_instance(plan: &InstancePlan, instance_seed: u64) -> Result<PreparedInstance> {
    let seeds = StageSeeds::from_instance(instance_seed);
    let table = plan
        .distribution
        .generate(&ProblemSpec::new(plan.n, plan.m, seeds.table)?)?;
    let dataset = build_dataset(
        &table,
        &DatasetConfig {
            seed: seeds.label,
            ..plan.dataset
        },
    )?;
    let (train_set, test_set) = split_dataset(
        dataset.pairs.clone(),
        plan.dataset.split_fraction,
        &mut seeds::rng(seeds.split),
    );
    let base = TrainConfig {
        seed: seeds.train,
        ..plan.train
    };
    let grid = grid_search(&train_set, &test_set, &plan.lr_grid, &plan.batch_grid, &base)?;
    let instance = BenchInstance::with_optimum(table, Some(grid.outcome.model.clone()), plan.exact_budget)?;
    Ok(PreparedInstance {
        instance,
        dataset,
        grid,
        seeds,
    })
}

/// `count` instances; instance `i` is seeded by `derive(seed, "instance/i")`.
pub fn prepare_instances(plan: &InstancePlan, count: usize, seed: u64) -> Result<Vec<PreparedInstance>> {
    (0..count)
        .map(|i| prepare_instance(plan, seeds::derive(seed, &format!("instance/{i}"))))
        .collect()
}

pub const OPTIMUM_UNAVAILABLE: &str = "optimum unavailable at this scale";

impl CurveReport {
    pub fn series(&self, kind: EstimatorKind) -> Vec<&CurvePoint> {
        self.points.iter().filter(|p| p.estimator == kind).collect()
    }

    pub fn final_mean(&self, kind: EstimatorKind) -> Option<f64> {
        self.series(kind).last().map(|p| p.mean)
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!(
            "# 95% CI: normal approximation, mean ± {CI_Z}·sd/sqrt(k) over k={} instances\n",
            self.instances
        );
        match self.optimum {
            Some(o) => {
                let _ = writeln!(out, "# optimum (mean over instances): {o}");
            }
            None => {
                let _ = writeln!(out, "# {OPTIMUM_UNAVAILABLE}");
            }
        }
        out.push_str("estimator,checkpoint,mean,ci_low,ci_high\n");
        for p in &self.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                p.estimator.name(),
                p.checkpoint,
                p.mean,
                p.ci_low,
                p.ci_high
            );
        }
        out
    }

    pub fn to_svg(&self, title: &str) -> String {
        let mut kinds: Vec<EstimatorKind> = Vec::new();
        for p in &self.points {
            if !kinds.contains(&p.estimator) {
                kinds.push(p.estimator);
            }
        }
        let lines = kinds
            .iter()
            .map(|&k| {
                let s = self.series(k);
                Series {
                    name: k.name().into(),
                    points: s.iter().map(|p| (p.checkpoint as f64, p.mean)).collect(),
                    error: Some(s.iter().map(|p| (p.ci_low, p.ci_high)).collect()),
                }
            })
            .collect();
        Plot {
            title: title.into(),
            x_label: "number of evaluations".into(),
            y_label: "best solution value".into(),
            lines,
            hlines: self.optimum.map(|o| ("optimum".to_string(), o)).into_iter().collect(),
            notes: match self.optimum {
                Some(_) => vec![format!("{} instances, 95% CI", self.instances)],
                None => vec![OPTIMUM_UNAVAILABLE.into()],
            },
            ..Plot::default()
        }
        .render()
    }
}

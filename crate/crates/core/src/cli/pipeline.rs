//! generate → label → train → curves for several instances, driven by one
//! config file, with a manifest of seeds, hyperparameters, file hashes and
//! stage timings.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use sha2::{Digest, Sha256};

use super::config::KeyValues;
use super::{default_checkpoints, estimators_from_config, plan_from_config};
use crate::bench::{benchmark_curves, BenchInstance, EstimatorKind, StageSeeds};
use crate::dataset::{build_dataset, split_dataset, DatasetConfig};
use crate::domain::ProblemSpec;
use crate::error::{Error, Result};
use crate::neural::{grid_search, TrainConfig};
use crate::seeds;
use crate::valuegen::ValueDistribution;

#[derive(Clone, Debug)]
pub struct PipelineSummary {
    pub out_dir: PathBuf,
    pub manifest: PathBuf,
    /// Written files relative to `out_dir`, in write order.
    pub files: Vec<PathBuf>,
}

struct Recorder {
    dir: PathBuf,
    files: Vec<(PathBuf, String)>,
    timings: Vec<(String, u128)>,
}

impl Recorder {
    fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<()> {
        let rel = rel.as_ref().to_path_buf();
        let path = self.dir.join(&rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.files.push((rel, hex::encode(Sha256::digest(bytes))));
        Ok(())
    }

    fn timed<T>(&mut self, stage: &str, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        let started = Instant::now();
        let out = f(self).map_err(|e| e.in_stage(stage))?;
        self.timings.push((stage.to_string(), started.elapsed().as_millis()));
        Ok(out)
    }
}

fn describe(dist: &ValueDistribution) -> String {
    match dist {
        ValueDistribution::Npd(p) => format!("npd mu={} sigma={}", p.mu, p.sigma),
        ValueDistribution::Trap(p) => format!(
            "trap delta={} tau={} eps={} sigma={}",
            p.delta, p.tau_threshold, p.epsilon, p.sigma
        ),
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// Run the whole pipeline. `out_dir` overrides the config's `out_dir`.
pub fn run_pipeline(config: &Path, out_dir: Option<&Path>) -> Result<PipelineSummary> {
    let kv = KeyValues::load(config)?;
    let master: u64 = kv.require("seed")?;
    let plan = plan_from_config(&kv)?;
    let count: usize = kv.or("instances", 5)?;
    let evals: usize = kv.or("evals", 2000)?;
    let checkpoints = kv.list("checkpoints")?.unwrap_or_else(|| default_checkpoints(evals));
    let estimators = estimators_from_config(&kv)?;
    let config_dir = kv.or("out_dir", PathBuf::from("pipeline_out"))?;
    kv.reject_unused()?;
    if count == 0 {
        return Err(Error::Config("config key `instances` must be at least 1".into()));
    }
    plan.dataset.validate(plan.n).map_err(|e| e.in_stage("label"))?;

    let dir = out_dir.map_or(config_dir, Path::to_path_buf);
    fs::create_dir_all(&dir)?;
    let mut rec = Recorder {
        dir: dir.clone(),
        files: Vec::new(),
        timings: Vec::new(),
    };

    let mut manifest = String::new();
    let _ = writeln!(manifest, "# uca pipeline manifest");
    let _ = writeln!(manifest, "master_seed = {master}");
    let _ = writeln!(manifest, "distribution = {}", describe(&plan.distribution));
    let _ = writeln!(manifest, "n = {}\nm = {}", plan.n, plan.m);
    let _ = writeln!(
        manifest,
        "kappa = {}\npairs_per_level = {}\nsplit = {}",
        plan.dataset.kappa, plan.dataset.pairs_per_level, plan.dataset.split_fraction
    );
    let _ = writeln!(
        manifest,
        "epochs = {}\nlr_grid = {}\nbatch_grid = {}",
        plan.train.epochs,
        join(&plan.lr_grid),
        join(&plan.batch_grid)
    );
    let _ = writeln!(
        manifest,
        "adam = beta1 {} beta2 {} epsilon {}",
        plan.train.beta1, plan.train.beta2, plan.train.epsilon
    );
    let _ = writeln!(manifest, "label_budget = {}\nexact_budget = {}", plan.dataset.node_budget, plan.exact_budget);
    let names: Vec<&str> = estimators.iter().map(EstimatorKind::name).collect();
    let _ = writeln!(
        manifest,
        "instances = {count}\nevals = {evals}\ncheckpoints = {}\nestimators = {}",
        join(&checkpoints),
        names.join(",")
    );

    let mut instances = Vec::with_capacity(count);
    for i in 0..count {
        let instance_seed = seeds::derive(master, &format!("instance/{i}"));
        let s = StageSeeds::from_instance(instance_seed);
        let prefix = PathBuf::from(format!("instance_{i}"));

        let table = rec.timed(&format!("instance_{i}/generate"), |rec| {
            let table = plan.distribution.generate(&ProblemSpec::new(plan.n, plan.m, s.table)?)?;
            let mut bytes = Vec::new();
            table.write_to(&mut bytes)?;
            rec.write(prefix.join("table.ucav"), &bytes)?;
            Ok(table)
        })?;

        let data = rec.timed(&format!("instance_{i}/label"), |rec| {
            let data = build_dataset(
                &table,
                &DatasetConfig {
                    seed: s.label,
                    ..plan.dataset
                },
            )?;
            let mut bytes = Vec::new();
            data.write_to(&mut bytes)?;
            rec.write(prefix.join("dataset.ucad"), &bytes)?;
            Ok(data)
        })?;

        let grid = rec.timed(&format!("instance_{i}/train"), |rec| {
            let (train_set, test_set) =
                split_dataset(data.pairs.clone(), plan.dataset.split_fraction, &mut seeds::rng(s.split));
            let base = TrainConfig {
                seed: s.train,
                ..plan.train
            };
            let grid = grid_search(&train_set, &test_set, &plan.lr_grid, &plan.batch_grid, &base)?;
            let mut bytes = Vec::new();
            grid.outcome.model.write_to(&mut bytes)?;
            rec.write(prefix.join("model.ucam"), &bytes)?;
            rec.write(prefix.join("training_trace.csv"), grid.outcome.trace_csv().as_bytes())?;
            let mut cells = String::from("learning_rate,batch_size,test_loss\n");
            for c in &grid.cells {
                let _ = writeln!(cells, "{},{},{}", c.learning_rate, c.batch_size, c.test_loss);
            }
            rec.write(prefix.join("grid_search.csv"), cells.as_bytes())?;
            Ok(grid)
        })?;

        let _ = writeln!(manifest, "\n[instance {i}]");
        let _ = writeln!(manifest, "instance_seed = {instance_seed}");
        let _ = writeln!(
            manifest,
            "generate_seed = {}\nlabel_seed = {}\nsplit_seed = {}\ntrain_seed = {}",
            s.table, s.label, s.split, s.train
        );
        let _ = writeln!(
            manifest,
            "selected_learning_rate = {}\nselected_batch_size = {}\nfinal_test_loss = {}",
            grid.best.learning_rate,
            grid.best.batch_size,
            grid.outcome.final_test_loss()
        );
        instances.push((table, grid.outcome.model));
    }

    let curves_seed = seeds::derive(master, "curves");
    rec.timed("curves", |rec| {
        let bench: Vec<BenchInstance> = instances
            .into_iter()
            .map(|(table, model)| BenchInstance::with_optimum(table, Some(model), plan.exact_budget))
            .collect::<Result<_>>()?;
        let report = benchmark_curves(&bench, &estimators, evals, &checkpoints, curves_seed)?;
        rec.write("curves.csv", report.to_csv().as_bytes())?;
        let title = format!("Best of N, {}", plan.distribution.name());
        rec.write("curves.svg", report.to_svg(&title).as_bytes())?;
        Ok(())
    })?;
    let _ = writeln!(manifest, "\n[curves]\ncurves_seed = {curves_seed}");

    let _ = writeln!(manifest, "\n[files]");
    for (rel, hash) in &rec.files {
        let _ = writeln!(manifest, "sha256 {hash}  {}", rel.display());
    }
    let _ = writeln!(manifest, "\n[timings_ms]");
    for (stage, ms) in &rec.timings {
        let _ = writeln!(manifest, "{stage} = {ms}");
    }
    let manifest_path = dir.join("manifest.txt");
    fs::write(&manifest_path, manifest)?;
    Ok(PipelineSummary {
        out_dir: dir,
        manifest: manifest_path,
        files: rec.files.into_iter().map(|(p, _)| p).collect(),
    })
}

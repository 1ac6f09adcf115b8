//! Reduced-scale best-of-N comparison: five instances per distribution, each
//! with its own trained heuristic, scored against current-value and random
//! greedy rollouts and the exact optimum.
//!
//! cargo run --release --example benchmark_curves -- [npd|trap|both] [pairs_per_level] [epochs]

use std::time::Instant;

use uca::bench::{benchmark_curves, prepare_instances, EstimatorKind, InstancePlan, DEFAULT_CHECKPOINTS};
use uca::dataset::DatasetConfig;
use uca::exact::DEFAULT_NODE_BUDGET;
use uca::neural::TrainConfig;
use uca::valuegen::{NpdParams, TrapParams, ValueDistribution};

fn main() -> uca::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let which = args.next().unwrap_or_else(|| "both".into());
    let pairs: usize = args.next().map_or(500, |s| s.parse().expect("pairs"));
    let epochs: usize = args.next().map_or(60, |s| s.parse().expect("epochs"));
    let (n, m, kappa) = (10, 4, 4);

    let mut dists = Vec::new();
    if which != "trap" {
        dists.push(ValueDistribution::Npd(NpdParams::default()));
    }
    if which != "npd" {
        dists.push(ValueDistribution::Trap(TrapParams::for_elements(n)));
    }
    for dist in dists {
        let plan = InstancePlan {
            distribution: dist,
            n,
            m,
            dataset: DatasetConfig::new(kappa, pairs, 0),
            train: TrainConfig {
                epochs,
                ..TrainConfig::default()
            },
            lr_grid: vec![1e-3, 3e-3],
            batch_grid: vec![64],
            exact_budget: DEFAULT_NODE_BUDGET,
        };
        let started = Instant::now();
        let prepared = prepare_instances(&plan, 5, 2024)?;
        for (i, p) in prepared.iter().enumerate() {
            println!(
                "{} instance {i}: lr={} batch={} test mse {:.4} -> {:.4}",
                dist.name(),
                p.grid.best.learning_rate,
                p.grid.best.batch_size,
                p.grid.outcome.trace[0].test_loss,
                p.grid.outcome.final_test_loss()
            );
        }
        println!("prepared in {:.1?}", started.elapsed());

        let instances: Vec<_> = prepared.into_iter().map(|p| p.instance).collect();
        let started = Instant::now();
        let report = benchmark_curves(&instances, &EstimatorKind::ALL, 2000, &DEFAULT_CHECKPOINTS, 7)?;
        println!("curves in {:.1?}", started.elapsed());
        print!("{}", report.to_csv());
        std::fs::write(format!("{}_curves.svg", dist.name()), report.to_svg(&format!("{} best of N", dist.name())))?;
    }
    Ok(())
}

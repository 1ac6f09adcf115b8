//! Train on partial assignments with 1 to 3 unassigned elements, then measure
//! prediction error on 1 to 6, including counts never seen in training.
//!
//! cargo run --release --example prediction_error

use uca::bench::{prediction_error_report, prepare_instance, InstancePlan};
use uca::dataset::DatasetConfig;
use uca::exact::DEFAULT_NODE_BUDGET;
use uca::neural::TrainConfig;
use uca::seeds;
use uca::valuegen::{NpdParams, ValueDistribution};

fn main() -> uca::error::Result<()> {
    let plan = InstancePlan {
        distribution: ValueDistribution::Npd(NpdParams::default()),
        n: 10,
        m: 4,
        dataset: DatasetConfig::new(3, 600, 0),
        train: TrainConfig {
            epochs: 60,
            ..TrainConfig::default()
        },
        lr_grid: vec![1e-3],
        batch_grid: vec![64],
        exact_budget: DEFAULT_NODE_BUDGET,
    };
    let prepared = prepare_instance(&plan, 17)?;
    let report = prediction_error_report(
        &prepared.grid.outcome.model,
        &prepared.instance.table,
        &[1, 2, 3, 4, 5, 6],
        100,
        &mut seeds::rng(3),
        DEFAULT_NODE_BUDGET,
    )?;
    print!("{}", report.to_csv());

    let dir = std::env::temp_dir();
    std::fs::write(dir.join("prediction_error.svg"), report.error_svg("Prediction error"))?;
    std::fs::write(dir.join("prediction_scatter.svg"), report.scatter_svg("Predicted vs true"))?;
    println!("plots in {}", dir.display());
    Ok(())
}

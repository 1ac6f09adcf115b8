//! Grid-search the value-to-go network on a labeled TRAP dataset and compare
//! its error with always predicting the mean target.
//!
//! Hyperparameters are picked by final test loss, so the reported test loss
//! is optimistic.
//!
//! cargo run --release --example train_heuristic

use uca::dataset::{build_dataset, split_dataset, DatasetConfig};
use uca::domain::ProblemSpec;
use uca::neural::{grid_search, predict_value_to_go, TrainConfig};
use uca::seeds;
use uca::valuegen::{generate_trap, TrapParams};

fn main() -> uca::error::Result<()> {
    let (n, m) = (10, 4);
    let v = generate_trap(&ProblemSpec::new(n, m, 21)?, &TrapParams::for_elements(n))?;
    let data = build_dataset(&v, &DatasetConfig::new(4, 500, 3))?;
    let (train, test) = split_dataset(data.pairs, 0.1, &mut seeds::rng(4));

    let base = TrainConfig {
        epochs: 60,
        seed: 9,
        ..TrainConfig::default()
    };
    let grid = grid_search(&train, &test, &[3e-4, 1e-3, 3e-3], &[32, 64], &base)?;
    for c in &grid.cells {
        println!("lr {:<6} batch {:<3} test mse {:.4}", c.learning_rate, c.batch_size, c.test_loss);
    }
    let model = &grid.outcome.model;
    println!("picked lr {} batch {}", grid.best.learning_rate, grid.best.batch_size);

    let mean = train.iter().map(|p| p.target).sum::<f64>() / train.len() as f64;
    println!("unassigned  model MAE  mean MAE");
    for k in 1..=4 {
        let level: Vec<_> = test.iter().filter(|p| p.unassigned_count() == k).collect();
        let mut model_err = 0.0;
        let mut mean_err = 0.0;
        for p in &level {
            model_err += (predict_value_to_go(model, &p.assignment, &v)? - p.target).abs();
            mean_err += (mean - p.target).abs();
        }
        let count = level.len() as f64;
        println!("{k:>10}  {:>9.4}  {:>8.4}", model_err / count, mean_err / count);
    }
    std::fs::write(std::env::temp_dir().join("training_trace.csv"), grid.outcome.trace_csv())?;
    Ok(())
}

//! Label random partial assignments with their exact value-to-go, split the
//! pairs into train and test sets, and write the dataset file.
//!
//! cargo run --release --example build_dataset

use uca::dataset::{build_dataset, split_dataset, Dataset, DatasetConfig};
use uca::domain::ProblemSpec;
use uca::seeds;
use uca::valuegen::{generate_npd, NpdParams};

fn main() -> uca::error::Result<()> {
    let v = generate_npd(&ProblemSpec::new(10, 4, 11)?, &NpdParams::default())?;
    let cfg = DatasetConfig::new(4, 250, 5);
    let data = build_dataset(&v, &cfg)?;
    println!("{} pairs, per unassigned count: {:?}", data.pairs.len(), &data.level_histogram()[1..]);

    for pair in data.pairs.iter().step_by(250) {
        println!(
            "{:?}  V = {:.4}  V* = {:.4}",
            pair.assignment, pair.current_value, pair.target
        );
    }

    let (train, test) = split_dataset(data.pairs.clone(), cfg.split_fraction, &mut seeds::rng(1));
    println!("split: {} train / {} test", train.len(), test.len());

    let path = std::env::temp_dir().join("uca_example.ucad");
    data.save(&path)?;
    assert_eq!(Dataset::load(&path)?, data);
    println!("saved {}", path.display());
    Ok(())
}

//! Best-of-N greedy rollouts on one NPD table with the current-value and
//! random estimators, next to the exact optimum.
//!
//! cargo run --release --example greedy_rollouts

use uca::domain::{value_of, ProblemSpec};
use uca::exact::{solve_exact, DEFAULT_NODE_BUDGET};
use uca::search::{best_of_n, greedy_rollout, Estimator};
use uca::seeds;
use uca::valuegen::{generate_npd, NpdParams};

fn main() -> uca::error::Result<()> {
    let v = generate_npd(&ProblemSpec::new(10, 4, 8)?, &NpdParams::default())?;
    let (_, optimum) = solve_exact(&v, DEFAULT_NODE_BUDGET)?;

    let single = greedy_rollout(&v, &Estimator::CurrentValue, &mut seeds::rng(0))?;
    println!("one current-value rollout: {single:?} = {:.4}", value_of(&single, &v)?);

    let checkpoints = [1, 10, 100, 1000];
    for est in [Estimator::CurrentValue, Estimator::Random] {
        let res = best_of_n(&v, &est, 1000, &checkpoints, &mut seeds::rng(1))?;
        let trail: Vec<String> = res.checkpoints.iter().map(|(k, b)| format!("{k}:{b:.4}")).collect();
        println!("{est:>8}  {}", trail.join("  "));
    }
    println!(" optimum  {optimum:.4}");
    Ok(())
}

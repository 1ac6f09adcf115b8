//! Monte Carlo estimate of how often a uniformly random assignment of a
//! full-scale (20 elements, 10 alternatives) TRAP problem has positive value, plus a value histogram.
//!
//! cargo run --release --example trap_probability -- [samples] [seed]

use std::time::Instant;

use uca::bench::{estimate_positive_probability, value_histogram};
use uca::domain::ProblemSpec;
use uca::seeds;
use uca::valuegen::{generate_trap, TrapParams};

fn main() -> uca::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let samples: u64 = args.next().map_or(100_000_000, |s| s.parse().expect("samples"));
    let seed: u64 = args.next().map_or(1, |s| s.parse().expect("seed"));

    let (n, m) = (20, 10);
    let started = Instant::now();
    let v = generate_trap(&ProblemSpec::new(n, m, seed)?, &TrapParams::for_elements(n))?;
    println!("table {n}x{m} generated in {:.1?}", started.elapsed());

    let started = Instant::now();
    let est = estimate_positive_probability(&v, samples, &mut seeds::rng(seeds::derive(seed, "probability")))?;
    println!(
        "P(V > 0) ~ {:.3e} ({} of {} samples) in {:.1?}",
        est.probability,
        est.positives,
        est.samples,
        started.elapsed()
    );

    let hist = value_histogram(&v, samples.min(10_000_000), 60, &mut seeds::rng(seeds::derive(seed, "histogram")))?;
    println!("histogram over [{:.3}, {:.3}], mean {:.4}", hist.low, hist.high, hist.mean);
    std::fs::write("trap_histogram.svg", hist.to_svg("TRAP value distribution"))?;
    std::fs::write("trap_histogram.csv", hist.to_csv())?;
    Ok(())
}

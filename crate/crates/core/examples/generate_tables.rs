//! Draw NPD and TRAP tables, save and reload one, and show how TRAP entry
//! means depend on bundle size.
//!
//! cargo run --example generate_tables

use uca::domain::{Bundle, ProblemSpec, ValueTable};
use uca::valuegen::{generate_npd, generate_trap, trap_mean, NpdParams, TrapParams};

fn main() -> uca::error::Result<()> {
    let spec = ProblemSpec::new(6, 3, 7)?;
    let npd = generate_npd(&spec, &NpdParams::default())?;
    let params = TrapParams::for_elements(6);
    let trap = generate_trap(&spec, &params)?;

    println!("{} bundles x {} alternatives per table", spec.bundle_count(), spec.m());
    println!("size  trap_mean  trap v(C,0)  npd v(C,0)");
    for size in 0..=6 {
        let bundle = Bundle((1u32 << size) - 1);
        println!(
            "{size:>4}  {:>9.4}  {:>11.4}  {:>10.4}",
            trap_mean(size, &params),
            trap.get(bundle, 0),
            npd.get(bundle, 0)
        );
    }

    let dir = std::env::temp_dir().join("uca_generate_tables");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("trap.ucav");
    trap.save(&path)?;
    let back = ValueTable::load(&path)?;
    assert_eq!(back, trap);
    println!("round trip through {} ok", path.display());
    Ok(())
}

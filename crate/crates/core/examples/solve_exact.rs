//! Exact optimum by depth-first search, the value-to-go of a partial
//! assignment, and what happens when the node budget is too small.
//!
//! cargo run --example solve_exact

use uca::domain::{value_of, PartialAssignment, ProblemSpec};
use uca::error::Error;
use uca::exact::{search_nodes, solve_exact, value_to_go, DEFAULT_NODE_BUDGET};
use uca::valuegen::{generate_trap, TrapParams};

fn main() -> uca::error::Result<()> {
    let (n, m) = (8, 3);
    let v = generate_trap(&ProblemSpec::new(n, m, 3)?, &TrapParams::for_elements(n))?;

    let (best, value) = solve_exact(&v, DEFAULT_NODE_BUDGET)?;
    println!("optimum {value:.4} at {best:?} ({} nodes)", search_nodes(m, n));

    // fix the first three elements to different alternatives and ask what is still reachable
    let s = PartialAssignment::from_labels(m, &[Some(0), Some(1), Some(2), None, None, None, None, None])?;
    println!(
        "{s:?}: V = {:.4}, best completion V* = {:.4}",
        value_of(&s, &v)?,
        value_to_go(&s, &v, DEFAULT_NODE_BUDGET)?
    );

    match solve_exact(&v, 1000) {
        Err(e @ Error::Budget { .. }) => println!("with a 1000-node budget: {e}"),
        other => println!("unexpected: {other:?}"),
    }
    Ok(())
}

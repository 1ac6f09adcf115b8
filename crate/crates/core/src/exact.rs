//! Exhaustive value-to-go search.
//!
//! `V*(S)` is `V(S)` for a complete assignment and otherwise the maximum of
//! `V*` over the `m` extensions placing the next element of an element order.
//! The search is a plain depth-first walk of that tree with no pruning; its
//! cost, `Σ_{d≤r} m^d` nodes for `r` unassigned elements, is checked against an
//! explicit node budget before any work is done.
//!
//! Leaf values are always summed from scratch in alternative order, so two
//! searches reaching the same complete assignment produce bit-identical values
//! regardless of the element order used to get there.

use crate::domain::{value_of, ElementOrder, PartialAssignment, ValueTable, MAX_ALTERNATIVES};
use crate::error::{Error, Result};

pub const DEFAULT_NODE_BUDGET: u64 = 100_000_000;

/// Nodes visited by a full search of depth `depth` and branching `m`,
/// saturating at `u64::MAX`.
pub fn search_nodes(m: usize, depth: usize) -> u64 {
    let mut total: u64 = 0;
    let mut level: u64 = 1;
    for _ in 0..=depth {
        total = total.saturating_add(level);
        level = level.saturating_mul(m as u64);
    }
    total
}

fn check_budget(m: usize, depth: usize, budget: u64) -> Result<()> {
    let required = search_nodes(m, depth);
    if required > budget {
        return Err(Error::Budget {
            required,
            budget,
            context: None,
        });
    }
    Ok(())
}

fn check_dims(s: &PartialAssignment, v: &ValueTable) -> Result<()> {
    if s.n() != v.n() || s.m() != v.m() {
        return Err(Error::usage(format!(
            "assignment is {}x{} but table is {}x{}",
            s.n(),
            s.m(),
            v.n(),
            v.m()
        )));
    }
    Ok(())
}

struct Dfs<'a> {
    table: &'a ValueTable,
    elements: &'a [usize],
    masks: Vec<u32>,
    best: f64,
    best_masks: Option<Vec<u32>>,
}

impl Dfs<'_> {
    fn run(&mut self, depth: usize) {
        if depth == self.elements.len() {
            let value = self.table.sum_bundles(&self.masks);
            if value > self.best {
                self.best = value;
                if let Some(best) = self.best_masks.as_mut() {
                    best.copy_from_slice(&self.masks);
                }
            }
            return;
        }
        let bit = 1u32 << self.elements[depth];
        for t in 0..self.masks.len() {
            self.masks[t] |= bit;
            self.run(depth + 1);
            self.masks[t] &= !bit;
        }
    }
}

/// Max over all completions of `s`, placing `elements` in the given order.
/// Returns the best value and, if `track` is set, the best bundle masks.
fn search(
    s: &PartialAssignment,
    v: &ValueTable,
    elements: &[usize],
    track: bool,
) -> (f64, Option<Vec<u32>>) {
    let masks = s.bundle_masks();
    let mut dfs = Dfs {
        table: v,
        elements,
        best_masks: track.then(|| masks.clone()),
        masks,
        best: f64::NEG_INFINITY,
    };
    dfs.run(0);
    (dfs.best, dfs.best_masks)
}

/// `V*(S)` following `order`: the elements assigned in `s` must be exactly
/// the first `||S||` entries of `order`.
pub fn exact_value_to_go(
    s: &PartialAssignment,
    v: &ValueTable,
    order: &ElementOrder,
    budget: u64,
) -> Result<f64> {
    check_dims(s, v)?;
    if order.len() != s.n() {
        return Err(Error::usage(format!(
            "element order has {} entries, expected {}",
            order.len(),
            s.n()
        )));
    }
    let k = s.assigned_count();
    let (prefix, rest) = order.as_slice().split_at(k);
    if let Some(&a) = prefix.iter().find(|&&a| !s.is_assigned(a)) {
        return Err(Error::usage(format!(
            "element {a} is among the first {k} of the order but unassigned"
        )));
    }
    check_budget(v.m(), rest.len(), budget)?;
    Ok(search(s, v, rest, false).0)
}

/// `V*(S)` for a partial assignment over an arbitrary subset: the maximum
/// over all completions, placing the unassigned elements in ascending order.
pub fn value_to_go(s: &PartialAssignment, v: &ValueTable, budget: u64) -> Result<f64> {
    check_dims(s, v)?;
    let rest: Vec<usize> = s.unassigned().collect();
    check_budget(v.m(), rest.len(), budget)?;
    Ok(search(s, v, &rest, false).0)
}

/// Optimal complete assignment and its value.
///
/// Among equal-valued optima the first one in depth-first order (elements
/// ascending, alternatives ascending) is returned.
pub fn solve_exact(v: &ValueTable, budget: u64) -> Result<(PartialAssignment, f64)> {
    check_budget(v.m(), v.n(), budget)?;
    let empty = PartialAssignment::for_table(v);
    let order: Vec<usize> = (0..v.n()).collect();
    let (best, masks) = search(&empty, v, &order, true);
    let masks = masks.expect("tracked search returns masks");
    let mut labels = vec![0u8; v.n()];
    for (t, mask) in masks.iter().enumerate() {
        for (j, label) in labels.iter_mut().enumerate() {
            if mask >> j & 1 == 1 {
                *label = t as u8;
            }
        }
    }
    let s = PartialAssignment::from_raw_labels(v.m(), &labels)?;
    debug_assert_eq!(value_of(&s, v)?, best);
    Ok((s, best))
}

/// Index of the child of `s` (placing `element`) with the highest score;
/// ties go to the lowest alternative index.
pub fn argmax_over_children<F>(s: &PartialAssignment, element: usize, mut score: F) -> Result<usize>
where
    F: FnMut(&PartialAssignment) -> f64,
{
    if element >= s.n() || s.is_assigned(element) {
        return Err(Error::usage(format!(
            "element {element} is not an unassigned element of the assignment"
        )));
    }
    debug_assert!(s.m() <= MAX_ALTERNATIVES);
    let mut best = 0;
    let mut best_score = f64::NEG_INFINITY;
    for t in 0..s.m() {
        let child = s.with_label(element, t)?;
        let sc = score(&child);
        if sc > best_score || t == 0 {
            best = t;
            best_score = sc;
        }
    }
    Ok(best)
}

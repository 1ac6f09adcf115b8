//! Greedy rollouts guided by a child estimator, and best-of-N sampling.
//!
//! A rollout draws a uniform element order, then places each element in
//! turn into the alternative whose resulting child scores highest. Repeating
//! rollouts with fresh orders and keeping the best complete assignment gives
//! the best-of-N curves used to compare estimators.

use std::fmt;

use rand::Rng;

use crate::domain::{value_of, ElementOrder, PartialAssignment, ValueTable};
use crate::error::{Error, Result};
use crate::exact::argmax_over_children;
use crate::neural::{predict_value_to_go, MlpModel};
use crate::seeds;
use crate::workers;

/// How a rollout scores the children of the current partial assignment.
#[derive(Clone, Copy, Debug)]
pub enum Estimator<'a> {
    /// `V(child)`: each rollout becomes a greedy local optimum.
    CurrentValue,
    /// Independent uniform scores: each rollout is a uniform sample.
    Random,
    /// Learned value-to-go estimate of the child.
    Neural(&'a MlpModel),
}

impl Estimator<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Estimator::CurrentValue => "current",
            Estimator::Random => "random",
            Estimator::Neural(_) => "neural",
        }
    }

    pub fn check(&self, v: &ValueTable) -> Result<()> {
        match self {
            Estimator::Neural(model) if model.n() != v.n() || model.m() != v.m() => {
                Err(Error::usage(format!(
                    "model is {}x{} but table is {}x{}",
                    model.n(),
                    model.m(),
                    v.n(),
                    v.m()
                )))
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Estimator<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RolloutResult {
    pub best_assignment: PartialAssignment,
    pub best_value: f64,
    /// `(evaluations so far, best value so far)` at each requested checkpoint.
    pub checkpoints: Vec<(usize, f64)>,
}

fn rollout_unchecked<R: Rng + ?Sized>(v: &ValueTable, est: &Estimator<'_>, rng: &mut R) -> PartialAssignment {
    let order = ElementOrder::random(v.n(), rng);
    let mut s = PartialAssignment::for_table(v);
    for &a in order.as_slice() {
        let t = match est {
            Estimator::CurrentValue => {
                argmax_over_children(&s, a, |c| value_of(c, v).expect("dimensions checked"))
            }
            Estimator::Random => argmax_over_children(&s, a, |_| rng.random::<f64>()),
            Estimator::Neural(model) => argmax_over_children(&s, a, |c| {
                predict_value_to_go(model, c, v).expect("dimensions checked")
            }),
        }
        .expect("element is unassigned");
        s = s.with_label(a, t).expect("valid placement");
    }
    s
}

/// One greedy rollout from the empty assignment; returns a complete assignment.
pub fn greedy_rollout<R: Rng + ?Sized>(
    v: &ValueTable,
    est: &Estimator<'_>,
    rng: &mut R,
) -> Result<PartialAssignment> {
    est.check(v)?;
    Ok(rollout_unchecked(v, est, rng))
}

/// Run `n_evals` independent rollouts, tracking the running best value.
///
/// Rollout `k` uses stream `k` of a base seed drawn from `rng`, and the
/// running maximum is reduced in rollout order (ties keep the earlier
/// rollout), so the result does not depend on worker scheduling.
pub fn best_of_n<R: Rng + ?Sized>(
    v: &ValueTable,
    est: &Estimator<'_>,
    n_evals: usize,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<RolloutResult> {
    est.check(v)?;
    if n_evals == 0 {
        return Err(Error::usage("need at least one evaluation"));
    }
    if checkpoints.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::usage("checkpoints must be sorted"));
    }
    if let Some(&bad) = checkpoints.iter().find(|&&c| c == 0 || c > n_evals) {
        return Err(Error::usage(format!("checkpoint {bad} outside 1..={n_evals}")));
    }
    let base: u64 = rng.random();
    let rollouts = workers::map_indexed(n_evals, |k| {
        let s = rollout_unchecked(v, est, &mut seeds::substream(base, k as u64));
        let value = value_of(&s, v).expect("dimensions checked");
        (s, value)
    });

    let mut best: Option<(PartialAssignment, f64)> = None;
    let mut trace = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for (k, (s, value)) in rollouts.into_iter().enumerate() {
        if best.as_ref().is_none_or(|(_, b)| value > *b) {
            best = Some((s, value));
        }
        let done = k + 1;
        while next.peek().is_some_and(|&&c| c == done) {
            trace.push((done, best.as_ref().unwrap().1));
            next.next();
        }
    }
    let (best_assignment, best_value) = best.expect("n_evals >= 1");
    Ok(RolloutResult {
        best_assignment,
        best_value,
        checkpoints: trace,
    })
}

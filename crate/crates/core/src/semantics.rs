//! Trajectories of interest, traces, and satisfaction verdicts for finite
//! executions of a plan.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::abstraction::TransitionSystem;
use crate::geometry::Workspace;
use crate::ltl::{word_satisfies, Formula, Plan};

/// Stutter-free sequence of region propositions, with the time step at
/// which each letter was first observed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub letters: Vec<usize>,
    pub steps: Vec<usize>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The trace read as an infinite word: the last letter repeats forever.
    pub fn letter(&self, i: usize) -> usize {
        self.letters[i.min(self.letters.len() - 1)]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TraceError {
    #[error("no labeled states")]
    NoLabeledStates,
}

/// `(k, proposition)` for the states inside some region, in order.
pub fn trajectory_of_interest(ws: &Workspace, states: &[Vec<f64>]) -> Vec<(usize, usize)> {
    states.iter().enumerate().filter_map(|(k, x)| ws.region_of(x).map(|r| (k, r + 1))).collect()
}

/// Collapses repeated labels of the trajectory of interest. A constant tail
/// becomes a single final letter, read as repeating forever.
pub fn extract_trace(ws: &Workspace, states: &[Vec<f64>]) -> Result<Trace, TraceError> {
    let kept = trajectory_of_interest(ws, states);
    if kept.is_empty() {
        return Err(TraceError::NoLabeledStates);
    }
    let mut trace = Trace { letters: Vec::new(), steps: Vec::new() };
    for (k, letter) in kept {
        if trace.letters.last() != Some(&letter) {
            trace.letters.push(letter);
            trace.steps.push(k);
        }
    }
    Ok(trace)
}

/// Stutter-collapsed letters of the first `n` plan states.
fn plan_letters(ts: &TransitionSystem, plan: &Plan, n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = plan.states(n).into_iter().map(|s| ts.label(s)).collect();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    /// A state left the free space.
    OutsideFreeSpace {
        step: usize,
    },
    NoLabeledStates,
    /// Observed letter `index` differs from the plan.
    Diverged {
        index: usize,
        step: usize,
        expected: usize,
        observed: usize,
    },
    /// The run is consistent with the plan but too short to show the prefix
    /// and two turns of the suffix.
    Incomplete {
        observed: usize,
        required: usize,
    },
    /// The plan's own word does not satisfy the formula.
    PlanViolates,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        *self == Verdict::Pass
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "pass"),
            Verdict::OutsideFreeSpace { step } => write!(f, "fail: state at k={step} is outside the free space"),
            Verdict::NoLabeledStates => write!(f, "fail: no labeled states"),
            Verdict::Diverged { index, step, expected, observed } => {
                write!(f, "fail: trace diverges at letter {index} (k={step}): expected p{expected}, observed p{observed}")
            }
            Verdict::Incomplete { observed, required } => {
                write!(f, "incomplete: {observed} trace letters observed, {required} required")
            }
            Verdict::PlanViolates => write!(f, "fail: plan word does not satisfy the formula"),
        }
    }
}

/// Pass iff every state is in the free space, the observed trace is a
/// prefix of the plan's trace, and it covers the prefix plus two turns of
/// the suffix (for a constant suffix: reaching the final region). The
/// plan's lasso word is then checked against `φ` directly.
pub fn check_run(phi: &Formula, ts: &TransitionSystem, plan: &Plan, ws: &Workspace, states: &[Vec<f64>]) -> Verdict {
    if let Some(step) = states.iter().position(|x| !ws.in_free_space(x)) {
        return Verdict::OutsideFreeSpace { step };
    }
    let trace = match extract_trace(ws, states) {
        Ok(t) => t,
        Err(TraceError::NoLabeledStates) => return Verdict::NoLabeledStates,
    };
    let required = plan_letters(ts, plan, plan.prefix.len() + 2 * plan.suffix.len()).len();
    let expected = plan_letters(ts, plan, plan.prefix.len() + (trace.len() + 1) * plan.suffix.len());
    for (index, &observed) in trace.letters.iter().enumerate() {
        // a constant suffix collapses to one final letter
        let want = expected[index.min(expected.len() - 1)];
        if observed != want {
            return Verdict::Diverged { index, step: trace.steps[index], expected: want, observed };
        }
    }
    if trace.len() < required {
        return Verdict::Incomplete { observed: trace.len(), required };
    }
    let (pre, cyc) = plan.word(ts);
    if !word_satisfies(phi, &pre, &cyc) {
        return Verdict::PlanViolates;
    }
    Verdict::Pass
}

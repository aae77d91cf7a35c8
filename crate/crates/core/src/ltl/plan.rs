use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{to_buchi, BuchiAutomaton, Formula};
use crate::abstraction::TransitionSystem;

/// Prefix-suffix plan over states of `𝒯`, executed as
/// `prefix · suffix · suffix · …`. The suffix ends at the last prefix
/// state (the knot), so every consecutive pair, including
/// `suffix.last → suffix[0]`, is an edge.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub prefix: Vec<usize>,
    pub suffix: Vec<usize>,
}

impl Plan {
    pub fn len(&self) -> usize {
        self.prefix.len() + self.suffix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `s*_i` for any `i ≥ 0`.
    pub fn state_at(&self, i: usize) -> usize {
        if i < self.prefix.len() {
            self.prefix[i]
        } else {
            self.suffix[(i - self.prefix.len()) % self.suffix.len()]
        }
    }

    /// First `n` entries of the state sequence.
    pub fn states(&self, n: usize) -> Vec<usize> {
        (0..n).map(|i| self.state_at(i)).collect()
    }

    /// Proposition word as (prefix letters, cycle letters).
    pub fn word(&self, ts: &TransitionSystem) -> (Vec<usize>, Vec<usize>) {
        (self.prefix.iter().map(|&s| ts.label(s)).collect(), self.suffix.iter().map(|&s| ts.label(s)).collect())
    }

    /// True when the only repeated neighbours are a terminal self-loop
    /// written as a one-state suffix.
    pub fn stutter_free(&self) -> bool {
        let seq = self.states(self.len() + self.suffix.len());
        let terminal = self.suffix.len() == 1;
        seq.windows(2).enumerate().all(|(i, w)| w[0] != w[1] || (terminal && i + 1 >= self.prefix.len()))
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PlanError {
    #[error("formula {formula} is unrealizable on the transition system")]
    Unrealizable { formula: String },
}

struct Product {
    /// `(ts state, automaton state)`
    nodes: Vec<(usize, usize)>,
    succ: Vec<Vec<usize>>,
    initial: Vec<usize>,
    accepting: Vec<bool>,
}

fn product(ts: &TransitionSystem, aut: &BuchiAutomaton) -> Product {
    let mut index = std::collections::HashMap::new();
    let mut nodes = Vec::new();
    let mut queue = VecDeque::new();
    let mut visit = |key: (usize, usize), nodes: &mut Vec<(usize, usize)>, queue: &mut VecDeque<usize>| -> usize {
        *index.entry(key).or_insert_with(|| {
            nodes.push(key);
            queue.push_back(nodes.len() - 1);
            nodes.len() - 1
        })
    };
    let mut initial = Vec::new();
    for (q, label) in &aut.edges[aut.initial()] {
        if label.admits(ts.label(ts.initial)) {
            initial.push(visit((ts.initial, *q), &mut nodes, &mut queue));
        }
    }
    let mut succ: Vec<Vec<usize>> = Vec::new();
    while let Some(v) = queue.pop_front() {
        let (s, q) = nodes[v];
        let mut out = Vec::new();
        for t in ts.successors(s) {
            for (q2, label) in &aut.edges[q] {
                if label.admits(ts.label(t)) {
                    out.push(visit((t, *q2), &mut nodes, &mut queue));
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        if succ.len() <= v {
            succ.resize(v + 1, Vec::new());
        }
        succ[v] = out;
    }
    succ.resize(nodes.len(), Vec::new());
    initial.sort_unstable();
    initial.dedup();
    let accepting = nodes.iter().map(|&(_, q)| aut.accepting[q]).collect();
    Product { nodes, succ, initial, accepting }
}

const INF: usize = usize::MAX;

fn bfs(succ: &[Vec<usize>], sources: &[usize]) -> Vec<usize> {
    let mut dist = vec![INF; succ.len()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s] == INF {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(v) = queue.pop_front() {
        for &w in &succ[v] {
            if dist[w] == INF {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Lexicographically smallest projected state sequence of a path of exactly
/// `len` edges from `from` to the node whose distances are `to_dist`.
/// Includes both endpoints.
fn lexmin_path(p: &Product, from: &[usize], to_dist: &[usize], len: usize) -> Vec<usize> {
    let mut current: Vec<usize> = from.iter().copied().filter(|&v| to_dist[v] == len).collect();
    let mut out = Vec::with_capacity(len + 1);
    for step in 0..=len {
        let best = current.iter().map(|&v| p.nodes[v].0).min().expect("a path of this length exists");
        out.push(best);
        current.retain(|&v| p.nodes[v].0 == best);
        if step == len {
            break;
        }
        let remaining = len - step - 1;
        let mut next: Vec<usize> = current.iter().flat_map(|&v| p.succ[v].iter().copied()).filter(|&w| to_dist[w] == remaining).collect();
        next.sort_unstable();
        next.dedup();
        current = next;
    }
    out
}

/// Rewrites a lasso into the canonical form used by plans: internal
/// stutters removed, the suffix reduced to its primitive period and the
/// knot rolled back as far as it goes. The trace is unchanged.
pub fn normalize(mut prefix: Vec<usize>, mut suffix: Vec<usize>) -> Plan {
    loop {
        let before = (prefix.clone(), suffix.clone());
        prefix.dedup();
        // cyclic dedup of the suffix, keeping its last entry (the knot)
        if suffix.len() > 1 {
            let mut kept: Vec<usize> = Vec::with_capacity(suffix.len());
            let n = suffix.len();
            for i in 0..n {
                let prev = if i == 0 { suffix[n - 1] } else { suffix[i - 1] };
                if i == n - 1 || suffix[i] != prev {
                    kept.push(suffix[i]);
                }
            }
            suffix = kept;
        }
        // primitive period
        let n = suffix.len();
        if let Some(d) = (1..n).find(|&d| n.is_multiple_of(d) && (d..n).all(|i| suffix[i] == suffix[i - d])) {
            suffix.truncate(d);
        }
        // roll the knot back while the preceding states agree
        while prefix.len() >= 2 {
            let before_knot = if suffix.len() >= 2 { suffix[suffix.len() - 2] } else { suffix[0] };
            if prefix[prefix.len() - 2] != before_knot {
                break;
            }
            prefix.pop();
            suffix.rotate_right(1);
        }
        if (prefix.clone(), suffix.clone()) == before {
            return Plan { prefix, suffix };
        }
    }
}

/// Accepting lasso of `𝒯 ⊗ 𝒜_φ`, projected to `𝒯` and normalized; the
/// shortest by `|prefix| + |suffix|`, then `|suffix|`, then state order.
pub fn plan(ts: &TransitionSystem, phi: &Formula) -> Result<Plan, PlanError> {
    let aut = to_buchi(phi);
    let p = product(ts, &aut);
    let n = p.nodes.len();
    let from_init = bfs(&p.succ, &p.initial);
    let dist: Vec<Vec<usize>> = (0..n).map(|v| bfs(&p.succ, &[v])).collect();
    // dist_to[t][v] = dist[v][t]
    let dist_to = |t: usize| -> Vec<usize> { (0..n).map(|v| dist[v][t]).collect() };

    let mut best: Option<(usize, usize, Vec<usize>, Plan)> = None;
    for knot in (0..n).filter(|&k| from_init[k] != INF) {
        let knot_dist = dist_to(knot);
        let prefix = lexmin_path(&p, &p.initial, &knot_dist, from_init[knot]);
        for acc in (0..n).filter(|&a| p.accepting[a]) {
            let cycle = if acc == knot {
                let len = p.succ[knot].iter().map(|&w| knot_dist[w]).filter(|&d| d != INF).min();
                let Some(len) = len else { continue };
                let starts: Vec<usize> = p.succ[knot].iter().copied().filter(|&w| knot_dist[w] == len).collect();
                lexmin_path(&p, &starts, &knot_dist, len)
            } else {
                if dist[knot][acc] == INF || dist[acc][knot] == INF {
                    continue;
                }
                let mut out = lexmin_path(&p, &[knot], &dist_to(acc), dist[knot][acc]);
                out.extend(lexmin_path(&p, &[acc], &knot_dist, dist[acc][knot]).into_iter().skip(1));
                out.remove(0);
                out
            };
            let candidate = normalize(prefix.clone(), cycle);
            let seq: Vec<usize> = candidate.prefix.iter().chain(&candidate.suffix).copied().collect();
            let key = (candidate.len(), candidate.suffix.len(), seq);
            if best.as_ref().is_none_or(|b| (key.0, key.1, &key.2) < (b.0, b.1, &b.2)) {
                best = Some((key.0, key.1, key.2, candidate));
            }
        }
    }
    let Some((_, _, _, upper)) = best else {
        return Err(PlanError::Unrealizable { formula: phi.to_string() });
    };
    Ok(shortest_lasso(ts, &aut, upper.len(), SEARCH_BUDGET).unwrap_or(upper))
}

/// Path extensions allowed in the exact search before falling back to the
/// product candidate.
const SEARCH_BUDGET: usize = 2_000_000;

/// Exact search over lassos of `𝒯` with at most `upper` states, in plan
/// order (total length, suffix length, state sequence). The product lasso
/// can be longer than necessary when the automaton needs several turns of a
/// cycle, and stutter removal afterwards does not recover every shortest
/// plan, so this pass settles minimality. `None` if the budget runs out.
fn shortest_lasso(ts: &TransitionSystem, aut: &BuchiAutomaton, upper: usize, budget: usize) -> Option<Plan> {
    let mut work = 0usize;
    for total in 2..=upper {
        for suffix_len in 1..total {
            let prefix_len = total - suffix_len;
            let mut path = vec![ts.initial];
            let mut stack: Vec<Vec<usize>> = vec![ts.successors(ts.initial).collect::<Vec<_>>().into_iter().rev().collect()];
            while let Some(options) = stack.last_mut() {
                let Some(next) = options.pop() else {
                    stack.pop();
                    path.pop();
                    continue;
                };
                work += 1;
                if work > budget {
                    return None;
                }
                path.push(next);
                if path.len() == total {
                    if path[prefix_len - 1] == next {
                        let (pre, suf) = path.split_at(prefix_len);
                        let letters = |v: &[usize]| v.iter().map(|&s| ts.label(s)).collect::<Vec<_>>();
                        if aut.accepts(&letters(pre), &letters(suf)) {
                            return Some(normalize(pre.to_vec(), suf.to_vec()));
                        }
                    }
                    path.pop();
                    continue;
                }
                stack.push(ts.successors(next).collect::<Vec<_>>().into_iter().rev().collect());
            }
        }
    }
    None
}

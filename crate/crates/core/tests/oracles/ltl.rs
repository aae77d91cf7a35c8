//! Exhaustive enumerators for the temporal-logic layer: every formula up to
//! a depth, every short lasso word, and the shortest satisfying lasso of a
//! transition system by brute force.

use tubeplan::abstraction::TransitionSystem;
use tubeplan::ltl::{word_satisfies, Formula};

/// All formulas over `true`, atoms `1..=atoms`, `¬`, `∧`, `𝖴` of depth at
/// most `depth`.
pub fn all_formulas(depth: usize, atoms: usize) -> Vec<Formula> {
    let mut level: Vec<Formula> = std::iter::once(Formula::True).chain((1..=atoms).map(Formula::atom)).collect();
    for _ in 0..depth {
        let prev = level.clone();
        let mut next = prev.clone();
        next.extend(prev.iter().map(|f| Formula::not(f.clone())));
        for a in &prev {
            for b in &prev {
                next.push(Formula::and(a.clone(), b.clone()));
                next.push(Formula::until(a.clone(), b.clone()));
            }
        }
        level = next;
    }
    level
}

/// All words over `letters` of each length in `lengths`.
pub fn all_words(letters: &[usize], lengths: std::ops::RangeInclusive<usize>) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for len in lengths {
        let mut w = vec![0usize; len];
        loop {
            out.push(w.iter().map(|&i| letters[i]).collect());
            let mut k = 0;
            loop {
                if k == len {
                    break;
                }
                w[k] += 1;
                if w[k] < letters.len() {
                    break;
                }
                w[k] = 0;
                k += 1;
            }
            if k == len {
                break;
            }
        }
    }
    out
}

/// Shortest `|prefix| + |suffix|` over all lassos of `ts` in the plan
/// convention (prefix starts at the initial state, suffix ends at the last
/// prefix state) whose word satisfies `phi`, searching up to `bound`.
pub fn shortest_lasso(ts: &TransitionSystem, phi: &Formula, bound: usize) -> Option<usize> {
    for total in 2..=bound {
        // every path of `total` states from the initial one
        let mut paths = vec![vec![ts.initial]];
        for _ in 1..total {
            paths = paths
                .into_iter()
                .flat_map(|p| {
                    let last = *p.last().unwrap();
                    ts.successors(last)
                        .map(move |t| {
                            let mut q = p.clone();
                            q.push(t);
                            q
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
        }
        for path in &paths {
            for split in 1..total {
                let (prefix, suffix) = path.split_at(split);
                if suffix.last() != prefix.last() {
                    continue;
                }
                let pre: Vec<usize> = prefix.iter().map(|&s| ts.label(s)).collect();
                let cyc: Vec<usize> = suffix.iter().map(|&s| ts.label(s)).collect();
                if word_satisfies(phi, &pre, &cyc) {
                    return Some(total);
                }
            }
        }
    }
    None
}

use super::Formula;

/// Whether the ultimately periodic word `prefix · cycle^ω` satisfies `φ`.
/// Letters are proposition indices. Each subformula is evaluated at the
/// `|prefix| + |cycle|` distinct positions; `𝖴` is the least fixpoint of
/// its one-step unfolding.
pub fn word_satisfies(phi: &Formula, prefix: &[usize], cycle: &[usize]) -> bool {
    assert!(!cycle.is_empty(), "cycle must be nonempty");
    let word: Vec<usize> = prefix.iter().chain(cycle).copied().collect();
    let succ = |k: usize| if k + 1 < word.len() { k + 1 } else { prefix.len() };
    eval(phi, &word, &succ)[0]
}

fn eval(phi: &Formula, word: &[usize], succ: &dyn Fn(usize) -> usize) -> Vec<bool> {
    let n = word.len();
    match phi {
        Formula::True => vec![true; n],
        Formula::Atom(p) => word.iter().map(|l| l == p).collect(),
        Formula::Not(a) => eval(a, word, succ).into_iter().map(|v| !v).collect(),
        Formula::And(a, b) => {
            let (a, b) = (eval(a, word, succ), eval(b, word, succ));
            a.iter().zip(&b).map(|(x, y)| *x && *y).collect()
        }
        Formula::Until(a, b) => {
            let (a, b) = (eval(a, word, succ), eval(b, word, succ));
            let mut v = b.clone();
            loop {
                let mut changed = false;
                for k in (0..n).rev() {
                    if !v[k] && a[k] && v[succ(k)] {
                        v[k] = true;
                        changed = true;
                    }
                }
                if !changed {
                    return v;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ltl::parse;

    #[test]
    fn examples() {
        assert!(word_satisfies(&parse("G p1").unwrap(), &[], &[1]));
        assert!(!word_satisfies(&parse("F p2").unwrap(), &[1], &[1]));
        assert!(word_satisfies(&parse("G(F p1 & F p2 & F p3 & F p4)").unwrap(), &[], &[1, 2, 3, 4]));
        assert!(!word_satisfies(&parse("G(F p1 & F p2 & F p3 & F p4)").unwrap(), &[1, 2, 3, 4], &[4]));
        assert!(word_satisfies(&parse("F p3 & F G p4").unwrap(), &[2, 3], &[4]));
        assert!(!word_satisfies(&parse("F G p4").unwrap(), &[], &[4, 1]));
        assert!(word_satisfies(&parse("p2 U p1").unwrap(), &[2, 2], &[1]));
        assert!(!word_satisfies(&parse("p2 U p1").unwrap(), &[2, 3], &[1]));
        assert!(!word_satisfies(&parse("p2 U p1").unwrap(), &[], &[2]));
    }
}

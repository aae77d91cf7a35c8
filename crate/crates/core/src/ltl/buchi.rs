use std::collections::{BTreeSet, HashMap};

use super::Formula;

/// Negation normal form. `NotAtom(p)` holds on every letter other than `p`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Nnf {
    True,
    False,
    Atom(usize),
    NotAtom(usize),
    And(Box<Nnf>, Box<Nnf>),
    Or(Box<Nnf>, Box<Nnf>),
    Until(Box<Nnf>, Box<Nnf>),
    Release(Box<Nnf>, Box<Nnf>),
}

fn nnf(f: &Formula, negated: bool) -> Nnf {
    match (f, negated) {
        (Formula::True, false) => Nnf::True,
        (Formula::True, true) => Nnf::False,
        (Formula::Atom(p), false) => Nnf::Atom(*p),
        (Formula::Atom(p), true) => Nnf::NotAtom(*p),
        (Formula::Not(a), n) => nnf(a, !n),
        (Formula::And(a, b), false) => Nnf::And(Box::new(nnf(a, false)), Box::new(nnf(b, false))),
        (Formula::And(a, b), true) => Nnf::Or(Box::new(nnf(a, true)), Box::new(nnf(b, true))),
        (Formula::Until(a, b), false) => Nnf::Until(Box::new(nnf(a, false)), Box::new(nnf(b, false))),
        (Formula::Until(a, b), true) => Nnf::Release(Box::new(nnf(a, true)), Box::new(nnf(b, true))),
    }
}

/// Letters admitted on an edge: `required` (if any) and none of
/// `forbidden`. Letters are single propositions, so at most one atom can be
/// required.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub required: Option<usize>,
    pub forbidden: BTreeSet<usize>,
}

impl Label {
    pub fn admits(&self, letter: usize) -> bool {
        self.required.is_none_or(|r| r == letter) && !self.forbidden.contains(&letter)
    }
}

/// Degeneralized Büchi automaton with edge labels. State 0 is the single
/// initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct BuchiAutomaton {
    pub accepting: Vec<bool>,
    /// `edges[q]` lists `(target, label)`.
    pub edges: Vec<Vec<(usize, Label)>>,
}

impl BuchiAutomaton {
    pub fn states(&self) -> usize {
        self.accepting.len()
    }

    pub fn initial(&self) -> usize {
        0
    }

    /// Acceptance of `prefix · cycle^ω`: a reachable accepting state on a
    /// cycle of the product with the word's position graph.
    pub fn accepts(&self, prefix: &[usize], cycle: &[usize]) -> bool {
        assert!(!cycle.is_empty(), "cycle must be nonempty");
        let word: Vec<usize> = prefix.iter().chain(cycle).copied().collect();
        let n = word.len();
        let next_pos = |k: usize| if k + 1 < n { k + 1 } else { prefix.len() };
        // node (q, k): in state q, about to read word[k]
        let id = |q: usize, k: usize| q * n + k;
        let total = self.states() * n;
        let succ = |v: usize| -> Vec<usize> {
            let (q, k) = (v / n, v % n);
            self.edges[q].iter().filter(|(_, l)| l.admits(word[k])).map(|&(t, _)| id(t, next_pos(k))).collect()
        };
        let mut reached = vec![false; total];
        let mut stack = vec![id(0, 0)];
        reached[id(0, 0)] = true;
        while let Some(v) = stack.pop() {
            for w in succ(v) {
                if !reached[w] {
                    reached[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..total).filter(|&v| reached[v] && self.accepting[v / n]).any(|a| {
            let mut seen = vec![false; total];
            let mut stack = succ(a);
            while let Some(v) = stack.pop() {
                if v == a {
                    return true;
                }
                if !seen[v] {
                    seen[v] = true;
                    stack.extend(succ(v));
                }
            }
            false
        })
    }
}

#[derive(Clone, Debug)]
struct Node {
    incoming: BTreeSet<usize>,
    new: BTreeSet<Nnf>,
    old: BTreeSet<Nnf>,
    next: BTreeSet<Nnf>,
}

const INIT: usize = usize::MAX;

fn contradicts(old: &BTreeSet<Nnf>, lit: &Nnf) -> bool {
    match lit {
        Nnf::False => true,
        Nnf::Atom(p) => old.iter().any(|g| matches!(g, Nnf::NotAtom(q) if q == p) || matches!(g, Nnf::Atom(q) if q != p)),
        Nnf::NotAtom(p) => old.contains(&Nnf::Atom(*p)),
        _ => false,
    }
}

/// Tableau expansion into the graph of consistent nodes (`old`, `next`).
fn expand(start: Node, nodes: &mut Vec<Node>) {
    let mut work = vec![start];
    while let Some(mut node) = work.pop() {
        let Some(eta) = node.new.pop_first() else {
            if let Some(existing) = nodes.iter_mut().find(|n| n.old == node.old && n.next == node.next) {
                existing.incoming.extend(node.incoming);
                continue;
            }
            let id = nodes.len();
            let next = node.next.clone();
            nodes.push(node);
            work.push(Node { incoming: BTreeSet::from([id]), new: next, old: BTreeSet::new(), next: BTreeSet::new() });
            continue;
        };
        if node.old.contains(&eta) {
            work.push(node);
            continue;
        }
        match &eta {
            Nnf::False | Nnf::True | Nnf::Atom(_) | Nnf::NotAtom(_) => {
                if contradicts(&node.old, &eta) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Nnf::And(a, b) => {
                for f in [a, b] {
                    if !node.old.contains(f) {
                        node.new.insert((**f).clone());
                    }
                }
                node.old.insert(eta);
                work.push(node);
            }
            Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
                let (new1, next1, new2): (Vec<&Nnf>, bool, Vec<&Nnf>) = match &eta {
                    Nnf::Or(..) => (vec![a], false, vec![b]),
                    Nnf::Until(..) => (vec![a], true, vec![b]),
                    _ => (vec![b], true, vec![a, b]),
                };
                let mut n1 = node.clone();
                let mut n2 = node;
                for f in new1 {
                    if !n1.old.contains(f) {
                        n1.new.insert(f.clone());
                    }
                }
                if next1 {
                    n1.next.insert(eta.clone());
                }
                for f in new2 {
                    if !n2.old.contains(f) {
                        n2.new.insert(f.clone());
                    }
                }
                n1.old.insert(eta.clone());
                n2.old.insert(eta);
                // second branch is expanded first; order only affects ids
                work.push(n1);
                work.push(n2);
            }
        }
    }
}

fn label_of(old: &BTreeSet<Nnf>) -> Label {
    let mut required = None;
    let mut forbidden = BTreeSet::new();
    for f in old {
        match f {
            Nnf::Atom(p) => required = Some(*p),
            Nnf::NotAtom(p) => {
                forbidden.insert(*p);
            }
            _ => {}
        }
    }
    Label { required, forbidden }
}

fn subformulas<'a>(f: &'a Nnf, out: &mut Vec<&'a Nnf>) {
    out.push(f);
    match f {
        Nnf::And(a, b) | Nnf::Or(a, b) | Nnf::Until(a, b) | Nnf::Release(a, b) => {
            subformulas(a, out);
            subformulas(b, out);
        }
        _ => {}
    }
}

/// Tableau translation followed by degeneralization with a counter over
/// the `𝖴`-subformula acceptance sets.
pub fn to_buchi(phi: &Formula) -> BuchiAutomaton {
    let root = nnf(phi, false);
    let mut nodes = Vec::new();
    expand(
        Node { incoming: BTreeSet::from([INIT]), new: BTreeSet::from([root.clone()]), old: BTreeSet::new(), next: BTreeSet::new() },
        &mut nodes,
    );

    let mut subs = Vec::new();
    subformulas(&root, &mut subs);
    let untils: BTreeSet<&Nnf> = subs.into_iter().filter(|f| matches!(f, Nnf::Until(..))).collect();
    // F_u: nodes where `a 𝖴 b` is absent or `b` holds
    let in_set: Vec<Vec<bool>> = untils
        .iter()
        .map(|u| {
            let Nnf::Until(_, b) = u else { unreachable!() };
            nodes.iter().map(|n| !n.old.contains(*u) || n.old.contains(&**b)).collect()
        })
        .collect();
    let k = in_set.len().max(1);
    let member = |c: usize, node: usize| in_set.is_empty() || in_set[c][node];

    // degeneralized states: 0 = initial, then (node, counter)
    let mut index: HashMap<(usize, usize), usize> = HashMap::new();
    let mut accepting = vec![false];
    let mut edges: Vec<Vec<(usize, Label)>> = vec![Vec::new()];
    let labels: Vec<Label> = nodes.iter().map(|n| label_of(&n.old)).collect();
    let mut queue = Vec::new();
    let intern = |key: (usize, usize),
                  index: &mut HashMap<(usize, usize), usize>,
                  accepting: &mut Vec<bool>,
                  edges: &mut Vec<Vec<(usize, Label)>>,
                  queue: &mut Vec<(usize, usize)>| {
        *index.entry(key).or_insert_with(|| {
            accepting.push(key.1 == 0 && member(0, key.0));
            edges.push(Vec::new());
            queue.push(key);
            accepting.len() - 1
        })
    };
    for (t, node) in nodes.iter().enumerate() {
        if node.incoming.contains(&INIT) {
            let q = intern((t, 0), &mut index, &mut accepting, &mut edges, &mut queue);
            edges[0].push((q, labels[t].clone()));
        }
    }
    while let Some((n, c)) = queue.pop() {
        let from = index[&(n, c)];
        let c2 = if member(c, n) { (c + 1) % k } else { c };
        for (t, node) in nodes.iter().enumerate() {
            if node.incoming.contains(&n) {
                let q = intern((t, c2), &mut index, &mut accepting, &mut edges, &mut queue);
                edges[from].push((q, labels[t].clone()));
            }
        }
    }
    for e in &mut edges {
        e.sort();
    }
    BuchiAutomaton { accepting, edges }
}

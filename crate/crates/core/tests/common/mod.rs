#![allow(dead_code)]

use std::collections::HashMap;
use std::sync::Arc;

use gwa_core::{Action, Graph, LabelId, OutcomeKind, Signature, WalkingAutomaton};

/// Two direction pairs, one initial label, two others.
pub fn two_pair_sig() -> Arc<Signature> {
    Arc::new(
        Signature::builder()
            .pair("r", "l")
            .pair("u", "w")
            .label("s", true, &["r", "l"])
            .label("a", false, &["r", "l", "u", "w"])
            .label("b", false, &["u", "w"])
            .build()
            .unwrap(),
    )
}

/// One pair plus a self-opposite direction.
pub fn loop_sig() -> Arc<Signature> {
    Arc::new(
        Signature::builder()
            .pair("r", "l")
            .self_opposite("o")
            .label("s", true, &["r", "o"])
            .label("a", false, &["l", "o"])
            .label("b", false, &["r", "l", "o"])
            .build()
            .unwrap(),
    )
}

/// Builds a graph from a label list and `(u, dir, v)` edges, inserting
/// nodes in the order `perm` (node `perm[i]` is inserted i-th).
pub fn build(sig: &Arc<Signature>, labels: &[LabelId], edges: &[(usize, gwa_core::DirId, usize)], initial: usize, perm: &[usize]) -> Graph {
    let mut b = Graph::builder(sig.clone());
    let mut at = vec![0; labels.len()];
    for &v in perm {
        at[v] = b.add_node(format!("n{v}"), labels[v]).unwrap();
    }
    for &(u, d, v) in edges {
        if b.neighbor(at[u], d).is_none() {
            b.connect(at[u], d, at[v]).unwrap();
        }
    }
    b.set_initial(at[initial]);
    b.build().unwrap()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..=p.len() {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// Pointed isomorphism by trying every bijection.
pub fn isomorphic(g: &Graph, h: &Graph) -> bool {
    let n = g.num_nodes();
    if n != h.num_nodes() {
        return false;
    }
    let sig = g.sig();
    'perm: for p in permutations(n) {
        if p[g.initial()] != h.initial() {
            continue;
        }
        for v in 0..n {
            if sig.label_name(g.label(v)) != h.sig().label_name(h.label(p[v])) {
                continue 'perm;
            }
            for d in sig.dir_ids() {
                if g.neighbor(v, d).map(|u| p[u]) != h.neighbor(p[v], d) {
                    continue 'perm;
                }
            }
        }
        return true;
    }
    false
}

#[derive(Debug, PartialEq, Eq)]
pub struct RefOutcome {
    pub kind: OutcomeKind,
    pub steps: usize,
    pub state: usize,
    pub node: usize,
}

/// Direct simulation remembering the step at which each configuration
/// was first seen.
pub fn reference_run(a: &WalkingAutomaton, g: &Graph) -> RefOutcome {
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    let (mut q, mut v) = (a.initial(), g.initial());
    let mut step = 0;
    loop {
        if seen.insert((q, v), step).is_some() {
            return RefOutcome { kind: OutcomeKind::Loop, steps: step, state: q, node: v };
        }
        match a.action(q, g.label(v)) {
            Action::Accept => return RefOutcome { kind: OutcomeKind::Accept, steps: step, state: q, node: v },
            Action::Halt => return RefOutcome { kind: OutcomeKind::Reject, steps: step, state: q, node: v },
            Action::Move { next, dir } => match g.neighbor(v, dir) {
                Some(u) => {
                    q = next as usize;
                    v = u;
                    step += 1;
                }
                None => return RefOutcome { kind: OutcomeKind::Reject, steps: step, state: q, node: v },
            },
        }
    }
}

/// Walks an automaton inside a pattern from the node `start` in state
/// `q`. Returns `Some((state, dir))` when a move leaves through a port.
pub fn walk_pattern(a: &WalkingAutomaton, p: &gwa_core::hom::Pattern, start: usize, q: usize) -> Option<(usize, gwa_core::DirId)> {
    let body = p.body();
    let mut seen = std::collections::HashSet::new();
    let (mut q, mut v) = (q, start);
    while seen.insert((q, v)) {
        match a.action(q, body.label(v)) {
            Action::Move { next, dir } => match body.neighbor(v, dir) {
                Some(u) => {
                    q = next as usize;
                    v = u;
                }
                None if p.port(dir) == Some(v) => return Some((next as usize, dir)),
                None => return None,
            },
            _ => return None,
        }
    }
    None
}

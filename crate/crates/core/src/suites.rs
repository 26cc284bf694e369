//! Test-suite generators: exhaustive graph enumeration, seeded random graphs
//! and seeded random automata.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::engine::{Action, WalkingAutomaton};
use crate::graph::{Body, Graph};
use crate::signature::{DirId, LabelId, Signature};

/// All valid connected graphs over `sig` with at most `max_nodes` nodes,
/// each isomorphism class exactly once.
///
/// Graphs are grown in breadth-first order from the initial node: slots are
/// filled node by node in direction order, either by an already present
/// node with a free opposite slot or by a fresh node. Creation order then
/// coincides with the breadth-first numbering, so distinct choice sequences
/// give non-isomorphic graphs.
pub fn enumerate_graphs(sig: &Arc<Signature>, max_nodes: usize) -> Vec<Graph> {
    let mut out = Vec::new();
    if max_nodes == 0 {
        return out;
    }
    let k = sig.num_directions();
    let non_initial: Vec<LabelId> = sig.label_ids().filter(|&l| !sig.label(l).initial).collect();
    for a0 in sig.initial_labels() {
        let mut st = Grower {
            sig,
            k,
            max_nodes,
            labels: vec![a0],
            adj: vec![None; k],
            non_initial: &non_initial,
        };
        st.grow(0, 0, &mut out);
    }
    out
}

struct Grower<'a> {
    sig: &'a Arc<Signature>,
    k: usize,
    max_nodes: usize,
    labels: Vec<LabelId>,
    adj: Vec<Option<u32>>,
    non_initial: &'a [LabelId],
}

impl Grower<'_> {
    fn slot(&self, v: usize, d: DirId) -> usize {
        v * self.k + d.index()
    }

    fn grow(&mut self, v: usize, di: usize, out: &mut Vec<Graph>) {
        if v == self.labels.len() {
            out.push(self.emit());
            return;
        }
        let dirs = &self.sig.label(self.labels[v]).dirs;
        if di == dirs.len() {
            return self.grow(v + 1, 0, out);
        }
        let d = dirs[di];
        let s = self.slot(v, d);
        if self.adj[s].is_some() {
            return self.grow(v, di + 1, out);
        }
        let opp = self.sig.opposite(d);
        for u in v..self.labels.len() {
            if !self.sig.has_dir(self.labels[u], opp) {
                continue;
            }
            let t = self.slot(u, opp);
            if self.adj[t].is_some() {
                continue;
            }
            self.adj[s] = Some(u as u32);
            self.adj[t] = Some(v as u32);
            self.grow(v, di + 1, out);
            self.adj[s] = None;
            self.adj[t] = None;
        }
        if self.labels.len() < self.max_nodes {
            for &l in self.non_initial {
                if !self.sig.has_dir(l, opp) {
                    continue;
                }
                let u = self.labels.len();
                self.labels.push(l);
                self.adj.extend(std::iter::repeat_n(None, self.k));
                let t = self.slot(u, opp);
                self.adj[s] = Some(u as u32);
                self.adj[t] = Some(v as u32);
                self.grow(v, di + 1, out);
                self.adj[s] = None;
                self.labels.pop();
                self.adj.truncate(self.labels.len() * self.k);
            }
        }
    }

    fn emit(&self) -> Graph {
        let mut body = Body::new(self.k);
        for (i, &l) in self.labels.iter().enumerate() {
            body.add_node(i.to_string(), l);
        }
        for v in 0..self.labels.len() {
            for d in self.sig.dir_ids() {
                body.set_half(v, d, self.adj[self.slot(v, d)].map(|u| u as usize));
            }
        }
        Graph::from_body(self.sig.clone(), body, 0)
    }
}

/// A random valid connected graph with exactly `nodes` nodes, or `None`
/// if `attempts` tries found none. Labels are drawn uniformly; each
/// direction pair is matched by a uniform bijection of its slots.
pub fn random_graph<R: Rng>(sig: &Arc<Signature>, nodes: usize, attempts: usize, rng: &mut R) -> Option<Graph> {
    let initial: Vec<LabelId> = sig.initial_labels().collect();
    let others: Vec<LabelId> = sig.label_ids().filter(|&l| !sig.label(l).initial).collect();
    if nodes == 0 || initial.is_empty() || (nodes > 1 && others.is_empty()) {
        return None;
    }
    'attempt: for _ in 0..attempts {
        let mut labels = vec![*initial.choose(rng).expect("non-empty")];
        for _ in 1..nodes {
            labels.push(*others.choose(rng).expect("non-empty"));
        }
        let mut body = Body::new(sig.num_directions());
        for (i, &l) in labels.iter().enumerate() {
            body.add_node(i.to_string(), l);
        }
        for d in sig.dir_ids() {
            let opp = sig.opposite(d);
            if opp < d {
                continue;
            }
            let with = |x: DirId| -> Vec<usize> { (0..nodes).filter(|&v| sig.has_dir(labels[v], x)).collect() };
            let mut left = with(d);
            if opp == d {
                left.shuffle(rng);
                let mut it = left.chunks(2);
                for pair in &mut it {
                    let (v, u) = (pair[0], *pair.get(1).unwrap_or(&pair[0]));
                    body.connect(v, d, u, d).expect("fresh slots");
                }
                continue;
            }
            let mut right = with(opp);
            if left.len() != right.len() {
                continue 'attempt;
            }
            right.shuffle(rng);
            for (&v, &u) in left.iter().zip(&right) {
                body.connect(v, d, u, opp).expect("fresh slots");
            }
        }
        if body.components().len() == 1 {
            return Some(Graph::from_body(sig.clone(), body, 0));
        }
    }
    None
}

/// `count` random graphs with node counts drawn from `sizes`.
pub fn random_suite<R: Rng>(
    sig: &Arc<Signature>,
    count: usize,
    sizes: std::ops::RangeInclusive<usize>,
    rng: &mut R,
) -> Vec<Graph> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let n = rng.gen_range(sizes.clone());
        if let Some(g) = random_graph(sig, n, 1000, rng) {
            out.push(g);
        }
    }
    out
}

/// A random automaton: each pair accepts with probability `p_accept`, is
/// undefined with probability `p_halt`, and otherwise moves uniformly.
pub fn random_automaton<R: Rng>(
    sig: &Arc<Signature>,
    num_states: usize,
    p_accept: f64,
    p_halt: f64,
    rng: &mut R,
) -> WalkingAutomaton {
    let mut a = WalkingAutomaton::with_indexed_states(sig.clone(), num_states).expect("at least one state");
    for q in 0..num_states {
        for l in sig.label_ids() {
            let x: f64 = rng.gen();
            let dirs = &sig.label(l).dirs;
            let act = if x < p_accept {
                Action::Accept
            } else if x < p_accept + p_halt || dirs.is_empty() {
                Action::Halt
            } else {
                Action::Move {
                    next: rng.gen_range(0..num_states) as u32,
                    dir: *dirs.choose(rng).expect("non-empty"),
                }
            };
            a.set_action(q, l, act).expect("generated move is legal");
        }
    }
    a
}

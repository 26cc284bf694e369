//! Ranked trees as graphs, deterministic bottom-up tree automata, and the
//! fishbone encoding of a tree language as an inverse image of two
//! homomorphisms.
//!
//! Tree signatures have directions `+1 -1 +2 -2 ... +k -k` in that order.
//! A label of rank `r` has directions `+1..+r`, plus one parent direction
//! `-d` when it is not initial.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::canon::canonical_encode;
use crate::graph::{Body, Graph, GraphError};
use crate::hom::{apply_unchecked, HomError, Homomorphism, Pattern, PatternBuilder};
use crate::signature::{DirId, LabelId, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error("not a tree signature: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    NotTreeSignature(Vec<TreeViolation>),
    #[error("automaton needs at least one state")]
    NoStates,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("transition for label `{label}` has {got} arguments, rank is {rank}")]
    Arity { label: String, rank: usize, got: usize },
    #[error("no transition for label `{label}` on ({args})")]
    MissingTransition { label: String, args: String },
    #[error("duplicate transition for label `{label}` on ({args})")]
    DuplicateTransition { label: String, args: String },
    #[error("the automaton accepts no tree, so there is no initial annotated label")]
    EmptyLanguage,
    #[error("the tree is not accepted, so it has no annotation")]
    NotAccepted,
    #[error("graph is not a tree over this signature")]
    NotATree,
    #[error("signature mismatch")]
    SignatureMismatch,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum TreeViolation {
    DirectionName { index: usize, found: String, expected: String },
    DirectionOpposite { direction: String },
    OddDirections(usize),
    RankTooLarge { label: String, rank: usize },
    Shape { label: String },
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::DirectionName { index, found, expected } => {
                write!(f, "direction {index} is `{found}`, expected `{expected}`")
            }
            TreeViolation::DirectionOpposite { direction } => {
                write!(f, "direction `{direction}` has the wrong opposite")
            }
            TreeViolation::OddDirections(k) => write!(f, "odd number of directions ({k})"),
            TreeViolation::RankTooLarge { label, rank } => write!(f, "label `{label}` has rank {rank} above k"),
            TreeViolation::Shape { label } => {
                write!(f, "label `{label}` does not have directions +1..+rank with at most one parent direction")
            }
        }
    }
}

/// Directions `+1 -1 ... +k -k` as `(name, opposite)` pairs.
pub fn tree_directions(k: usize) -> Vec<(String, String)> {
    (1..=k)
        .flat_map(|i| [(format!("+{i}"), format!("-{i}")), (format!("-{i}"), format!("+{i}"))])
        .collect()
}

fn plus(i: usize) -> DirId {
    DirId((2 * (i - 1)) as u16)
}

fn minus(i: usize) -> DirId {
    DirId((2 * (i - 1) + 1) as u16)
}

/// Shape checks; empty iff `sig` is a tree signature.
pub fn validate_tree_signature(sig: &Signature) -> Vec<TreeViolation> {
    let mut out = Vec::new();
    let nd = sig.num_directions();
    if nd % 2 == 1 {
        out.push(TreeViolation::OddDirections(nd));
        return out;
    }
    let k = nd / 2;
    let expected = tree_directions(k);
    for (idx, d) in sig.dir_ids().enumerate() {
        let name = sig.dir_name(d);
        if name != expected[idx].0 {
            out.push(TreeViolation::DirectionName {
                index: idx,
                found: name.to_string(),
                expected: expected[idx].0.clone(),
            });
        } else if sig.dir_name(sig.opposite(d)) != expected[idx].1 {
            out.push(TreeViolation::DirectionOpposite { direction: name.to_string() });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for l in sig.label_ids() {
        let lab = sig.label(l);
        if shape_of(sig, l).is_none() {
            let pos = lab.dirs.iter().filter(|d| d.0 % 2 == 0).count();
            if pos > k {
                out.push(TreeViolation::RankTooLarge {
                    label: lab.name.clone(),
                    rank: pos,
                });
            } else {
                out.push(TreeViolation::Shape { label: lab.name.clone() });
            }
        }
    }
    out
}

fn shape_of(sig: &Signature, l: LabelId) -> Option<(usize, Option<usize>)> {
    let lab = sig.label(l);
    let pos: Vec<usize> = lab.dirs.iter().filter(|d| d.0 % 2 == 0).map(|d| d.index() / 2 + 1).collect();
    let neg: Vec<usize> = lab.dirs.iter().filter(|d| d.0 % 2 == 1).map(|d| d.index() / 2 + 1).collect();
    let rank = pos.len();
    if pos != (1..=rank).collect::<Vec<_>>() {
        return None;
    }
    match (lab.initial, neg.as_slice()) {
        (true, []) => Some((rank, None)),
        (false, [d]) => Some((rank, Some(*d))),
        _ => None,
    }
}

/// A signature checked to be a tree signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeSignature {
    sig: Arc<Signature>,
    k: usize,
    rank: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl TreeSignature {
    pub fn new(sig: Arc<Signature>) -> Result<Self, TreeError> {
        let v = validate_tree_signature(&sig);
        if !v.is_empty() {
            return Err(TreeError::NotTreeSignature(v));
        }
        let shapes: Vec<_> = sig.label_ids().map(|l| shape_of(&sig, l).expect("validated")).collect();
        Ok(TreeSignature {
            k: sig.num_directions() / 2,
            rank: shapes.iter().map(|s| s.0).collect(),
            parent: shapes.iter().map(|s| s.1).collect(),
            sig,
        })
    }

    /// Labels given as `(name, parent, rank)`; `parent = None` makes the
    /// label initial.
    pub fn from_labels(k: usize, labels: &[(&str, Option<usize>, usize)]) -> Result<Self, TreeError> {
        let dirs = tree_directions(k);
        let mut parts = Vec::new();
        for &(name, parent, rank) in labels {
            let mut ds: Vec<String> = parent.iter().map(|&d| format!("-{d}")).collect();
            ds.extend((1..=rank).map(|i| format!("+{i}")));
            parts.push((name.to_string(), parent.is_none(), ds));
        }
        Self::new(Arc::new(Signature::from_parts(&dirs, &parts)?))
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rank(&self, l: LabelId) -> usize {
        self.rank[l.index()]
    }

    /// `Some(d)` when nodes with this label hang off their parent's `+d`.
    pub fn parent(&self, l: LabelId) -> Option<usize> {
        self.parent[l.index()]
    }

    pub fn plus(&self, i: usize) -> DirId {
        plus(i)
    }

    pub fn minus(&self, i: usize) -> DirId {
        minus(i)
    }
}

/// True iff `g` is a valid graph over a tree signature.
pub fn is_tree(g: &Graph) -> bool {
    validate_tree_signature(g.sig()).is_empty() && g.is_valid()
}

/// A ranked tree in term form.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree {
    pub label: LabelId,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: LabelId) -> Self {
        Tree { label, children: Vec::new() }
    }

    pub fn size(&self) -> usize {
        1 + self.children.iter().map(Tree::size).sum::<usize>()
    }

    /// Graph with nodes numbered in breadth-first order, ids `0, 1, ...`.
    pub fn to_graph(&self, ts: &TreeSignature) -> Graph {
        let mut body = Body::new(ts.sig.num_directions());
        let mut queue = std::collections::VecDeque::new();
        body.add_node("0", self.label);
        queue.push_back((self, 0usize));
        while let Some((t, v)) = queue.pop_front() {
            for (i, c) in t.children.iter().enumerate() {
                let u = body.num_nodes();
                body.add_node(u.to_string(), c.label);
                body.connect(v, plus(i + 1), u, minus(i + 1)).expect("fresh slots");
                queue.push_back((c, u));
            }
        }
        Graph::from_body(ts.sig.clone(), body, 0)
    }

    /// Reads a valid tree graph back into term form.
    pub fn from_graph(ts: &TreeSignature, g: &Graph) -> Result<Tree, TreeError> {
        if **g.sig() != *ts.sig {
            return Err(TreeError::SignatureMismatch);
        }
        if !g.is_valid() {
            return Err(TreeError::NotATree);
        }
        fn go(ts: &TreeSignature, g: &Graph, v: usize) -> Tree {
            let label = g.label(v);
            let children = (1..=ts.rank(label))
                .map(|i| go(ts, g, g.neighbor(v, plus(i)).expect("valid")))
                .collect();
            Tree { label, children }
        }
        Ok(go(ts, g, g.initial()))
    }

    pub fn display<'a>(&'a self, sig: &'a Signature) -> impl fmt::Display + 'a {
        struct D<'a>(&'a Tree, &'a Signature);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}", self.1.label_name(self.0.label))?;
                if !self.0.children.is_empty() {
                    write!(f, "(")?;
                    for (i, c) in self.0.children.iter().enumerate() {
                        if i > 0 {
                            write!(f, ", ")?;
                        }
                        write!(f, "{}", D(c, self.1))?;
                    }
                    write!(f, ")")?;
                }
                Ok(())
            }
        }
        D(self, sig)
    }
}

/// All trees with at most `max_nodes` nodes, by size, then label, then
/// children in order. Every tree appears once.
pub fn enumerate_trees(ts: &TreeSignature, max_nodes: usize) -> Vec<Tree> {
    // by_size[slot][s]: trees of exactly s nodes whose root fits slot,
    // slot 0 for roots and slot i for the i-th child position.
    let k = ts.k;
    let mut by_size: Vec<Vec<Vec<Tree>>> = vec![vec![Vec::new(); max_nodes + 1]; k + 1];
    for s in 1..=max_nodes {
        for slot in 0..=k {
            let mut out = Vec::new();
            for l in ts.sig.label_ids() {
                if ts.parent(l).unwrap_or(0) != slot {
                    continue;
                }
                let r = ts.rank(l);
                let mut acc = Vec::new();
                fill(&by_size, r, 1, s - 1, &mut Vec::new(), &mut acc);
                out.extend(acc.into_iter().map(|children| Tree { label: l, children }));
            }
            by_size[slot][s] = out;
        }
    }
    fn fill(
        by_size: &[Vec<Vec<Tree>>],
        rank: usize,
        i: usize,
        left: usize,
        cur: &mut Vec<Tree>,
        out: &mut Vec<Vec<Tree>>,
    ) {
        if i > rank {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let rest = rank - i;
        for s in 1..=left.saturating_sub(rest) {
            for t in &by_size[i][s] {
                cur.push(t.clone());
                fill(by_size, rank, i + 1, left - s, cur, out);
                cur.pop();
            }
        }
    }
    by_size[0].iter().flatten().cloned().collect()
}

/// Deterministic bottom-up tree automaton.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BottomUpTreeAutomaton {
    ts: Arc<TreeSignature>,
    states: Vec<String>,
    accept: usize,
    /// Per label, results indexed by the arguments in mixed radix, first
    /// argument most significant.
    delta: Vec<Vec<usize>>,
}

impl BottomUpTreeAutomaton {
    pub fn from_fn(
        ts: Arc<TreeSignature>,
        states: Vec<String>,
        accept: usize,
        f: impl Fn(LabelId, &[usize]) -> usize,
    ) -> Result<Self, TreeError> {
        let n = states.len();
        if n == 0 {
            return Err(TreeError::NoStates);
        }
        if accept >= n {
            return Err(TreeError::UnknownState(accept.to_string()));
        }
        let mut delta = Vec::new();
        for l in ts.sig.label_ids() {
            let r = ts.rank(l);
            let mut row = Vec::new();
            for args in tuples(n, r) {
                let q = f(l, &args);
                if q >= n {
                    return Err(TreeError::UnknownState(q.to_string()));
                }
                row.push(q);
            }
            delta.push(row);
        }
        Ok(BottomUpTreeAutomaton { ts, states, accept, delta })
    }

    /// Named rules `(label, args, result)`; every label and argument tuple
    /// needs exactly one rule.
    pub fn from_rules(
        ts: Arc<TreeSignature>,
        states: Vec<String>,
        accept: &str,
        rules: &[(String, Vec<String>, String)],
    ) -> Result<Self, TreeError> {
        let idx = |s: &str| states.iter().position(|x| x == s).ok_or_else(|| TreeError::UnknownState(s.into()));
        let acc = idx(accept)?;
        let mut table: BTreeMap<(LabelId, Vec<usize>), usize> = BTreeMap::new();
        for (label, args, result) in rules {
            let l = ts.sig.label_id(label)?;
            if args.len() != ts.rank(l) {
                return Err(TreeError::Arity {
                    label: label.clone(),
                    rank: ts.rank(l),
                    got: args.len(),
                });
            }
            let a = args.iter().map(|s| idx(s)).collect::<Result<Vec<_>, _>>()?;
            if table.insert((l, a), idx(result)?).is_some() {
                return Err(TreeError::DuplicateTransition {
                    label: label.clone(),
                    args: args.join(","),
                });
            }
        }
        for l in ts.sig.label_ids() {
            for args in tuples(states.len(), ts.rank(l)) {
                if !table.contains_key(&(l, args.clone())) {
                    return Err(TreeError::MissingTransition {
                        label: ts.sig.label_name(l).into(),
                        args: args.iter().map(|&q| states[q].as_str()).collect::<Vec<_>>().join(","),
                    });
                }
            }
        }
        Self::from_fn(ts, states.clone(), acc, |l, a| table[&(l, a.to_vec())])
    }

    pub fn tree_sig(&self) -> &Arc<TreeSignature> {
        &self.ts
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn accept(&self) -> usize {
        self.accept
    }

    pub fn delta(&self, l: LabelId, args: &[usize]) -> usize {
        let n = self.states.len();
        let i = args.iter().fold(0usize, |acc, &q| acc * n + q);
        self.delta[l.index()][i]
    }

    /// All rules as `(label, args, result)` in label then argument order.
    pub fn rules(&self) -> Vec<(LabelId, Vec<usize>, usize)> {
        let mut out = Vec::new();
        for l in self.ts.sig.label_ids() {
            for args in tuples(self.num_states(), self.ts.rank(l)) {
                let r = self.delta(l, &args);
                out.push((l, args, r));
            }
        }
        out
    }

    /// States reachable at a subtree hanging at child position `i`
    /// (index 0 for the root), as a least fixpoint.
    pub fn reachable(&self) -> Vec<Vec<bool>> {
        let (k, n) = (self.ts.k, self.num_states());
        let mut reach = vec![vec![false; n]; k + 1];
        loop {
            let mut changed = false;
            for l in self.ts.sig.label_ids() {
                let slot = self.ts.parent(l).unwrap_or(0);
                for args in tuples(n, self.ts.rank(l)) {
                    if args.iter().enumerate().all(|(i, &q)| reach[i + 1][q]) {
                        let r = self.delta(l, &args);
                        if !reach[slot][r] {
                            reach[slot][r] = true;
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return reach;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        !self.reachable()[0][self.accept]
    }

    /// One state per node, in pre-order.
    pub fn states_of(&self, t: &Tree) -> Vec<usize> {
        fn go(a: &BottomUpTreeAutomaton, t: &Tree, out: &mut Vec<usize>) -> usize {
            let me = out.len();
            out.push(0);
            let args: Vec<usize> = t.children.iter().map(|c| go(a, c, out)).collect();
            out[me] = a.delta(t.label, &args);
            out[me]
        }
        let mut out = Vec::new();
        go(self, t, &mut out);
        out
    }
}

/// All `r`-tuples over `0..n` in lexicographic order.
pub fn tuples(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..r {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |q| {
                    let mut t = t.clone();
                    t.push(q);
                    t
                })
            })
            .collect();
    }
    out
}

/// Root state and acceptance.
pub fn eval_dta(a: &BottomUpTreeAutomaton, t: &Tree) -> (usize, bool) {
    let q = a.states_of(t)[0];
    (q, q == a.accept)
}

/// Same as [`eval_dta`] on a tree graph.
pub fn eval_dta_graph(a: &BottomUpTreeAutomaton, g: &Graph) -> Result<(usize, bool), TreeError> {
    Ok(eval_dta(a, &Tree::from_graph(&a.ts, g)?))
}

/// The two homomorphisms and the intermediate signatures.
#[derive(Clone, Debug)]
pub struct CharacterizationBundle {
    pub automaton: BottomUpTreeAutomaton,
    pub s_reg: Arc<TreeSignature>,
    pub s_mid: Arc<TreeSignature>,
    pub s_comp: Arc<TreeSignature>,
    pub g: Homomorphism,
    pub h: Homomorphism,
    pub n: usize,
    /// For every label of `s_comp`, its base label and state vector.
    pub comp_labels: Vec<(LabelId, Vec<usize>)>,
    comp_index: BTreeMap<(LabelId, Vec<usize>), LabelId>,
    spine: Vec<LabelId>,
    end: Vec<LabelId>,
}

impl CharacterizationBundle {
    pub fn comp_label(&self, base: LabelId, q: &[usize]) -> Option<LabelId> {
        self.comp_index.get(&(base, q.to_vec())).copied()
    }

    /// Label of the spine nodes of fishbones in direction `i`.
    pub fn spine_label(&self, i: usize) -> LabelId {
        self.spine[i - 1]
    }

    pub fn end_label(&self, i: usize) -> LabelId {
        self.end[i - 1]
    }
}

/// Annotated label name: base name followed by the state names.
pub fn annotated_name(base: &str, states: &[String], q: &[usize]) -> String {
    let parts: Vec<&str> = q.iter().map(|&i| states[i].as_str()).collect();
    format!("{base}<{}>", parts.join(","))
}

pub fn build_characterization(a: &BottomUpTreeAutomaton) -> Result<CharacterizationBundle, TreeError> {
    if a.is_empty() {
        return Err(TreeError::EmptyLanguage);
    }
    let s_reg = a.ts.clone();
    let reg = &s_reg.sig;
    let k = s_reg.k;
    let n = a.num_states();
    let names: Vec<String> = reg.label_ids().map(|l| reg.label_name(l).to_string()).collect();

    let mut mid_labels: Vec<(String, Option<usize>, usize)> =
        reg.label_ids().map(|l| (names[l.index()].clone(), s_reg.parent(l), s_reg.rank(l))).collect();
    for i in 1..=k {
        mid_labels.push((format!("e_{i}"), Some(i), k));
    }
    for i in 1..=k {
        mid_labels.push((format!("end_{i}"), Some(i), 0));
    }
    let mref: Vec<(&str, Option<usize>, usize)> = mid_labels.iter().map(|(s, p, r)| (s.as_str(), *p, *r)).collect();
    let s_mid = Arc::new(TreeSignature::from_labels(k, &mref)?);
    let spine: Vec<LabelId> = (1..=k).map(|i| s_mid.sig.label_id(&format!("e_{i}")).unwrap()).collect();
    let end: Vec<LabelId> = (1..=k).map(|i| s_mid.sig.label_id(&format!("end_{i}")).unwrap()).collect();

    let mut comp_labels = Vec::new();
    let mut comp_names = Vec::new();
    for l in reg.label_ids() {
        for q in tuples(n, s_reg.rank(l)) {
            if s_reg.parent(l).is_none() && a.delta(l, &q) != a.accept {
                continue;
            }
            comp_names.push((annotated_name(&names[l.index()], &a.states, &q), s_reg.parent(l), s_reg.rank(l)));
            comp_labels.push((l, q));
        }
    }
    let cref: Vec<(&str, Option<usize>, usize)> = comp_names.iter().map(|(s, p, r)| (s.as_str(), *p, *r)).collect();
    let s_comp = Arc::new(TreeSignature::from_labels(k, &cref)?);
    let comp_index = comp_labels
        .iter()
        .enumerate()
        .map(|(i, (l, q))| ((*l, q.clone()), LabelId(i as u16)))
        .collect();

    let fish = Fishbones { mid: &s_mid, spine: &spine, end: &end };
    let mut h_patterns = Vec::new();
    for l in reg.label_ids() {
        let parent = s_reg.parent(l).map(|d| (d, n));
        let children = vec![0; s_reg.rank(l)];
        h_patterns.push((names[l.index()].clone(), fish.center(l, parent, &children)?));
    }
    let h = Homomorphism::new(reg.clone(), s_mid.sig.clone(), h_patterns)?;

    let mut g_patterns = Vec::new();
    for (i, (l, q)) in comp_labels.iter().enumerate() {
        let parent = s_reg.parent(*l).map(|d| (d, a.delta(*l, q)));
        let children: Vec<usize> = q.iter().map(|&qi| n - qi).collect();
        g_patterns.push((comp_names[i].0.clone(), fish.center(*l, parent, &children)?));
    }
    let g = Homomorphism::new(s_comp.sig.clone(), s_mid.sig.clone(), g_patterns)?;
    for hom in [&g, &h] {
        hom.ensure_valid()?;
    }
    Ok(CharacterizationBundle {
        automaton: a.clone(),
        s_reg,
        s_mid,
        s_comp,
        g,
        h,
        n,
        comp_labels,
        comp_index,
        spine,
        end,
    })
}

struct Fishbones<'a> {
    mid: &'a TreeSignature,
    spine: &'a [LabelId],
    end: &'a [LabelId],
}

impl Fishbones<'_> {
    /// Spine of `len` nodes along `+i`, the rest of each spine node's
    /// children being end leaves. Returns the spine.
    fn add(&self, b: &mut PatternBuilder, i: usize, len: usize, prefix: &str) -> Result<Vec<usize>, TreeError> {
        let mut spine = Vec::with_capacity(len);
        for s in 0..len {
            let v = b.add_node(format!("{prefix}{s}"), self.spine[i - 1])?;
            if let Some(&prev) = spine.last() {
                b.connect(prev, plus(i), v)?;
            }
            for j in (1..=self.mid.k).filter(|&j| j != i) {
                let leaf = b.add_node(format!("{prefix}{s}.{j}"), self.end[j - 1])?;
                b.connect(v, plus(j), leaf)?;
            }
            spine.push(v);
        }
        Ok(spine)
    }

    /// Center node labelled `l` (node 0), a parent-side fishbone of the
    /// given direction and length, and child fishbones of the given lengths.
    fn center(&self, l: LabelId, parent: Option<(usize, usize)>, children: &[usize]) -> Result<Pattern, TreeError> {
        let mut b = Pattern::builder(self.mid.sig.clone());
        let c = b.add_node("c", l)?;
        if let Some((d, len)) = parent {
            let spine = self.add(&mut b, d, len, "p")?;
            match (spine.first(), spine.last()) {
                (Some(&first), Some(&last)) => {
                    b.connect(last, plus(d), c)?;
                    b.port(minus(d), first);
                }
                _ => b.port(minus(d), c),
            }
        }
        for (i0, &len) in children.iter().enumerate() {
            let i = i0 + 1;
            let spine = self.add(&mut b, i, len, &format!("f{i}."))?;
            match (spine.first(), spine.last()) {
                (Some(&first), Some(&last)) => {
                    b.connect(c, plus(i), first)?;
                    b.port(plus(i), last);
                }
                _ => b.port(plus(i), c),
            }
        }
        Ok(b.build())
    }
}

/// A tree over the middle signature with fishbones contracted: every
/// center node together with the spine length above each child.
struct Contracted {
    label: LabelId,
    children: Vec<(usize, Contracted)>,
}

fn contract(bundle: &CharacterizationBundle, t: &Graph) -> Option<Contracted> {
    let mid = &bundle.s_mid;
    if **t.sig() != *mid.sig || !t.is_valid() {
        return None;
    }
    let is_spine = |l: LabelId| bundle.spine.contains(&l);
    let is_end = |l: LabelId| bundle.end.contains(&l);
    fn go(
        bundle: &CharacterizationBundle,
        t: &Graph,
        v: usize,
        is_spine: &dyn Fn(LabelId) -> bool,
        is_end: &dyn Fn(LabelId) -> bool,
    ) -> Option<Contracted> {
        let label = t.label(v);
        let mut children = Vec::new();
        for i in 1..=bundle.s_mid.rank(label) {
            let mut u = t.neighbor(v, plus(i))?;
            let mut len = 0;
            while is_spine(t.label(u)) {
                for j in (1..=bundle.s_mid.k).filter(|&j| j != i) {
                    if !is_end(t.label(t.neighbor(u, plus(j))?)) {
                        return None;
                    }
                }
                len += 1;
                u = t.neighbor(u, plus(i))?;
            }
            if is_end(t.label(u)) {
                return None;
            }
            children.push((len, go(bundle, t, u, is_spine, is_end)?));
        }
        Some(Contracted { label, children })
    }
    let root = t.initial();
    if is_spine(t.label(root)) || is_end(t.label(root)) {
        return None;
    }
    go(bundle, t, root, &is_spine, &is_end)
}

/// The unique tree over the annotated signature whose `g`-image is `t`.
pub fn decode_g(bundle: &CharacterizationBundle, t: &Graph) -> Option<Tree> {
    let c = contract(bundle, t)?;
    let n = bundle.n as i64;
    // Returns the decoded subtree and the length of its parent-side fishbone.
    fn go(bundle: &CharacterizationBundle, c: &Contracted, n: i64) -> Option<(Tree, i64)> {
        let base = c.label;
        let mut q = Vec::with_capacity(c.children.len());
        let mut children = Vec::with_capacity(c.children.len());
        for (len, sub) in &c.children {
            let (child, up) = go(bundle, sub, n)?;
            let down = *len as i64 - up;
            if !(1..=n).contains(&down) {
                return None;
            }
            q.push((n - down) as usize);
            children.push(child);
        }
        let label = bundle.comp_label(base, &q)?;
        let up = bundle.automaton.delta(base, &q) as i64;
        Some((Tree { label, children }, up))
    }
    go(bundle, &c, n).map(|(t, _)| t)
}

/// The unique tree over the original signature whose `h`-image is `t`.
pub fn decode_h(bundle: &CharacterizationBundle, t: &Graph) -> Option<Tree> {
    let c = contract(bundle, t)?;
    fn go(c: &Contracted, n: usize) -> Option<Tree> {
        let children = c
            .children
            .iter()
            .map(|(len, sub)| if *len == n { go(sub, n) } else { None })
            .collect::<Option<Vec<_>>>()?;
        Some(Tree { label: c.label, children })
    }
    go(&c, bundle.n)
}

/// Labels every node with its base label and the states of its children.
pub fn annotate(bundle: &CharacterizationBundle, t: &Tree) -> Result<Tree, TreeError> {
    let a = &bundle.automaton;
    if !eval_dta(a, t).1 {
        return Err(TreeError::NotAccepted);
    }
    fn go(bundle: &CharacterizationBundle, t: &Tree) -> (Tree, usize) {
        let (children, q): (Vec<Tree>, Vec<usize>) = t.children.iter().map(|c| go(bundle, c)).unzip();
        let label = bundle.comp_label(t.label, &q).expect("accepted tree has annotated labels");
        let state = bundle.automaton.delta(t.label, &q);
        (Tree { label, children }, state)
    }
    Ok(go(bundle, t).0)
}

/// Drops the state vectors.
pub fn strip(bundle: &CharacterizationBundle, t: &Tree) -> Tree {
    Tree {
        label: bundle.comp_labels[t.label.index()].0,
        children: t.children.iter().map(|c| strip(bundle, c)).collect(),
    }
}

pub fn apply_h(bundle: &CharacterizationBundle, t: &Tree) -> Graph {
    apply_unchecked(&bundle.h, &t.to_graph(&bundle.s_reg)).graph
}

pub fn apply_g(bundle: &CharacterizationBundle, t: &Tree) -> Graph {
    apply_unchecked(&bundle.g, &t.to_graph(&bundle.s_comp)).graph
}

/// Measured fishbone length and predicted length at every parent-child
/// edge of the `g`-image of an annotated tree, in pre-order of the child.
pub fn fishbone_lengths(bundle: &CharacterizationBundle, t: &Tree) -> Vec<(usize, usize)> {
    let src = t.to_graph(&bundle.s_comp);
    let img = apply_unchecked(&bundle.g, &src);
    let g = &img.graph;
    // Center of each source node: pattern node 0.
    let mut center = vec![usize::MAX; src.num_nodes()];
    for (v, &(s, p)) in img.origin.iter().enumerate() {
        if p == 0 {
            center[s] = v;
        }
    }
    let n = bundle.n;
    let mut out = Vec::new();
    for (v, &cv) in center.iter().enumerate() {
        let (_, q) = &bundle.comp_labels[src.label(v).index()];
        for (i0, &qi) in q.iter().enumerate() {
            let i = i0 + 1;
            let child = src.neighbor(v, plus(i)).expect("valid tree");
            let (cb, cq) = &bundle.comp_labels[src.label(child).index()];
            let predicted = n - qi + bundle.automaton.delta(*cb, cq);
            let mut u = g.neighbor(cv, plus(i)).expect("valid image");
            let mut measured = 0;
            while bundle.spine.contains(&g.label(u)) {
                measured += 1;
                u = g.neighbor(u, plus(i)).expect("valid image");
            }
            out.push((measured, predicted));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TreeCounterexample {
    pub check: String,
    pub tree: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CharacterizationReport {
    pub max_nodes: usize,
    pub states: usize,
    pub trees_checked: usize,
    pub trees_accepted: usize,
    pub annotated_checked: usize,
    pub annotated_valid: usize,
    pub edges_measured: usize,
    pub counterexamples: Vec<TreeCounterexample>,
}

impl CharacterizationReport {
    pub fn is_clean(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Exhaustive check over all trees of both signatures with at most
/// `max_nodes` nodes.
pub fn verify_characterization(
    bundle: &CharacterizationBundle,
    max_nodes: usize,
) -> Result<CharacterizationReport, TreeError> {
    let a = &bundle.automaton;
    let reg_sig = bundle.s_reg.sig.clone();
    let comp_sig = bundle.s_comp.sig.clone();
    let reg = enumerate_trees(&bundle.s_reg, max_nodes);
    let comp = enumerate_trees(&bundle.s_comp, max_nodes);
    let cx = |check: &str, t: &Tree, sig: &Signature| TreeCounterexample {
        check: check.to_string(),
        tree: t.display(sig).to_string(),
    };

    let reg_results: Vec<(bool, Vec<TreeCounterexample>)> = reg
        .par_iter()
        .map(|t| {
            let mut bad = Vec::new();
            let accepted = eval_dta(a, t).1;
            let image = apply_h(bundle, t);
            if !is_tree(&image) {
                bad.push(cx("h image is a tree", t, &reg_sig));
            }
            if image.num_nodes() != t.size() + (t.size() - 1) * bundle.n * bundle.s_reg.k {
                bad.push(cx("h image node count", t, &reg_sig));
            }
            if decode_h(bundle, &image).as_ref() != Some(t) {
                bad.push(cx("decode_h inverts h", t, &reg_sig));
            }
            if decode_g(bundle, &image).is_some() != accepted {
                bad.push(cx("accepted iff h image is a g image", t, &reg_sig));
            }
            if accepted {
                match annotate(bundle, t) {
                    Ok(ann) => {
                        if strip(bundle, &ann) != *t {
                            bad.push(cx("annotation projects back", t, &reg_sig));
                        }
                        let same = canonical_encode(&apply_g(bundle, &ann)).ok() == canonical_encode(&image).ok();
                        if !same {
                            bad.push(cx("g of annotation equals h image", t, &reg_sig));
                        }
                    }
                    Err(_) => bad.push(cx("accepted tree has an annotation", t, &reg_sig)),
                }
            }
            (accepted, bad)
        })
        .collect();

    let comp_results: Vec<(bool, usize, Vec<TreeCounterexample>)> = comp
        .par_iter()
        .map(|t| {
            let mut bad = Vec::new();
            let image = apply_g(bundle, t);
            if !is_tree(&image) {
                bad.push(cx("g image is a tree", t, &comp_sig));
            }
            if decode_g(bundle, &image).as_ref() != Some(t) {
                bad.push(cx("decode_g inverts g", t, &comp_sig));
            }
            let valid = match decode_h(bundle, &image) {
                Some(base) => annotate(bundle, &base).ok().as_ref() == Some(t),
                None => false,
            };
            let consistent = is_consistent(bundle, t);
            if decode_h(bundle, &image).is_some() != valid || valid != consistent {
                bad.push(cx("h preimage exists iff the annotation is a run", t, &comp_sig));
            }
            let lengths = fishbone_lengths(bundle, t);
            if lengths.iter().any(|(m, p)| m != p) {
                bad.push(cx("fishbone length law", t, &comp_sig));
            }
            if consistent != lengths.iter().all(|&(m, _)| m == bundle.n) {
                bad.push(cx("all fishbones have length n iff consistent", t, &comp_sig));
            }
            (valid, lengths.len(), bad)
        })
        .collect();

    let mut rep = CharacterizationReport {
        max_nodes,
        states: bundle.n,
        trees_checked: reg.len(),
        annotated_checked: comp.len(),
        ..Default::default()
    };
    for (acc, bad) in reg_results {
        rep.trees_accepted += acc as usize;
        rep.counterexamples.extend(bad);
    }
    for (valid, edges, bad) in comp_results {
        rep.annotated_valid += valid as usize;
        rep.edges_measured += edges;
        rep.counterexamples.extend(bad);
    }
    Ok(rep)
}

/// Every node's state vector matches the states computed at its children.
pub fn is_consistent(bundle: &CharacterizationBundle, t: &Tree) -> bool {
    fn go(b: &CharacterizationBundle, t: &Tree) -> Option<usize> {
        let (base, q) = &b.comp_labels[t.label.index()];
        for (c, &qi) in t.children.iter().zip(q) {
            if go(b, c)? != qi {
                return None;
            }
        }
        Some(b.automaton.delta(*base, q))
    }
    go(bundle, t).is_some()
}

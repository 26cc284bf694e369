//! Generators for the lower-bound witness families.
//!
//! Direction names: `+a -a +b -b` followed by further pairs `+c -c`,
//! `+e -e`, ... and, when the direction count is odd, one self-opposite
//! direction `o`.
//!
//! The gadget `H` here is the diode-free two-chain graph: two chains along
//! `a` joined by `b`-bridges at two columns, every other chain node carrying
//! a `b` self-loop. An automaton can leave it from the initial node, but
//! nothing in this construction makes re-entry hard, so the
//! indistinguishability of `H_start` and `H_fake` is only probed
//! empirically (see [`exhaustive_probe`]), never certified.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::engine::{cell_options, run, Action, EngineError, WalkingAutomaton};
use crate::graph::{Graph, GraphBuilder, GraphError};
use crate::hom::{
    apply, simulate_unchecked, HomError, Homomorphism, Pattern, PatternBuilder, PatternEntry, PatternResult,
};
use crate::signature::{DirId, LabelId, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("{0}")]
    Bounds(String),
    #[error("no cyclic order of {0} directions avoids opposites at distance one and two")]
    NoCyclicOrder(usize),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Hom(#[from] HomError),
    #[error(transparent)]
    Engine(#[from] EngineError),
}

fn bounds(ok: bool, msg: impl FnOnce() -> String) -> Result<(), WitnessError> {
    if ok {
        Ok(())
    } else {
        Err(WitnessError::Bounds(msg()))
    }
}

/// Cyclic order of all directions with `-d` never one or two places after `d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicOrder {
    seq: Vec<DirId>,
    next: Vec<DirId>,
    prev: Vec<DirId>,
}

impl CyclicOrder {
    pub fn sequence(&self) -> &[DirId] {
        &self.seq
    }

    pub fn next(&self, d: DirId) -> DirId {
        self.next[d.index()]
    }

    pub fn prev(&self, d: DirId) -> DirId {
        self.prev[d.index()]
    }

    /// True when `-d` is neither `next(d)` nor `next(next(d))` for all `d`.
    pub fn satisfies(&self, sig: &Signature) -> bool {
        sig.dir_ids().all(|d| {
            let o = sig.opposite(d);
            o != self.next(d) && o != self.next(self.next(d))
        })
    }
}

/// First order found by lexicographic backtracking, with the first
/// direction fixed in front. Refused below nine directions.
pub fn make_cyclic_order(sig: &Signature) -> Result<CyclicOrder, WitnessError> {
    let k = sig.num_directions();
    bounds(k >= 9, || {
        format!("cyclic order needs at least 9 directions, got {k}; smaller counts may admit none")
    })?;
    search_cyclic_order(sig).ok_or(WitnessError::NoCyclicOrder(k))
}

/// The backtracking search itself, without the lower bound on `k`.
pub fn search_cyclic_order(sig: &Signature) -> Option<CyclicOrder> {
    let k = sig.num_directions();
    if k < 3 {
        return None;
    }
    let mut seq = vec![DirId(0)];
    let mut used = vec![false; k];
    used[0] = true;
    fn ok_after(sig: &Signature, seq: &[DirId], x: DirId) -> bool {
        let n = seq.len();
        let bad = |d: DirId| sig.opposite(d) == x;
        !(bad(seq[n - 1]) || (n >= 2 && bad(seq[n - 2])))
    }
    fn go(sig: &Signature, seq: &mut Vec<DirId>, used: &mut [bool]) -> bool {
        let k = used.len();
        if seq.len() == k {
            // Wrap-around: the last two precede seq[0], the last precedes seq[1].
            let o = |d: DirId| sig.opposite(d);
            let (l1, l2) = (seq[k - 1], seq[k - 2]);
            return o(l1) != seq[0] && o(l1) != seq[1] && o(l2) != seq[0];
        }
        for x in 0..k {
            if used[x] || !ok_after(sig, seq, DirId(x as u16)) {
                continue;
            }
            used[x] = true;
            seq.push(DirId(x as u16));
            if go(sig, seq, used) {
                return true;
            }
            seq.pop();
            used[x] = false;
        }
        false
    }
    if !go(sig, &mut seq, &mut used) {
        return None;
    }
    let mut next = vec![DirId(0); k];
    let mut prev = vec![DirId(0); k];
    for i in 0..k {
        let (d, e) = (seq[i], seq[(i + 1) % k]);
        next[d.index()] = e;
        prev[e.index()] = d;
    }
    let order = CyclicOrder { seq, next, prev };
    debug_assert!(order.satisfies(sig));
    Some(order)
}

/// Direction names for a signature with `k` directions.
pub fn direction_names(k: usize) -> Vec<(String, String)> {
    const LETTERS: &str = "abcefghijklmnpqrstuvwxyz";
    let mut out = Vec::with_capacity(k);
    for ch in LETTERS.chars().take(k / 2) {
        out.push((format!("+{ch}"), format!("-{ch}")));
        out.push((format!("-{ch}"), format!("+{ch}")));
    }
    if k % 2 == 1 {
        out.push(("o".to_string(), "o".to_string()));
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum HVariant {
    Start,
    Fake,
}

/// Shape of the two-chain gadget: chain length and the two bridge columns.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HShape {
    pub chain_len: usize,
    pub left_bridge: usize,
    pub right_bridge: usize,
}

impl HShape {
    /// Chains of length `2n`, bridges at columns `n - 1` and `2n - 1`.
    pub fn standard(n: usize) -> Self {
        HShape {
            chain_len: 2 * n,
            left_bridge: n - 1,
            right_bridge: 2 * n - 1,
        }
    }
}

/// A fragment with a single external edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PluggableSubgraph {
    pub pattern: Pattern,
    pub has_initial: bool,
}

impl PluggableSubgraph {
    pub fn port_dir(&self) -> DirId {
        *self.pattern.ports().keys().next().expect("one port")
    }

    pub fn port_node(&self) -> usize {
        *self.pattern.ports().values().next().expect("one port")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Level {
    Start,
    Lemma,
    Theorem,
}

/// Signature and builders for one direction count `k`.
#[derive(Clone, Debug)]
pub struct Witnesses {
    sig: Arc<Signature>,
    level: Level,
    order: Option<CyclicOrder>,
    pa: DirId,
    na: DirId,
    pb: DirId,
    nb: DirId,
}

impl Witnesses {
    /// Only the gadget labels `start end_l mid end_r`.
    pub fn gadget(k: usize) -> Result<Self, WitnessError> {
        Self::build(k, Level::Start)
    }

    /// Gadget labels plus the chain labels used by the `F` subgraphs.
    pub fn lemma(k: usize) -> Result<Self, WitnessError> {
        Self::build(k, Level::Lemma)
    }

    /// Full signature for the counter and probe graphs; needs `k >= 9`.
    pub fn theorem2(k: usize) -> Result<Self, WitnessError> {
        Self::build(k, Level::Theorem)
    }

    fn build(k: usize, level: Level) -> Result<Self, WitnessError> {
        bounds(k >= 4, || format!("witness signatures need at least 4 directions, got {k}"))?;
        if level == Level::Theorem {
            bounds(k >= 9, || format!("the counter construction needs k >= 9, got {k}"))?;
        }
        let dirs = direction_names(k);
        let dir_only = Signature::from_parts(&dirs, &[])?;
        let names: Vec<String> = dirs.iter().map(|d| d.0.clone()).collect();
        let neg = |d: &str| -> String { dir_only.dir_name(dir_only.opposite(dir_only.dir(d).unwrap())).to_string() };
        let order = if level == Level::Theorem {
            Some(make_cyclic_order(&dir_only)?)
        } else {
            None
        };
        let mut labels: Vec<(String, bool, Vec<String>)> = Vec::new();
        let mut lab = |name: String, initial: bool, ds: &[&str]| {
            labels.push((name, initial, ds.iter().map(|s| s.to_string()).collect()));
        };
        lab("start".into(), true, &["+a", "+b", "-b"]);
        lab("end_l".into(), false, &["+a", "+b", "-b"]);
        lab("mid".into(), false, &["+a", "-a", "+b", "-b"]);
        lab("end_r".into(), false, &["-a", "+b", "-b"]);
        if level != Level::Start {
            lab("c_st".into(), false, &["-a", "+b"]);
            lab("c'".into(), false, &["-a", "-b", "+b"]);
            lab("go'_a".into(), false, &["-a", "-b", "+a"]);
            lab("go'_b".into(), false, &["-a", "-b", "+b"]);
            for d in &names {
                if d == "-a" {
                    lab("go[-a]".into(), false, &["-b", "-a"]);
                } else {
                    lab(format!("go[{d}]"), false, &["-a", d]);
                }
            }
        }
        if let (Level::Theorem, Some(ord)) = (level, &order) {
            for d in &names {
                if d == "-a" {
                    continue;
                }
                let nd = neg(d);
                lab(format!("go[{nd},+a]"), false, &[&nd, "+a"]);
            }
            lab("go[+a,+b]".into(), false, &["+a", "+b"]);
            lab("c_-".into(), false, &["-a", "+a"]);
            lab("q0?".into(), false, &["-a"]);
            let all: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
            for d in &names {
                lab(format!("?[{d}]"), false, &all);
            }
            for d in dir_only.dir_ids() {
                let nx = ord.next(d);
                let ds = [
                    dir_only.dir_name(dir_only.opposite(d)).to_string(),
                    dir_only.dir_name(dir_only.opposite(nx)).to_string(),
                    dir_only.dir_name(ord.next(nx)).to_string(),
                ];
                let dn = dir_only.dir_name(d);
                let refs: Vec<&str> = ds.iter().map(|s| s.as_str()).collect();
                lab(format!("acc[{dn}]"), false, &refs);
                lab(format!("rej[{dn}]"), false, &refs);
            }
        }
        let sig = Arc::new(Signature::from_parts(&dirs, &labels)?);
        Ok(Witnesses {
            pa: sig.dir("+a")?,
            na: sig.dir("-a")?,
            pb: sig.dir("+b")?,
            nb: sig.dir("-b")?,
            sig,
            level,
            order,
        })
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn k(&self) -> usize {
        self.sig.num_directions()
    }

    pub fn cyclic_order(&self) -> Option<&CyclicOrder> {
        self.order.as_ref()
    }

    fn l(&self, name: &str) -> LabelId {
        self.sig.label_id(name).expect("witness label")
    }

    fn need(&self, level: Level) -> Result<(), WitnessError> {
        let ok = match level {
            Level::Start => true,
            Level::Lemma => self.level != Level::Start,
            Level::Theorem => self.level == Level::Theorem,
        };
        bounds(ok, || "signature lacks the labels for this construction".into())
    }

    pub fn build_h(&self, n: usize, variant: HVariant) -> Result<PluggableSubgraph, WitnessError> {
        bounds(n >= 2, || format!("H needs n >= 2, got {n}"))?;
        self.build_h_shaped(variant, HShape::standard(n))
    }

    /// Lower chain `lo0..`, upper chain `up0..`; the initial node is `lo0`
    /// and the external edge leaves `up{L-1}` in direction `+a`.
    pub fn build_h_shaped(&self, variant: HVariant, shape: HShape) -> Result<PluggableSubgraph, WitnessError> {
        let len = shape.chain_len;
        bounds(
            len >= 2 && shape.left_bridge < shape.right_bridge && shape.right_bridge < len,
            || format!("bad chain shape {shape:?}"),
        )?;
        let mut b = Pattern::builder(self.sig.clone());
        let mut lo = Vec::with_capacity(len);
        let mut up = Vec::with_capacity(len);
        for c in 0..len {
            let lower = match c {
                0 if variant == HVariant::Start => "start",
                0 => "end_l",
                c if c == len - 1 => "end_r",
                _ => "mid",
            };
            lo.push(b.add_node(format!("lo{c}"), self.l(lower))?);
        }
        for c in 0..len {
            let upper = if c == 0 { "end_l" } else { "mid" };
            up.push(b.add_node(format!("up{c}"), self.l(upper))?);
        }
        for c in 0..len - 1 {
            b.connect(lo[c], self.pa, lo[c + 1])?;
            b.connect(up[c], self.pa, up[c + 1])?;
        }
        for c in 0..len {
            if c == shape.left_bridge || c == shape.right_bridge {
                b.connect(lo[c], self.pb, up[c])?;
                b.connect(lo[c], self.nb, up[c])?;
            } else {
                b.connect(lo[c], self.pb, lo[c])?;
                b.connect(up[c], self.pb, up[c])?;
            }
        }
        b.port(self.pa, up[len - 1]);
        Ok(PluggableSubgraph {
            pattern: b.build(),
            has_initial: variant == HVariant::Start,
        })
    }

    /// States `q0..q{n-1}`, initial `q0`. From the initial node of `H` it
    /// counts `n - 1` moves along `+a` to the left bridge, crosses it in
    /// `q{n-1}` and runs along `+a` to the port. On the `F` chain it
    /// decrements at `c_st`/`c'` and keeps its state at the `go` labels.
    pub fn escape_automaton(&self, n: usize) -> Result<WalkingAutomaton, WitnessError> {
        bounds(n >= 2, || format!("escape automaton needs n >= 2, got {n}"))?;
        let mut a = WalkingAutomaton::with_indexed_states(self.sig.clone(), n)?;
        let (start, mid) = (self.l("start"), self.l("mid"));
        a.set_move(0, start, 0, self.pa)?;
        for m in 0..n - 2 {
            a.set_move(m, mid, m + 1, self.pa)?;
        }
        a.set_move(n - 2, mid, n - 1, self.pb)?;
        a.set_move(n - 1, mid, n - 1, self.pa)?;
        if self.level != Level::Start {
            for m in 1..n {
                a.set_move(m, self.l("c_st"), m - 1, self.pb)?;
                a.set_move(m, self.l("c'"), m - 1, self.pb)?;
            }
            for q in 0..n {
                a.set_move(q, self.l("go'_a"), q, self.pa)?;
                a.set_move(q, self.l("go'_b"), q, self.pb)?;
                for d in self.sig.dir_ids() {
                    let name = format!("go[{}]", self.sig.dir_name(d));
                    a.set_move(q, self.l(&name), q, d)?;
                }
            }
        }
        Ok(a)
    }

    /// Chain `u0..u{n-1}, u_go` with `H_start` (at `u_i`) or `H_fake`
    /// hanging off every `u_j` along `-a`; the external edge leaves `u_go`
    /// in direction `d`. `i = None` gives the variant with no initial node.
    pub fn build_f(&self, n: usize, d: DirId, i: Option<usize>) -> Result<PluggableSubgraph, WitnessError> {
        self.need(Level::Lemma)?;
        bounds(n >= 2, || format!("F needs n >= 2, got {n}"))?;
        bounds(i.is_none_or(|i| i < n), || format!("position {i:?} out of range for n = {n}"))?;
        let minus_a = d == self.na;
        let mut b = Pattern::builder(self.sig.clone());
        let mut u = Vec::with_capacity(n + 1);
        for j in 0..n {
            let label = match j {
                0 => "c_st",
                j if j == n - 1 && minus_a => "go'_b",
                j if j == n - 1 => "go'_a",
                _ => "c'",
            };
            u.push(b.add_node(format!("u{j}"), self.l(label))?);
        }
        let go = format!("go[{}]", self.sig.dir_name(d));
        let ugo = b.add_node("u_go", self.l(&go))?;
        for j in 0..n - 1 {
            b.connect(u[j], self.pb, u[j + 1])?;
        }
        b.connect(u[n - 1], if minus_a { self.pb } else { self.pa }, ugo)?;
        let start = self.build_h(n, HVariant::Start)?;
        let fake = self.build_h(n, HVariant::Fake)?;
        for (j, &uj) in u.iter().take(n).enumerate() {
            let h = if Some(j) == i { &start } else { &fake };
            let off = b.embed(h.pattern.body(), &format!("h{j}/"))?;
            b.connect(uj, self.na, off + h.port_node())?;
        }
        b.port(d, ugo);
        Ok(PluggableSubgraph {
            pattern: b.build(),
            has_initial: i.is_some(),
        })
    }

    /// Identity on every label except `?[d]`, which becomes the ring of
    /// nodes `v_e` (label `acc[d]` at `e = d`, else `rej[e]`), with
    /// `v_e + next(next(e)) = v_next(e)` and the external edge `-e` at `v_e`.
    pub fn theorem2_hom(&self) -> Result<Homomorphism, WitnessError> {
        self.need(Level::Theorem)?;
        let sig = &self.sig;
        let ord = self.order.as_ref().expect("theorem signature has an order");
        let mut patterns = Vec::new();
        for l in sig.label_ids() {
            let name = sig.label_name(l).to_string();
            let Some(dn) = name.strip_prefix("?[").and_then(|s| s.strip_suffix(']')) else {
                patterns.push((name.clone(), Pattern::single(sig.clone(), l)));
                continue;
            };
            let target = sig.dir(dn)?;
            let mut b: PatternBuilder = Pattern::builder(sig.clone());
            let mut node = BTreeMap::new();
            for e in sig.dir_ids() {
                let en = sig.dir_name(e);
                let lab = if e == target { format!("acc[{en}]") } else { format!("rej[{en}]") };
                node.insert(e, b.add_node(format!("v[{en}]"), self.l(&lab))?);
            }
            for e in sig.dir_ids() {
                let nx = ord.next(e);
                b.connect(node[&e], ord.next(nx), node[&nx])?;
                b.port(sig.opposite(e), node[&e]);
            }
            patterns.push((name, b.build()));
        }
        Ok(Homomorphism::new(sig.clone(), sig.clone(), patterns)?)
    }

    fn start_graph(&self, n: usize, i: usize, d: DirId) -> Result<(GraphBuilder, usize, usize), WitnessError> {
        let f = self.build_f(n, d, Some(i))?;
        let mut g = Graph::builder(self.sig.clone());
        let off = g.embed(f.pattern.body(), "F/")?;
        let init = f.pattern.initial_node().expect("F_i has an initial node");
        g.set_initial(off + init);
        Ok((g, off + f.port_node(), off))
    }

    /// `F_{i,d}` followed by `w_go1, w_go2, w_1..w_j, w_end`.
    pub fn g_counter(&self, n: usize, i: usize, j: usize, d: DirId) -> Result<Graph, WitnessError> {
        self.need(Level::Theorem)?;
        bounds(i < n && j < n, || format!("need 0 <= i, j < n = {n}; got i = {i}, j = {j}"))?;
        let (mut g, ugo, _) = self.start_graph(n, i, d)?;
        let (l1, l2, link) = if d == self.na {
            ("go[+a,+b]".to_string(), "go[-b,+a]".to_string(), self.pb)
        } else {
            let nd = self.sig.dir_name(self.sig.opposite(d)).to_string();
            (format!("go[{nd},+a]"), "go[-a,+a]".to_string(), self.pa)
        };
        let w1 = g.add_node("w_go1", self.l(&l1))?;
        let w2 = g.add_node("w_go2", self.l(&l2))?;
        g.connect(ugo, d, w1)?;
        g.connect(w1, link, w2)?;
        let mut prev = w2;
        for t in 1..=j {
            let w = g.add_node(format!("w{t}"), self.l("c_-"))?;
            g.connect(prev, self.pa, w)?;
            prev = w;
        }
        let end = g.add_node("w_end", self.l("q0?"))?;
        g.connect(prev, self.pa, end)?;
        Ok(g.build()?)
    }

    /// `F_{i,d}` and `F_e` for every `e != d`, all joined at one node `?[d2]`.
    pub fn g_probe(&self, n: usize, i: usize, d: DirId, d2: DirId) -> Result<Graph, WitnessError> {
        self.need(Level::Theorem)?;
        bounds(i < n, || format!("need 0 <= i < n = {n}; got {i}"))?;
        let (mut g, ugo, _) = self.start_graph(n, i, d)?;
        let center = g.add_node("v", self.l(&format!("?[{}]", self.sig.dir_name(d2))))?;
        g.connect(ugo, d, center)?;
        for e in self.sig.dir_ids() {
            if e == d {
                continue;
            }
            let f = self.build_f(n, e, None)?;
            let off = g.embed(f.pattern.body(), &format!("F{}/", self.sig.dir_name(e)))?;
            g.connect(off + f.port_node(), e, center)?;
        }
        Ok(g.build()?)
    }

    /// The escape automaton extended to the counter and ring labels.
    pub fn counter_automaton(&self, n: usize) -> Result<WalkingAutomaton, WitnessError> {
        self.need(Level::Theorem)?;
        bounds(n >= 4, || format!("counter automaton needs n >= 4, got {n}"))?;
        let mut a = self.escape_automaton(n)?;
        let sig = self.sig.clone();
        for l in sig.label_ids() {
            let name = sig.label_name(l);
            for q in 0..n {
                if name.starts_with("go[") && name.contains(',') {
                    let d2 = *sig.label(l).dirs.iter().find(|&&x| {
                        name.ends_with(&format!(",{}]", sig.dir_name(x)))
                    }).expect("second direction");
                    a.set_move(q, l, q, d2)?;
                } else if name == "c_-" && q > 0 {
                    a.set_move(q, l, q - 1, self.pa)?;
                } else if (name == "q0?" && q == 0) || name.starts_with("acc[") {
                    a.set_accept(q, l);
                }
            }
        }
        Ok(a)
    }

    /// Acceptance tables of the counter automaton over the images of all
    /// counter graphs and probe graphs.
    pub fn sweep(&self, n: usize) -> Result<SweepReport, WitnessError> {
        let a = self.counter_automaton(n)?;
        let h = self.theorem2_hom()?;
        let sig = &self.sig;
        let mut counter = Vec::new();
        let mut probe = Vec::new();
        let mut within_step_bound = true;
        for d in sig.dir_ids() {
            for i in 0..n {
                for j in 0..n {
                    let img = apply(&h, &self.g_counter(n, i, j, d)?)?;
                    let out = run(&a, &img.graph)?;
                    within_step_bound &= out.steps() <= n * img.graph.num_nodes() + 1;
                    counter.push(CounterRow {
                        d: sig.dir_name(d).into(),
                        i,
                        j,
                        accepted: out.is_accept(),
                        expected: i == j,
                    });
                }
            }
        }
        for i in 0..n {
            for d in sig.dir_ids() {
                for d2 in sig.dir_ids() {
                    let img = apply(&h, &self.g_probe(n, i, d, d2)?)?;
                    let out = run(&a, &img.graph)?;
                    within_step_bound &= out.steps() <= n * img.graph.num_nodes() + 1;
                    probe.push(ProbeRow {
                        i,
                        d: sig.dir_name(d).into(),
                        d2: sig.dir_name(d2).into(),
                        accepted: out.is_accept(),
                        expected: d == d2,
                    });
                }
            }
        }
        Ok(SweepReport {
            n,
            k: self.k(),
            counter,
            probe,
            within_step_bound,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterRow {
    pub d: String,
    pub i: usize,
    pub j: usize,
    pub accepted: bool,
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ProbeRow {
    pub i: usize,
    pub d: String,
    pub d2: String,
    pub accepted: bool,
    pub expected: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub n: usize,
    pub k: usize,
    pub counter: Vec<CounterRow>,
    pub probe: Vec<ProbeRow>,
    pub within_step_bound: bool,
}

impl SweepReport {
    pub fn counter_mismatches(&self) -> usize {
        self.counter.iter().filter(|r| r.accepted != r.expected).count()
    }

    pub fn probe_mismatches(&self) -> usize {
        self.probe.iter().filter(|r| r.accepted != r.expected).count()
    }
}

/// One entry state under which an automaton tells the two fragments apart.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distinguisher {
    pub entry_state: usize,
    pub left: String,
    pub right: String,
    /// Cells the two simulations consulted, as `(state, label, action)`.
    pub cells: Vec<(usize, String, String)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ProbeReport {
    pub num_states: usize,
    /// Automata covered, counting every completion of unconsulted cells.
    /// Both counts serialize as decimal strings.
    #[serde(serialize_with = "decimal")]
    pub automata: u128,
    #[serde(serialize_with = "decimal")]
    pub distinguishing: u128,
    /// Up to [`ProbeReport::MAX_EXAMPLES`] distinguishers, in search order.
    pub examples: Vec<Distinguisher>,
}

impl ProbeReport {
    pub const MAX_EXAMPLES: usize = 8;
}

fn decimal<S: serde::Serializer>(x: &u128, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(x)
}

impl fmt::Display for PatternResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternResult::AcceptInside => write!(f, "accept"),
            PatternResult::RejectInside => write!(f, "reject"),
            PatternResult::LoopInside => write!(f, "loop"),
            PatternResult::Exit { state, dir } => write!(f, "exit(q{state},#{})", dir.0),
        }
    }
}

fn entry_for(p: &PluggableSubgraph, state: usize) -> PatternEntry {
    PatternEntry::Enter {
        state,
        dir: p.pattern.sig().opposite(p.port_dir()),
    }
}

/// Compares the two fragments under every automaton of the stream, for every
/// entry state, entering through the port.
pub fn distinguishability_probe(
    left: &PluggableSubgraph,
    right: &PluggableSubgraph,
    automata: impl Iterator<Item = WalkingAutomaton>,
) -> Result<ProbeReport, WitnessError> {
    bounds(left.port_dir() == right.port_dir(), || "fragments have different port directions".into())?;
    let mut rep = ProbeReport::default();
    for a in automata {
        rep.num_states = a.num_states();
        rep.automata += 1;
        let mut found = false;
        for q in 0..a.num_states() {
            let l = simulate_unchecked(&a, &left.pattern, entry_for(left, q))?.result;
            let r = simulate_unchecked(&a, &right.pattern, entry_for(right, q))?.result;
            if l != r {
                if !found && rep.examples.len() < ProbeReport::MAX_EXAMPLES {
                    rep.examples.push(Distinguisher {
                        entry_state: q,
                        left: l.to_string(),
                        right: r.to_string(),
                        cells: Vec::new(),
                    });
                }
                found = true;
            }
        }
        rep.distinguishing += found as u128;
    }
    Ok(rep)
}

/// Equivalent to [`distinguishability_probe`] over every automaton with
/// `num_states` states, but only branches on cells that the simulations
/// actually consult; each leaf stands for all completions of the rest.
pub fn exhaustive_probe(
    left: &PluggableSubgraph,
    right: &PluggableSubgraph,
    num_states: usize,
) -> Result<ProbeReport, WitnessError> {
    bounds(left.port_dir() == right.port_dir(), || "fragments have different port directions".into())?;
    bounds(num_states >= 1, || "need at least one state".into())?;
    let sig = left.pattern.sig().clone();
    let nl = sig.num_labels();
    let options: Vec<Vec<Action>> = (0..num_states)
        .flat_map(|_| sig.label_ids().map(|a| cell_options(&sig, num_states, a)).collect::<Vec<_>>())
        .collect();
    let mut search = LazySearch {
        left,
        right,
        sig: sig.clone(),
        nq: num_states,
        nl,
        options,
        table: vec![None; num_states * nl],
        report: ProbeReport {
            num_states,
            ..Default::default()
        },
    };
    search.explore()?;
    Ok(search.report)
}

struct LazySearch<'a> {
    left: &'a PluggableSubgraph,
    right: &'a PluggableSubgraph,
    sig: Arc<Signature>,
    nq: usize,
    nl: usize,
    options: Vec<Vec<Action>>,
    table: Vec<Option<Action>>,
    report: ProbeReport,
}

enum Sim {
    Done(PatternResult),
    Needs(usize),
}

impl LazySearch<'_> {
    fn simulate(&self, p: &PluggableSubgraph, state: usize) -> Sim {
        let body = p.pattern.body();
        let mut q = state;
        let mut v = p.port_node();
        let mut seen = vec![false; self.nq * body.num_nodes()];
        loop {
            if std::mem::replace(&mut seen[v * self.nq + q], true) {
                return Sim::Done(PatternResult::LoopInside);
            }
            let cell = q * self.nl + body.label(v).index();
            match self.table[cell] {
                None => return Sim::Needs(cell),
                Some(Action::Accept) => return Sim::Done(PatternResult::AcceptInside),
                Some(Action::Halt) => return Sim::Done(PatternResult::RejectInside),
                Some(Action::Move { next, dir }) => match body.neighbor(v, dir) {
                    Some(u) => {
                        q = next as usize;
                        v = u;
                    }
                    None => {
                        return Sim::Done(PatternResult::Exit {
                            state: next as usize,
                            dir,
                        })
                    }
                },
            }
        }
    }

    fn explore(&mut self) -> Result<(), WitnessError> {
        let mut results = Vec::with_capacity(2 * self.nq);
        for q in 0..self.nq {
            for p in [self.left, self.right] {
                match self.simulate(p, q) {
                    Sim::Done(r) => results.push(r),
                    Sim::Needs(cell) => {
                        for o in 0..self.options[cell].len() {
                            self.table[cell] = Some(self.options[cell][o]);
                            self.explore()?;
                        }
                        self.table[cell] = None;
                        return Ok(());
                    }
                }
            }
        }
        let weight: u128 = self
            .table
            .iter()
            .zip(&self.options)
            .filter(|(t, _)| t.is_none())
            .fold(1u128, |acc, (_, o)| acc.saturating_mul(o.len() as u128));
        self.report.automata += weight;
        let first = (0..self.nq).find(|&q| results[2 * q] != results[2 * q + 1]);
        if let Some(q) = first {
            self.report.distinguishing += weight;
            if self.report.examples.len() < ProbeReport::MAX_EXAMPLES {
                let cells = self
                    .table
                    .iter()
                    .enumerate()
                    .filter_map(|(c, t)| t.map(|a| (c, a)))
                    .map(|(c, a)| {
                        let (state, label) = (c / self.nl, LabelId((c % self.nl) as u16));
                        let act = match a {
                            Action::Accept => "accept".to_string(),
                            Action::Halt => "halt".to_string(),
                            Action::Move { next, dir } => format!("q{next},{}", self.sig.dir_name(dir)),
                        };
                        (state, self.sig.label_name(label).to_string(), act)
                    })
                    .collect();
                self.report.examples.push(Distinguisher {
                    entry_state: q,
                    left: results[2 * q].to_string(),
                    right: results[2 * q + 1].to_string(),
                    cells,
                });
            }
        }
        Ok(())
    }
}

//! Node-replacement homomorphisms and the inverse-homomorphism construction.
//!
//! A homomorphism `h` maps every source label `a` to a connected pattern
//! `h(a)` over the target signature, with one dangling port per direction in
//! `D_a`. The image `h(G)` replaces each node by a fresh copy of its pattern
//! and joins ports along the edges of `G`.
//!
//! Port convention: an automaton that moves *in direction `d`* into a
//! pattern arrives at the port node for direction `-d`, because the edge it
//! crossed is attached to that node's `-d` slot.
//!
//! [`invert`] builds an automaton `B` over the source signature that tracks
//! the state of `A` and the direction in which `A` entered the current
//! node's pattern, so that `B` accepts `G` exactly when `A` accepts `h(G)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{self, walk, Configuration, EngineError, OutcomeKind, Step, WalkEnd, WalkingAutomaton};
use crate::graph::{Body, Graph, GraphBuilder, GraphError};
use crate::signature::{DirId, LabelId, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("no pattern for source label `{0}`")]
    MissingPattern(String),
    #[error("two patterns for source label `{0}`")]
    DuplicatePattern(String),
    #[error("invalid homomorphism: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("graph is not over the homomorphism's source signature")]
    SourceMismatch,
    #[error("automaton is not over the homomorphism's target signature")]
    TargetMismatch,
    #[error("entry lands on direction `{0}`, which is not a port of the pattern")]
    NotAPort(String),
    #[error("pattern has no initial node to start from")]
    NoInitialNode,
    #[error("input graph is invalid: {0}")]
    InvalidGraph(String),
}

/// A connected fragment over the target signature with dangling ports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pattern {
    sig: Arc<Signature>,
    body: Body,
    ports: BTreeMap<DirId, usize>,
}

impl Pattern {
    pub fn builder(sig: Arc<Signature>) -> PatternBuilder {
        PatternBuilder {
            inner: GraphBuilder::new(sig),
            ports: BTreeMap::new(),
        }
    }

    pub fn from_parts(sig: Arc<Signature>, body: Body, ports: BTreeMap<DirId, usize>) -> Self {
        Pattern { sig, body, ports }
    }

    /// One node with label `label` whose every direction is a port.
    pub fn single(sig: Arc<Signature>, label: LabelId) -> Self {
        let mut body = Body::new(sig.num_directions());
        let name = sig.label_name(label).to_string();
        body.add_node(name, label);
        let ports = sig.label(label).dirs.iter().map(|&d| (d, 0)).collect();
        Pattern { sig, body, ports }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn body_mut(&mut self) -> &mut Body {
        &mut self.body
    }

    pub fn num_nodes(&self) -> usize {
        self.body.num_nodes()
    }

    pub fn ports(&self) -> &BTreeMap<DirId, usize> {
        &self.ports
    }

    pub fn port(&self, d: DirId) -> Option<usize> {
        self.ports.get(&d).copied()
    }

    /// Rewires a port to another node or direction.
    pub fn set_ports(&mut self, ports: BTreeMap<DirId, usize>) {
        self.ports = ports;
    }

    pub fn initial_nodes(&self) -> Vec<usize> {
        (0..self.num_nodes())
            .filter(|&v| self.sig.label(self.body.label(v)).initial)
            .collect()
    }

    pub fn initial_node(&self) -> Option<usize> {
        self.initial_nodes().first().copied()
    }

    /// Shape checks that do not depend on the source label.
    pub fn validate_shape(&self) -> Vec<PatternViolation> {
        let sig = &self.sig;
        let mut out = Vec::new();
        if self.num_nodes() == 0 {
            out.push(PatternViolation::Empty);
            return out;
        }
        if self.body.components().len() > 1 {
            out.push(PatternViolation::Disconnected);
        }
        for (&d, &w) in &self.ports {
            let node = self.body.id(w).to_string();
            let dir = sig.dir_name(d).to_string();
            if !sig.has_dir(self.body.label(w), d) {
                out.push(PatternViolation::PortNotInLabel { node, dir });
            } else if self.body.neighbor(w, d).is_some() {
                out.push(PatternViolation::PortSlotUsed { node, dir });
            }
        }
        for v in 0..self.num_nodes() {
            let lab = sig.label(self.body.label(v));
            for d in sig.dir_ids() {
                let is_port = self.ports.get(&d) == Some(&v);
                let node = || self.body.id(v).to_string();
                let dir = || sig.dir_name(d).to_string();
                match self.body.neighbor(v, d) {
                    None if lab.has_dir(d) && !is_port => {
                        out.push(PatternViolation::OpenSlot { node: node(), dir: dir() })
                    }
                    Some(_) if !lab.has_dir(d) => {
                        out.push(PatternViolation::UnexpectedEdge { node: node(), dir: dir() })
                    }
                    Some(u) if self.body.neighbor(u, sig.opposite(d)) != Some(v) => {
                        out.push(PatternViolation::Asymmetric { node: node(), dir: dir() })
                    }
                    _ => {}
                }
            }
        }
        if self.initial_nodes().len() > 1 {
            out.push(PatternViolation::SeveralInitialNodes);
        }
        out
    }
}

/// Builds a [`Pattern`] by name.
pub struct PatternBuilder {
    inner: GraphBuilder,
    ports: BTreeMap<DirId, usize>,
}

impl PatternBuilder {
    pub fn add_named(&mut self, id: impl Into<String>, label: &str) -> Result<usize, GraphError> {
        self.inner.add_named(id, label)
    }

    pub fn add_node(&mut self, id: impl Into<String>, label: LabelId) -> Result<usize, GraphError> {
        self.inner.add_node(id, label)
    }

    pub fn connect(&mut self, u: usize, d: DirId, v: usize) -> Result<(), GraphError> {
        self.inner.connect(u, d, v)
    }

    pub fn connect_named(&mut self, from: &str, dir: &str, to: &str) -> Result<(), GraphError> {
        self.inner.connect_named(from, dir, to)
    }

    pub fn embed(&mut self, body: &Body, prefix: &str) -> Result<usize, GraphError> {
        self.inner.embed(body, prefix)
    }

    pub fn port(&mut self, d: DirId, v: usize) {
        self.ports.insert(d, v);
    }

    pub fn port_named(&mut self, dir: &str, node: &str) -> Result<(), GraphError> {
        let d = self.inner.sig().dir(dir)?;
        let v = self.inner.node(node)?;
        self.ports.insert(d, v);
        Ok(())
    }

    pub fn node(&self, id: &str) -> Result<usize, GraphError> {
        self.inner.node(id)
    }

    pub fn build(self) -> Pattern {
        let sig = self.inner.sig().clone();
        Pattern {
            sig,
            body: self.inner.into_body(),
            ports: self.ports,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternViolation {
    Empty,
    Disconnected,
    PortNotInLabel { node: String, dir: String },
    PortSlotUsed { node: String, dir: String },
    OpenSlot { node: String, dir: String },
    UnexpectedEdge { node: String, dir: String },
    Asymmetric { node: String, dir: String },
    SeveralInitialNodes,
    InitialMismatch { label_initial: bool },
    PortSetMismatch { expected: Vec<String>, found: Vec<String> },
}

impl fmt::Display for PatternViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternViolation::Empty => write!(f, "pattern has no nodes"),
            PatternViolation::Disconnected => write!(f, "pattern is disconnected"),
            PatternViolation::PortNotInLabel { node, dir } => {
                write!(f, "port `{dir}` at node `{node}` is not a direction of its label")
            }
            PatternViolation::PortSlotUsed { node, dir } => {
                write!(f, "port `{dir}` at node `{node}` is also used by an internal edge")
            }
            PatternViolation::OpenSlot { node, dir } => {
                write!(f, "slot `{dir}` at node `{node}` is neither an edge nor a port")
            }
            PatternViolation::UnexpectedEdge { node, dir } => {
                write!(f, "edge `{dir}` at node `{node}` is not a direction of its label")
            }
            PatternViolation::Asymmetric { node, dir } => {
                write!(f, "asymmetric edge `{dir}` at node `{node}`")
            }
            PatternViolation::SeveralInitialNodes => write!(f, "pattern has several initial nodes"),
            PatternViolation::InitialMismatch { label_initial: true } => {
                write!(f, "pattern of an initial label has no initial node")
            }
            PatternViolation::InitialMismatch { label_initial: false } => {
                write!(f, "pattern of a non-initial label has an initial node")
            }
            PatternViolation::PortSetMismatch { expected, found } => write!(
                f,
                "ports {{{}}} differ from label directions {{{}}}",
                found.join(","),
                expected.join(",")
            ),
        }
    }
}

/// A violation located at a source label, or at the signature pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HomViolation {
    DirectionMissingInTarget { dir: String },
    OppositeMismatch { dir: String },
    Pattern { label: String, violation: PatternViolation },
}

impl fmt::Display for HomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HomViolation::DirectionMissingInTarget { dir } => {
                write!(f, "source direction `{dir}` is missing from the target signature")
            }
            HomViolation::OppositeMismatch { dir } => {
                write!(f, "direction `{dir}` has different opposites in source and target")
            }
            HomViolation::Pattern { label, violation } => write!(f, "pattern for `{label}`: {violation}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    source: Arc<Signature>,
    target: Arc<Signature>,
    patterns: Vec<Pattern>,
    /// Source direction to the target direction of the same name.
    dir_map: Vec<Option<DirId>>,
}

impl Homomorphism {
    /// `patterns` must name every source label exactly once.
    pub fn new(
        source: Arc<Signature>,
        target: Arc<Signature>,
        patterns: Vec<(String, Pattern)>,
    ) -> Result<Self, HomError> {
        let mut slots: Vec<Option<Pattern>> = vec![None; source.num_labels()];
        for (name, p) in patterns {
            let l = source.label_id(&name)?;
            if slots[l.index()].is_some() {
                return Err(HomError::DuplicatePattern(name));
            }
            slots[l.index()] = Some(p);
        }
        let mut out = Vec::with_capacity(slots.len());
        for (i, p) in slots.into_iter().enumerate() {
            out.push(p.ok_or_else(|| HomError::MissingPattern(source.label_name(LabelId(i as u16)).into()))?);
        }
        let dir_map = source
            .directions()
            .iter()
            .map(|d| target.dir(&d.name).ok())
            .collect();
        Ok(Homomorphism {
            source,
            target,
            patterns: out,
            dir_map,
        })
    }

    /// Maps every label to a single node with the same label.
    pub fn identity(sig: Arc<Signature>) -> Self {
        let patterns = sig
            .label_ids()
            .map(|l| (sig.label_name(l).to_string(), Pattern::single(sig.clone(), l)))
            .collect();
        Self::new(sig.clone(), sig, patterns).expect("identity covers every label")
    }

    pub fn source(&self) -> &Arc<Signature> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Signature> {
        &self.target
    }

    pub fn pattern(&self, a: LabelId) -> &Pattern {
        &self.patterns[a.index()]
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// Target direction carrying the same name as source direction `d`.
    pub fn map_dir(&self, d: DirId) -> Option<DirId> {
        self.dir_map[d.index()]
    }

    /// Inverse of [`Homomorphism::map_dir`].
    pub fn unmap_dir(&self, d: DirId) -> Option<DirId> {
        self.dir_map
            .iter()
            .position(|&x| x == Some(d))
            .map(|i| DirId(i as u16))
    }

    pub fn validate(&self) -> Vec<HomViolation> {
        let (src, tgt) = (&self.source, &self.target);
        let mut out = Vec::new();
        for d in src.dir_ids() {
            match self.map_dir(d) {
                None => out.push(HomViolation::DirectionMissingInTarget {
                    dir: src.dir_name(d).into(),
                }),
                Some(t) => {
                    if self.map_dir(src.opposite(d)) != Some(tgt.opposite(t)) {
                        out.push(HomViolation::OppositeMismatch {
                            dir: src.dir_name(d).into(),
                        });
                    }
                }
            }
        }
        for a in src.label_ids() {
            let p = self.pattern(a);
            let label = src.label_name(a).to_string();
            let mut vs = p.validate_shape();
            if !Arc::ptr_eq(p.sig(), tgt) && **p.sig() != **tgt {
                vs.push(PatternViolation::PortSetMismatch {
                    expected: vec!["<target signature>".into()],
                    found: vec!["<other signature>".into()],
                });
            }
            let lab = src.label(a);
            if lab.initial != !p.initial_nodes().is_empty() {
                vs.push(PatternViolation::InitialMismatch {
                    label_initial: lab.initial,
                });
            }
            let expected: Vec<Option<DirId>> = lab.dirs.iter().map(|&d| self.map_dir(d)).collect();
            let found: Vec<Option<DirId>> = p.ports().keys().map(|&d| Some(d)).collect();
            if expected != found {
                vs.push(PatternViolation::PortSetMismatch {
                    expected: lab.dirs.iter().map(|&d| src.dir_name(d).to_string()).collect(),
                    found: p.ports().keys().map(|&d| tgt.dir_name(d).to_string()).collect(),
                });
            }
            out.extend(vs.into_iter().map(|violation| HomViolation::Pattern {
                label: label.clone(),
                violation,
            }));
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<(), HomError> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(HomError::Invalid(v.iter().map(|x| x.to_string()).collect()))
        }
    }
}

/// `h(G)` together with the provenance of each image node.
#[derive(Clone, Debug)]
pub struct Image {
    pub graph: Graph,
    /// For every image node: (source node, node inside that node's pattern).
    pub origin: Vec<(usize, usize)>,
    /// Index of the first image node of each source node's copy.
    pub offsets: Vec<usize>,
}

/// Builds `h(G)`. Image node ids are `"{source id}/{pattern node id}"`.
pub fn apply(h: &Homomorphism, g: &Graph) -> Result<Image, HomError> {
    h.ensure_valid()?;
    if !Arc::ptr_eq(g.sig(), h.source()) && **g.sig() != **h.source() {
        return Err(HomError::SourceMismatch);
    }
    let gv = g.validate();
    if let Some(first) = gv.first() {
        return Err(HomError::InvalidGraph(first.to_string()));
    }
    Ok(apply_unchecked(h, g))
}

pub(crate) fn apply_unchecked(h: &Homomorphism, g: &Graph) -> Image {
    let tgt = h.target();
    let mut b = GraphBuilder::new(tgt.clone());
    let mut offsets = Vec::with_capacity(g.num_nodes());
    let mut origin = Vec::new();
    for v in 0..g.num_nodes() {
        let p = h.pattern(g.label(v));
        let off = b
            .embed(p.body(), &format!("{}/", g.id(v)))
            .expect("source node ids are unique");
        offsets.push(off);
        origin.extend((0..p.num_nodes()).map(|w| (v, w)));
    }
    for (v, d, u) in g.edges() {
        let dt = h.map_dir(d).expect("validated direction map");
        let back = tgt.opposite(dt);
        let wv = h.pattern(g.label(v)).port(dt).expect("validated ports");
        let wu = h.pattern(g.label(u)).port(back).expect("validated ports");
        b.connect(offsets[v] + wv, dt, offsets[u] + wu)
            .expect("ports are free in a valid pattern");
    }
    let v0 = g.initial();
    let p0 = h.pattern(g.label(v0));
    b.set_initial(offsets[v0] + p0.initial_node().expect("initial label has an initial node"));
    Image {
        graph: b.build().expect("initial node set"),
        origin,
        offsets,
    }
}

/// How an automaton enters a pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternEntry {
    /// At the pattern's initial node, in the automaton's initial state.
    Start,
    /// Arriving by a move in direction `dir` (a target direction), in
    /// `state`; lands on the port node for `-dir`.
    Enter { state: usize, dir: DirId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PatternResult {
    AcceptInside,
    RejectInside,
    LoopInside,
    /// Left through the port `dir`, now in `state`.
    Exit { state: usize, dir: DirId },
}

/// Exit result with the state in which the leaving move was taken.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct Simulated {
    pub result: PatternResult,
    pub exit_from: Option<usize>,
}

pub fn simulate_in_pattern(a: &WalkingAutomaton, p: &Pattern, entry: PatternEntry) -> Result<PatternResult, HomError> {
    if !Arc::ptr_eq(a.sig(), p.sig()) && **a.sig() != **p.sig() {
        return Err(HomError::TargetMismatch);
    }
    let shape = p.validate_shape();
    if !shape.is_empty() {
        return Err(HomError::Invalid(shape.iter().map(|x| x.to_string()).collect()));
    }
    simulate_unchecked(a, p, entry).map(|s| s.result)
}

pub(crate) fn simulate_unchecked(a: &WalkingAutomaton, p: &Pattern, entry: PatternEntry) -> Result<Simulated, HomError> {
    let start = match entry {
        PatternEntry::Start => Configuration {
            state: a.initial(),
            node: p.initial_node().ok_or(HomError::NoInitialNode)?,
        },
        PatternEntry::Enter { state, dir } => {
            let land = p.sig().opposite(dir);
            let node = p
                .port(land)
                .ok_or_else(|| HomError::NotAPort(p.sig().dir_name(land).to_string()))?;
            Configuration { state, node }
        }
    };
    let body = p.body();
    let mut last_state = start.state;
    let end = walk(
        a,
        body.num_nodes(),
        start,
        |v| body.label(v),
        |v, d| match body.neighbor(v, d) {
            Some(u) => Step::To(u),
            None => Step::Out(d),
        },
        None,
        usize::MAX,
    );
    let result = match end {
        WalkEnd::Accept(..) => PatternResult::AcceptInside,
        WalkEnd::Reject(..) => PatternResult::RejectInside,
        WalkEnd::Loop(..) => PatternResult::LoopInside,
        WalkEnd::Exit { state, dir, steps } => {
            last_state = exit_state_before(a, p, start, steps);
            PatternResult::Exit { state, dir }
        }
        WalkEnd::Truncated => unreachable!("untruncated walk"),
    };
    let exit_from = matches!(result, PatternResult::Exit { .. }).then_some(last_state);
    Ok(Simulated { result, exit_from })
}

/// Replays `steps - 1` moves to recover the state that took the exit move.
fn exit_state_before(a: &WalkingAutomaton, p: &Pattern, start: Configuration, steps: usize) -> usize {
    let mut cur = start;
    for _ in 1..steps {
        let (q, d) = a
            .transition(cur.state, p.body().label(cur.node))
            .expect("replayed walk moves");
        cur = Configuration {
            state: q,
            node: p.body().neighbor(cur.node, d).expect("replayed walk stays inside"),
        };
    }
    cur.state
}

/// Meaning of a state of an inverted automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InvertedState {
    /// The non-reenterable initial state used with several initial labels.
    Start,
    /// `A` is in `state` and entered the current node's pattern moving in
    /// source direction `dir`.
    Sim { state: usize, dir: DirId },
    /// Sole state of the automaton built when `A` never leaves `h(a0)`.
    Answer,
}

#[derive(Clone, Debug)]
pub struct Inversion {
    pub automaton: WalkingAutomaton,
    pub meaning: Vec<InvertedState>,
}

impl Inversion {
    pub fn num_states(&self) -> usize {
        self.automaton.num_states()
    }

    /// Unreachable states, reported but kept so that state counts are exact.
    pub fn unreachable_states(&self) -> Vec<String> {
        self.automaton.unreachable_states()
    }
}

/// Builds `B` with `B(G)` accepting iff `A(h(G))` accepts.
///
/// State set: `Q x D` in state-major order, preceded by a start state when
/// the source signature has several initial labels. With a unique initial
/// label `a0`, `B` starts in `(q, -d)` where `A` first leaves `h(a0)` by a
/// move in direction `d` taken in state `q`; if `A` never leaves `h(a0)`,
/// `B` is a one-state automaton giving the same immediate answer.
pub fn invert(a: &WalkingAutomaton, h: &Homomorphism) -> Result<Inversion, HomError> {
    h.ensure_valid()?;
    if !Arc::ptr_eq(a.sig(), h.target()) && **a.sig() != **h.target() {
        return Err(HomError::TargetMismatch);
    }
    let src = h.source().clone();
    let k = src.num_directions();
    let initials: Vec<LabelId> = src.initial_labels().collect();

    if initials.len() == 1 {
        let a0 = initials[0];
        let first = simulate_unchecked(a, h.pattern(a0), PatternEntry::Start)?;
        if let PatternResult::Exit { dir, .. } = first.result {
            let d = h.unmap_dir(dir).expect("ports carry source directions");
            let q = first.exit_from.expect("exit records its state");
            let mut inv = build_sim(a, h, 0)?;
            let init = q * k + src.opposite(d).index();
            inv.automaton.set_initial(init);
            return Ok(inv);
        }
        let mut b = WalkingAutomaton::new(src, vec!["answer".into()], 0)?;
        if first.result == PatternResult::AcceptInside {
            b.set_accept(0, a0);
        }
        return Ok(Inversion {
            automaton: b,
            meaning: vec![InvertedState::Answer],
        });
    }

    let mut inv = build_sim(a, h, 1)?;
    for &a0 in &initials {
        let first = simulate_unchecked(a, h.pattern(a0), PatternEntry::Start)?;
        match first.result {
            PatternResult::AcceptInside => inv.automaton.set_accept(0, a0),
            PatternResult::Exit { state, dir } => {
                let d = h.unmap_dir(dir).expect("ports carry source directions");
                inv.automaton.set_move(0, a0, 1 + state * k + d.index(), d)?;
            }
            PatternResult::RejectInside | PatternResult::LoopInside => {}
        }
    }
    Ok(inv)
}

/// States `(q, d)` at indices `base + q * k + d`, with `base` leading
/// states reserved (named `p0`).
fn build_sim(a: &WalkingAutomaton, h: &Homomorphism, base: usize) -> Result<Inversion, HomError> {
    let src = h.source().clone();
    let k = src.num_directions();
    let nq = a.num_states();
    let mut names = Vec::with_capacity(base + nq * k);
    let mut meaning = Vec::with_capacity(base + nq * k);
    for _ in 0..base {
        names.push("p0".to_string());
        meaning.push(InvertedState::Start);
    }
    for q in 0..nq {
        for d in src.dir_ids() {
            names.push(format!("({},{})", a.state_name(q), src.dir_name(d)));
            meaning.push(InvertedState::Sim { state: q, dir: d });
        }
    }
    let mut b = WalkingAutomaton::new(src.clone(), names, 0)?;
    for q in 0..nq {
        for d in src.dir_ids() {
            let me = base + q * k + d.index();
            let dt = h.map_dir(d).expect("validated direction map");
            for lab in src.label_ids() {
                if !src.has_dir(lab, src.opposite(d)) {
                    continue;
                }
                let sim = simulate_unchecked(a, h.pattern(lab), PatternEntry::Enter { state: q, dir: dt })?;
                match sim.result {
                    PatternResult::AcceptInside => b.set_accept(me, lab),
                    PatternResult::Exit { state, dir } => {
                        let d2 = h.unmap_dir(dir).expect("ports carry source directions");
                        b.set_move(me, lab, base + state * k + d2.index(), d2)?;
                    }
                    PatternResult::RejectInside | PatternResult::LoopInside => {}
                }
            }
        }
    }
    Ok(Inversion { automaton: b, meaning })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DisagreementKind {
    /// `B` on `G` and `A` on `h(G)` disagree on acceptance.
    Acceptance { inverted: OutcomeKind, original: OutcomeKind },
    /// `B` loops while `A` does not, or `B` rejects while `A` neither
    /// rejects nor loops.
    Refinement { inverted: OutcomeKind, original: OutcomeKind },
    /// The configuration of `B` after `step` moves has no matching entry of
    /// `A` into the corresponding pattern.
    TraceMisaligned { step: usize },
}

impl fmt::Display for DisagreementKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DisagreementKind::Acceptance { inverted, original } => {
                write!(f, "acceptance mismatch: inverted {inverted}, original on image {original}")
            }
            DisagreementKind::Refinement { inverted, original } => {
                write!(f, "outcome refinement broken: inverted {inverted}, original on image {original}")
            }
            DisagreementKind::TraceMisaligned { step } => write!(f, "trace misaligned at step {step}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Disagreement {
    pub graph: usize,
    pub kind: DisagreementKind,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct InverseReport {
    pub graphs_checked: usize,
    pub inverted_states: usize,
    pub accepted: usize,
    pub entries_aligned: usize,
    pub disagreements: Vec<Disagreement>,
}

impl InverseReport {
    pub fn is_clean(&self) -> bool {
        self.disagreements.is_empty()
    }
}

/// Checks `B = invert(A, h)` against `A` on images, graph by graph: equal
/// acceptance, loop/reject refinement, and alignment of every configuration
/// of `B` after `t >= 1` moves with the `t`-th entry of `A` into a pattern.
/// Disagreements, acceptance and aligned entries for one graph.
type GraphCheck = (Vec<DisagreementKind>, bool, usize);

pub fn verify_inverse(a: &WalkingAutomaton, h: &Homomorphism, suite: &[Graph]) -> Result<InverseReport, HomError> {
    if suite.is_empty() {
        return Ok(InverseReport::default());
    }
    let inv = invert(a, h)?;
    let per_graph: Vec<Result<GraphCheck, HomError>> = suite
        .par_iter()
        .map(|g| check_one(a, h, &inv, g))
        .collect();
    let mut report = InverseReport {
        graphs_checked: suite.len(),
        inverted_states: inv.num_states(),
        ..Default::default()
    };
    for (i, r) in per_graph.into_iter().enumerate() {
        let (kinds, accepted, aligned) = r?;
        report.accepted += accepted as usize;
        report.entries_aligned += aligned;
        report
            .disagreements
            .extend(kinds.into_iter().map(|kind| Disagreement { graph: i, kind }));
    }
    Ok(report)
}

fn check_one(
    a: &WalkingAutomaton,
    h: &Homomorphism,
    inv: &Inversion,
    g: &Graph,
) -> Result<GraphCheck, HomError> {
    let img = apply(h, g)?;
    let (ob, trace_b) = engine::run_traced(&inv.automaton, g)?;
    let oa = engine::run(a, &img.graph)?;
    let (kb, ka) = (ob.kind(), oa.kind());
    let mut out = Vec::new();
    if (kb == OutcomeKind::Accept) != (ka == OutcomeKind::Accept) {
        out.push(DisagreementKind::Acceptance {
            inverted: kb,
            original: ka,
        });
    }
    let refined = match kb {
        OutcomeKind::Loop => ka == OutcomeKind::Loop,
        OutcomeKind::Reject => ka != OutcomeKind::Accept,
        OutcomeKind::Accept => true,
    };
    if !refined {
        out.push(DisagreementKind::Refinement {
            inverted: kb,
            original: ka,
        });
    }

    // Entries of A into patterns: moves that cross a port.
    let horizon = 2 * a.num_states() * img.graph.num_nodes() + 2;
    let exec = engine::execute(a, &img.graph, horizon)?;
    let mut entries = Vec::new();
    for t in 1..exec.len() {
        let prev = exec[t - 1];
        let (q, dir) = a
            .transition(prev.state, img.graph.label(prev.node))
            .expect("execution only continues through moves");
        let (src_node, pnode) = img.origin[prev.node];
        let p = h.pattern(g.label(src_node));
        if p.port(dir) == Some(pnode) {
            let cur = exec[t];
            let d = h.unmap_dir(dir).expect("ports carry source directions");
            entries.push((t, img.origin[cur.node].0, q, d));
        }
    }
    let mut aligned = 0;
    for (t, cfg) in trace_b.iter().enumerate().skip(1) {
        let ok = match (inv.meaning[cfg.state], entries.get(t - 1)) {
            (InvertedState::Sim { state, dir }, Some(&(t_hat, v, q, d))) => {
                t_hat >= t && v == cfg.node && q == state && d == dir
            }
            _ => false,
        };
        if ok {
            aligned += 1;
        } else {
            out.push(DisagreementKind::TraceMisaligned { step: t });
            break;
        }
    }
    Ok((out, kb == OutcomeKind::Accept, aligned))
}

//! Deterministic graph-walking automata and their execution.
//!
//! A computation visits configurations `(state, node)`. Since there are only
//! `|Q| * |V|` of them, every run either halts or repeats a configuration
//! within `|Q| * |V| + 1` configurations; repeats are detected exactly with a
//! first-visit table, never with a step cap.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::graph::Graph;
use crate::signature::{DirId, LabelId, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("automaton and graph are over different signatures")]
    SignatureMismatch,
    #[error("automaton has no states")]
    NoStates,
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("transition ({state}, {label}) moves in direction `{dir}` outside the label's directions")]
    DirectionNotInLabel {
        state: String,
        label: String,
        dir: String,
    },
    #[error("pair ({state}, {label}) is both accepting and has a transition")]
    AcceptingPairHasTransition { state: String, label: String },
    #[error("pair ({state}, {label}) has two transitions")]
    DuplicateTransition { state: String, label: String },
}

/// Behaviour of an automaton at one `(state, label)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Action {
    /// The pair is in the acceptance set `F`.
    Accept,
    /// No transition is defined: the automaton rejects here.
    Halt,
    /// Move to `next` along direction `dir`.
    Move { next: u32, dir: DirId },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WalkingAutomaton {
    sig: Arc<Signature>,
    states: Vec<String>,
    initial: usize,
    table: Vec<Action>,
}

impl WalkingAutomaton {
    /// All pairs start as [`Action::Halt`].
    pub fn new(sig: Arc<Signature>, states: Vec<String>, initial: usize) -> Result<Self, EngineError> {
        if states.is_empty() {
            return Err(EngineError::NoStates);
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return Err(EngineError::DuplicateState(s.clone()));
            }
        }
        if initial >= states.len() {
            return Err(EngineError::UnknownState(format!("#{initial}")));
        }
        let cells = states.len() * sig.num_labels();
        Ok(WalkingAutomaton {
            sig,
            states,
            initial,
            table: vec![Action::Halt; cells],
        })
    }

    /// An automaton with states `q0 .. q{n-1}` and initial state `q0`.
    pub fn with_indexed_states(sig: Arc<Signature>, n: usize) -> Result<Self, EngineError> {
        Self::new(sig, (0..n).map(|i| format!("q{i}")).collect(), 0)
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn state_name(&self, q: usize) -> &str {
        &self.states[q]
    }

    pub fn state_index(&self, name: &str) -> Result<usize, EngineError> {
        self.states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| EngineError::UnknownState(name.to_string()))
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn set_initial(&mut self, q: usize) {
        assert!(q < self.states.len());
        self.initial = q;
    }

    #[inline]
    pub fn action(&self, q: usize, a: LabelId) -> Action {
        self.table[q * self.sig.num_labels() + a.index()]
    }

    pub fn set_action(&mut self, q: usize, a: LabelId, act: Action) -> Result<(), EngineError> {
        if let Action::Move { next, dir } = act {
            if next as usize >= self.states.len() {
                return Err(EngineError::UnknownState(format!("#{next}")));
            }
            if !self.sig.has_dir(a, dir) {
                return Err(EngineError::DirectionNotInLabel {
                    state: self.states[q].clone(),
                    label: self.sig.label_name(a).to_string(),
                    dir: self.sig.dir_name(dir).to_string(),
                });
            }
        }
        let k = self.sig.num_labels();
        self.table[q * k + a.index()] = act;
        Ok(())
    }

    pub fn set_accept(&mut self, q: usize, a: LabelId) {
        let k = self.sig.num_labels();
        self.table[q * k + a.index()] = Action::Accept;
    }

    pub fn set_move(&mut self, q: usize, a: LabelId, next: usize, dir: DirId) -> Result<(), EngineError> {
        self.set_action(
            q,
            a,
            Action::Move {
                next: next as u32,
                dir,
            },
        )
    }

    pub fn accepts(&self, q: usize, a: LabelId) -> bool {
        self.action(q, a) == Action::Accept
    }

    pub fn transition(&self, q: usize, a: LabelId) -> Option<(usize, DirId)> {
        match self.action(q, a) {
            Action::Move { next, dir } => Some((next as usize, dir)),
            _ => None,
        }
    }

    /// States reachable from the initial state through some transition.
    pub fn reachable_states(&self) -> Vec<bool> {
        let mut seen = vec![false; self.num_states()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(q) = stack.pop() {
            for a in self.sig.label_ids() {
                if let Some((p, _)) = self.transition(q, a) {
                    if !seen[p] {
                        seen[p] = true;
                        stack.push(p);
                    }
                }
            }
        }
        seen
    }

    /// Names of states unreachable from the initial state.
    pub fn unreachable_states(&self) -> Vec<String> {
        self.reachable_states()
            .iter()
            .enumerate()
            .filter(|(_, r)| !**r)
            .map(|(q, _)| self.states[q].clone())
            .collect()
    }

    /// Same automaton with states renamed by `f`.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Self {
        let mut out = self.clone();
        out.states = self.states.iter().map(|s| f(s)).collect();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Configuration {
    pub state: usize,
    pub node: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Outcome {
    Accept { at: Configuration, steps: usize },
    Reject { at: Configuration, steps: usize },
    /// `at` repeats first at step `steps`, after `cycle_len` steps.
    Loop {
        at: Configuration,
        cycle_len: usize,
        steps: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Accept,
    Reject,
    Loop,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Accept => "accept",
            OutcomeKind::Reject => "reject",
            OutcomeKind::Loop => "loop",
        })
    }
}

impl Outcome {
    pub fn kind(&self) -> OutcomeKind {
        match self {
            Outcome::Accept { .. } => OutcomeKind::Accept,
            Outcome::Reject { .. } => OutcomeKind::Reject,
            Outcome::Loop { .. } => OutcomeKind::Loop,
        }
    }

    pub fn is_accept(&self) -> bool {
        matches!(self, Outcome::Accept { .. })
    }

    /// Number of moves made before the outcome was decided.
    pub fn steps(&self) -> usize {
        match *self {
            Outcome::Accept { steps, .. } | Outcome::Reject { steps, .. } | Outcome::Loop { steps, .. } => {
                steps
            }
        }
    }
}

/// Where a move leads inside a (possibly open) fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Step {
    To(usize),
    Out(DirId),
}

/// Result of walking inside a fragment.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum WalkEnd {
    Accept(Configuration, usize),
    Reject(Configuration, usize),
    Loop(Configuration, usize, usize),
    Exit { state: usize, dir: DirId, steps: usize },
    Truncated,
}

/// Core loop shared by whole-graph runs and pattern simulations.
pub(crate) fn walk(
    a: &WalkingAutomaton,
    num_nodes: usize,
    start: Configuration,
    label_of: impl Fn(usize) -> LabelId,
    step: impl Fn(usize, DirId) -> Step,
    mut record: Option<&mut Vec<Configuration>>,
    max_len: usize,
) -> WalkEnd {
    let nq = a.num_states();
    let mut first_seen = vec![u32::MAX; nq * num_nodes];
    let mut cur = start;
    let mut t = 0usize;
    loop {
        let slot = &mut first_seen[cur.node * nq + cur.state];
        if *slot != u32::MAX {
            let cycle = t - *slot as usize;
            if let Some(r) = record.as_deref_mut() {
                if r.len() >= max_len {
                    return WalkEnd::Truncated;
                }
                r.push(cur);
            }
            return WalkEnd::Loop(cur, cycle, t);
        }
        *slot = t as u32;
        if let Some(r) = record.as_deref_mut() {
            if r.len() >= max_len {
                return WalkEnd::Truncated;
            }
            r.push(cur);
        }
        match a.action(cur.state, label_of(cur.node)) {
            Action::Accept => return WalkEnd::Accept(cur, t),
            Action::Halt => return WalkEnd::Reject(cur, t),
            Action::Move { next, dir } => match step(cur.node, dir) {
                Step::To(u) => {
                    cur = Configuration {
                        state: next as usize,
                        node: u,
                    };
                    t += 1;
                }
                Step::Out(d) => {
                    return WalkEnd::Exit {
                        state: next as usize,
                        dir: d,
                        steps: t + 1,
                    }
                }
            },
        }
    }
}

fn check_sig(a: &WalkingAutomaton, g: &Graph) -> Result<(), EngineError> {
    if Arc::ptr_eq(a.sig(), g.sig()) || a.sig() == g.sig() {
        Ok(())
    } else {
        Err(EngineError::SignatureMismatch)
    }
}

fn graph_walk(a: &WalkingAutomaton, g: &Graph, record: Option<&mut Vec<Configuration>>, max_len: usize) -> WalkEnd {
    let start = Configuration {
        state: a.initial(),
        node: g.initial(),
    };
    walk(
        a,
        g.num_nodes(),
        start,
        |v| g.label(v),
        // A valid graph defines `v + d` whenever `d` is in the label's
        // directions, which every move respects.
        |v, d| Step::To(g.neighbor(v, d).expect("move along an undefined edge")),
        record,
        max_len,
    )
}

pub fn run(a: &WalkingAutomaton, g: &Graph) -> Result<Outcome, EngineError> {
    check_sig(a, g)?;
    Ok(match graph_walk(a, g, None, usize::MAX) {
        WalkEnd::Accept(at, steps) => Outcome::Accept { at, steps },
        WalkEnd::Reject(at, steps) => Outcome::Reject { at, steps },
        WalkEnd::Loop(at, cycle_len, steps) => Outcome::Loop { at, cycle_len, steps },
        WalkEnd::Exit { .. } | WalkEnd::Truncated => unreachable!("closed graph walk"),
    })
}

/// Prefix of the computation, at most `max_len` configurations long. For a
/// loop the repeated configuration closes the trace.
pub fn trace(a: &WalkingAutomaton, g: &Graph, max_len: usize) -> Result<Vec<Configuration>, EngineError> {
    check_sig(a, g)?;
    let mut out = Vec::new();
    graph_walk(a, g, Some(&mut out), max_len);
    Ok(out)
}

/// Follows the computation for at most `max_steps` moves without stopping at
/// repeated configurations. Ends early when the automaton halts.
pub fn execute(a: &WalkingAutomaton, g: &Graph, max_steps: usize) -> Result<Vec<Configuration>, EngineError> {
    check_sig(a, g)?;
    let mut cur = Configuration {
        state: a.initial(),
        node: g.initial(),
    };
    let mut out = vec![cur];
    for _ in 0..max_steps {
        match a.action(cur.state, g.label(cur.node)) {
            Action::Move { next, dir } => {
                cur = Configuration {
                    state: next as usize,
                    node: g.neighbor(cur.node, dir).expect("move along an undefined edge"),
                };
                out.push(cur);
            }
            _ => break,
        }
    }
    Ok(out)
}

/// Runs and trace together, for callers that need both.
pub fn run_traced(a: &WalkingAutomaton, g: &Graph) -> Result<(Outcome, Vec<Configuration>), EngineError> {
    let trace = trace(a, g, usize::MAX)?;
    let outcome = run(a, g)?;
    Ok((outcome, trace))
}

/// Per-graph comparison of two automata.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GraphAgreement {
    pub index: usize,
    pub first: OutcomeKind,
    pub second: OutcomeKind,
}

impl GraphAgreement {
    pub fn acceptance_agrees(&self) -> bool {
        (self.first == OutcomeKind::Accept) == (self.second == OutcomeKind::Accept)
    }

    pub fn fully_agrees(&self) -> bool {
        self.first == self.second
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct AgreementReport {
    pub entries: Vec<GraphAgreement>,
}

impl AgreementReport {
    pub fn acceptance_disagreements(&self) -> Vec<&GraphAgreement> {
        self.entries.iter().filter(|e| !e.acceptance_agrees()).collect()
    }

    pub fn full_disagreements(&self) -> Vec<&GraphAgreement> {
        self.entries.iter().filter(|e| !e.fully_agrees()).collect()
    }
}

pub fn agree_on(a1: &WalkingAutomaton, a2: &WalkingAutomaton, suite: &[Graph]) -> Result<AgreementReport, EngineError> {
    let mut entries = Vec::with_capacity(suite.len());
    for (index, g) in suite.iter().enumerate() {
        entries.push(GraphAgreement {
            index,
            first: run(a1, g)?.kind(),
            second: run(a2, g)?.kind(),
        });
    }
    Ok(AgreementReport { entries })
}

/// Options for one `(state, label)` cell, in canonical order: accept,
/// undefined, then every move `(q', d)` by `q'` and then by direction.
pub fn cell_options(sig: &Signature, num_states: usize, a: LabelId) -> Vec<Action> {
    let mut v = vec![Action::Accept, Action::Halt];
    for next in 0..num_states as u32 {
        for &dir in &sig.label(a).dirs {
            v.push(Action::Move { next, dir });
        }
    }
    v
}

/// Number of distinct automata with `num_states` states, saturating.
pub fn count_automata(sig: &Signature, num_states: usize) -> u128 {
    let mut total: u128 = 1;
    for _ in 0..num_states {
        for a in sig.label_ids() {
            total = total.saturating_mul(cell_options(sig, num_states, a).len() as u128);
        }
    }
    total
}

/// Lexicographic enumeration over the `(state, label)` option table, cells
/// ordered state-major; the last cell varies fastest. Initial state is `q0`.
pub struct AutomatonEnumerator {
    template: WalkingAutomaton,
    options: Vec<Vec<Action>>,
    digits: Vec<usize>,
    remaining: usize,
    done: bool,
}

pub fn enumerate_automata(sig: Arc<Signature>, num_states: usize, budget: usize) -> AutomatonEnumerator {
    assert!(num_states >= 1, "automata need at least one state");
    let options: Vec<Vec<Action>> = (0..num_states)
        .flat_map(|_| sig.label_ids().map(|a| cell_options(&sig, num_states, a)).collect::<Vec<_>>())
        .collect();
    let template = WalkingAutomaton::with_indexed_states(sig, num_states).expect("non-empty state set");
    AutomatonEnumerator {
        digits: vec![0; options.len()],
        options,
        template,
        remaining: budget,
        done: false,
    }
}

impl Iterator for AutomatonEnumerator {
    type Item = WalkingAutomaton;

    fn next(&mut self) -> Option<WalkingAutomaton> {
        if self.done || self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        let mut a = self.template.clone();
        for (cell, (&d, opts)) in self.digits.iter().zip(&self.options).enumerate() {
            a.table[cell] = opts[d];
        }
        // Odometer increment, last cell fastest.
        let mut i = self.digits.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.digits[i] += 1;
            if self.digits[i] < self.options[i].len() {
                break;
            }
            self.digits[i] = 0;
        }
        Some(a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<Signature> {
        Arc::new(
            Signature::builder()
                .pair("d", "-d")
                .label("a0", true, &["d"])
                .label("b", false, &["-d"])
                .build()
                .unwrap(),
        )
    }

    fn two_nodes() -> Graph {
        let mut b = Graph::builder(sig());
        b.add_named("u", "a0").unwrap();
        b.add_named("v", "b").unwrap();
        b.connect_named("u", "d", "v").unwrap();
        b.set_initial(0);
        b.build().unwrap()
    }

    #[test]
    fn accept_at_start() {
        let s = Arc::new(
            Signature::builder()
                .pair("d", "-d")
                .label::<&str>("a0", true, &[])
                .build()
                .unwrap(),
        );
        let mut b = Graph::builder(s.clone());
        b.add_named("v", "a0").unwrap();
        b.set_initial(0);
        let g = b.build().unwrap();
        let mut a = WalkingAutomaton::with_indexed_states(s, 1).unwrap();
        assert!(matches!(run(&a, &g).unwrap(), Outcome::Reject { steps: 0, .. }));
        a.set_accept(0, LabelId(0));
        let out = run(&a, &g).unwrap();
        assert_eq!(
            out,
            Outcome::Accept {
                at: Configuration { state: 0, node: 0 },
                steps: 0
            }
        );
        assert_eq!(trace(&a, &g, 10).unwrap().len(), 1);
    }

    #[test]
    fn ping_pong_loops_with_cycle_two() {
        let s = sig();
        let g = two_nodes();
        let mut a = WalkingAutomaton::with_indexed_states(s.clone(), 1).unwrap();
        a.set_move(0, LabelId(0), 0, s.dir("d").unwrap()).unwrap();
        a.set_move(0, LabelId(1), 0, s.dir("-d").unwrap()).unwrap();
        // (q0,u) -> (q0,v) -> (q0,u): repeat at step 2.
        let out = run(&a, &g).unwrap();
        assert_eq!(
            out,
            Outcome::Loop {
                at: Configuration { state: 0, node: 0 },
                cycle_len: 2,
                steps: 2
            }
        );
        let tr = trace(&a, &g, 100).unwrap();
        assert_eq!(tr.len(), 3);
        assert!(tr.len() <= a.num_states() * g.num_nodes() + 1);
        assert_eq!(trace(&a, &g, 2).unwrap().len(), 2);
    }

    #[test]
    fn move_outside_label_dirs_is_refused() {
        let s = sig();
        let mut a = WalkingAutomaton::with_indexed_states(s.clone(), 1).unwrap();
        let e = a.set_move(0, LabelId(0), 0, s.dir("-d").unwrap()).unwrap_err();
        assert!(matches!(e, EngineError::DirectionNotInLabel { .. }));
    }

    #[test]
    fn signature_mismatch() {
        let other = Arc::new(
            Signature::builder()
                .pair("x", "-x")
                .label::<&str>("a0", true, &[])
                .build()
                .unwrap(),
        );
        let a = WalkingAutomaton::with_indexed_states(other, 1).unwrap();
        assert_eq!(run(&a, &two_nodes()).unwrap_err(), EngineError::SignatureMismatch);
    }

    #[test]
    fn enumeration_counts() {
        let s0 = Arc::new(
            Signature::builder()
                .pair("d", "-d")
                .label::<&str>("a", true, &[])
                .build()
                .unwrap(),
        );
        assert_eq!(enumerate_automata(s0.clone(), 1, 100).count(), 2);
        assert_eq!(enumerate_automata(s0.clone(), 1, 0).count(), 0);
        let s2 = Arc::new(
            Signature::builder()
                .pair("d", "-d")
                .label("a", true, &["d", "-d"])
                .build()
                .unwrap(),
        );
        assert_eq!(enumerate_automata(s2.clone(), 1, 100).count(), 4);
        assert_eq!(count_automata(&s2, 1), 4);
        // Two states: (2 + 2*2)^2 = 36.
        assert_eq!(enumerate_automata(s2.clone(), 2, 1000).count(), 36);
        let all: Vec<_> = enumerate_automata(s2, 2, 1000).collect();
        for i in 0..all.len() {
            for j in 0..i {
                assert_ne!(all[i], all[j]);
            }
        }
    }

    #[test]
    fn enumeration_order_is_lexicographic() {
        let s = sig();
        let first: Vec<_> = enumerate_automata(s.clone(), 1, 3).collect();
        assert_eq!(first[0].action(0, LabelId(0)), Action::Accept);
        assert_eq!(first[0].action(0, LabelId(1)), Action::Accept);
        assert_eq!(first[1].action(0, LabelId(1)), Action::Halt);
        assert!(matches!(first[2].action(0, LabelId(1)), Action::Move { .. }));
        assert_eq!(first[2].action(0, LabelId(0)), Action::Accept);
    }

    #[test]
    fn renamed_copy_fully_agrees() {
        let s = sig();
        let mut a = WalkingAutomaton::with_indexed_states(s.clone(), 2).unwrap();
        a.set_move(0, LabelId(0), 1, s.dir("d").unwrap()).unwrap();
        a.set_accept(1, LabelId(1));
        let b = a.renamed(|n| format!("{n}'"));
        let rep = agree_on(&a, &b, &[two_nodes()]).unwrap();
        assert!(rep.full_disagreements().is_empty());
        assert_eq!(rep.entries[0].first, OutcomeKind::Accept);
        assert_eq!(a.unreachable_states(), Vec::<String>::new());
    }
}

//! JSON documents for signatures, graphs, automata, homomorphisms and tree
//! automata.
//!
//! Output is canonical: object keys sorted, nodes sorted by id, edges and
//! transitions sorted. Directions and labels keep declaration order, which
//! fixes their numbering. Each physical edge appears once, from the lesser
//! `(node, direction)` slot.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Action, WalkingAutomaton};
use crate::graph::{Body, Graph};
use crate::hom::{Homomorphism, Pattern};
use crate::signature::{DirId, LabelId, Signature};
use crate::trees::{BottomUpTreeAutomaton, TreeSignature};
use crate::witnesses::PluggableSubgraph;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("{what}: line {line}, column {column}: {message}")]
    Syntax {
        what: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{at}: {message}")]
    Invalid { at: String, message: String },
}

fn invalid(at: impl Into<String>, message: impl ToString) -> FormatError {
    FormatError::Invalid {
        at: at.into(),
        message: message.to_string(),
    }
}

/// Parses one document; `what` names it in diagnostics.
pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, FormatError> {
    serde_json::from_str(text).map_err(|e| FormatError::Syntax {
        what: what.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn to_canonical_json<T: Serialize>(doc: &T) -> String {
    let v = serde_json::to_value(doc).expect("documents serialize");
    let mut s = serde_json::to_string_pretty(&v).expect("values serialize");
    s.push('\n');
    s
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectionDoc {
    pub name: String,
    pub opposite: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelDoc {
    pub name: String,
    pub initial: bool,
    pub dirs: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SignatureDoc {
    pub directions: Vec<DirectionDoc>,
    pub labels: Vec<LabelDoc>,
}

impl SignatureDoc {
    pub fn from_signature(sig: &Signature) -> Self {
        SignatureDoc {
            directions: sig
                .dir_ids()
                .map(|d| DirectionDoc {
                    name: sig.dir_name(d).to_string(),
                    opposite: sig.dir_name(sig.opposite(d)).to_string(),
                })
                .collect(),
            labels: sig
                .label_ids()
                .map(|l| {
                    let lab = sig.label(l);
                    LabelDoc {
                        name: lab.name.clone(),
                        initial: lab.initial,
                        dirs: lab.dirs.iter().map(|&d| sig.dir_name(d).to_string()).collect(),
                    }
                })
                .collect(),
        }
    }

    /// Structural errors only; invariant violations are left to
    /// [`Signature::validate`].
    pub fn to_signature(&self) -> Result<Signature, FormatError> {
        let dirs: Vec<(String, String)> = self.directions.iter().map(|d| (d.name.clone(), d.opposite.clone())).collect();
        let labels: Vec<(String, bool, Vec<String>)> =
            self.labels.iter().map(|l| (l.name.clone(), l.initial, l.dirs.clone())).collect();
        Signature::from_parts(&dirs, &labels).map_err(|e| invalid("signature", e))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeDoc {
    pub id: String,
    pub label: String,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub from: String,
    pub dir: String,
    pub to: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureDoc>,
    pub nodes: Vec<NodeDoc>,
    pub initial: String,
    pub edges: Vec<EdgeDoc>,
}

fn body_doc(sig: &Signature, body: &Body) -> (Vec<NodeDoc>, Vec<EdgeDoc>) {
    let mut nodes: Vec<NodeDoc> = (0..body.num_nodes())
        .map(|v| NodeDoc {
            id: body.id(v).to_string(),
            label: sig.label_name(body.label(v)).to_string(),
        })
        .collect();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));
    let mut edges = Vec::new();
    for v in 0..body.num_nodes() {
        for d in sig.dir_ids() {
            let Some(u) = body.neighbor(v, d) else { continue };
            let o = sig.opposite(d);
            // Keep the half whose slot is lesser; an unmatched half is kept too.
            let mirrored = body.neighbor(u, o) == Some(v);
            if mirrored && (u, o.index()) < (v, d.index()) {
                continue;
            }
            edges.push(EdgeDoc {
                from: body.id(v).to_string(),
                dir: sig.dir_name(d).to_string(),
                to: body.id(u).to_string(),
            });
        }
    }
    edges.sort();
    (nodes, edges)
}

fn body_from_doc(sig: &Signature, nodes: &[NodeDoc], edges: &[EdgeDoc], at: &str) -> Result<Body, FormatError> {
    let mut body = Body::new(sig.num_directions());
    let mut index = std::collections::HashMap::new();
    for (i, n) in nodes.iter().enumerate() {
        let l = sig
            .label_id(&n.label)
            .map_err(|e| invalid(format!("{at}nodes[{i}].label"), e))?;
        if index.insert(n.id.as_str(), body.num_nodes()).is_some() {
            return Err(invalid(format!("{at}nodes[{i}].id"), format!("duplicate node `{}`", n.id)));
        }
        body.add_node(n.id.clone(), l);
    }
    for (i, e) in edges.iter().enumerate() {
        let node = |id: &str, field: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| invalid(format!("{at}edges[{i}].{field}"), format!("unknown node `{id}`")))
        };
        let (u, v) = (node(&e.from, "from")?, node(&e.to, "to")?);
        let d = sig.dir(&e.dir).map_err(|x| invalid(format!("{at}edges[{i}].dir"), x))?;
        body.connect(u, d, v, sig.opposite(d))
            .map_err(|x| invalid(format!("{at}edges[{i}]"), x))?;
    }
    Ok(body)
}

impl GraphDoc {
    pub fn from_graph(g: &Graph, embed_signature: bool) -> Self {
        let (nodes, edges) = body_doc(g.sig(), g.body());
        GraphDoc {
            signature: embed_signature.then(|| SignatureDoc::from_signature(g.sig())),
            nodes,
            initial: g.id(g.initial()).to_string(),
            edges,
        }
    }

    /// Builds the graph without checking invariants, so that
    /// [`Graph::validate`] can report them.
    pub fn to_graph(&self, sig: Arc<Signature>) -> Result<Graph, FormatError> {
        let body = body_from_doc(&sig, &self.nodes, &self.edges, "")?;
        let initial = body
            .find(&self.initial)
            .ok_or_else(|| invalid("initial", format!("unknown node `{}`", self.initial)))?;
        Ok(Graph::from_body(sig, body, initial))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub state: String,
    pub label: String,
    pub next: String,
    pub dir: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureDoc>,
    pub states: Vec<String>,
    pub initial: String,
    /// `[state, label]` pairs.
    pub accept: Vec<(String, String)>,
    pub transitions: Vec<TransitionDoc>,
}

impl AutomatonDoc {
    pub fn from_automaton(a: &WalkingAutomaton, embed_signature: bool) -> Self {
        let sig = a.sig();
        let mut accept = Vec::new();
        let mut transitions = Vec::new();
        for q in 0..a.num_states() {
            for l in sig.label_ids() {
                let (s, lab) = (a.state_name(q).to_string(), sig.label_name(l).to_string());
                match a.action(q, l) {
                    Action::Accept => accept.push((s, lab)),
                    Action::Halt => {}
                    Action::Move { next, dir } => transitions.push(TransitionDoc {
                        state: s,
                        label: lab,
                        next: a.state_name(next as usize).to_string(),
                        dir: sig.dir_name(dir).to_string(),
                    }),
                }
            }
        }
        accept.sort();
        transitions.sort();
        AutomatonDoc {
            signature: embed_signature.then(|| SignatureDoc::from_signature(sig)),
            states: a.states().to_vec(),
            initial: a.state_name(a.initial()).to_string(),
            accept,
            transitions,
        }
    }

    pub fn to_automaton(&self, sig: Arc<Signature>) -> Result<WalkingAutomaton, FormatError> {
        let mut a = WalkingAutomaton::new(sig.clone(), self.states.clone(), 0).map_err(|e| invalid("states", e))?;
        let q0 = a.state_index(&self.initial).map_err(|e| invalid("initial", e))?;
        a.set_initial(q0);
        for (i, (s, l)) in self.accept.iter().enumerate() {
            let at = format!("accept[{i}]");
            let q = a.state_index(s).map_err(|e| invalid(&at, e))?;
            let l = sig.label_id(l).map_err(|e| invalid(&at, e))?;
            if a.action(q, l) != Action::Halt {
                return Err(invalid(at, "pair listed twice"));
            }
            a.set_accept(q, l);
        }
        for (i, t) in self.transitions.iter().enumerate() {
            let at = format!("transitions[{i}]");
            let q = a.state_index(&t.state).map_err(|e| invalid(&at, e))?;
            let l = sig.label_id(&t.label).map_err(|e| invalid(&at, e))?;
            let next = a.state_index(&t.next).map_err(|e| invalid(&at, e))?;
            let d = sig.dir(&t.dir).map_err(|e| invalid(&at, e))?;
            match a.action(q, l) {
                Action::Accept => return Err(invalid(at, "accepting pair has a transition")),
                Action::Move { .. } => return Err(invalid(at, "duplicate transition")),
                Action::Halt => {}
            }
            a.set_move(q, l, next, d).map_err(|e| invalid(&at, e))?;
        }
        Ok(a)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternDoc {
    pub nodes: Vec<NodeDoc>,
    pub edges: Vec<EdgeDoc>,
    /// Direction to node id.
    pub ports: BTreeMap<String, String>,
}

impl PatternDoc {
    pub fn from_pattern(p: &Pattern) -> Self {
        let sig = p.sig();
        let (nodes, edges) = body_doc(sig, p.body());
        let ports = p
            .ports()
            .iter()
            .map(|(&d, &v)| (sig.dir_name(d).to_string(), p.body().id(v).to_string()))
            .collect();
        PatternDoc { nodes, edges, ports }
    }

    /// `at` prefixes error locations.
    pub fn to_pattern(&self, sig: Arc<Signature>, at: &str) -> Result<Pattern, FormatError> {
        let body = body_from_doc(&sig, &self.nodes, &self.edges, at)?;
        let mut ports = BTreeMap::new();
        for (d, v) in &self.ports {
            let dir = sig.dir(d).map_err(|e| invalid(format!("{at}ports"), e))?;
            let node = body
                .find(v)
                .ok_or_else(|| invalid(format!("{at}ports.{d}"), format!("unknown node `{v}`")))?;
            ports.insert(dir, node);
        }
        Ok(Pattern::from_parts(sig, body, ports))
    }
}

/// A pluggable subgraph with its signature.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FragmentDoc {
    pub signature: SignatureDoc,
    pub has_initial: bool,
    #[serde(flatten)]
    pub pattern: PatternDoc,
}

impl FragmentDoc {
    pub fn from_fragment(p: &PluggableSubgraph) -> Self {
        FragmentDoc {
            signature: SignatureDoc::from_signature(p.pattern.sig()),
            has_initial: p.has_initial,
            pattern: PatternDoc::from_pattern(&p.pattern),
        }
    }

    pub fn to_fragment(&self) -> Result<PluggableSubgraph, FormatError> {
        let sig = Arc::new(self.signature.to_signature().map_err(|e| prefix("signature", e))?);
        Ok(PluggableSubgraph {
            pattern: self.pattern.to_pattern(sig, "")?,
            has_initial: self.has_initial,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomDoc {
    pub source_sig: SignatureDoc,
    pub target_sig: SignatureDoc,
    pub patterns: BTreeMap<String, PatternDoc>,
}

impl HomDoc {
    pub fn from_hom(h: &Homomorphism) -> Self {
        let (src, tgt) = (h.source(), h.target());
        let patterns = src
            .label_ids()
            .map(|l| (src.label_name(l).to_string(), PatternDoc::from_pattern(h.pattern(l))))
            .collect();
        HomDoc {
            source_sig: SignatureDoc::from_signature(src),
            target_sig: SignatureDoc::from_signature(tgt),
            patterns,
        }
    }

    /// Builds the homomorphism; structural errors fail, invariant
    /// violations are left to [`Homomorphism::validate`].
    pub fn to_hom(&self) -> Result<Homomorphism, FormatError> {
        let src = Arc::new(self.source_sig.to_signature().map_err(|e| prefix("source_sig", e))?);
        let tgt = Arc::new(self.target_sig.to_signature().map_err(|e| prefix("target_sig", e))?);
        let mut patterns = Vec::new();
        for (label, p) in &self.patterns {
            patterns.push((label.clone(), p.to_pattern(tgt.clone(), &format!("patterns.{label}."))?));
        }
        Homomorphism::new(src, tgt, patterns).map_err(|e| invalid("patterns", e))
    }
}

fn prefix(p: &str, e: FormatError) -> FormatError {
    match e {
        FormatError::Invalid { at, message } => invalid(format!("{p}.{at}"), message),
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleDoc {
    pub label: String,
    pub args: Vec<String>,
    pub result: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeAutomatonDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub signature: Option<SignatureDoc>,
    pub states: Vec<String>,
    pub accept: String,
    pub delta: Vec<RuleDoc>,
}

impl TreeAutomatonDoc {
    pub fn from_automaton(a: &BottomUpTreeAutomaton, embed_signature: bool) -> Self {
        let sig = a.tree_sig().sig();
        let st = a.states();
        let mut delta: Vec<RuleDoc> = a
            .rules()
            .into_iter()
            .map(|(l, args, r)| RuleDoc {
                label: sig.label_name(l).to_string(),
                args: args.iter().map(|&q| st[q].clone()).collect(),
                result: st[r].clone(),
            })
            .collect();
        delta.sort();
        TreeAutomatonDoc {
            signature: embed_signature.then(|| SignatureDoc::from_signature(sig)),
            states: st.to_vec(),
            accept: st[a.accept()].clone(),
            delta,
        }
    }

    pub fn to_automaton(&self, ts: Arc<TreeSignature>) -> Result<BottomUpTreeAutomaton, FormatError> {
        let rules: Vec<(String, Vec<String>, String)> =
            self.delta.iter().map(|r| (r.label.clone(), r.args.clone(), r.result.clone())).collect();
        BottomUpTreeAutomaton::from_rules(ts, self.states.clone(), &self.accept, &rules).map_err(|e| invalid("delta", e))
    }
}

/// Direction and label lookups that report the document location.
pub fn dir_at(sig: &Signature, name: &str, at: &str) -> Result<DirId, FormatError> {
    sig.dir(name).map_err(|e| invalid(at, e))
}

pub fn label_at(sig: &Signature, name: &str, at: &str) -> Result<LabelId, FormatError> {
    sig.label_id(name).map_err(|e| invalid(at, e))
}

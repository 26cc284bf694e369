//! Finite pointed graphs over a signature.
//!
//! Edges are stored as a dense slot table: `adj[v * k + d]` holds `v + d`.
//! Every mutation goes through [`Body::connect`], which writes both halves
//! of an edge, so graphs assembled here are symmetric by construction.
//! Graphs decoded from raw tables are still re-checked by [`Graph::validate`].

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::signature::{DirId, LabelId, Signature, SignatureError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("slot ({node}, {dir}) is already used")]
    SlotTaken { node: String, dir: String },
    #[error("graph has no initial node")]
    NoInitial,
    #[error("graph is disconnected: node `{0}` is unreachable from the initial node")]
    Disconnected(String),
}

/// A labelled node set with a partial edge function, without an initial node.
/// Shared by whole graphs and by homomorphism patterns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Body {
    k: usize,
    ids: Vec<String>,
    labels: Vec<LabelId>,
    adj: Vec<Option<u32>>,
}

impl Body {
    pub fn new(num_directions: usize) -> Self {
        Body {
            k: num_directions,
            ids: Vec::new(),
            labels: Vec::new(),
            adj: Vec::new(),
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.ids.len()
    }

    pub fn num_directions(&self) -> usize {
        self.k
    }

    pub fn id(&self, v: usize) -> &str {
        &self.ids[v]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn label(&self, v: usize) -> LabelId {
        self.labels[v]
    }

    pub fn labels(&self) -> &[LabelId] {
        &self.labels
    }

    #[inline]
    pub fn neighbor(&self, v: usize, d: DirId) -> Option<usize> {
        self.adj[v * self.k + d.index()].map(|u| u as usize)
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    pub fn add_node(&mut self, id: impl Into<String>, label: LabelId) -> usize {
        self.ids.push(id.into());
        self.labels.push(label);
        self.adj.extend(std::iter::repeat_n(None, self.k));
        self.ids.len() - 1
    }

    pub fn relabel(&mut self, v: usize, label: LabelId) {
        self.labels[v] = label;
    }

    /// Sets `u + d = v` and `v + opp = u`. Both slots must be free.
    pub fn connect(&mut self, u: usize, d: DirId, v: usize, opp: DirId) -> Result<(), GraphError> {
        let a = u * self.k + d.index();
        let b = v * self.k + opp.index();
        if self.adj[a].is_some() {
            return Err(self.slot_taken(u, d));
        }
        if a != b && self.adj[b].is_some() {
            return Err(self.slot_taken(v, opp));
        }
        self.adj[a] = Some(v as u32);
        self.adj[b] = Some(u as u32);
        Ok(())
    }

    fn slot_taken(&self, v: usize, d: DirId) -> GraphError {
        GraphError::SlotTaken {
            node: self.ids[v].clone(),
            dir: format!("#{}", d.0),
        }
    }

    /// Writes a raw half-edge without touching the opposite slot.
    pub(crate) fn set_half(&mut self, v: usize, d: DirId, u: Option<usize>) {
        self.adj[v * self.k + d.index()] = u.map(|x| x as u32);
    }

    /// Copies `other` into `self`, prefixing node ids. Returns the index
    /// offset of the copied nodes.
    pub fn embed(&mut self, other: &Body, prefix: &str) -> usize {
        assert_eq!(self.k, other.k, "direction count mismatch");
        let offset = self.ids.len();
        for v in 0..other.num_nodes() {
            self.ids.push(format!("{prefix}{}", other.ids[v]));
            self.labels.push(other.labels[v]);
        }
        self.adj.extend(
            other
                .adj
                .iter()
                .map(|slot| slot.map(|u| u + offset as u32)),
        );
        offset
    }

    /// Undirected reachability classes, in order of least member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.num_nodes();
        let mut undirected: Vec<Vec<usize>> = vec![Vec::new(); n];
        for v in 0..n {
            for d in 0..self.k {
                if let Some(u) = self.adj[v * self.k + d] {
                    undirected[v].push(u as usize);
                    undirected[u as usize].push(v);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                for &u in &undirected[v] {
                    if !seen[u] {
                        seen[u] = true;
                        comp.push(u);
                        queue.push_back(u);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// A violated graph invariant; names the offending node and direction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphViolation {
    MissingEdge { node: String, dir: String },
    UnexpectedEdge { node: String, dir: String },
    Asymmetric { node: String, dir: String },
    InitialLabelOffInitial { node: String },
    InitialNodeNotInitial { node: String },
    Unreachable { node: String },
}

impl fmt::Display for GraphViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphViolation::MissingEdge { node, dir } => {
                write!(f, "missing edge at node `{node}` in direction `{dir}`")
            }
            GraphViolation::UnexpectedEdge { node, dir } => write!(
                f,
                "unexpected edge at node `{node}` in direction `{dir}` not allowed by its label"
            ),
            GraphViolation::Asymmetric { node, dir } => {
                write!(f, "asymmetric edge at node `{node}` in direction `{dir}`")
            }
            GraphViolation::InitialLabelOffInitial { node } => {
                write!(f, "initial label off the initial node at `{node}`")
            }
            GraphViolation::InitialNodeNotInitial { node } => {
                write!(f, "initial node `{node}` carries a non-initial label")
            }
            GraphViolation::Unreachable { node } => {
                write!(f, "node `{node}` is unreachable from the initial node")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    sig: Arc<Signature>,
    body: Body,
    initial: usize,
}

impl Graph {
    pub fn builder(sig: Arc<Signature>) -> GraphBuilder {
        GraphBuilder::new(sig)
    }

    pub(crate) fn from_body(sig: Arc<Signature>, body: Body, initial: usize) -> Self {
        Graph { sig, body, initial }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn body(&self) -> &Body {
        &self.body
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn num_nodes(&self) -> usize {
        self.body.num_nodes()
    }

    pub fn id(&self, v: usize) -> &str {
        self.body.id(v)
    }

    pub fn label(&self, v: usize) -> LabelId {
        self.body.label(v)
    }

    #[inline]
    pub fn neighbor(&self, v: usize, d: DirId) -> Option<usize> {
        self.body.neighbor(v, d)
    }

    pub fn find(&self, id: &str) -> Option<usize> {
        self.body.find(id)
    }

    /// Physical edges, each listed once from its lesser slot.
    pub fn edges(&self) -> Vec<(usize, DirId, usize)> {
        let mut out = Vec::new();
        for v in 0..self.num_nodes() {
            for d in self.sig.dir_ids() {
                if let Some(u) = self.neighbor(v, d) {
                    let back = self.sig.opposite(d);
                    if (v, d) <= (u, back) {
                        out.push((v, d, u));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Vec<GraphViolation> {
        let sig = &self.sig;
        let mut out = Vec::new();
        for v in 0..self.num_nodes() {
            let lab = sig.label(self.label(v));
            for d in sig.dir_ids() {
                let dn = || sig.dir_name(d).to_string();
                match (self.neighbor(v, d), lab.has_dir(d)) {
                    (None, true) => out.push(GraphViolation::MissingEdge {
                        node: self.id(v).into(),
                        dir: dn(),
                    }),
                    (Some(_), false) => out.push(GraphViolation::UnexpectedEdge {
                        node: self.id(v).into(),
                        dir: dn(),
                    }),
                    _ => {}
                }
                if let Some(u) = self.neighbor(v, d) {
                    if self.neighbor(u, sig.opposite(d)) != Some(v) {
                        out.push(GraphViolation::Asymmetric {
                            node: self.id(v).into(),
                            dir: dn(),
                        });
                    }
                }
            }
            if lab.initial && v != self.initial {
                out.push(GraphViolation::InitialLabelOffInitial {
                    node: self.id(v).into(),
                });
            }
            if !lab.initial && v == self.initial {
                out.push(GraphViolation::InitialNodeNotInitial {
                    node: self.id(v).into(),
                });
            }
        }
        let comps = self.body.components();
        for comp in comps.iter().filter(|c| !c.contains(&self.initial)) {
            for &v in comp {
                out.push(GraphViolation::Unreachable {
                    node: self.id(v).into(),
                });
            }
        }
        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }

    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        self.body.components()
    }

    /// Graphviz rendering for external viewers.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph G {\n");
        for v in 0..self.num_nodes() {
            let shape = if v == self.initial { "doublecircle" } else { "circle" };
            s.push_str(&format!(
                "  n{v} [label=\"{}:{}\", shape={shape}];\n",
                self.id(v),
                self.sig.label_name(self.label(v))
            ));
        }
        for (v, d, u) in self.edges() {
            s.push_str(&format!(
                "  n{v} -> n{u} [dir=none, taillabel=\"{}\", headlabel=\"{}\"];\n",
                self.sig.dir_name(d),
                self.sig.dir_name(self.sig.opposite(d))
            ));
        }
        s.push_str("}\n");
        s
    }
}

/// Builds a [`Graph`] node by node. Structural mistakes (unknown names,
/// reused slots) surface as errors; invariant checks are left to
/// [`Graph::validate`].
pub struct GraphBuilder {
    sig: Arc<Signature>,
    body: Body,
    initial: Option<usize>,
    index: HashMap<String, usize>,
}

impl GraphBuilder {
    pub fn new(sig: Arc<Signature>) -> Self {
        let k = sig.num_directions();
        GraphBuilder {
            sig,
            body: Body::new(k),
            initial: None,
            index: HashMap::new(),
        }
    }

    pub fn sig(&self) -> &Arc<Signature> {
        &self.sig
    }

    pub fn add_node(&mut self, id: impl Into<String>, label: LabelId) -> Result<usize, GraphError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(GraphError::DuplicateNode(id));
        }
        let v = self.body.add_node(id.clone(), label);
        self.index.insert(id, v);
        Ok(v)
    }

    pub fn add_named(&mut self, id: impl Into<String>, label: &str) -> Result<usize, GraphError> {
        let l = self.sig.label_id(label)?;
        self.add_node(id, l)
    }

    pub fn node(&self, id: &str) -> Result<usize, GraphError> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownNode(id.to_string()))
    }

    pub fn connect(&mut self, u: usize, d: DirId, v: usize) -> Result<(), GraphError> {
        let opp = self.sig.opposite(d);
        self.body.connect(u, d, v, opp).map_err(|e| self.named(e, u, d))
    }

    fn named(&self, e: GraphError, u: usize, d: DirId) -> GraphError {
        match e {
            GraphError::SlotTaken { .. } => GraphError::SlotTaken {
                node: self.body.id(u).to_string(),
                dir: self.sig.dir_name(d).to_string(),
            },
            other => other,
        }
    }

    pub fn connect_named(&mut self, from: &str, dir: &str, to: &str) -> Result<(), GraphError> {
        let u = self.node(from)?;
        let v = self.node(to)?;
        let d = self.sig.dir(dir)?;
        self.connect(u, d, v)
    }

    pub fn set_initial(&mut self, v: usize) {
        self.initial = Some(v);
    }

    pub fn neighbor(&self, v: usize, d: DirId) -> Option<usize> {
        self.body.neighbor(v, d)
    }

    /// Copies a fragment in, prefixing its node ids. Returns the offset.
    pub fn embed(&mut self, body: &Body, prefix: &str) -> Result<usize, GraphError> {
        for id in body.ids() {
            let full = format!("{prefix}{id}");
            if self.index.contains_key(&full) {
                return Err(GraphError::DuplicateNode(full));
            }
        }
        let offset = self.body.embed(body, prefix);
        for v in offset..self.body.num_nodes() {
            self.index.insert(self.body.id(v).to_string(), v);
        }
        Ok(offset)
    }

    pub fn into_body(self) -> Body {
        self.body
    }

    pub fn build(self) -> Result<Graph, GraphError> {
        let initial = self.initial.ok_or(GraphError::NoInitial)?;
        Ok(Graph {
            sig: self.sig,
            body: self.body,
            initial,
        })
    }
}

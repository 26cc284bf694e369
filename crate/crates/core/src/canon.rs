//! Canonical codes for pointed, direction-labelled graphs.
//!
//! Numbering nodes in breadth-first order from the initial node, expanding
//! directions in declaration order, is forced by the structure alone: an
//! isomorphism must fix the initial node and preserve every `v + d`. Writing
//! out labels and neighbour numbers in that order yields a code that is
//! equal for two graphs exactly when they are isomorphic.

use std::collections::VecDeque;

use crate::graph::{Body, Graph, GraphError};
use crate::signature::Signature;

/// Byte string identifying a pointed graph up to isomorphism.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u8>);

impl CanonicalCode {
    pub fn as_bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }
}

const UNDEFINED: u32 = u32::MAX;

pub fn canonical_encode(g: &Graph) -> Result<CanonicalCode, GraphError> {
    encode_body(g.sig(), g.body(), g.initial())
}

/// Encodes the component of `start`; every node must be reachable from it.
pub fn encode_body(sig: &Signature, body: &Body, start: usize) -> Result<CanonicalCode, GraphError> {
    let n = body.num_nodes();
    let mut order = vec![u32::MAX; n];
    let mut queue = VecDeque::with_capacity(n);
    let mut seq = Vec::with_capacity(n);
    order[start] = 0;
    queue.push_back(start);
    while let Some(v) = queue.pop_front() {
        seq.push(v);
        for d in sig.dir_ids() {
            if let Some(u) = body.neighbor(v, d) {
                if order[u] == u32::MAX {
                    order[u] = seq.len() as u32 + queue.len() as u32;
                    queue.push_back(u);
                }
            }
        }
    }
    if let Some(v) = order.iter().position(|&o| o == u32::MAX) {
        return Err(GraphError::Disconnected(body.id(v).to_string()));
    }
    let mut out = Vec::with_capacity(8 + n * 8);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for &v in &seq {
        let name = sig.label_name(body.label(v)).as_bytes();
        out.extend_from_slice(&(name.len() as u32).to_le_bytes());
        out.extend_from_slice(name);
        for d in sig.dir_ids() {
            let w = body.neighbor(v, d).map_or(UNDEFINED, |u| order[u]);
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    Ok(CanonicalCode(out))
}

//! Graph-walking automata over signatures, node-replacement homomorphisms,
//! the inverse-homomorphism construction, lower-bound witness families, and
//! an encoding of regular tree languages by two homomorphisms.

pub mod canon;
pub mod engine;
pub mod formats;
pub mod graph;
pub mod hom;
pub mod repro;
pub mod signature;
pub mod suites;
pub mod trees;
pub mod witnesses;

pub use canon::{canonical_encode, CanonicalCode};
pub use engine::{run, trace, Action, Configuration, Outcome, OutcomeKind, WalkingAutomaton};
pub use graph::{Body, Graph, GraphBuilder, GraphError, GraphViolation};
pub use signature::{DirId, LabelId, Signature, SignatureError, SignatureViolation};

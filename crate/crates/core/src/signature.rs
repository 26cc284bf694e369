//! Signatures: directions with an opposite map, node labels, and the
//! per-label direction sets that constrain graphs built over them.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Index of a direction in its signature's declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirId(pub u16);

impl DirId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a node label in its signature's declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelId(pub u16);

impl LabelId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Direction masks are `u64`, so a signature holds at most this many directions.
pub const MAX_DIRECTIONS: usize = 64;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Direction {
    pub name: String,
    pub opposite: DirId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeLabel {
    pub name: String,
    pub initial: bool,
    /// Sorted by declaration order.
    pub dirs: Vec<DirId>,
    mask: u64,
}

impl NodeLabel {
    pub fn has_dir(&self, d: DirId) -> bool {
        self.mask & (1u64 << d.0) != 0
    }
}

/// Errors raised while assembling a signature from names.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SignatureError {
    #[error("duplicate direction `{0}`")]
    DuplicateDirection(String),
    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown direction `{0}`")]
    UnknownDirection(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("label `{label}` lists direction `{dir}` twice")]
    RepeatedLabelDirection { label: String, dir: String },
    #[error("too many directions ({0}); at most {MAX_DIRECTIONS} are supported")]
    TooManyDirections(usize),
}

/// A violated signature invariant. Violations are data, not failures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SignatureViolation {
    OppositeNotInvolutive { direction: String },
    NoInitialLabel,
}

impl fmt::Display for SignatureViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignatureViolation::OppositeNotInvolutive { direction } => {
                write!(f, "opposite not involutive at direction `{direction}`")
            }
            SignatureViolation::NoInitialLabel => write!(f, "no initial label"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    directions: Vec<Direction>,
    labels: Vec<NodeLabel>,
    dir_index: HashMap<String, DirId>,
    label_index: HashMap<String, LabelId>,
}

impl Signature {
    pub fn builder() -> SignatureBuilder {
        SignatureBuilder::default()
    }

    /// Assembles a signature from named parts. The opposite map is taken as
    /// given; use [`Signature::validate`] to check it.
    pub fn from_parts(
        directions: &[(String, String)],
        labels: &[(String, bool, Vec<String>)],
    ) -> Result<Self, SignatureError> {
        if directions.len() > MAX_DIRECTIONS {
            return Err(SignatureError::TooManyDirections(directions.len()));
        }
        let mut dir_index = HashMap::new();
        for (i, (name, _)) in directions.iter().enumerate() {
            if dir_index.insert(name.clone(), DirId(i as u16)).is_some() {
                return Err(SignatureError::DuplicateDirection(name.clone()));
            }
        }
        let mut dirs = Vec::with_capacity(directions.len());
        for (name, opp) in directions {
            let opposite = *dir_index
                .get(opp)
                .ok_or_else(|| SignatureError::UnknownDirection(opp.clone()))?;
            dirs.push(Direction {
                name: name.clone(),
                opposite,
            });
        }
        let mut label_index = HashMap::new();
        let mut out_labels = Vec::with_capacity(labels.len());
        for (i, (name, initial, ds)) in labels.iter().enumerate() {
            if label_index.insert(name.clone(), LabelId(i as u16)).is_some() {
                return Err(SignatureError::DuplicateLabel(name.clone()));
            }
            let mut mask = 0u64;
            for d in ds {
                let id = *dir_index
                    .get(d)
                    .ok_or_else(|| SignatureError::UnknownDirection(d.clone()))?;
                if mask & (1 << id.0) != 0 {
                    return Err(SignatureError::RepeatedLabelDirection {
                        label: name.clone(),
                        dir: d.clone(),
                    });
                }
                mask |= 1 << id.0;
            }
            let dirs_sorted = (0..directions.len() as u16)
                .map(DirId)
                .filter(|d| mask & (1 << d.0) != 0)
                .collect();
            out_labels.push(NodeLabel {
                name: name.clone(),
                initial: *initial,
                dirs: dirs_sorted,
                mask,
            });
        }
        Ok(Signature {
            directions: dirs,
            labels: out_labels,
            dir_index,
            label_index,
        })
    }

    pub fn validate(&self) -> Vec<SignatureViolation> {
        let mut out = Vec::new();
        for d in &self.directions {
            let back = self.directions[d.opposite.index()].opposite;
            if self.directions[back.index()].name != d.name {
                out.push(SignatureViolation::OppositeNotInvolutive {
                    direction: d.name.clone(),
                });
            }
        }
        if !self.labels.iter().any(|l| l.initial) {
            out.push(SignatureViolation::NoInitialLabel);
        }
        out
    }

    pub fn num_directions(&self) -> usize {
        self.directions.len()
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn directions(&self) -> &[Direction] {
        &self.directions
    }

    pub fn labels(&self) -> &[NodeLabel] {
        &self.labels
    }

    pub fn dir_ids(&self) -> impl Iterator<Item = DirId> {
        (0..self.directions.len() as u16).map(DirId)
    }

    pub fn label_ids(&self) -> impl Iterator<Item = LabelId> {
        (0..self.labels.len() as u16).map(LabelId)
    }

    pub fn initial_labels(&self) -> impl Iterator<Item = LabelId> + '_ {
        self.label_ids().filter(|&l| self.label(l).initial)
    }

    pub fn direction(&self, d: DirId) -> &Direction {
        &self.directions[d.index()]
    }

    pub fn dir_name(&self, d: DirId) -> &str {
        &self.directions[d.index()].name
    }

    pub fn opposite(&self, d: DirId) -> DirId {
        self.directions[d.index()].opposite
    }

    pub fn label(&self, l: LabelId) -> &NodeLabel {
        &self.labels[l.index()]
    }

    pub fn label_name(&self, l: LabelId) -> &str {
        &self.labels[l.index()].name
    }

    pub fn dir(&self, name: &str) -> Result<DirId, SignatureError> {
        self.dir_index
            .get(name)
            .copied()
            .ok_or_else(|| SignatureError::UnknownDirection(name.to_string()))
    }

    pub fn label_id(&self, name: &str) -> Result<LabelId, SignatureError> {
        self.label_index
            .get(name)
            .copied()
            .ok_or_else(|| SignatureError::UnknownLabel(name.to_string()))
    }

    pub fn has_dir(&self, l: LabelId, d: DirId) -> bool {
        self.labels[l.index()].has_dir(d)
    }
}

/// Incremental construction of a [`Signature`] in declaration order.
#[derive(Default, Debug, Clone)]
pub struct SignatureBuilder {
    directions: Vec<(String, String)>,
    labels: Vec<(String, bool, Vec<String>)>,
}

impl SignatureBuilder {
    /// Declares `d` and `e` as mutually opposite, in that order.
    pub fn pair(mut self, d: &str, e: &str) -> Self {
        self.directions.push((d.into(), e.into()));
        self.directions.push((e.into(), d.into()));
        self
    }

    /// Declares a direction that is its own opposite.
    pub fn self_opposite(mut self, d: &str) -> Self {
        self.directions.push((d.into(), d.into()));
        self
    }

    pub fn label<S: AsRef<str>>(mut self, name: &str, initial: bool, dirs: &[S]) -> Self {
        self.labels.push((
            name.into(),
            initial,
            dirs.iter().map(|s| s.as_ref().to_string()).collect(),
        ));
        self
    }

    pub fn build(self) -> Result<Signature, SignatureError> {
        Signature::from_parts(&self.directions, &self.labels)
    }
}

use std::path::Path;
use std::sync::Arc;

use serde_json::Value;

use gwa_core::formats::{parse, AutomatonDoc, FragmentDoc, GraphDoc, HomDoc, SignatureDoc, TreeAutomatonDoc};
use gwa_core::hom::Homomorphism;
use gwa_core::trees::{BottomUpTreeAutomaton, TreeSignature};
use gwa_core::witnesses::PluggableSubgraph;
use gwa_core::{Graph, Signature, WalkingAutomaton};

use crate::report::{CliError, CliResult, Report};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Signature,
    Graph,
    Automaton,
    Hom,
    TreeAutomaton,
    Fragment,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Signature => "signature",
            Kind::Graph => "graph",
            Kind::Automaton => "automaton",
            Kind::Hom => "homomorphism",
            Kind::TreeAutomaton => "tree automaton",
            Kind::Fragment => "fragment",
        }
    }
}

/// Guesses the document kind from its top-level keys.
pub fn detect(text: &str, what: &str) -> CliResult<Kind> {
    let v: Value = parse(text, what)?;
    let has = |k: &str| v.get(k).is_some();
    Ok(if has("source_sig") {
        Kind::Hom
    } else if has("ports") {
        Kind::Fragment
    } else if has("delta") {
        Kind::TreeAutomaton
    } else if has("transitions") {
        Kind::Automaton
    } else if has("edges") {
        Kind::Graph
    } else if has("directions") {
        Kind::Signature
    } else {
        return Err(CliError(format!("{what}: unrecognised document")));
    })
}

pub fn name(path: &Path) -> String {
    path.display().to_string()
}

pub fn signature(r: &mut Report, path: &Path) -> CliResult<Signature> {
    let text = r.read(path)?;
    let doc: SignatureDoc = parse(&text, &name(path))?;
    doc.to_signature().map_err(|e| CliError(format!("{}: {e}", name(path))))
}

/// The embedded signature, else the one from `--sig`, else `fallback`.
fn pick_sig(
    r: &mut Report,
    embedded: Option<&SignatureDoc>,
    sig_path: Option<&Path>,
    fallback: Option<&Arc<Signature>>,
    what: &str,
) -> CliResult<Arc<Signature>> {
    if let Some(doc) = embedded {
        return Ok(Arc::new(doc.to_signature().map_err(|e| CliError(format!("{what}: {e}")))?));
    }
    if let Some(p) = sig_path {
        return Ok(Arc::new(signature(r, p)?));
    }
    fallback
        .cloned()
        .ok_or_else(|| CliError(format!("{what}: no embedded signature; pass --sig")))
}

pub fn graph(r: &mut Report, path: &Path, sig: Option<&Path>, fallback: Option<&Arc<Signature>>) -> CliResult<Graph> {
    let text = r.read(path)?;
    let doc: GraphDoc = parse(&text, &name(path))?;
    let s = pick_sig(r, doc.signature.as_ref(), sig, fallback, &name(path))?;
    doc.to_graph(s).map_err(|e| CliError(format!("{}: {e}", name(path))))
}

pub fn automaton(
    r: &mut Report,
    path: &Path,
    sig: Option<&Path>,
    fallback: Option<&Arc<Signature>>,
) -> CliResult<WalkingAutomaton> {
    let text = r.read(path)?;
    let doc: AutomatonDoc = parse(&text, &name(path))?;
    let s = pick_sig(r, doc.signature.as_ref(), sig, fallback, &name(path))?;
    doc.to_automaton(s).map_err(|e| CliError(format!("{}: {e}", name(path))))
}

pub fn hom(r: &mut Report, path: &Path) -> CliResult<Homomorphism> {
    let text = r.read(path)?;
    let doc: HomDoc = parse(&text, &name(path))?;
    doc.to_hom().map_err(|e| CliError(format!("{}: {e}", name(path))))
}

pub fn tree_automaton(r: &mut Report, path: &Path, sig: Option<&Path>) -> CliResult<BottomUpTreeAutomaton> {
    let text = r.read(path)?;
    let doc: TreeAutomatonDoc = parse(&text, &name(path))?;
    let s = pick_sig(r, doc.signature.as_ref(), sig, None, &name(path))?;
    let ts = Arc::new(TreeSignature::new(s).map_err(|e| CliError(format!("{}: {e}", name(path))))?);
    doc.to_automaton(ts).map_err(|e| CliError(format!("{}: {e}", name(path))))
}

pub fn fragment(r: &mut Report, path: &Path) -> CliResult<PluggableSubgraph> {
    let text = r.read(path)?;
    let doc: FragmentDoc = parse(&text, &name(path))?;
    doc.to_fragment().map_err(|e| CliError(format!("{}: {e}", name(path))))
}

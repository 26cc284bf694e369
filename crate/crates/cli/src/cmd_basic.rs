use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::Args;
use serde::Serialize;

use gwa_core::engine::{agree_on, EngineError};
use gwa_core::trees::validate_tree_signature;
use gwa_core::{run as run_automaton, trace as trace_automaton, Graph, WalkingAutomaton};

use crate::load::{self, Kind};
use crate::report::{CliError, CliResult, Report};
use crate::Ctx;

#[derive(Args)]
pub struct ValidateArgs {
    /// Document to check.
    pub file: PathBuf,
    /// Signature for graphs and automata without an embedded one.
    #[arg(long)]
    pub sig: Option<PathBuf>,
}

#[derive(Args)]
pub struct RunArgs {
    #[arg(long, short)]
    pub automaton: PathBuf,
    #[arg(long, short)]
    pub graph: PathBuf,
    #[arg(long)]
    pub sig: Option<PathBuf>,
}

#[derive(Args)]
pub struct TraceArgs {
    #[arg(long, short)]
    pub automaton: PathBuf,
    #[arg(long, short)]
    pub graph: PathBuf,
    #[arg(long)]
    pub sig: Option<PathBuf>,
    /// Longest prefix to print.
    #[arg(long, default_value_t = 1000)]
    pub max_len: usize,
}

#[derive(Args)]
pub struct AgreeArgs {
    #[arg(long)]
    pub first: PathBuf,
    #[arg(long)]
    pub second: PathBuf,
    /// Graphs to compare on.
    #[arg(required = true)]
    pub graphs: Vec<PathBuf>,
    #[arg(long)]
    pub sig: Option<PathBuf>,
}

#[derive(Serialize)]
struct Validation {
    kind: &'static str,
    violations: Vec<String>,
}

pub fn validate(ctx: &Ctx, a: ValidateArgs) -> CliResult<i32> {
    let mut r = Report::new("validate");
    let text = r.read(&a.file)?;
    let what = load::name(&a.file);
    let kind = load::detect(&text, &what)?;
    let violations: Vec<String> = match kind {
        Kind::Signature => {
            let s = load::signature(&mut r, &a.file)?;
            let mut v: Vec<String> = s.validate().iter().map(|x| x.to_string()).collect();
            let looks_like_tree = s.dir_ids().next().map(|d| s.dir_name(d) == "+1").unwrap_or(false);
            if looks_like_tree {
                v.extend(validate_tree_signature(&s).iter().map(|x| format!("tree signature: {x}")));
            }
            v
        }
        Kind::Graph => {
            let g = load::graph(&mut r, &a.file, a.sig.as_deref(), None)?;
            let mut v: Vec<String> = g.sig().validate().iter().map(|x| format!("signature: {x}")).collect();
            v.extend(g.validate().iter().map(|x| x.to_string()));
            v
        }
        Kind::Automaton => {
            let au = load::automaton(&mut r, &a.file, a.sig.as_deref(), None)?;
            for q in au.unreachable_states() {
                r.line(format!("note: state `{q}` is unreachable"));
            }
            au.sig().validate().iter().map(|x| format!("signature: {x}")).collect()
        }
        Kind::Hom => {
            let h = load::hom(&mut r, &a.file)?;
            h.validate().iter().map(|x| x.to_string()).collect()
        }
        Kind::Fragment => {
            let f = load::fragment(&mut r, &a.file)?;
            let p = &f.pattern;
            let mut v: Vec<String> = p.sig().validate().iter().map(|x| format!("signature: {x}")).collect();
            v.extend(p.validate_shape().iter().map(|x| x.to_string()));
            if p.ports().len() != 1 {
                v.push(format!("a fragment has one external edge, found {}", p.ports().len()));
            }
            let initial = p.initial_nodes().len();
            if initial > usize::from(f.has_initial) {
                v.push(format!("{initial} initial-labelled nodes, has_initial is {}", f.has_initial));
            } else if f.has_initial && initial == 0 {
                v.push("has_initial is set but no node carries an initial label".into());
            }
            v
        }
        Kind::TreeAutomaton => {
            let t = load::tree_automaton(&mut r, &a.file, a.sig.as_deref())?;
            if t.is_empty() {
                r.line("note: the automaton accepts no tree");
            }
            Vec::new()
        }
    };
    r.line(format!("{what}: {}", kind.name()));
    if violations.is_empty() {
        r.line("no violations");
    }
    for v in &violations {
        r.line(format!("violation: {v}"));
    }
    r.fail(violations.len());
    r.results(Validation {
        kind: kind.name(),
        violations,
    });
    Ok(r.emit(ctx.format))
}

fn checked_pair(r: &mut Report, a: &Path, g: &Path, sig: Option<&Path>) -> CliResult<(WalkingAutomaton, Graph)> {
    let au = load::automaton(r, a, sig, None)?;
    let gr = load::graph(r, g, sig, Some(au.sig()))?;
    ensure_valid(&gr)?;
    Ok((au, gr))
}

pub fn ensure_valid(g: &Graph) -> CliResult<()> {
    let v = g.validate();
    if v.is_empty() {
        return Ok(());
    }
    let list: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    Err(CliError(format!("invalid graph: {}", list.join("; "))))
}

fn engine(e: EngineError) -> CliError {
    CliError(e.to_string())
}

pub fn run(ctx: &Ctx, a: RunArgs) -> CliResult<i32> {
    let mut r = Report::new("run");
    let (au, g) = checked_pair(&mut r, &a.automaton, &a.graph, a.sig.as_deref())?;
    let out = run_automaton(&au, &g).map_err(engine)?;
    r.param("states", au.num_states());
    r.param("nodes", g.num_nodes());
    r.line(format!(
        "{} after {} steps ({} states, {} nodes)",
        out.kind(),
        out.steps(),
        au.num_states(),
        g.num_nodes()
    ));
    r.results(out);
    Ok(r.emit(ctx.format))
}

#[derive(Serialize)]
struct TraceStep {
    state: String,
    node: String,
}

pub fn trace(ctx: &Ctx, a: TraceArgs) -> CliResult<i32> {
    let mut r = Report::new("trace");
    let (au, g) = checked_pair(&mut r, &a.automaton, &a.graph, a.sig.as_deref())?;
    let t = trace_automaton(&au, &g, a.max_len).map_err(engine)?;
    r.param("max_len", a.max_len);
    let steps: Vec<TraceStep> = t
        .iter()
        .map(|c| TraceStep {
            state: au.state_name(c.state).to_string(),
            node: g.id(c.node).to_string(),
        })
        .collect();
    for (i, s) in steps.iter().enumerate() {
        r.line(format!("{i:>6}  {}  {}", s.state, s.node));
    }
    r.results(steps);
    Ok(r.emit(ctx.format))
}

pub fn agree(ctx: &Ctx, a: AgreeArgs) -> CliResult<i32> {
    let mut r = Report::new("agree");
    let a1 = load::automaton(&mut r, &a.first, a.sig.as_deref(), None)?;
    let sig = Arc::clone(a1.sig());
    let a2 = load::automaton(&mut r, &a.second, a.sig.as_deref(), Some(&sig))?;
    let mut suite = Vec::new();
    for p in &a.graphs {
        let g = load::graph(&mut r, p, a.sig.as_deref(), Some(&sig))?;
        ensure_valid(&g)?;
        suite.push(g);
    }
    let rep = agree_on(&a1, &a2, &suite).map_err(engine)?;
    let bad = rep.acceptance_disagreements().len();
    for ga in &rep.entries {
        r.line(format!(
            "{}: {} vs {}",
            a.graphs[ga.index].display(),
            ga.first,
            ga.second
        ));
    }
    r.line(format!(
        "{bad} acceptance disagreements, {} full disagreements",
        rep.full_disagreements().len()
    ));
    r.fail(bad);
    r.results(rep);
    Ok(r.emit(ctx.format))
}

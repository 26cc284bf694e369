use std::path::PathBuf;

use clap::{Subcommand, ValueEnum};

use gwa_core::formats::{to_canonical_json, AutomatonDoc, GraphDoc};
use gwa_core::hom::{apply, invert, verify_inverse, InvertedState};
use gwa_core::repro::Suite;
use gwa_core::Graph;

use crate::cmd_basic::ensure_valid;
use crate::load;
use crate::report::{write_output, CliError, CliResult, Report};
use crate::{Ctx, OutArgs};

#[derive(Subcommand)]
pub enum HomCommand {
    /// Check pattern shapes and direction compatibility.
    Validate { hom: PathBuf },
    /// Image of a graph.
    Apply {
        hom: PathBuf,
        graph: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Automaton for the inverse image of an automaton's language.
    Invert {
        hom: PathBuf,
        automaton: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Compare the inverted automaton with the original on a suite.
    Verify {
        hom: PathBuf,
        automaton: PathBuf,
        /// Graph files over the source signature.
        #[arg(long, num_args = 1.., conflicts_with = "suite")]
        graphs: Vec<PathBuf>,
        /// Built-in suite over the built-in homomorphism's source.
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteArg {
    Small,
    Random,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Small => Suite::Small,
            SuiteArg::Random => Suite::Random,
        }
    }
}

pub fn dispatch(ctx: &Ctx, c: HomCommand) -> CliResult<i32> {
    match c {
        HomCommand::Validate { hom } => {
            let mut r = Report::new("hom validate");
            let h = load::hom(&mut r, &hom)?;
            let v: Vec<String> = h.validate().iter().map(|x| x.to_string()).collect();
            if v.is_empty() {
                r.line("no violations");
            }
            for x in &v {
                r.line(format!("violation: {x}"));
            }
            r.fail(v.len());
            r.results(&v);
            Ok(r.emit(ctx.format))
        }
        HomCommand::Apply { hom, graph, out } => {
            let mut r = Report::new("hom apply");
            let h = load::hom(&mut r, &hom)?;
            let g = load::graph(&mut r, &graph, None, Some(h.source()))?;
            ensure_valid(&g)?;
            let img = apply(&h, &g)?;
            emit_graph(&img.graph, &out)?;
            finish_artifact(ctx, r, &out, |r| {
                r.line(format!("{} nodes -> {} nodes", g.num_nodes(), img.graph.num_nodes()));
                r.results(serde_json::json!({"source_nodes": g.num_nodes(), "image_nodes": img.graph.num_nodes()}));
            })
        }
        HomCommand::Invert { hom, automaton, out } => {
            let mut r = Report::new("hom invert");
            let h = load::hom(&mut r, &hom)?;
            let a = load::automaton(&mut r, &automaton, None, Some(h.target()))?;
            let inv = invert(&a, &h)?;
            let doc = AutomatonDoc::from_automaton(&inv.automaton, true);
            write_output(out.output.as_deref(), &to_canonical_json(&doc))?;
            let k = h.source().num_directions();
            let form = match inv.meaning.first() {
                Some(InvertedState::Answer) => "single answer state".to_string(),
                Some(InvertedState::Start) => format!("{} x {k} + 1", a.num_states()),
                _ => format!("{} x {k}", a.num_states()),
            };
            let unreachable = inv.unreachable_states();
            finish_artifact(ctx, r, &out, |r| {
                r.line(format!("{} states ({form}), {} unreachable", inv.num_states(), unreachable.len()));
                r.results(serde_json::json!({
                    "states": inv.num_states(),
                    "source_directions": k,
                    "original_states": a.num_states(),
                    "unreachable": unreachable,
                }));
            })
        }
        HomCommand::Verify {
            hom,
            automaton,
            graphs,
            suite,
        } => {
            let mut r = Report::new("hom verify");
            let h = load::hom(&mut r, &hom)?;
            let a = load::automaton(&mut r, &automaton, None, Some(h.target()))?;
            let suite_graphs: Vec<Graph> = match suite {
                Some(s) => {
                    let s = Suite::from(s);
                    let builtin = s.hom();
                    if **builtin.source() != **h.source() {
                        return Err(CliError("built-in suites need the built-in source signature".into()));
                    }
                    r.param("suite", s);
                    r.param("seed", ctx.seed);
                    s.graphs(ctx.seed)
                }
                None => {
                    if graphs.is_empty() {
                        return Err(CliError("pass --graphs or --suite".into()));
                    }
                    let mut v = Vec::new();
                    for p in &graphs {
                        let g = load::graph(&mut r, p, None, Some(h.source()))?;
                        ensure_valid(&g)?;
                        v.push(g);
                    }
                    v
                }
            };
            let rep = verify_inverse(&a, &h, &suite_graphs)?;
            r.line(format!(
                "{} graphs, {} inverted states, {} accepted, {} entries aligned, {} disagreements",
                rep.graphs_checked,
                rep.inverted_states,
                rep.accepted,
                rep.entries_aligned,
                rep.disagreements.len()
            ));
            for d in rep.disagreements.iter().take(20) {
                r.line(format!("disagreement on graph {}: {:?}", d.graph, d.kind));
            }
            r.fail(rep.disagreements.len());
            r.results(&rep);
            Ok(r.emit(ctx.format))
        }
    }
}

/// Writes a graph as JSON or DOT.
pub fn emit_graph(g: &Graph, out: &OutArgs) -> CliResult<()> {
    let text = if out.dot {
        g.to_dot()
    } else {
        to_canonical_json(&GraphDoc::from_graph(g, true))
    };
    write_output(out.output.as_deref(), &text)
}

/// The report follows the document only when the document went to a file.
pub fn finish_artifact(ctx: &Ctx, mut r: Report, out: &OutArgs, fill: impl FnOnce(&mut Report)) -> CliResult<i32> {
    fill(&mut r);
    if let Some(p) = &out.output {
        r.param("output", p.display().to_string());
        return Ok(r.emit(ctx.format));
    }
    Ok(0)
}

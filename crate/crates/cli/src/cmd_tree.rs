use std::path::PathBuf;

use clap::Subcommand;

use gwa_core::formats::{to_canonical_json, HomDoc, SignatureDoc};
use gwa_core::trees::{
    build_characterization, eval_dta_graph, validate_tree_signature, verify_characterization, CharacterizationReport,
    TreeSignature,
};

use crate::cmd_basic::ensure_valid;
use crate::load::{self, Kind};
use crate::report::{CliError, CliResult, Report};
use crate::Ctx;

#[derive(Subcommand)]
pub enum TreeCommand {
    /// Check a tree signature, a tree, or a tree automaton.
    Validate {
        file: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Evaluate a tree automaton on a tree.
    Eval {
        #[arg(long, short)]
        automaton: PathBuf,
        #[arg(long, short)]
        tree: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
    },
    /// Write the signatures and homomorphisms of the characterization.
    Characterize {
        #[arg(long, short)]
        automaton: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        /// Output directory.
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Exhaustively check the characterization on small trees.
    Verify {
        #[arg(long, short)]
        automaton: PathBuf,
        #[arg(long)]
        sig: Option<PathBuf>,
        #[arg(long, default_value_t = 7)]
        max_nodes: usize,
    },
}

pub fn dispatch(ctx: &Ctx, c: TreeCommand) -> CliResult<i32> {
    match c {
        TreeCommand::Validate { file, sig } => {
            let mut r = Report::new("tree validate");
            let text = r.read(&file)?;
            let kind = load::detect(&text, &load::name(&file))?;
            let violations: Vec<String> = match kind {
                Kind::Signature => {
                    let s = load::signature(&mut r, &file)?;
                    let mut v: Vec<String> = s.validate().iter().map(|x| x.to_string()).collect();
                    v.extend(validate_tree_signature(&s).iter().map(|x| x.to_string()));
                    v
                }
                Kind::Graph => {
                    let g = load::graph(&mut r, &file, sig.as_deref(), None)?;
                    let mut v: Vec<String> = validate_tree_signature(g.sig()).iter().map(|x| x.to_string()).collect();
                    v.extend(g.validate().iter().map(|x| x.to_string()));
                    v
                }
                Kind::TreeAutomaton => {
                    let a = load::tree_automaton(&mut r, &file, sig.as_deref())?;
                    if a.is_empty() {
                        r.line("note: the automaton accepts no tree");
                    }
                    Vec::new()
                }
                other => return Err(CliError(format!("expected a tree document, found a {}", other.name()))),
            };
            r.line(format!("{}: {}", load::name(&file), kind.name()));
            if violations.is_empty() {
                r.line("no violations");
            }
            for v in &violations {
                r.line(format!("violation: {v}"));
            }
            r.fail(violations.len());
            r.results(&violations);
            Ok(r.emit(ctx.format))
        }
        TreeCommand::Eval { automaton, tree, sig } => {
            let mut r = Report::new("tree eval");
            let a = load::tree_automaton(&mut r, &automaton, sig.as_deref())?;
            let g = load::graph(&mut r, &tree, None, Some(a.tree_sig().sig()))?;
            ensure_valid(&g)?;
            let (q, accepted) = eval_dta_graph(&a, &g)?;
            let state = &a.states()[q];
            r.line(format!("root state {state}, {}", if accepted { "accepted" } else { "rejected" }));
            r.results(serde_json::json!({ "state": state, "accepted": accepted }));
            Ok(r.emit(ctx.format))
        }
        TreeCommand::Characterize { automaton, sig, output } => {
            let mut r = Report::new("tree characterize");
            let a = load::tree_automaton(&mut r, &automaton, sig.as_deref())?;
            let b = build_characterization(&a)?;
            std::fs::create_dir_all(&output)?;
            let files: [(&str, String); 5] = [
                ("s_reg.json", sig_json(&b.s_reg)),
                ("s_mid.json", sig_json(&b.s_mid)),
                ("s_comp.json", sig_json(&b.s_comp)),
                ("g.json", to_canonical_json(&HomDoc::from_hom(&b.g))),
                ("h.json", to_canonical_json(&HomDoc::from_hom(&b.h))),
            ];
            for (name, text) in &files {
                std::fs::write(output.join(name), text)?;
                r.line(format!("wrote {}", output.join(name).display()));
            }
            r.param("output", output.display().to_string());
            r.results(serde_json::json!({
                "states": b.n,
                "labels": {
                    "reg": b.s_reg.sig().num_labels(),
                    "mid": b.s_mid.sig().num_labels(),
                    "comp": b.s_comp.sig().num_labels(),
                },
                "files": files.iter().map(|f| f.0).collect::<Vec<_>>(),
            }));
            Ok(r.emit(ctx.format))
        }
        TreeCommand::Verify { automaton, sig, max_nodes } => {
            let mut r = Report::new("tree verify");
            let a = load::tree_automaton(&mut r, &automaton, sig.as_deref())?;
            let b = build_characterization(&a)?;
            let rep = verify_characterization(&b, max_nodes)?;
            r.param("max_nodes", max_nodes);
            characterization_report(&mut r, "", &rep);
            r.results(&rep);
            Ok(r.emit(ctx.format))
        }
    }
}

fn sig_json(ts: &TreeSignature) -> String {
    to_canonical_json(&SignatureDoc::from_signature(ts.sig()))
}

pub fn characterization_report(r: &mut Report, name: &str, rep: &CharacterizationReport) {
    r.line(format!(
        "{name}{} trees ({} accepted), {} annotated trees ({} valid runs), {} fishbones measured, {} counterexamples",
        rep.trees_checked,
        rep.trees_accepted,
        rep.annotated_checked,
        rep.annotated_valid,
        rep.edges_measured,
        rep.counterexamples.len()
    ));
    for c in rep.counterexamples.iter().take(20) {
        r.line(format!("  {}: {}", c.check, c.tree));
    }
    r.fail(rep.counterexamples.len());
}

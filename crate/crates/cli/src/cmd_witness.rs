use clap::{Args, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use gwa_core::formats::{to_canonical_json, AutomatonDoc, FragmentDoc, HomDoc, SignatureDoc};
use gwa_core::witnesses::{exhaustive_probe, HVariant, PluggableSubgraph, ProbeReport, SweepReport, Witnesses};
use gwa_core::DirId;

use crate::cmd_hom::{emit_graph, finish_artifact};
use crate::report::{write_output, CliError, CliResult, Report};
use crate::{Ctx, OutArgs};

#[derive(Args, Clone, Copy)]
pub struct Size {
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    #[arg(long, default_value_t = 9)]
    pub k: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum VariantArg {
    Start,
    Fake,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum AutomatonKind {
    Escape,
    Counter,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum PairArg {
    H,
    F,
}

#[derive(Subcommand)]
pub enum WitnessCommand {
    /// The two-chain gadget.
    #[command(name = "H")]
    H {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value = "start")]
        variant: VariantArg,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The chain with one gadget per position.
    #[command(name = "F")]
    F {
        #[command(flatten)]
        size: Size,
        #[arg(long, default_value = "+a", allow_hyphen_values = true)]
        d: String,
        /// Position of the start gadget; omit for none.
        #[arg(long)]
        i: Option<usize>,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Counter graph G(i, j, d).
    #[command(name = "G-counter")]
    GCounter {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        i: usize,
        #[arg(long)]
        j: usize,
        #[arg(long, default_value = "+a", allow_hyphen_values = true)]
        d: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Probe graph G(i, d, d').
    #[command(name = "G-probe")]
    GProbe {
        #[command(flatten)]
        size: Size,
        #[arg(long)]
        i: usize,
        #[arg(long, default_value = "+a", allow_hyphen_values = true)]
        d: String,
        #[arg(long, default_value = "+a", allow_hyphen_values = true)]
        dprime: String,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The witness signature.
    Sig {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The ring homomorphism.
    Hom {
        #[command(flatten)]
        size: Size,
        #[command(flatten)]
        out: OutArgs,
    },
    /// The escape or counter automaton.
    Automaton {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value = "counter")]
        kind: AutomatonKind,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Acceptance tables of the counter automaton.
    Sweep {
        #[command(flatten)]
        size: Size,
    },
    /// Exhaustive distinguishability probe over all automata of a size.
    Probe {
        #[command(flatten)]
        size: Size,
        #[arg(long, value_enum, default_value = "h")]
        pair: PairArg,
        #[arg(long, default_value_t = 2)]
        states: usize,
        #[arg(long, default_value = "+a", allow_hyphen_values = true)]
        d: String,
    },
}

fn family(k: usize) -> CliResult<Witnesses> {
    Ok(if k >= 9 { Witnesses::theorem2(k)? } else { Witnesses::lemma(k)? })
}

fn dir(w: &Witnesses, name: &str) -> CliResult<DirId> {
    w.sig().dir(name).map_err(|e| CliError(format!("--d: {e}")))
}

fn emit_fragment(ctx: &Ctx, r: Report, p: &PluggableSubgraph, out: &OutArgs) -> CliResult<i32> {
    if out.dot {
        return Err(CliError("fragments have no DOT export; use JSON".into()));
    }
    write_output(out.output.as_deref(), &to_canonical_json(&FragmentDoc::from_fragment(p)))?;
    let nodes = p.pattern.num_nodes();
    finish_artifact(ctx, r, out, |r| {
        r.line(format!("{nodes} nodes"));
        r.results(serde_json::json!({ "nodes": nodes }));
    })
}

pub fn dispatch(ctx: &Ctx, c: WitnessCommand) -> CliResult<i32> {
    match c {
        WitnessCommand::H { size, variant, out } => {
            let w = family(size.k)?;
            let v = match variant {
                VariantArg::Start => HVariant::Start,
                VariantArg::Fake => HVariant::Fake,
            };
            let h = w.build_h(size.n, v)?;
            emit_fragment(ctx, Report::new("witness H"), &h, &out)
        }
        WitnessCommand::F { size, d, i, out } => {
            let w = family(size.k)?;
            let f = w.build_f(size.n, dir(&w, &d)?, i)?;
            emit_fragment(ctx, Report::new("witness F"), &f, &out)
        }
        WitnessCommand::GCounter { size, i, j, d, out } => {
            let w = Witnesses::theorem2(size.k)?;
            let g = w.g_counter(size.n, i, j, dir(&w, &d)?)?;
            emit_graph(&g, &out)?;
            finish_artifact(ctx, Report::new("witness G-counter"), &out, |r| r.line(format!("{} nodes", g.num_nodes())))
        }
        WitnessCommand::GProbe { size, i, d, dprime, out } => {
            let w = Witnesses::theorem2(size.k)?;
            let g = w.g_probe(size.n, i, dir(&w, &d)?, dir(&w, &dprime)?)?;
            emit_graph(&g, &out)?;
            finish_artifact(ctx, Report::new("witness G-probe"), &out, |r| r.line(format!("{} nodes", g.num_nodes())))
        }
        WitnessCommand::Sig { size, out } => {
            let w = family(size.k)?;
            write_output(out.output.as_deref(), &to_canonical_json(&SignatureDoc::from_signature(w.sig())))?;
            finish_artifact(ctx, Report::new("witness sig"), &out, |r| {
                r.line(format!("{} directions, {} labels", w.sig().num_directions(), w.sig().num_labels()))
            })
        }
        WitnessCommand::Hom { size, out } => {
            let w = Witnesses::theorem2(size.k)?;
            let h = w.theorem2_hom()?;
            write_output(out.output.as_deref(), &to_canonical_json(&HomDoc::from_hom(&h)))?;
            finish_artifact(ctx, Report::new("witness hom"), &out, |_| {})
        }
        WitnessCommand::Automaton { size, kind, out } => {
            let a = match kind {
                AutomatonKind::Escape => family(size.k)?.escape_automaton(size.n)?,
                AutomatonKind::Counter => Witnesses::theorem2(size.k)?.counter_automaton(size.n)?,
            };
            write_output(out.output.as_deref(), &to_canonical_json(&AutomatonDoc::from_automaton(&a, true)))?;
            finish_artifact(ctx, Report::new("witness automaton"), &out, |r| {
                r.line(format!("{} states", a.num_states()))
            })
        }
        WitnessCommand::Sweep { size } => {
            let mut r = Report::new("witness sweep");
            let rep = Witnesses::theorem2(size.k)?.sweep(size.n)?;
            sweep_report(&mut r, &rep);
            Ok(r.emit(ctx.format))
        }
        WitnessCommand::Probe { size, pair, states, d } => {
            let mut r = Report::new("witness probe");
            r.param("n", size.n);
            r.param("k", size.k);
            r.param("states", states);
            let reports = probe(size, pair, states, &d)?;
            #[derive(Serialize)]
            struct Row {
                left: String,
                right: String,
                report: ProbeReport,
            }
            let rows: Vec<Row> = reports
                .into_iter()
                .map(|(left, right, report)| {
                    r.line(format!(
                        "{left} vs {right}: {} automata, {} tell them apart",
                        report.automata, report.distinguishing
                    ));
                    Row { left, right, report }
                })
                .collect();
            r.line("observations only; a diode-free gadget gives no indistinguishability guarantee");
            r.results(rows);
            Ok(r.emit(ctx.format))
        }
    }
}

pub fn probe(size: Size, pair: PairArg, states: usize, d: &str) -> CliResult<Vec<(String, String, ProbeReport)>> {
    let mut out = Vec::new();
    match pair {
        PairArg::H => {
            let w = Witnesses::gadget(size.k)?;
            let s = w.build_h(size.n, HVariant::Start)?;
            let f = w.build_h(size.n, HVariant::Fake)?;
            out.push(("H_start".into(), "H_fake".into(), exhaustive_probe(&s, &f, states)?));
        }
        PairArg::F => {
            let w = Witnesses::lemma(size.k)?;
            let dd = dir(&w, d)?;
            let plain = w.build_f(size.n, dd, None)?;
            let rows: Vec<CliResult<(String, String, ProbeReport)>> = (0..size.n)
                .into_par_iter()
                .map(|i| {
                    let fi = w.build_f(size.n, dd, Some(i))?;
                    Ok((format!("F[{i},{d}]"), format!("F[{d}]"), exhaustive_probe(&fi, &plain, states)?))
                })
                .collect();
            for row in rows {
                out.push(row?);
            }
        }
    }
    Ok(out)
}

pub fn sweep_report(r: &mut Report, rep: &SweepReport) {
    r.param("n", rep.n);
    r.param("k", rep.k);
    let n = rep.n;
    let mut d_names: Vec<&str> = Vec::new();
    for row in &rep.counter {
        if !d_names.contains(&row.d.as_str()) {
            d_names.push(&row.d);
        }
    }
    r.line("counter graphs: rows i, columns j, A = accepted");
    for d in &d_names {
        r.line(format!("  d = {d}"));
        for i in 0..n {
            let cells: String = rep
                .counter
                .iter()
                .filter(|x| x.d == *d && x.i == i)
                .map(|x| if x.accepted { " A" } else { " ." })
                .collect();
            r.line(format!("    {cells}"));
        }
    }
    r.line("probe graphs: rows d, columns d', A = accepted");
    for i in 0..n {
        r.line(format!("  i = {i}"));
        for d in &d_names {
            let cells: String = rep
                .probe
                .iter()
                .filter(|x| x.i == i && x.d == *d)
                .map(|x| if x.accepted { " A" } else { " ." })
                .collect();
            r.line(format!("    {d:>3} {cells}"));
        }
    }
    let (cm, pm) = (rep.counter_mismatches(), rep.probe_mismatches());
    r.line(format!(
        "{cm} counter mismatches (expected accept iff i = j), {pm} probe mismatches (expected accept iff d = d'), step bound {}",
        if rep.within_step_bound { "held" } else { "violated" }
    ));
    r.fail(cm + pm + usize::from(!rep.within_step_bound));
    r.results(rep);
}

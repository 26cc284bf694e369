use clap::{Subcommand, ValueEnum};
use serde::Serialize;

use gwa_core::repro::{accept_all, inverse_sweep, inverted_state_count, parity, tree_signature, InverseSweep, Suite};
use gwa_core::trees::{build_characterization, verify_characterization, CharacterizationReport};
use gwa_core::witnesses::Witnesses;

use crate::cmd_tree::characterization_report;
use crate::cmd_witness::{sweep_report, Size};
use crate::report::{CliResult, Report};
use crate::Ctx;

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum SuiteChoice {
    Small,
    Random,
    All,
}

#[derive(Subcommand)]
pub enum ReproCommand {
    /// State counts and inverse-image agreement.
    Thm1 {
        #[arg(long, value_enum, default_value = "all")]
        suite: SuiteChoice,
        /// Random automata per state count.
        #[arg(long, default_value_t = 20)]
        automata: usize,
    },
    /// Counter and probe acceptance tables.
    Claim3 {
        #[command(flatten)]
        size: Size,
    },
    /// Fishbone characterization for the accept-all and parity automata.
    Thm4 {
        #[arg(long, default_value_t = 7)]
        max_nodes: usize,
    },
}

#[derive(Serialize)]
struct StateCount {
    n: usize,
    k: usize,
    several_initial: bool,
    states: usize,
    expected: usize,
}

pub fn dispatch(ctx: &Ctx, c: ReproCommand) -> CliResult<i32> {
    match c {
        ReproCommand::Thm1 { suite, automata } => {
            let mut r = Report::new("repro thm1");
            r.param("seed", ctx.seed);
            r.param("automata", automata);
            let mut counts = Vec::new();
            for n in [2, 3, 4] {
                for k in [4, 9] {
                    for multi in [true, false] {
                        let states = inverted_state_count(n, k, multi)?;
                        let expected = n * k + usize::from(multi);
                        counts.push(StateCount {
                            n,
                            k,
                            several_initial: multi,
                            states,
                            expected,
                        });
                    }
                }
            }
            let bad_counts = counts.iter().filter(|c| c.states != c.expected).count();
            r.line(format!(
                "state counts: {} cases (nk + 1 with several initial labels, nk with one), {bad_counts} mismatches",
                counts.len()
            ));
            for c in &counts {
                r.line(format!(
                    "  n = {}, k = {}, {} initial: {} states",
                    c.n,
                    c.k,
                    if c.several_initial { "several" } else { "one" },
                    c.states
                ));
            }
            r.fail(bad_counts);
            let suites: Vec<Suite> = match suite {
                SuiteChoice::Small => vec![Suite::Small],
                SuiteChoice::Random => vec![Suite::Random],
                SuiteChoice::All => vec![Suite::Small, Suite::Random],
            };
            let mut sweeps: Vec<InverseSweep> = Vec::new();
            for s in suites {
                let sw = inverse_sweep(s, ctx.seed, &[2, 3, 4], automata)?;
                let aligned: usize = sw.rows.iter().map(|x| x.entries_aligned).sum();
                r.line(format!(
                    "suite {:?}: {} graphs x {} automata, {} disagreements, {} state count mismatches, {aligned} entries aligned",
                    s,
                    sw.graphs,
                    sw.rows.len(),
                    sw.disagreements(),
                    sw.state_count_mismatches()
                ));
                r.fail(sw.disagreements() + sw.state_count_mismatches());
                sweeps.push(sw);
            }
            r.results(serde_json::json!({ "state_counts": counts, "suites": sweeps }));
            Ok(r.emit(ctx.format))
        }
        ReproCommand::Claim3 { size } => {
            let mut r = Report::new("repro claim3");
            let rep = Witnesses::theorem2(size.k)?.sweep(size.n)?;
            sweep_report(&mut r, &rep);
            Ok(r.emit(ctx.format))
        }
        ReproCommand::Thm4 { max_nodes } => {
            let mut r = Report::new("repro thm4");
            r.param("max_nodes", max_nodes);
            let ts = tree_signature();
            let mut out: Vec<(&str, CharacterizationReport)> = Vec::new();
            for (name, a) in [("accept-all", accept_all(ts.clone())), ("parity", parity(ts.clone()))] {
                let b = build_characterization(&a)?;
                let rep = verify_characterization(&b, max_nodes)?;
                characterization_report(&mut r, &format!("{name}: "), &rep);
                out.push((name, rep));
            }
            r.results(out.into_iter().collect::<std::collections::BTreeMap<_, _>>());
            Ok(r.emit(ctx.format))
        }
    }
}

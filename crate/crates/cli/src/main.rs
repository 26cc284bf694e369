mod cmd_basic;
mod cmd_hom;
mod cmd_repro;
mod cmd_tree;
mod cmd_witness;
mod load;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use report::{CliResult, Format};

#[derive(Parser)]
#[command(name = "gwa", version, about = "Graph-walking automata toolkit")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Seed for randomized suites.
    #[arg(long, global = true, env = "GWA_SEED", default_value_t = gwa_core::repro::DEFAULT_SEED)]
    seed: u64,
    /// Worker threads for parallel sweeps (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a signature, graph, automaton, homomorphism, fragment or tree automaton.
    Validate(cmd_basic::ValidateArgs),
    /// Run an automaton on a graph.
    Run(cmd_basic::RunArgs),
    /// Print a prefix of the computation.
    Trace(cmd_basic::TraceArgs),
    /// Compare two automata on a list of graphs.
    Agree(cmd_basic::AgreeArgs),
    /// Homomorphism tools.
    #[command(subcommand)]
    Hom(cmd_hom::HomCommand),
    /// Lower-bound witness graphs and automata.
    #[command(subcommand)]
    Witness(cmd_witness::WitnessCommand),
    /// Tree automata and the fishbone characterization.
    #[command(subcommand)]
    Tree(cmd_tree::TreeCommand),
    /// Fixed reproduction runs.
    #[command(subcommand)]
    Repro(cmd_repro::ReproCommand),
}

/// Shared output options for commands that produce a document.
#[derive(Args, Clone, Debug, Default)]
pub struct OutArgs {
    /// Write the document here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    /// Emit graphs in DOT instead of JSON.
    #[arg(long)]
    pub dot: bool,
}

pub struct Ctx {
    pub format: Format,
    pub seed: u64,
}

fn dispatch(cli: Cli) -> CliResult<i32> {
    let ctx = Ctx {
        format: cli.format,
        seed: cli.seed,
    };
    match cli.command {
        Command::Validate(a) => cmd_basic::validate(&ctx, a),
        Command::Run(a) => cmd_basic::run(&ctx, a),
        Command::Trace(a) => cmd_basic::trace(&ctx, a),
        Command::Agree(a) => cmd_basic::agree(&ctx, a),
        Command::Hom(c) => cmd_hom::dispatch(&ctx, c),
        Command::Witness(c) => cmd_witness::dispatch(&ctx, c),
        Command::Tree(c) => cmd_tree::dispatch(&ctx, c),
        Command::Repro(c) => cmd_repro::dispatch(&ctx, c),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .expect("thread pool is configured once");
    }
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

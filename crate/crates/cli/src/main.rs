use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

mod commands;
mod json;

/// K-groups of Cuntz-Krieger algebras of graphs.
#[derive(Parser, Debug)]
#[command(name = "ckgraph", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Axes, links, Betti number, ends, dead ends and rose-tree status.
    Info {
        /// Graph file, `-` for stdin.
        file: PathBuf,
    },
    /// K0 and K1.
    Kgroups {
        file: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Reduce to a rose-tree, checking K-groups at every stage.
    Reduce {
        file: PathBuf,
        /// Template repetitions required on each ray.
        #[arg(long, default_value_t = ckgraph::ends::DEFAULT_DEPTH)]
        depth: usize,
        /// Print the rose-tree as a graph file; the summary goes to stderr.
        #[arg(long)]
        emit: bool,
    },
    /// Run a verifier on a file or on seeded random inputs.
    Verify {
        mode: Mode,
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        count: u64,
        /// Links of one bi-tree to shrink, comma separated; repeatable.
        #[arg(long = "tree")]
        trees: Vec<String>,
        /// Truncation depth for valency checks on a file.
        #[arg(long, default_value_t = 2)]
        depth: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Mode {
    Shrink,
    FiniteFormula,
    K1Cycles,
    Valency,
}

/// How a command failed: a check came out false, or the input was bad.
#[derive(Debug)]
pub enum Failure {
    Verification(String),
    Input(String),
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

pub fn read_input(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Info { file } => commands::info(&file),
        Command::Kgroups { file, json } => commands::kgroups(&file, json),
        Command::Reduce { file, depth, emit } => commands::reduce(&file, depth, emit),
        Command::Verify { mode, file, seed, count, trees, depth } => {
            commands::verify(mode, file.as_ref(), seed, count, &trees, depth)
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use sharpq::Limits;

mod commands;
mod failure;

use failure::Failure;

#[derive(Parser, Debug)]
#[command(name = "sharpq", version, about = "Count answers to existential positive queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    options: Options,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Count the answers of a query (or the value of a sentence) on a structure.
    Count,
    /// Compile a query into a #-sentence.
    Compile,
    /// Compile a query into a #-sentence of minimum width.
    Minimize,
    /// Width and #-width of a #-formula.
    Width,
    /// Quantifier-aware width of a pp query.
    Qaw,
    /// Core of a pp query.
    Core,
    /// Decide equivalence of two pp queries.
    Equiv,
    /// Flat normal form and linear combination of a #-formula.
    Flatten,
    /// Exact treewidth of the primal graph of a pp query.
    Decompose,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Compiled,
    Oracle,
    Both,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Naive,
    Qaw,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Counting,
    Logical,
}

#[derive(clap::Args, Debug, Clone)]
pub struct Options {
    /// `.epq` query file.
    #[arg(short = 'q', long = "query", global = true)]
    pub query: Option<PathBuf>,
    /// `.rel` structure file.
    #[arg(short = 'd', long = "data", global = true)]
    pub data: Option<PathBuf>,
    /// `.shq` #-formula file.
    #[arg(short = 's', long = "sharp", global = true)]
    pub sharp: Option<PathBuf>,
    /// Second `.epq` query file for `equiv`.
    #[arg(short = 'r', long = "rhs", global = true)]
    pub rhs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "compiled", global = true)]
    pub engine: EngineChoice,
    #[arg(long, value_enum, default_value = "qaw", global = true)]
    pub strategy: Strategy,
    #[arg(long, value_enum, default_value = "counting", global = true)]
    pub mode: Mode,
    #[arg(long, global = true)]
    pub json: bool,
    /// Seed for the verification samples.
    #[arg(long, default_value_t = 0, global = true)]
    pub seed: u64,
    /// Write the decomposition to this file.
    #[arg(long = "dump-td", global = true)]
    pub dump_td: Option<PathBuf>,
    #[arg(long = "max-dnf", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_dnf: Option<u64>,
    #[arg(long = "max-rows", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_rows: Option<u64>,
    #[arg(long = "max-vertices", global = true, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_vertices: Option<u64>,
}

impl Options {
    pub fn limits(&self) -> Limits {
        let mut limits = Limits::default();
        if let Some(n) = self.max_dnf {
            limits.max_dnf = n as usize;
        }
        if let Some(n) = self.max_rows {
            limits.max_rows = n;
        }
        if let Some(n) = self.max_vertices {
            limits.max_vertices = n as usize;
        }
        limits
    }
}

fn run(cli: &Cli) -> Result<String, Failure> {
    let o = &cli.options;
    match cli.command {
        Command::Count => commands::count(o),
        Command::Compile => commands::compile(o, o.strategy),
        Command::Minimize => commands::minimize(o),
        Command::Width => commands::width(o),
        Command::Qaw => commands::qaw(o),
        Command::Core => commands::core(o),
        Command::Equiv => commands::equiv(o),
        Command::Flatten => commands::flatten(o),
        Command::Decompose => commands::decompose(o),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("sharpq: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

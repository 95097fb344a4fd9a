//! Command-line front end: instance analysis, verification batches, Pfister
//! bounds and instance generation.

mod analyze;
mod bounds;
mod generate;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use verify::{verify, GGraphSuite, ReductionSuite, Reproducer, Tally, VerifyConfig, VerifyReport};

pub const VERSION: &str = concat!("riglab ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
/// Output files could not be written.
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "riglab", version, about = "Rigidities of G-graphs, reduction graphs and Pfister-index bounds")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Report rigidities and bound verdicts for a G-graph or reduction graph JSON file.
    Analyze(AnalyzeArgs),
    /// Run exhaustive and seeded random verification batches.
    Verify(VerifyArgs),
    /// Pfister-index bound of a function field over an n-discrete henselian field.
    Bounds(BoundsArgs),
    /// Emit a seeded random instance as JSON.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Text,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    pub path: PathBuf,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Largest group the action may generate.
    #[arg(long, default_value_t = riglab::action::DEFAULT_ELEMENT_CAP)]
    pub group_cap: usize,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Check every connected multigraph with up to this many vertices under every action.
    #[arg(long, value_name = "N")]
    pub exhaustive: Option<usize>,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    pub max_mult: u32,
    /// Largest subgroup order tried in the exhaustive batch.
    #[arg(long, default_value_t = 48, value_parser = clap::value_parser!(u64).range(1..))]
    pub order_cap: u64,
    /// Check every labelled graph rather than one per isomorphism class.
    #[arg(long)]
    pub raw: bool,
    /// Number of random G-graphs and random reduction graphs.
    #[arg(long, value_name = "COUNT", requires = "seed")]
    pub random: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_vertices: u64,
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_group_order: u64,
    /// Galois group order cap for random reduction graphs.
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_galois_order: u64,
    /// Comma-separated subset of tree, fixpoint, orbit-avoid, main, corollary.
    #[arg(long, value_delimiter = ',')]
    pub theorems: Option<Vec<riglab::symmetry::Theorem>>,
    /// Also write the report to this file.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, env = "RIGLAB_JOBS", default_value_t = 0)]
    pub jobs: usize,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
    /// Negates one theorem's check to test the harness.
    #[arg(long, hide = true)]
    pub mutant: Option<riglab::symmetry::Theorem>,
}

#[derive(Args, Debug)]
pub struct BoundsArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, default_value_t = 0)]
    pub genus: u32,
    #[arg(long, conflicts_with = "nonreal")]
    pub real: bool,
    /// The default; kept for symmetry with --real.
    #[arg(long)]
    pub nonreal: bool,
    #[arg(long, default_value_t = 1)]
    pub ell: u32,
    /// Emit the witness valuation tree.
    #[arg(long)]
    pub witness: bool,
    /// Print only the index bound as a power of two.
    #[arg(long)]
    pub index: bool,
    /// Include the rank-by-rank derivation.
    #[arg(long)]
    pub trace: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InstanceKind {
    Ggraph,
    Reduction,
}

#[derive(Args, Debug)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: InstanceKind,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_vertices: u64,
    #[arg(long, default_value_t = 24, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_group_order: u64,
    #[arg(long, default_value_t = 12, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_galois_order: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a command produced; `main` prints it and exits with `code`.
#[derive(Debug, Default)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Self { code: EXIT_OK, stdout, stderr: String::new() }
    }

    fn fail(code: i32, message: impl Into<String>) -> Self {
        Self { code, stdout: String::new(), stderr: message.into() }
    }
}

pub(crate) fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

/// Parses arguments and runs one command.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let text = e.render().to_string();
            return if code == EXIT_OK { Outcome::ok(text) } else { Outcome::fail(code, text) };
        }
    };
    match cli.command {
        Command::Analyze(a) => analyze::run(&a),
        Command::Verify(v) => verify::run(&v),
        Command::Bounds(b) => bounds::run(&b),
        Command::Generate(g) => generate::run(&g),
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use descent_cli::{run, Command, Format, Mode, RunConfig, SeriesArg};

/// Cocycle descent in towers of abelian p-covers.
#[derive(Parser)]
#[command(name = "descent", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the support-descent pipeline down a tower of covers.
    Descend(Common),
    /// d_p of the cyclic covers of a homomorphism to Z.
    Cyclic(Common),
    /// Finite-prefix report on the ranks and indices of a series.
    Criteria(Common),
    /// Shrink the support of the row space of a matrix file.
    Reduce(Common),
    /// Cheeger constant of the 1-skeleton of the deepest tower level.
    Cheeger(Common),
    /// Relative size of a class on the presentation complex.
    Relsize(Common),
    /// Cell counts and mod-p ranks of the complexes in a series.
    Cover(Common),
    /// Re-emit a presentation file in canonical form.
    Echo(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    #[value(name = "json-like", alias = "json")]
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Exact,
    Heuristic,
}

#[derive(Args)]
struct Common {
    /// Presentation file (matrix file for `reduce`).
    input: PathBuf,
    /// Prime overriding the one in the input file.
    #[arg(long)]
    p: Option<u64>,
    /// derived, rank:<k> or file:<path>.
    #[arg(long, default_value = "derived")]
    series: SeriesArg,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Number of classes carried down the tower; chosen from the first
    /// level when absent.
    #[arg(long)]
    u: Option<usize>,
    /// Largest cell count allowed for a cover.
    #[arg(long, default_value_t = 1_000_000)]
    budget: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exact")]
    mode: ModeArg,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json-like")]
    format: FormatArg,
    /// Integer weight of each generator, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<i64>>,
    #[arg(long, default_value_t = 8)]
    max_i: u64,
    /// Target dimension for `reduce`.
    #[arg(long)]
    w: Option<usize>,
    /// Cochain value on each edge, comma separated.
    #[arg(long, value_delimiter = ',')]
    class: Option<Vec<u32>>,
}

fn config(command: Command, c: Common) -> (RunConfig, Option<PathBuf>) {
    let cfg = RunConfig {
        command,
        input: c.input,
        p: c.p,
        series: c.series,
        depth: c.depth,
        u: c.u,
        cell_budget: c.budget,
        seed: c.seed,
        mode: match c.mode {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Heuristic => Mode::Heuristic,
        },
        format: match c.format {
            FormatArg::Json => Format::Json,
            FormatArg::Table => Format::Table,
        },
        weights: c.weights,
        max_i: c.max_i,
        w: c.w,
        class: c.class,
    };
    (cfg, c.out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cfg, out) = match cli.command {
        Cmd::Descend(c) => config(Command::Descend, c),
        Cmd::Cyclic(c) => config(Command::Cyclic, c),
        Cmd::Criteria(c) => config(Command::Criteria, c),
        Cmd::Reduce(c) => config(Command::Reduce, c),
        Cmd::Cheeger(c) => config(Command::Cheeger, c),
        Cmd::Relsize(c) => config(Command::Relsize, c),
        Cmd::Cover(c) => config(Command::Cover, c),
        Cmd::Echo(c) => config(Command::Echo, c),
    };
    let outcome = match run(&cfg) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("descent: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &out {
        Some(path) => std::fs::write(path, &outcome.document)
            .map_err(|e| format!("{}: {e}", path.display())),
        None => {
            print!("{}", outcome.document);
            Ok(())
        }
    };
    if let Err(msg) = written {
        eprintln!("descent: {msg}");
        return ExitCode::from(1);
    }
    ExitCode::from(outcome.exit_code as u8)
}

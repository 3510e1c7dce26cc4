//! `qftree`: command-line front end for `qftree-core`.
//!
//! Exit codes: 0 success, 1 a checked bound or invariant failed, 2 bad input.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use qftree_core::rational::parse_rational;
use qftree_core::{Error, Rational};

use output::{Format, Style};

#[derive(Parser, Debug)]
#[command(name = "qftree", version, about = "Quantifier-free limits of weighted colored tree-semilattices")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Largest number of tuples an exact computation may enumerate.
    #[arg(long, global = true, default_value_t = 10_000_000)]
    pub budget: u128,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Print rationals as decimals.
    #[arg(long, global = true)]
    pub decimal: bool,
}

impl Global {
    fn style(&self) -> Style {
        Style { format: self.format, decimal: self.decimal }
    }
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn positive(s: &str) -> Result<Rational, String> {
    let r = rational(s)?;
    if r <= Rational::from_integer(0.into()) || r > Rational::from_integer(1.into()) {
        return Err(format!("{s} is not in (0, 1]"));
    }
    Ok(r)
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check a tree-semilattice file against the axioms.
    Validate { tree: PathBuf },
    /// Stone pairing of a formula (a name such as `fig2`, or formula text).
    Pairing {
        tree: PathBuf,
        #[arg(long)]
        formula: String,
        /// Estimate with this many Monte-Carlo samples instead of enumerating.
        #[arg(long)]
        mc: Option<u64>,
    },
    /// Distribution of marked p-types.
    Types {
        tree: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        p: usize,
    },
    /// `sup_p` for one arity, or the truncated distance bracket.
    Distance {
        a: PathBuf,
        b: PathBuf,
        #[arg(short, long)]
        p: Option<usize>,
        #[arg(long, default_value_t = 3)]
        max_p: usize,
    },
    /// Build an ε-partition.
    Partition {
        tree: PathBuf,
        #[arg(long, value_parser = positive)]
        eps: Rational,
    },
    /// Refine a partition to a smaller ε.
    Refine {
        tree: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long, value_parser = positive)]
        eps: Rational,
    },
    /// Standard reduction along an ε-partition.
    Reduce {
        tree: PathBuf,
        #[arg(long, value_parser = positive)]
        eps: Rational,
    },
    /// Reduction tower for a strictly decreasing ε-schedule.
    Tower {
        tree: PathBuf,
        /// Comma-separated, e.g. `1/2,1/4,1/8`.
        #[arg(long, value_parser = positive, value_delimiter = ',', required = true)]
        schedule: Vec<Rational>,
    },
    /// Draw n nodes and close under meets.
    Sample {
        tree: PathBuf,
        #[arg(short, long)]
        n: usize,
    },
    /// Sample, then replace drawn nodes by chains of length C.
    Uniformize {
        tree: PathBuf,
        #[arg(short, long)]
        n: usize,
        #[arg(short, long)]
        c: usize,
        /// Check the uniformization bound for this formula.
        #[arg(long)]
        formula: Option<String>,
    },
    /// Repeated sampling against the concentration bound.
    Concentration {
        tree: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, value_parser = positive)]
        eps: Rational,
        #[arg(short, long)]
        n: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
    },
    /// The graph of a cotree.
    Interpret { cotree: PathBuf },
    /// Translate a graph formula into the cotree's semilattice language.
    Translate {
        cotree: PathBuf,
        #[arg(long)]
        formula: String,
    },
    /// Homomorphism density t(F, G).
    Homdensity { f: PathBuf, g: PathBuf },
    /// Whether F is an induced subgraph of G.
    Induced { f: PathBuf, g: PathBuf },
    /// Partition, reduce and tabulate pairing errors over the battery.
    Pipeline {
        tree: PathBuf,
        #[arg(long, value_parser = positive)]
        eps: Rational,
    },
    /// Truncated distances between consecutive members of a sequence.
    Converge {
        /// `chain`, `star`, `constant:FILE` or `uniformize:FILE:N`.
        #[arg(long)]
        generator: String,
        /// Comma-separated sizes (node counts, or C for `uniformize`).
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        max_p: usize,
    },
}

/// Command result: the text to emit, and whether every check passed.
pub struct Report {
    pub text: String,
    pub ok: bool,
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Invariant(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = commands::run(&cli.command, &cli.global, cli.global.style()).and_then(|report| {
        match &cli.global.out {
            Some(path) => std::fs::write(path, &report.text)
                .with_context(|| format!("writing {}", path.display()))?,
            None => print!("{}", report.text),
        }
        Ok(report.ok)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

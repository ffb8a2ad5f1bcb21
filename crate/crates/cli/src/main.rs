//! `chacon`: command-line access to the generalized Chacon polynomials, their
//! substitution sequences, the distribution oracles and the tower simulator.
//!
//! Exit status is 0 on success, 1 when a verification fails and 2 on bad
//! arguments.

mod commands;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "chacon",
    version,
    about = "Exact generalized Chacon polynomials and oracles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SeqKind {
    Upper,
    Lower,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SimCheck {
    Conjugacy,
    Measure,
    Towers,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FaultArg {
    TriangleMinusOne,
}

#[derive(Debug, Clone, Copy, Args)]
struct SeedArg {
    /// Random seed.
    #[arg(long, env = "CHACON_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Coefficients of P_m^p.
    Poly {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: u64,
        /// Recenter by the mid-degree (p-2)m/2; exponents are written doubled.
        #[arg(long)]
        symmetric: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Degree-increment substitution sequences, one value per line by default.
    Seq {
        #[arg(long)]
        p: u32,
        #[arg(long, value_enum, default_value_t = SeqKind::Upper)]
        kind: SeqKind,
        #[arg(long, required_unless_present = "tier")]
        count: Option<u64>,
        /// Print the whole tier `l` (p^(l+1) symbols) instead of a prefix.
        #[arg(long, conflicts_with = "count")]
        tier: Option<u32>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Degree, lower degree and mid-degree of P_m^p.
    Degrees {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: u64,
        /// Report every m' in 0..=m.
        #[arg(long)]
        through: bool,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Bracketed law of phi^(m) by exhaustive digit enumeration.
    Oracle {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        m: u64,
        /// Prefix length; defaults to ceil(log_p m) + 6.
        #[arg(long = "K", alias = "k")]
        k: Option<u32>,
        /// Extra digits read on prefixes that are still undecided.
        #[arg(long, default_value_t = chacon_core::DEFAULT_DEEPEN)]
        deepen: u32,
        /// Omega table: comma-separated values, or classic, spacer, legendre.
        #[arg(long, default_value = "classic")]
        omega: String,
        /// Also draw this many Monte Carlo samples and compare per bin at 4 sigma.
        #[arg(long)]
        mc: Option<u64>,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Simulate the towers (X_n, T_n) and the maps psi_n.
    Sim {
        #[arg(long)]
        p: u32,
        #[arg(long)]
        n: u32,
        /// Trajectory length for the measure check.
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Sampled points for the conjugacy and tower checks.
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
        #[command(flatten)]
        seed: SeedArg,
        /// Run one check only.
        #[arg(long, value_enum)]
        check: Option<SimCheck>,
        /// Omega table; defaults to the single-spacer table.
        #[arg(long, default_value = "spacer")]
        omega: String,
        /// Normalize mu_n by h_n + 1/2 instead of h_n + E[phi].
        #[arg(long = "paper-normalizer")]
        printed_normalizer: bool,
        /// Prefix length for level-measure brackets.
        #[arg(long = "K", alias = "k", default_value_t = 8)]
        k: u32,
        /// Use psi_n without its indicator term (negative control).
        #[arg(long, hide = true)]
        drop_indicator: bool,
    },
    /// Run the property suite.
    Verify {
        /// Bases to check; repeatable.
        #[arg(long = "p", default_values_t = vec![3u32, 4, 5])]
        p: Vec<u32>,
        #[arg(long, default_value_t = 50)]
        m_max: u64,
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long, hide = true, value_enum)]
        inject_fault: Option<FaultArg>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match commands::run(cli.command) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(if outcome.passed { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

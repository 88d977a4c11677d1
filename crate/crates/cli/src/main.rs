use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use paymin::Rational;

mod commands;
mod report;

#[derive(Parser)]
#[command(name = "paymin", version, about = "Payment-minimizing procurement mechanisms with exact rational arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Payment LP over integral allocations.
    Exact,
    /// Payment LP over the covering-LP relaxation.
    Relaxed,
    /// Product-support LP with a dominant-strategy extension.
    Dsic,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a mechanism and verify it.
    Solve {
        instance: PathBuf,
        /// Weight of the public cost, as p/q.
        #[arg(long)]
        kappa: Option<Rational>,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Where to write the mechanism (or the relaxed LP solution) as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sentinel value for one player, as `i=value`. Repeatable.
        #[arg(long = "m-override", value_parser = commands::parse_override)]
        m_override: Vec<(usize, Rational)>,
        /// Sample one run per support profile with this seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Round the relaxed solution with an LP-relative algorithm.
    Round {
        instance: PathBuf,
        #[arg(long)]
        rho: Option<Rational>,
        /// exact, single-item, vertex-cover, set-cover or bufl. Defaults by preset.
        #[arg(long)]
        plugin: Option<String>,
        #[arg(long)]
        kappa: Option<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "m-override", value_parser = commands::parse_override)]
        m_override: Vec<(usize, Rational)>,
    },
    /// Compare the lookahead auction with the priority benchmark.
    LookaheadDemo {
        #[arg(long = "K")]
        k: Option<Rational>,
        #[arg(long)]
        eps: Option<Rational>,
        #[arg(long)]
        delta: Option<Rational>,
        #[arg(long)]
        n: Option<usize>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Solve { instance, kappa, mode, out, m_override, seed } => {
            commands::solve(&instance, kappa, mode, out.as_deref(), &m_override, seed)
        }
        Command::Round { instance, rho, plugin, kappa, out, m_override } => {
            commands::round(&instance, rho, plugin.as_deref(), kappa, out.as_deref(), &m_override)
        }
        Command::LookaheadDemo { k, eps, delta, n, json } => commands::lookahead_demo(k, eps, delta, n, json),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

//! Command-line front end: build problems from TOML configs, run the
//! solvers, write traces and audit them.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use commands::GChoice;

#[derive(Debug, Parser)]
#[command(name = "dcfw", version, about = "Frank-Wolfe solvers for constrained DC problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one configured problem; writes the trace CSV and a summary JSON.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Audit a trace against the rate bounds; writes report.json.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Defaults to the trace path the run command writes for this config.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Comma-separated check names, e.g. `descent,gap-rate`.
        #[arg(long)]
        theorems: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare finite-difference errors with their a-priori bound.
    FdCheck {
        #[arg(long, value_enum)]
        g: GChoice,
        /// Comma-separated point; random in [-1, 1]^dim when omitted.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        x: Option<Vec<f64>>,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        /// Comma-separated increments.
        #[arg(long, value_delimiter = ',', default_value = "1,0.1,0.01,0.001")]
        s: Vec<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write fd_check.csv here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every cell of a suite; writes cells/<id>.csv and bench.csv.
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (all cores by default).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Parses `args` and runs the command, returning the exit code. Usage errors
/// exit with 1 so that codes 2 and up keep their solver meaning.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { commands::EXIT_CONFIG } else { commands::EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match cli.command {
        Command::Run { config, out, seed } => commands::cmd_run(&config, out.as_deref(), seed),
        Command::Verify {
            config,
            trace,
            theorems,
            out,
            seed,
        } => commands::cmd_verify(&config, trace.as_deref(), theorems.as_deref(), out.as_deref(), seed),
        Command::FdCheck { g, x, dim, s, seed, out } => commands::cmd_fd_check(g, x, dim, &s, seed, out.as_deref()),
        Command::Bench { config, out, jobs, seed } => commands::cmd_bench(&config, out.as_deref(), jobs, seed),
    }
}

//! `seqpovm`: analyze and simulate sequential generalized quantum
//! measurements with normal, commuting measurement operators.
//!
//! Subcommands compose through the measurement-set JSON schema: `scheme`
//! and `bosonic` emit it, everything else consumes it from `--input` or
//! stdin. Exit codes: 0 success, 1 numeric failure, 2 structural or parse
//! error.

mod commands;
mod input;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::AnalysisFlags;

#[derive(Parser)]
#[command(
    name = "seqpovm",
    version,
    about = "Sequential generalized-measurement analysis and simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct SetIo {
    /// Measurement-set JSON file; `-` or absent reads stdin.
    #[arg(long)]
    input: Option<PathBuf>,
    /// Report destination; absent writes stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Tolerances {
    /// Absolute tolerance for the set invariants and diagonalization.
    #[arg(long, default_value_t = seqpovm_core::DEFAULT_VALIDATION_TOL)]
    tol: f64,
    /// Tolerance for grouping coefficient columns into phase classes.
    #[arg(long, default_value_t = seqpovm_core::DEFAULT_GROUP_TOL)]
    tol_group: f64,
    /// Seed of the random Hermitian combination used to diagonalize.
    #[arg(long, default_value_t = seqpovm_core::DEFAULT_DIAG_SEED)]
    diag_seed: u64,
}

impl Tolerances {
    fn flags(&self) -> AnalysisFlags {
        AnalysisFlags {
            tol: self.tol,
            group_tol: self.tol_group,
            diag_seed: self.diag_seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check completeness, normality and commutativity of a set.
    Validate {
        #[command(flatten)]
        io: SetIo,
        #[arg(long, default_value_t = seqpovm_core::DEFAULT_VALIDATION_TOL)]
        tol: f64,
    },
    /// Simultaneous eigenbasis and canonical phase-group decomposition.
    Decompose {
        #[command(flatten)]
        io: SetIo,
        #[command(flatten)]
        tolerances: Tolerances,
    },
    /// Channel convergence at round m: distance to the asymptote, spectral
    /// gap and the fixed/rotating/decaying classification.
    Channel {
        #[command(flatten)]
        io: SetIo,
        #[command(flatten)]
        tolerances: Tolerances,
        /// Number of measurement rounds (>= 1).
        #[arg(long)]
        m: u64,
    },
    /// Typical-sequence analysis over the outcome simplex.
    Typicality {
        #[command(flatten)]
        io: SetIo,
        #[command(flatten)]
        tolerances: Tolerances,
        /// Sequence length.
        #[arg(long)]
        m: u64,
        /// Gaussian height ratio for the separation bound, in (0, 1].
        #[arg(long)]
        eta: f64,
        /// Relative-entropy radius of the typical neighborhoods.
        #[arg(long)]
        delta: f64,
        /// Enumeration cap on the number of simplex grid points.
        #[arg(long, default_value_t = seqpovm_core::DEFAULT_GRID_CAP)]
        cap: u64,
        /// Use exact multinomial weights in the grid CSV (default).
        #[arg(long, conflicts_with = "stirling")]
        exact: bool,
        /// Use Stirling weights e^{-m S} in the grid CSV.
        #[arg(long)]
        stirling: bool,
        /// Write one CSV row per simplex grid point to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Seeded Monte Carlo trajectories of sequential selective rounds.
    Simulate {
        #[command(flatten)]
        io: SetIo,
        #[command(flatten)]
        tolerances: Tolerances,
        /// Initial state: inline JSON or a path. A vector of [re, im]
        /// pairs is a pure state; a matrix is a density matrix.
        #[arg(long)]
        state: String,
        /// Rounds per trajectory.
        #[arg(long)]
        m: u64,
        /// Number of independent trajectories.
        #[arg(long, default_value_t = 1)]
        shots: u64,
        /// RNG seed; required so runs are reproducible by construction.
        #[arg(long)]
        seed: u64,
        /// Smallest selectable branch probability.
        #[arg(long, default_value_t = seqpovm_core::DEFAULT_P_FLOOR)]
        p_floor: f64,
        /// Write one CSV row per completed trajectory to this path.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Build the two-outcome dephasing pair for a given spectrum.
    Scheme {
        /// Comma-separated accumulated phases, e.g. `0,0.3`.
        #[arg(long)]
        omega: String,
        /// Rotation-phase difference phi1 - phi2.
        #[arg(long, default_value_t = 0.0)]
        dphi: f64,
        /// Exchange the two outcome labels.
        #[arg(long)]
        swap_outcomes: bool,
        /// Set destination; absent writes stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Build the bosonic modular-excitation pair on a truncated Fock space.
    Bosonic {
        /// Measured modulus N.
        #[arg(long = "N")]
        n: usize,
        /// Fock cutoff; defaults to 8N.
        #[arg(long)]
        truncation: Option<usize>,
        /// Readout offset; defaults to the prescribed optimum.
        #[arg(long)]
        dphi: Option<f64>,
        /// Set destination; absent writes stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn worker_cap() -> Result<Option<usize>, String> {
    match std::env::var("SEQPOVM_THREADS") {
        Ok(raw) => raw
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&n| n >= 1)
            .map(Some)
            .ok_or_else(|| format!("SEQPOVM_THREADS must be a positive integer, got {raw:?}")),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Validate { io, tol } => {
            commands::cmd_validate(io.input.as_ref(), io.output.as_ref(), tol)
        }
        Command::Decompose { io, tolerances } => {
            commands::cmd_decompose(io.input.as_ref(), io.output.as_ref(), &tolerances.flags())
        }
        Command::Channel { io, tolerances, m } => commands::cmd_channel(
            io.input.as_ref(),
            io.output.as_ref(),
            &tolerances.flags(),
            m,
        ),
        Command::Typicality {
            io,
            tolerances,
            m,
            eta,
            delta,
            cap,
            exact: _,
            stirling,
            csv,
        } => commands::cmd_typicality(
            io.input.as_ref(),
            io.output.as_ref(),
            &tolerances.flags(),
            m,
            eta,
            delta,
            cap,
            stirling,
            csv.as_ref(),
        ),
        Command::Simulate {
            io,
            tolerances,
            state,
            m,
            shots,
            seed,
            p_floor,
            csv,
        } => {
            let threads = worker_cap().map_err(anyhow::Error::msg)?;
            commands::cmd_simulate(
                io.input.as_ref(),
                io.output.as_ref(),
                &tolerances.flags(),
                &state,
                m,
                shots,
                seed,
                p_floor,
                csv.as_ref(),
                threads,
            )
        }
        Command::Scheme {
            omega,
            dphi,
            swap_outcomes,
            output,
        } => commands::cmd_scheme(&omega, dphi, swap_outcomes, output.as_ref()),
        Command::Bosonic {
            n,
            truncation,
            dphi,
            output,
        } => commands::cmd_bosonic(n, truncation, dphi, output.as_ref()),
    }
}

/// Numeric failures exit 1, everything structural (bad files, bad JSON,
/// bad flags) exits 2.
fn exit_code_for(err: &anyhow::Error) -> u8 {
    if let Some(core) = err.downcast_ref::<seqpovm_core::Error>() {
        if core.is_structural() {
            2
        } else {
            1
        }
    } else {
        2
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // usage errors exit 2, help/version exit 0
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            let code = exit_code_for(&err);
            let kind = if code == 1 { "numeric" } else { "structural" };
            let obj = serde_json::json!({
                "error": { "kind": kind, "message": format!("{err:#}") }
            });
            eprintln!("{obj}");
            ExitCode::from(code)
        }
    }
}

//! Batch driver for the `khess` suites. Every subcommand writes CSV and
//! JSON reports into an output directory and communicates its verdict
//! through the exit code:
//!
//! * 0: the suite or solve met its tolerance contract,
//! * 1: the run completed but a tolerance or survival gate failed,
//! * 2: usage errors (bad flags, malformed config, inadmissible input),
//! * 3: a constrained sampler starved before filling its budget,
//! * 4: the solver stopped without converging (trace still written).
//!
//! CSV cells carry 17 significant digits and JSON keys are sorted, so a
//! repeated run with the same seed and flags is byte-identical. SVG plots
//! (`--emit-plots`) are decorative and sit outside that contract.

mod concavity;
mod geom;
mod identities;
mod plots;
mod problem;
mod solve_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use khess::Error;

#[derive(Parser)]
#[command(
    name = "khess",
    version,
    about = "Verification suites and prescribed-curvature solves on radial graphs in hyperbolic space"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Root seed; every random stage derives its own substream from it.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Sample budget for the randomized suites (identity sweeps, cone
    /// sampling, concavity levels). Ignored by `geom` and `solve`.
    #[arg(long, global = true)]
    budget: Option<usize>,

    /// Output directory. Falls back to the KHESS_OUT environment
    /// variable, then to ./khess-out.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Also write SVG plots next to the CSV/JSON reports.
    #[arg(long, global = true)]
    emit_plots: bool,

    /// Flip a sign inside one identity before judging it, to prove the
    /// failure path reports exit code 1. Only `identities` consults this.
    #[arg(long, global = true)]
    self_test_break: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Symmetric-function identity, cone-bound, and derivative-vs-FD
    /// suites over random spectra and matrices.
    Identities {
        /// Largest spectrum dimension; the sweep covers 3..=max-dim.
        #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(3..=10))]
        max_dim: u8,
    },
    /// Bisection search for the pinch threshold of the log-quotient
    /// concavity gap, with per-level and per-sample records.
    Concavity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
        #[arg(long, default_value_t = 0.5)]
        delta0: f64,
    },
    /// Hypersurface identity residual sweep on a radial graph preset.
    Geom {
        /// Graph preset: sphere:R, perturbed:R,AMP, trig:R,A1,A2
        /// (axisym) or sphere:R, tilted:R,A,B (sphere2).
        #[arg(long, default_value = "sphere:1.0")]
        preset: String,
        /// Grid family: "axisym" (rotationally symmetric, any ambient
        /// dimension) or "sphere2" (full 2-sphere grid).
        #[arg(long, default_value = "axisym")]
        mode: String,
        /// Hypersurface dimension for axisym grids; sphere2 is fixed at 2.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Grid resolution: "M" for axisym, "NT,NP" for sphere2.
        /// Defaults are chosen so the residual gates have headroom.
        #[arg(long)]
        resolution: Option<String>,
        /// 1 checks the first-derivative identities, 2 adds the
        /// curvature-interchange check.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
        depth: u8,
        /// Also sweep a half-resolution grid and report per-check
        /// convergence orders.
        #[arg(long)]
        refine: bool,
    },
    /// Solve a prescribed sigma_k problem described by a JSON file.
    Solve {
        /// Problem file; see the README for the schema.
        #[arg(long)]
        problem: PathBuf,
    },
}

/// Shared bits every subcommand needs.
pub struct RunCtx {
    pub seed: u64,
    pub budget: Option<usize>,
    pub out: PathBuf,
    pub emit_plots: bool,
    pub self_test_break: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli
        .out
        .clone()
        .or_else(|| std::env::var_os("KHESS_OUT").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("khess-out"));
    if let Err(e) = std::fs::create_dir_all(&out) {
        eprintln!("error: cannot create output directory {}: {e}", out.display());
        return ExitCode::from(2);
    }
    let ctx = RunCtx {
        seed: cli.seed,
        budget: cli.budget,
        out,
        emit_plots: cli.emit_plots,
        self_test_break: cli.self_test_break,
    };

    let result = match &cli.command {
        Command::Identities { max_dim } => identities::run(&ctx, *max_dim as usize),
        Command::Concavity {
            n,
            k,
            l,
            eps,
            delta,
            delta0,
        } => concavity::run(&ctx, *n, *k, *l, *eps, *delta, *delta0),
        Command::Geom {
            preset,
            mode,
            dim,
            resolution,
            depth,
            refine,
        } => geom::run(&ctx, preset, mode, *dim, resolution.as_deref(), *depth, *refine),
        Command::Solve { problem } => solve_cmd::run(&ctx, problem),
    };

    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

/// Library errors that escape a subcommand map onto the exit-code
/// contract; anything not covered by a dedicated code is a usage or
/// input problem.
fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::SamplerStarved { .. } => 3,
        Error::NonConvergence { .. } => 4,
        _ => 2,
    }
}

//! `conelim`: command-line driver for potentials, distances, bound checks,
//! tangent-cone limits and the axis probes.
//!
//! Exit codes: 0 success, 1 malformed arguments or I/O failure, 2 domain
//! error, 3 verification failure or inconclusive result.

mod cache;
mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

#[derive(Debug)]
pub enum Failure {
    Malformed(String),
    Io(String),
    Lib(conelim::Error),
    Verification(String),
}

impl From<conelim::Error> for Failure {
    fn from(e: conelim::Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Malformed(_) | Failure::Io(_) => 1,
            Failure::Lib(conelim::Error::Inconclusive(_)) | Failure::Verification(_) => 3,
            Failure::Lib(_) => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "conelim", version, about = "Conformal metrics from multi-center harmonic potentials")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub cmd: Cmd,
}

#[derive(Args, Debug)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Directory for CSV and JSON outputs.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Pointwise tolerance for `potential`, quadrature tolerance elsewhere.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

/// Metric descriptor flags; at most one of the kind flags may be given.
#[derive(Args, Debug, Default)]
pub struct MetricArgs {
    #[arg(long)]
    pub euclidean: bool,
    /// `(θ/|ζ|)h₀`.
    #[arg(long, value_name = "THETA")]
    pub radial: Option<f64>,
    /// `(c + θ/|ζ|)h₀`.
    #[arg(long, num_args = 2, value_names = ["C", "THETA"])]
    pub affine: Option<Vec<f64>>,
    /// `d_S^T`; `T` may be `inf`.
    #[arg(long, num_args = 2, value_names = ["S", "T"])]
    pub st: Option<Vec<f64>>,
    /// `d_I` from endpoints `S0 T0 S1 T1 ...`.
    #[arg(long, num_args = 2.., value_name = "END")]
    pub union: Option<Vec<f64>>,
    /// `Φ_a` from the lattice flags.
    #[arg(long)]
    pub lattice: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long = "P", value_name = "P")]
    pub p: Option<f64>,
    #[command(flatten)]
    pub lat: LatticeArgs,
}

#[derive(Args, Debug, Default)]
pub struct LatticeArgs {
    /// `geometric`, `supergeometric` or `explicit`.
    #[arg(long)]
    pub kseq: Option<String>,
    #[arg(long)]
    pub k0: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Explicit `K` list.
    #[arg(long, num_args = 1..)]
    pub ks: Option<Vec<f64>>,
    /// Scale `a`.
    #[arg(long)]
    pub a: Option<f64>,
}

#[derive(Args, Debug, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub grid_resolution: Option<f64>,
    #[arg(long)]
    pub refinement_rounds: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Cmd {
    /// Evaluate the conformal factor at a point.
    #[command(allow_negative_numbers = true)]
    Potential {
        #[command(flatten)]
        metric: MetricArgs,
        #[arg(long, num_args = 3, value_names = ["ZR", "ZC1", "ZC2"], required = true)]
        point: Vec<f64>,
    },
    /// Solve for the distance between two points.
    #[command(allow_negative_numbers = true)]
    Dist {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        solver: SolverArgs,
        #[arg(long, num_args = 3, value_names = ["ZR", "ZC1", "ZC2"], required = true)]
        from: Vec<f64>,
        #[arg(long, num_args = 3, value_names = ["ZR", "ZC1", "ZC2"], required = true)]
        to: Vec<f64>,
        /// Write the witness polyline as `t,x,y,z` rows.
        #[arg(long, value_name = "FILE")]
        witness: Option<PathBuf>,
        /// Append-only distance cache file.
        #[arg(long, value_name = "FILE")]
        cache: Option<PathBuf>,
    },
    /// Sample the analytic estimates and report margins.
    #[command(allow_negative_numbers = true)]
    Bounds {
        /// Checks to run; `all` runs everything but `keycor`.
        #[arg(long = "check", num_args = 1..)]
        checks: Option<Vec<String>>,
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long = "D", num_args = 1..)]
        d: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long = "P", value_name = "P")]
        p: Option<f64>,
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Classify the limit of a rescaled lattice sequence and check convergence.
    #[command(allow_negative_numbers = true)]
    Limits {
        /// `pin_lower`, `pin_upper`, `theta` or `explicit` (config only).
        #[arg(long)]
        rule: Option<String>,
        #[arg(long)]
        value: Option<f64>,
        #[arg(long)]
        horizon: Option<usize>,
        /// Terms to check for convergence; pass none to skip.
        #[arg(long, num_args = 0..)]
        i_list: Option<Vec<usize>>,
        #[arg(long = "R")]
        r: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        lat: LatticeArgs,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Check the identity as an (r, ε)-isometry along a dilation family.
    #[command(allow_negative_numbers = true)]
    Gh {
        /// `constant` or `radial`.
        #[arg(long)]
        mode: Option<String>,
        #[arg(long = "S")]
        s: Option<f64>,
        #[arg(long = "T")]
        t: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Near-axis lengths and the pole test at the origin of `d_0^∞`.
    #[command(allow_negative_numbers = true)]
    Probe {
        /// `axis` or `pole`.
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        t0: Option<f64>,
        #[arg(long)]
        t1: Option<f64>,
        /// Decreasing offsets `δ` (axis) or slab radii `D` (pole).
        #[arg(long, num_args = 1..)]
        deltas: Option<Vec<f64>>,
        #[arg(long, num_args = 3, value_names = ["ZR", "ZC1", "ZC2"])]
        p: Option<Vec<f64>>,
        #[command(flatten)]
        solver: SolverArgs,
    },
    /// Tangent cones at 0 and at infinity of each metric family.
    #[command(allow_negative_numbers = true)]
    Table1 {
        #[arg(long)]
        alpha: Option<f64>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match commands::run(cli, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Malformed(m) => {
                    eprintln!("error: {m}\n\n{}", Cli::command().render_usage());
                }
                Failure::Io(m) => eprintln!("error: {m}"),
                Failure::Lib(e) => eprintln!("error: {e}"),
                Failure::Verification(m) => eprintln!("verification failed: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

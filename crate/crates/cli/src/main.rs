mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use looptheta::error::Error;

use crate::config::RunConfig;

#[derive(Parser, Debug)]
#[command(name = "looptheta", version, about = "Batch front-end for the looptheta library")]
struct Cli {
    /// JSON run configuration; defaults to $LOOPTHETA_CONFIG.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for JSON and CSV artifacts, created when missing.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Global truncation depth D.
    #[arg(long, global = true)]
    truncation_depth: Option<i32>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tame symbols, Weil indices, local metaplectic symbols and the product formula.
    Symbols {
        #[command(subcommand)]
        op: SymbolOp,
    },
    /// Compare the closed-formula Weil phase with the matrix oracle on random samples.
    Phase(PhaseArgs),
    /// Orbit invariants of random tensors and their O(V)[[t]] translates.
    Orbits(OrbitArgs),
    /// Ideal classes, Brandt matrices and eigenforms of the maximal order at p.
    Brandt(BrandtArgs),
    /// Classical theta coefficients of one lattice pair, optionally the Yoshida lift.
    Theta(ThetaArgs),
    /// Loop theta lift values along a list of q.
    LoopTheta(LoopThetaArgs),
    /// Growth exponent of prod_j (1 + beta e^{-x rho^j}).
    Estimate(EstimateArgs),
    /// Run the acceptance suite and write a pass/fail manifest.
    Reproduce(ReproduceArgs),
}

#[derive(Subcommand, Debug)]
pub enum SymbolOp {
    Tame {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
    },
    Weil {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long)]
        place: String,
    },
    Symbol {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        #[arg(long)]
        place: String,
    },
    Product {
        #[arg(long, allow_hyphen_values = true)]
        a: String,
        #[arg(long, allow_hyphen_values = true)]
        b: String,
        /// Comma-separated places; the dyadic place is added internally.
        #[arg(long)]
        places: String,
    },
}

#[derive(Args, Debug)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Parabolic index, dim l+.
    #[arg(long, default_value_t = 1)]
    pub a: usize,
    /// Diagonal of the quadratic space V.
    #[arg(long, default_value = "1,1")]
    pub v: String,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    /// Depth of the random tensors.
    #[arg(long, default_value_t = 2)]
    pub tensor_depth: i32,
}

#[derive(Args, Debug)]
pub struct OrbitArgs {
    #[arg(long, default_value_t = 100)]
    pub random: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value = "1,1")]
    pub v: String,
}

#[derive(Args, Debug)]
pub struct BrandtArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long, default_value = "2,3,5")]
    pub primes: String,
}

#[derive(Args, Debug)]
pub struct ThetaArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub trace_bound: Option<i64>,
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    #[arg(long, default_value_t = 0)]
    pub j: usize,
    /// Also write the lift of the first non-constant eigenform.
    #[arg(long)]
    pub lift: bool,
}

#[derive(Args, Debug)]
pub struct LoopThetaArgs {
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub q_list: Option<String>,
    /// Fixed number of depth factors.
    #[arg(long, conflicts_with = "tail_eps")]
    pub depth: Option<usize>,
    /// Smallest depth whose omitted factors are within this of 1.
    #[arg(long)]
    pub tail_eps: Option<f64>,
    /// Upper triangle "z11,z12,z22" of the base point.
    #[arg(long, default_value = "0+1i,0+0i,0+1i")]
    pub z0: String,
    #[arg(long)]
    pub trace_bound: Option<i64>,
}

#[derive(Args, Debug)]
pub struct EstimateArgs {
    #[arg(long)]
    pub beta: f64,
    #[arg(long)]
    pub rho: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub x_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub x_max: f64,
    #[arg(long, default_value_t = 25)]
    pub points: usize,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    #[arg(long)]
    pub quick: bool,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 2,
        Error::PrecisionFailure(_) => 3,
        _ => 4,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match RunConfig::load(cli.config.as_deref()) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", e);
            return ExitCode::from(2);
        }
    };
    if let Some(d) = cli.truncation_depth {
        cfg.depth = d;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = cli.out_dir {
        cfg.output_dir = o;
    }
    if let Err(e) = cfg.validate() {
        eprintln!("{}", e);
        return ExitCode::from(2);
    }
    looptheta::exact_arith::set_truncation_depth(cfg.depth);
    let result = match &cli.command {
        Command::Symbols { op } => commands::symbols(&cfg, op),
        Command::Phase(a) => commands::phase(&cfg, a),
        Command::Orbits(a) => commands::orbits(&cfg, a),
        Command::Brandt(a) => commands::brandt(&cfg, a),
        Command::Theta(a) => commands::theta(&cfg, a),
        Command::LoopTheta(a) => commands::loop_theta(&cfg, a),
        Command::Estimate(a) => commands::estimate(&cfg, a),
        Command::Reproduce(a) => commands::reproduce(&cfg, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("{}", e);
            ExitCode::from(exit_code(&e))
        }
    }
}

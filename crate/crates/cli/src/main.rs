use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod exit;

use exit::{Failure, EXIT_USAGE};

/// Canonical automorphisms of separable multipartite states.
#[derive(Parser, Debug)]
#[command(name = "sepauto", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a superoperator file (SOP-1) with an answer sidecar.
    Gen(GenArgs),
    /// Decompose a superoperator into canonical factors.
    Decompose(DecomposeArgs),
    /// Check product pure state preservation on random samples.
    Verify(VerifyArgs),
    /// Partial transpose test of a density operator (HMX-1).
    Ppt(PptArgs),
    /// Support function of the product numerical range (HMX-1).
    Pnr(PnrArgs),
    /// Safe step and determinant profile of a random depolarizing direction.
    Lemma3(Lemma3Args),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Canonical,
    Lemma3,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[arg(long, value_enum)]
    pub kind: GenKind,
    /// Tensor shape, e.g. 2x2x3.
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Step for lemma3 maps; defaults to half the safe step.
    #[arg(long)]
    pub t: Option<f64>,
    /// Product states used to bound the safe step.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Output SOP-1 file; the sidecar goes to `<out>.answer.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    pub input: PathBuf,
    /// Expected shape; must match the file.
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_accept: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub tol_reject: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_purity: f64,
    /// Report file (JSON); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub shape: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol_purity: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PptArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub shape: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct PnrArgs {
    pub input: PathBuf,
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value_t = 64)]
    pub angles: usize,
    #[arg(long, default_value_t = 16)]
    pub starts: usize,
    #[arg(long, default_value_t = 200)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Inner sample points.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Support function CSV (theta,h); inner points go to `<out stem>.points.csv`.
    #[arg(long)]
    pub out: PathBuf,
    /// Override the inner points path.
    #[arg(long)]
    pub points: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Lemma3Args {
    #[arg(long)]
    pub shape: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Product states used to bound the safe step.
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    /// Comma-separated t values for the determinant fit.
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.75,1,1.5,2")]
    pub t: Vec<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Decompose(args) => commands::decompose(args),
        Command::Verify(args) => commands::verify(args),
        Command::Ppt(args) => commands::ppt(args),
        Command::Pnr(args) => commands::pnr(args),
        Command::Lemma3(args) => commands::lemma3(args),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("sepauto: {message}");
            ExitCode::from(code)
        }
    }
}

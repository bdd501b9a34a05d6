//! `hyperperc`: batch driver for the Poisson-Voronoi percolation estimators
//! and audits.
//!
//! Exit status: 0 on success, 1 when an audit fails its statistical
//! criterion, 2 on usage, parse or range errors, 3 when a computation cannot
//! finish (for example a crossing that is not bracketed).

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;
use config::{Command, EventKind, ExperimentConfig, Settings, Values};

#[derive(Parser)]
#[command(name = "hyperperc", version, about = "Poisson-Voronoi percolation on the hyperbolic plane")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One-arm probabilities θ_n(p) = P(0 ↔ S(0,n)) on a (p, n) grid, as CSV.
    Theta(Flags),
    /// Critical-point proxy p̂_c: where P(0 ↔ S(0,n) | owner of 0 black) crosses ½ (JSON interval).
    Pc(Flags),
    /// Subcritical decay of θ_n(p) in n with a log-linear fit (JSON; --points writes the CSV).
    Decay(Flags),
    /// Supercritical mean-field bound θ(p) ≥ c (p - p_c) on a p grid.
    Meanfield(Flags),
    /// Russo's formula: finite-difference dθ/dp against the mean pivotal count.
    RussoAudit(Flags),
    /// FKG inequality P(A ∩ B) ≥ P(A) P(B) for two increasing one-arm events.
    FkgAudit(Flags),
    /// OSSS inequality Var f ≤ Σ δ_i Inf_i, exactly, on discrete product-space cases.
    OsssVerify(Flags),
    /// Revealments δ_x of the exploration algorithm A_k per ε-sector, as CSV.
    Reveal(Flags),
    /// Resampling influences Inf_x of the ε-sectors on {0 ↔ S(0,n)}, as CSV.
    Influence(Flags),
    /// dθ_n/dp ≥ ½ Σ_x Inf_x - 3σ from coupled samples.
    Lemma4Audit(Flags),
    /// Differential inequality θ_n' ≥ (c n / Σ_n) θ_n on a uniform p grid.
    Sharpness(Flags),
    /// Sector counts N_k and areas of the ε-discretization.
    Sectors(Flags),
}

impl Cmd {
    fn split(self) -> (Command, Flags) {
        match self {
            Cmd::Theta(f) => (Command::Theta, f),
            Cmd::Pc(f) => (Command::Pc, f),
            Cmd::Decay(f) => (Command::Decay, f),
            Cmd::Meanfield(f) => (Command::Meanfield, f),
            Cmd::RussoAudit(f) => (Command::RussoAudit, f),
            Cmd::FkgAudit(f) => (Command::FkgAudit, f),
            Cmd::OsssVerify(f) => (Command::OsssVerify, f),
            Cmd::Reveal(f) => (Command::Reveal, f),
            Cmd::Influence(f) => (Command::Influence, f),
            Cmd::Lemma4Audit(f) => (Command::Lemma4Audit, f),
            Cmd::Sharpness(f) => (Command::Sharpness, f),
            Cmd::Sectors(f) => (Command::Sectors, f),
        }
    }
}

#[derive(Args)]
struct Flags {
    /// JSON config file; flags given here override its keys.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Intensity λ of the Poisson process [default: 1].
    #[arg(long)]
    lambda: Option<f64>,
    /// Dimension; only 2 is supported [default: 2].
    #[arg(long)]
    d: Option<usize>,
    /// Occupation probability, or a comma-separated grid.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    p: Option<Vec<f64>>,
    /// Arm length, or a comma-separated list.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    n: Option<Vec<f64>>,
    /// Sector scale ε [default: 0.25].
    #[arg(long)]
    epsilon: Option<f64>,
    /// Starting sphere S(0,k) of A_k [default: 0].
    #[arg(long)]
    k: Option<f64>,
    /// Monte Carlo trials [default: 1000].
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed; required by every sampling command.
    #[arg(long)]
    seed: Option<u64>,
    /// Failure-probability budget recorded with the run [default: 1e-6].
    #[arg(long)]
    tol_fail: Option<f64>,
    /// Output file [default: stdout].
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Worker threads [default: $HYPERPERC_WORKERS, else available parallelism].
    #[arg(long)]
    workers: Option<usize>,
    /// Finite-difference half-step in p [default: 0.05].
    #[arg(long)]
    dp: Option<f64>,
    /// Bisection width for pc [default: 1e-3].
    #[arg(long)]
    p_tolerance: Option<f64>,
    /// Known p_c for meanfield (estimated when absent).
    #[arg(long)]
    pc: Option<f64>,
    /// Arm length used when meanfield estimates p_c [default: 6].
    #[arg(long)]
    pc_n: Option<f64>,
    /// Largest n for sharpness [default: 4].
    #[arg(long)]
    n_max: Option<u32>,
    /// Constant c for sharpness [default: 0.1].
    #[arg(long)]
    c: Option<f64>,
    /// Extra slack for sharpness violations [default: 0].
    #[arg(long)]
    tolerance: Option<f64>,
    /// Event audited by russo-audit [default: one-arm].
    #[arg(long, value_enum)]
    event: Option<EventKind>,
    /// Distance of the fkg-audit event bases from the origin [default: 3].
    #[arg(long)]
    offset: Option<f64>,
    /// Radius covered by sectors [default: 10].
    #[arg(long)]
    radius: Option<f64>,
    /// OSSS case file (JSON); repeat for several.
    #[arg(long, value_name = "FILE")]
    case: Option<Vec<PathBuf>>,
    /// reveal: report every queried sector instead of the picked ones.
    #[arg(long)]
    queried: bool,
    /// decay: also write the (n, θ̂_n) points as CSV here.
    #[arg(long, value_name = "FILE")]
    points: Option<PathBuf>,
    /// Emit (x, y, y_err) triples instead of the full report.
    #[arg(long)]
    plot_data: bool,
}

impl Flags {
    fn settings(self) -> (Option<PathBuf>, Settings) {
        let s = Settings {
            command: None,
            lambda: self.lambda,
            d: self.d,
            p: self.p.map(Values::Many),
            n: self.n.map(Values::Many),
            epsilon: self.epsilon,
            k: self.k,
            trials: self.trials,
            seed: self.seed,
            tol_fail: self.tol_fail,
            output: self.output,
            workers: self.workers,
            dp: self.dp,
            p_tolerance: self.p_tolerance,
            pc: self.pc,
            pc_n: self.pc_n,
            n_max: self.n_max,
            c: self.c,
            tolerance: self.tolerance,
            event: self.event,
            offset: self.offset,
            radius: self.radius,
            case: self.case,
            queried: self.queried.then_some(true),
            points: self.points,
            plot_data: self.plot_data.then_some(true),
        };
        (self.config, s)
    }
}

fn configure(command: Command, flags: Flags) -> Result<ExperimentConfig, config::ConfigError> {
    let (file, top) = flags.settings();
    let base = match file {
        Some(path) => Settings::from_file(&path)?,
        None => Settings::default(),
    };
    if let Some(named) = base.command.as_deref() {
        if named != command.name() {
            eprintln!("note: config file names command `{named}`; running `{}`", command.name());
        }
    }
    ExperimentConfig::resolve(command, base.overlay(top))
}

fn exit_code(e: &hyperperc::Error) -> u8 {
    use hyperperc::Error::*;
    match e {
        Domain(_) | Usage(_) | Parse(_) | Json(_) | InvalidTree(_) | Io(_) => 2,
        _ => 3,
    }
}

fn main() -> ExitCode {
    let (command, flags) = Cli::parse().command.split();
    let cfg = match configure(command, flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start {} workers: {e}", cfg.workers);
            return ExitCode::from(2);
        }
    };
    match pool.install(|| commands::run(&cfg)) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => {
            eprintln!("{}: criterion FAILED", cfg.command.name());
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

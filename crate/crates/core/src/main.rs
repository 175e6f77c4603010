use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use renormal::harness::config::{ExperimentConfig, ExperimentKind, Overrides};
use renormal::harness::run;
use renormal::Error;

#[derive(Parser)]
#[command(name = "renormal", version, about = "Commutator refinement experiments on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// E2 or double-commutator norms along the δ ladder.
    Sweep(Common),
    /// Term-by-term decomposition of the double commutator.
    CheckIdentities(Common),
    /// Convergence of the grouped terms to their closed-form limits.
    Limits(Common),
    /// Entropy combination of the error terms.
    Theorem3(Common),
    /// Mollifier moment identities.
    Moments(Common),
    /// Simulate SPDE paths.
    Simulate(Common),
    /// Monte Carlo a-priori estimate.
    Apriori(Common),
}

#[derive(Args)]
struct Common {
    /// Experiment config (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Grid points per axis.
    #[arg(long = "N", value_name = "N")]
    n: Option<usize>,
    /// Smallest ladder exponent k (largest δ = 2^-k).
    #[arg(long)]
    delta_min_k: Option<u32>,
    /// Largest ladder exponent k (smallest δ = 2^-k).
    #[arg(long)]
    delta_max_k: Option<u32>,
    /// Sets every seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Command {
    fn parts(&self) -> (&'static str, &[ExperimentKind], &Common) {
        use ExperimentKind::*;
        match self {
            Command::Sweep(c) => ("sweep", &[E2Sweep, DoubleCommutatorSweep], c),
            Command::CheckIdentities(c) => ("check-identities", &[DecompositionCheck], c),
            Command::Limits(c) => ("limits", &[LimitResiduals], c),
            Command::Theorem3(c) => ("theorem3", &[Theorem3Sweep], c),
            Command::Moments(c) => ("moments", &[MomentCheck], c),
            Command::Simulate(c) => ("simulate", &[SpdeRun], c),
            Command::Apriori(c) => ("apriori", &[AprioriMc], c),
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let (name, kinds, c) = cli.command.parts();
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if !kinds.contains(&cfg.kind) {
        return Err(Error::Config(format!("`{name}` cannot run a `{}` experiment", cfg.kind)));
    }
    cfg.apply(&Overrides { n: c.n, delta_min_k: c.delta_min_k, delta_max_k: c.delta_max_k, seed: c.seed, out: c.out.clone() })?;
    let (report, written) = run(&cfg)?;
    for check in &report.checks {
        println!(
            "{:<32} {:>12.4e} (threshold {:.4e}) {}",
            check.name,
            check.value,
            check.threshold,
            if check.passed { "ok" } else { "FAILED" }
        );
    }
    for f in &report.fits {
        match f.outcome.slope() {
            Some(s) => println!("slope {:<26} {s:.4}", f.quantity),
            None => println!("slope {:<26} none", f.quantity),
        }
    }
    for path in &written {
        println!("wrote {}", path.display());
    }
    println!("verdict: {}", report.verdict.as_str());
    Ok(report.verdict.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

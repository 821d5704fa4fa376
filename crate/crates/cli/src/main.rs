use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sandwich_core::harness::{run_experiment, ExperimentConfig, ExperimentKind, SEED_ENV};
use sandwich_core::Error;

#[derive(Parser)]
#[command(name = "sandwich", version, about = "Random regular graph models and couplings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw samples from a model and report census statistics.
    Sample(Overrides),
    /// Exact law of a small model.
    Enumerate(Overrides),
    /// Run a coupling procedure (rejection, dout-gnp, matchings).
    Couple(Overrides),
    /// Compare empirical moments with predictions.
    Moments(Overrides),
    /// Full sandwich pipeline.
    Sandwich(Overrides),
    /// Exact coupling study between two small models.
    MicroStudy(Overrides),
}

#[derive(Args)]
struct Overrides {
    /// TOML config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    x: Option<f64>,
    #[arg(long)]
    i: Option<usize>,
    #[arg(long)]
    tau: Option<usize>,
    #[arg(long)]
    fn_bound: Option<f64>,
    #[arg(long)]
    model_b: Option<String>,
    #[arg(long)]
    d_b: Option<usize>,
    #[arg(long)]
    statistics: Option<String>,
    #[arg(long)]
    trials: Option<u64>,
    /// Decimal or 0x-prefixed hex.
    #[arg(long, value_parser = parse_seed)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    gate_se: Option<f64>,
}

fn parse_seed(s: &str) -> Result<u64, String> {
    match s.strip_prefix("0x") {
        Some(h) => u64::from_str_radix(h, 16),
        None => s.parse(),
    }
    .map_err(|e| e.to_string())
}

impl Overrides {
    fn into_config(self, kind: ExperimentKind) -> Result<ExperimentConfig, Error> {
        let base = match &self.config {
            Some(p) => ExperimentConfig::load(p)?,
            None => ExperimentConfig::default(),
        };
        if base.kind.is_some_and(|k| k != kind) {
            return Err(Error::Config(format!("config file is for a different experiment kind: {:?}", base.kind)));
        }
        let flags = ExperimentConfig {
            kind: Some(kind),
            model: self.model,
            n: self.n,
            d: self.d,
            p: self.p,
            x: self.x,
            i: self.i,
            tau: self.tau,
            fn_bound: self.fn_bound,
            model_b: self.model_b,
            d_b: self.d_b,
            i_b: None,
            statistics: self.statistics,
            trials: self.trials,
            seed: self.seed,
            out: self.out,
            gate_se: self.gate_se,
        };
        base.merged(&flags).with_env_seed(std::env::var(SEED_ENV).ok().as_deref())?.validate()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, o) = match cli.command {
        Command::Sample(o) => (ExperimentKind::Sample, o),
        Command::Enumerate(o) => (ExperimentKind::Enumerate, o),
        Command::Couple(o) => (ExperimentKind::Couple, o),
        Command::Moments(o) => (ExperimentKind::Moments, o),
        Command::Sandwich(o) => (ExperimentKind::Sandwich, o),
        Command::MicroStudy(o) => (ExperimentKind::MicroStudy, o),
    };
    let cfg = match o.into_config(kind) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("sandwich: {e}");
            return ExitCode::from(2);
        }
    };
    let rs = match run_experiment(cfg) {
        Ok(rs) => rs,
        Err(e @ (Error::Config(_) | Error::InvalidParameter(_) | Error::Unknown(_))) => {
            eprintln!("sandwich: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("sandwich: {e}");
            return ExitCode::from(1);
        }
    };
    print!("{}", rs.to_csv());
    for g in &rs.gates {
        eprintln!("gate {}: {} {}", g.name, if g.passed { "pass" } else { "FAIL" }, g.detail);
    }
    if rs.gates_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    }
}

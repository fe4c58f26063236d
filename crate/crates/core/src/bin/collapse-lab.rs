use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use collapse_lab::envlab::{gen_random_mdp, DatasetSpec};
use collapse_lab::lab::verify::{run_suite, Suite, DEFAULT_SEED};
use collapse_lab::lab::{
    self, parse_grid, read_operator, sweep, sweep_to_writer, write_json, CriticFile, ExperimentConfig, OptimizerKind,
    SweepGrid, SweepSource,
};
use collapse_lab::spectral::stability_report;
use collapse_lab::td::TargetRule;
use collapse_lab::{LabError, Result};

#[derive(Parser)]
#[command(name = "collapse-lab", version, about = "TD stability experiments with Adam and orthogonality-corrected Adam")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an offline dataset from a random MDP or the star fixture.
    GenData(GenDataArgs),
    /// Train a critic offline and write a monitored trace.
    Train(RunArgs),
    /// One-shot stability report for a critic on a dataset.
    Spectrum(RunArgs),
    /// Companion spectral radius over a grid of step sizes and couplings.
    Sweep(SweepArgs),
    /// Run a verification suite and print a JSON verdict.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Write a named fixture instead of a random MDP (only `baird`).
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long, default_value_t = 8)]
    states: usize,
    #[arg(long, default_value_t = 4)]
    actions: usize,
    #[arg(long, default_value_t = 256)]
    size: usize,
    #[arg(long, default_value_t = 8)]
    feature_dim: usize,
    #[arg(long, default_value_t = 0.3)]
    epsilon: f64,
    #[arg(long, default_value_t = 100)]
    episode_cap: usize,
    #[arg(long, default_value_t = 0.99)]
    gamma: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "data")]
    out: PathBuf,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// JSON experiment config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    /// `linear`, `mlp:W1,W2,…` or a critic JSON file.
    #[arg(long)]
    critic: Option<String>,
    #[arg(long)]
    optimizer: Option<OptimizerKind>,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    rule: Option<TargetRule>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    monitor_every: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Sweep a fixed operator S from JSON instead of a critic and dataset.
    #[arg(long)]
    operator: Option<PathBuf>,
    /// Grids are `a,b,c` or `lo:hi:n`.
    #[arg(long = "eta-grid", default_value = "1e-4:1:9")]
    eta_grid: String,
    #[arg(long = "gamma-grid")]
    gamma_grid: Option<String>,
    #[arg(long = "alpha-grid", default_value = "1")]
    alpha_grid: String,
    #[arg(long = "beta1-grid", default_value = "0.9")]
    beta1_grid: String,
}

#[derive(Args)]
struct VerifyArgs {
    /// schur, hurwitz, optimizer, onestep, hamiltonian, bounds or all.
    #[arg(default_value = "all")]
    suite: Suite,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let flags = ExperimentConfig {
            dataset: self.dataset.clone(),
            features: self.features.clone(),
            critic: self.critic.clone(),
            optimizer: self.optimizer,
            kappa: self.kappa,
            tau: self.tau,
            eta: self.eta,
            gamma: self.gamma,
            alpha: self.alpha,
            beta1: self.beta1,
            beta2: self.beta2,
            eps: self.eps,
            rule: self.rule,
            steps: self.steps,
            monitor_every: self.monitor_every,
            seed: self.seed,
            out: self.out.clone(),
        };
        match &self.config {
            Some(path) => Ok(ExperimentConfig::load(path)?.merged(flags)),
            None => Ok(flags),
        }
    }
}

#[derive(Serialize)]
struct TrainSummary {
    status: String,
    optimizer: OptimizerKind,
    steps_requested: usize,
    steps_run: usize,
    initial_loss: Option<f64>,
    final_loss: Option<f64>,
}

fn gen_data(args: &GenDataArgs) -> Result<()> {
    match args.fixture.as_deref() {
        Some("baird") => lab::write_baird(&args.out)?,
        Some(other) => return Err(LabError::Config(format!("unknown fixture {other}; expected baird"))),
        None => {
            let mdp = gen_random_mdp(args.seed, args.states, args.actions, args.feature_dim, args.gamma)?;
            let spec = DatasetSpec { episode_cap: args.episode_cap, ..DatasetSpec::new(args.epsilon, args.size, args.seed) };
            lab::write_generated(&args.out, &mdp, &spec)?;
        }
    }
    eprintln!("wrote {}", args.out.join(lab::DATASET_FILE).display());
    Ok(())
}

fn train(args: &RunArgs) -> Result<()> {
    let exp = args.config()?.resolve()?;
    let outcome = lab::train(exp.critic, &exp.dataset, &exp.train)?;
    std::fs::create_dir_all(&exp.out).map_err(|e| LabError::io(&exp.out, e))?;
    lab::write_trace(exp.out.join("trace.csv"), &outcome.rows)?;
    CriticFile::from_critic(&outcome.critic, outcome.optimizer_state.clone()).save(exp.out.join("critic.json"))?;
    let summary = TrainSummary {
        status: outcome.status.to_string(),
        optimizer: exp.train.optimizer,
        steps_requested: exp.train.steps,
        steps_run: outcome.loss_history.len().saturating_sub(1),
        initial_loss: outcome.loss_history.first().copied(),
        final_loss: outcome.loss_history.last().copied(),
    };
    write_json(exp.out.join("summary.json"), &summary)?;
    eprintln!("{}: {} after {} steps", exp.out.display(), summary.status, summary.steps_run);
    Ok(())
}

fn emit_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    match out {
        Some(path) => write_json(path, value),
        None => {
            let text = serde_json::to_string_pretty(value)?;
            writeln!(std::io::stdout(), "{text}").map_err(|e| LabError::io("<stdout>", e))
        }
    }
}

fn spectrum(args: &RunArgs) -> Result<()> {
    let report = stability_report(&args.config()?.snapshot()?)?;
    emit_json(args.out.as_deref(), &report)
}

fn run_sweep(args: &SweepArgs) -> Result<()> {
    let cfg = args.run.config()?;
    let mut grid = SweepGrid {
        eta: parse_grid(&args.eta_grid)?,
        gamma: Vec::new(),
        alpha: parse_grid(&args.alpha_grid)?,
        beta1: parse_grid(&args.beta1_grid)?,
    };
    let rows = match &args.operator {
        Some(path) => {
            let s = read_operator(path)?;
            sweep(SweepSource::Operator(&s), &grid)?
        }
        None => {
            let snap = cfg.snapshot()?;
            grid.gamma = match &args.gamma_grid {
                Some(g) => parse_grid(g)?,
                None => vec![snap.gamma],
            };
            sweep(SweepSource::Snapshot(&snap), &grid)?
        }
    };
    match &cfg.out {
        Some(path) => lab::write_sweep(path, &rows),
        None => sweep_to_writer(std::io::stdout().lock(), &rows),
    }
}

/// Returns whether every check passed.
fn verify(args: &VerifyArgs) -> Result<bool> {
    let report = run_suite(args.suite, args.seed)?;
    for c in &report.checks {
        eprintln!("{c}");
    }
    emit_json(args.out.as_deref(), &report)?;
    Ok(report.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = lab::configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let result = match &cli.command {
        Command::GenData(a) => gen_data(a).map(|_| true),
        Command::Train(a) => train(a).map(|_| true),
        Command::Spectrum(a) => spectrum(a).map(|_| true),
        Command::Sweep(a) => run_sweep(a).map(|_| true),
        Command::Verify(a) => verify(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 1 })
        }
    }
}

//! `inid`: calibrate noise scales, audit them, and regenerate experiment CSVs.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use inid_core::experiments::{run_experiment, write_csv, ExperimentName, ExperimentOptions, SCHEMA_VERSION};
use inid_core::gaussian::realized_mu;
use inid_core::mechanism::audit;
use inid_core::{
    calibrate_laplace, pure_dp_check, GaussianCalibrator, Mechanism, Mode, Normalization, PrivacyBudget,
    ProfileFamily, ProfileKind, SeededRng, SensitivityProfile,
};
use serde_json::json;

#[derive(Parser)]
#[command(name = "inid", version, about = "Per-coordinate noise calibration for Gaussian and Laplace mechanisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute noise scales for a sensitivity profile and print JSON.
    Calibrate(CalibrateArgs),
    /// Calibrate inid noise and run a Monte-Carlo privacy audit.
    Audit(AuditArgs),
    /// Regenerate one experiment as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct ProfileArgs {
    /// JSON array or CSV file of per-coordinate sensitivities.
    #[arg(long, conflicts_with_all = ["family", "k", "normalize"])]
    profile: Option<PathBuf>,
    /// uniform, one_hot, linear, quadratic or exponential.
    #[arg(long, requires = "k")]
    family: Option<ProfileKind>,
    #[arg(long = "K", alias = "k", requires = "family")]
    k: Option<usize>,
    /// l1, l2 or none.
    #[arg(long, default_value = "l2")]
    normalize: Normalization,
}

impl ProfileArgs {
    fn load(&self) -> anyhow::Result<SensitivityProfile> {
        match (&self.profile, self.family, self.k) {
            (Some(path), None, None) => {
                SensitivityProfile::load(path).with_context(|| format!("reading profile {}", path.display()))
            }
            (None, Some(kind), Some(k)) => Ok(ProfileFamily::new(kind, k, self.normalize).generate()?),
            _ => bail!("give exactly one of --profile FILE or --family NAME --K N"),
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    mechanism: Mechanism,
    #[arg(long, default_value = "inid")]
    mode: Mode,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Error order: scales minimize E‖T‖_p^p.
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    mechanism: Mechanism,
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Tolerated δ; defaults to --delta (0 for Laplace).
    #[arg(long)]
    delta_target: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long)]
    seed: u64,
    #[command(flatten)]
    profile: ProfileArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    /// fig_eps_sweep, fig_k_sweep, fig_gini, fig_lap_vs_gau, table_staircase, dpcd or dppca.
    name: String,
    #[arg(long)]
    out: PathBuf,
    /// Required for dpcd and dppca.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long = "max-K", alias = "max-k")]
    max_k: Option<usize>,
    #[arg(long = "K", alias = "k")]
    k: Option<usize>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

fn budget_for(mechanism: Mechanism, epsilon: f64, delta: Option<f64>) -> anyhow::Result<PrivacyBudget> {
    let delta = match (mechanism, delta) {
        (_, Some(d)) => d,
        (Mechanism::Laplace, None) => 0.0,
        (Mechanism::Gaussian, None) => bail!("--delta is required for the Gaussian mechanism"),
    };
    Ok(PrivacyBudget::new(epsilon, delta)?)
}

fn calibrate(args: &CalibrateArgs) -> anyhow::Result<()> {
    let profile = args.profile.load()?;
    let budget = budget_for(args.mechanism, args.epsilon, args.delta)?;
    let report = match args.mechanism {
        Mechanism::Gaussian => {
            let cal = GaussianCalibrator::new(budget)?;
            let s = cal.calibrate(&profile, args.mode, args.p)?;
            json!({
                "schema_version": SCHEMA_VERSION,
                "mechanism": s.mechanism,
                "mode": s.mode,
                "p": s.error_order_p,
                "epsilon": budget.epsilon,
                "delta": budget.delta,
                "scales": s.scales,
                "mu0": cal.mu0(),
                "realized_mu": realized_mu(&profile, &s)?,
                "theoretical_error": s.theoretical_error,
                "theoretical_error_db": s.theoretical_error_db(),
            })
        }
        Mechanism::Laplace => {
            let eps = inid_core::laplace::effective_epsilon(&budget)?;
            let s = calibrate_laplace(&profile, eps, args.mode, args.p)?;
            json!({
                "schema_version": SCHEMA_VERSION,
                "mechanism": s.mechanism,
                "mode": s.mode,
                "p": s.error_order_p,
                "epsilon": budget.epsilon,
                "delta": budget.delta,
                "scales": s.scales,
                "theoretical_error": s.theoretical_error,
                "theoretical_error_db": s.theoretical_error_db(),
                "realized_budget": pure_dp_check(&profile, &s)?,
            })
        }
    };
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn run_audit(args: &AuditArgs) -> anyhow::Result<bool> {
    let profile = args.profile.load()?;
    let budget = budget_for(args.mechanism, args.epsilon, args.delta)?;
    let scales = match args.mechanism {
        Mechanism::Gaussian => GaussianCalibrator::new(budget)?.calibrate(&profile, Mode::Inid, 2.0)?,
        Mechanism::Laplace => calibrate_laplace(&profile, budget.epsilon, Mode::Inid, 2.0)?,
    };
    let target = args.delta_target.unwrap_or(budget.delta);
    let rng = SeededRng::new(args.seed, 0);
    let report = audit(&scales, &profile, budget.epsilon, target, args.samples, &rng)?;
    let passed = report.passed();
    let out = json!({
        "schema_version": SCHEMA_VERSION,
        "seed": args.seed,
        "passed": passed,
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(passed)
}

fn experiment(args: &ExperimentArgs) -> anyhow::Result<()> {
    let name: ExperimentName = args.name.parse()?;
    if name.is_randomized() && args.seed.is_none() {
        bail!("experiment {name} is randomized and needs --seed");
    }
    let d = ExperimentOptions::default();
    let opts = ExperimentOptions {
        seed: args.seed.unwrap_or(d.seed),
        k: args.k.unwrap_or(d.k),
        max_k: args.max_k.unwrap_or(d.max_k),
        epsilon: args.epsilon.unwrap_or(d.epsilon),
        delta: args.delta.unwrap_or(d.delta),
        trials: args.trials.unwrap_or(d.trials),
    };
    let rows = run_experiment(name, &opts)?;
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut w = BufWriter::new(file);
    write_csv(&rows, &mut w)?;
    w.flush()?;
    eprintln!("wrote {} rows to {}", rows.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Calibrate(a) => calibrate(a).map(|_| true),
        Command::Audit(a) => run_audit(a),
        Command::Experiment(a) => experiment(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

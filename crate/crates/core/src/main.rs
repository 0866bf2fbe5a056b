use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use nvdiss::config::{catalog, ConfigFile, ExperimentConfig, Solver};
use nvdiss::model::{
    check_validity, effective_params, presets, resonance_condition_check, Tier, DEFAULT_RATIO_THRESHOLD,
    DEFAULT_RESONANCE_TOL,
};
use nvdiss::runner::{self, DEFAULT_OUT_DIR, OUT_DIR_ENV};
use nvdiss::{Error, Result};

/// Dissipative entanglement of two NV centers in coupled WGM resonators.
///
/// Exit codes: 0 success, 2 invalid config, 3 solver failure, 4 invariant
/// violation. stdout carries only the JSON summary; logs go to stderr
/// (RUST_LOG controls verbosity).
#[derive(Parser)]
#[command(name = "nvdiss", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its artifacts.
    Run(RunArgs),
    /// Run every point of the config's sweep axis.
    Sweep(RunArgs),
    /// List the shipped experiment and parameter presets.
    Presets,
    /// Resolve a config and report effective parameters and validity margins.
    Validate(SelectArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Experiment or parameter preset; overrides the file's `preset`.
    #[arg(long)]
    preset: Option<String>,
    /// Fail on validity-margin or resonance warnings.
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    tier: Option<Tier>,
    #[arg(long)]
    solver: Option<Solver>,
    /// Number of quantum trajectories.
    #[arg(long = "traj")]
    traj: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    select: SelectArgs,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    out: PathBuf,
}

impl SelectArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        if self.preset.is_some() {
            file.preset = self.preset.clone();
        }
        if self.config.is_none() && file.preset.is_none() {
            return Err(Error::Config("give --config or --preset".into()));
        }
        file.tier = self.tier.or(file.tier);
        file.solver = self.solver.or(file.solver);
        file.n_traj = self.traj.or(file.n_traj);
        file.seed = self.seed.or(file.seed);
        file.resolve()
    }
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.select.resolve()?;
            if cfg.sweep.is_some() {
                return Err(Error::Config("config has a sweep axis; use the sweep verb".into()));
            }
            let report = runner::run(&cfg, &args.out, args.select.strict)?;
            log::info!("wrote {}", report.dir.display());
            print_json(&report.result.summary)
        }
        Command::Sweep(args) => {
            let cfg = args.select.resolve()?;
            let summary = runner::sweep(&cfg, &args.out, args.select.strict)?;
            print_json(&summary)
        }
        Command::Presets => {
            let params: Vec<&str> = presets::NAMES.to_vec();
            print_json(&json!({ "experiments": catalog(), "parameter_sets": params }))
        }
        Command::Validate(args) => {
            let cfg = args.resolve()?;
            let p = &cfg.params;
            let eff = effective_params(p)?;
            let validity = check_validity(p, DEFAULT_RATIO_THRESHOLD);
            let resonance = resonance_condition_check(p, p.photon_occupation, DEFAULT_RESONANCE_TOL)?;
            let ok = validity.all_pass() && resonance.within_tolerance;
            // strict failures keep stdout empty, like every other error path
            if args.strict {
                runner::preflight_strict(&cfg)?;
            }
            print_json(&json!({
                "config": cfg,
                "effective": eff,
                "validity": validity,
                "resonance": resonance,
                "all_pass": ok,
            }))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

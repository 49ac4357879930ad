mod config;
mod output;
mod runner;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{ExperimentConfig, GksParams, McmcFlags, RecursionParams};

/// Experiment runner for self-repelling reweighted random walks.
///
/// Subcommands read their parameters from a config file (TOML, or JSON
/// with a .json extension) passed via --config; `recursion` and
/// `gks-check` also accept inline flags. Outputs are CSV for sweeps and
/// JSON lines for certificates, each carrying a metadata header with the
/// artifact version, config hash, seed and RNG name. Exit codes: 0
/// success, 1 certification failure, 2 validation failure.
#[derive(Parser)]
#[command(name = "repelwalk", version, about)]
struct Cli {
    /// Config file; its `kind` must match the subcommand.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed for anything randomized.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,

    /// Worker threads (0 = rayon default). Results never depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact expectations by full enumeration (d*T <= 24).
    ///
    /// CSV columns: spec_hash, observable, value, log_partition,
    /// config_count.
    Exact,
    /// Ising-chain closed forms and banded transfer-matrix MSD.
    ///
    /// transfer-ising.csv: beta_eff, horizon, finite_chain_msd,
    /// susceptibility. transfer-banded.csv: alpha, horizon, msd,
    /// msd_per_step.
    Transfer,
    /// Metropolis estimate of an observable.
    ///
    /// mcmc.csv: spec_hash, observable, mean, std_error, n_samples, tau.
    /// With --traces, also mcmc-chain-<k>.csv: sweep, value.
    Mcmc {
        /// Write one trace CSV per chain.
        #[arg(long)]
        traces: bool,
    },
    /// Iterate the dyadic variance recursion.
    ///
    /// recursion.csv: n, v, y, log2_v, log2_y.
    Recursion {
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value_t = 60)]
        n_max: u32,
        /// Drop the min(., 2) clamp (exploratory variant).
        #[arg(long)]
        unclamped: bool,
    },
    /// Tilted-measure certificates (cross moments, four-point
    /// minimization, convexity, block covariance). tilt.jsonl records
    /// {check, inputs, slack, pass}; exits 1 on a failed certificate.
    Tilt,
    /// Randomized correlation-inequality suites plus the spin-polynomial
    /// positivity certificate. gks.jsonl records; exits 1 on failure.
    GksCheck {
        /// Product-inequality instances.
        #[arg(long, default_value_t = 500)]
        pairs: u32,
        /// Omission-monotonicity instances.
        #[arg(long, default_value_t = 200)]
        omissions: u32,
    },
    /// Classify an (alpha, c) grid against the analytic threshold.
    ///
    /// phase-diagram.csv: alpha, c, classification, boundary, ratio,
    /// n_reached, iteration_consistent.
    PhaseDiagram,
    /// MSD scaling sweep over dyadic horizons. The fitted slope is a
    /// reported diagnostic, never asserted.
    ///
    /// scaling-sweep.csv: horizon, mean, std_error, n_samples, tau.
    ScalingSweep,
    /// Run acceptance criteria and print one pass/fail line each.
    /// Selectors: all, short-range, long-range, gks, tilt, mcmc,
    /// recursion, a criterion name, or an id 1..=11.
    Acceptance {
        #[arg(default_value = "all")]
        selector: String,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    if cli.workers > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.workers)
            .build_global()
        {
            eprintln!("error: failed to size worker pool: {e}");
            return ExitCode::from(2);
        }
    }

    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Exact => runner::run_exact(&cli.out, cli.seed, required_config(cli, "exact")?),
        Command::Transfer => {
            runner::run_transfer(&cli.out, cli.seed, required_config(cli, "transfer")?)
        }
        Command::Mcmc { traces } => runner::run_mcmc(
            &cli.out,
            cli.seed,
            required_config(cli, "mcmc")?,
            McmcFlags { traces: *traces },
        ),
        Command::Recursion {
            alpha,
            c,
            n_max,
            unclamped,
        } => {
            let inline = alpha.zip(*c).map(|(alpha, c)| {
                ExperimentConfig::Recursion(RecursionParams {
                    alpha,
                    c,
                    n_max: *n_max,
                    unclamped: *unclamped,
                })
            });
            runner::run_recursion(&cli.out, cli.seed, config_or(cli, "recursion", inline)?)
        }
        Command::Tilt => runner::run_tilt(&cli.out, cli.seed, required_config(cli, "tilt")?),
        Command::GksCheck { pairs, omissions } => {
            let inline = Some(ExperimentConfig::Gks(GksParams {
                pairs: *pairs,
                omissions: *omissions,
                expansion_max_spins: 8,
            }));
            runner::run_gks(&cli.out, cli.seed, config_or(cli, "gks", inline)?)
        }
        Command::PhaseDiagram => {
            runner::run_phase_diagram(&cli.out, cli.seed, required_config(cli, "phase-diagram")?)
        }
        Command::ScalingSweep => {
            runner::run_scaling_sweep(&cli.out, cli.seed, required_config(cli, "scaling-sweep")?)
        }
        Command::Acceptance { selector } => runner::run_acceptance(selector),
    }
}

fn required_config(cli: &Cli, kind: &str) -> anyhow::Result<ExperimentConfig> {
    config_or(cli, kind, None)
}

fn config_or(
    cli: &Cli,
    kind: &str,
    inline: Option<ExperimentConfig>,
) -> anyhow::Result<ExperimentConfig> {
    if let Some(path) = &cli.config {
        let cfg = config::load(path)?;
        if cfg.kind() != kind {
            anyhow::bail!(
                "config kind '{}' does not match subcommand '{}'",
                cfg.kind(),
                kind
            );
        }
        return Ok(cfg);
    }
    inline.ok_or_else(|| {
        anyhow::anyhow!("subcommand '{kind}' needs --config <path> (or its inline parameters)")
    })
}

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use repelwalk::{GibbsSpec, Observable, PairPotential};

/// Full experiment description; the `kind` tag must match the subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ExperimentConfig {
    Exact(ExactParams),
    Transfer(TransferParams),
    Mcmc(McmcParams),
    Recursion(RecursionParams),
    Tilt(TiltParams),
    Gks(GksParams),
    PhaseDiagram(PhaseDiagramParams),
    ScalingSweep(ScalingSweepParams),
}

impl ExperimentConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentConfig::Exact(_) => "exact",
            ExperimentConfig::Transfer(_) => "transfer",
            ExperimentConfig::Mcmc(_) => "mcmc",
            ExperimentConfig::Recursion(_) => "recursion",
            ExperimentConfig::Tilt(_) => "tilt",
            ExperimentConfig::Gks(_) => "gks",
            ExperimentConfig::PhaseDiagram(_) => "phase-diagram",
            ExperimentConfig::ScalingSweep(_) => "scaling-sweep",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum PotentialParams {
    /// `W(z,t) = sum_i c_(i,t) (sum_p (z^p)^q)^i`
    Table { q: u32, entries: Vec<TableEntry> },
    /// `W(z,t) = ||z||^gamma / t^xi`
    PowerLaw { gamma: u32, xi: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableEntry {
    pub i: u32,
    pub t: u32,
    pub c: f64,
}

impl PotentialParams {
    pub fn build(&self) -> repelwalk::Result<PairPotential> {
        match self {
            PotentialParams::Table { q, entries } => {
                let list: Vec<(u32, u32, f64)> =
                    entries.iter().map(|e| (e.i, e.t, e.c)).collect();
                PairPotential::coefficient_table(*q, &list)
            }
            PotentialParams::PowerLaw { gamma, xi } => PairPotential::power_law(*gamma, *xi),
        }
    }
}

fn default_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpecParams {
    pub d: usize,
    pub horizon: usize,
    #[serde(default = "default_amplitude")]
    pub step_amplitude: f64,
    pub alpha: f64,
    pub potential: PotentialParams,
    #[serde(default)]
    pub interaction_set: Option<Vec<(usize, usize)>>,
}

impl SpecParams {
    pub fn build(&self) -> repelwalk::Result<GibbsSpec> {
        let spec = GibbsSpec::new(
            self.d,
            self.horizon,
            self.step_amplitude,
            self.alpha,
            self.potential.build()?,
        )?;
        match &self.interaction_set {
            Some(pairs) => spec.with_interaction_set(pairs.clone()),
            None => Ok(spec),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExactParams {
    pub spec: SpecParams,
    pub observables: Vec<Observable>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransferParams {
    #[serde(default)]
    pub ising: Option<IsingSection>,
    #[serde(default)]
    pub banded: Option<BandedSection>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingSection {
    pub beta_eff: f64,
    pub horizons: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandedSection {
    pub potential: PotentialParams,
    pub alpha: f64,
    pub horizons: Vec<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplerParams {
    pub sweeps: u64,
    pub burnin: u64,
    #[serde(default = "default_thin")]
    pub thin: u64,
    #[serde(default = "default_chains")]
    pub chains: u64,
    /// Overrides the global --seed when set.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_thin() -> u64 {
    1
}

fn default_chains() -> u64 {
    4
}

impl SamplerParams {
    pub fn build(&self, global_seed: u64) -> repelwalk::mcmc::SamplerConfig {
        repelwalk::mcmc::SamplerConfig {
            sweeps: self.sweeps,
            burnin: self.burnin,
            thin: self.thin,
            chains: self.chains,
            seed: self.seed.unwrap_or(global_seed),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct McmcParams {
    pub spec: SpecParams,
    pub observable: Observable,
    pub sampler: SamplerParams,
}

pub struct McmcFlags {
    pub traces: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecursionParams {
    pub alpha: f64,
    pub c: f64,
    pub n_max: u32,
    #[serde(default)]
    pub unclamped: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TiltParams {
    pub checks: Vec<TiltCheck>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum TiltCheck {
    /// Tilted cross moment of a symmetric measure, compared against the
    /// tanh bound when `beta * second_moment <= 2`.
    CrossMoment { atoms: Vec<(f64, f64)>, beta: f64 },
    TanhBound { v: f64, beta: f64 },
    FourPointMin {
        v: f64,
        beta: f64,
        grid_resolution: f64,
    },
    Convexity { v: f64, beta: f64, t_grid: Vec<f64> },
    BlockCovariance { alpha: f64, c: f64, horizon: usize },
    /// Randomized falsification trials of the tanh bound.
    RandomTrials { trials: u32, max_pairs: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GksParams {
    pub pairs: u32,
    pub omissions: u32,
    /// Expansion certificates run for N in 2..=this, gamma in {4, 6}.
    #[serde(default = "default_expansion_spins")]
    pub expansion_max_spins: usize,
}

fn default_expansion_spins() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PhaseDiagramParams {
    pub alphas: Vec<f64>,
    pub cs: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingSweepParams {
    pub gamma: u32,
    pub xi: f64,
    pub alpha: f64,
    pub horizons: Vec<usize>,
    pub sampler: SamplerParams,
}

/// Parses TOML (default) or JSON (`.json` extension).
pub fn load(path: &Path) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read config {}", path.display()))?;
    let cfg = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).with_context(|| format!("invalid JSON config {}", path.display()))?
    } else {
        toml::from_str(&text).with_context(|| format!("invalid TOML config {}", path.display()))?
    };
    Ok(cfg)
}

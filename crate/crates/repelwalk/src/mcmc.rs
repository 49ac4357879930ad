//! Metropolis single-flip sampler for horizons beyond the enumeration cap.
//!
//! The target density is `exp(alpha * energy)` relative to the uniform sign
//! measure, so the potential acts as a reward: a proposed flip with energy
//! change `delta` is accepted with probability `min(1, exp(alpha * delta))`.
//! One sweep is `d*T` proposals. Chains never share state; chain `c` of a
//! run with master seed `s` draws from ChaCha12 seeded with `s` on stream
//! `c + 1`, and chain statistics merge in chain-index order, so a given
//! `(config, seed)` always produces bitwise identical output.

pub const RNG_NAME: &str = "chacha12/stream-per-chain";

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::Observable;
use crate::model::{EnergyModel, GibbsSpec, PairPotential, SpinPath};

/// Sweep budget for O(T^2) power-law flips: `sweeps * T^2 <= 10^11`.
pub const POWER_LAW_SWEEP_BUDGET: u128 = 100_000_000_000;
/// Size cap for sampled systems.
pub const SAMPLER_SPIN_CAP: usize = 4096;
/// From-scratch energy audit interval, in proposals.
const AUDIT_INTERVAL: u64 = 100_000;
const AUDIT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Total sweeps per chain, including burn-in.
    pub sweeps: u64,
    /// Sweeps discarded before measurement.
    pub burnin: u64,
    /// Record every `thin`-th sweep after burn-in.
    pub thin: u64,
    pub chains: u64,
    pub seed: u64,
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sweeps <= self.burnin {
            return Err(Error::InvalidSpec(format!(
                "sweeps = {} must exceed burnin = {}",
                self.sweeps, self.burnin
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidSpec("thin must be >= 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidSpec("chains must be >= 1".into()));
        }
        Ok(())
    }
}

/// Monte Carlo estimate with error bars from independent chains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    /// Standard error of the mean across chains.
    pub std_error: f64,
    pub n_samples: u64,
    /// Integrated autocorrelation time in units of recorded samples,
    /// averaged over chains.
    pub tau: f64,
}

fn check_budget(spec: &GibbsSpec, cfg: &SamplerConfig) -> Result<()> {
    cfg.validate()?;
    spec.validate()?;
    let n = spec.spin_count();
    if n > SAMPLER_SPIN_CAP {
        return Err(Error::Capacity(format!(
            "sampler requires d*T <= {SAMPLER_SPIN_CAP}, got {n}"
        )));
    }
    if matches!(spec.potential, PairPotential::PowerLaw { .. }) {
        let cost = cfg.sweeps as u128 * (spec.horizon as u128).pow(2);
        if cost > POWER_LAW_SWEEP_BUDGET {
            return Err(Error::Capacity(format!(
                "power-law budget exceeded: sweeps * T^2 = {cost} > {POWER_LAW_SWEEP_BUDGET}"
            )));
        }
    }
    Ok(())
}

fn chain_rng(seed: u64, chain: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(chain + 1);
    rng
}

fn random_path(spec: &GibbsSpec, rng: &mut ChaCha12Rng) -> SpinPath {
    let n = spec.spin_count();
    let signs: Vec<i8> = (0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect();
    SpinPath::from_signs(spec.d, spec.horizon, spec.step_amplitude, &signs)
        .expect("generated signs match spec shape")
}

/// Runs one chain, handing every post-burn-in, thinned sweep's path to
/// `record`. Returns an error if the incremental energy drifts beyond the
/// audit tolerance.
fn run_chain<F>(spec: &GibbsSpec, cfg: &SamplerConfig, chain: u64, mut record: F) -> Result<()>
where
    F: FnMut(&SpinPath),
{
    let model = EnergyModel::new(spec)?;
    let mut rng = chain_rng(cfg.seed, chain);
    let mut path = random_path(spec, &mut rng);
    let mut energy = model.energy(&path)?;
    let n = spec.spin_count() as u64;
    let mut proposals: u64 = 0;

    for sweep in 0..cfg.sweeps {
        for _ in 0..n {
            let flat = rng.gen_range(0..n) as usize;
            let k = flat / spec.d + 1;
            let p = flat % spec.d + 1;
            if spec.alpha == 0.0 {
                path.flip(k, p);
            } else {
                let delta = model.delta_flip_unchecked(&path, k, p);
                let log_accept = spec.alpha * delta;
                if log_accept.is_nan() {
                    return Err(Error::Numeric("NaN acceptance ratio".into()));
                }
                let accept = log_accept >= 0.0 || rng.gen::<f64>() < log_accept.exp();
                if accept {
                    energy += delta;
                    path.flip(k, p);
                }
            }
            proposals += 1;
            if proposals % AUDIT_INTERVAL == 0 && spec.alpha != 0.0 {
                let scratch = model.energy(&path)?;
                if (energy - scratch).abs() > AUDIT_TOLERANCE {
                    return Err(Error::Numeric(format!(
                        "energy drift {:e} exceeded audit tolerance",
                        (energy - scratch).abs()
                    )));
                }
                energy = scratch;
            }
        }
        if sweep >= cfg.burnin && (sweep - cfg.burnin) % cfg.thin == 0 {
            record(&path);
        }
    }
    Ok(())
}

/// Integrated autocorrelation time of a sample series by Sokal's adaptive
/// window: stop summing once the window passes `6 tau`, the estimated
/// autocorrelation turns negative, or a hard lag cap (this is an estimate
/// for reporting, not a certified quantity).
fn integrated_autocorrelation(series: &[f64]) -> f64 {
    let n = series.len();
    if n < 8 {
        return 1.0;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var: f64 = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 1.0;
    }
    let mut tau = 1.0;
    for s in 1..(n / 2).min(2000) {
        let mut cov = 0.0;
        for i in 0..n - s {
            cov += (series[i] - mean) * (series[i + s] - mean);
        }
        cov /= (n - s) as f64;
        let rho = cov / var;
        if rho <= 0.0 {
            break;
        }
        tau += 2.0 * rho;
        if s as f64 >= 6.0 * tau {
            break;
        }
    }
    tau
}

/// Per-chain sample series of `obs`, one value per recorded sweep.
pub fn sample_series(
    spec: &GibbsSpec,
    obs: &Observable,
    cfg: &SamplerConfig,
) -> Result<Vec<Vec<f64>>> {
    check_budget(spec, cfg)?;
    obs.validate(spec.d, spec.horizon)?;
    let chain_series: Vec<Result<Vec<f64>>> = (0..cfg.chains)
        .into_par_iter()
        .map(|chain| {
            let mut series = Vec::new();
            run_chain(spec, cfg, chain, |path| series.push(obs.eval(path)))?;
            Ok(series)
        })
        .collect();
    chain_series.into_iter().collect()
}

/// Combines per-chain series into an estimate; the standard error comes
/// from the spread of chain means.
pub fn estimate_from_series(chains: &[Vec<f64>]) -> Result<Estimate> {
    if chains.len() < 2 || chains.iter().any(|s| s.is_empty()) {
        return Err(Error::InvalidSpec(
            "estimate needs >= 2 non-empty chains".into(),
        ));
    }
    let mut chain_means = Vec::with_capacity(chains.len());
    let mut taus = Vec::with_capacity(chains.len());
    let mut n_samples: u64 = 0;
    for series in chains {
        n_samples += series.len() as u64;
        chain_means.push(series.iter().sum::<f64>() / series.len() as f64);
        taus.push(integrated_autocorrelation(series));
    }
    let k = chain_means.len() as f64;
    let mean = chain_means.iter().sum::<f64>() / k;
    let var_between = chain_means
        .iter()
        .map(|m| (m - mean) * (m - mean))
        .sum::<f64>()
        / (k - 1.0);
    Ok(Estimate {
        mean,
        std_error: (var_between / k).sqrt(),
        n_samples,
        tau: taus.iter().sum::<f64>() / k,
    })
}

/// Metropolis estimate of `E[obs]` under the spec's Gibbs measure.
///
/// Requires at least 4 chains so the reported standard error (from
/// per-chain means) is meaningful.
pub fn sample_expectation(
    spec: &GibbsSpec,
    obs: &Observable,
    cfg: &SamplerConfig,
) -> Result<Estimate> {
    if cfg.chains < 4 {
        return Err(Error::InvalidSpec(format!(
            "sample_expectation requires >= 4 chains for error bars, got {}",
            cfg.chains
        )));
    }
    estimate_from_series(&sample_series(spec, obs, cfg)?)
}

/// Visit counts per configuration from a single chain (d = 1, small T),
/// for detailed-balance validation against the exact oracle.
pub fn sample_config_counts(spec: &GibbsSpec, cfg: &SamplerConfig) -> Result<Vec<u64>> {
    check_budget(spec, cfg)?;
    let bits = spec.spin_count();
    if bits > 20 {
        return Err(Error::Capacity(format!(
            "config histogram requires d*T <= 20, got {bits}"
        )));
    }
    let mut counts = vec![0u64; 1usize << bits];
    run_chain(spec, cfg, 0, |path| {
        let mut code: u64 = 0;
        for j in 1..=spec.horizon {
            for p in 1..=spec.d {
                if path.increment(j, p) > 0.0 {
                    code |= 1 << ((j - 1) * spec.d + (p - 1));
                }
            }
        }
        counts[code as usize] += 1;
    })?;
    Ok(counts)
}

/// One point of an MSD scaling sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub horizon: usize,
    pub estimate: Estimate,
}

/// Result of a scaling sweep: per-horizon estimates and the weighted
/// least-squares slope of `log2 MSD` against `log2 T`.
///
/// The slope is diagnostic only: single-flip Metropolis is not guaranteed
/// to equilibrate in the superdiffusive phase, so this is never asserted
/// against theory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingSweep {
    pub points: Vec<ScalingPoint>,
    pub slope: f64,
    pub slope_std_error: f64,
}

/// Estimates `E[||x_T||^2]` over dyadic horizons and fits the growth
/// exponent.
pub fn msd_scaling_sweep(
    potential: &PairPotential,
    alpha: f64,
    horizons: &[usize],
    cfg: &SamplerConfig,
) -> Result<ScalingSweep> {
    if horizons.len() < 2 {
        return Err(Error::InvalidSpec("scaling sweep needs >= 2 horizons".into()));
    }
    for &t in horizons {
        if !t.is_power_of_two() {
            return Err(Error::InvalidSpec(format!("horizons must be dyadic, got {t}")));
        }
    }
    let mut points = Vec::with_capacity(horizons.len());
    for &t in horizons {
        let spec = GibbsSpec::new(1, t, 1.0, alpha, potential.clone())?;
        let estimate = sample_expectation(&spec, &Observable::EndpointSquare, cfg)?;
        points.push(ScalingPoint {
            horizon: t,
            estimate,
        });
    }

    // weighted least squares on (log2 T, log2 MSD); sigma propagated as
    // std_error / (mean ln 2)
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    for p in &points {
        if !(p.estimate.mean > 0.0) {
            return Err(Error::Numeric("non-positive MSD estimate in sweep".into()));
        }
        xs.push((p.horizon as f64).log2());
        ys.push(p.estimate.mean.log2());
        let sigma = (p.estimate.std_error / (p.estimate.mean * std::f64::consts::LN_2)).max(1e-12);
        ws.push(1.0 / (sigma * sigma));
    }
    let wsum: f64 = ws.iter().sum();
    let xbar = xs.iter().zip(&ws).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let ybar = ys.iter().zip(&ws).map(|(y, w)| y * w).sum::<f64>() / wsum;
    let sxx: f64 = xs.iter().zip(&ws).map(|(x, w)| w * (x - xbar) * (x - xbar)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(ys.iter())
        .zip(&ws)
        .map(|((x, y), w)| w * (x - xbar) * (y - ybar))
        .sum();
    Ok(ScalingSweep {
        points,
        slope: sxy / sxx,
        slope_std_error: (1.0 / sxx).sqrt(),
    })
}

//! Exact expectations by full enumeration of all `2^(d*T)` spin
//! configurations.
//!
//! Configurations are encoded as `d*T`-bit integers (bit `b` set means
//! increment `+a` at flat index `b`). Enumeration follows the binary
//! reflected Gray code so each step flips a single increment and the energy
//! is updated incrementally; a drift guard recomputes the energy from
//! scratch at ~1000 deterministic checkpoints per run. Weights are handled
//! in the log domain with a single max-shift, and the enumeration is split
//! into a fixed number of contiguous Gray-code segments whose partial sums
//! merge in index order, so results are bitwise identical for any worker
//! count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{EnergyModel, GibbsSpec, SpinPath};

/// Hard enumeration cap: `d*T <= 24` (~16.7M configurations).
pub const ENUMERATION_CAP_BITS: usize = 24;

const DISTRIBUTION_CAP_BITS: usize = 20;
const DRIFT_TOLERANCE: f64 = 1e-8;

/// Path functionals the oracle can average.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Observable {
    /// `||x_T||^2`
    EndpointSquare,
    /// `x_T^p` (1-based coordinate)
    EndpointCoordinate { p: usize },
    /// Product of `phi_j^p` powers, factors `(step, coordinate, exponent)`.
    Monomial { factors: Vec<(usize, usize, u32)> },
    /// `1{phi_i = phi_j}` (d = 1)
    PairEqualIndicator { i: usize, j: usize },
    /// `1{phi_start = ... = phi_(start+len-1)}` (d = 1)
    WindowAllEqualIndicator { start: usize, len: usize },
    /// `(norm_a * sum_{j in A} phi_j) * (norm_b * sum_{j in B} phi_j)`
    /// with inclusive step ranges (d = 1).
    BlockProduct {
        block_a: (usize, usize),
        block_b: (usize, usize),
        norm_a: f64,
        norm_b: f64,
    },
}

impl Observable {
    pub fn monomial(factors: &[(usize, usize, u32)]) -> Self {
        Observable::Monomial {
            factors: factors.to_vec(),
        }
    }

    /// Shorthand for a product of first-coordinate increments in d = 1.
    pub fn monomial_1d(steps: &[usize]) -> Self {
        Observable::Monomial {
            factors: steps.iter().map(|&j| (j, 1, 1)).collect(),
        }
    }

    pub fn validate(&self, d: usize, horizon: usize) -> Result<()> {
        let step_ok = |j: usize| j >= 1 && j <= horizon;
        match self {
            Observable::EndpointSquare => Ok(()),
            Observable::EndpointCoordinate { p } => {
                if *p >= 1 && *p <= d {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!("coordinate {p} out of 1..={d}")))
                }
            }
            Observable::Monomial { factors } => {
                for &(j, p, e) in factors {
                    if !step_ok(j) || p == 0 || p > d || e == 0 {
                        return Err(Error::InvalidSpec(format!(
                            "monomial factor ({j},{p},{e}) out of range for d={d}, T={horizon}"
                        )));
                    }
                }
                Ok(())
            }
            Observable::PairEqualIndicator { i, j } => {
                if d != 1 {
                    return Err(Error::InvalidSpec("pair-equal indicator requires d = 1".into()));
                }
                if step_ok(*i) && step_ok(*j) && i != j {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "pair indices ({i},{j}) invalid for T={horizon}"
                    )))
                }
            }
            Observable::WindowAllEqualIndicator { start, len } => {
                if d != 1 {
                    return Err(Error::InvalidSpec("window indicator requires d = 1".into()));
                }
                if *len >= 1 && step_ok(*start) && step_ok(start + len - 1) {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "window ({start}, len {len}) does not fit in 1..={horizon}"
                    )))
                }
            }
            Observable::BlockProduct {
                block_a, block_b, ..
            } => {
                if d != 1 {
                    return Err(Error::InvalidSpec("block product requires d = 1".into()));
                }
                for &(lo, hi) in [block_a, block_b] {
                    if !(step_ok(lo) && step_ok(hi) && lo <= hi) {
                        return Err(Error::InvalidSpec(format!(
                            "block ({lo},{hi}) invalid for T={horizon}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    pub fn eval(&self, path: &SpinPath) -> f64 {
        match self {
            Observable::EndpointSquare => path.endpoint_norm_sq(),
            Observable::EndpointCoordinate { p } => path.position(path.horizon(), *p),
            Observable::Monomial { factors } => {
                let mut v = 1.0;
                for &(j, p, e) in factors {
                    v *= path.increment(j, p).powi(e as i32);
                }
                v
            }
            Observable::PairEqualIndicator { i, j } => {
                if path.increment(*i, 1) == path.increment(*j, 1) {
                    1.0
                } else {
                    0.0
                }
            }
            Observable::WindowAllEqualIndicator { start, len } => {
                let first = path.increment(*start, 1);
                for j in (*start + 1)..(*start + *len) {
                    if path.increment(j, 1) != first {
                        return 0.0;
                    }
                }
                1.0
            }
            Observable::BlockProduct {
                block_a,
                block_b,
                norm_a,
                norm_b,
            } => {
                let sum = |blk: &(usize, usize)| -> f64 {
                    (blk.0..=blk.1).map(|j| path.increment(j, 1)).sum()
                };
                norm_a * sum(block_a) * norm_b * sum(block_b)
            }
        }
    }

    /// Total degree of a monomial; used by parity tests.
    pub fn total_degree(&self) -> Option<u32> {
        match self {
            Observable::Monomial { factors } => Some(factors.iter().map(|f| f.2).sum()),
            _ => None,
        }
    }
}

/// Result of an exact expectation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactResult {
    pub value: f64,
    /// `ln Z` with `Z = E^P[exp(alpha * energy)]` (base measure included),
    /// so `alpha = 0` gives 0.
    pub log_partition: f64,
    pub config_count: u64,
}

struct SegmentSums {
    sum_w: f64,
    sum_wf: Vec<f64>,
}

fn check_capacity(spec: &GibbsSpec, cap_bits: usize) -> Result<usize> {
    let bits = spec.spin_count();
    if bits > cap_bits {
        return Err(Error::Capacity(format!(
            "enumeration requires d*T <= {cap_bits}, got d*T = {bits}"
        )));
    }
    Ok(bits)
}

fn segment_count(bits: usize) -> u64 {
    if bits >= 12 {
        64
    } else {
        1
    }
}

fn drift_stride(bits: usize) -> u64 {
    let n = 1u64 << bits;
    (n >> 10).max(1)
}

/// Walks Gray-code indices `lo..hi`, calling `visit(n, energy, path)` for
/// each configuration. The energy is maintained incrementally and audited
/// against a from-scratch recomputation on a fixed stride.
fn walk_segment<F>(
    model: &EnergyModel,
    bits: usize,
    lo: u64,
    hi: u64,
    stride: u64,
    mut visit: F,
) -> Result<()>
where
    F: FnMut(u64, f64, &SpinPath),
{
    let spec = model.spec();
    let d = spec.d;
    let gray = |n: u64| n ^ (n >> 1);
    let mut path = SpinPath::from_bits(d, spec.horizon, spec.step_amplitude, gray(lo));
    let mut energy = model.energy(&path)?;
    for n in lo..hi {
        if !energy.is_finite() {
            return Err(Error::Numeric(
                "energy left the finite range during enumeration".into(),
            ));
        }
        if n % stride == 0 && n != lo {
            let scratch = model.energy(&path)?;
            if (energy - scratch).abs() > DRIFT_TOLERANCE * scratch.abs().max(1.0) {
                return Err(Error::Numeric(format!(
                    "incremental energy drifted from recomputation by {:e} at index {n}",
                    (energy - scratch).abs()
                )));
            }
            energy = scratch;
        }
        visit(n, energy, &path);
        if n + 1 < hi {
            let b = (n + 1).trailing_zeros() as usize;
            debug_assert!(b < bits);
            let k = b / d + 1;
            let p = b % d + 1;
            energy += model.delta_flip_unchecked(&path, k, p);
            path.flip(k, p);
        }
    }
    Ok(())
}

/// Exact expectations of several observables under one spec, sharing a
/// single enumeration.
pub fn expectation_multi(spec: &GibbsSpec, observables: &[Observable]) -> Result<Vec<ExactResult>> {
    let bits = check_capacity(spec, ENUMERATION_CAP_BITS)?;
    for obs in observables {
        obs.validate(spec.d, spec.horizon)?;
    }
    let n_total = 1u64 << bits;
    let segments = segment_count(bits);
    let seg_len = n_total / segments;
    let stride = drift_stride(bits);
    let model = EnergyModel::new(spec)?;

    // pass 1: maximum energy, for the log-domain shift
    let maxima: Vec<Result<f64>> = (0..segments)
        .into_par_iter()
        .map(|s| {
            let mut emax = f64::NEG_INFINITY;
            walk_segment(&model, bits, s * seg_len, (s + 1) * seg_len, stride, |_, e, _| {
                if e > emax {
                    emax = e;
                }
            })?;
            Ok(emax)
        })
        .collect();
    let mut energy_max = f64::NEG_INFINITY;
    for m in maxima {
        energy_max = energy_max.max(m?);
    }
    let shift = spec.alpha * energy_max;

    // pass 2: shifted weights and observable sums
    let partials: Vec<Result<SegmentSums>> = (0..segments)
        .into_par_iter()
        .map(|s| {
            let mut sums = SegmentSums {
                sum_w: 0.0,
                sum_wf: vec![0.0; observables.len()],
            };
            walk_segment(&model, bits, s * seg_len, (s + 1) * seg_len, stride, |_, e, path| {
                let w = (spec.alpha * e - shift).exp();
                sums.sum_w += w;
                for (acc, obs) in sums.sum_wf.iter_mut().zip(observables) {
                    *acc += w * obs.eval(path);
                }
            })?;
            Ok(sums)
        })
        .collect();

    let mut sum_w = 0.0;
    let mut sum_wf = vec![0.0; observables.len()];
    for p in partials {
        let p = p?;
        sum_w += p.sum_w;
        for (acc, v) in sum_wf.iter_mut().zip(&p.sum_wf) {
            *acc += v;
        }
    }
    let log_partition = shift + sum_w.ln() - bits as f64 * std::f64::consts::LN_2;
    Ok(sum_wf
        .into_iter()
        .map(|f| ExactResult {
            value: f / sum_w,
            log_partition,
            config_count: n_total,
        })
        .collect())
}

/// Exact expectation of one observable under the normalized Gibbs measure.
pub fn expectation(spec: &GibbsSpec, obs: &Observable) -> Result<ExactResult> {
    Ok(expectation_multi(spec, std::slice::from_ref(obs))?.remove(0))
}

/// Exact `P(phi_j = phi_(j+1))` for d = 1.
pub fn pair_equal_prob(spec: &GibbsSpec, j: usize) -> Result<f64> {
    if j == 0 || j >= spec.horizon {
        return Err(Error::InvalidSpec(format!(
            "pair index j = {j} must satisfy 1 <= j < T = {}",
            spec.horizon
        )));
    }
    let obs = Observable::PairEqualIndicator { i: j, j: j + 1 };
    Ok(expectation(spec, &obs)?.value)
}

/// Exact `P(phi_i = ... = phi_(i+w-1))` for d = 1. `w = 1` is the empty
/// condition and returns 1.
pub fn window_all_equal_prob(spec: &GibbsSpec, i: usize, w: usize) -> Result<f64> {
    if w == 0 || i == 0 || i + w - 1 > spec.horizon {
        return Err(Error::InvalidSpec(format!(
            "window (i = {i}, w = {w}) must fit in 1..=T = {}",
            spec.horizon
        )));
    }
    let obs = Observable::WindowAllEqualIndicator { start: i, len: w };
    Ok(expectation(spec, &obs)?.value)
}

/// `E[||x_T||^2] / (d*T)`.
pub fn msd_per_step(spec: &GibbsSpec) -> Result<f64> {
    let r = expectation(spec, &Observable::EndpointSquare)?;
    Ok(r.value / (spec.d * spec.horizon) as f64)
}

/// Probability of every configuration, indexed by its bit encoding.
/// Capped at `d*T <= 20` to bound the returned vector.
pub fn config_distribution(spec: &GibbsSpec) -> Result<Vec<f64>> {
    let bits = check_capacity(spec, DISTRIBUTION_CAP_BITS)?;
    let n_total = 1u64 << bits;
    let stride = drift_stride(bits);
    let model = EnergyModel::new(spec)?;

    let mut energies = vec![0.0f64; n_total as usize];
    let gray = |n: u64| n ^ (n >> 1);
    walk_segment(&model, bits, 0, n_total, stride, |n, e, _| {
        energies[gray(n) as usize] = e;
    })?;
    let emax = energies.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let shift = spec.alpha * emax;
    let mut probs: Vec<f64> = energies
        .iter()
        .map(|&e| (spec.alpha * e - shift).exp())
        .collect();
    let z: f64 = probs.iter().sum();
    for p in &mut probs {
        *p /= z;
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::PairPotential;

    fn quad_spec(t: usize, alpha: f64) -> GibbsSpec {
        GibbsSpec::new(1, t, 1.0, alpha, PairPotential::quadratic_lag2(1.0).unwrap()).unwrap()
    }

    #[test]
    fn four_config_closed_forms() {
        // T=2, alpha=0.5: weights e^2 on the two aligned configs, 1 otherwise
        let spec = quad_spec(2, 0.5);
        let r = expectation(&spec, &Observable::EndpointSquare).unwrap();
        assert!((r.value - 4.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-12);
        assert_eq!(r.config_count, 4);

        let m = expectation(&spec, &Observable::monomial_1d(&[1, 2])).unwrap();
        assert!((m.value - 1f64.tanh()).abs() < 1e-12);

        let p = pair_equal_prob(&spec, 1).unwrap();
        assert!((p - 1.0 / (1.0 + (-2.0f64).exp())).abs() < 1e-12);

        // partition: Z = (2e^2 + 2)/4
        let z_expected = ((2.0 * 2f64.exp() + 2.0) / 4.0).ln();
        assert!((r.log_partition - z_expected).abs() < 1e-12);
    }

    #[test]
    fn unperturbed_walk_is_diffusive() {
        let spec = quad_spec(2, 0.0);
        let r = expectation(&spec, &Observable::EndpointSquare).unwrap();
        assert!((r.value - 2.0).abs() < 1e-13);
        assert!(r.log_partition.abs() < 1e-13);
        assert!((msd_per_step(&quad_spec(6, 0.0)).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn window_probability_examples() {
        // T=3, two effective bonds of weight exp(2*alpha*phi*phi') at alpha=0.5
        let spec = quad_spec(3, 0.5);
        let p = window_all_equal_prob(&spec, 1, 3).unwrap();
        let e2 = 2f64.exp();
        let expected = 2.0 * e2 / (2.0 * e2 + 4.0 + 2.0 * (-2.0f64).exp());
        assert!((p - expected).abs() < 1e-12, "p = {p}, expected = {expected}");
        assert!((p - 0.7758034925743759).abs() < 1e-12);

        assert_eq!(window_all_equal_prob(&spec, 2, 1).unwrap(), 1.0);

        let free = quad_spec(4, 0.0);
        for w in 1..=4 {
            let p = window_all_equal_prob(&free, 1, w).unwrap();
            assert!((p - 0.5f64.powi(w as i32 - 1)).abs() < 1e-13);
        }
    }

    #[test]
    fn pair_alignment_lower_bound_holds() {
        // alpha >= 1: P(phi_j = phi_(j+1)) >= 1 - 4 e^(-4 alpha)
        for &alpha in &[1.0, 1.25, 1.5, 2.0] {
            for t in [2usize, 4, 6] {
                let spec = quad_spec(t, alpha);
                for j in 1..t {
                    let p = pair_equal_prob(&spec, j).unwrap();
                    assert!(
                        p >= 1.0 - 4.0 * (-4.0 * alpha).exp() - 1e-12,
                        "alpha={alpha} T={t} j={j}: p={p}"
                    );
                }
            }
        }
        assert!((pair_equal_prob(&quad_spec(4, 0.0), 2).unwrap() - 0.5).abs() < 1e-13);
    }

    #[test]
    fn window_alignment_bound_where_it_fits() {
        // W(z,2) = zeta z^2 with zeta = 0.5, alpha = 1: the aligned-window
        // bound (1 - 4e^(-4b))^(e^(4b)-1) with b = zeta*alpha applies to
        // windows of length floor(e^(4b)) = 7, which fits under the cap.
        let beta: f64 = 0.5;
        let pot = PairPotential::coefficient_table(2, &[(1, 2, beta)]).unwrap();
        let spec = GibbsSpec::new(1, 8, 1.0, 1.0, pot).unwrap();
        let w = (4.0 * beta).exp().floor() as usize;
        assert_eq!(w, 7);
        let p = window_all_equal_prob(&spec, 1, w).unwrap();
        let base = 1.0 - 4.0 * (-4.0 * beta).exp();
        let bound = base.powf((4.0 * beta).exp() - 1.0);
        assert!(p >= bound - 1e-12, "p = {p}, bound = {bound}");
    }

    #[test]
    fn msd_per_step_example_t4() {
        let spec = quad_spec(4, 0.25);
        let v = msd_per_step(&spec).unwrap();
        // closed form T + 2 sum_(r<T) (T-r) t^r with t = tanh(0.5)
        let t = 0.5f64.tanh();
        let closed = (4.0 + 2.0 * (3.0 * t + 2.0 * t * t + t * t * t)) / 4.0;
        assert!((v - closed).abs() < 1e-12);
        assert!((v - 1.9560710862081953).abs() < 1e-10);
    }

    #[test]
    fn msd_monotone_in_alpha() {
        let mut prev = 0.0;
        for k in 0..=10 {
            let spec = quad_spec(4, 0.1 * k as f64);
            let v = msd_per_step(&spec).unwrap();
            assert!(v >= prev - 1e-12, "alpha={}: {v} < {prev}", 0.1 * k as f64);
            prev = v;
        }
    }

    #[test]
    fn odd_monomials_vanish_for_even_potentials() {
        let spec = quad_spec(5, 0.6);
        for obs in [
            Observable::monomial_1d(&[2]),
            Observable::monomial_1d(&[1, 2, 4]),
            Observable::EndpointCoordinate { p: 1 },
        ] {
            let r = expectation(&spec, &obs).unwrap();
            assert!(r.value.abs() < 1e-12, "{obs:?} gave {}", r.value);
        }
    }

    #[test]
    fn dimension_reduction_slack_nonnegative() {
        // E_d=2[||x_T||^2] >= 2 E_d=1[x_T^2] for matched potential and alpha
        let pot = PairPotential::coefficient_table(2, &[(1, 2, 1.0), (2, 2, 0.4)]).unwrap();
        for t in [2usize, 4, 6] {
            let spec2 = GibbsSpec::new(2, t, 1.0, 0.3, pot.clone()).unwrap();
            let spec1 = GibbsSpec::new(1, t, 1.0, 0.3, pot.clone()).unwrap();
            let v2 = expectation(&spec2, &Observable::EndpointSquare).unwrap().value;
            let v1 = expectation(&spec1, &Observable::EndpointSquare).unwrap().value;
            assert!(v2 - 2.0 * v1 >= -1e-9, "T={t}: {v2} < 2*{v1}");
        }
    }

    #[test]
    fn capacity_cap_enforced() {
        let spec = quad_spec(25, 0.1);
        assert!(matches!(
            expectation(&spec, &Observable::EndpointSquare),
            Err(Error::Capacity(_))
        ));
        assert!(matches!(config_distribution(&quad_spec(21, 0.1)), Err(Error::Capacity(_))));
    }

    #[test]
    fn worker_count_does_not_change_bits() {
        let spec = GibbsSpec::new(
            1,
            13,
            1.0,
            0.45,
            PairPotential::power_law(2, 1.5).unwrap(),
        )
        .unwrap();
        let run = |threads: usize| -> ExactResult {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap();
            pool.install(|| expectation(&spec, &Observable::EndpointSquare).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.log_partition.to_bits(), b.log_partition.to_bits());
    }

    #[test]
    fn distribution_sums_to_one_and_matches_expectation() {
        let spec = quad_spec(6, 0.4);
        let probs = config_distribution(&spec).unwrap();
        assert_eq!(probs.len(), 64);
        let total: f64 = probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
        // recompute E[x_T^2] from the distribution
        let mut msd = 0.0;
        for (cfg, &p) in probs.iter().enumerate() {
            let path = SpinPath::from_bits(1, 6, 1.0, cfg as u64);
            msd += p * path.endpoint_norm_sq();
        }
        let direct = expectation(&spec, &Observable::EndpointSquare).unwrap().value;
        assert!((msd - direct).abs() < 1e-11);
    }

    #[test]
    fn observable_validation() {
        assert!(Observable::PairEqualIndicator { i: 1, j: 2 }.validate(2, 4).is_err());
        assert!(Observable::monomial(&[(5, 1, 1)]).validate(1, 4).is_err());
        assert!(Observable::monomial(&[(1, 1, 0)]).validate(1, 4).is_err());
        assert!(Observable::WindowAllEqualIndicator { start: 3, len: 3 }
            .validate(1, 4)
            .is_err());
    }
}

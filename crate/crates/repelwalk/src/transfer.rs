//! Closed forms and matrix-product computations for finite-range
//! potentials.
//!
//! The nearest-neighbour quadratic potential `W(z,2) = z^2` turns the path
//! measure into the zero-field 1D Ising chain with free boundaries: the
//! pair `(i, i+2)` contributes `alpha (phi_(i+1) + phi_(i+2))^2 =
//! 2 alpha + 2 alpha phi phi'`, so the effective Ising coupling is
//! `beta_eff = 2 alpha` and `<phi_i phi_j> = tanh(beta_eff)^|i-j|`.
//! General range-R coefficient tables go through a banded transfer
//! operator over windows of `R - 1` previous spins.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{evaluate_w, PairPotential};

/// Effective Ising coupling for the nearest-neighbour chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsingParams {
    pub beta_eff: f64,
}

impl IsingParams {
    pub fn new(beta_eff: f64) -> Result<Self> {
        if !(beta_eff >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "ising coupling beta_eff = {beta_eff} must be >= 0"
            )));
        }
        Ok(IsingParams { beta_eff })
    }
}

/// `<sigma_i sigma_j> = tanh(beta)^r` at distance `r`.
pub fn ising_two_point(params: IsingParams, r: u32) -> f64 {
    params.beta_eff.tanh().powi(r as i32)
}

/// Summed two-point function `chi(beta) = (1+t)/(1-t) = e^(2 beta)`.
///
/// Computed through the exponential form: the ratio loses all precision in
/// f64 once `tanh` saturates (`beta` around 18), while `e^(2 beta)` is exact
/// to rounding for the whole supported range.
pub fn susceptibility(params: IsingParams) -> f64 {
    (2.0 * params.beta_eff).exp()
}

/// Cancellation-free evaluation of `(1+t)/(1-t)` used to cross-check the
/// susceptibility identity: `1 - tanh(b) = 2 e^(-2b) / (1 + e^(-2b))`.
pub fn susceptibility_ratio_form(params: IsingParams) -> f64 {
    let q = (-2.0 * params.beta_eff).exp();
    // (1+t)/(1-t) with 1+t = 2/(1+q), 1-t = 2q/(1+q)
    1.0 / q
}

/// `E[x_T^2] = T + 2 sum_(r=1)^(T-1) (T-r) t^r` for the free-boundary
/// chain, exact.
pub fn finite_chain_msd(params: IsingParams, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidSpec("horizon T must be >= 1".into()));
    }
    let t = params.beta_eff.tanh();
    let mut acc = horizon as f64;
    let mut tpow = 1.0;
    for r in 1..horizon {
        tpow *= t;
        acc += 2.0 * (horizon - r) as f64 * tpow;
    }
    Ok(acc)
}

/// Transfer operator for a range-R coefficient table in d = 1, over window
/// states of the `R - 1` most recent spins. Every transition is allowed
/// (the new spin extends the window), so all weights are positive.
#[derive(Debug, Clone)]
pub struct BandedTransferOperator {
    pub range: usize,
    /// `2^(R-1)` window states.
    pub state_count: usize,
    /// `weight[s][b]`: bulk step weight for appending spin `b` (bit set =
    /// `+1`) to window `s`; rows are the new window `(s << 1 | b)` truncated
    /// to `R - 1` bits.
    pub weights: Vec<Vec<f64>>,
}

pub const BANDED_RANGE_CAP: usize = 4;
pub const BANDED_HORIZON_CAP: usize = 1_000_000;

fn spin_of_bit(b: u64, idx: usize) -> f64 {
    if b >> idx & 1 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Gibbs weight factor assigned to step `j`: all pairs `(i, j)` of lag
/// `t <= min(R, j)` ending at position `j`. `window` holds spins
/// `phi_(j-R+1) .. phi_j` from oldest (high bit) to newest (bit 0).
fn step_log_weight(
    potential: &PairPotential,
    alpha: f64,
    range: usize,
    j: usize,
    window: u64,
) -> Result<f64> {
    let mut e = 0.0;
    for lag in 1..=range.min(j) {
        // displacement over the last `lag` spins
        let mut z = 0.0;
        for s in 0..lag {
            z += spin_of_bit(window, s);
        }
        e += evaluate_w(&[z], lag, potential)?;
    }
    Ok(alpha * e)
}

impl BandedTransferOperator {
    pub fn new(potential: &PairPotential, alpha: f64) -> Result<Self> {
        let range = match potential {
            PairPotential::CoefficientTable { .. } => {
                potential.table_range().unwrap_or(1).max(1) as usize
            }
            PairPotential::PowerLaw { .. } => {
                return Err(Error::InvalidSpec(
                    "banded transfer operator requires a coefficient table".into(),
                ))
            }
        };
        if range > BANDED_RANGE_CAP {
            return Err(Error::Capacity(format!(
                "banded transfer operator supports range R <= {BANDED_RANGE_CAP}, got {range}"
            )));
        }
        let state_bits = range - 1;
        let state_count = 1usize << state_bits;
        let mut weights = vec![vec![0.0; 2]; state_count];
        for (s, row) in weights.iter_mut().enumerate() {
            for (b, cell) in row.iter_mut().enumerate() {
                // bulk step: window = previous state shifted up, new spin at bit 0
                let window = ((s as u64) << 1) | b as u64;
                let lw = step_log_weight(potential, alpha, range, range, window)?;
                *cell = lw.exp();
                if !(*cell > 0.0) {
                    return Err(Error::Numeric(format!(
                        "transfer weight underflowed for state {s}, spin {b}"
                    )));
                }
            }
        }
        Ok(BandedTransferOperator {
            range,
            state_count,
            weights,
        })
    }
}

/// `E[x_T^2]` for a range-R coefficient table at unit step amplitude,
/// via transfer-operator products with endpoint-accumulating state
/// `(A, B, C) = (sum of weights, weighted position sum, weighted squared
/// position sum)` per window. Renormalized every step, so horizons up to
/// `10^6` stay in range.
pub fn banded_msd(potential: &PairPotential, alpha: f64, horizon: usize) -> Result<f64> {
    if horizon == 0 {
        return Err(Error::InvalidSpec("horizon T must be >= 1".into()));
    }
    if horizon > BANDED_HORIZON_CAP {
        return Err(Error::Capacity(format!(
            "banded_msd supports T <= {BANDED_HORIZON_CAP}, got {horizon}"
        )));
    }
    if !(alpha >= 0.0) {
        return Err(Error::InvalidSpec(format!("alpha = {alpha} must be >= 0")));
    }
    let op = BandedTransferOperator::new(potential, alpha)?;
    let r = op.range;
    let state_bits = r - 1;
    let state_mask = (1u64 << state_bits) - 1;

    // seed with the first min(T, R-1) spins enumerated explicitly
    let lead = state_bits.min(horizon);
    let n_lead = 1u64 << lead;
    let mut a = vec![0.0f64; op.state_count];
    let mut b = vec![0.0f64; op.state_count];
    let mut c = vec![0.0f64; op.state_count];
    for cfg in 0..n_lead {
        let mut log_w = 0.0;
        let mut x = 0.0;
        for j in 1..=lead {
            // bits ordered oldest-high: spin j sits at bit (lead - j)
            let window = cfg >> (lead - j);
            log_w += step_log_weight(potential, alpha, r, j, window)?;
            x += spin_of_bit(cfg, lead - j);
        }
        let w = log_w.exp();
        let state = (cfg & state_mask) as usize;
        a[state] += w;
        b[state] += w * x;
        c[state] += w * x * x;
    }

    for _j in (lead + 1)..=horizon {
        let mut na = vec![0.0f64; op.state_count];
        let mut nb = vec![0.0f64; op.state_count];
        let mut nc = vec![0.0f64; op.state_count];
        for s in 0..op.state_count {
            if a[s] == 0.0 && b[s] == 0.0 && c[s] == 0.0 {
                continue;
            }
            for bit in 0..2usize {
                let w = op.weights[s][bit];
                let phi = if bit == 1 { 1.0 } else { -1.0 };
                let ns = ((s as u64) << 1 | bit as u64) & state_mask;
                let ns = ns as usize;
                na[ns] += w * a[s];
                nb[ns] += w * (b[s] + phi * a[s]);
                nc[ns] += w * (c[s] + 2.0 * phi * b[s] + a[s]);
            }
        }
        // common renormalization keeps magnitudes bounded; the final ratio
        // C/A is invariant
        let norm: f64 = na.iter().sum();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::Numeric("transfer normalization left (0, inf)".into()));
        }
        for s in 0..op.state_count {
            na[s] /= norm;
            nb[s] /= norm;
            nc[s] /= norm;
        }
        a = na;
        b = nb;
        c = nc;
    }

    let za: f64 = a.iter().sum();
    let zc: f64 = c.iter().sum();
    Ok(zc / za)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{expectation, Observable};
    use crate::model::GibbsSpec;

    #[test]
    fn two_point_examples() {
        let p = IsingParams::new(1.0).unwrap();
        assert_eq!(ising_two_point(p, 0), 1.0);
        assert_eq!(ising_two_point(IsingParams::new(0.0).unwrap(), 3), 0.0);
        assert!((ising_two_point(p, 2) - 0.5800256583859739).abs() < 1e-14);
    }

    #[test]
    fn susceptibility_examples() {
        assert_eq!(susceptibility(IsingParams::new(0.0).unwrap()), 1.0);
        let chi = susceptibility(IsingParams::new(1.0).unwrap());
        assert!((chi - 2.0f64.exp()).abs() < 1e-12);
    }

    #[test]
    fn susceptibility_identity_machine_precision() {
        let mut beta = 0.0;
        while beta <= 20.0 {
            let p = IsingParams::new(beta).unwrap();
            let a = susceptibility(p);
            let b = susceptibility_ratio_form(p);
            assert!(
                ((a - b) / a).abs() < 4.0 * f64::EPSILON,
                "beta={beta}: {a} vs {b}"
            );
            beta += 0.125;
        }
        // the naive ratio is only meaningful while 1 - tanh(beta) has
        // relative accuracy; check it where it does
        let mut beta = 0.0f64;
        while beta <= 5.0 {
            let t = beta.tanh();
            let naive = (1.0 + t) / (1.0 - t);
            let exact = (2.0 * beta).exp();
            assert!(((naive - exact) / exact).abs() < 1e-12, "beta={beta}");
            beta += 0.25;
        }
    }

    #[test]
    fn finite_chain_examples() {
        assert_eq!(finite_chain_msd(IsingParams::new(0.0).unwrap(), 7).unwrap(), 7.0);
        let v = finite_chain_msd(IsingParams::new(0.5).unwrap(), 4).unwrap();
        assert!((v - 7.824284344832781).abs() < 1e-12);
    }

    #[test]
    fn finite_chain_matches_oracle() {
        for &alpha in &[0.1, 0.4, 0.9] {
            for t in [2usize, 5, 9] {
                let spec = GibbsSpec::new(
                    1,
                    t,
                    1.0,
                    alpha,
                    PairPotential::quadratic_lag2(1.0).unwrap(),
                )
                .unwrap();
                let oracle = expectation(&spec, &Observable::EndpointSquare).unwrap().value;
                let chain = finite_chain_msd(IsingParams::new(2.0 * alpha).unwrap(), t).unwrap();
                assert!(
                    ((oracle - chain) / oracle).abs() < 1e-12,
                    "alpha={alpha} T={t}: {oracle} vs {chain}"
                );
            }
        }
    }

    #[test]
    fn finite_chain_monotone() {
        let mut prev = 0.0;
        for k in 0..10 {
            let v = finite_chain_msd(IsingParams::new(0.2 * k as f64).unwrap(), 16).unwrap();
            assert!(v >= prev);
            prev = v;
        }
        let mut prev = 0.0;
        for t in 1..40 {
            let v = finite_chain_msd(IsingParams::new(0.7).unwrap(), t).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn long_chain_approaches_susceptibility() {
        let p = IsingParams::new(0.8).unwrap();
        let t = p.beta_eff.tanh();
        let horizon = (50.0 / (1.0 - t)).ceil() as usize;
        let per_step = finite_chain_msd(p, horizon).unwrap() / horizon as f64;
        let chi = susceptibility(p);
        assert!(((per_step - chi) / chi).abs() < 0.02);
    }

    #[test]
    fn banded_agrees_with_finite_chain() {
        let pot = PairPotential::quadratic_lag2(1.0).unwrap();
        for &alpha in &[0.0, 0.25, 0.6] {
            for t in [1usize, 4, 12, 37] {
                let b = banded_msd(&pot, alpha, t).unwrap();
                let f = finite_chain_msd(IsingParams::new(2.0 * alpha).unwrap(), t).unwrap();
                assert!(
                    ((b - f) / f).abs() < 1e-10,
                    "alpha={alpha} T={t}: banded {b} vs chain {f}"
                );
            }
        }
    }

    #[test]
    fn banded_agrees_with_oracle_for_range3() {
        let pot = PairPotential::coefficient_table(2, &[(1, 2, 0.7), (1, 3, 0.4), (2, 3, 0.1)])
            .unwrap();
        for t in [3usize, 6, 10] {
            let spec = GibbsSpec::new(1, t, 1.0, 0.3, pot.clone()).unwrap();
            let oracle = expectation(&spec, &Observable::EndpointSquare).unwrap().value;
            let banded = banded_msd(&pot, 0.3, t).unwrap();
            assert!(
                ((banded - oracle) / oracle).abs() < 1e-8,
                "T={t}: {banded} vs {oracle}"
            );
        }
    }

    #[test]
    fn banded_agrees_with_oracle_at_full_range() {
        let pot = PairPotential::coefficient_table(
            2,
            &[(1, 2, 0.5), (2, 2, 0.15), (1, 3, 0.3), (1, 4, 0.2)],
        )
        .unwrap();
        for t in [5usize, 9] {
            let spec = GibbsSpec::new(1, t, 1.0, 0.35, pot.clone()).unwrap();
            let oracle = expectation(&spec, &Observable::EndpointSquare).unwrap().value;
            let banded = banded_msd(&pot, 0.35, t).unwrap();
            assert!(
                ((banded - oracle) / oracle).abs() < 1e-8,
                "T={t}: {banded} vs {oracle}"
            );
        }
    }

    #[test]
    fn operator_weights_all_positive() {
        let pot = PairPotential::coefficient_table(2, &[(1, 2, 0.8), (1, 4, 0.2)]).unwrap();
        let op = BandedTransferOperator::new(&pot, 0.5).unwrap();
        assert_eq!(op.range, 4);
        assert_eq!(op.state_count, 8);
        for row in &op.weights {
            assert!(row.iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn banded_capacity() {
        let pot = PairPotential::coefficient_table(2, &[(1, 5, 1.0)]).unwrap();
        assert!(matches!(banded_msd(&pot, 0.1, 10), Err(Error::Capacity(_))));
        let quad = PairPotential::quadratic_lag2(1.0).unwrap();
        assert!(matches!(
            banded_msd(&quad, 0.1, BANDED_HORIZON_CAP + 1),
            Err(Error::Capacity(_))
        ));
    }
}

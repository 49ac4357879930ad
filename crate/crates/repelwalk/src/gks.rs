//! Numerical certification of the correlation-inequality toolbox on small
//! instances, plus exact rational spin-polynomial expansions.
//!
//! All numeric checks run through the exact oracle and certify slack down
//! to a uniform `-1e-9` tolerance. The polynomial positivity statement
//! (`Phi^gamma - Phi^2` is a nonnegative combination of even spin
//! monomials) is certified symbolically: coefficients are exact rationals,
//! so positivity is a yes/no answer.

use std::collections::{BTreeMap, BTreeSet};

use num::{BigRational, FromPrimitive, One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{expectation, expectation_multi, Observable};
use crate::model::{GibbsSpec, PairPotential};
use crate::tilt::SLACK_TOLERANCE;

/// Cap for symbolic expansions: window size (spin count) and polynomial
/// power.
pub const EXPANSION_SPIN_CAP: usize = 12;
pub const EXPANSION_POWER_CAP: u32 = 8;
/// Enumeration cap for the inequality checks.
pub const GKS_SPIN_CAP: usize = 20;

/// Polynomial in spin variables `phi_1..phi_n` reduced modulo
/// `phi^2 = a^2`: monomials are subsets of indices (bitmasks), coefficients
/// exact rationals, with the modulus `a^2` tracked.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPolynomial {
    n: usize,
    modulus_sq: BigRational,
    terms: BTreeMap<u32, BigRational>,
}

impl SpinPolynomial {
    pub fn zero(n: usize, modulus_sq: BigRational) -> Result<Self> {
        if n > EXPANSION_SPIN_CAP {
            return Err(Error::Capacity(format!(
                "spin polynomials support n <= {EXPANSION_SPIN_CAP}, got {n}"
            )));
        }
        Ok(SpinPolynomial {
            n,
            modulus_sq,
            terms: BTreeMap::new(),
        })
    }

    /// `sum_j phi_j`.
    pub fn spin_sum(n: usize, modulus_sq: BigRational) -> Result<Self> {
        let mut p = Self::zero(n, modulus_sq)?;
        for j in 0..n {
            p.terms.insert(1 << j, BigRational::one());
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &BTreeMap<u32, BigRational> {
        &self.terms
    }

    fn insert(&mut self, mask: u32, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(mask).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(&mask);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (&m, c) in &other.terms {
            out.insert(m, c.clone());
        }
        out
    }

    pub fn scale(&self, factor: &BigRational) -> Self {
        let mut out = SpinPolynomial {
            n: self.n,
            modulus_sq: self.modulus_sq.clone(),
            terms: BTreeMap::new(),
        };
        for (&m, c) in &self.terms {
            out.insert(m, c * factor);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    /// Product with reduction: overlapping indices square away into powers
    /// of the modulus, the remaining indices XOR together.
    pub fn mul(&self, other: &Self) -> Self {
        let mut out = SpinPolynomial {
            n: self.n,
            modulus_sq: self.modulus_sq.clone(),
            terms: BTreeMap::new(),
        };
        for (&m1, c1) in &self.terms {
            for (&m2, c2) in &other.terms {
                let overlap = (m1 & m2).count_ones();
                let mut coeff = c1 * c2;
                for _ in 0..overlap {
                    coeff *= &self.modulus_sq;
                }
                out.insert(m1 ^ m2, coeff);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Result<Self> {
        if k > EXPANSION_POWER_CAP {
            return Err(Error::Capacity(format!(
                "polynomial power {k} exceeds cap {EXPANSION_POWER_CAP}"
            )));
        }
        let mut out = Self::zero(self.n, self.modulus_sq.clone())?;
        out.terms.insert(0, BigRational::one());
        for _ in 0..k {
            out = out.mul(self);
        }
        Ok(out)
    }

    pub fn min_coefficient(&self) -> BigRational {
        self.terms
            .values()
            .min()
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn all_coefficients_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }

    /// True when every monomial has an even number of spin factors.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    /// Exact evaluation at `phi_j = s_j * a` where bit `j` of `plus_mask`
    /// selects `s_j = +1`. `a` must square to the tracked modulus.
    pub fn evaluate_signs(&self, plus_mask: u32, a: &BigRational) -> Result<BigRational> {
        if a * a != self.modulus_sq {
            return Err(Error::Contract(format!(
                "a^2 = {} does not match tracked modulus {}",
                a * a,
                self.modulus_sq
            )));
        }
        let mut total = BigRational::zero();
        for (&mask, coeff) in &self.terms {
            let minus_count = (mask & !plus_mask).count_ones();
            let mut term = coeff.clone();
            for _ in 0..mask.count_ones() {
                term *= a;
            }
            if minus_count % 2 == 1 {
                term = -term;
            }
            total += term;
        }
        Ok(total)
    }
}

/// Exact rational expansion of `Phi^gamma - Phi^2` with
/// `Phi = (1/sqrt N) sum phi_j` and unit spins, reduced modulo
/// `phi^2 = 1`. Nonnegativity of every coefficient certifies the
/// polynomial positivity statement.
pub fn expand_phi_power_minus_square(n: usize, gamma: u32) -> Result<SpinPolynomial> {
    if !(1..=EXPANSION_SPIN_CAP).contains(&n) {
        return Err(Error::Capacity(format!(
            "expansion requires 1 <= N <= {EXPANSION_SPIN_CAP}, got {n}"
        )));
    }
    if gamma < 2 || gamma % 2 != 0 || gamma > EXPANSION_POWER_CAP {
        return Err(Error::Capacity(format!(
            "expansion requires even gamma in 2..={EXPANSION_POWER_CAP}, got {gamma}"
        )));
    }
    let s = SpinPolynomial::spin_sum(n, BigRational::one())?;
    let n_rat = BigRational::from_usize(n).unwrap();
    let mut n_pow_k = BigRational::one();
    for _ in 0..gamma / 2 {
        n_pow_k *= &n_rat;
    }
    let phi_gamma = s.pow(gamma)?.scale(&n_pow_k.recip());
    let phi_sq = s.pow(2)?.scale(&n_rat.recip());
    Ok(phi_gamma.sub(&phi_sq))
}

/// Per-lag admissibility of a signed coefficient table under fixed step
/// amplitude: each window polynomial `sum_i c_(i,t) z^(q i)` with
/// `z = phi_1 + ... + phi_t` must expand with nonnegative spin
/// coefficients.
#[derive(Debug, Clone)]
pub struct SignedAdmissibility {
    /// `(lag, minimum spin coefficient at that lag)`.
    pub per_lag: Vec<(u32, BigRational)>,
    pub admissible: bool,
}

pub fn signed_table_admissibility(
    q: u32,
    entries: &[(u32, u32, f64)],
    step_amplitude: f64,
) -> Result<SignedAdmissibility> {
    if q == 0 {
        return Err(Error::InvalidSpec("spatial power q must be >= 1".into()));
    }
    if !(step_amplitude > 0.0) {
        return Err(Error::InvalidSpec("step amplitude must be > 0".into()));
    }
    let a = BigRational::from_float(step_amplitude)
        .ok_or_else(|| Error::InvalidSpec("step amplitude must be finite".into()))?;
    let modulus_sq = &a * &a;

    let mut lags: BTreeMap<u32, Vec<(u32, BigRational)>> = BTreeMap::new();
    for &(i, t, c) in entries {
        if i == 0 || t == 0 {
            return Err(Error::InvalidSpec(format!("bad table entry (i={i}, t={t})")));
        }
        let c = BigRational::from_float(c)
            .ok_or_else(|| Error::InvalidSpec(format!("coefficient {c} must be finite")))?;
        lags.entry(t).or_default().push((i, c));
    }

    let mut per_lag = Vec::new();
    let mut admissible = true;
    for (lag, terms) in lags {
        let window = lag as usize;
        if window > EXPANSION_SPIN_CAP {
            return Err(Error::Capacity(format!(
                "window size {window} exceeds expansion cap {EXPANSION_SPIN_CAP}"
            )));
        }
        let z = SpinPolynomial::spin_sum(window, modulus_sq.clone())?;
        let mut poly = SpinPolynomial::zero(window, modulus_sq.clone())?;
        for (i, c) in terms {
            let power = q.checked_mul(i).filter(|&p| p <= EXPANSION_POWER_CAP).ok_or_else(
                || {
                    Error::Capacity(format!(
                        "monomial power q*i = {} exceeds cap {EXPANSION_POWER_CAP}",
                        q as u64 * i as u64
                    ))
                },
            )?;
            poly = poly.add(&z.pow(power)?.scale(&c));
        }
        let min = poly.min_coefficient();
        if min.is_negative() {
            admissible = false;
        }
        per_lag.push((lag, min));
    }
    Ok(SignedAdmissibility { per_lag, admissible })
}

/// Builds a coefficient-table potential that may carry negative
/// coefficients, accepted only after the expansion-based nonnegativity
/// certification succeeds for every lag.
pub fn certified_signed_table(
    q: u32,
    entries: &[(u32, u32, f64)],
    step_amplitude: f64,
) -> Result<PairPotential> {
    let report = signed_table_admissibility(q, entries, step_amplitude)?;
    if !report.admissible {
        let detail: Vec<String> = report
            .per_lag
            .iter()
            .filter(|(_, m)| m.is_negative())
            .map(|(t, m)| format!("lag {t}: min coefficient {m}"))
            .collect();
        return Err(Error::Contract(format!(
            "signed table rejected, spin expansion has negative coefficients ({})",
            detail.join("; ")
        )));
    }
    PairPotential::coefficient_table_signed(q, entries)
}

fn check_gks_capacity(spec: &GibbsSpec) -> Result<()> {
    if spec.spin_count() > GKS_SPIN_CAP {
        return Err(Error::Capacity(format!(
            "inequality checks require d*T <= {GKS_SPIN_CAP}, got {}",
            spec.spin_count()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GksPairSlack {
    pub e_fg: f64,
    pub e_f: f64,
    pub e_g: f64,
    pub slack: f64,
}

/// `E[f g] - E[f] E[g]` for increment monomials `f`, `g`; certified
/// nonnegative down to the slack tolerance.
pub fn check_gks_pair(
    spec: &GibbsSpec,
    f: &[(usize, usize, u32)],
    g: &[(usize, usize, u32)],
) -> Result<GksPairSlack> {
    check_gks_capacity(spec)?;
    let mut fg = f.to_vec();
    fg.extend_from_slice(g);
    let obs = [
        Observable::monomial(&fg),
        Observable::monomial(f),
        Observable::monomial(g),
    ];
    let r = expectation_multi(spec, &obs)?;
    let (e_fg, e_f, e_g) = (r[0].value, r[1].value, r[2].value);
    Ok(GksPairSlack {
        e_fg,
        e_f,
        e_g,
        slack: e_fg - e_f * e_g,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OmissionSlack {
    pub e_full: f64,
    pub e_subset: f64,
    pub slack: f64,
}

fn pair_set(spec: &GibbsSpec) -> BTreeSet<(usize, usize)> {
    match &spec.interaction_set {
        Some(pairs) => pairs.iter().copied().collect(),
        None => {
            let mut s = BTreeSet::new();
            for i in 0..spec.horizon {
                for j in (i + 1)..=spec.horizon {
                    s.insert((i, j));
                }
            }
            s
        }
    }
}

/// `E^(P_M)[f] - E^(P_M')[f]` for nested interaction sets `M' ⊆ M` over
/// the same base walk and potential.
pub fn check_omission_monotonicity(
    spec_m: &GibbsSpec,
    spec_msub: &GibbsSpec,
    f: &Observable,
) -> Result<OmissionSlack> {
    check_gks_capacity(spec_m)?;
    if spec_m.d != spec_msub.d
        || spec_m.horizon != spec_msub.horizon
        || spec_m.step_amplitude != spec_msub.step_amplitude
        || spec_m.alpha != spec_msub.alpha
        || spec_m.potential != spec_msub.potential
    {
        return Err(Error::Contract(
            "omission check requires identical base walk, coupling and potential".into(),
        ));
    }
    let m = pair_set(spec_m);
    let msub = pair_set(spec_msub);
    if !msub.is_subset(&m) {
        return Err(Error::Contract(
            "interaction sets are not nested: M' must be a subset of M".into(),
        ));
    }
    let e_full = expectation(spec_m, f)?.value;
    let e_subset = expectation(spec_msub, f)?.value;
    Ok(OmissionSlack {
        e_full,
        e_subset,
        slack: e_full - e_subset,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallisticReport {
    pub mean_endpoint: f64,
    pub per_step: f64,
}

/// Exact `E[x_T^1]` and `E[x_T^1]/T` for odd interactions; the measure
/// tilts every spin, so the per-step mean dominates the single-site tilt.
pub fn check_ballistic(spec: &GibbsSpec) -> Result<BallisticReport> {
    check_gks_capacity(spec)?;
    match &spec.potential {
        PairPotential::CoefficientTable { q, coeffs } => {
            if q % 2 == 0 {
                return Err(Error::InvalidSpec(
                    "ballistic check requires odd spatial power q".into(),
                ));
            }
            let has_odd_lag2 = coeffs
                .iter()
                .any(|&(i, t, c)| t == 2 && i % 2 == 1 && c > 0.0);
            if !has_odd_lag2 {
                return Err(Error::InvalidSpec(
                    "ballistic check requires an odd i with c_(i,2) > 0".into(),
                ));
            }
        }
        PairPotential::PowerLaw { .. } => {
            return Err(Error::InvalidSpec(
                "ballistic check requires a coefficient table".into(),
            ));
        }
    }
    let mean = expectation(spec, &Observable::EndpointCoordinate { p: 1 })?.value;
    Ok(BallisticReport {
        mean_endpoint: mean,
        per_step: mean / spec.horizon as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimReductionSlack {
    pub msd_full: f64,
    pub msd_1d: f64,
    pub slack: f64,
}

/// `E_d[||x_T||^2] - d * E_(d=1)[x_T^2]` with the same coupling and
/// coefficient table (the 1-d side keeps the diagonal terms).
pub fn check_dim_reduction(spec: &GibbsSpec) -> Result<DimReductionSlack> {
    check_gks_capacity(spec)?;
    if spec.d < 2 {
        return Err(Error::InvalidSpec(format!(
            "dimension reduction check requires d >= 2, got {}",
            spec.d
        )));
    }
    let one_d = GibbsSpec::new(
        1,
        spec.horizon,
        spec.step_amplitude,
        spec.alpha,
        spec.potential.clone(),
    )?;
    let msd_full = expectation(spec, &Observable::EndpointSquare)?.value;
    let msd_1d = expectation(&one_d, &Observable::EndpointSquare)?.value;
    Ok(DimReductionSlack {
        msd_full,
        msd_1d,
        slack: msd_full - spec.d as f64 * msd_1d,
    })
}

/// One failed certification, with the spec serialized for replay.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteFailure {
    pub check: String,
    pub spec_hash: String,
    pub spec_json: String,
    pub detail: String,
    pub slack: f64,
}

/// Per-instance certification record.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteRecord {
    pub spec_hash: String,
    pub slack: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteOutcome {
    pub checks: u32,
    pub worst_slack: f64,
    pub records: Vec<SuiteRecord>,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn random_table_potential<R: Rng>(rng: &mut R, horizon: usize) -> PairPotential {
    let q = *[1u32, 2, 2, 3].get(rng.gen_range(0..4)).unwrap();
    let max_lag = horizon.min(4) as u32;
    let mut entries = Vec::new();
    for t in 2..=max_lag {
        for i in 1..=2u32 {
            if rng.gen::<f64>() < 0.55 {
                entries.push((i, t, rng.gen_range(0.0..1.0)));
            }
        }
    }
    if entries.is_empty() {
        entries.push((1, 2, rng.gen_range(0.0..1.0)));
    }
    PairPotential::coefficient_table(q, &entries).expect("random table is valid")
}

fn random_monomial<R: Rng>(rng: &mut R, horizon: usize, even_degree: bool) -> Vec<(usize, usize, u32)> {
    let n_factors = rng.gen_range(1..=3usize);
    let mut factors: Vec<(usize, usize, u32)> = (0..n_factors)
        .map(|_| (rng.gen_range(1..=horizon), 1, rng.gen_range(1..=2u32)))
        .collect();
    if even_degree {
        let degree: u32 = factors.iter().map(|f| f.2).sum();
        if degree % 2 == 1 {
            factors[0].2 += 1;
        }
    }
    factors
}

/// Randomized GKS product suite: `E[fg] >= E[f]E[g]` over random
/// Assumption-style potentials and monomial pairs of degree <= 3
/// (degree <= 4 after parity adjustment never occurs here).
pub fn gks_pair_suite(count: u32, seed: u64) -> Result<SuiteOutcome> {
    type Monomial = Vec<(usize, usize, u32)>;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let instances: Vec<(GibbsSpec, Monomial, Monomial)> = (0..count)
        .map(|_| {
            let horizon = rng.gen_range(2..=10usize);
            let potential = random_table_potential(&mut rng, horizon);
            let alpha = rng.gen_range(0.0..1.0);
            let spec = GibbsSpec::new(1, horizon, 1.0, alpha, potential).unwrap();
            let f = random_monomial(&mut rng, horizon, false);
            let g = random_monomial(&mut rng, horizon, false);
            (spec, f, g)
        })
        .collect();

    let results: Vec<Result<(GibbsSpec, String, f64)>> = instances
        .into_par_iter()
        .map(|(spec, f, g)| {
            let r = check_gks_pair(&spec, &f, &g)?;
            Ok((spec, format!("f={f:?}, g={g:?}"), r.slack))
        })
        .collect();
    collect_suite("gks-pair", results)
}

/// Randomized omission-monotonicity suite over nested interaction sets and
/// even monomials.
pub fn omission_suite(count: u32, seed: u64) -> Result<SuiteOutcome> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut instances = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let horizon = rng.gen_range(2..=8usize);
        let potential = random_table_potential(&mut rng, horizon);
        let alpha = rng.gen_range(0.0..1.0);
        let base = GibbsSpec::new(1, horizon, 1.0, alpha, potential).unwrap();
        let mut m = Vec::new();
        for i in 0..horizon {
            for j in (i + 1)..=horizon {
                if rng.gen::<f64>() < 0.6 {
                    m.push((i, j));
                }
            }
        }
        let msub: Vec<(usize, usize)> = m
            .iter()
            .copied()
            .filter(|_| rng.gen::<f64>() < 0.6)
            .collect();
        let spec_m = base.clone().with_interaction_set(m).unwrap();
        let spec_msub = base.with_interaction_set(msub).unwrap();
        let f = Observable::monomial(&random_monomial(&mut rng, horizon, true));
        instances.push((spec_m, spec_msub, f));
    }

    let results: Vec<Result<(GibbsSpec, String, f64)>> = instances
        .into_par_iter()
        .map(|(spec_m, spec_msub, f)| {
            let r = check_omission_monotonicity(&spec_m, &spec_msub, &f)?;
            Ok((spec_m, format!("f={f:?}"), r.slack))
        })
        .collect();
    collect_suite("omission-monotonicity", results)
}

fn collect_suite(
    check: &str,
    results: Vec<Result<(GibbsSpec, String, f64)>>,
) -> Result<SuiteOutcome> {
    let mut worst = f64::INFINITY;
    let mut records = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    let checks = results.len() as u32;
    for r in results {
        let (spec, detail, slack) = r?;
        if slack < worst {
            worst = slack;
        }
        let pass = slack >= -SLACK_TOLERANCE;
        records.push(SuiteRecord {
            spec_hash: spec.hash(),
            slack,
            pass,
        });
        if !pass {
            failures.push(SuiteFailure {
                check: check.to_string(),
                spec_hash: spec.hash(),
                spec_json: serde_json::to_string(&spec).unwrap(),
                detail,
                slack,
            });
        }
    }
    Ok(SuiteOutcome {
        checks,
        worst_slack: worst,
        records,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::ToPrimitive;

    fn quad_spec(t: usize, alpha: f64) -> GibbsSpec {
        GibbsSpec::new(1, t, 1.0, alpha, PairPotential::quadratic_lag2(1.0).unwrap()).unwrap()
    }

    #[test]
    fn gks_pair_two_spin_example() {
        let spec = quad_spec(2, 0.5);
        let r = check_gks_pair(&spec, &[(1, 1, 1)], &[(2, 1, 1)]).unwrap();
        assert!((r.e_fg - 1f64.tanh()).abs() < 1e-12);
        assert!(r.e_f.abs() < 1e-12 && r.e_g.abs() < 1e-12);
        assert!((r.slack - 1f64.tanh()).abs() < 1e-12);

        // slack symmetric in (f, g)
        let rev = check_gks_pair(&spec, &[(2, 1, 1)], &[(1, 1, 1)]).unwrap();
        assert_eq!(r.slack.to_bits(), rev.slack.to_bits());
    }

    #[test]
    fn gks_pair_independent_at_zero_coupling() {
        let spec = quad_spec(6, 0.0);
        let r = check_gks_pair(&spec, &[(1, 1, 1), (3, 1, 1)], &[(5, 1, 2)]).unwrap();
        assert!(r.slack.abs() < 1e-12);
    }

    #[test]
    fn omission_example() {
        let base = quad_spec(2, 0.5);
        let spec_m = base.clone().with_interaction_set(vec![(0, 2)]).unwrap();
        let spec_empty = base.with_interaction_set(vec![]).unwrap();
        let f = Observable::monomial_1d(&[1, 2]);
        let r = check_omission_monotonicity(&spec_m, &spec_empty, &f).unwrap();
        assert!((r.slack - 1f64.tanh()).abs() < 1e-12);

        let same = check_omission_monotonicity(&spec_m, &spec_m, &f).unwrap();
        assert_eq!(same.slack, 0.0);
    }

    #[test]
    fn omission_rejects_non_nested() {
        let base = quad_spec(3, 0.5);
        let a = base.clone().with_interaction_set(vec![(0, 2)]).unwrap();
        let b = base.with_interaction_set(vec![(1, 3)]).unwrap();
        let f = Observable::monomial_1d(&[1, 2]);
        assert!(matches!(
            check_omission_monotonicity(&a, &b, &f),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn expansion_examples() {
        // N=2, gamma=4: constant 1, pair coefficient 1
        let p = expand_phi_power_minus_square(2, 4).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert_eq!(p.terms()[&0b00], BigRational::one());
        assert_eq!(p.terms()[&0b11], BigRational::one());
        assert!(p.all_coefficients_nonnegative());
        assert!(p.is_even());

        // gamma = 2: identically zero
        for n in 1..=6 {
            let p = expand_phi_power_minus_square(n, 2).unwrap();
            assert!(p.terms().is_empty());
        }

        assert!(expand_phi_power_minus_square(13, 4).is_err());
        assert!(expand_phi_power_minus_square(4, 10).is_err());
        assert!(expand_phi_power_minus_square(4, 3).is_err());
    }

    #[test]
    fn expansion_nonnegative_small_grid() {
        for n in 2..=6 {
            for gamma in [4u32, 6] {
                let p = expand_phi_power_minus_square(n, gamma).unwrap();
                assert!(
                    p.all_coefficients_nonnegative(),
                    "N={n} gamma={gamma}: min {}",
                    p.min_coefficient()
                );
                assert!(p.is_even());
            }
        }
    }

    #[test]
    fn expansion_evaluates_exactly() {
        let a = BigRational::one();
        for n in 2..=5usize {
            for gamma in [4u32, 6] {
                let p = expand_phi_power_minus_square(n, gamma).unwrap();
                for mask in 0..(1u32 << n) {
                    let s: i64 = (0..n)
                        .map(|j| if mask >> j & 1 == 1 { 1i64 } else { -1 })
                        .sum();
                    let s = BigRational::from_i64(s).unwrap();
                    let n_rat = BigRational::from_usize(n).unwrap();
                    let mut phi_pow = BigRational::one();
                    for _ in 0..gamma {
                        phi_pow *= &s;
                    }
                    let mut n_pow = BigRational::one();
                    for _ in 0..gamma / 2 {
                        n_pow *= &n_rat;
                    }
                    let expect = phi_pow / n_pow - (&s * &s) / n_rat;
                    assert_eq!(p.evaluate_signs(mask, &a).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn ballistic_examples() {
        // T=2, W(z,2)=z: measure factorizes to e^(alpha phi1) e^(alpha phi2)
        let pot = PairPotential::coefficient_table(1, &[(1, 2, 1.0)]).unwrap();
        let spec = GibbsSpec::new(1, 2, 1.0, 1.0, pot.clone()).unwrap();
        let r = check_ballistic(&spec).unwrap();
        assert!((r.mean_endpoint - 2.0 * 1f64.tanh()).abs() < 1e-12);

        let zero = GibbsSpec::new(1, 2, 1.0, 0.0, pot.clone()).unwrap();
        assert!(check_ballistic(&zero).unwrap().mean_endpoint.abs() < 1e-12);

        let spec8 = GibbsSpec::new(1, 8, 1.0, 1.0, pot).unwrap();
        let r = check_ballistic(&spec8).unwrap();
        assert!(r.per_step >= 1f64.tanh() - 1e-9, "per-step {}", r.per_step);

        let even = quad_spec(2, 1.0);
        assert!(check_ballistic(&even).is_err());
    }

    #[test]
    fn dim_reduction_examples() {
        // quadratic norm interaction factorizes exactly across coordinates
        let spec = GibbsSpec::new(2, 4, 1.0, 0.3, PairPotential::quadratic_lag2(1.0).unwrap())
            .unwrap();
        let r = check_dim_reduction(&spec).unwrap();
        assert!(r.slack.abs() < 1e-9, "slack {}", r.slack);

        // quartic (i=2) couples coordinates; slack stays nonnegative
        let pot = PairPotential::coefficient_table(2, &[(2, 2, 1.0)]).unwrap();
        let spec = GibbsSpec::new(2, 3, 1.0, 0.2, pot.clone()).unwrap();
        let r = check_dim_reduction(&spec).unwrap();
        assert!(r.slack >= -1e-9);

        let zero = GibbsSpec::new(2, 3, 1.0, 0.0, pot).unwrap();
        assert!(check_dim_reduction(&zero).unwrap().slack.abs() < 1e-12);

        assert!(check_dim_reduction(&quad_spec(3, 0.2)).is_err());
    }

    #[test]
    fn short_suites_certify() {
        let r = gks_pair_suite(40, 2024).unwrap();
        assert!(r.passed(), "worst slack {}", r.worst_slack);
        assert_eq!(r.checks, 40);

        let r = omission_suite(25, 2025).unwrap();
        assert!(r.passed(), "worst slack {}", r.worst_slack);
    }

    #[test]
    fn suites_reproduce_bitwise() {
        let a = gks_pair_suite(15, 77).unwrap();
        let b = gks_pair_suite(15, 77).unwrap();
        assert_eq!(a.worst_slack.to_bits(), b.worst_slack.to_bits());
        let a = omission_suite(10, 78).unwrap();
        let b = omission_suite(10, 78).unwrap();
        assert_eq!(a.worst_slack.to_bits(), b.worst_slack.to_bits());
    }

    #[test]
    fn signed_table_certification() {
        // rho(t) (beta z^4 - delta z^2): admissible once beta a^2 > delta
        let ok = signed_table_admissibility(2, &[(2, 2, 1.0), (1, 2, -0.5)], 1.0).unwrap();
        assert!(ok.admissible, "{:?}", ok.per_lag);
        let pot = certified_signed_table(2, &[(2, 2, 1.0), (1, 2, -0.5)], 1.0).unwrap();
        // certified potential actually evaluates with the negative term
        let w = crate::model::evaluate_w(&[2.0], 2, &pot).unwrap();
        assert!((w - (16.0 - 2.0)).abs() < 1e-12);

        let bad = signed_table_admissibility(2, &[(2, 2, 0.1), (1, 2, -1.0)], 1.0).unwrap();
        assert!(!bad.admissible);
        assert!(certified_signed_table(2, &[(2, 2, 0.1), (1, 2, -1.0)], 1.0).is_err());
        let min = &bad.per_lag[0].1;
        assert!(min.to_f64().unwrap() < 0.0);
    }
}

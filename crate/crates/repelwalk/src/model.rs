//! Pair potentials, measure specifications and path configurations.
//!
//! A walk of horizon `T` in `d` dimensions is a sequence of increments
//! `phi_j` (`j = 1..=T`), each coordinate taking the values `±a`. The Gibbs
//! weight of a path is `exp(alpha * energy)` where `energy` sums the pair
//! potential `W(x_j - x_i, j - i)` over the allowed index pairs
//! `0 <= i < j <= T`. The coupling `alpha` is deliberately *not* folded into
//! [`energy`] so the same pair sum serves tilted and untilted consumers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Interaction between two path points separated by displacement `z` and
/// time lag `t`.
///
/// `CoefficientTable` is the polynomial family
/// `W(z,t) = sum_i c_{i,t} (sum_p (z^p)^q)^i` with `c_{i,t} >= 0` and finite
/// support in `t`; `PowerLaw` is `W(z,t) = ||z||^gamma / t^xi` with even
/// `gamma`. Lags without a table entry contribute zero, so `t = 1`
/// interactions default off but stay configurable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PairPotential {
    CoefficientTable {
        /// Spatial power `q` applied per coordinate.
        q: u32,
        /// `(i, t, c_{i,t})` entries, sorted by `(t, i)`, `i >= 1`,
        /// `t >= 1`.
        coeffs: Vec<(u32, u32, f64)>,
    },
    PowerLaw {
        /// Even positive spatial exponent.
        gamma: u32,
        /// Temporal decay exponent, `> 0`.
        xi: f64,
    },
}

fn fold_entries(entries: &[(u32, u32, f64)]) -> Result<Vec<(u32, u32, f64)>> {
    let mut map: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for &(i, t, c) in entries {
        if i == 0 {
            return Err(Error::InvalidSpec("polynomial index i must be >= 1".into()));
        }
        if t == 0 {
            return Err(Error::InvalidSpec("time lag t must be >= 1".into()));
        }
        if !c.is_finite() {
            return Err(Error::InvalidSpec(format!("coefficient {c} must be finite")));
        }
        if c != 0.0 {
            *map.entry((t, i)).or_insert(0.0) += c;
        }
    }
    Ok(map.into_iter().map(|((t, i), c)| (i, t, c)).collect())
}

impl PairPotential {
    pub fn coefficient_table(q: u32, entries: &[(u32, u32, f64)]) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec("spatial power q must be >= 1".into()));
        }
        for &(i, t, c) in entries {
            if !(c >= 0.0) {
                return Err(Error::InvalidSpec(format!(
                    "coefficient c_({i},{t}) = {c} must be >= 0"
                )));
            }
        }
        Ok(PairPotential::CoefficientTable {
            q,
            coeffs: fold_entries(entries)?,
        })
    }

    /// Table constructor admitting negative coefficients. Only reachable
    /// through the verifier's expansion-based certification.
    pub(crate) fn coefficient_table_signed(q: u32, entries: &[(u32, u32, f64)]) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidSpec("spatial power q must be >= 1".into()));
        }
        Ok(PairPotential::CoefficientTable {
            q,
            coeffs: fold_entries(entries)?,
        })
    }

    pub fn power_law(gamma: u32, xi: f64) -> Result<Self> {
        if gamma == 0 || gamma % 2 != 0 {
            return Err(Error::InvalidSpec(format!(
                "power-law gamma = {gamma} must be a positive even integer"
            )));
        }
        if !(xi > 0.0) {
            return Err(Error::InvalidSpec(format!("power-law xi = {xi} must be > 0")));
        }
        Ok(PairPotential::PowerLaw { gamma, xi })
    }

    /// The nearest-neighbour quadratic interaction `W(z,2) = c z^2`.
    pub fn quadratic_lag2(c: f64) -> Result<Self> {
        Self::coefficient_table(2, &[(1, 2, c)])
    }

    /// Largest time lag with a nonzero coefficient (tables only).
    pub fn table_range(&self) -> Option<u32> {
        match self {
            PairPotential::CoefficientTable { coeffs, .. } => {
                coeffs.iter().map(|&(_, t, _)| t).max()
            }
            PairPotential::PowerLaw { .. } => None,
        }
    }

    /// Whether `W(-z, t) = W(z, t)` holds structurally.
    pub fn is_even(&self) -> bool {
        match self {
            PairPotential::CoefficientTable { q, .. } => q % 2 == 0,
            PairPotential::PowerLaw { .. } => true,
        }
    }

    /// True when some `c_{i,2} > 0`, the standing assumption of the
    /// short-range pipeline.
    pub fn has_lag2_coefficient(&self) -> bool {
        match self {
            PairPotential::CoefficientTable { coeffs, .. } => {
                coeffs.iter().any(|&(_, t, c)| t == 2 && c > 0.0)
            }
            PairPotential::PowerLaw { .. } => true,
        }
    }
}

/// Evaluates `W(z, t)`.
///
/// Tables return 0 at lags without entries. `PowerLaw` rejects `t = 0`.
pub fn evaluate_w(z: &[f64], t: usize, potential: &PairPotential) -> Result<f64> {
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("displacement contains a non-finite value".into()));
    }
    match potential {
        PairPotential::CoefficientTable { q, coeffs } => {
            if t == 0 {
                return Err(Error::Domain("time lag t must be >= 1".into()));
            }
            let mut s = 0.0;
            for v in z {
                s += v.powi(*q as i32);
            }
            let mut w = 0.0;
            for &(i, ti, c) in coeffs {
                if ti as usize == t {
                    w += c * s.powi(i as i32);
                }
            }
            Ok(w)
        }
        PairPotential::PowerLaw { gamma, xi } => {
            if t == 0 {
                return Err(Error::Domain("power-law potential undefined at t = 0".into()));
            }
            let norm_sq: f64 = z.iter().map(|v| v * v).sum();
            Ok(norm_sq.powi((*gamma / 2) as i32) / (t as f64).powf(*xi))
        }
    }
}

/// Full specification of a Gibbs path measure: base walk (`d`, `T`, step
/// amplitude `a`), coupling `alpha`, potential, and optionally an explicit
/// set of interacting index pairs (defaults to all `0 <= i < j <= T`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GibbsSpec {
    pub d: usize,
    pub horizon: usize,
    pub step_amplitude: f64,
    pub alpha: f64,
    pub potential: PairPotential,
    /// Explicit interaction set `M` (sorted, deduplicated); `None` = all pairs.
    pub interaction_set: Option<Vec<(usize, usize)>>,
}

impl GibbsSpec {
    pub fn new(
        d: usize,
        horizon: usize,
        step_amplitude: f64,
        alpha: f64,
        potential: PairPotential,
    ) -> Result<Self> {
        let spec = GibbsSpec {
            d,
            horizon,
            step_amplitude,
            alpha,
            potential,
            interaction_set: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_interaction_set(mut self, mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        pairs.dedup();
        for &(i, j) in &pairs {
            if i >= j || j > self.horizon {
                return Err(Error::InvalidSpec(format!(
                    "interaction pair ({i},{j}) must satisfy 0 <= i < j <= T = {}",
                    self.horizon
                )));
            }
        }
        self.interaction_set = Some(pairs);
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::InvalidSpec("dimension d must be >= 1".into()));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidSpec("horizon T must be >= 1".into()));
        }
        if !(self.step_amplitude > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "step amplitude a = {} must be > 0",
                self.step_amplitude
            )));
        }
        if !(self.alpha >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "coupling alpha = {} must be >= 0",
                self.alpha
            )));
        }
        if let Some(pairs) = &self.interaction_set {
            for &(i, j) in pairs {
                if i >= j || j > self.horizon {
                    return Err(Error::InvalidSpec(format!(
                        "interaction pair ({i},{j}) must satisfy 0 <= i < j <= T = {}",
                        self.horizon
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn spin_count(&self) -> usize {
        self.d * self.horizon
    }

    /// Stable content hash used to key result records.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        let digest = Sha256::digest(&bytes);
        let mut s = String::with_capacity(16);
        for b in &digest[..8] {
            s.push_str(&format!("{b:02x}"));
        }
        s
    }
}

/// A configuration of `d*T` signed increments with cached partial sums
/// `x_0 = 0, x_j = x_{j-1} + phi_j`.
///
/// Increment `(j, p)` lives at flat index `(j-1)*d + (p-1)`; positions are
/// stored the same way with an extra leading `x_0 = 0` row.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinPath {
    d: usize,
    horizon: usize,
    step_amplitude: f64,
    increments: Vec<f64>,
    positions: Vec<f64>,
}

impl SpinPath {
    /// Builds a path from sign bits: bit `(j-1)*d + (p-1)` set means `+a`.
    pub fn from_bits(d: usize, horizon: usize, step_amplitude: f64, bits: u64) -> Self {
        let n = d * horizon;
        let mut increments = vec![0.0; n];
        for (b, inc) in increments.iter_mut().enumerate() {
            *inc = if bits >> b & 1 == 1 {
                step_amplitude
            } else {
                -step_amplitude
            };
        }
        Self::from_increments(d, horizon, step_amplitude, increments)
    }

    pub fn from_signs(d: usize, horizon: usize, step_amplitude: f64, signs: &[i8]) -> Result<Self> {
        if signs.len() != d * horizon {
            return Err(Error::Shape(format!(
                "expected {} signs, got {}",
                d * horizon,
                signs.len()
            )));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::InvalidSpec("signs must be +1 or -1".into()));
        }
        let increments = signs.iter().map(|&s| s as f64 * step_amplitude).collect();
        Ok(Self::from_increments(d, horizon, step_amplitude, increments))
    }

    fn from_increments(d: usize, horizon: usize, step_amplitude: f64, increments: Vec<f64>) -> Self {
        let mut positions = vec![0.0; d * (horizon + 1)];
        for j in 1..=horizon {
            for p in 0..d {
                positions[j * d + p] = positions[(j - 1) * d + p] + increments[(j - 1) * d + p];
            }
        }
        SpinPath {
            d,
            horizon,
            step_amplitude,
            increments,
            positions,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn step_amplitude(&self) -> f64 {
        self.step_amplitude
    }

    /// Increment `phi_j^p`, 1-based in both indices.
    pub fn increment(&self, j: usize, p: usize) -> f64 {
        self.increments[(j - 1) * self.d + (p - 1)]
    }

    /// Position coordinate `x_j^p`, `j` in `0..=T`, `p` 1-based.
    pub fn position(&self, j: usize, p: usize) -> f64 {
        self.positions[j * self.d + (p - 1)]
    }

    pub fn endpoint_norm_sq(&self) -> f64 {
        let t = self.horizon;
        (1..=self.d).map(|p| self.position(t, p).powi(2)).sum()
    }

    /// Negates `phi_k^p` in place and updates the cached positions.
    pub fn flip(&mut self, k: usize, p: usize) {
        let idx = (k - 1) * self.d + (p - 1);
        let old = self.increments[idx];
        self.increments[idx] = -old;
        let delta = -2.0 * old;
        for j in k..=self.horizon {
            self.positions[j * self.d + (p - 1)] += delta;
        }
    }

    pub fn matches(&self, spec: &GibbsSpec) -> Result<()> {
        if self.d != spec.d || self.horizon != spec.horizon {
            return Err(Error::Shape(format!(
                "path is (d={}, T={}) but spec is (d={}, T={})",
                self.d, self.horizon, spec.d, spec.horizon
            )));
        }
        if self.step_amplitude != spec.step_amplitude {
            return Err(Error::Shape(format!(
                "path amplitude {} differs from spec amplitude {}",
                self.step_amplitude, spec.step_amplitude
            )));
        }
        Ok(())
    }
}

/// Precomputed evaluation context for one spec: temporal decay table for
/// power laws and the interaction range for coefficient tables. Hot paths
/// (enumeration, MCMC) construct one of these and reuse it.
pub struct EnergyModel<'a> {
    spec: &'a GibbsSpec,
    /// `1 / t^xi` for `t = 0..=T` (power law only; entry 0 unused).
    inv_decay: Vec<f64>,
    /// Table terms `(degree, coefficient)` grouped by lag (index = lag).
    lag_terms: Vec<Vec<(i32, f64)>>,
    /// Pair lag cutoff: lags above this contribute nothing.
    max_lag: usize,
}

impl<'a> EnergyModel<'a> {
    pub fn new(spec: &'a GibbsSpec) -> Result<Self> {
        spec.validate()?;
        let t = spec.horizon;
        let (inv_decay, lag_terms, max_lag) = match &spec.potential {
            PairPotential::PowerLaw { xi, .. } => {
                let mut v = Vec::with_capacity(t + 1);
                v.push(0.0);
                for lag in 1..=t {
                    v.push((lag as f64).powf(-xi));
                }
                (v, Vec::new(), t)
            }
            PairPotential::CoefficientTable { coeffs, .. } => {
                let r = (spec.potential.table_range().unwrap_or(0) as usize).min(t);
                let mut lag_terms = vec![Vec::new(); r + 1];
                for &(i, ti, c) in coeffs {
                    let lag = ti as usize;
                    if lag <= r {
                        lag_terms[lag].push((i as i32, c));
                    }
                }
                (Vec::new(), lag_terms, r)
            }
        };
        Ok(EnergyModel {
            spec,
            inv_decay,
            lag_terms,
            max_lag,
        })
    }

    pub fn spec(&self) -> &GibbsSpec {
        self.spec
    }

    /// `W(x_j - x_i, j - i)` read off the cached positions.
    fn pair_term(&self, path: &SpinPath, i: usize, j: usize) -> f64 {
        let lag = j - i;
        match &self.spec.potential {
            PairPotential::CoefficientTable { q, .. } => {
                let mut s = 0.0;
                for p in 1..=self.spec.d {
                    s += (path.position(j, p) - path.position(i, p)).powi(*q as i32);
                }
                let mut w = 0.0;
                for &(deg, c) in &self.lag_terms[lag] {
                    w += c * s.powi(deg);
                }
                w
            }
            PairPotential::PowerLaw { gamma, .. } => {
                let mut s = 0.0;
                for p in 1..=self.spec.d {
                    let z = path.position(j, p) - path.position(i, p);
                    s += z * z;
                }
                s.powi((*gamma / 2) as i32) * self.inv_decay[lag]
            }
        }
    }

    /// Pair sum over the allowed interaction set, *without* the `alpha`
    /// prefactor. Pairs accumulate in a fixed lexicographic order so runs
    /// are bit-reproducible.
    pub fn energy(&self, path: &SpinPath) -> Result<f64> {
        path.matches(self.spec)?;
        let t = self.spec.horizon;
        let mut e = 0.0;
        match &self.spec.interaction_set {
            Some(pairs) => {
                for &(i, j) in pairs {
                    if j - i <= self.max_lag {
                        e += self.pair_term(path, i, j);
                    }
                }
            }
            None => {
                for i in 0..t {
                    let jmax = t.min(i + self.max_lag);
                    for j in (i + 1)..=jmax {
                        e += self.pair_term(path, i, j);
                    }
                }
            }
        }
        if !e.is_finite() {
            return Err(Error::Numeric(format!("energy evaluated to {e}")));
        }
        Ok(e)
    }

    /// `energy(path with phi_k^p negated) - energy(path)` without mutating
    /// the path. Only pairs with `i < k <= j` change.
    pub fn delta_flip(&self, path: &SpinPath, k: usize, p: usize) -> Result<f64> {
        path.matches(self.spec)?;
        if k == 0 || k > self.spec.horizon {
            return Err(Error::InvalidSpec(format!(
                "flip step {k} out of range 1..={}",
                self.spec.horizon
            )));
        }
        if p == 0 || p > self.spec.d {
            return Err(Error::InvalidSpec(format!(
                "flip coordinate {p} out of range 1..={}",
                self.spec.d
            )));
        }
        Ok(self.delta_flip_unchecked(path, k, p))
    }

    pub(crate) fn delta_flip_unchecked(&self, path: &SpinPath, k: usize, p: usize) -> f64 {
        // positions at index >= k shift by `shift` in coordinate p
        let shift = -2.0 * path.increment(k, p);
        let t = self.spec.horizon;
        let mut delta = 0.0;
        match &self.spec.interaction_set {
            Some(pairs) => {
                for &(i, j) in pairs {
                    if i < k && k <= j && j - i <= self.max_lag {
                        delta += self.pair_delta(path, i, j, p, shift);
                    }
                }
            }
            None => {
                let imin = k.saturating_sub(self.max_lag);
                for i in imin..k {
                    let jmax = t.min(i + self.max_lag);
                    for j in k..=jmax {
                        delta += self.pair_delta(path, i, j, p, shift);
                    }
                }
            }
        }
        delta
    }

    fn pair_delta(&self, path: &SpinPath, i: usize, j: usize, p: usize, shift: f64) -> f64 {
        let lag = j - i;
        let zp = path.position(j, p) - path.position(i, p);
        match &self.spec.potential {
            PairPotential::CoefficientTable { q, .. } => {
                let mut s = 0.0;
                for c in 1..=self.spec.d {
                    s += (path.position(j, c) - path.position(i, c)).powi(*q as i32);
                }
                let s_new = s - zp.powi(*q as i32) + (zp + shift).powi(*q as i32);
                let mut w = 0.0;
                for &(deg, c) in &self.lag_terms[lag] {
                    w += c * (s_new.powi(deg) - s.powi(deg));
                }
                w
            }
            PairPotential::PowerLaw { gamma, .. } => {
                let mut s = 0.0;
                for c in 1..=self.spec.d {
                    let z = path.position(j, c) - path.position(i, c);
                    s += z * z;
                }
                let zn = zp + shift;
                let s_new = s - zp * zp + zn * zn;
                let half = (*gamma / 2) as i32;
                (s_new.powi(half) - s.powi(half)) * self.inv_decay[lag]
            }
        }
    }
}

/// Pair sum of the potential over the spec's interaction set, without the
/// `alpha` prefactor.
pub fn energy(path: &SpinPath, spec: &GibbsSpec) -> Result<f64> {
    EnergyModel::new(spec)?.energy(path)
}

/// Energy change from negating `phi_k^p` (1-based step and coordinate).
pub fn delta_energy_flip(path: &SpinPath, k: usize, p: usize, spec: &GibbsSpec) -> Result<f64> {
    EnergyModel::new(spec)?.delta_flip(path, k, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad_spec(d: usize, t: usize, alpha: f64) -> GibbsSpec {
        GibbsSpec::new(d, t, 1.0, alpha, PairPotential::quadratic_lag2(1.0).unwrap()).unwrap()
    }

    #[test]
    fn evaluate_w_examples() {
        let table = PairPotential::quadratic_lag2(1.0).unwrap();
        assert_eq!(evaluate_w(&[2.0], 2, &table).unwrap(), 4.0);
        assert_eq!(evaluate_w(&[2.0], 3, &table).unwrap(), 0.0);
        assert_eq!(evaluate_w(&[0.0], 2, &table).unwrap(), 0.0);

        let pl = PairPotential::power_law(2, 2.0).unwrap();
        assert!((evaluate_w(&[3.0], 3, &pl).unwrap() - 1.0).abs() < 1e-15);
        assert!(matches!(
            evaluate_w(&[1.0], 0, &pl),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn potential_constructors_reject_bad_input() {
        assert!(PairPotential::coefficient_table(2, &[(1, 2, -0.5)]).is_err());
        assert!(PairPotential::coefficient_table(0, &[(1, 2, 1.0)]).is_err());
        assert!(PairPotential::power_law(3, 1.0).is_err());
        assert!(PairPotential::power_law(2, 0.0).is_err());
    }

    #[test]
    fn energy_examples() {
        // T=2, increments (+1,+1): only pair (0,2) contributes, (x_2-x_0)^2 = 4
        let spec = quad_spec(1, 2, 0.5);
        let path = SpinPath::from_signs(1, 2, 1.0, &[1, 1]).unwrap();
        assert_eq!(energy(&path, &spec).unwrap(), 4.0);
        let path = SpinPath::from_signs(1, 2, 1.0, &[1, -1]).unwrap();
        assert_eq!(energy(&path, &spec).unwrap(), 0.0);

        // T=3 straight path under |z|^2/t^2: all 6 pairs contribute 1
        let pl = GibbsSpec::new(1, 3, 1.0, 1.0, PairPotential::power_law(2, 2.0).unwrap()).unwrap();
        let path = SpinPath::from_signs(1, 3, 1.0, &[1, 1, 1]).unwrap();
        assert!((energy(&path, &pl).unwrap() - 6.0).abs() < 1e-12);
    }

    #[test]
    fn energy_respects_interaction_set() {
        let spec = quad_spec(1, 3, 0.5)
            .with_interaction_set(vec![(0, 2)])
            .unwrap();
        let path = SpinPath::from_signs(1, 3, 1.0, &[1, 1, -1]).unwrap();
        // only (x_2 - x_0)^2 = 4 counts; pair (1,3) is excluded
        assert_eq!(energy(&path, &spec).unwrap(), 4.0);
    }

    #[test]
    fn energy_shape_error() {
        let spec = quad_spec(1, 2, 0.5);
        let path = SpinPath::from_signs(1, 3, 1.0, &[1, 1, 1]).unwrap();
        assert!(matches!(energy(&path, &spec), Err(Error::Shape(_))));
    }

    #[test]
    fn delta_flip_matches_energy_difference() {
        let spec = quad_spec(1, 2, 0.5);
        let mut path = SpinPath::from_signs(1, 2, 1.0, &[1, 1]).unwrap();
        let d = delta_energy_flip(&path, 2, 1, &spec).unwrap();
        assert_eq!(d, -4.0);
        path.flip(2, 1);
        let d2 = delta_energy_flip(&path, 2, 1, &spec).unwrap();
        assert_eq!(d + d2, 0.0);
    }

    #[test]
    fn flip_maintains_positions() {
        let mut path = SpinPath::from_signs(2, 3, 0.5, &[1, -1, 1, 1, -1, -1]).unwrap();
        path.flip(2, 1);
        for j in 1..=3 {
            for p in 1..=2 {
                let expect: f64 = (1..=j).map(|s| path.increment(s, p)).sum();
                assert!((path.position(j, p) - expect).abs() < 1e-15);
            }
        }
    }

    proptest! {
        #[test]
        fn delta_agrees_with_recomputation(
            bits in any::<u64>(),
            t in 2usize..=12,
            d in 1usize..=2,
            k in 1usize..=12,
            p in 1usize..=2,
            powerlaw in any::<bool>(),
            alpha in 0.0f64..1.5,
        ) {
            let k = (k - 1) % t + 1;
            let p = (p - 1) % d + 1;
            let potential = if powerlaw {
                PairPotential::power_law(2, 1.5).unwrap()
            } else {
                PairPotential::coefficient_table(2, &[(1, 2, 1.0), (2, 3, 0.3)]).unwrap()
            };
            let spec = GibbsSpec::new(d, t, 1.0, alpha, potential).unwrap();
            let mut path = SpinPath::from_bits(d, t, 1.0, bits);
            let before = energy(&path, &spec).unwrap();
            let delta = delta_energy_flip(&path, k, p, &spec).unwrap();
            path.flip(k, p);
            let after = energy(&path, &spec).unwrap();
            prop_assert!((delta - (after - before)).abs() < 1e-10);
        }

        #[test]
        fn global_sign_flip_preserves_even_energy(bits in any::<u64>(), t in 1usize..=8, powerlaw in any::<bool>()) {
            let potential = if powerlaw {
                PairPotential::power_law(4, 2.5).unwrap()
            } else {
                PairPotential::quadratic_lag2(1.0).unwrap()
            };
            let spec = GibbsSpec::new(1, t, 1.0, 0.7, potential).unwrap();
            let path = SpinPath::from_bits(1, t, 1.0, bits);
            let mask = (1u64 << t) - 1;
            let flipped = SpinPath::from_bits(1, t, 1.0, !bits & mask);
            let e1 = energy(&path, &spec).unwrap();
            let e2 = energy(&flipped, &spec).unwrap();
            prop_assert!((e1 - e2).abs() < 1e-12);
            prop_assert!(e1 >= 0.0);
        }

        #[test]
        fn even_potentials_are_even_in_z(z in -4.0f64..4.0, t in 1usize..=5) {
            let table = PairPotential::coefficient_table(2, &[(1, 2, 0.5), (2, 3, 0.2)]).unwrap();
            let pl = PairPotential::power_law(2, 1.5).unwrap();
            for potential in [&table, &pl] {
                let plus = evaluate_w(&[z], t, potential).unwrap();
                let minus = evaluate_w(&[-z], t, potential).unwrap();
                prop_assert_eq!(plus.to_bits(), minus.to_bits());
            }
        }
    }
}

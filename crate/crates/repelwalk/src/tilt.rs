//! Two-block tilts and the extremal analysis behind the variance
//! recursion.
//!
//! For a symmetric finite measure `theta` with second moment `V`, the
//! tilted product `P(dy dz) ~ exp(beta y z) theta(dy) theta(dz)` has
//! `E[yz] >= V tanh(beta V)` whenever `beta V <= 2`. The extremal measure
//! is two-atomic at `±V`; the reduction goes through four-point measures
//! `p/2 (d_a + d_-a) + (1-p)/2 (d_b + d_-b)` and the convexity of
//! `t -> k(sqrt t)` with `k(x) = x sinh(beta x) - V tanh(V beta) cosh(beta x)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{expectation, Observable};
use crate::model::{GibbsSpec, PairPotential};

const WEIGHT_TOLERANCE: f64 = 1e-12;
/// Uniform tolerance for certified inequality slack.
pub const SLACK_TOLERANCE: f64 = 1e-9;

/// Finite symmetric atomic probability measure on the line, stored as an
/// optional atom at 0 plus mirrored `±x` pairs with equal per-side weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMeasure {
    zero_weight: f64,
    /// `(location > 0, per-side weight)`, strictly increasing locations.
    pairs: Vec<(f64, f64)>,
}

impl SymmetricMeasure {
    /// Builds from the full atom list; must be exactly closed under
    /// negation with equal weights and sum to 1.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let mut zero_weight = 0.0;
        let mut pos: Vec<(f64, f64)> = Vec::new();
        let mut neg: Vec<(f64, f64)> = Vec::new();
        for &(x, w) in atoms {
            if !x.is_finite() || !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidSpec(format!("bad atom ({x}, {w})")));
            }
            if x == 0.0 {
                zero_weight += w;
            } else if x > 0.0 {
                pos.push((x, w));
            } else {
                neg.push((-x, w));
            }
        }
        let fold = |mut v: Vec<(f64, f64)>| -> Vec<(f64, f64)> {
            v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
            let mut out: Vec<(f64, f64)> = Vec::new();
            for (x, w) in v {
                match out.last_mut() {
                    Some(last) if last.0 == x => last.1 += w,
                    _ => out.push((x, w)),
                }
            }
            out
        };
        let pos = fold(pos);
        let neg = fold(neg);
        if pos.len() != neg.len() {
            return Err(Error::InvalidSpec("atoms are not closed under negation".into()));
        }
        for (p, n) in pos.iter().zip(&neg) {
            if p.0 != n.0 || (p.1 - n.1).abs() > WEIGHT_TOLERANCE {
                return Err(Error::InvalidSpec(format!(
                    "weights at ±{} differ: {} vs {}",
                    p.0, p.1, n.1
                )));
            }
        }
        let total: f64 = zero_weight + pos.iter().map(|p| 2.0 * p.1).sum::<f64>();
        if (total - 1.0).abs() > WEIGHT_TOLERANCE {
            return Err(Error::InvalidSpec(format!("weights sum to {total}, not 1")));
        }
        Ok(SymmetricMeasure {
            zero_weight,
            pairs: pos,
        })
    }

    /// Builds from positive locations with raw (unnormalized) per-side
    /// weights plus raw mass at zero.
    pub fn from_half(half: &[(f64, f64)], zero_weight: f64) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let total: f64 = zero_weight + half.iter().map(|p| 2.0 * p.1).sum::<f64>();
        if !(total > 0.0) {
            return Err(Error::InvalidSpec("measure has no mass".into()));
        }
        if zero_weight > 0.0 {
            atoms.push((0.0, zero_weight / total));
        }
        for &(x, w) in half {
            if !(x > 0.0) {
                return Err(Error::InvalidSpec(format!("half-locations must be > 0, got {x}")));
            }
            atoms.push((x, w / total));
            atoms.push((-x, w / total));
        }
        Self::from_atoms(&atoms)
    }

    /// Two atoms `±x` with weight 1/2 each.
    pub fn rademacher(x: f64) -> Result<Self> {
        Self::from_half(&[(x, 0.5)], 0.0)
    }

    /// Full support including negative locations and the optional zero atom.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(2 * self.pairs.len() + 1);
        for &(x, w) in self.pairs.iter().rev() {
            out.push((-x, w));
        }
        if self.zero_weight > 0.0 {
            out.push((0.0, self.zero_weight));
        }
        for &(x, w) in &self.pairs {
            out.push((x, w));
        }
        out
    }

    pub fn second_moment(&self) -> f64 {
        self.pairs.iter().map(|&(x, w)| 2.0 * w * x * x).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.pairs.iter().all(|&(_, w)| w == 0.0)
    }
}

/// `E[yz]` under the tilt `exp(beta y z)`, with a degeneracy flag for
/// measures carrying all mass at 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossMoment {
    pub value: f64,
    pub degenerate: bool,
}

/// Cross moment of the tilted product measure
/// `P(dy dz) ~ exp(beta y z) theta(dy) theta(dz)` by direct double sum
/// with a log-domain shift.
pub fn tilted_cross_moment(theta: &SymmetricMeasure, beta: f64) -> Result<CrossMoment> {
    if !(beta >= 0.0) {
        return Err(Error::InvalidSpec(format!("beta = {beta} must be >= 0")));
    }
    if theta.is_degenerate() {
        return Ok(CrossMoment {
            value: 0.0,
            degenerate: true,
        });
    }
    let atoms = theta.atoms();
    let mut shift = f64::NEG_INFINITY;
    for &(x, _) in &atoms {
        for &(y, _) in &atoms {
            shift = shift.max(beta * x * y);
        }
    }
    let mut z = 0.0;
    let mut num = 0.0;
    for &(x, wx) in &atoms {
        for &(y, wy) in &atoms {
            let w = wx * wy * (beta * x * y - shift).exp();
            z += w;
            num += w * x * y;
        }
    }
    Ok(CrossMoment {
        value: num / z,
        degenerate: false,
    })
}

/// `V tanh(beta V)`, certified as a lower bound only for `beta V <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TanhBound {
    pub value: f64,
    pub certified: bool,
}

pub fn tanh_lower_bound(v: f64, beta: f64) -> Result<TanhBound> {
    if !(v > 0.0) {
        return Err(Error::InvalidSpec(format!("V = {v} must be > 0")));
    }
    if !(beta >= 0.0) {
        return Err(Error::InvalidSpec(format!("beta = {beta} must be >= 0")));
    }
    Ok(TanhBound {
        value: v * (beta * v).tanh(),
        certified: beta * v <= 2.0,
    })
}

/// The law `p/2 (d_a + d_-a) + (1-p)/2 (d_b + d_-b)` with `0 < a <= b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourPointMeasure {
    pub a: f64,
    pub b: f64,
    pub p: f64,
}

impl FourPointMeasure {
    pub fn new(a: f64, b: f64, p: f64) -> Result<Self> {
        if !(a > 0.0 && b >= a) {
            return Err(Error::InvalidSpec(format!("need 0 < a <= b, got a={a}, b={b}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidSpec(format!("p = {p} must lie in [0,1]")));
        }
        Ok(FourPointMeasure { a, b, p })
    }

    pub fn variance(&self) -> f64 {
        self.p * self.a * self.a + (1.0 - self.p) * self.b * self.b
    }
}

fn four_point_ratio_raw(a: f64, b: f64, p: f64, beta: f64) -> f64 {
    let n = p * a * (beta * a).sinh() + (1.0 - p) * b * (beta * b).sinh();
    let z = p * (beta * a).cosh() + (1.0 - p) * (beta * b).cosh();
    n / z
}

/// Tilted mean `E[S e^(beta S)] / E[e^(beta S)]` of a four-point law.
pub fn four_point_ratio(m: &FourPointMeasure, beta: f64) -> f64 {
    four_point_ratio_raw(m.a, m.b, m.p, beta)
}

/// Grid minimization of the four-point tilted mean over the variance shell
/// `p a^2 + (1-p) b^2 = V^2`. `b` is eliminated by the constraint; cells
/// with `b^2 < a^2` are infeasible and skipped. Ties resolve to the
/// lexicographically smallest `(a, p)`.
pub fn minimize_four_point(
    v: f64,
    beta: f64,
    grid_resolution: f64,
) -> Result<(FourPointMeasure, f64)> {
    if !(v > 0.0) {
        return Err(Error::InvalidSpec(format!("V = {v} must be > 0")));
    }
    if !(beta > 0.0) {
        return Err(Error::InvalidSpec(format!("beta = {beta} must be > 0")));
    }
    if beta * v > 2.0 {
        return Err(Error::Domain(format!(
            "minimization certified only for beta V <= 2, got {}",
            beta * v
        )));
    }
    let h = grid_resolution;
    if !(h > 0.0 && h <= 1e-3 * v) {
        return Err(Error::InvalidSpec(format!(
            "grid resolution {h} must satisfy 0 < h <= 1e-3 V"
        )));
    }

    let v_sq = v * v;
    let a_steps = (v / h).round() as usize;
    let p_steps = (1.0 / h).floor() as usize;
    let mut best: Option<(f64, f64, f64, f64)> = None; // (value, a, p, b)
    for ka in 1..=a_steps {
        let a = if ka == a_steps { v } else { ka as f64 * h };
        for kp in 0..=p_steps {
            let p = kp as f64 * h;
            if p >= 1.0 {
                continue;
            }
            let b_sq = (v_sq - p * a * a) / (1.0 - p);
            if b_sq < a * a * (1.0 - 1e-12) {
                continue;
            }
            let b = b_sq.max(a * a).sqrt();
            let value = four_point_ratio_raw(a, b, p, beta);
            if !value.is_finite() {
                continue;
            }
            if best.is_none_or(|(bv, _, _, _)| value < bv) {
                best = Some((value, a, p, b));
            }
        }
    }
    let (value, a, p, b) = best.ok_or_else(|| {
        Error::Domain("no feasible grid cell on the variance shell".into())
    })?;
    Ok((FourPointMeasure { a, b, p }, value))
}

/// Convexity certificate for `phi(t) = k(sqrt t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityReport {
    pub second_differences_positive: bool,
    /// `k(V)`, zero by construction.
    pub k_at_v: f64,
    pub k_second_derivative_positive: bool,
    pub pass: bool,
}

/// Checks strict convexity of `phi(t) = k(sqrt t)` on a positive grid,
/// `k(V) = 0`, and `k'' > 0` at the grid points. Requires `beta V < 2`.
pub fn convexity_certificate(v: f64, beta: f64, t_grid: &[f64]) -> Result<ConvexityReport> {
    if !(v > 0.0 && beta > 0.0) {
        return Err(Error::InvalidSpec("need V > 0 and beta > 0".into()));
    }
    if beta * v >= 2.0 {
        return Err(Error::Domain(format!(
            "certificate requires beta V < 2, got {}",
            beta * v
        )));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Domain("t grid must be strictly positive".into()));
    }
    if t_grid.len() < 3 {
        return Err(Error::InvalidSpec("t grid needs at least 3 points".into()));
    }
    let mut grid = t_grid.to_vec();
    grid.sort_by(|a, b| a.partial_cmp(b).unwrap());
    grid.dedup();

    let bv = beta * v;
    let k = |x: f64| x * (beta * x).sinh() - v * bv.tanh() * (beta * x).cosh();
    let kpp = |x: f64| {
        beta * (beta * x).cosh() * (2.0 - bv * bv.tanh()) + beta * beta * x * (beta * x).sinh()
    };
    let phi = |t: f64| k(t.sqrt());

    let mut second_ok = true;
    for w in grid.windows(3) {
        let (t0, t1, t2) = (w[0], w[1], w[2]);
        let dd = 2.0 * ((phi(t2) - phi(t1)) / (t2 - t1) - (phi(t1) - phi(t0)) / (t1 - t0))
            / (t2 - t0);
        if !(dd > 0.0) {
            second_ok = false;
        }
    }
    let kpp_ok = grid.iter().all(|&t| kpp(t.sqrt()) > 0.0);
    let k_at_v = k(v);
    let pass = second_ok && kpp_ok && k_at_v.abs() <= 1e-10;
    Ok(ConvexityReport {
        second_differences_positive: second_ok,
        k_at_v,
        k_second_derivative_positive: kpp_ok,
        pass,
    })
}

/// Split-measure covariance check at horizon `T` (even), quadratic
/// power-law interaction `z^2 / t^(1+c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockCovarianceReport {
    pub horizon: usize,
    pub alpha: f64,
    pub c: f64,
    /// Second moment of the normalized half-block sum under the half-size
    /// measure.
    pub v: f64,
    /// Tilt strength `alpha / T^c`.
    pub beta: f64,
    pub cross_moment: f64,
    pub bound: f64,
    pub slack: f64,
    /// Whether `beta V <= 2`, the certified regime.
    pub certified: bool,
}

/// Interaction set of the split measure: all pairs inside each half-block
/// plus the single `(0, T)` cross pair, whose interaction
/// `alpha x_T^2 / T^(1+c)` carries exactly the cross term
/// `(alpha / T^c) sigma1 sigma2` after expanding the square.
pub fn split_interaction_set(horizon: usize) -> Vec<(usize, usize)> {
    let half = horizon / 2;
    let mut pairs = Vec::new();
    for i in 0..half {
        for j in (i + 1)..=half {
            pairs.push((i, j));
        }
    }
    for i in half..horizon {
        for j in (i + 1)..=horizon {
            pairs.push((i, j));
        }
    }
    pairs.push((0, horizon));
    pairs.sort_unstable();
    pairs.dedup();
    pairs
}

pub fn split_spec(alpha: f64, c: f64, horizon: usize) -> Result<GibbsSpec> {
    let potential = PairPotential::power_law(2, 1.0 + c)?;
    GibbsSpec::new(1, horizon, 1.0, alpha, potential)?
        .with_interaction_set(split_interaction_set(horizon))
}

/// Exact evaluation of `E[sigma1 sigma2]` under the split measure against
/// the `V tanh((alpha/T^c) V)` lower bound, where `V` is computed under the
/// half-size measure.
pub fn block_covariance_check(alpha: f64, c: f64, horizon: usize) -> Result<BlockCovarianceReport> {
    if horizon < 2 || horizon % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "block covariance requires even T >= 2, got {horizon}"
        )));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidSpec(format!("c = {c} must be > 0")));
    }
    let half = horizon / 2;
    let norm = 1.0 / (half as f64).sqrt();

    let half_spec = GibbsSpec::new(1, half, 1.0, alpha, PairPotential::power_law(2, 1.0 + c)?)?;
    let v = expectation(
        &half_spec,
        &Observable::BlockProduct {
            block_a: (1, half),
            block_b: (1, half),
            norm_a: norm,
            norm_b: norm,
        },
    )?
    .value;

    let split = split_spec(alpha, c, horizon)?;
    let cross_moment = expectation(
        &split,
        &Observable::BlockProduct {
            block_a: (1, half),
            block_b: (half + 1, horizon),
            norm_a: norm,
            norm_b: norm,
        },
    )?
    .value;

    let beta = alpha / (horizon as f64).powf(c);
    let bound = v * (beta * v).tanh();
    Ok(BlockCovarianceReport {
        horizon,
        alpha,
        c,
        v,
        beta,
        cross_moment,
        bound,
        slack: cross_moment - bound,
        certified: beta * v <= 2.0,
    })
}

/// Random symmetric measure with up to `max_pairs` mirrored atom pairs and
/// occasional mass at zero. Locations land in (0.05, 3).
pub fn random_symmetric_measure<R: Rng>(rng: &mut R, max_pairs: usize) -> SymmetricMeasure {
    let n = rng.gen_range(1..=max_pairs.max(1));
    let mut half = Vec::with_capacity(n);
    for _ in 0..n {
        let x = rng.gen_range(0.05..3.0);
        let w = rng.gen_range(0.05..1.0);
        half.push((x, w));
    }
    let zero = if rng.gen::<bool>() {
        rng.gen_range(0.0..0.5)
    } else {
        0.0
    };
    SymmetricMeasure::from_half(&half, zero).expect("generated measure is valid")
}

/// Outcome of randomized tanh-bound trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TanhBoundTrials {
    pub trials: u32,
    pub violations: u32,
    /// Minimum of `cross_moment - bound` over all trials.
    pub worst_slack: f64,
}

/// Randomized falsification harness for the tanh lower bound: draws
/// symmetric measures, picks `beta` with `beta * second_moment <= 2`, and
/// compares the tilted cross moment against `M tanh(beta M)` where `M` is
/// the measure's second moment.
pub fn tanh_bound_trials(trials: u32, max_pairs: usize, seed: u64) -> Result<TanhBoundTrials> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for _ in 0..trials {
        let theta = random_symmetric_measure(&mut rng, max_pairs);
        let m = theta.second_moment();
        let beta = rng.gen_range(0.0..=1.0) * 2.0 / m;
        let cross = tilted_cross_moment(&theta, beta)?.value;
        let slack = cross - m * (beta * m).tanh();
        if slack < worst {
            worst = slack;
        }
        if slack < -SLACK_TOLERANCE {
            violations += 1;
        }
    }
    Ok(TanhBoundTrials {
        trials,
        violations,
        worst_slack: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cross_moment_two_atom_closed_forms() {
        let theta = SymmetricMeasure::rademacher(1.0).unwrap();
        let m = tilted_cross_moment(&theta, 1.0).unwrap();
        assert!(!m.degenerate);
        assert!((m.value - 1f64.tanh()).abs() < 1e-14);

        // V = 4: E[yz] = 4 tanh(4 beta)
        let theta = SymmetricMeasure::rademacher(2.0).unwrap();
        let m = tilted_cross_moment(&theta, 0.3).unwrap();
        assert!((m.value - 4.0 * 1.2f64.tanh()).abs() < 1e-12);
        assert!((m.value - 3.334_618_428_048_621).abs() < 1e-12);

        for beta in [0.0, 0.7] {
            let theta = random_symmetric_measure(&mut ChaCha12Rng::seed_from_u64(4), 4);
            let m = tilted_cross_moment(&theta, beta).unwrap();
            if beta == 0.0 {
                assert!(m.value.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn degenerate_measure_flagged() {
        let theta = SymmetricMeasure::from_atoms(&[(0.0, 1.0)]).unwrap();
        let m = tilted_cross_moment(&theta, 1.0).unwrap();
        assert_eq!(m.value, 0.0);
        assert!(m.degenerate);
    }

    #[test]
    fn measure_validation() {
        assert!(SymmetricMeasure::from_atoms(&[(1.0, 0.6), (-1.0, 0.4)]).is_err());
        assert!(SymmetricMeasure::from_atoms(&[(1.0, 0.5), (-1.0, 0.5), (2.0, 0.1)]).is_err());
        assert!(SymmetricMeasure::from_atoms(&[(1.0, 0.3), (-1.0, 0.3)]).is_err());
        let m = SymmetricMeasure::from_atoms(&[(0.0, 0.2), (1.5, 0.4), (-1.5, 0.4)]).unwrap();
        assert!((m.second_moment() - 2.0 * 0.4 * 2.25).abs() < 1e-15);
    }

    #[test]
    fn tanh_bound_values() {
        let b = tanh_lower_bound(1.0, 1.0).unwrap();
        assert!((b.value - 0.7615941559557649).abs() < 1e-14);
        assert!(b.certified);
        assert_eq!(tanh_lower_bound(3.0, 0.0).unwrap().value, 0.0);
        let edge = tanh_lower_bound(1.0, 2.0).unwrap();
        assert!((edge.value - 2f64.tanh()).abs() < 1e-14);
        assert!(edge.certified);
        assert!(!tanh_lower_bound(1.0, 2.5).unwrap().certified);
    }

    #[test]
    fn four_point_values() {
        let m = FourPointMeasure::new(1.0, 1.0, 0.37).unwrap();
        assert!((four_point_ratio(&m, 1.0) - 1f64.tanh()).abs() < 1e-14);

        let b = 1.75f64.sqrt();
        let m = FourPointMeasure::new(0.5, b, 0.5).unwrap();
        assert!((m.variance() - 1.0).abs() < 1e-14);
        let r = four_point_ratio(&m, 1.0);
        assert!((r - 0.8182299333905238).abs() < 1e-12);

        assert_eq!(four_point_ratio(&m, 0.0), 0.0);
        assert!(FourPointMeasure::new(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn minimize_recovers_two_point_measure() {
        for (v, beta) in [(1.0, 1.0), (1.0, 2.0)] {
            let h = 1e-3 * v;
            let (arg, min) = minimize_four_point(v, beta, h).unwrap();
            let expect = v * (beta * v).tanh();
            assert!((min - expect).abs() < 1e-6, "min {min} vs {expect}");
            assert!((arg.a - v).abs() <= 2.0 * h && (arg.b - v).abs() <= 2.0 * h);
            assert!(min >= expect - SLACK_TOLERANCE);
        }
        assert!(minimize_four_point(1.0, 2.5, 1e-3).is_err());
        assert!(minimize_four_point(1.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn convexity_certificate_examples() {
        let grid: Vec<f64> = (1..=40).map(|k| 0.1 * k as f64).collect();
        let r = convexity_certificate(1.0, 1.0, &grid).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.k_at_v.abs() < 1e-12);

        let r = convexity_certificate(1.0, 1.9, &grid).unwrap();
        assert!(r.pass);

        assert!(convexity_certificate(1.0, 2.0, &grid).is_err());
        assert!(convexity_certificate(1.0, 1.0, &[0.0, 0.1, 0.2]).is_err());
        assert!(convexity_certificate(1.0, 1.0, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn block_covariance_small() {
        let r = block_covariance_check(1.0, 0.5, 8).unwrap();
        assert!(r.certified, "beta V = {}", r.beta * r.v);
        assert!(r.slack >= -SLACK_TOLERANCE, "{r:?}");

        let r0 = block_covariance_check(0.0, 0.5, 8).unwrap();
        assert!(r0.cross_moment.abs() < 1e-12);
        assert!(r0.bound.abs() < 1e-12);

        assert!(block_covariance_check(1.0, 0.5, 7).is_err());
    }

    #[test]
    fn randomized_tanh_trials_pass() {
        let r = tanh_bound_trials(200, 6, 12345).unwrap();
        assert_eq!(r.violations, 0, "worst slack {}", r.worst_slack);
        assert!(r.worst_slack >= -SLACK_TOLERANCE);
    }

    proptest! {
        #[test]
        fn ratio_symmetric_under_role_swap(
            a in 0.1f64..2.0,
            b in 0.1f64..2.0,
            p in 0.0f64..1.0,
            beta in 0.0f64..2.0,
        ) {
            let r1 = four_point_ratio_raw(a, b, p, beta);
            let r2 = four_point_ratio_raw(b, a, 1.0 - p, beta);
            prop_assert!((r1 - r2).abs() <= 1e-12 * r1.abs().max(1.0));
        }

        #[test]
        fn tanh_bound_on_random_measures(seed in any::<u64>()) {
            use rand::Rng as _;
            let mut rng = ChaCha12Rng::seed_from_u64(seed);
            let theta = random_symmetric_measure(&mut rng, 6);
            let m = theta.second_moment();
            let beta = rng.gen_range(0.0..=1.0) * 2.0 / m;
            let cross = tilted_cross_moment(&theta, beta).unwrap().value;
            prop_assert!(cross >= m * (beta * m).tanh() - SLACK_TOLERANCE);
        }
    }
}

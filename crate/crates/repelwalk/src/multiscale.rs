//! Dyadic variance recursion and its phase diagram.
//!
//! The normalized block variance obeys
//! `V_1 = 1, V_(n+1) = (1 + tanh(min(alpha 2^(-c n) V_n, 2))) V_n`; in the
//! rescaled variable `y_n = alpha 2^(-c n) V_n` this reads
//! `y_(n+1) = 2^(-c) (1 + tanh(min(y_n, 2))) y_n`. The per-step gain
//! saturates at `g_sat = 2^(-c) (1 + tanh 2)`, which exceeds 1 exactly for
//! `c < c_crit = log2(1 + tanh 2)`, and the sharp coupling threshold is
//! `alpha_*(c) = 2^c arctanh(2^c - 1)`.
//!
//! `V_n` and `y_n` are carried in the log domain alongside the linear
//! values, so the iteration keeps going (levels up to 10^4) after the
//! linear values overflow past ~1e300.

use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::error::{Error, Result};

pub const MAX_LEVELS: u32 = 10_000;
/// Iteration cap used when classifying a phase point.
pub const CLASSIFY_LEVEL_CAP: u32 = 1_000;
const LINEAR_LIMIT: f64 = 1e300;

/// `c_crit = log2(1 + tanh 2) ~ 0.9738152`.
pub fn c_crit() -> f64 {
    (1.0 + 2.0f64.tanh()).log2()
}

/// Sharp coupling threshold `alpha_*(c) = 2^c arctanh(2^c - 1)` for
/// `c in (0, c_crit)`.
pub fn alpha_star(c: f64) -> Result<f64> {
    if !(c > 0.0 && c < c_crit()) {
        return Err(Error::Domain(format!(
            "alpha_star requires 0 < c < c_crit = {}, got {c}",
            c_crit()
        )));
    }
    let u = 2.0f64.powf(c) - 1.0;
    Ok(2.0f64.powf(c) * u.atanh())
}

/// Saturated per-level gain of the rescaled recursion.
pub fn saturated_gain(c: f64) -> f64 {
    2.0f64.powf(-c) * (1.0 + 2.0f64.tanh())
}

/// Growth exponent of the superdiffusive MSD lower bound, which
/// scales like `T^(1 + c_crit)`.
pub fn superdiffusive_exponent() -> f64 {
    1.0 + c_crit()
}

/// One level of the recursion. `v` and `y` are the linear values (possibly
/// `inf` once past ~1e300); `log_v` and `log_y` are always finite natural
/// logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecursionState {
    pub n: u32,
    pub v: f64,
    pub y: f64,
    pub log_v: f64,
    pub log_y: f64,
}

fn make_state(n: u32, log_v: f64, alpha: f64, c: f64) -> RecursionState {
    let log_y = alpha.ln() - c * n as f64 * LN_2 + log_v;
    let v = if log_v < LINEAR_LIMIT.ln() {
        log_v.exp()
    } else {
        f64::INFINITY
    };
    // prefer the direct product while it is representable
    let scale = 2.0f64.powf(-c * n as f64);
    let y = if v.is_finite() && scale > 0.0 {
        alpha * scale * v
    } else {
        log_y.exp()
    };
    RecursionState {
        n,
        v,
        y,
        log_v,
        log_y,
    }
}

/// `tanh` of the (possibly clamped) rescaled variable; the gain factor is
/// `1 + tanh(arg)` and its log accumulates as `ln_1p(tanh(arg))` so tiny
/// gains survive in the log domain.
fn step_tanh(state: &RecursionState, clamp: bool) -> f64 {
    let arg = if state.y.is_finite() {
        if clamp {
            state.y.min(2.0)
        } else {
            state.y
        }
    } else if clamp {
        2.0
    } else {
        // tanh saturates anyway
        f64::MAX.ln()
    };
    arg.tanh()
}

fn iterate(alpha: f64, c: f64, n_max: u32, clamp: bool) -> Result<Vec<RecursionState>> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidSpec(format!("alpha = {alpha} must be > 0")));
    }
    if !(c > 0.0) {
        return Err(Error::InvalidSpec(format!("c = {c} must be > 0")));
    }
    if n_max == 0 {
        return Err(Error::InvalidSpec("n_max must be >= 1".into()));
    }
    if n_max > MAX_LEVELS {
        return Err(Error::Capacity(format!(
            "recursion supports n_max <= {MAX_LEVELS}, got {n_max}"
        )));
    }
    let mut states = Vec::with_capacity(n_max as usize);
    // V_1 = 1, exact
    let mut state = make_state(1, 0.0, alpha, c);
    state.v = 1.0;
    states.push(state);
    for n in 1..n_max {
        let tanh_term = step_tanh(&states[n as usize - 1], clamp);
        let factor = 1.0 + tanh_term;
        let prev = &states[n as usize - 1];
        let log_v = prev.log_v + tanh_term.ln_1p();
        let mut next = make_state(n + 1, log_v, alpha, c);
        // carry the linear product exactly while it stays in range
        if prev.v.is_finite() {
            let lin = prev.v * factor;
            if lin.is_finite() && lin < LINEAR_LIMIT {
                next.v = lin;
                let scale = 2.0f64.powf(-c * (n + 1) as f64);
                if scale > 0.0 {
                    next.y = alpha * scale * lin;
                }
            }
        }
        states.push(next);
    }
    Ok(states)
}

/// Exact iteration of the clamped recursion from `V_1 = 1`.
pub fn iterate_recursion(alpha: f64, c: f64, n_max: u32) -> Result<Vec<RecursionState>> {
    iterate(alpha, c, n_max, true)
}

/// Variant without the `min(., 2)` clamp, for exploration only; the
/// certified recursion is the clamped one.
pub fn iterate_recursion_unclamped(alpha: f64, c: f64, n_max: u32) -> Result<Vec<RecursionState>> {
    iterate(alpha, c, n_max, false)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Divergent,
    Bounded,
}

/// Classification of one `(alpha, c)` point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub alpha: f64,
    pub c: f64,
    pub phase: Phase,
    /// Set when `alpha` sits numerically on the threshold; such points are
    /// excluded from assertions.
    pub boundary: bool,
    /// `V_(n+1)/V_n` at the last iterated level (`1 + tanh 2` once
    /// saturated, -> 1 when bounded).
    pub asymptotic_ratio: f64,
    /// Level where `y_n` first exceeded 2, or the iteration cap.
    pub n_reached: u32,
    /// Whether the iterated trajectory confirms the analytic verdict:
    /// divergent points must push `y` past 2 within the cap, bounded points
    /// must have `y` decreasing from the start.
    pub iteration_consistent: bool,
}

/// Classifies `(alpha, c)` against the analytic threshold and
/// cross-validates by iterating the recursion.
pub fn classify_phase(alpha: f64, c: f64) -> Result<PhasePoint> {
    if !(c > 0.0 && c < c_crit()) {
        return Err(Error::Domain(format!(
            "classification requires 0 < c < c_crit, got c = {c}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::InvalidSpec(format!("alpha = {alpha} must be > 0")));
    }
    let threshold = alpha_star(c)?;
    let boundary = (alpha - threshold).abs() <= 1e-14 * threshold;
    let phase = if alpha > threshold {
        Phase::Divergent
    } else {
        Phase::Bounded
    };

    let states = iterate(alpha, c, CLASSIFY_LEVEL_CAP, true)?;
    let crossed = states.iter().find(|s| s.log_y > LN_2).map(|s| s.n);
    let decreasing = states.windows(2).all(|w| w[1].log_y < w[0].log_y);
    let last = states.len() - 1;
    let asymptotic_ratio = (states[last].log_v - states[last - 1].log_v).exp();
    let iteration_consistent = match phase {
        Phase::Divergent => crossed.is_some(),
        Phase::Bounded => decreasing,
    };
    Ok(PhasePoint {
        alpha,
        c,
        phase,
        boundary,
        asymptotic_ratio,
        n_reached: crossed.unwrap_or(CLASSIFY_LEVEL_CAP),
        iteration_consistent,
    })
}

/// `log2(V_(n+1) / V_n)` along the clamped recursion.
pub fn growth_ratio_log2(alpha: f64, c: f64, n: u32) -> Result<f64> {
    let states = iterate_recursion(alpha, c, n + 1)?;
    Ok((states[n as usize].log_v - states[n as usize - 1].log_v) / LN_2)
}

/// Heuristic effective-coupling tail exponent for the power-law potential:
/// the induced two-spin coupling at distance `r` decays like `r^-s` with
/// `s = xi - gamma/2 - 1`, and the expected superdiffusivity threshold is
/// `xi_c = 3 + gamma/2`. HEURISTIC: reported, never certified.
pub fn effective_coupling_exponent(gamma: u32, xi: f64) -> Result<(f64, f64)> {
    if gamma == 0 || gamma % 2 != 0 {
        return Err(Error::InvalidSpec(format!(
            "gamma = {gamma} must be a positive even integer"
        )));
    }
    let k = gamma as f64 / 2.0;
    if !(xi > k + 1.0) {
        return Err(Error::Domain(format!(
            "summation divergent: heuristic requires xi > gamma/2 + 1 = {}",
            k + 1.0
        )));
    }
    Ok((xi - k - 1.0, 3.0 + k))
}

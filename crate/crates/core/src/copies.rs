//! How many copies are needed to tell a one-solution post-oracle state
//! from the no-solution one.
//!
//! The two states differ by a single swapped amplitude pair, so their
//! overlap is `δ = (L - 1)/L` for a search space of size `L`, and `N`
//! copies overlap as `δ^N`. Driving `δ^N` below a constant needs
//! `N ≈ L ln(1/c)` copies.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formula::planted;
use crate::oracle::post_oracle_state;
use crate::qsim::{PureState, RegisterLayout};

pub const GRID_MIN: u64 = 2;
pub const GRID_MAX: u64 = 1 << 30;
pub const DEFAULT_GRID_POINTS: usize = 64;
/// Largest register simulated by [`delta_simulated`].
pub const MAX_SIMULATED_QUBITS: usize = 12;

/// `δ^N` values below `10^-300` are emitted as zero.
const UNDERFLOW_LOG10: f64 = -300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistinguishabilityPoint {
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub delta: f64,
    #[serde(rename = "log10_deltaN")]
    pub log10_delta_n: f64,
    #[serde(rename = "deltaN")]
    pub delta_n: f64,
    pub bound: f64,
}

impl DistinguishabilityPoint {
    pub fn new(l: u64, n: u64) -> Result<Self> {
        if l < 2 || n < 1 {
            return Err(Error::InvalidArgument(format!("need L >= 2 and N >= 1, got L = {l}, N = {n}")));
        }
        let ln_delta = (-1.0 / l as f64).ln_1p();
        let ln_delta_n = n as f64 * ln_delta;
        let log10_delta_n = ln_delta_n / std::f64::consts::LN_10;
        let delta_n = if log10_delta_n < UNDERFLOW_LOG10 { 0.0 } else { ln_delta_n.exp() };
        // 1 - δ^N computed without cancellation near δ^N = 1.
        let one_minus = -ln_delta_n.exp_m1();
        let bound = 0.5 + 0.5 * (one_minus * (1.0 + delta_n)).sqrt();
        Ok(Self { l, n, delta: (l - 1) as f64 / l as f64, log10_delta_n, delta_n, bound })
    }
}

/// `1/2 + (1/2)√(1 - overlap²)`, the best probability of telling two pure
/// states with the given overlap apart.
pub fn guessing_bound(overlap: f64) -> f64 {
    0.5 + 0.5 * (1.0 - overlap * overlap).max(0.0).sqrt()
}

/// `(L - 1)/L` for `L ≥ 2` a power of two.
pub fn delta_analytic(l: u64) -> Result<f64> {
    if l < 2 || !l.is_power_of_two() {
        return Err(Error::InvalidArgument(format!("L = {l} must be a power of two, at least 2")));
    }
    Ok((l - 1) as f64 / l as f64)
}

/// Overlap of the post-oracle states of a formula with the single solution
/// `s` and of one with no solution, simulated on `n` query qubits.
pub fn delta_simulated(n: usize, s: u64) -> Result<f64> {
    if n == 0 || n > MAX_SIMULATED_QUBITS {
        return Err(Error::CapExceeded {
            what: "qubits (overlap simulation)",
            value: n as u64,
            cap: MAX_SIMULATED_QUBITS as u64,
        });
    }
    if s >= 1u64 << n {
        return Err(Error::InvalidArgument(format!("solution index {s} out of range for n = {n}")));
    }
    let layout = RegisterLayout::minimal(n)?;
    let f = planted(n, s);
    let with_solution = post_oracle_state(&f, 0, f.space_size() - 1, layout)?;
    // An oracle that marks nothing leaves the input untouched.
    let without = PureState::uniform_superposition(layout);
    Ok(with_solution.inner_product(&without)?.re)
}

/// Smallest `N` with `((L - 1)/L)^N ≤ c`.
pub fn copies_required(l: u64, c: f64) -> Result<u64> {
    if l < 2 {
        return Err(Error::InvalidArgument(format!("L = {l} must be at least 2")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::InvalidArgument(format!("target overlap {c} must lie in (0, 1)")));
    }
    let ln_delta = (-1.0 / l as f64).ln_1p();
    let ln_c = c.ln();
    let mut n = (ln_c / ln_delta).ceil().max(1.0) as u64;
    // Guard the rounding of the closed form.
    while n as f64 * ln_delta > ln_c {
        n += 1;
    }
    while n > 1 && (n - 1) as f64 * ln_delta <= ln_c {
        n -= 1;
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CopiesRow {
    #[serde(rename = "L")]
    pub l: u64,
    pub c: f64,
    #[serde(rename = "N")]
    pub n: u64,
    /// `N / L`.
    pub ratio: f64,
    /// `ln(1/c)`, the limit of the ratio.
    pub limit: f64,
}

pub fn copies_table(ls: &[u64], c: f64) -> Result<Vec<CopiesRow>> {
    ls.iter()
        .map(|&l| {
            let n = copies_required(l, c)?;
            Ok(CopiesRow { l, c, n, ratio: n as f64 / l as f64, limit: -c.ln() })
        })
        .collect()
}

/// `points` integers log-spaced over `[lo, hi]`, duplicates after rounding
/// removed.
pub fn log_spaced(lo: u64, hi: u64, points: usize) -> Result<Vec<u64>> {
    if lo > hi || points == 0 {
        return Err(Error::InvalidArgument(format!("empty range [{lo}, {hi}] with {points} points")));
    }
    if lo < GRID_MIN || hi > GRID_MAX {
        return Err(Error::InvalidArgument(format!("range [{lo}, {hi}] leaves [{GRID_MIN}, {GRID_MAX}]")));
    }
    if points == 1 || lo == hi {
        return Ok(vec![lo]);
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let step = (b - a) / (points - 1) as f64;
    let mut out: Vec<u64> = (0..points)
        .map(|i| if i == points - 1 { hi } else { ((a + step * i as f64).exp().round() as u64).clamp(lo, hi) })
        .collect();
    out.dedup();
    Ok(out)
}

/// `δ^N` over a log-spaced grid, rows sorted by `L` then `N`.
pub fn overlap_grid(l_range: (u64, u64), n_range: (u64, u64), points: usize) -> Result<Vec<DistinguishabilityPoint>> {
    let ls = log_spaced(l_range.0, l_range.1, points)?;
    let ns = log_spaced(n_range.0, n_range.1, points)?;
    ls.par_iter().flat_map_iter(|&l| ns.iter().map(move |&n| DistinguishabilityPoint::new(l, n))).collect()
}

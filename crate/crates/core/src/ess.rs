//! Responder evolutionarily stable strategy for arbitrary offers.
//!
//! When all other responders play `p`, responder payoff is linear in its own
//! strategy with slope `s_i f(p_i) / L` towards proposer `i`, where
//! `f(x) = (1 - (1 - x)^L) / x`. The ESS equalizes `s_i f(p_i)` over all
//! proposers that get visited and drops those whose offer is too low to
//! reach that level even at `p_i = 0`. Fixing the probability `p_K` of the
//! highest offer determines all other `p_i`; [`h`] sums them, and the ESS is
//! the unique `p_K` with `h(p_K) = 1`.

use serde::{Deserialize, Serialize};

use crate::engine::responder_payoff_against;
use crate::error::{Error, Result};
use crate::model::{OfferVector, SymmetricStrategy};
use crate::roots::bisect;

/// Bracket width used when inverting `f`.
pub const INVERSE_TOL: f64 = 1e-14;
/// Bound on `|h(p_K) - 1|` at the returned root.
pub const RESIDUAL_TOL: f64 = 1e-12;

/// `f(x) = sum_{k<L} (1 - x)^k`, equal to `(1 - (1 - x)^L) / x` with
/// `f(0) = L`, evaluated without the cancellation near zero.
pub fn f(x: f64, responders: usize) -> f64 {
    let y = 1.0 - x;
    (1..responders).fold(1.0, |acc, _| 1.0 + y * acc)
}

/// Inverse of [`f`], clamped to 0 for `y >= L` and to 1 for `y <= 1`.
pub fn f_inverse(y: f64, responders: usize) -> Result<f64> {
    if y.is_nan() || y < 1.0 {
        return Err(Error::InvalidArgument(format!(
            "f_inverse needs y >= 1, got {y}"
        )));
    }
    if y >= responders as f64 {
        return Ok(0.0);
    }
    if y == 1.0 {
        return Ok(1.0);
    }
    Ok(bisect(|x| f(x, responders) - y, 0.0, 1.0, INVERSE_TOL))
}

/// Offers sorted ascending together with the original index of each entry.
/// Ties keep their input order, so the anchor (last entry) is the last of
/// the tied maxima.
fn sorted_with_permutation(offers: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..offers.len()).collect();
    order.sort_by(|&a, &b| offers[a].total_cmp(&offers[b]));
    (order.iter().map(|&i| offers[i]).collect(), order)
}

fn follower_probability(s_i: f64, s_top: f64, f_top: f64, responders: usize) -> f64 {
    if s_i <= 0.0 {
        return 0.0;
    }
    // y >= 1 holds since s_top >= s_i and f_top >= 1
    f_inverse(s_top / s_i * f_top, responders).unwrap_or(0.0)
}

/// Sum of the probabilities implied by anchoring the highest offer at
/// `p_top`. `sorted` must be ascending with a positive last entry.
pub fn h(p_top: f64, sorted: &[f64], responders: usize) -> Result<f64> {
    let (&s_top, rest) = sorted
        .split_last()
        .ok_or(Error::OfferCount { expected: 1, found: 0 })?;
    if s_top <= 0.0 {
        return Err(Error::DegenerateOffers);
    }
    if sorted.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidArgument("h needs ascending offers".into()));
    }
    if !(0.0..=1.0).contains(&p_top) {
        return Err(Error::InvalidArgument(format!("p_K = {p_top} not in [0, 1]")));
    }
    let f_top = f(p_top, responders);
    Ok(p_top
        + rest
            .iter()
            .map(|&s| follower_probability(s, s_top, f_top, responders))
            .sum::<f64>())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssSolution {
    /// Probabilities in the caller's proposer order.
    pub strategy: SymmetricStrategy,
    /// Index of the anchor proposer (last of the highest offers).
    pub anchor: usize,
    /// Probability placed on the anchor.
    pub p_anchor: f64,
    /// `p_i > 0`.
    pub active: Vec<bool>,
    /// `|h(p_K) - 1|` at the root.
    pub residual: f64,
}

impl EssSolution {
    pub fn all_active(&self) -> bool {
        self.active.iter().all(|&a| a)
    }

    /// Wraps an arbitrary strategy so it can be checked like a solved one.
    /// `residual` is the equalization residual of the candidate.
    pub fn candidate(offers: &[f64], responders: usize, strategy: SymmetricStrategy) -> Result<Self> {
        let offers = OfferVector::new(offers.to_vec())?;
        if strategy.len() != offers.len() {
            return Err(Error::OfferCount { expected: strategy.len(), found: offers.len() });
        }
        let top = offers.max();
        let anchor = (0..offers.len()).rev().find(|&i| offers[i] == top).unwrap_or(0);
        let active: Vec<bool> = strategy.probs().iter().map(|&p| p > 0.0).collect();
        let mut sol = EssSolution {
            p_anchor: strategy[anchor],
            strategy,
            anchor,
            active,
            residual: 0.0,
        };
        sol.residual = equalization_residuals(offers.as_slice(), responders, &sol).0;
        Ok(sol)
    }
}

/// Solves `h(p_K) = 1` by bisection and rebuilds the full strategy.
pub fn solve_ess(offers: &[f64], responders: usize) -> Result<EssSolution> {
    let offers = OfferVector::new(offers.to_vec())?;
    if responders < 2 || offers.len() < 2 {
        return Err(Error::TooFewPlayers {
            proposers: offers.len(),
            responders,
        });
    }
    if offers.max() <= 0.0 {
        return Err(Error::DegenerateOffers);
    }
    let (sorted, order) = sorted_with_permutation(offers.as_slice());
    let k = sorted.len();
    let s_top = sorted[k - 1];

    let h_at = |p: f64| h(p, &sorted, responders).expect("validated offers");
    let mut p_top = if h_at(1.0) <= 1.0 + RESIDUAL_TOL {
        1.0
    } else {
        bisect(|p| h_at(p) - 1.0, 0.0, 1.0, 0.0)
    };
    let residual = (h_at(p_top) - 1.0).abs();

    let f_top = f(p_top, responders);
    let mut probs_sorted: Vec<f64> = sorted[..k - 1]
        .iter()
        .map(|&s| follower_probability(s, s_top, f_top, responders))
        .collect();
    let followers: f64 = probs_sorted.iter().sum();
    // inverse-tolerance drift lands on the anchor
    p_top = (1.0 - followers).clamp(0.0, 1.0);
    probs_sorted.push(p_top);

    let mut probs = vec![0.0; k];
    for (pos, &orig) in order.iter().enumerate() {
        probs[orig] = probs_sorted[pos];
    }
    let active = probs.iter().map(|&p| p > 0.0).collect();
    Ok(EssSolution {
        strategy: SymmetricStrategy::new(probs)?,
        anchor: order[k - 1],
        p_anchor: p_top,
        active,
        residual,
    })
}

/// Equalization residual `max_i |s_i f(p_i) - s_K f(p_K)|` over active
/// proposers, and the worst violation of `s_i f(0) <= s_K f(p_K)` over
/// inactive ones.
pub fn equalization_residuals(offers: &[f64], responders: usize, sol: &EssSolution) -> (f64, f64) {
    let level = offers[sol.anchor] * f(sol.p_anchor, responders);
    let mut active_err: f64 = 0.0;
    let mut inactive_excess = f64::NEG_INFINITY;
    for (i, &s) in offers.iter().enumerate() {
        let p = sol.strategy[i];
        if sol.active[i] {
            active_err = active_err.max((s * f(p, responders) - level).abs());
        } else {
            inactive_excess = inactive_excess.max(s * responders as f64 - level);
        }
    }
    (active_err, inactive_excess)
}

/// Auxiliary functions used by the proposer analysis.
///
/// `f_slope(x) = (1 - (1-x)^L - L x (1-x)^(L-1)) / x^2`, computed as
/// `sum_{n=1}^{L-1} n (1-x)^(n-1)`; equals `L(L-1)/2` at 0 and 1 at 1.
///
/// `ratio(x) = L x^2 (1-x)^(L-1) / (1 - (1-x)^L - L x (1-x)^(L-1))`,
/// i.e. `L (1-x)^(L-1) / f_slope(x)`; equals `2/(L-1)` at 0 and 0 at 1.
pub fn slope_and_ratio(x: f64, responders: usize) -> (f64, f64) {
    let l3 = f_slope(x, responders);
    let l4 = responders as f64 * (1.0 - x).powi(responders as i32 - 1) / l3;
    (l3, l4)
}

pub fn f_slope(x: f64, responders: usize) -> f64 {
    let y = 1.0 - x;
    // Horner on sum_{n=1}^{L-1} n y^(n-1)
    (1..responders).rev().fold(0.0, |acc, n| acc * y + n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EssVerification {
    /// Deviations examined (excluding the strategy itself).
    pub deviations: usize,
    /// Max `|Pi(A; A^(L-1)) - Pi(Y; A^(L-1))|` over deviations supported
    /// on the active proposers.
    pub max_j0_equality_error: f64,
    /// Min `Pi(A; A^(L-1)) - Pi(Y; A^(L-1))` over deviations that put mass
    /// on inactive proposers (`None` if there were none).
    pub min_j0_strict_gap: Option<f64>,
    /// Min `Pi(A; A^(L-2), Y) - Pi(Y; A^(L-2), Y)` over deviations supported
    /// on the active proposers.
    pub min_j1_gap: Option<f64>,
    pub violations: Vec<String>,
}

impl EssVerification {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Tolerance on the `j = 0` payoff equality.
pub const J0_EQUALITY_TOL: f64 = 1e-10;
/// Deviations closer than this (max norm) to the ESS count as the ESS.
pub const SAME_STRATEGY_TOL: f64 = 1e-9;
/// Mass above which a deviation counts as visiting an inactive proposer.
const SUPPORT_TOL: f64 = 1e-12;

/// All points of the simplex lattice with `points_per_edge` points along
/// each edge.
pub fn simplex_grid(k: usize, points_per_edge: usize) -> Vec<Vec<f64>> {
    fn rec(k: usize, left: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if cur.len() == k - 1 {
            cur.push(left);
            out.push(cur.iter().map(|&c| c as f64 / n as f64).collect());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c);
            rec(k, left - c, n, cur, out);
            cur.pop();
        }
    }
    let n = points_per_edge.saturating_sub(1).max(1);
    let mut out = Vec::new();
    rec(k, n, n, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Payoff comparison of the `j = 0` and `j = 1` invasion conditions for
/// `Y` against `A`.
pub fn invasion_gaps(offers: &[f64], responders: usize, a: &[f64], y: &[f64]) -> (f64, f64) {
    let others_a: Vec<&[f64]> = vec![a; responders - 1];
    let j0 = responder_payoff_against(offers, a, &others_a)
        - responder_payoff_against(offers, y, &others_a);
    let mut others_mixed: Vec<&[f64]> = vec![a; responders - 2];
    others_mixed.push(y);
    let j1 = responder_payoff_against(offers, a, &others_mixed)
        - responder_payoff_against(offers, y, &others_mixed);
    (j0, j1)
}

/// Checks the level-1 ESS conditions of `solution` against every lattice
/// deviation plus small perturbations of the solution itself.
pub fn verify_ess_level1(
    offers: &[f64],
    responders: usize,
    solution: &EssSolution,
    deviation_grid: usize,
) -> Result<EssVerification> {
    let k = offers.len();
    if deviation_grid < 2 {
        return Err(Error::InvalidArgument("deviation grid needs at least 2 points".into()));
    }
    if solution.strategy.len() != k || responders < 2 {
        return Err(Error::InvalidArgument("solution does not match the game".into()));
    }
    let a = solution.strategy.probs();

    let mut deviations = simplex_grid(k, deviation_grid);
    for eps in [1e-3, 1e-2] {
        for i in 0..k {
            for j in 0..k {
                if i != j && a[j] >= eps {
                    let mut y = a.to_vec();
                    y[i] += eps;
                    y[j] -= eps;
                    deviations.push(y);
                }
            }
        }
    }

    let mut report = EssVerification {
        deviations: 0,
        max_j0_equality_error: 0.0,
        min_j0_strict_gap: None,
        min_j1_gap: None,
        violations: Vec::new(),
    };
    for y in &deviations {
        let dist = y.iter().zip(a).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max);
        if dist < SAME_STRATEGY_TOL {
            continue;
        }
        report.deviations += 1;
        let off_support = (0..k).any(|i| !solution.active[i] && y[i] > SUPPORT_TOL);
        let (j0, j1) = invasion_gaps(offers, responders, a, y);
        if off_support {
            report.min_j0_strict_gap = Some(report.min_j0_strict_gap.map_or(j0, |m| m.min(j0)));
            if j0 <= 0.0 {
                report.violations.push(format!("j=0 strict gap {j0:e} <= 0 at Y={y:?}"));
            }
        } else {
            report.max_j0_equality_error = report.max_j0_equality_error.max(j0.abs());
            report.min_j1_gap = Some(report.min_j1_gap.map_or(j1, |m| m.min(j1)));
            if j0.abs() > J0_EQUALITY_TOL {
                report.violations.push(format!("j=0 equality error {:e} at Y={y:?}", j0.abs()));
            }
            if j1 <= 0.0 {
                report.violations.push(format!("j=1 gap {j1:e} <= 0 at Y={y:?}"));
            }
        }
    }
    Ok(report)
}

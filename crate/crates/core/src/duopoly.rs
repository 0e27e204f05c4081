//! Closed-form analysis of the two-proposer, two-responder game.
//!
//! Offers are written `s1 <= s2` (or `s = s1`, `delta = s2 - s1`). `p` and
//! `q` are the probabilities that the first and second responder visit the
//! lower offer.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::SymmetricStrategy;

/// Slope of the first responder's payoff in `p`, given that the second
/// responder visits proposer 1 with probability `q`.
pub fn responder_derivative(s1: f64, s2: f64, q: f64) -> f64 {
    s1 - (s2 + q * s1 + q * s2) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    /// Both offers zero: every strategy is an equilibrium.
    Zero,
    /// `s2 < 2 s1`, symmetric mixed equilibrium.
    ///
    /// Scenario A and B share their region: the symmetric mixed strategy
    /// and the coordinated pure pair coexist, so the classifier reports
    /// them under one tag.
    MixedOrCoordinated,
    /// `s2 = 2 s1 != 0`: a continuum with the low offer never visited by
    /// one responder.
    Boundary,
    /// `s2 > 2 s1`: the low offer is discarded by both responders.
    Dominated,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioClass {
    pub tag: Scenario,
    /// Indifference threshold `(2 s1 - s2) / (s1 + s2)`, set only for the
    /// mixed/coordinated region.
    pub q_crit: Option<f64>,
}

fn sorted_pair(a: f64, b: f64) -> (f64, f64, bool) {
    if a <= b {
        (a, b, false)
    } else {
        (b, a, true)
    }
}

fn check_offer(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::OutOfRegion(format!("offer {s} not in [0, 1]")));
    }
    Ok(())
}

/// Scenario of a pair of offers. The pair is sorted first; the boundary
/// case uses exact float equality `s2 == 2 s1`.
pub fn classify(a: f64, b: f64) -> ScenarioClass {
    let (s1, s2, _) = sorted_pair(a, b);
    if s1 == 0.0 && s2 == 0.0 {
        ScenarioClass { tag: Scenario::Zero, q_crit: None }
    } else if s2 > 2.0 * s1 {
        ScenarioClass { tag: Scenario::Dominated, q_crit: None }
    } else if s2 == 2.0 * s1 {
        ScenarioClass { tag: Scenario::Boundary, q_crit: None }
    } else {
        ScenarioClass {
            tag: Scenario::MixedOrCoordinated,
            q_crit: Some((2.0 * s1 - s2) / (s1 + s2)),
        }
    }
}

/// [`classify`] with offers within `tol` of `s2 = 2 s1` snapped onto the
/// boundary.
pub fn classify_snapped(a: f64, b: f64, tol: f64) -> ScenarioClass {
    let (s1, s2, _) = sorted_pair(a, b);
    if (s2 - 2.0 * s1).abs() <= tol && s2 > 0.0 {
        ScenarioClass { tag: Scenario::Boundary, q_crit: None }
    } else {
        classify(a, b)
    }
}

/// Best-response set of the first responder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BestResponse {
    Point(f64),
    /// Indifferent: all of `[0, 1]`.
    Interval,
}

/// Best response in `p` (probability of visiting the proposer offering
/// `s1`) to the other responder's `q`. Works for either ordering of the
/// offers: the slope is linear and decreasing in `q` and vanishes at
/// `q = (2 s1 - s2) / (s1 + s2)`.
pub fn best_response(s1: f64, s2: f64, q: f64) -> BestResponse {
    if s1 == 0.0 && s2 == 0.0 {
        return BestResponse::Interval;
    }
    let q_crit = (2.0 * s1 - s2) / (s1 + s2);
    if q == q_crit {
        BestResponse::Interval
    } else if q < q_crit {
        BestResponse::Point(1.0)
    } else {
        BestResponse::Point(0.0)
    }
}

fn check_table_region(s: f64, delta: f64) -> Result<()> {
    if !(delta >= 0.0 && delta < s && s + delta > 0.0 && s + delta <= 1.0) {
        return Err(Error::OutOfRegion(format!(
            "need 0 <= delta < s and 0 < s + delta <= 1 (s={s}, delta={delta})"
        )));
    }
    Ok(())
}

/// Responder payoffs between the symmetric mixed strategy and the two pure
/// strategies, without region checks. Row/column order: mixed, always
/// high, always low.
pub(crate) fn table_entries(s: f64, delta: f64) -> [[f64; 3]; 3] {
    let den = 2.0 * (2.0 * s + delta);
    let base = 3.0 * s * (s + delta) / den;
    [
        [
            base,
            (3.0 * s * (s + delta) + 2.0 * delta * (delta - s)) / den,
            (3.0 * s * (s + delta) + 2.0 * delta * (2.0 * delta + s)) / den,
        ],
        [base, 0.5 * (s + delta), s + delta],
        [base, s, 0.5 * s],
    ]
}

/// Payoff matrix for offers `(s, s + delta)`. Rows are the first
/// responder's strategy (mixed, `p = 0`, `p = 1`); columns the second's.
pub fn payoff_matrix(s: f64, delta: f64) -> Result<[[f64; 3]; 3]> {
    check_table_region(s, delta)?;
    Ok(table_entries(s, delta))
}

/// Mixed ESS `(p_A, 1 - p_A)`, `p_A = (2 s1 - s2) / (s1 + s2)`, returned in
/// the input order of the two offers.
pub fn ess_strategy(a: f64, b: f64) -> Result<SymmetricStrategy> {
    check_offer(a)?;
    check_offer(b)?;
    let (s1, s2, swapped) = sorted_pair(a, b);
    if !(s2 > 0.0 && s2 <= 2.0 * s1) {
        return Err(Error::OutOfRegion(format!(
            "mixed ESS needs 0 < s2 <= 2 s1 (offers {a}, {b})"
        )));
    }
    let p_low = ((2.0 * s1 - s2) / (s1 + s2)).max(0.0);
    let probs = if swapped {
        vec![1.0 - p_low, p_low]
    } else {
        vec![p_low, 1.0 - p_low]
    };
    SymmetricStrategy::new(probs)
}

/// `Pi(A, Y) - Pi(Y, Y)` for `Y = (p, 1 - p)` against the mixed ESS `A`.
/// Nonnegative, zero only at `p = (s - delta) / (2 s + delta)`.
pub fn ess_payoff_gap(s: f64, delta: f64, p: f64) -> f64 {
    let t = delta - s + delta * p + 2.0 * p * s;
    t * t / (2.0 * (2.0 * s + delta))
}

/// Best reply offer of a proposer against the other's offer, when
/// responders play the mixed ESS.
pub fn proposer_best_response(s_other: f64) -> Result<f64> {
    if !(s_other > 0.0 && s_other <= 1.0) {
        return Err(Error::OutOfRegion(format!(
            "proposer best response needs s in (0, 1], got {s_other}"
        )));
    }
    Ok((s_other * s_other + 4.0 * s_other) / (5.0 * s_other + 2.0))
}

/// Iterates the best-reply map from `start`. Returns the final offer and
/// steps taken; stops when successive iterates differ by less than `tol`.
pub fn iterate_best_response(start: f64, tol: f64, max_steps: usize) -> Result<(f64, usize)> {
    let mut s = start;
    for step in 1..=max_steps {
        let next = proposer_best_response(s)?;
        if (next - s).abs() < tol {
            return Ok((next, step));
        }
        s = next;
    }
    Ok((s, max_steps))
}

/// Proposer payoffs under the mixed ESS. Valid when each offer is
/// positive and at most twice the other.
pub fn duopoly_proposer_payoffs(s1: f64, s2: f64) -> Result<(f64, f64)> {
    check_offer(s1)?;
    check_offer(s2)?;
    if !(s1 > 0.0 && s2 > 0.0 && s2 <= 2.0 * s1 && s1 <= 2.0 * s2) {
        return Err(Error::OutOfRegion(format!(
            "proposer payoffs need both offers within a factor 2 ({s1}, {s2})"
        )));
    }
    let den = (s1 + s2) * (s1 + s2);
    Ok((
        3.0 * s2 * (2.0 * s1 - s2) * (1.0 - s1) / den,
        3.0 * s1 * (2.0 * s2 - s1) * (1.0 - s2) / den,
    ))
}

/// Responder equilibria of one subgame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuopolyEquilibria {
    pub scenario: ScenarioClass,
    /// Symmetric mixed ESS, in input order (mixed/coordinated region only).
    pub symmetric: Option<SymmetricStrategy>,
    /// Coordinated pure equilibrium `(p, q)`: one responder per proposer.
    pub coordinated: Option<(f64, f64)>,
    /// Strategy every responder is forced into, or the ESS limit point on
    /// the boundary: all mass on the higher offer. In input order.
    pub forced: Option<SymmetricStrategy>,
    /// Whether the inputs arrived in descending order.
    pub swapped: bool,
}

pub fn analyze(a: f64, b: f64) -> Result<DuopolyEquilibria> {
    check_offer(a)?;
    check_offer(b)?;
    let (_, _, swapped) = sorted_pair(a, b);
    let scenario = classify(a, b);
    let high_only = || {
        let v = if swapped { vec![1.0, 0.0] } else { vec![0.0, 1.0] };
        SymmetricStrategy::new(v)
    };
    let eq = match scenario.tag {
        Scenario::Zero => DuopolyEquilibria {
            scenario,
            symmetric: None,
            coordinated: None,
            forced: None,
            swapped,
        },
        Scenario::MixedOrCoordinated => DuopolyEquilibria {
            scenario,
            symmetric: Some(ess_strategy(a, b)?),
            coordinated: Some((0.0, 1.0)),
            forced: None,
            swapped,
        },
        Scenario::Boundary | Scenario::Dominated => DuopolyEquilibria {
            scenario,
            symmetric: None,
            coordinated: None,
            forced: Some(high_only()?),
            swapped,
        },
    };
    Ok(eq)
}

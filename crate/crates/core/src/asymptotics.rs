//! Limits of the symmetric equilibrium as both sides grow with a fixed
//! ratio `c = K / L`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::GameConfig;
use crate::proposer::spne_offer;
use crate::roots::bisect;

fn check_ratio(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("ratio must be positive, got {c}")))
    }
}

/// `1 / (c (e^(1/c) - 1))`.
pub fn limit_offer(c: f64) -> Result<f64> {
    check_ratio(c)?;
    Ok(1.0 / (c * (1.0 / c).exp_m1()))
}

/// Limit payoffs `(proposer, responder)`.
pub fn limit_payoffs(c: f64) -> Result<(f64, f64)> {
    check_ratio(c)?;
    let decay = (-1.0 / c).exp();
    Ok((1.0 - (c + 1.0) * decay / c, decay))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioRegime {
    pub c: f64,
    pub limit_offer: f64,
    pub limit_proposer_payoff: f64,
    pub limit_responder_payoff: f64,
}

impl RatioRegime {
    pub fn new(c: f64) -> Result<Self> {
        let limit_offer = limit_offer(c)?;
        let (p, r) = limit_payoffs(c)?;
        Ok(RatioRegime { c, limit_offer, limit_proposer_payoff: p, limit_responder_payoff: r })
    }

    /// Share of the total value lost because some proposers go unvisited.
    pub fn inefficiency(&self) -> f64 {
        1.0 - self.limit_proposer_payoff - self.limit_responder_payoff / self.c
    }
}

pub const EQUITY_TOL: f64 = 1e-10;

/// Ratio at which proposers and responders earn the same in the limit.
pub fn equity_ratio() -> f64 {
    let gap = |c: f64| {
        let (p, r) = limit_payoffs(c).expect("bracket is positive");
        p - r
    };
    bisect(gap, 0.1, 10.0, EQUITY_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub responders: usize,
    /// `round(c L)`, the proposer count actually used.
    pub proposers: usize,
    pub offer: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Finite-size gap between the symmetric offer and its limit.
pub fn convergence_check(c: f64, responders: &[usize]) -> Result<Vec<ConvergenceRow>> {
    let limit = limit_offer(c)?;
    responders
        .iter()
        .map(|&l| {
            let k = (c * l as f64).round();
            if k < 2.0 {
                return Err(Error::InvalidArgument(format!(
                    "c = {c} with L = {l} rounds to K = {k}, need K >= 2"
                )));
            }
            let proposers = k as usize;
            let offer = spne_offer(&GameConfig::for_solver(proposers, l)?)?;
            Ok(ConvergenceRow { responders: l, proposers, offer, limit, gap: (offer - limit).abs() })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_ratio() {
        let e = std::f64::consts::E;
        assert!((limit_offer(1.0).unwrap() - 1.0 / (e - 1.0)).abs() < 1e-15);
        let (p, r) = limit_payoffs(1.0).unwrap();
        assert!((p - (1.0 - 2.0 / e)).abs() < 1e-15);
        assert!((r - 1.0 / e).abs() < 1e-15);
    }

    #[test]
    fn strong_competition() {
        assert!(limit_offer(1e6).unwrap() >= 0.9999995);
        assert!(limit_offer(1e6).unwrap() <= 1.0);
    }

    #[test]
    fn equity() {
        let c = equity_ratio();
        assert!((c - 0.872).abs() < 1e-3);
        let (p, r) = limit_payoffs(c).unwrap();
        assert!((p - r).abs() <= 1e-10);
        assert!((p - 0.318).abs() < 1e-3);
        assert!((limit_offer(c).unwrap() - 0.534).abs() < 1e-3);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(limit_offer(0.0).is_err());
        assert!(limit_payoffs(-1.0).is_err());
        assert!(convergence_check(0.5, &[2]).is_err());
    }

    #[test]
    fn convergence_rows_use_rounded_k() {
        let rows = convergence_check(1.5, &[3, 10]).unwrap();
        assert_eq!(rows[0].proposers, 5);
        assert_eq!(rows[1].proposers, 15);
    }
}

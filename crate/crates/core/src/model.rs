//! Shared domain types: game size, offers, responder strategies and payoffs.
//!
//! Everything here is an immutable value checked at construction, so the
//! solver modules can assume well-formed input.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on probability-vector sums.
pub const PROB_SUM_TOL: f64 = 1e-12;

/// Numbers of proposers (`K`) and responders (`L`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameConfig {
    proposers: usize,
    responders: usize,
}

impl GameConfig {
    pub fn new(proposers: usize, responders: usize) -> Result<Self> {
        if proposers == 0 || responders == 0 {
            return Err(Error::EmptyGame { proposers, responders });
        }
        Ok(GameConfig { proposers, responders })
    }

    /// Like [`GameConfig::new`] but with the `K, L >= 2` bound the
    /// equilibrium solvers need.
    pub fn for_solver(proposers: usize, responders: usize) -> Result<Self> {
        let config = Self::new(proposers, responders)?;
        config.require_solver_range()?;
        Ok(config)
    }

    pub fn proposers(&self) -> usize {
        self.proposers
    }

    pub fn responders(&self) -> usize {
        self.responders
    }

    pub fn require_solver_range(&self) -> Result<()> {
        if self.proposers < 2 || self.responders < 2 {
            return Err(Error::TooFewPlayers {
                proposers: self.proposers,
                responders: self.responders,
            });
        }
        Ok(())
    }
}

/// Offers `s_1..s_K`, each the share of the unit reward handed to the
/// responder who ends up paired with that proposer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OfferVector(Vec<f64>);

impl OfferVector {
    /// Builds an offer vector, checking only the `[0, 1]` bound.
    pub fn new(offers: Vec<f64>) -> Result<Self> {
        for (index, &value) in offers.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::OfferOutOfRange { index, value });
            }
        }
        if offers.is_empty() {
            return Err(Error::OfferCount { expected: 1, found: 0 });
        }
        Ok(OfferVector(offers))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for OfferVector {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Checks an offer vector against a game size. Returns the offers unchanged.
pub fn validate_offers(config: &GameConfig, offers: &[f64]) -> Result<OfferVector> {
    if offers.len() != config.proposers() {
        return Err(Error::OfferCount {
            expected: config.proposers(),
            found: offers.len(),
        });
    }
    OfferVector::new(offers.to_vec())
}

fn check_probability_row(row_index: usize, row: &[f64]) -> Result<Vec<f64>> {
    for (index, &value) in row.iter().enumerate() {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::BadProbability { row: row_index, index, value });
        }
    }
    let sum: f64 = row.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::RowSum { row: row_index, sum });
    }
    Ok(row.iter().map(|p| p / sum).collect())
}

/// One mixed strategy per responder: `rows[l][i]` is the probability that
/// responder `l` picks proposer `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrategyProfile {
    rows: Vec<Vec<f64>>,
}

impl StrategyProfile {
    /// Validates `rows` for the given game. Rows whose sum is within
    /// [`PROB_SUM_TOL`] of one are renormalized; anything else is rejected.
    pub fn new(config: &GameConfig, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != config.responders() {
            return Err(Error::RowCount {
                expected: config.responders(),
                found: rows.len(),
            });
        }
        let rows = rows
            .iter()
            .enumerate()
            .map(|(l, row)| {
                if row.len() != config.proposers() {
                    return Err(Error::RowLength {
                        row: l,
                        expected: config.proposers(),
                        found: row.len(),
                    });
                }
                check_probability_row(l, row)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(StrategyProfile { rows })
    }

    /// Every responder plays `strategy`.
    pub fn symmetric(config: &GameConfig, strategy: &SymmetricStrategy) -> Result<Self> {
        Self::new(config, vec![strategy.probs().to_vec(); config.responders()])
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, l: usize) -> &[f64] {
        &self.rows[l]
    }

    pub fn responders(&self) -> usize {
        self.rows.len()
    }

    pub fn proposers(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }
}

/// A strategy shared by all responders: `probs[i]` is the probability of
/// picking proposer `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SymmetricStrategy {
    probs: Vec<f64>,
}

impl SymmetricStrategy {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::RowLength { row: 0, expected: 1, found: 0 });
        }
        let probs = check_probability_row(0, &probs)?;
        Ok(SymmetricStrategy { probs })
    }

    pub fn uniform(k: usize) -> Self {
        SymmetricStrategy { probs: vec![1.0 / k as f64; k] }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }
}

impl std::ops::Index<usize> for SymmetricStrategy {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.probs[i]
    }
}

/// Expected payoff of every player.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PayoffReport {
    pub proposer_payoffs: Vec<f64>,
    pub responder_payoffs: Vec<f64>,
}

impl PayoffReport {
    pub fn total(&self) -> f64 {
        self.proposer_payoffs.iter().sum::<f64>() + self.responder_payoffs.iter().sum::<f64>()
    }

    /// Largest componentwise difference to another report of the same shape.
    pub fn max_abs_diff(&self, other: &PayoffReport) -> f64 {
        let props = self.proposer_payoffs.iter().zip(&other.proposer_payoffs);
        let resps = self.responder_payoffs.iter().zip(&other.responder_payoffs);
        props.chain(resps).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

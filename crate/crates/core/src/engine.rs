//! Expected payoffs for arbitrary (heterogeneous) responder profiles.
//!
//! Three independent routes are provided: a closed expectation built on the
//! collision weights `W[l][i]`, a brute-force enumeration over every pure
//! choice combination, and a seeded Monte Carlo simulation of the one-shot
//! game. The closed-form results elsewhere in the crate are tested against
//! these.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{validate_offers, GameConfig, OfferVector, PayoffReport, StrategyProfile};

/// Upper bound on `K^L` for [`enumerate_payoffs`].
pub const ENUMERATION_LIMIT: f64 = 1e7;

const SIM_CHUNK: u64 = 1 << 14;

/// `W[l][i]`: expected fraction of offer `i` that responder `l` keeps when
/// it visits proposer `i`, averaged over the other responders' choices and
/// the uniform tie-break.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightMatrix {
    weights: Vec<Vec<f64>>,
}

impl WeightMatrix {
    pub fn get(&self, responder: usize, proposer: usize) -> f64 {
        self.weights[responder][proposer]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.weights
    }
}

/// `sum_c Pr[c of the others visit] / (c + 1)` where the visit count is
/// Poisson-binomial over `others`. Exact counting DP, quadratic in the
/// number of others.
pub fn sole_visitor_weight<I>(others: I) -> f64
where
    I: IntoIterator<Item = f64>,
{
    let mut dist = vec![1.0];
    for p in others {
        dist.push(0.0);
        for c in (1..dist.len()).rev() {
            dist[c] = dist[c] * (1.0 - p) + dist[c - 1] * p;
        }
        dist[0] *= 1.0 - p;
    }
    dist.iter()
        .enumerate()
        .map(|(c, pr)| pr / (c as f64 + 1.0))
        .sum()
}

fn check_profile(config: &GameConfig, profile: &StrategyProfile) -> Result<()> {
    if profile.responders() != config.responders() {
        return Err(Error::RowCount {
            expected: config.responders(),
            found: profile.responders(),
        });
    }
    if profile.proposers() != config.proposers() {
        return Err(Error::RowLength {
            row: 0,
            expected: config.proposers(),
            found: profile.proposers(),
        });
    }
    Ok(())
}

pub fn weight_matrix(config: &GameConfig, profile: &StrategyProfile) -> Result<WeightMatrix> {
    check_profile(config, profile)?;
    let (k, l) = (config.proposers(), config.responders());
    let weights = (0..l)
        .map(|me| {
            (0..k)
                .map(|i| {
                    let others = (0..l).filter(|&o| o != me).map(|o| profile.row(o)[i]);
                    sole_visitor_weight(others)
                })
                .collect()
        })
        .collect();
    Ok(WeightMatrix { weights })
}

/// Expected payoffs in closed form: responder `l` earns
/// `sum_i s_i W[l][i] p[l][i]`, proposer `i` earns `(1 - s_i)` times the
/// probability that anyone visits it.
pub fn exact_payoffs(
    config: &GameConfig,
    offers: &[f64],
    profile: &StrategyProfile,
) -> Result<PayoffReport> {
    let offers = validate_offers(config, offers)?;
    let w = weight_matrix(config, profile)?;
    let responder_payoffs = (0..config.responders())
        .map(|l| {
            (0..config.proposers())
                .map(|i| offers[i] * w.get(l, i) * profile.row(l)[i])
                .sum()
        })
        .collect();
    let proposer_payoffs = (0..config.proposers())
        .map(|i| (1.0 - offers[i]) * selection_probability(profile, i))
        .collect();
    Ok(PayoffReport { proposer_payoffs, responder_payoffs })
}

/// Probability that at least one responder visits proposer `i`.
pub fn selection_probability(profile: &StrategyProfile, i: usize) -> f64 {
    1.0 - profile.rows().iter().map(|row| 1.0 - row[i]).product::<f64>()
}

/// Payoff of a single responder playing `focal` while the remaining
/// responders play `others`. Used for invasion comparisons.
pub fn responder_payoff_against(offers: &[f64], focal: &[f64], others: &[&[f64]]) -> f64 {
    offers
        .iter()
        .zip(focal)
        .enumerate()
        .map(|(i, (s, p))| s * p * sole_visitor_weight(others.iter().map(|row| row[i])))
        .sum()
}

/// Exact expectation by enumerating all `K^L` pure choice combinations.
pub fn enumerate_payoffs(
    config: &GameConfig,
    offers: &[f64],
    profile: &StrategyProfile,
) -> Result<PayoffReport> {
    let offers = validate_offers(config, offers)?;
    check_profile(config, profile)?;
    let (k, l) = (config.proposers(), config.responders());
    let combinations = (k as f64).powi(l as i32);
    if combinations > ENUMERATION_LIMIT {
        return Err(Error::InstanceTooLarge {
            combinations,
            limit: ENUMERATION_LIMIT,
        });
    }

    let mut proposer = vec![0.0; k];
    let mut responder = vec![0.0; l];
    let mut choice = vec![0usize; l];
    let mut counts = vec![0usize; k];
    loop {
        let prob: f64 = choice
            .iter()
            .enumerate()
            .map(|(r, &c)| profile.row(r)[c])
            .product();
        if prob > 0.0 {
            counts.iter_mut().for_each(|c| *c = 0);
            for &c in &choice {
                counts[c] += 1;
            }
            for (r, &c) in choice.iter().enumerate() {
                responder[r] += prob * offers[c] / counts[c] as f64;
            }
            for i in 0..k {
                if counts[i] > 0 {
                    proposer[i] += prob * (1.0 - offers[i]);
                }
            }
        }
        // mixed-radix increment
        let mut pos = 0;
        loop {
            if pos == l {
                return Ok(PayoffReport {
                    proposer_payoffs: proposer,
                    responder_payoffs: responder,
                });
            }
            choice[pos] += 1;
            if choice[pos] < k {
                break;
            }
            choice[pos] = 0;
            pos += 1;
        }
    }
}

/// Realized pairing of one round.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionOutcome {
    /// Proposer visited by each responder.
    pub choice: Vec<usize>,
    /// Responder paired with each proposer, if anyone visited it.
    pub winners: Vec<Option<usize>>,
}

impl SelectionOutcome {
    /// Resolves collisions: `pick(n)` must return a uniform index in `0..n`
    /// and selects the winner among the `n` visitors of a proposer.
    pub fn resolve<F>(choice: Vec<usize>, proposers: usize, mut pick: F) -> Self
    where
        F: FnMut(usize) -> usize,
    {
        let mut visitors: Vec<Vec<usize>> = vec![Vec::new(); proposers];
        for (r, &c) in choice.iter().enumerate() {
            visitors[c].push(r);
        }
        let winners = visitors
            .iter()
            .map(|v| match v.len() {
                0 => None,
                1 => Some(v[0]),
                n => Some(v[pick(n)]),
            })
            .collect();
        SelectionOutcome { choice, winners }
    }

    /// Realized payoffs, proposers first then responders.
    pub fn payoffs(&self, offers: &[f64]) -> PayoffReport {
        let mut responder_payoffs = vec![0.0; self.choice.len()];
        let proposer_payoffs = self
            .winners
            .iter()
            .zip(offers)
            .map(|(w, s)| match *w {
                Some(r) => {
                    responder_payoffs[r] = *s;
                    1.0 - s
                }
                None => 0.0,
            })
            .collect();
        PayoffReport { proposer_payoffs, responder_payoffs }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationStats {
    pub rounds: u64,
    pub seed: u64,
    pub means: PayoffReport,
    pub std_errors: PayoffReport,
}

#[derive(Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
}

impl Moments {
    fn zero(n: usize) -> Self {
        Moments { sum: vec![0.0; n], sum_sq: vec![0.0; n] }
    }

    fn add(&mut self, x: impl Iterator<Item = f64>) {
        for (j, v) in x.enumerate() {
            self.sum[j] += v;
            self.sum_sq[j] += v * v;
        }
    }

    fn merge(mut self, other: &Moments) -> Self {
        for j in 0..self.sum.len() {
            self.sum[j] += other.sum[j];
            self.sum_sq[j] += other.sum_sq[j];
        }
        self
    }
}

fn sample_index(row: &[f64], u: f64) -> usize {
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in row.iter().enumerate() {
        if p > 0.0 {
            last_positive = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

/// Round `round` always draws from its own ChaCha stream keyed by `seed`,
/// so results do not depend on how rounds are split across threads.
fn play_round(
    key: &<ChaCha8Rng as SeedableRng>::Seed,
    round: u64,
    offers: &OfferVector,
    profile: &StrategyProfile,
) -> PayoffReport {
    let mut rng = ChaCha8Rng::from_seed(*key);
    rng.set_stream(round);
    let choice = profile
        .rows()
        .iter()
        .map(|row| sample_index(row, rng.random::<f64>()))
        .collect();
    SelectionOutcome::resolve(choice, offers.len(), |n| rng.random_range(0..n))
        .payoffs(offers.as_slice())
}

/// Plays the one-shot game `rounds` times. Identical inputs and seed give
/// bit-identical statistics regardless of the rayon thread count.
pub fn simulate(
    config: &GameConfig,
    offers: &[f64],
    profile: &StrategyProfile,
    rounds: u64,
    seed: u64,
) -> Result<SimulationStats> {
    let offers = validate_offers(config, offers)?;
    check_profile(config, profile)?;
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    let (k, l) = (config.proposers(), config.responders());
    let key = ChaCha8Rng::seed_from_u64(seed).get_seed();

    let chunks = rounds.div_ceil(SIM_CHUNK);
    let partials: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::zero(k + l);
            let end = ((c + 1) * SIM_CHUNK).min(rounds);
            for round in c * SIM_CHUNK..end {
                let r = play_round(&key, round, &offers, profile);
                m.add(r.proposer_payoffs.into_iter().chain(r.responder_payoffs));
            }
            m
        })
        .collect();
    let total = partials
        .iter()
        .fold(Moments::zero(k + l), |acc, m| acc.merge(m));

    let n = rounds as f64;
    let mean: Vec<f64> = total.sum.iter().map(|s| s / n).collect();
    let se: Vec<f64> = total
        .sum
        .iter()
        .zip(&total.sum_sq)
        .map(|(s, sq)| {
            if rounds < 2 {
                return 0.0;
            }
            let var = ((sq - s * s / n) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        })
        .collect();
    let split = |v: Vec<f64>| PayoffReport {
        proposer_payoffs: v[..k].to_vec(),
        responder_payoffs: v[k..].to_vec(),
    };
    Ok(SimulationStats {
        rounds,
        seed,
        means: split(mean),
        std_errors: split(se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(k: usize, l: usize) -> GameConfig {
        GameConfig::new(k, l).unwrap()
    }

    fn profile(k: usize, rows: Vec<Vec<f64>>) -> StrategyProfile {
        StrategyProfile::new(&cfg(k, rows.len()), rows).unwrap()
    }

    #[test]
    fn two_responder_weight_matches_duopoly_factor() {
        for q in [0.0, 0.2, 0.7, 1.0] {
            let p = profile(2, vec![vec![0.5, 0.5], vec![q, 1.0 - q]]);
            let w = weight_matrix(&cfg(2, 2), &p).unwrap();
            assert!((w.get(0, 0) - (1.0 - q + q / 2.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn sole_visitor_weight_is_one() {
        let p = profile(2, vec![vec![0.3, 0.7], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let w = weight_matrix(&cfg(2, 3), &p).unwrap();
        assert_eq!(w.get(0, 0), 1.0);
    }

    #[test]
    fn three_responders_half_half() {
        // four equally likely outcomes for the two others: 0, 1, 1, 2 visitors
        let oracle: f64 = 0.25 * 1.0 + 0.5 * 0.5 + 0.25 / 3.0;
        assert!((oracle - 7.0 / 12.0).abs() < 1e-15);
        let p = profile(2, vec![vec![0.5, 0.5]; 3]);
        let w = weight_matrix(&cfg(2, 3), &p).unwrap();
        assert!((w.get(0, 0) - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_two_by_two_pays_three_eighths() {
        let p = profile(2, vec![vec![0.5, 0.5]; 2]);
        let r = exact_payoffs(&cfg(2, 2), &[0.5, 0.5], &p).unwrap();
        for v in r.proposer_payoffs.iter().chain(&r.responder_payoffs) {
            assert!((v - 0.375).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_matching_pays_offers() {
        let p = profile(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = exact_payoffs(&cfg(2, 2), &[0.3, 0.6], &p).unwrap();
        assert_eq!(r.responder_payoffs, vec![0.3, 0.6]);
        assert_eq!(r.proposer_payoffs, vec![0.7, 0.4]);
    }

    #[test]
    fn collision_outcome_enumerated() {
        let p = profile(2, vec![vec![1.0, 0.0], vec![1.0, 0.0]]);
        let r = enumerate_payoffs(&cfg(2, 2), &[0.4, 0.6], &p).unwrap();
        assert!((r.responder_payoffs[0] - 0.2).abs() < 1e-15);
        assert!((r.responder_payoffs[1] - 0.2).abs() < 1e-15);
        assert!((r.proposer_payoffs[0] - 0.6).abs() < 1e-15);
        assert_eq!(r.proposer_payoffs[1], 0.0);
    }

    #[test]
    fn three_responder_symmetric_matches_enumeration() {
        let p = profile(2, vec![vec![0.5, 0.5]; 3]);
        let exact = exact_payoffs(&cfg(2, 3), &[0.3, 0.3], &p).unwrap();
        let brute = enumerate_payoffs(&cfg(2, 3), &[0.3, 0.3], &p).unwrap();
        assert!(exact.max_abs_diff(&brute) < 1e-12);
        let r0 = exact.responder_payoffs[0];
        assert!(exact.responder_payoffs.iter().all(|v| (v - r0).abs() < 1e-15));
    }

    #[test]
    fn enumeration_guard() {
        let c = cfg(10, 8);
        let p = StrategyProfile::new(&c, vec![vec![0.1; 10]; 8]).unwrap();
        assert!(matches!(
            enumerate_payoffs(&c, &[0.5; 10], &p),
            Err(Error::InstanceTooLarge { .. })
        ));
    }

    #[test]
    fn resolve_marks_winner_only_when_visited() {
        let out = SelectionOutcome::resolve(vec![2, 2, 0], 4, |_| 1);
        assert_eq!(out.winners, vec![Some(2), None, Some(1), None]);
        let pay = out.payoffs(&[0.1, 0.2, 0.3, 0.4]);
        assert_eq!(pay.responder_payoffs, vec![0.0, 0.3, 0.1]);
        assert_eq!(pay.proposer_payoffs, vec![0.9, 0.0, 0.7, 0.0]);
    }

    #[test]
    fn deterministic_profile_single_round() {
        let p = profile(2, vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        let stats = simulate(&cfg(2, 2), &[0.3, 0.6], &p, 1, 11).unwrap();
        assert_eq!(stats.means.responder_payoffs, vec![0.3, 0.6]);
        assert_eq!(stats.means.proposer_payoffs, vec![0.7, 0.4]);
        assert!(stats.std_errors.total() == 0.0);
    }

    #[test]
    fn zero_rounds_rejected() {
        let p = profile(2, vec![vec![0.5, 0.5]; 2]);
        assert!(simulate(&cfg(2, 2), &[0.5, 0.5], &p, 0, 1).is_err());
    }

    #[test]
    fn same_seed_same_stats() {
        let p = profile(3, vec![vec![0.2, 0.3, 0.5]; 3]);
        let a = simulate(&cfg(3, 3), &[0.1, 0.5, 0.9], &p, 50_000, 99).unwrap();
        let b = simulate(&cfg(3, 3), &[0.1, 0.5, 0.9], &p, 50_000, 99).unwrap();
        assert_eq!(a, b);
        let c = simulate(&cfg(3, 3), &[0.1, 0.5, 0.9], &p, 50_000, 100).unwrap();
        assert_ne!(a, c);
    }
}

//! Proposer side: subgame-perfect offers when responders play their ESS.
//!
//! With every proposer visited, the ESS makes `C = s_i f(p_i)` common to
//! all proposers, and proposer `i` earns `1 - (1 - p_i)^L - C p_i`.
//! Differentiating through the ESS gives
//! `dPi_i/ds_i = g_i C / (s_i^2 H) * d_i` with `g_i = 1 / f'(p_i)`,
//! `H = sum_j g_j / s_j` and the stationarity residual
//! `d_i = (g_i / s_i - H)(L (1 - p_i)^(L-1) - C) - p_i`.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ess::{f, f_slope, slope_and_ratio, solve_ess, EssSolution};
use crate::model::GameConfig;
use crate::roots::bisect;

/// Symmetric subgame-perfect offer
/// `s* = L (K-1)^L / (K^(L+1) - (K-1)^(L-1) ((K-1) K + L))`.
///
/// Evaluated with `(K-1)^(L-1)` divided out, which keeps every
/// intermediate bounded even for a few hundred players per side.
pub fn spne_offer(config: &GameConfig) -> Result<f64> {
    config.require_solver_range()?;
    let k = config.proposers() as f64;
    let l = config.responders() as f64;
    let growth = ((l - 1.0) * (1.0 / (k - 1.0)).ln_1p()).exp();
    Ok(l * (k - 1.0) / (k * k * growth - ((k - 1.0) * k + l)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpnePayoffs {
    pub offer: f64,
    pub proposer: f64,
    pub responder: f64,
}

/// Expected payoffs at the symmetric equilibrium, where every responder
/// visits each proposer with probability `1/K`.
pub fn spne_payoffs(config: &GameConfig) -> Result<SpnePayoffs> {
    let offer = spne_offer(config)?;
    let k = config.proposers() as f64;
    let l = config.responders() as f64;
    let visited = -(l * (-1.0 / k).ln_1p()).exp_m1();
    Ok(SpnePayoffs {
        offer,
        proposer: (1.0 - offer) * visited,
        responder: offer * k / l * visited,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DerivativeContext {
    /// Common level `s_i f(p_i)`.
    pub c: f64,
    /// `g_i = 1 / f'(p_i)`, negative.
    pub g: Vec<f64>,
    /// `sum_j g_j / s_j`.
    pub h: f64,
    /// Stationarity residuals.
    pub d: Vec<f64>,
    /// `a_i = L p_i^2 (1-p_i)^(L-1) / (1 - (1-p_i)^L - L p_i (1-p_i)^(L-1))`.
    pub a: Vec<f64>,
    /// `dPi_i / ds_i`.
    pub derivative: Vec<f64>,
}

impl DerivativeContext {
    pub fn max_abs_residual(&self) -> f64 {
        self.d.iter().fold(0.0, |m, d| m.max(d.abs()))
    }
}

/// `1 / f'(p)`; equal to `p^2 / ((1-p)^(L-1) (L p + 1 - p) - 1)`.
pub fn g_of(p: f64, responders: usize) -> f64 {
    -1.0 / f_slope(p, responders)
}

pub fn derivative_context(
    offers: &[f64],
    responders: usize,
    solution: &EssSolution,
) -> Result<DerivativeContext> {
    if let Some(i) = solution.active.iter().position(|&a| !a) {
        return Err(Error::OutOfRegion(format!(
            "proposer {i} is never visited; interior formulas do not apply"
        )));
    }
    if offers.iter().any(|&s| s <= 0.0) {
        return Err(Error::OutOfRegion("all offers must be positive".into()));
    }
    let l = responders as f64;
    let p = solution.strategy.probs();
    let c = offers[solution.anchor] * f(solution.p_anchor, responders);
    let g: Vec<f64> = p.iter().map(|&pi| g_of(pi, responders)).collect();
    let h: f64 = g.iter().zip(offers).map(|(gi, si)| gi / si).sum();
    let (mut d, mut derivative) = (Vec::new(), Vec::new());
    for i in 0..p.len() {
        let edge = l * (1.0 - p[i]).powi(responders as i32 - 1) - c;
        let di = (g[i] / offers[i] - h) * edge - p[i];
        d.push(di);
        derivative.push(g[i] * c / (offers[i] * offers[i] * h) * di);
    }
    let a = p.iter().map(|&pi| slope_and_ratio(pi, responders).1).collect();
    Ok(DerivativeContext { c, g, h, d, a, derivative })
}

/// Payoff of proposer `i` with the ESS re-solved for `offers`, together with
/// the solution used.
pub fn proposer_payoff(offers: &[f64], responders: usize, i: usize) -> Result<(f64, EssSolution)> {
    let sol = solve_ess(offers, responders)?;
    let p = sol.strategy[i];
    let visited = 1.0 - (1.0 - p).powi(responders as i32);
    Ok(((1.0 - offers[i]) * visited, sol))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FiniteDifference {
    pub payoff: f64,
    pub first: f64,
    pub second: f64,
}

/// Default stencil half-width.
pub const FD_STEP: f64 = 1e-4;

/// Central differences of `Pi_i(s_i)` with the ESS re-solved at every
/// stencil point. Fails if the set of visited proposers changes inside the
/// stencil.
pub fn payoff_derivative_fd(
    config: &GameConfig,
    offers: &[f64],
    i: usize,
    step: f64,
) -> Result<FiniteDifference> {
    config.require_solver_range()?;
    let s = offers[i];
    if !(step > 0.0 && s - step >= 0.0 && s + step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stencil {s} +/- {step} leaves [0, 1]"
        )));
    }
    let eval = |x: f64| {
        let mut o = offers.to_vec();
        o[i] = x;
        proposer_payoff(&o, config.responders(), i)
    };
    let (mid, sol_mid) = eval(s)?;
    let (lo, sol_lo) = eval(s - step)?;
    let (hi, sol_hi) = eval(s + step)?;
    if sol_lo.active != sol_mid.active || sol_hi.active != sol_mid.active {
        return Err(Error::RegimeChange { offer: s });
    }
    Ok(FiniteDifference {
        payoff: mid,
        first: (hi - lo) / (2.0 * step),
        second: (hi - 2.0 * mid + lo) / (step * step),
    })
}

/// Stationarity residual `d` at symmetric offers `s`, from the re-solved ESS.
pub fn symmetric_residual(config: &GameConfig, s: f64) -> Result<f64> {
    let offers = vec![s; config.proposers()];
    let sol = solve_ess(&offers, config.responders())?;
    Ok(derivative_context(&offers, config.responders(), &sol)?.d[0])
}

/// Root of the symmetric stationarity condition, found by bisection.
pub fn symmetric_stationarity_root(config: &GameConfig) -> Result<f64> {
    config.require_solver_range()?;
    let (lo, hi) = (1e-6, 1.0);
    let (d_lo, d_hi) = (symmetric_residual(config, lo)?, symmetric_residual(config, hi)?);
    if d_lo.signum() == d_hi.signum() {
        return Err(Error::OutOfRegion("no sign change of the stationarity residual".into()));
    }
    Ok(bisect(
        |s| symmetric_residual(config, s).unwrap_or(f64::NAN),
        lo,
        hi,
        1e-14,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnilateralReport {
    pub deviator: usize,
    pub spne_offer: f64,
    pub grid_points: usize,
    pub cell: f64,
    pub argmax_offer: f64,
    pub max_payoff: f64,
    pub payoff_at_spne: f64,
    /// Grid offers at which the deviator is never visited.
    pub unvisited_points: usize,
    /// Largest payoff among unvisited grid points (should be zero).
    pub unvisited_max_payoff: f64,
}

impl UnilateralReport {
    pub fn within_one_cell(&self) -> bool {
        (self.argmax_offer - self.spne_offer).abs() <= self.cell * (1.0 + 1e-9)
    }
}

/// Holds every proposer but the first at `s*` and sweeps the first one's
/// offer over `grid` evenly spaced values in `[0, 1]`.
pub fn verify_unilateral(config: &GameConfig, grid: usize) -> Result<UnilateralReport> {
    let s_star = spne_offer(config)?;
    if grid < 2 {
        return Err(Error::InvalidArgument("grid needs at least 2 points".into()));
    }
    let responders = config.responders();
    let base = vec![s_star; config.proposers()];
    let cell = 1.0 / (grid - 1) as f64;

    let payoff_at = |x: f64| -> Result<(f64, bool)> {
        let mut offers = base.clone();
        offers[0] = x;
        let (pay, sol) = proposer_payoff(&offers, responders, 0)?;
        Ok((pay, sol.active[0]))
    };
    let sweep: Vec<(f64, bool)> = (0..grid)
        .into_par_iter()
        .map(|j| payoff_at(j as f64 * cell))
        .collect::<Result<_>>()?;

    // lowest index wins ties
    let (best, &(max_payoff, _)) = sweep
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, &(f64, bool))>, (j, v)| match acc {
            Some((_, b)) if b.0 >= v.0 => acc,
            _ => Some((j, v)),
        })
        .expect("grid is non-empty");
    let unvisited: Vec<f64> = sweep.iter().filter(|v| !v.1).map(|v| v.0).collect();
    Ok(UnilateralReport {
        deviator: 0,
        spne_offer: s_star,
        grid_points: grid,
        cell,
        argmax_offer: best as f64 * cell,
        max_payoff,
        payoff_at_spne: payoff_at(s_star)?.0,
        unvisited_points: unvisited.len(),
        unvisited_max_payoff: unvisited.iter().copied().fold(0.0, f64::max),
    })
}

/// Matrix with every off-diagonal entry `c` and diagonal `c + eps_i`.
pub fn shifted_ones_matrix(c: f64, eps: &[f64]) -> DMatrix<f64> {
    let k = eps.len();
    DMatrix::from_fn(k, k, |i, j| if i == j { c + eps[i] } else { c })
}

/// Positive-definiteness by attempting a Cholesky factorization.
pub fn is_positive_definite(m: &DMatrix<f64>) -> bool {
    m.clone().cholesky().is_some()
}

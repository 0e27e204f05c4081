use clap::Args;
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use mpmr_core::asymptotics::RatioRegime;
use mpmr_core::engine::{exact_payoffs, simulate as run_simulation};
use mpmr_core::ess::{solve_ess, verify_ess_level1, EssSolution, RESIDUAL_TOL};
use mpmr_core::proposer::{
    derivative_context, payoff_derivative_fd, spne_payoffs, symmetric_stationarity_root,
    verify_unilateral, FD_STEP,
};
use mpmr_core::replicator::{
    distance_to_line, field_grid, integrate_recorded, ReplicatorParams, SimplexPoint,
};
use mpmr_core::{GameConfig, PayoffReport, StrategyProfile, SymmetricStrategy};

use crate::output::{Cell, Report, Table};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("verification failed: {}", .0.join(", "))]
    Verification(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Verification(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl From<mpmr_core::Error> for CliError {
    fn from(e: mpmr_core::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

type CmdResult = Result<Outcome, CliError>;

pub struct Outcome {
    pub report: Report,
    pub failed_checks: Vec<String>,
}

impl From<Report> for Outcome {
    fn from(report: Report) -> Self {
        Outcome { report, failed_checks: Vec::new() }
    }
}

#[derive(Debug, Args)]
pub struct EssArgs {
    /// Comma-separated offers, one per proposer.
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    offers: Vec<f64>,
    #[arg(long, short = 'L')]
    responders: usize,
}

pub fn ess(a: &EssArgs) -> CmdResult {
    let sol = solve_ess(&a.offers, a.responders)?;
    let mut table = Table::new(vec!["proposer", "offer", "probability", "active"]);
    for (i, &s) in a.offers.iter().enumerate() {
        table.push(vec![i.into(), s.into(), sol.strategy[i].into(), sol.active[i].into()]);
    }
    let document = json!({
        "offers": a.offers,
        "responders": a.responders,
        "strategy": sol.strategy.probs(),
        "active": sol.active,
        "anchor": sol.anchor,
        "all_active": sol.all_active(),
        "residual": sol.residual,
    });
    Ok(Report { document: Some(document), table }.into())
}

#[derive(Debug, Args)]
pub struct SpneArgs {
    #[arg(long, short = 'K')]
    proposers: usize,
    #[arg(long, short = 'L')]
    responders: usize,
}

const SPNE_COLUMNS: [&str; 5] = ["K", "L", "offer", "proposer_payoff", "responder_payoff"];

fn spne_row(k: usize, l: usize) -> Result<Vec<Cell>, CliError> {
    let p = spne_payoffs(&GameConfig::for_solver(k, l)?)?;
    Ok(vec![k.into(), l.into(), p.offer.into(), p.proposer.into(), p.responder.into()])
}

pub fn spne(a: &SpneArgs) -> CmdResult {
    let config = GameConfig::new(a.proposers, a.responders)?;
    let p = spne_payoffs(&config)?;
    let mut table = Table::new(SPNE_COLUMNS.to_vec());
    table.push(spne_row(a.proposers, a.responders)?);
    let document = json!({
        "proposers": a.proposers,
        "responders": a.responders,
        "offer": p.offer,
        "proposer_payoff": p.proposer,
        "responder_payoff": p.responder,
    });
    Ok(Report { document: Some(document), table }.into())
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 16)]
    k_max: usize,
    #[arg(long, default_value_t = 16)]
    l_max: usize,
}

pub fn sweep(a: &SweepArgs) -> CmdResult {
    if a.k_max < 2 || a.l_max < 2 {
        return Err(CliError::Input("--k-max and --l-max must be at least 2".into()));
    }
    let pairs: Vec<(usize, usize)> =
        (2..=a.k_max).flat_map(|k| (2..=a.l_max).map(move |l| (k, l))).collect();
    let rows: Result<Vec<_>, _> = pairs.par_iter().map(|&(k, l)| spne_row(k, l)).collect();
    let mut table = Table::new(SPNE_COLUMNS.to_vec());
    rows?.into_iter().for_each(|r| table.push(r));
    Ok(Report::table(table).into())
}

#[derive(Debug, Args)]
pub struct AsymptoticArgs {
    #[arg(long, default_value_t = 0.1)]
    c_min: f64,
    #[arg(long, default_value_t = 5.0)]
    c_max: f64,
    #[arg(long, default_value_t = 50)]
    steps: usize,
    /// Space the ratios geometrically instead of linearly.
    #[arg(long)]
    log: bool,
}

pub fn asymptotic(a: &AsymptoticArgs) -> CmdResult {
    if a.steps == 0 || !(a.c_min > 0.0) || a.c_max < a.c_min {
        return Err(CliError::Input("need steps >= 1 and 0 < c-min <= c-max".into()));
    }
    let mut table = Table::new(vec!["c", "offer", "proposer_payoff", "responder_payoff", "one_minus_offer"]);
    for j in 0..a.steps {
        let t = if a.steps == 1 { 0.0 } else { j as f64 / (a.steps - 1) as f64 };
        let c = if a.log {
            a.c_min * (a.c_max / a.c_min).powf(t)
        } else {
            a.c_min + (a.c_max - a.c_min) * t
        };
        let r = RatioRegime::new(c)?;
        table.push(vec![
            c.into(),
            r.limit_offer.into(),
            r.limit_proposer_payoff.into(),
            r.limit_responder_payoff.into(),
            (1.0 - r.limit_offer).into(),
        ]);
    }
    Ok(Report::table(table).into())
}

#[derive(Debug, Args)]
pub struct ReplicatorArgs {
    #[arg(long, default_value_t = 0.2)]
    s: f64,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Starting fractions x1,x2,x3.
    #[arg(long, value_delimiter = ',', default_value = "0.3,0.4,0.3")]
    x0: Vec<f64>,
    #[arg(long, default_value_t = 2000.0)]
    t_end: f64,
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Record every n-th step (the last step is always recorded).
    #[arg(long, default_value_t = 100)]
    every: usize,
    /// Emit the vector field on a lattice with this many points per edge
    /// instead of a trajectory.
    #[arg(long, value_name = "RESOLUTION")]
    field: Option<usize>,
}

pub fn replicator(a: &ReplicatorArgs) -> CmdResult {
    let params = ReplicatorParams::new(a.s, a.delta)?;
    if let Some(resolution) = a.field {
        let mut table = Table::new(vec!["x1", "x2", "x3", "dx1", "dx2", "dx3", "magnitude"]);
        for p in field_grid(&params, resolution)? {
            let [x1, x2, x3] = p.point.as_array();
            let [d1, d2, d3] = p.field;
            table.push(vec![x1.into(), x2.into(), x3.into(), d1.into(), d2.into(), d3.into(), p.magnitude.into()]);
        }
        return Ok(Report::table(table).into());
    }
    let [x1, x2, x3] = <[f64; 3]>::try_from(a.x0.as_slice())
        .map_err(|_| CliError::Input(format!("--x0 needs 3 values, got {}", a.x0.len())))?;
    let start = SimplexPoint::new(x1, x2, x3)?;
    let tr = integrate_recorded(&params, &start, a.t_end, a.dt, a.every)?;
    let mut table = Table::new(vec!["t", "x1", "x2", "x3", "distance_to_line"]);
    for (t, p) in tr.times.iter().zip(&tr.points) {
        table.push(vec![(*t).into(), p.x1.into(), p.x2.into(), p.x3.into(), distance_to_line(&params, p).into()]);
    }
    let end = tr.terminal();
    let document = json!({
        "s": a.s,
        "delta": a.delta,
        "dt": a.dt,
        "t_end": a.t_end,
        "terminal": {
            "point": end.as_array(),
            "distance_to_line": tr.distance_to_line,
            "payoffs": tr.terminal_payoffs,
            "max_drift": tr.max_drift,
        },
        "trajectory": table_rows_json(&table),
    });
    Ok(Report { document: Some(document), table }.into())
}

fn table_rows_json(table: &Table) -> Value {
    let report = Report::table(table.clone());
    serde_json::from_str(&crate::output::render(&report, crate::output::Format::Json, 17))
        .expect("rendered json parses")
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
    offers: Vec<f64>,
    #[arg(long, short = 'L')]
    responders: usize,
    /// Responder rows separated by ';', entries by ','. A single row is
    /// used for every responder.
    #[arg(long, conflicts_with = "ess", required_unless_present = "ess")]
    profile: Option<String>,
    /// Play the ESS of the given offers.
    #[arg(long)]
    ess: bool,
    #[arg(long, default_value_t = 100_000)]
    rounds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_profile(text: &str, config: &GameConfig) -> Result<StrategyProfile, CliError> {
    let rows: Vec<Vec<f64>> = text
        .split(';')
        .map(|row| {
            row.split(',')
                .map(|v| v.trim().parse::<f64>().map_err(|e| CliError::Input(format!("bad probability {v:?}: {e}"))))
                .collect()
        })
        .collect::<Result<_, _>>()?;
    let rows = if rows.len() == 1 { vec![rows[0].clone(); config.responders()] } else { rows };
    Ok(StrategyProfile::new(config, rows)?)
}

fn payoff_json(r: &PayoffReport) -> Value {
    json!({ "proposer_payoffs": r.proposer_payoffs, "responder_payoffs": r.responder_payoffs })
}

pub fn simulate(a: &SimulateArgs) -> CmdResult {
    let config = GameConfig::new(a.offers.len(), a.responders)?;
    let profile = match &a.profile {
        Some(text) => parse_profile(text, &config)?,
        None => StrategyProfile::symmetric(&config, &solve_ess(&a.offers, a.responders)?.strategy)?,
    };
    let stats = run_simulation(&config, &a.offers, &profile, a.rounds, a.seed)?;
    let exact = exact_payoffs(&config, &a.offers, &profile)?;
    let mut table = Table::new(vec!["role", "index", "mean", "std_error", "exact"]);
    let roles = [
        ("proposer", &stats.means.proposer_payoffs, &stats.std_errors.proposer_payoffs, &exact.proposer_payoffs),
        ("responder", &stats.means.responder_payoffs, &stats.std_errors.responder_payoffs, &exact.responder_payoffs),
    ];
    for (role, means, ses, ex) in roles {
        for i in 0..means.len() {
            table.push(vec![role.into(), i.into(), means[i].into(), ses[i].into(), ex[i].into()]);
        }
    }
    let document = json!({
        "offers": a.offers,
        "responders": a.responders,
        "rounds": stats.rounds,
        "seed": stats.seed,
        "means": payoff_json(&stats.means),
        "std_errors": payoff_json(&stats.std_errors),
        "exact": payoff_json(&exact),
    });
    Ok(Report { document: Some(document), table }.into())
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Check the symmetric equilibrium of a K x L game.
    #[arg(long, short = 'K', conflicts_with_all = ["offers", "strategy"], required_unless_present = "offers")]
    proposers: Option<usize>,
    #[arg(long, short = 'L')]
    responders: usize,
    /// Check the responder ESS for these offers.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    offers: Option<Vec<f64>>,
    /// Candidate strategy to check instead of the solved ESS.
    #[arg(long, value_delimiter = ',', requires = "offers")]
    strategy: Option<Vec<f64>>,
    /// Deviation lattice points per edge (with --offers) or unilateral
    /// sweep points (with --proposers).
    #[arg(long)]
    grid: Option<usize>,
}

struct Check {
    name: &'static str,
    passed: bool,
    value: f64,
    threshold: f64,
    detail: String,
}

fn checks_outcome(checks: Vec<Check>, extra: Value) -> Outcome {
    let mut table = Table::new(vec!["check", "passed", "value", "threshold", "detail"]);
    let mut list = Vec::new();
    for c in &checks {
        table.push(vec![c.name.into(), c.passed.into(), c.value.into(), c.threshold.into(), c.detail.clone().into()]);
        list.push(json!({
            "name": c.name,
            "passed": c.passed,
            "value": c.value,
            "threshold": c.threshold,
            "detail": c.detail,
        }));
    }
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| c.name.to_string()).collect();
    let document = json!({ "passed": failed.is_empty(), "checks": list, "context": extra });
    Outcome { report: Report { document: Some(document), table }, failed_checks: failed }
}

fn ess_checks(offers: &[f64], l: usize, sol: &EssSolution, per_edge: usize, residual_tol: f64) -> Result<Vec<Check>, CliError> {
    let v = verify_ess_level1(offers, l, sol, per_edge)?;
    let mut checks = vec![Check {
        name: "ess_residual",
        passed: sol.residual <= residual_tol,
        value: sol.residual,
        threshold: residual_tol,
        detail: "equalization residual".into(),
    }];
    checks.push(Check {
        name: "ess_j0_equality",
        passed: v.max_j0_equality_error <= mpmr_core::ess::J0_EQUALITY_TOL,
        value: v.max_j0_equality_error,
        threshold: mpmr_core::ess::J0_EQUALITY_TOL,
        detail: format!("{} deviations", v.deviations),
    });
    checks.push(Check {
        name: "ess_level1",
        passed: v.passed(),
        value: v.min_j1_gap.unwrap_or(f64::NAN),
        threshold: 0.0,
        detail: match v.violations.first() {
            Some(first) => format!("{} violations, first: {first}", v.violations.len()),
            None => format!("min j1 gap over {} deviations", v.deviations),
        },
    });
    Ok(checks)
}

/// Smallest points-per-edge whose simplex lattice has at least `min` points.
fn lattice_resolution(k: usize, min: usize) -> usize {
    let count = |n: usize| -> f64 {
        // C(n - 1 + k - 1, k - 1)
        (1..k).fold(1.0, |acc, j| acc * (n - 1 + j) as f64 / j as f64)
    };
    (2..).find(|&n| count(n) >= min as f64).expect("lattice grows without bound")
}

pub fn verify(a: &VerifyArgs) -> CmdResult {
    match (&a.offers, a.proposers) {
        (Some(offers), _) => {
            let sol = match &a.strategy {
                Some(p) => EssSolution::candidate(offers, a.responders, SymmetricStrategy::new(p.clone())?)?,
                None => solve_ess(offers, a.responders)?,
            };
            let per_edge = a.grid.unwrap_or(101);
            if per_edge < 2 {
                return Err(CliError::Input("--grid must be at least 2".into()));
            }
            let tol = if a.strategy.is_some() { 1e-10 } else { RESIDUAL_TOL };
            let checks = ess_checks(offers, a.responders, &sol, per_edge, tol)?;
            let extra = json!({ "offers": offers, "responders": a.responders, "strategy": sol.strategy.probs() });
            Ok(checks_outcome(checks, extra))
        }
        (None, Some(k)) => verify_symmetric(k, a.responders, a.grid.unwrap_or(1001)),
        (None, None) => Err(CliError::Input("pass --proposers or --offers".into())),
    }
}

fn verify_symmetric(k: usize, l: usize, sweep_points: usize) -> CmdResult {
    let config = GameConfig::for_solver(k, l)?;
    let pay = spne_payoffs(&config)?;
    let s = pay.offer;
    let offers = vec![s; k];
    let sol = solve_ess(&offers, l)?;
    let ctx = derivative_context(&offers, l, &sol)?;
    let root = symmetric_stationarity_root(&config)?;
    let sweep = verify_unilateral(&config, sweep_points)?;
    let fd = payoff_derivative_fd(&config, &offers, 0, FD_STEP)?;

    let mut checks = vec![
        Check {
            name: "stationarity",
            passed: ctx.max_abs_residual() <= 1e-9,
            value: ctx.max_abs_residual(),
            threshold: 1e-9,
            detail: "max |d_i| at the symmetric offer".into(),
        },
        Check {
            name: "root_find",
            passed: (root - s).abs() <= 1e-9,
            value: (root - s).abs(),
            threshold: 1e-9,
            detail: format!("bisection root {root}"),
        },
        Check {
            name: "unilateral_sweep",
            passed: sweep.within_one_cell(),
            value: (sweep.argmax_offer - s).abs(),
            threshold: sweep.cell,
            detail: format!("argmax {} over {} points", sweep.argmax_offer, sweep.grid_points),
        },
        Check {
            name: "second_difference",
            passed: fd.second < 0.0,
            value: fd.second,
            threshold: 0.0,
            detail: format!("step {FD_STEP}"),
        },
    ];
    checks.extend(ess_checks(&offers, l, &sol, lattice_resolution(k, 101), RESIDUAL_TOL)?);
    let extra = json!({
        "proposers": k,
        "responders": l,
        "offer": s,
        "proposer_payoff": pay.proposer,
        "responder_payoff": pay.responder,
    });
    Ok(checks_outcome(checks, extra))
}

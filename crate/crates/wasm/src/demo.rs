use mpmr_core::asymptotics::RatioRegime;
use mpmr_core::engine::exact_payoffs;
use mpmr_core::ess::solve_ess;
use mpmr_core::proposer::spne_offer;
use mpmr_core::replicator::{field_grid, integrate_recorded, ReplicatorParams, SimplexPoint};
use mpmr_core::{Error, GameConfig, Result, StrategyProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct EssView {
    pub strategy: Vec<f64>,
    pub proposer_payoffs: Vec<f64>,
    /// Expected payoff of a lone responder who always visits proposer `i`.
    pub visit_payoffs: Vec<f64>,
    pub responder_payoff: f64,
}

impl EssView {
    pub fn flatten(self) -> Vec<f64> {
        let mut out = self.strategy;
        out.extend(self.proposer_payoffs);
        out.extend(self.visit_payoffs);
        out.push(self.responder_payoff);
        out
    }
}

pub fn ess_explore(offers: &[f64], responders: usize) -> Result<EssView> {
    let sol = solve_ess(offers, responders)?;
    let k = offers.len();
    let config = GameConfig::new(k, responders)?;
    let profile = StrategyProfile::symmetric(&config, &sol.strategy)?;
    let report = exact_payoffs(&config, offers, &profile)?;
    let visit_payoffs = (0..k)
        .map(|i| {
            let mut rows = profile.rows().to_vec();
            rows[0] = (0..k).map(|j| if j == i { 1.0 } else { 0.0 }).collect();
            let p = StrategyProfile::new(&config, rows)?;
            Ok(exact_payoffs(&config, offers, &p)?.responder_payoffs[0])
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(EssView {
        strategy: sol.strategy.probs().to_vec(),
        proposer_payoffs: report.proposer_payoffs,
        visit_payoffs,
        responder_payoff: report.responder_payoffs[0],
    })
}

pub fn replicator_field(s: f64, delta: f64, resolution: usize) -> Result<Vec<f64>> {
    let params = ReplicatorParams::new(s, delta)?;
    Ok(field_grid(&params, resolution)?
        .into_iter()
        .flat_map(|p| {
            let [x1, x2, x3] = p.point.as_array();
            let [d1, d2, d3] = p.field;
            [x1, x2, x3, d1, d2, d3]
        })
        .collect())
}

const DEMO_DT: f64 = 0.05;

pub fn replicator_trajectory(
    s: f64,
    delta: f64,
    x1: f64,
    x2: f64,
    t_end: f64,
    samples: usize,
) -> Result<Vec<f64>> {
    let params = ReplicatorParams::new(s, delta)?;
    let start = SimplexPoint::new(x1, x2, (1.0 - x1 - x2).max(0.0))?;
    let steps = (t_end / DEMO_DT).round().max(1.0) as usize;
    let stride = (steps / samples.max(1)).max(1);
    let tr = integrate_recorded(&params, &start, t_end, DEMO_DT, stride)?;
    let mut out: Vec<f64> = tr.points.iter().flat_map(|p| p.as_array()).collect();
    out.push(tr.distance_to_line);
    Ok(out)
}

pub fn spne_curve(k_max: usize, responders: usize) -> Result<Vec<f64>> {
    (2..=k_max)
        .map(|k| spne_offer(&GameConfig::for_solver(k, responders)?))
        .collect()
}

pub fn limit_curve(c_min: f64, c_max: f64, steps: usize) -> Result<Vec<f64>> {
    if steps == 0 || !(c_min > 0.0 && c_max >= c_min) {
        return Err(Error::InvalidArgument("need steps >= 1 and 0 < c_min <= c_max".into()));
    }
    let mut out = Vec::with_capacity(4 * steps);
    for j in 0..steps {
        let t = if steps == 1 { 0.0 } else { j as f64 / (steps - 1) as f64 };
        let c = c_min * (c_max / c_min).powf(t);
        let r = RatioRegime::new(c)?;
        out.extend([c, r.limit_offer, r.limit_proposer_payoff, r.limit_responder_payoff]);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ess_view_layout() {
        let v = ess_explore(&[0.2, 0.3], 2).unwrap();
        assert!((v.strategy[0] - 0.2).abs() < 1e-12);
        // at the ESS both visits pay the same
        assert!((v.visit_payoffs[0] - v.visit_payoffs[1]).abs() < 1e-12);
        assert!((v.visit_payoffs[0] - v.responder_payoff).abs() < 1e-12);
        assert_eq!(v.flatten().len(), 7);
        assert!(ess_explore(&[0.0, 0.0], 2).is_err());
    }

    #[test]
    fn field_layout() {
        let f = replicator_field(0.2, 0.1, 4).unwrap();
        assert_eq!(f.len(), 6 * 10);
    }

    #[test]
    fn trajectory_reaches_line() {
        let t = replicator_trajectory(0.2, 0.1, 0.3, 0.4, 1500.0, 200).unwrap();
        assert_eq!((t.len() - 1) % 3, 0);
        assert!(*t.last().unwrap() < 1e-6);
    }

    #[test]
    fn curves() {
        let s = spne_curve(4, 2).unwrap();
        assert_eq!(s.len(), 3);
        assert!((s[0] - 0.5).abs() < 1e-15);
        let c = limit_curve(0.5, 2.0, 3).unwrap();
        assert!((c[4] - 1.0).abs() < 1e-15);
        assert!(limit_curve(1.0, 2.0, 0).is_err());
    }
}

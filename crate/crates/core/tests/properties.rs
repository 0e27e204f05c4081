use mpmr_core::asymptotics::{limit_offer, limit_payoffs, RatioRegime};
use mpmr_core::duopoly::{
    best_response, classify, duopoly_proposer_payoffs, ess_payoff_gap, ess_strategy,
    payoff_matrix, BestResponse, Scenario,
};
use mpmr_core::engine::{enumerate_payoffs, exact_payoffs, selection_probability, weight_matrix};
use mpmr_core::ess::{f, h, slope_and_ratio, solve_ess};
use mpmr_core::proposer::{derivative_context, g_of, spne_offer};
use mpmr_core::replicator::{
    aggregate_low_probability, integrate, vector_field, vector_field_generic, ReplicatorParams,
    SimplexPoint,
};
use mpmr_core::{GameConfig, StrategyProfile, SymmetricStrategy};
use proptest::prelude::*;

fn normalize(raw: Vec<f64>) -> Vec<f64> {
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| v / sum).collect()
}

prop_compose! {
    fn instance(max_k: usize, max_l: usize)
        (k in 1..=max_k, l in 1..=max_l)
        (offers in prop::collection::vec(0.0..=1.0f64, k),
         rows in prop::collection::vec(prop::collection::vec(0.01..1.0f64, k), l))
        -> (Vec<f64>, Vec<Vec<f64>>)
    {
        (offers, rows.into_iter().map(normalize).collect())
    }
}

prop_compose! {
    fn active_offers(max_k: usize)
        (k in 2..=max_k)
        (offers in prop::collection::vec(0.05..=1.0f64, k))
        -> Vec<f64>
    {
        offers
    }
}

fn config(k: usize, l: usize) -> GameConfig {
    GameConfig::new(k, l).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn validated_profiles_are_normalized((offers, rows) in instance(5, 5)) {
        let c = config(offers.len(), rows.len());
        let p = StrategyProfile::new(&c, rows).unwrap();
        for row in p.rows() {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        }
        let again = StrategyProfile::new(&c, p.rows().to_vec()).unwrap();
        for (a, b) in again.rows().iter().flatten().zip(p.rows().iter().flatten()) {
            prop_assert!((a - b).abs() <= 1e-15);
        }
    }

    #[test]
    fn exact_matches_enumeration((offers, rows) in instance(4, 4)) {
        let c = config(offers.len(), rows.len());
        let p = StrategyProfile::new(&c, rows).unwrap();
        let fast = exact_payoffs(&c, &offers, &p).unwrap();
        let slow = enumerate_payoffs(&c, &offers, &p).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) <= 1e-10);
    }

    #[test]
    fn reward_is_conserved((offers, rows) in instance(6, 6)) {
        let c = config(offers.len(), rows.len());
        let p = StrategyProfile::new(&c, rows).unwrap();
        let report = exact_payoffs(&c, &offers, &p).unwrap();
        let selected: f64 = (0..offers.len()).map(|i| selection_probability(&p, i)).sum();
        prop_assert!((report.total() - selected).abs() <= 1e-12);
    }

    #[test]
    fn weight_falls_as_others_crowd_in(
        (offers, rows) in instance(4, 5),
        other in 0usize..5,
        target in 0usize..4,
        shift in 0.0..1.0f64,
    ) {
        let (k, l) = (offers.len(), rows.len());
        prop_assume!(l >= 2);
        let (other, target) = (other % l, target % k);
        let before = StrategyProfile::new(&config(k, l), rows.clone()).unwrap();
        // move a fraction of the other responder's mass onto `target`
        let mut moved = rows;
        let row = &mut moved[other];
        let taken: f64 = row.iter().enumerate().filter(|(j, _)| *j != target).map(|(_, v)| v * shift).sum();
        for (j, v) in row.iter_mut().enumerate() {
            if j == target { *v += taken } else { *v *= 1.0 - shift }
        }
        let after = StrategyProfile::new(&config(k, l), moved).unwrap();
        let c = config(k, l);
        let (w0, w1) = (weight_matrix(&c, &before).unwrap(), weight_matrix(&c, &after).unwrap());
        for focal in (0..l).filter(|&x| x != other) {
            prop_assert!(w1.get(focal, target) <= w0.get(focal, target) + 1e-14);
        }
    }

    #[test]
    fn duopoly_gap_nonnegative(s in 0.01..0.5f64, frac in 0.0..0.99f64, p in 0.0..=1.0f64) {
        let delta = frac * s;
        prop_assume!(s + delta <= 1.0);
        let gap = ess_payoff_gap(s, delta, p);
        prop_assert!(gap >= 0.0);
        let p_a = (s - delta) / (2.0 * s + delta);
        prop_assert!(ess_payoff_gap(s, delta, p_a).abs() <= 1e-12);
        if (p - p_a).abs() > 1e-3 {
            prop_assert!(gap > 0.0);
        }
    }

    #[test]
    fn classify_consistent_with_best_response(a in 0.0..=1.0f64, b in 0.0..=1.0f64, q in 0.0..=1.0f64) {
        let class = classify(a, b);
        let (s1, s2) = if a <= b { (a, b) } else { (b, a) };
        match class.tag {
            Scenario::Dominated => prop_assert_eq!(best_response(s1, s2, q), BestResponse::Point(0.0)),
            Scenario::MixedOrCoordinated => {
                let qc = class.q_crit.unwrap();
                prop_assert_eq!(best_response(s1, s2, qc), BestResponse::Interval);
                let expect = if q < qc { 1.0 } else { 0.0 };
                if q != qc {
                    prop_assert_eq!(best_response(s1, s2, q), BestResponse::Point(expect));
                }
            }
            _ => {}
        }
    }

    #[test]
    fn duopoly_ess_matches_general_solver(a in 0.01..=1.0f64, b in 0.01..=1.0f64) {
        prop_assume!(a < 2.0 * b && b < 2.0 * a);
        let closed = ess_strategy(a, b).unwrap();
        let general = solve_ess(&[a, b], 2).unwrap();
        for i in 0..2 {
            prop_assert!((closed[i] - general.strategy[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn table_matches_engine(s in 0.02..0.5f64, frac in 0.0..0.95f64) {
        let delta = frac * s;
        let table = payoff_matrix(s, delta).unwrap();
        let offers = [s, s + delta];
        let mixed = ess_strategy(s, s + delta).unwrap();
        let strategies = [mixed.probs().to_vec(), vec![0.0, 1.0], vec![1.0, 0.0]];
        let c = config(2, 2);
        for (i, row) in strategies.iter().enumerate() {
            for (j, col) in strategies.iter().enumerate() {
                let p = StrategyProfile::new(&c, vec![row.clone(), col.clone()]).unwrap();
                let r = exact_payoffs(&c, &offers, &p).unwrap();
                prop_assert!((r.responder_payoffs[0] - table[i][j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn duopoly_payoffs_match_engine(a in 0.05..=1.0f64, b in 0.05..=1.0f64) {
        prop_assume!(a <= 2.0 * b && b <= 2.0 * a);
        let (p1, p2) = duopoly_proposer_payoffs(a, b).unwrap();
        let ess = ess_strategy(a, b).unwrap();
        let c = config(2, 2);
        let prof = StrategyProfile::symmetric(&c, &ess).unwrap();
        let r = exact_payoffs(&c, &[a, b], &prof).unwrap();
        prop_assert!((r.proposer_payoffs[0] - p1).abs() <= 1e-12);
        prop_assert!((r.proposer_payoffs[1] - p2).abs() <= 1e-12);
    }

    #[test]
    fn coordination_pays_one_minus_offer(a in 0.0..=1.0f64, b in 0.0..=1.0f64) {
        let c = config(2, 2);
        let p = StrategyProfile::new(&c, vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let r = exact_payoffs(&c, &[a, b], &p).unwrap();
        prop_assert!((r.proposer_payoffs[0] - (1.0 - a)).abs() <= 1e-15);
        prop_assert!((r.proposer_payoffs[1] - (1.0 - b)).abs() <= 1e-15);
    }

    #[test]
    fn h_strictly_increasing(offers in active_offers(6), l in 2usize..8, x in 0.0..0.99f64) {
        let mut sorted = offers;
        sorted.sort_by(f64::total_cmp);
        let lo = h(x, &sorted, l).unwrap();
        let hi = h(x + 0.01, &sorted, l).unwrap();
        prop_assert!(hi > lo);
    }

    #[test]
    fn ess_equalizes(offers in active_offers(6), l in 2usize..10) {
        let sol = solve_ess(&offers, l).unwrap();
        let top = offers[sol.anchor];
        let level = top * f(sol.p_anchor, l);
        for (i, &s) in offers.iter().enumerate() {
            if sol.active[i] {
                prop_assert!((s * f(sol.strategy[i], l) - level).abs() <= 1e-10 * top * l as f64);
            } else {
                prop_assert!(s * l as f64 <= level + 1e-12);
            }
        }
        prop_assert!((sol.strategy.probs().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn ess_scale_invariant(offers in active_offers(6), l in 2usize..8, factor in 0.01..=1.0f64) {
        let top = offers.iter().copied().fold(0.0, f64::max);
        let lambda = factor / top;
        let scaled: Vec<f64> = offers.iter().map(|s| s * lambda).collect();
        let a = solve_ess(&offers, l).unwrap();
        let b = solve_ess(&scaled, l).unwrap();
        for i in 0..offers.len() {
            prop_assert!((a.strategy[i] - b.strategy[i]).abs() <= 1e-10);
        }
    }

    #[test]
    fn g_identity(p in 0.01..1.0f64, l in 2usize..=32) {
        let lf = l as f64;
        let direct = p * p / ((1.0 - p).powi(l as i32 - 1) * (lf * p + 1.0 - p) - 1.0);
        let slope = slope_and_ratio(p, l).0;
        prop_assert!((direct - (-1.0 / slope)).abs() <= 1e-10);
        prop_assert!((g_of(p, l) - direct).abs() <= 1e-10);
    }

    #[test]
    fn slope_factors_positive_and_decreasing(offers in prop::collection::vec(0.6..=1.0f64, 2..=5), l in 3usize..8) {
        let sol = solve_ess(&offers, l).unwrap();
        prop_assume!(sol.all_active());
        let ctx = derivative_context(&offers, l, &sol).unwrap();
        for i in 0..offers.len() {
            prop_assert!(ctx.a[i] >= 0.0);
            for j in 0..offers.len() {
                if sol.strategy[i] < sol.strategy[j] {
                    prop_assert!(ctx.a[i] >= ctx.a[j]);
                }
            }
        }
    }

    #[test]
    fn limit_bookkeeping(c in 0.05..50.0f64) {
        let regime = RatioRegime::new(c).unwrap();
        prop_assert!(regime.limit_offer > 0.0 && regime.limit_offer < 1.0);
        prop_assert!(regime.inefficiency() >= 0.0);
        let (pp, rp) = limit_payoffs(c).unwrap();
        prop_assert!(pp > 0.0 && pp < 1.0 && rp > 0.0 && rp < 1.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn fields_agree(s in 0.01..0.5f64, frac in 0.0..=1.0f64, x1 in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let p = ReplicatorParams::new(s, frac * s).unwrap();
        let x2 = (1.0 - x1) * t;
        let point = SimplexPoint::new(x1, x2, 1.0 - x1 - x2).unwrap();
        let a = vector_field(&p, &point);
        let b = vector_field_generic(&p, &point);
        for i in 0..3 {
            prop_assert!((a[i] - b[i]).abs() <= 1e-12);
        }
        prop_assert_eq!(a[0] + a[1] + a[2], 0.0);
    }
}

#[test]
fn f_strictly_decreasing_fine_grid() {
    for l in 2..=64 {
        let mut x = 0.0;
        while x <= 1.0 - 1e-6 {
            assert!(f(x + 1e-6, l) < f(x, l), "L={l} x={x}");
            x += 1e-3;
        }
    }
}

#[test]
fn slope_functions_on_dense_grid() {
    for l in 2..=32 {
        let mut prev = slope_and_ratio(0.0, l);
        for i in 1..=10_000 {
            let x = i as f64 / 10_000.0;
            let cur = slope_and_ratio(x, l);
            assert!(cur.0 > 0.0 && cur.0 <= prev.0, "slope at L={l}, x={x}");
            if l > 2 {
                assert!(cur.1 < prev.1, "ratio at L={l}, x={x}");
            }
            prev = cur;
        }
    }
}

#[test]
fn spne_offers_inside_unit_interval() {
    for k in 2..=64 {
        for l in 2..=64 {
            let s = spne_offer(&config(k, l)).unwrap();
            assert!(s > 0.0 && s < 1.0, "K={k} L={l}: {s}");
        }
    }
}

#[test]
fn best_reply_has_single_fixed_point() {
    use mpmr_core::duopoly::proposer_best_response;
    let gap = |s: f64| proposer_best_response(s).unwrap() - s;
    let n = 10_000;
    let mut sign_changes = Vec::new();
    for i in 1..n {
        let (a, b) = (i as f64 / n as f64, (i + 1) as f64 / n as f64);
        if gap(a) == 0.0 || gap(a) * gap(b) < 0.0 {
            sign_changes.push(a);
        }
    }
    assert_eq!(sign_changes.len(), 1, "{sign_changes:?}");
    let root = mpmr_core::roots::bisect(gap, 0.1, 1.0, 1e-14);
    assert!((root - 0.5).abs() < 1e-12);
}

#[test]
fn limit_offer_decreasing_in_inverse_ratio() {
    let mut prev = 0.0;
    for i in 0..=2000 {
        let c = 0.05 * (1000.0f64).powf(i as f64 / 2000.0);
        let s = limit_offer(c).unwrap();
        assert!(s > prev, "c={c}");
        prev = s;
    }
}

#[test]
fn population_recovers_mixed_visit_rate() {
    let p = ReplicatorParams::new(0.2, 0.1).unwrap();
    for start in [(0.3, 0.4, 0.3), (0.6, 0.1, 0.3), (0.1, 0.2, 0.7), (0.2, 0.7, 0.1)] {
        let s = SimplexPoint::new(start.0, start.1, start.2).unwrap();
        let tr = integrate(&p, &s, 2000.0, 0.05).unwrap();
        let rate = aggregate_low_probability(&p, tr.terminal());
        assert!((rate - p.p_low()).abs() <= 1e-6, "{start:?}: {rate}");
    }
}

#[test]
fn runge_kutta_is_fourth_order() {
    let p = ReplicatorParams::new(0.2, 0.1).unwrap();
    let s = SimplexPoint::new(0.3, 0.4, 0.3).unwrap();
    let coarse = integrate(&p, &s, 10.0, 0.4).unwrap();
    let mid = integrate(&p, &s, 10.0, 0.2).unwrap();
    let fine = integrate(&p, &s, 10.0, 0.1).unwrap();
    let e1 = coarse.terminal().distance(mid.terminal());
    let e2 = mid.terminal().distance(fine.terminal());
    let order = (e1 / e2).log2();
    assert!(order > 3.5 && order < 4.5, "observed order {order}");
}

#[test]
fn symmetric_strategy_is_uniform_for_equal_offers() {
    let sol = solve_ess(&[0.4; 5], 3).unwrap();
    let uniform = SymmetricStrategy::uniform(5);
    for i in 0..5 {
        assert!((sol.strategy[i] - uniform[i]).abs() < 1e-12);
    }
}

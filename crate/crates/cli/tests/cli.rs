use std::process::{Command, Output};

use serde_json::Value;

fn mpmr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mpmr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 output")
}

fn json(args: &[&str]) -> Value {
    let out = mpmr(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).expect("valid json")
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn ess_duopoly() {
    let v = json(&["ess", "--offers", "0.2,0.3", "--responders", "2"]);
    let strategy: Vec<f64> = v["strategy"].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect();
    assert_eq!(strategy, vec![0.2, 0.8]);
}

#[test]
fn ess_dominated_offer_drops_out() {
    let v = json(&["ess", "--offers", "0.1,0.3", "--responders", "2"]);
    assert_eq!(v["strategy"], serde_json::json!([0.0, 1.0]));
    assert_eq!(v["active"], serde_json::json!([false, true]));
}

#[test]
fn ess_all_zero_is_input_error() {
    let out = mpmr(&["ess", "--offers", "0,0", "--responders", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("degenerate all-zero offers"));
}

#[test]
fn spne_values() {
    let v = json(&["spne", "-K", "2", "-L", "2"]);
    assert_eq!(v["offer"].as_f64(), Some(0.5));
    assert_eq!(v["proposer_payoff"].as_f64(), Some(0.375));
    assert_eq!(v["responder_payoff"].as_f64(), Some(0.375));
    let v = json(&["spne", "-K", "3", "-L", "3"]);
    assert!((v["offer"].as_f64().unwrap() - 8.0 / 15.0).abs() < 1e-11);
    assert_eq!(mpmr(&["spne", "-K", "1", "-L", "5"]).status.code(), Some(2));
}

#[test]
fn sweep_table() {
    let out = mpmr(&["sweep", "--k-max", "5", "--l-max", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(!text.contains('\r'));
    let rows = csv_rows(&text);
    assert_eq!(rows[0].join(","), "K,L,offer,proposer_payoff,responder_payoff");
    assert_eq!(rows[1], vec!["2", "2", "0.5", "0.375", "0.375"]);
    assert_eq!(rows.len(), 1 + 4 * 5);
    for k in 2..=5usize {
        let offers: Vec<f64> = rows[1..]
            .iter()
            .filter(|r| r[0] == k.to_string())
            .map(|r| r[2].parse().unwrap())
            .collect();
        assert!(offers.windows(2).all(|w| w[1] < w[0]), "K={k}: {offers:?}");
    }
}

#[test]
fn asymptotic_table() {
    let rows = csv_rows(&stdout(&mpmr(&["asymptotic", "--c-min", "0.5", "--c-max", "2", "--steps", "4"])));
    assert_eq!(rows[0].join(","), "c,offer,proposer_payoff,responder_payoff,one_minus_offer");
    let at_one = &rows[2];
    assert_eq!(at_one[0], "1");
    let vals: Vec<f64> = at_one.iter().map(|x| x.parse().unwrap()).collect();
    let e = std::f64::consts::E;
    for (got, want) in vals[1..].iter().zip([1.0 / (e - 1.0), 1.0 - 2.0 / e, 1.0 / e, 1.0 - 1.0 / (e - 1.0)]) {
        assert!((got - want).abs() < 1e-15);
    }
    let offers: Vec<f64> = rows[1..].iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(offers.windows(2).all(|w| w[1] > w[0]));

    let single = csv_rows(&stdout(&mpmr(&["asymptotic", "--c-min", "0.7", "--c-max", "3", "--steps", "1"])));
    assert_eq!(single.len(), 2);
    assert_eq!(single[1][0], "0.7");
}

#[test]
fn replicator_field_and_trajectory() {
    let rows = csv_rows(&stdout(&mpmr(&["replicator", "--s", "0.2", "--delta", "0.1", "--field", "50"])));
    assert_eq!(rows[0].join(","), "x1,x2,x3,dx1,dx2,dx3,magnitude");
    assert_eq!(rows.len(), 1 + 50 * 51 / 2);
    assert!(mpmr(&["replicator", "--s", "0.2", "--delta", "0", "--field", "10"]).status.success());

    let rows = csv_rows(&stdout(&mpmr(&["replicator"])));
    assert_eq!(rows[0].join(","), "t,x1,x2,x3,distance_to_line");
    let last = rows.last().unwrap();
    assert!(last[4].parse::<f64>().unwrap() <= 1e-6, "{last:?}");

    let bad = mpmr(&["replicator", "--x0", "0.5,0.5,0.5"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn simulate_is_reproducible() {
    let args = ["simulate", "--offers", "0.5,0.5", "-L", "2", "--ess", "--rounds", "200000", "--seed", "7"];
    let (a, b) = (mpmr(&args), mpmr(&args));
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_str(&stdout(&a)).unwrap();
    for role in ["proposer_payoffs", "responder_payoffs"] {
        for (m, se) in v["means"][role].as_array().unwrap().iter().zip(v["std_errors"][role].as_array().unwrap()) {
            assert!((m.as_f64().unwrap() - 0.375).abs() <= 3.0 * se.as_f64().unwrap());
        }
    }
    let other = mpmr(&["simulate", "--offers", "0.5,0.5", "-L", "2", "--ess", "--rounds", "200000", "--seed", "8"]);
    assert_ne!(a.stdout, other.stdout);
}

#[test]
fn simulate_with_profile_and_guards() {
    let v = json(&["simulate", "--offers", "0.3,0.6", "-L", "2", "--profile", "1,0;0,1", "--rounds", "1000"]);
    assert_eq!(v["means"]["proposer_payoffs"], serde_json::json!([0.7, 0.4]));
    let zero = mpmr(&["simulate", "--offers", "0.5,0.5", "-L", "2", "--ess", "--rounds", "0"]);
    assert_eq!(zero.status.code(), Some(2));
    let bad = mpmr(&["simulate", "--offers", "0.5,0.5", "-L", "2", "--profile", "0.5,0.6"]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn verify_symmetric_game() {
    let out = mpmr(&["verify", "--proposers", "2", "--responders", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["passed"], Value::Bool(true));
    assert!(v["checks"].as_array().unwrap().iter().all(|c| c["passed"] == Value::Bool(true)));
}

#[test]
fn verify_offers_reports_positive_gap() {
    let v = json(&["verify", "--offers", "0.2,0.3", "--responders", "2", "--grid", "101"]);
    let level1 = v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "ess_level1").unwrap();
    assert!(level1["value"].as_f64().unwrap() > 0.0);
}

#[test]
fn verify_wrong_candidate_fails() {
    let out = mpmr(&["verify", "--offers", "0.2,0.3", "--responders", "2", "--strategy", "0.5,0.5"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ess_level1"));
}

#[test]
fn json_round_trips_at_precision() {
    let text = stdout(&mpmr(&["sweep", "--k-max", "4", "--l-max", "4", "--format", "json", "--precision", "9"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    let again = serde_json::to_string_pretty(&v).unwrap() + "\n";
    assert_eq!(again, text);
    let offer = v[1]["offer"].as_f64().unwrap();
    assert_eq!(offer, 0.272727273);
}

#[test]
fn output_to_file_and_precision_bounds() {
    let dir = std::env::temp_dir().join(format!("mpmr-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("spne.json");
    let out = mpmr(&["spne", "-K", "2", "-L", "3", "--output", path.to_str().unwrap()]);
    assert!(out.status.success() && out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["offer"].as_f64(), Some(0.272727272727));
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(mpmr(&["spne", "-K", "2", "-L", "2", "--precision", "18"]).status.code(), Some(2));
}

#[test]
fn thread_cap_does_not_change_output() {
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_mpmr"))
            .args(["simulate", "--offers", "0.3,0.5,0.4", "-L", "3", "--ess", "--rounds", "100000", "--seed", "3"])
            .env("MPMR_THREADS", threads)
            .output()
            .unwrap()
    };
    let (one, four) = (run("1"), run("4"));
    assert!(one.status.success());
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(run("zero").status.code(), Some(2));
}

use klslab::harness::{
    parse_body, parse_profile, radial_moment, run, write_outputs, BodySpec, ExperimentConfig, ExperimentKind, Gates,
    ProfileSpec, Verdict,
};
use klslab::hexfloat::from_hex;
use klslab::Error;

fn small(kind: ExperimentKind) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::new(kind, 20_000, 3);
    cfg.dims = vec![2];
    cfg
}

#[test]
fn count_below_minimum_is_a_config_error() {
    let cfg = ExperimentConfig::new(ExperimentKind::VerifyDecomposition, 5_000, 1);
    assert!(matches!(run(&cfg), Err(Error::InvalidParameter(_))));
}

#[test]
fn every_row_records_the_seed() {
    let mut cfg = small(ExperimentKind::VerifyRadial);
    cfg.seed = 987_654_321;
    let report = run(&cfg).unwrap();
    assert!(!report.rows.is_empty());
    assert!(report.rows.iter().all(|r| r.seed == 987_654_321 && r.count == 20_000));
}

#[test]
fn exponential_rows_carry_the_gamma_anchor() {
    let mut cfg = small(ExperimentKind::VerifyRadial);
    cfg.profiles = vec![ProfileSpec::Exponential { beta: 1.0 }];
    cfg.dims = vec![1, 4];
    let report = run(&cfg).unwrap();
    for r in report.rows.iter().filter(|r| r.quantity.starts_with("n*Var")) {
        let want = r.n as f64 / (r.n as f64 + 1.0);
        assert!((r.expected.unwrap() - want).abs() < 1e-9);
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
    }
    assert!((radial_moment(ProfileSpec::Exponential { beta: 2.0 }, 3, 1) - 1.5).abs() < 1e-12);
}

#[test]
fn revolution_bodies_only_take_the_uniform_profile() {
    let mut cfg = small(ExperimentKind::KlsTable);
    cfg.bodies = vec![BodySpec::Cylinder { n: None }];
    let report = run(&cfg).unwrap();
    assert_eq!(report.kls_table.len(), 1);
    assert!(report.kls_table[0].profile.starts_with("uniform"));
}

#[test]
fn gauge_experiments_reject_revolution_bodies() {
    let mut cfg = small(ExperimentKind::VerifyDecomposition);
    cfg.bodies = vec![BodySpec::Cone { n: None }];
    assert!(run(&cfg).is_err());
}

#[test]
fn tight_gate_fails_but_report_is_complete() {
    let mut cfg = small(ExperimentKind::KlsTable);
    cfg.bodies = vec![parse_body("lp:2").unwrap()];
    cfg.profiles = vec![parse_profile("uniform").unwrap()];
    cfg.gates = Gates { ratio_gate: 0.5, se_gate: 4.0 };
    let report = run(&cfg).unwrap();
    assert!(!report.passed());
    assert_eq!(report.failures().count(), 1);
    assert_eq!(report.kls_table.len(), 1);
}

#[test]
fn outputs_are_written_with_hex_mirror() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(ExperimentKind::KlsTable);
    cfg.bodies = vec![parse_body("cube").unwrap()];
    cfg.profiles = vec![parse_profile("gauss").unwrap()];
    let report = run(&cfg).unwrap();
    write_outputs(&report, dir.path()).unwrap();

    let kls = std::fs::read_to_string(dir.path().join("kls_table.csv")).unwrap();
    let header = kls.lines().next().unwrap();
    assert!(header.starts_with(
        "body,profile,n,count,seed,lower_bound,se,kls_ratio,argmax_function,sum_var_bound,bobkov_bound"
    ));
    let plot = std::fs::read_to_string(dir.path().join("plotdata.csv")).unwrap();
    assert!(plot.starts_with("experiment,series,x,y,se\n"));
    assert_eq!(plot.lines().count(), report.rows.len() + 1);

    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let dec = json["report"]["rows"][0]["value"].as_f64().unwrap();
    let hex = json["hex"]["rows"][0]["value"].as_str().unwrap();
    assert_eq!(from_hex(hex).unwrap(), dec);
    assert_eq!(json["report"]["metadata"]["config"]["seed"], 3);
}

#[test]
fn condition_check_needs_no_draws() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::ConditionCheck, 0, 0);
    cfg.grid = Some(20);
    let report = run(&cfg).unwrap();
    assert!(report.passed());
    let flagged = report
        .rows
        .iter()
        .find(|r| r.body == "squared-sum" && r.quantity == "conditions hold")
        .unwrap();
    assert_eq!(flagged.value, 0.0);
    assert_eq!(flagged.count, 400);
}

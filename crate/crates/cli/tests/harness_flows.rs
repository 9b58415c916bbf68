//! Harness flows: presets, fair shared-demand evaluation, report assembly
//! and its refusal rules.

use std::collections::BTreeMap;

use dvsl_cli::config::{ExperimentConfig, Preset};
use dvsl_cli::controllers::ControllerArg;
use dvsl_cli::eval::{evaluate, EvalMetricsRow, EvalReport};
use dvsl_cli::report::{build_report, correlation_csv, load_limit_trace};
use dvsl_sim::HOURS_PER_PROFILE;

fn novsl() -> Vec<ControllerArg> {
    vec![ControllerArg::parse("novsl").unwrap()]
}

#[test]
fn preset_protocols_match_the_experiment_shapes() {
    let paper = ExperimentConfig::from_preset(Preset::Paper);
    assert_eq!(paper.scenario.control.episode_intervals, 1080);
    assert_eq!(paper.scenario.episode_steps(), 64800);
    assert_eq!(Preset::Paper.default_train_episodes(), 150);
    assert_eq!(Preset::Paper.default_eval_episodes(), 50);

    let desk = ExperimentConfig::from_preset(Preset::Desk);
    assert_eq!(desk.scenario.control.episode_intervals, 120);
    assert_eq!(Preset::Desk.default_train_episodes(), 30);
    assert_eq!(Preset::Desk.default_eval_episodes(), 10);
}

#[test]
fn empty_demand_eval_reports_zero_att_sentinel() {
    let mut cfg = ExperimentConfig::from_preset(Preset::Desk);
    cfg.scenario.control.episode_intervals = 5;
    cfg.scenario.demand.main_main = vec![0.0; HOURS_PER_PROFILE];
    cfg.scenario.demand.main_off = vec![0.0; HOURS_PER_PROFILE];
    cfg.scenario.demand.on_main = vec![0.0; HOURS_PER_PROFILE];
    let report = evaluate(&cfg, &novsl(), 2, 1, None).unwrap();
    let row = &report.controllers[0].mean;
    assert_eq!(row.att_s, 0.0);
    assert_eq!(row.r1, 0.0);
    assert_eq!(row.r3, 0.0);
    assert_eq!(row.r4, 0.0);
    assert_eq!(row.completed, 0.0);
}

#[test]
fn shared_demand_checksums_are_identical_across_controllers() {
    let mut cfg = ExperimentConfig::from_preset(Preset::Desk);
    cfg.scenario.control.episode_intervals = 10;
    let tmp = tempfile::tempdir().unwrap();
    // Two independent single-controller evals with the same seed must see
    // the same demand.
    let a = evaluate(&cfg, &novsl(), 3, 42, Some(tmp.path())).unwrap();
    let b = evaluate(&cfg, &novsl(), 3, 42, None).unwrap();
    assert_eq!(a.demand_checksums, b.demand_checksums);
    assert_eq!(a.demand_checksums.len(), 3);
    // Different seeds give different demand.
    let c = evaluate(&cfg, &novsl(), 3, 43, None).unwrap();
    assert_ne!(a.demand_checksums, c.demand_checksums);
}

fn report_with(label: &str, att: f64, co: f64, episodes: usize) -> EvalReport {
    let row = EvalMetricsRow {
        r1: -100.0,
        r2: 3000.0,
        r3: -50.0,
        r4: -600.0,
        co_kg: co,
        hc_kg: 5.0,
        nox_kg: 14.0,
        pmx_kg: 0.7,
        att_s: att,
        theta: 50.0,
        completed: 1000.0,
        residual: 10.0,
    };
    EvalReport {
        episodes,
        master_seed: 1,
        episode_intervals: 120,
        demand_checksums: vec!["00".into(); episodes],
        controllers: vec![dvsl_cli::eval::ControllerReport {
            label: label.to_string(),
            kind: "novsl".to_string(),
            mean: row.clone(),
            per_episode: vec![row; episodes],
        }],
    }
}

#[test]
fn single_controller_report_is_trivially_best_everywhere() {
    let report = build_report(&[report_with("only", 100.0, 50.0, 4)], &BTreeMap::new()).unwrap();
    for (_, labels) in &report.best {
        assert_eq!(labels, &vec!["only".to_string()]);
    }
    assert!(report.table.contains("*"));
}

#[test]
fn ties_mark_every_tied_controller() {
    let a = report_with("a", 100.0, 50.0, 4);
    let b = report_with("b", 100.0, 50.0, 4);
    let report = build_report(&[a, b], &BTreeMap::new()).unwrap();
    let best_att = &report.best["att_s"];
    assert!(best_att.contains(&"a".to_string()) && best_att.contains(&"b".to_string()));
}

#[test]
fn mixed_episode_counts_are_refused() {
    let a = report_with("a", 100.0, 50.0, 4);
    let b = report_with("b", 90.0, 40.0, 5);
    let err = build_report(&[a, b], &BTreeMap::new()).err().unwrap();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("episode counts"), "{err}");
}

#[test]
fn scaled_columns_follow_the_table_convention() {
    let report = report_with("x", 346.3, 2860.0, 1);
    let csv = dvsl_cli::eval::report_csv(&report);
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert!(header.starts_with("controller,r1_e3,r2_e3,r3_e3,r4_e7"));
    let row = lines.next().unwrap();
    let cells: Vec<&str> = row.split(',').collect();
    // r1 = -100 displays as -0.1 (x 10^3); r4 = -600 as -0.00006 (x 10^7).
    assert_eq!(cells[1].parse::<f64>().unwrap(), -0.1);
    assert_eq!(cells[4].parse::<f64>().unwrap(), -600.0 / 1e7);
}

#[test]
fn limit_traces_round_trip_and_feed_the_correlation_matrix() {
    let mut cfg = ExperimentConfig::from_preset(Preset::Desk);
    cfg.scenario.control.episode_intervals = 8;
    let tmp = tempfile::tempdir().unwrap();
    let report = evaluate(&cfg, &novsl(), 2, 9, Some(tmp.path())).unwrap();
    let trace = load_limit_trace(&tmp.path().join("limits_novsl.csv")).unwrap();
    assert_eq!(trace.len(), 8 * 5);
    assert!(trace.iter().all(|&v| v == 29.185));

    let mut traces = BTreeMap::new();
    traces.insert("novsl".to_string(), trace);
    traces.insert(
        "fake".to_string(),
        (0..40).map(|i| if i % 2 == 0 { 22.45 } else { 33.679 }).collect(),
    );
    let full = build_report(&[report], &traces).unwrap();
    assert_eq!(full.correlation.len(), 1);
    // The constant no-control trace has undefined correlation.
    assert!(full.correlation[0].coefficient.is_none());
    let csv = correlation_csv(&full.correlation);
    assert!(csv.contains("undefined"), "{csv}");
}

use std::fs;
use std::path::Path;
use std::process::Command;

use cautious::harness::{
    read_csv, run_reward_deaths, run_tightness, CellSummary, EpisodeRecord, Experiment, ExperimentConfig,
    GuardrailName, TightnessRecord,
};

fn small_config(experiment: Experiment) -> ExperimentConfig {
    ExperimentConfig {
        experiment,
        episodes: 12,
        d: 5,
        threshold_samples: 2000,
        alpha_list: vec![0.01, 0.5],
        master_seed: 11,
        ..Default::default()
    }
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn reward_deaths_csv_schema_and_aggregates() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_reward_deaths(&small_config(Experiment::RewardDeaths)).unwrap();
    let (csv, json) = report.write(dir.path()).unwrap();
    assert_eq!(header(&csv), "guardrail,C,alpha,episode,steps,total_reward,died,all_rejected,seed");

    let rows: Vec<EpisodeRecord> = read_csv(&csv).unwrap();
    assert_eq!(rows, report.records);
    assert_eq!(rows.len(), (3 * 3 + 2 * 3) * 12);
    for r in &rows {
        assert!(r.steps <= 25);
        assert!(!(r.died && r.all_rejected));
        assert_eq!(r.alpha.is_some(), r.guardrail == "cautious-set");
    }

    let recomputed = CellSummary::from_all(&rows);
    assert_eq!(recomputed, report.cells);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(json).unwrap()).unwrap();
    let from_json: Vec<CellSummary> = serde_json::from_value(summary["cells"].clone()).unwrap();
    assert_eq!(from_json, recomputed);
    assert_eq!(summary["config"]["C_list"], serde_json::json!([0.01, 0.033, 0.1]));
    assert!(summary["version"].as_str().unwrap().starts_with('v'));
}

#[test]
fn reward_deaths_is_byte_deterministic() {
    let cfg = small_config(Experiment::RewardDeaths);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let (ca, ja) = run_reward_deaths(&cfg).unwrap().write(a.path()).unwrap();
    let (cb, jb) = run_reward_deaths(&cfg).unwrap().write(b.path()).unwrap();
    assert_eq!(fs::read(ca).unwrap(), fs::read(cb).unwrap());
    assert_eq!(fs::read(ja).unwrap(), fs::read(jb).unwrap());
}

#[test]
fn records_depend_only_on_cell_and_episode() {
    let full = run_reward_deaths(&small_config(Experiment::RewardDeaths)).unwrap();
    // dropping cells and episodes must not perturb the rows that remain
    let mut cfg = small_config(Experiment::RewardDeaths);
    cfg.guardrails = vec![GuardrailName::PosteriorPredictive, GuardrailName::Cheating];
    cfg.episodes = 5;
    let part = run_reward_deaths(&cfg).unwrap();
    for r in &part.records {
        let same = full
            .records
            .iter()
            .find(|f| f.guardrail == r.guardrail && f.c == r.c && f.episode == r.episode)
            .unwrap();
        assert_eq!(r.steps, same.steps);
        assert_eq!(r.total_reward, same.total_reward);
        assert_eq!(r.died, same.died);
    }
}

#[test]
fn zero_episodes_gives_header_only() {
    let mut cfg = small_config(Experiment::RewardDeaths);
    cfg.episodes = 0;
    let dir = tempfile::tempdir().unwrap();
    let report = run_reward_deaths(&cfg).unwrap();
    assert!(report.cells.is_empty());
    let (csv, _) = report.write(dir.path()).unwrap();
    assert_eq!(fs::read_to_string(csv).unwrap().lines().count(), 1);
}

#[test]
fn tightness_csv_schema_and_invariants() {
    let cfg = small_config(Experiment::Tightness);
    let dir = tempfile::tempdir().unwrap();
    let report = run_tightness(&cfg).unwrap();
    let (csv, _) = report.write(dir.path()).unwrap();
    assert_eq!(header(&csv), "alpha,episode,t,action,estimate,true_harm,overestimated");
    let rows: Vec<TightnessRecord> = read_csv(&csv).unwrap();
    assert_eq!(rows, report.records);
    // death disabled: every episode runs the full horizon for every alpha
    assert_eq!(rows.len(), 12 * 25 * 2);
    for r in &rows {
        assert_eq!(r.overestimated, r.estimate >= r.true_harm);
    }
    for a in &report.alphas {
        assert!(a.overestimate_frequency >= a.guaranteed_frequency);
    }
    // a smaller alpha never gives a smaller estimate at the same step
    let (lo, hi): (Vec<_>, Vec<_>) = rows.iter().partition(|r| r.alpha == 0.01);
    for (a, b) in lo.iter().zip(&hi) {
        assert_eq!((a.episode, a.t, a.action), (b.episode, b.t, b.action));
        assert!(a.estimate >= b.estimate);
    }
    let b = tempfile::tempdir().unwrap();
    let (csv_b, _) = run_tightness(&cfg).unwrap().write(b.path()).unwrap();
    assert_eq!(fs::read(csv).unwrap(), fs::read(csv_b).unwrap());
}

#[test]
fn large_alpha_underestimates_dangerous_actions() {
    let cfg = ExperimentConfig {
        experiment: Experiment::Tightness,
        episodes: 200,
        alpha_list: vec![0.999],
        threshold_samples: 20_000,
        ..Default::default()
    };
    let report = run_tightness(&cfg).unwrap();
    let s = &report.alphas[0];
    assert!(s.bucket.count > 0);
    assert!(s.bucket.median_estimate.unwrap() < 0.5);
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cautious"))
}

#[test]
fn cli_runs_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"d": 4, "threshold_samples": 1000, "guardrails": ["cheating"]}"#).unwrap();
    let out = dir.path().join("out");
    let status = cli()
        .args(["run", "reward-deaths", "--config"])
        .arg(&config)
        .args(["--seed", "5", "--episodes", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let rows: Vec<EpisodeRecord> = read_csv(&out.join("reward_deaths.csv")).unwrap();
    assert_eq!(rows.len(), 9);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("reward_deaths_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["config"]["master_seed"], 5);
    assert_eq!(summary["config"]["episodes"], 3);
}

#[test]
fn cli_validate_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    let small = r#""supermartingale_sequences": 50, "supermartingale_horizon": 5, "bandit_dim": 2,
        "ville_sequences": 50, "ville_horizon": 10, "convergence_runs": 10, "convergence_horizon": 300,
        "first_symbol_draws": 500, "walk_sequences": 3, "walk_length": 100, "death_trials": 100,
        "exactness_cases": 5"#;
    // a 100-step walk almost never swings to both extremes, so this run must fail
    fs::write(&config, format!(r#"{{"validation": {{{small}}}}}"#)).unwrap();
    let out = dir.path().join("v");
    let status = cli().args(["run", "validate", "--config"]).arg(&config).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(2));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("validation.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], false);
    let first = &report["checks"][0];
    assert!(first["observed"].is_number() && first["bound"].is_number());
}

#[test]
fn cli_rejects_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"d": 0}"#).unwrap();
    let status = cli().args(["run", "tightness", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(1));
    fs::write(&config, r#"{"unknown_field": 1}"#).unwrap();
    let status = cli().args(["run", "tightness", "--config"]).arg(&config).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

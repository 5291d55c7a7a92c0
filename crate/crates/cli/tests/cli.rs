//! End-to-end tests of the `gridrl` binary: exit codes, artifact layout,
//! byte-level determinism, resume accounting, and the figure exports.
//!
//! Everything here spawns the real executable; in-process logic is covered
//! by the unit tests inside the library modules.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};
use std::time::Instant;

use gridrl_core::ddpg::{write_agent, Agent, AgentConfig, NoiseConfig, NoiseKind};
use gridrl_core::env::TRACE_HEADER;
use gridrl_core::scenario::Scenario;
use gridrl_core::types::Region;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gridrl"))
}

/// Absolute path to one of the packaged scenario files.
fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .canonicalize()
        .expect("packaged scenario exists")
        .display()
        .to_string()
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("process not killed by signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn assert_success(out: &Output) {
    assert!(
        out.status.success(),
        "command failed\nstdout:\n{}\nstderr:\n{}",
        stdout(out),
        stderr(out)
    );
}

/// Train a small, fast run and return the command output.
fn train(dir: &Path, scenario_file: &str, seed: u64, iterations: u64, samples: u64) -> Output {
    bin()
        .args([
            "train",
            "--scenario",
            &scenario(scenario_file),
            "--seed",
            &seed.to_string(),
            "--iterations",
            &iterations.to_string(),
            "--samples",
            &samples.to_string(),
            "--hidden",
            "16x16",
            "--fixed-clock",
            "--out",
        ])
        .arg(dir)
        .output()
        .expect("spawn train")
}

/// Data rows of a CSV file (header dropped), split into cells.
fn csv_rows(path: &Path, expected_header: &str) -> Vec<Vec<String>> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(expected_header), "{}", path.display());
    lines
        .filter(|l| !l.is_empty())
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const METRICS_HEADER: &str =
    "iteration,env_steps_total,reward_min,reward_mean,reward_max,critic_loss,wall_seconds";

/// Rows of a sweep comparison table as (label, remaining cells). The label
/// is double-quoted in the file because it contains a comma.
fn comparison_rows(path: &Path) -> Vec<(String, Vec<String>)> {
    let text = fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("label,status,iterations,env_steps_total,final_reward_mean"),
        "{}",
        path.display()
    );
    lines
        .filter(|l| !l.is_empty())
        .map(|line| {
            assert!(line.starts_with('"'), "unquoted label in {line}");
            let end = line[1..].find('"').expect("closing quote") + 1;
            let label = line[1..end].to_string();
            let rest = line[end + 2..].split(',').map(str::to_string).collect();
            (label, rest)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exit codes and argument handling
// ---------------------------------------------------------------------------

#[test]
fn help_exits_zero_and_prints_usage() {
    for args in [vec!["--help"], vec!["train", "--help"], vec!["sweep", "--help"]] {
        let out = bin().args(&args).output().unwrap();
        assert_eq!(exit_code(&out), 0, "{args:?}");
        assert!(stdout(&out).contains("Usage"), "{args:?}");
    }
}

#[test]
fn unknown_flags_and_subcommands_are_usage_errors() {
    let out = bin().args(["train", "--frobnicate"]).output().unwrap();
    assert_eq!(exit_code(&out), 1);
    assert!(stderr(&out).contains("Usage") || stderr(&out).contains("usage"));

    let out = bin().arg("trian").output().unwrap();
    assert_eq!(exit_code(&out), 1);

    let out = bin().output().unwrap();
    assert_eq!(exit_code(&out), 1);
}

#[test]
fn missing_scenario_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["train", "--scenario", "/no/such/scenario.toml", "--out"])
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("not found"), "{}", stderr(&out));
}

#[test]
fn malformed_scenario_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[horizon\nstart_year = oops").unwrap();
    let out = bin()
        .args(["train", "--scenario"])
        .arg(&bad)
        .arg("--out")
        .arg(dir.path().join("run"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

#[test]
fn train_smoke_writes_manifest_metrics_and_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let started = Instant::now();
    let out = train(&run, "desk.toml", 0, 2, 500);
    let elapsed = started.elapsed();
    assert_success(&out);
    assert!(
        elapsed.as_secs() < 60,
        "smoke train took {elapsed:?}, budget is one minute"
    );

    // Manifest records the command, seed, and a content hash of the scenario.
    let manifest = fs::read_to_string(run.join("manifest.toml")).unwrap();
    assert!(manifest.contains("command = \"train\""));
    assert!(manifest.contains("seed = 0"));
    let sha_line = manifest
        .lines()
        .find(|l| l.starts_with("sha256"))
        .expect("manifest carries the scenario hash");
    assert_eq!(sha_line.split('"').nth(1).map(str::len), Some(64));

    // Two metrics rows with strictly increasing step counters.
    let rows = csv_rows(&run.join("metrics.csv"), METRICS_HEADER);
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][0], "1");
    assert_eq!(rows[1][0], "2");
    let steps: Vec<u64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(steps[1] > steps[0]);

    for name in ["checkpoint_latest.bin", "ckpt_final.bin"] {
        assert!(run.join("checkpoints").join(name).is_file(), "{name}");
    }
    assert!(stdout(&out).contains("done: 2 iterations"));
}

#[test]
fn identical_train_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    assert_success(&train(&a, "sweep.toml", 7, 2, 200));
    assert_success(&train(&b, "sweep.toml", 7, 2, 200));
    assert_success(&train(&c, "sweep.toml", 8, 2, 200));

    let metrics = |d: &Path| fs::read(d.join("metrics.csv")).unwrap();
    let ckpt = |d: &Path| fs::read(d.join("checkpoints/ckpt_final.bin")).unwrap();
    assert_eq!(metrics(&a), metrics(&b), "same seed, different metrics bytes");
    assert_eq!(ckpt(&a), ckpt(&b), "same seed, different checkpoint bytes");
    assert_ne!(metrics(&a), metrics(&c), "different seed left no trace in metrics");
}

#[test]
fn resume_continues_the_metrics_log_without_gaps() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_success(&train(&run, "sweep.toml", 3, 2, 200));
    let first: Vec<u64> = csv_rows(&run.join("metrics.csv"), METRICS_HEADER)
        .iter()
        .map(|r| r[1].parse().unwrap())
        .collect();

    let out = bin()
        .args([
            "train",
            "--scenario",
            &scenario("sweep.toml"),
            "--seed",
            "3",
            "--iterations",
            "4",
            "--samples",
            "200",
            "--hidden",
            "16x16",
            "--fixed-clock",
            "--resume",
        ])
        .arg(run.join("checkpoints/ckpt_final.bin"))
        .arg("--out")
        .arg(&run)
        .output()
        .unwrap();
    assert_success(&out);

    let rows = csv_rows(&run.join("metrics.csv"), METRICS_HEADER);
    assert_eq!(rows.len(), 4, "resume should append, not restart");
    let iterations: Vec<u64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(iterations, vec![1, 2, 3, 4]);
    let steps: Vec<u64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(steps[0], first[0]);
    assert_eq!(steps[1], first[1]);
    // Every iteration collects the same episode count on this scenario, so
    // the counter keeps advancing by the stride it had before the restart.
    let stride = steps[1] - steps[0];
    assert_eq!(steps[2], steps[1] + stride);
    assert_eq!(steps[3], steps[2] + stride);
}

#[test]
fn resume_with_a_different_architecture_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_success(&train(&run, "sweep.toml", 0, 1, 200));
    let out = bin()
        .args([
            "train",
            "--scenario",
            &scenario("sweep.toml"),
            "--iterations",
            "2",
            "--samples",
            "200",
            "--hidden",
            "24x24",
            "--resume",
        ])
        .arg(run.join("checkpoints/ckpt_final.bin"))
        .arg("--out")
        .arg(dir.path().join("other"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2, "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

#[test]
fn evaluate_writes_traces_and_a_simplex_consistent_summary() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_success(&train(&run, "desk.toml", 0, 1, 200));

    let eval = dir.path().join("eval");
    let evaluate = |out_dir: &Path| {
        bin()
            .args([
                "evaluate",
                "--checkpoint",
            ])
            .arg(run.join("checkpoints/ckpt_final.bin"))
            .args(["--scenario", &scenario("desk.toml"), "--episodes", "3", "--out"])
            .arg(out_dir)
            .output()
            .unwrap()
    };
    let out = evaluate(&eval);
    assert_success(&out);

    // One trace per episode, with the documented header and 10 columns.
    for episode in 0..3 {
        let path = eval.join(format!("trace_ep{episode:03}.csv"));
        let rows = csv_rows(&path, TRACE_HEADER);
        assert!(!rows.is_empty());
        for row in &rows {
            assert_eq!(row.len(), 10);
        }
    }

    // The summary's final-year mix is a simplex vector.
    let summary: toml::Value =
        toml::from_str(&fs::read_to_string(eval.join("summary.toml")).unwrap()).unwrap();
    let mix = summary["final_year_mix"].as_table().unwrap();
    assert_eq!(mix.len(), 8);
    let total: f64 = mix.values().map(|v| v.as_float().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-9, "mix sums to {total}");
    assert!(mix.values().all(|v| v.as_float().unwrap() >= 0.0));

    // Noise-free evaluation is deterministic: re-running reproduces the
    // summary byte for byte.
    let again = dir.path().join("eval2");
    assert_success(&evaluate(&again));
    assert_eq!(
        fs::read(eval.join("summary.toml")).unwrap(),
        fs::read(again.join("summary.toml")).unwrap()
    );
}

#[test]
fn evaluate_rejects_a_checkpoint_with_foreign_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    // An agent sized for the 1-D self-test task, not this environment.
    let config = AgentConfig {
        observation_dim: 1,
        action_dim: 1,
        actor_hidden: vec![8],
        critic_hidden: vec![8],
        actor_learning_rate: 1.0e-3,
        critic_learning_rate: 1.0e-2,
        discount: 0.95,
        soft_update_tau: 0.02,
        minibatch: 8,
        replay_capacity: 64,
        warmup_steps: 8,
        samples_per_iteration: 8,
        update_every: 1,
        noise: NoiseConfig {
            kind: NoiseKind::OrnsteinUhlenbeck,
            theta: 0.15,
            sigma_initial: 0.4,
            sigma_final: 0.05,
            anneal_steps: 100,
        },
    };
    let agent = Agent::new(config, 0).unwrap();
    let path = dir.path().join("toy.bin");
    let mut file = fs::File::create(&path).unwrap();
    write_agent(&agent, &mut file).unwrap();
    drop(file);

    let out = bin()
        .args(["evaluate", "--checkpoint"])
        .arg(&path)
        .args(["--scenario", &scenario("desk.toml"), "--out"])
        .arg(dir.path().join("eval"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("incompatible"), "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// baseline
// ---------------------------------------------------------------------------

/// Total fleet capacity per year from a long-format trace, years ascending.
fn capacity_by_year(trace: &Path) -> Vec<(i32, f64)> {
    let mut totals: Vec<(i32, f64)> = Vec::new();
    for row in csv_rows(trace, TRACE_HEADER) {
        let year: i32 = row[0].parse().unwrap();
        let capacity: f64 = row[4].parse().unwrap();
        assert!(capacity >= 0.0, "negative capacity in year {year}");
        match totals.last_mut() {
            Some((y, total)) if *y == year => *total += capacity,
            _ => totals.push((year, capacity)),
        }
    }
    totals
}

#[test]
fn zero_investment_baseline_only_retires_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "baseline",
            "--scenario",
            &scenario("desk.toml"),
            "--continuation",
            "zero-investment",
            "--out",
        ])
        .arg(dir.path().join("base"))
        .output()
        .unwrap();
    assert_success(&out);

    let totals = capacity_by_year(&dir.path().join("base/trace.csv"));
    assert_eq!(totals.first().map(|t| t.0), Some(2007));
    assert_eq!(totals.last().map(|t| t.0), Some(2029));
    // After the control handoff nothing is built, so the fleet decays
    // monotonically.
    let control: Vec<f64> = totals
        .iter()
        .filter(|(y, _)| *y >= 2017)
        .map(|(_, c)| *c)
        .collect();
    for pair in control.windows(2) {
        assert!(pair[1] <= pair[0] + 1e-12, "capacity grew: {pair:?}");
    }
    assert!(control.last().unwrap() < control.first().unwrap());
}

#[test]
fn diffusion_baseline_writes_the_same_schema_with_positive_fleet() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args([
            "baseline",
            "--scenario",
            &scenario("sweep.toml"),
            "--continuation",
            "diffusion",
            "--out",
        ])
        .arg(dir.path().join("base"))
        .output()
        .unwrap();
    assert_success(&out);

    for (year, total) in capacity_by_year(&dir.path().join("base/trace.csv")) {
        assert!(total > 0.0, "fleet vanished in {year}");
    }
    let summary: toml::Value =
        toml::from_str(&fs::read_to_string(dir.path().join("base/summary.toml")).unwrap())
            .unwrap();
    assert_eq!(summary["continuation"].as_str(), Some("diffusion"));
    let mix_total: f64 = summary["final_year_mix"]
        .as_table()
        .unwrap()
        .values()
        .map(|v| v.as_float().unwrap())
        .sum();
    assert!((mix_total - 1.0).abs() < 1e-9);
}

// ---------------------------------------------------------------------------
// export-figures
// ---------------------------------------------------------------------------

#[test]
fn export_figures_emits_every_series_from_a_complete_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    assert_success(&train(&run, "desk.toml", 0, 2, 200));
    let out = bin()
        .args(["evaluate", "--checkpoint"])
        .arg(run.join("checkpoints/ckpt_final.bin"))
        .args(["--scenario", &scenario("desk.toml"), "--episodes", "1", "--out"])
        .arg(&run)
        .output()
        .unwrap();
    assert_success(&out);

    let out = bin()
        .args(["export-figures", "--svg", "--run"])
        .arg(&run)
        .output()
        .unwrap();
    assert_success(&out);
    assert!(!stdout(&out).contains("missing inputs"), "{}", stdout(&out));

    // Reward figure: order statistics hold row by row.
    for row in csv_rows(&run.join("fig_reward.csv"), "iteration,reward_min,reward_mean,reward_max")
    {
        let min: f64 = row[1].parse().unwrap();
        let mean: f64 = row[2].parse().unwrap();
        let max: f64 = row[3].parse().unwrap();
        assert!(min <= mean && mean <= max, "{row:?}");
    }

    // Mix figure: every year is a simplex row over the eight technologies.
    let mix_header = "year,coal,ccgt,oil,nuclear,onshore-wind,offshore-wind,solar-pv,wave";
    let mix_rows = csv_rows(&run.join("fig_mix.csv"), mix_header);
    assert_eq!(mix_rows.first().map(|r| r[0].as_str()), Some("2007"));
    for row in &mix_rows {
        let total: f64 = row[1..].iter().map(|v| v.parse::<f64>().unwrap()).sum();
        assert!((total - 1.0).abs() < 1e-9, "mix row {row:?} sums to {total}");
    }

    // Emissions figure: non-negative additions, non-decreasing cumulative.
    let mut last_cumulative = 0.0;
    for row in csv_rows(&run.join("fig_emissions.csv"), "year,co2_added_Gt,cumulative_co2_Gt") {
        let added: f64 = row[1].parse().unwrap();
        let cumulative: f64 = row[2].parse().unwrap();
        assert!(added >= -1e-15, "{row:?}");
        assert!(cumulative >= last_cumulative - 1e-15, "{row:?}");
        last_cumulative = cumulative;
    }

    // Demand figure reproduces the scenario series exactly.
    let loaded = Scenario::from_path(Path::new(&scenario("desk.toml"))).unwrap();
    let demand_rows = csv_rows(&run.join("fig_demand.csv"), "year,region,quarter,demand_MWh");
    assert_eq!(demand_rows.len(), (2030 - 2007) * 2 * 4);
    for row in &demand_rows {
        let year: i32 = row[0].parse().unwrap();
        let region = Region::ALL
            .into_iter()
            .find(|r| r.key() == row[1])
            .expect("region key");
        let quarter: usize = row[2].parse::<usize>().unwrap() - 1;
        let demand: f64 = row[3].parse().unwrap();
        let expected = loaded.regions[region].demand.quarter(year, quarter).unwrap();
        assert_eq!(demand, expected, "{row:?}");
    }

    for name in ["fig_reward.svg", "fig_mix.svg", "fig_emissions.svg", "fig_demand.svg"] {
        let svg = fs::read_to_string(run.join(name)).unwrap();
        assert!(svg.starts_with("<svg"), "{name}");
        assert!(svg.ends_with("</svg>\n") || svg.ends_with("</svg>"), "{name}");
    }
}

#[test]
fn export_figures_names_whats_missing() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    // Metrics only: reward figure works, the rest are reported missing.
    assert_success(&train(&run, "sweep.toml", 0, 1, 200));
    fs::remove_file(run.join("manifest.toml")).unwrap();
    let out = bin().args(["export-figures", "--run"]).arg(&run).output().unwrap();
    assert_success(&out);
    let text = stdout(&out);
    assert!(text.contains("fig_reward.csv"), "{text}");
    assert!(text.contains("missing inputs:"), "{text}");
    assert!(text.contains("fig_demand"), "{text}");

    // A directory with nothing usable is a hard error.
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let out = bin().args(["export-figures", "--run"]).arg(&empty).output().unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("missing inputs"), "{}", stderr(&out));
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

#[test]
fn sweep_single_entry_grid_produces_one_labelled_row() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = bin()
        .args([
            "sweep",
            "--scenario",
            &scenario("sweep.toml"),
            "--grid",
            "16x16",
            "--iterations",
            "2",
            "--samples",
            "200",
            "--fixed-clock",
            "--out",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_success(&out);

    let rows = comparison_rows(&out_dir.join("comparison.csv"));
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].0, "[16, 16]");
    assert_eq!(rows[0].1[0], "ok");
    assert_eq!(rows[0].1[1], "2");

    // The per-configuration directory is a normal training run.
    let config_dir = out_dir.join("hidden_16x16");
    assert!(config_dir.join("metrics.csv").is_file());
    assert!(config_dir.join("manifest.toml").is_file());
    assert!(config_dir.join("checkpoints/ckpt_final.bin").is_file());
    assert_eq!(csv_rows(&config_dir.join("metrics.csv"), METRICS_HEADER).len(), 2);
}

#[test]
fn sweep_thread_count_comes_from_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .env("GRIDRL_THREADS", "not-a-number")
        .args(["sweep", "--scenario", &scenario("sweep.toml"), "--grid", "8", "--out"])
        .arg(dir.path().join("bad"))
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    assert!(stderr(&out).contains("GRIDRL_THREADS"), "{}", stderr(&out));

    let out_dir = dir.path().join("sweep");
    let out = bin()
        .env("GRIDRL_THREADS", "2")
        .args([
            "sweep",
            "--scenario",
            &scenario("sweep.toml"),
            "--grid",
            "8,12",
            "--iterations",
            "1",
            "--samples",
            "100",
            "--fixed-clock",
            "--out",
        ])
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_success(&out);
    let rows = comparison_rows(&out_dir.join("comparison.csv"));
    // Rows come back in grid order even when workers finish out of order.
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].0, "[8]");
    assert_eq!(rows[1].0, "[12]");
}

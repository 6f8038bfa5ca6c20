//! End-to-end checks of the command-line interface: exit codes, file
//! outputs and reruns.

use std::path::{Path, PathBuf};
use std::process::Command;

fn needs(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_needs"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn workdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("needs-cli-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_model_config(dir: &Path) -> PathBuf {
    let path = dir.join("model.toml");
    std::fs::write(
        &path,
        r#"
[model]
gamma = 1.2
rho1 = 30.0
rho2 = 30.0
rho3 = 15.0
[model.production]
type = "linear"
q0 = 0.0
p1 = 0.5
q2 = 0.4

[scenario]
preset = "benchmark"
"#,
    )
    .unwrap();
    path
}

#[test]
fn solve_benchmark_writes_valid_json() {
    let dir = workdir("solve");
    let config = write_model_config(&dir);
    let out_path = dir.join("result.json");
    let out = needs(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let result: needs_core::SolveResult =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!(result.objective.is_finite());
    assert_eq!(result.weeks, 1);
    assert!(result.trajectory.safety_stock.abs() < 1e-9);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("objective"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn conditioned_solve_with_empty_pattern_exits_3() {
    let dir = workdir("infeasible");
    let config = write_model_config(&dir);
    let pattern = dir.join("pattern.json");
    std::fs::write(
        &pattern,
        r#"{"delta": [false, false, false, false, false, false, false],
            "locations": [0, 0, 0, 0, 0, 0, 0]}"#,
    )
    .unwrap();
    let out = needs(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--conditioned",
        pattern.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn multiweek_on_profitable_instance_reports_one_week() {
    let dir = workdir("multiweek");
    let config = write_model_config(&dir);
    let out_path = dir.join("result.json");
    let out = needs(&[
        "solve",
        "--config",
        config.to_str().unwrap(),
        "--multiweek",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let result: needs_core::SolveResult =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(result.weeks, 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn malformed_config_exits_2() {
    let dir = workdir("badconfig");
    let config = dir.join("bad.toml");
    std::fs::write(&config, "[model]\nnot_a_field = 1\n").unwrap();
    let out = needs(&["solve", "--config", config.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = needs(&["nonsense-subcommand"]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn synth_emits_data_bundle_and_summary() {
    let dir = workdir("synth");
    let out_dir = dir.join("data");
    let out = needs(&[
        "synth", "--preset", "grocery", "--persons", "25", "--zones", "4", "--seed", "5",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for file in ["scenario.json", "observations.csv", "persons.csv", "summary.json"] {
        assert!(out_dir.join(file).exists(), "missing {file}");
    }
    // The bundle round-trips through the reader.
    let observations = needs_core::io::read_observations(&out_dir).unwrap();
    assert!(!observations.is_empty());
    let scenario: needs_core::empirical::ZoneScenario =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("scenario.json")).unwrap())
            .unwrap();
    for obs in &observations {
        obs.validate(scenario.n_zones()).unwrap();
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn ecommerce_synth_runs() {
    let dir = workdir("ecom");
    let out_dir = dir.join("data");
    let out = needs(&[
        "synth", "--preset", "ecommerce", "--persons", "30", "--seed", "2",
        "--out-dir", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["mean_oneway_travel_minutes"], 0.0);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn loglik_surface_writes_plot_ready_csv() {
    let dir = workdir("surface");
    let data_dir = dir.join("data");
    assert!(needs(&[
        "synth", "--preset", "grocery", "--persons", "12", "--zones", "3", "--seed", "8",
        "--out-dir", data_dir.to_str().unwrap(),
    ])
    .status
    .success());

    let config = dir.join("pop.toml");
    std::fs::write(
        &config,
        r#"
[population]
mu_rho1 = 3.0
mu_kappa = 1.0
mu_q0 = -0.5
var_rho1 = 1.0
var_kappa = 0.25
var_q0 = 0.25
gamma = 1.2
p1 = 0.8
q2 = 0.5
mu = 0.2
beta = [0.5, 1.0]
sigma_nest = 5.0
sigma_dur = 0.2

[estimation]
draws = 25
alternatives = 24
"#,
    )
    .unwrap();

    let csv_path = dir.join("surface.csv");
    let out = needs(&[
        "loglik",
        "--data",
        data_dir.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--seed",
        "4",
        "--surface",
        "p1=0.7:0.9:3",
        "--surface",
        "q2=0.4:0.6:3",
        "--out-csv",
        csv_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("p1,q2,loglik"));
    assert_eq!(lines.count(), 9);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimate_trace_respects_budget() {
    let dir = workdir("estimate");
    let data_dir = dir.join("data");
    assert!(needs(&[
        "synth", "--preset", "grocery", "--persons", "12", "--zones", "3", "--seed", "8",
        "--out-dir", data_dir.to_str().unwrap(),
    ])
    .status
    .success());
    let config = dir.join("pop.toml");
    std::fs::write(
        &config,
        r#"
[population]
mu_rho1 = 3.0
mu_kappa = 1.0
mu_q0 = -0.5
var_rho1 = 1.0
var_kappa = 0.25
var_q0 = 0.25
gamma = 1.2
p1 = 0.8
q2 = 0.5
mu = 0.2
beta = [0.5, 1.0]
sigma_nest = 5.0
sigma_dur = 0.2

[estimation]
draws = 40
alternatives = 24
"#,
    )
    .unwrap();
    let out_dir = dir.join("est");
    let out = needs(&[
        "estimate",
        "--data",
        data_dir.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "--free",
        "p1,q2",
        "--budget",
        "4",
        "--seed",
        "4",
        "--out-dir",
        out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let trace = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    let rows = trace.lines().count() - 1;
    assert!(rows >= 1 && rows <= 4, "trace rows {rows}");
    assert!(trace.lines().next().unwrap().starts_with("iteration,loglik,p1,q2"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn verify_solver_suite_passes_quickly() {
    let out = needs(&["verify", "--suite", "solver", "--instances", "40", "--seed", "3"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[PASS]"), "{stdout}");
    assert!(stdout.contains("verification passed"));
}

#[test]
fn synth_presets_rerun_byte_identically() {
    // Golden-file style: grocery tiny, ecommerce, and the default-tier
    // grocery run all reproduce byte for byte under the same seed.
    let dir = workdir("golden");
    let cases: [(&str, &[&str]); 3] = [
        ("tiny", &["synth", "--preset", "grocery", "--persons", "10", "--zones", "3", "--seed", "1"]),
        ("ecom", &["synth", "--preset", "ecommerce", "--persons", "40", "--seed", "1"]),
        ("groc", &["synth", "--preset", "grocery", "--persons", "60", "--zones", "6", "--seed", "9"]),
    ];
    for (tag, args) in cases {
        let out_a = dir.join(format!("{tag}-a"));
        let out_b = dir.join(format!("{tag}-b"));
        for out_dir in [&out_a, &out_b] {
            let mut full: Vec<&str> = args.to_vec();
            full.push("--out-dir");
            full.push(out_dir.to_str().unwrap());
            assert!(needs(&full).status.success());
        }
        for file in ["observations.csv", "persons.csv", "scenario.json", "summary.json"] {
            let a = std::fs::read(out_a.join(file)).unwrap();
            let b = std::fs::read(out_b.join(file)).unwrap();
            assert_eq!(a, b, "{tag}/{file} differs between reruns");
        }
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn estimating_a_parameter_absent_from_the_config_exits_2() {
    let dir = workdir("badfree");
    let data_dir = dir.join("data");
    assert!(needs(&[
        "synth", "--preset", "grocery", "--persons", "8", "--zones", "3", "--seed", "8",
        "--out-dir", data_dir.to_str().unwrap(),
    ])
    .status
    .success());
    let config = dir.join("pop.toml");
    std::fs::write(
        &config,
        r#"
[population]
mu_rho1 = 3.0
mu_kappa = 1.0
mu_q0 = -0.5
var_rho1 = 1.0
var_kappa = 0.25
var_q0 = 0.25
gamma = 1.2
p1 = 0.8
q2 = 0.5
mu = 0.2
beta = [0.5, 1.0]
sigma_nest = 5.0
sigma_dur = 0.2
"#,
    )
    .unwrap();
    // q1 only exists under Cobb-Douglas production; the config is linear.
    let out = needs(&[
        "estimate", "--data", data_dir.to_str().unwrap(), "--config", config.to_str().unwrap(),
        "--free", "q1", "--budget", "1", "--out-dir", dir.join("x").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn riskbound(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_riskbound"))
        .args(args)
        .current_dir(dir)
        .env("RISKBOUND_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let idx = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().to_owned()).collect()
}

const CUBE: &str = r#"
experiment = "rate"
seed = 5
scenario.name = "cube"
scenario.n_coords = 15
plan.n_sweep = [256]
plan.replicates = 8
"#;

const FINITE_DIM: &str = r#"
experiment = "rate"
seed = 11
scenario.name = "finite_dim"
scenario.d = 3
method.name = "erm"
plan.n_sweep = [64, 128, 256, 512, 1024, 2048, 4096]
plan.replicates = 50
"#;

#[test]
fn cube_excess_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cube.toml", CUBE);
    let out = riskbound(&["run", &cfg, "--out-dir", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("out/rate.csv")).unwrap();
    let excess = column(&csv, "excess");
    assert_eq!(excess.len(), 8);
    assert!(excess.iter().all(|e| e.parse::<f64>().unwrap() == 0.0));
    assert!(excess.iter().all(|e| e == "0.0000000000000000e0"));
    assert!(String::from_utf8_lossy(&out.stdout).lines().count() == 1);
}

#[test]
fn malformed_config_exits_2_without_artifacts() {
    let dir = TempDir::new().unwrap();
    for (i, text) in [
        "experiment = \"rate\"\nscenario.name = \"cube\"\n",
        &format!("{CUBE}plan.colour = 3\n"),
        "this is not toml",
        &CUBE.replace("n_coords", "n_coord"),
    ]
    .iter()
    .enumerate()
    {
        let cfg = write(dir.path(), &format!("bad{i}.toml"), text);
        let out = riskbound(&["run", &cfg, "--out-dir", "out"], dir.path());
        assert_eq!(out.status.code(), Some(2), "config {i}");
        assert!(!dir.path().join("out").exists(), "config {i}");
    }
}

#[test]
fn runs_are_reproducible_and_seed_overrides() {
    let dir = TempDir::new().unwrap();
    let text = FINITE_DIM.replace("[64, 128, 256, 512, 1024, 2048, 4096]", "[64, 128]").replace("= 50", "= 5");
    let cfg = write(dir.path(), "fd.toml", &text);
    let runs: Vec<Vec<u8>> = ["a", "b"]
        .iter()
        .map(|d| {
            assert!(riskbound(&["run", &cfg, "--out-dir", d], dir.path()).status.success());
            std::fs::read(dir.path().join(d).join("rate.csv")).unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert!(riskbound(&["run", &cfg, "--out-dir", "c", "--seed", "12"], dir.path()).status.success());
    assert_ne!(std::fs::read(dir.path().join("c/rate.csv")).unwrap(), runs[0]);
}

#[test]
fn finite_dim_rate_and_plot_round_trip() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "fd.toml", FINITE_DIM);
    let out = riskbound(&["run", &cfg, "--out-dir", "out"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let json = std::fs::read_to_string(dir.path().join("out/summary.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    let slope = v["slope"].as_f64().unwrap();
    assert!((-1.2..=-0.8).contains(&slope), "slope {slope}");

    assert!(riskbound(&["plot", "out/summary.json"], dir.path()).status.success());
    let first = std::fs::read(dir.path().join("out/summary.svg")).unwrap();
    let reparsed = serde_json::to_string(&v).unwrap();
    write(dir.path(), "again.json", &reparsed);
    assert!(riskbound(&["plot", "again.json", "--out", "again.svg"], dir.path()).status.success());
    assert_eq!(first, std::fs::read(dir.path().join("again.svg")).unwrap());
    assert!(String::from_utf8_lossy(&first).contains("fitted slope"));
}

#[test]
fn ordering_summary_plots_bars() {
    let dir = TempDir::new().unwrap();
    let text = r#"
experiment = "ordering"
seed = 3
scenario.name = "finite_dim"
scenario.d = 2
plan.n = 128
plan.t = 2.0
plan.trials = 6
plan.phi_replicates = 40
method.sign_draws = 16
"#;
    let cfg = write(dir.path(), "ord.toml", text);
    let out = riskbound(&["run", &cfg], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(column(&std::fs::read_to_string(dir.path().join("ordering.csv")).unwrap(), "ordered").len(), 6);
    assert!(riskbound(&["plot", "summary.json", "--out", "bars.svg"], dir.path()).status.success());
    let svg = std::fs::read_to_string(dir.path().join("bars.svg")).unwrap();
    assert!(svg.contains("delta_bar") && svg.contains("delta_tilde"));
}

#[test]
fn empty_summary_is_rejected() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "empty.json", "{}");
    let out = riskbound(&["plot", "empty.json"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
    assert!(!dir.path().join("empty.svg").exists());
}

#[test]
fn unavailable_method_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "k.toml", &CUBE.replace("scenario.name", "method.name = \"kernel\"\nscenario.name"));
    let out = riskbound(&["run", &cfg, "--out-dir", "out"], dir.path());
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("out").exists());
}

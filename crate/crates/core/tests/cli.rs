use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use collapse_lab::lab::parse_grid;
use serde_json::Value;
use tempfile::TempDir;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_collapse-lab")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = lab(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn baird(dir: &TempDir) -> PathBuf {
    let data = dir.path().join("baird");
    ok(&["gen-data", "--fixture", "baird", "--out", s(&data)]);
    data
}

/// CSV rows as maps from column name to field.
fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_path(path).unwrap();
    let head = r.headers().unwrap().clone();
    r.records().map(|rec| head.iter().map(String::from).zip(rec.unwrap().iter().map(String::from)).collect()).collect()
}

fn num(row: &std::collections::HashMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("{col} = {:?}", row[col]))
}

#[test]
fn gen_data_writes_requested_size_deterministically() {
    let dir = TempDir::new().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        ok(&["gen-data", "--states", "8", "--actions", "4", "--size", "256", "--seed", "0", "--out", s(out)]);
    }
    let text = fs::read_to_string(a.join("dataset.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 257);
    for f in ["dataset.jsonl", "features.json", "mdp.json", "scores.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let scores: Value = serde_json::from_slice(&fs::read(a.join("scores.json")).unwrap()).unwrap();
    assert!(scores["r_expert"].as_f64().unwrap() > scores["r_random"].as_f64().unwrap());
}

#[test]
fn baird_fixture_files() {
    let dir = TempDir::new().unwrap();
    let data = baird(&dir);
    assert_eq!(fs::read_to_string(data.join("dataset.jsonl")).unwrap().lines().count(), 7);
    let critic: Value = serde_json::from_slice(&fs::read(data.join("critic.json")).unwrap()).unwrap();
    let params = critic["params"].as_object().unwrap();
    assert_eq!(params.values().map(|b| b.as_array().unwrap().len()).sum::<usize>(), 14);
    assert_eq!(lab(&["gen-data", "--fixture", "nope", "--out", s(&dir.path().join("x"))]).status.code(), Some(2));
}

#[test]
fn adamo_without_orthogonality_matches_adam_bytewise() {
    let dir = TempDir::new().unwrap();
    let data = dir.path().join("data");
    ok(&["gen-data", "--states", "5", "--actions", "3", "--size", "64", "--seed", "3", "--out", s(&data)]);
    let ds = data.join("dataset.jsonl");
    let mut traces = Vec::new();
    for (name, extra) in [("adam", vec!["--optimizer", "adam"]), ("adamo", vec!["--optimizer", "adamo", "--kappa", "0"])] {
        let out = dir.path().join(name);
        let mut args = vec!["train", "--dataset", s(&ds), "--critic", "mlp:8,8", "--steps", "300", "--eta", "1e-3"];
        args.extend(extra);
        args.extend(["--seed", "5", "--out", s(&out)]);
        ok(&args);
        traces.push(fs::read(out.join("trace.csv")).unwrap());
    }
    assert_eq!(traces[0], traces[1]);
    assert!(traces[0].len() > 100);
}

#[test]
fn adam_diverges_on_the_star_fixture() {
    let dir = TempDir::new().unwrap();
    let data = baird(&dir);
    let out = dir.path().join("run");
    ok(&[
        "train", "--dataset", s(&data.join("dataset.jsonl")), "--critic", s(&data.join("critic.json")),
        "--optimizer", "adam", "--eta", "1e-2", "--steps", "20000", "--out", s(&out),
    ]);
    let rows = read_csv(&out.join("trace.csv"));
    assert_eq!(rows.last().unwrap()["status"], "diverged");
    assert!(rows[..3].iter().all(|r| num(r, "rho_a") > 1.0));
    let summary: Value = serde_json::from_slice(&fs::read(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "diverged");
    assert!(summary["steps_run"].as_u64().unwrap() < 20000);
}

#[test]
fn supervised_limit_stays_hurwitz() {
    let dir = TempDir::new().unwrap();
    let data = baird(&dir);
    let out = dir.path().join("run");
    ok(&[
        "train", "--dataset", s(&data.join("dataset.jsonl")), "--critic", s(&data.join("critic.json")),
        "--optimizer", "adam", "--eta", "1e-2", "--gamma", "0", "--steps", "3000", "--out", s(&out),
    ]);
    let rows = read_csv(&out.join("trace.csv"));
    assert!(rows.iter().all(|r| r["hurwitz"] == "true" && r["status"] == "ok"));
    assert!(num(rows.last().unwrap(), "td_loss") < 1e-3 * num(&rows[0], "td_loss"));
}

fn spectrum(data: &Path, extra: &[&str]) -> Value {
    let (ds, critic) = (data.join("dataset.jsonl"), data.join("critic.json"));
    let mut args = vec!["spectrum", "--dataset", s(&ds), "--critic", s(&critic)];
    args.extend(extra);
    serde_json::from_slice(&ok(&args).stdout).unwrap()
}

#[test]
fn spectrum_reports() {
    let dir = TempDir::new().unwrap();
    let data = baird(&dir);
    let full = spectrum(&data, &["--alpha", "1"]);
    let slow = spectrum(&data, &["--alpha", "0.005"]);
    assert_eq!(full["hurwitz"], false);
    assert!(slow["max_re"].as_f64().unwrap() <= full["max_re"].as_f64().unwrap());
    let sup = spectrum(&data, &["--gamma", "0"]);
    assert!(sup["hurwitz"] == true || sup["status"] == "marginal", "{sup}");
    assert_eq!(spectrum(&data, &[]), spectrum(&data, &[]));

    // zero critic: report file written and reproducible
    let zero = dir.path().join("zero.json");
    let gen = dir.path().join("gen");
    ok(&["gen-data", "--states", "4", "--actions", "2", "--size", "12", "--out", s(&gen)]);
    for _ in 0..2 {
        ok(&["spectrum", "--dataset", s(&gen.join("dataset.jsonl")), "--critic", "linear", "--out", s(&zero)]);
    }
    let report: Value = serde_json::from_slice(&fs::read(&zero).unwrap()).unwrap();
    assert!(report["rho_a"].as_f64().unwrap().is_finite());
}

fn sweep_operator(dir: &TempDir, rows: &str, grid: &str) -> Vec<std::collections::HashMap<String, String>> {
    let op = dir.path().join("op.json");
    fs::write(&op, rows).unwrap();
    let out = dir.path().join("sweep.csv");
    ok(&["sweep", "--operator", s(&op), "--eta-grid", grid, "--out", s(&out)]);
    read_csv(&out)
}

#[test]
fn sweep_examples() {
    let dir = TempDir::new().unwrap();
    assert_eq!(sweep_operator(&dir, "[[-1.0, 0.0], [0.0, -2.0]]", "0.1").len(), 1);

    let singular = sweep_operator(&dir, "[[0.0, 1.0], [0.0, -1.0]]", "1e-4:1:12");
    assert_eq!(singular.len(), 12);
    assert!(singular.iter().all(|r| num(r, "rho_a") >= 1.0 - 1e-12));

    let stable = sweep_operator(&dir, "[[-1.0, 3.0], [-3.0, -1.0]]", "1e-3:10:16");
    let rho: Vec<f64> = stable.iter().map(|r| num(r, "rho_a")).collect();
    assert!(rho[0] < 1.0 && *rho.last().unwrap() > 1.0);
    assert_eq!(stable.iter().filter(|r| r["crossing"] == "true").count(), 1);

    // snapshot sweep over two gammas
    let data = baird(&dir);
    let out = ok(&[
        "sweep", "--dataset", s(&data.join("dataset.jsonl")), "--critic", s(&data.join("critic.json")),
        "--eta-grid", "1e-3,1e-2", "--gamma-grid", "0,0.99",
    ]);
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 5);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("missing.jsonl");
    assert_eq!(lab(&["train", "--dataset", s(&missing)]).status.code(), Some(2));
    assert_eq!(lab(&["spectrum"]).status.code(), Some(2));
    assert_eq!(lab(&["train", "--bogus"]).status.code(), Some(2));
    assert_eq!(lab(&["verify", "nonsense"]).status.code(), Some(2));
    assert_eq!(lab(&["sweep", "--operator", s(&missing), "--eta-grid", "1:0:x"]).status.code(), Some(2));
    let data = baird(&dir);
    let bad_eta = lab(&["train", "--dataset", s(&data.join("dataset.jsonl")), "--eta", "-1"]);
    assert_eq!(bad_eta.status.code(), Some(2));
}

#[test]
fn verify_emits_json_verdicts() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("hurwitz.json");
    let run = ok(&["verify", "hurwitz", "--out", s(&out)]);
    assert!(String::from_utf8_lossy(&run.stderr).contains("[pass]"));
    let report: Value = serde_json::from_slice(&fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["passed"], true);
    assert!(!report["checks"].as_array().unwrap().is_empty());

    // the integrated-budget check has a recorded shortfall, which must surface as exit 1
    let run = lab(&["verify", "hamiltonian"]);
    assert_eq!(run.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&run.stdout).unwrap();
    assert_eq!(report["passed"], false);
}

#[test]
fn config_file_values_yield_to_flags() {
    let dir = TempDir::new().unwrap();
    let data = baird(&dir);
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("run");
    let body = serde_json::json!({
        "dataset": data.join("dataset.jsonl"),
        "critic": data.join("critic.json"),
        "optimizer": "adam",
        "steps": 50,
        "monitor_every": 10,
        "out": out,
    });
    fs::write(&cfg, body.to_string()).unwrap();
    ok(&["train", "--config", s(&cfg), "--steps", "20"]);
    let rows = read_csv(&out.join("trace.csv"));
    let steps: Vec<f64> = rows.iter().map(|r| num(r, "step")).collect();
    assert_eq!(steps, [0.0, 10.0, 20.0]);

    fs::write(&cfg, r#"{"stepz": 3}"#).unwrap();
    assert_eq!(lab(&["train", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn grid_syntax() {
    assert_eq!(parse_grid("0.1").unwrap(), [0.1]);
    assert_eq!(parse_grid("1,2.5, 3").unwrap(), [1.0, 2.5, 3.0]);
    let g = parse_grid("1e-4:1:5").unwrap();
    assert_eq!(g.len(), 5);
    assert!((g[0] - 1e-4).abs() < 1e-18 && (g[4] - 1.0).abs() < 1e-12);
    assert!((g[2] - 1e-2).abs() < 1e-14);
    assert!(parse_grid("").is_err());
    assert!(parse_grid("1:0:x").is_err());
}

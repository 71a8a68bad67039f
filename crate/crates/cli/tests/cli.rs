use std::path::Path;
use std::process::{Command, Output};

fn lrchain(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrchain"))
        .args(args)
        .arg(format!("--out-dir={}", dir.display()))
        .output()
        .expect("binary runs")
}

fn data_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn ising_spectrum_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrchain(dir.path(), &["spectrum", "--n", "11", "--spin2", "1", "--alpha", "inf", "--j0", "1", "--b", "0"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let mut values: Vec<i64> = data_rows(&csv)
        .iter()
        .map(|r| {
            let e: f64 = r[1].parse().unwrap();
            assert!((e - e.round()).abs() < 1e-10);
            e.round() as i64
        })
        .collect();
    assert_eq!(values.len(), 2048);
    values.dedup();
    assert_eq!(values, (-5..=5).map(|r| 2 * r).collect::<Vec<_>>());
}

#[test]
fn special_zeta() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrchain(dir.path(), &["special", "--zeta", "2"]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("1.6449340668"));
    assert!(out.stderr.is_empty());
}

#[test]
fn continuum_gap_closes_at_twice_zeta3() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrchain(
        dir.path(),
        &["gap", "--kind", "uniform", "--n", "inf", "--alpha", "3", "--b-min", "2", "--b-max", "3", "--b-steps", "50"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("gap.csv")).unwrap();
    let zero: Vec<f64> = data_rows(&csv)
        .iter()
        .filter(|r| r[1].parse::<f64>().unwrap() == 0.0)
        .map(|r| r[0].parse().unwrap())
        .collect();
    assert_eq!(zero.len(), 1);
    assert!((zero[0] - 2.4041138).abs() < 1e-6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let code = |args: &[&str]| lrchain(dir.path(), args).status.code().unwrap();
    assert_eq!(code(&["spectrum", "--n", "abc"]), 2);
    assert_eq!(code(&["nonsense"]), 2);
    assert_eq!(code(&["spectrum", "--n", "inf"]), 2);
    assert_eq!(code(&["dispersion", "--boundary", "open"]), 2);
    assert_eq!(code(&["spectrum", "--n", "30", "--spin2", "3"]), 4);
    assert_eq!(code(&["special"]), 2);
    let out = lrchain(dir.path(), &["spectrum", "--n", "inf"]);
    assert!(out.stdout.is_empty());
    assert!(!out.stderr.is_empty());
}

#[test]
fn output_independent_of_thread_count() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["sweep", "--n", "6", "--alpha", "1.5", "--b-steps", "9", "--threads"];
    let one: Vec<&str> = args.iter().copied().chain(["1"]).collect();
    let four: Vec<&str> = args.iter().copied().chain(["4"]).collect();
    assert!(lrchain(a.path(), &one).status.success());
    assert!(lrchain(b.path(), &four).status.success());
    let x = std::fs::read(a.path().join("sweep.csv")).unwrap();
    let y = std::fs::read(b.path().join("sweep.csv")).unwrap();
    assert_eq!(x, y);
}

#[test]
fn sidecar_config_reproduces_run() {
    let a = tempfile::tempdir().unwrap();
    let out = lrchain(a.path(), &["dispersion", "--n", "10", "--alpha", "2", "--b", "0.7", "--kind", "alternating", "--j0", "-1"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(a.path().join("dispersion.meta.json")).unwrap()).unwrap();
    let mut config = meta["config"].clone();
    assert_eq!(config["kind"], "alternating");
    assert_eq!(config["j0"], -1.0);

    let b = tempfile::tempdir().unwrap();
    config["output_dir"] = serde_json::json!(b.path());
    let cfg_path = b.path().join("run.json");
    std::fs::write(&cfg_path, config.to_string()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_lrchain"))
        .args(["dispersion", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(a.path().join("dispersion.csv")).unwrap(),
        std::fs::read(b.path().join("dispersion.csv")).unwrap()
    );
    let again: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(b.path().join("dispersion.meta.json")).unwrap()).unwrap();
    assert_eq!(again["config"], config);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    std::fs::write(&cfg_path, r#"{"n_sites": 4, "b": 0.5, "j0": 2.0}"#).unwrap();
    let out = lrchain(dir.path(), &["spectrum", "--config", cfg_path.to_str().unwrap(), "--b", "1.5"]);
    assert!(out.status.success());
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["b"], 1.5);
    assert_eq!(meta["config"]["j0"], 2.0);
    assert_eq!(meta["config"]["n_sites"], 4);
}

#[test]
fn json_format_and_units() {
    let dir = tempfile::tempdir().unwrap();
    let out = lrchain(dir.path(), &["spectrum", "--n", "2", "--j0", "2", "--format", "json"]);
    assert!(out.status.success());
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap()).unwrap();
    let rows = doc["table"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    assert!((rows[0][1].as_f64().unwrap() + 1.0).abs() < 1e-12);

    let out = lrchain(dir.path(), &["spectrum", "--n", "2", "--j0", "2", "--raw-units"]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("spectrum.csv")).unwrap();
    let e0: f64 = data_rows(&csv)[0][1].parse().unwrap();
    assert!((e0 + 2.0).abs() < 1e-12);
}

#[test]
fn every_command_runs() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["semiclassical", "--n", "6", "--b", "0.5"],
        vec!["bifurcations", "--n", "40", "--alpha", "inf"],
        vec!["deviation", "--n", "5", "--b-steps", "8"],
        vec!["sublattice", "--n", "8", "--alpha", "2", "--b", "0.5"],
        vec!["sublattice", "--n", "inf", "--alpha", "2", "--b", "0.5"],
        vec!["special", "--eta", "0.5", "--clausen-k", "1.0", "--alpha", "2"],
    ] {
        let out = lrchain(dir.path(), &args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

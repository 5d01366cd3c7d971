use std::io::Write;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spinboson")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let out = run(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_str(&stdout(&out)).unwrap()
}

fn energies(report: &serde_json::Value) -> Vec<f64> {
    let mut e: Vec<f64> = report["sectors"]
        .as_array()
        .unwrap()
        .iter()
        .flat_map(|s| s["states"].as_array().unwrap().iter().map(|st| st["E"].as_f64().unwrap()))
        .collect();
    e.sort_by(f64::total_cmp);
    e
}

fn config_file(body: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(body.as_bytes()).unwrap();
    f
}

#[test]
fn lmg_spin_two_has_sectors_of_dimension_three_and_two() {
    let rows = json(&["sectors", "--preset", "lmg", "--j", "2", "--format", "json"]);
    let dims: Vec<u64> = rows.as_array().unwrap().iter().map(|r| r["dim"].as_u64().unwrap()).collect();
    assert_eq!(dims, vec![3, 2]);
    assert_eq!(rows[1]["lambda"], 1);
}

#[test]
fn bose_hubbard_spin_half_is_one_doublet() {
    let rows = json(&["sectors", "--preset", "bose_hubbard", "--j", "1/2", "--format", "json"]);
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["dim"], 2);
}

#[test]
fn tavis_cummings_sector_labels_are_exact_rationals() {
    let rows = json(&["sectors", "--preset", "tavis_cummings", "--j", "1/2", "--max-bosons", "2", "--format", "json"]);
    let kappas: Vec<&str> = rows.as_array().unwrap().iter().map(|r| r["kappa"].as_str().unwrap()).collect();
    assert_eq!(&kappas[..3], &["1/4", "3/4", "5/4"]);
}

#[test]
fn tavis_cummings_doublet() {
    let report = json(&[
        "spectrum", "--preset", "tavis_cummings", "--param", "w=1", "--param", "g_prime=1", "--param", "g=0.1",
        "--j", "1/2", "--mu", "1/2", "--n", "0", "--format", "json",
    ]);
    let e = energies(&report);
    assert_eq!(e.len(), 2);
    assert!((e[0] - 0.4).abs() < 1e-12 && (e[1] - 0.6).abs() < 1e-12, "{e:?}");
    assert_eq!(report["sectors"][0]["labels"]["kappa"], "3/4");
    assert!(report["sectors"][0]["states"].as_array().unwrap().iter().all(|s| s["verified"] == true));
}

#[test]
fn rigid_rotor_spin_one_triple() {
    let report = json(&["spectrum", "--preset", "rigid_rotor", "--j", "1", "--format", "json"]);
    let e = energies(&report);
    for (x, want) in e.iter().zip([3.0, 4.0, 5.0]) {
        assert!((x - want).abs() < 1e-9, "{e:?}");
    }
}

#[test]
fn decoupled_limit_gives_diagonal_energies_with_degenerate_roots() {
    let report = json(&[
        "spectrum", "--preset", "tavis_cummings", "--param", "g=0", "--j", "1", "--mu", "-1", "--n", "1", "--format",
        "json",
    ]);
    let states = report["sectors"][0]["states"].as_array().unwrap();
    assert!(states.iter().all(|s| s["degenerate"] == true));
    for s in states {
        assert!(s["roots"].as_array().unwrap().iter().all(|z| z[0] == 0.0 && z[1] == 0.0));
    }
}

#[test]
fn roots_reports_one_state() {
    let report = json(&[
        "roots", "--preset", "tavis_cummings", "--param", "w=1", "--param", "g_prime=1", "--param", "g=0.1", "--j",
        "1/2", "--mu", "1/2", "--n", "0", "--index", "1", "--format", "json",
    ]);
    let states = report["sectors"][0]["states"].as_array().unwrap();
    assert_eq!(states.len(), 1);
    assert_eq!(states[0]["index"], 1);
    assert!((states[0]["E"].as_f64().unwrap() - 0.6).abs() < 1e-12);
}

#[test]
fn csv_repeats_sector_labels_on_each_row() {
    let out = run(&["spectrum", "--preset", "lmg", "--j", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("j,p,lambda,kappa"));
    assert_eq!(lines.len(), 1 + 5);
    assert!(lines[1..].iter().all(|l| l.starts_with("2,")));
}

#[test]
fn json_output_round_trips_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spec.json");
    let out = run(&[
        "spectrum", "--preset", "two_mode_tc", "--j", "1", "--max-bosons", "1", "--format", "json", "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let parsed = spinboson::SpectrumReport::from_json(&text).unwrap();
    assert_eq!(format!("{}\n", parsed.to_json()), text);
}

#[test]
fn output_is_deterministic() {
    let args = ["spectrum", "--preset", "two_mode_tc", "--j", "3/2", "--max-bosons", "2", "--format", "json"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
    let mut seq = args.to_vec();
    seq.push("--sequential");
    assert_eq!(stdout(&run(&args)), stdout(&run(&seq)));
}

#[test]
fn config_file_with_flag_override() {
    let cfg = config_file(
        r#"{"preset": "tavis_cummings", "params": {"w": 1, "g_prime": 1, "g": 0.5},
            "j": "1/2", "sector": {"mu": "1/2", "n": [0]}, "output": {"format": "json"}}"#,
    );
    let path = cfg.path().to_str().unwrap();
    let from_file = energies(&json(&["spectrum", "--config", path]));
    assert!(from_file[0].abs() < 1e-12 && (from_file[1] - 1.0).abs() < 1e-12, "{from_file:?}");
    let overridden = energies(&json(&["spectrum", "--config", path, "--param", "g=0.1"]));
    assert!((overridden[0] - 0.4).abs() < 1e-12, "{overridden:?}");
}

#[test]
fn inline_model_config() {
    let cfg = config_file(
        r#"{"model": {"m": 0, "r": 1, "s": 2, "k": [], "w": [], "g_prime": 0.8, "g": 0.3},
            "j": "1/2", "output": {"format": "json"}}"#,
    );
    let e = energies(&json(&["spectrum", "--config", cfg.path().to_str().unwrap()]));
    assert!((e[0] + 0.1).abs() < 1e-12 && (e[1] - 0.5).abs() < 1e-12, "{e:?}");
}

#[test]
fn config_errors_name_the_line_and_field() {
    let cfg = config_file("{\n  \"preset\": \"lmg\",\n  \"jay\": \"1\"\n}");
    let out = run(&["sectors", "--config", cfg.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("jay") && err.contains("line 3"), "{err}");

    let both = config_file(r#"{"preset": "lmg", "model": {"m": 0, "r": 1, "s": 1, "k": [], "w": [], "g_prime": 1, "g": 1}}"#);
    let out = run(&["sectors", "--config", both.path().to_str().unwrap(), "--j", "1"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--preset", "lmg"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--preset", "nope", "--j", "1"]).status.code(), Some(1));
    assert_eq!(run(&["spectrum", "--preset", "lmg", "--j", "1", "--param", "w=1"]).status.code(), Some(1));
    assert_eq!(run(&["sectors", "--preset", "lmg", "--j", "1/3"]).status.code(), Some(1));
    assert_eq!(run(&["roots", "--preset", "lmg", "--j", "2"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn preset_list_names_all_presets() {
    let text = stdout(&run(&["preset", "list"]));
    for name in ["bose_hubbard", "lmg", "rigid_rotor", "tavis_cummings", "two_mode_tc"] {
        assert!(text.contains(name));
    }
}

#[test]
fn verify_passes_on_a_small_grid() {
    let out = run(&["verify", "--draws", "2", "--format", "json"]);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(out.status.code(), Some(0), "{report:#}");
    assert_eq!(report["passed"], true);
}

#[test]
fn tightened_tolerance_is_a_controlled_failure() {
    let out = run(&["verify", "--draws", "1", "--tol-match", "1e-15"]);
    assert_eq!(out.status.code(), Some(2));
    let text = stdout(&out);
    assert!(text.contains("FAIL oracle equivalence"), "{text}");
}

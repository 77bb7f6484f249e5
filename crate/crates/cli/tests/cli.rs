use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

const BIN: &str = env!("CARGO_BIN_EXE_weakly-coupled");

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN).current_dir(dir).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, v: &Value) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_slice(&fs::read(p).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Rotor as a finite table, with `b_{1,2}` scaled by `scale`.
fn rotor_table(levels: usize, scale: f64) -> Value {
    let spectrum: Vec<f64> = (1..=levels).map(|n| (n * n) as f64).collect();
    let couplings: Vec<Value> = (1..levels)
        .map(|j| {
            let im = if j == 1 { -0.5 * scale } else { -0.5 };
            json!({"j": j, "k": j + 1, "re": 0.0, "im": im})
        })
        .collect();
    json!({"name": "rotor-table", "spectrum": spectrum, "couplings": couplings})
}

#[test]
fn bound_writes_report_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"kind": "bound", "system": {"model": "rotor"}, "params": {"bound": "coupling-constant", "k": 1}}),
    );
    let o = run(tmp.path(), &["bound", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&tmp.path().join("res/bound.json"));
    assert_eq!(report["value"], json!(1.5));
    let manifest = read_json(&tmp.path().join("res/run-manifest.json"));
    assert_eq!(manifest["kind"], "bound");
    assert_eq!(manifest["outputs"][0]["file"], "bound.json");
    let bytes = fs::read(tmp.path().join("res/bound.json")).unwrap();
    assert_eq!(manifest["outputs"][0]["bytes"], json!(bytes.len()));
    assert_eq!(manifest["outputs"][0]["sha256"].as_str().unwrap().len(), 64);
    assert!(manifest["wall_time_seconds"].as_f64().unwrap() >= 0.0);
    // No temporary files are left behind.
    let names: Vec<_> = fs::read_dir(tmp.path().join("res")).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 2, "{names:?}");
}

#[test]
fn malformed_json_exits_2_without_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    fs::write(&cfg, "{\"kind\": \"bound\",\n  \"params\": {\"bound\": }\n}").unwrap();
    let o = run(tmp.path(), &["bound", "--config", "bad.json", "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.json:2:"), "{}", stderr(&o));
    assert!(!tmp.path().join("res").exists());
}

#[test]
fn schema_errors_name_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"system": {"model": "rotor"}, "params": {"method": "tridiagonal", "K": "four", "epsilon": 1e-4}}),
    );
    let o = run(tmp.path(), &["min-dim", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("params"), "{}", stderr(&o));
    assert!(!tmp.path().join("res").exists());

    let cfg = write(tmp.path(), "u.json", &json!({"system": {"model": "rotor"}, "params": {"bound": "transition", "n": 1, "l": 3, "K": 1, "extra": 1}}));
    let o = run(tmp.path(), &["bound", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("extra"), "{}", stderr(&o));

    let cfg = write(tmp.path(), "m.json", &json!({"system": {"model": "pendulum"}, "params": {"N": 4}}));
    let o = run(tmp.path(), &["chain", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("pendulum"), "{}", stderr(&o));
}

#[test]
fn kind_mismatch_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(tmp.path(), "c.json", &json!({"kind": "chain", "system": {"model": "rotor"}, "params": {"N": 4}}));
    let o = run(tmp.path(), &["bound", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("kind"), "{}", stderr(&o));
}

#[test]
fn set_overrides_fields() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"kind": "bound", "system": {"model": "rotor"}, "params": {"bound": "coupling-constant", "k": 1}}),
    );
    let o = run(
        tmp.path(),
        &["bound", "--config", cfg.to_str().unwrap(), "--set", "params.k=2", "--set", "system.model=oscillator", "--out-dir", "res", "--quiet"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).is_empty());
    assert_eq!(read_json(&tmp.path().join("res/bound.json"))["value"], json!(8.0));
    let manifest = read_json(&tmp.path().join("res/run-manifest.json"));
    assert_eq!(manifest["resolved_config"]["params"]["k"], json!(2));
}

#[test]
fn out_dir_from_file_is_relative_to_it() {
    let tmp = tempfile::tempdir().unwrap();
    fs::create_dir(tmp.path().join("cfg")).unwrap();
    write(
        &tmp.path().join("cfg"),
        "c.json",
        &json!({"system": {"model": "rotor"}, "params": {"N": 6}, "out_dir": "results"}),
    );
    let o = run(tmp.path(), &["chain", "--config", "cfg/c.json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_json(&tmp.path().join("cfg/results/chain.json"));
    assert_eq!(report["report"]["connected"], json!(true));
}

#[test]
fn numerical_contract_violation_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    // A non-normalised initial state is a contract violation of the propagator inputs.
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"system": {"model": "rotor"}, "params": {"N": 3, "control": {"segments": [{"dt": 1.0, "u": [0.1]}]},
                "initial": {"coefficients": [[1.0, 0.0], [1.0, 0.0]]}}}),
    );
    let o = run(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert!(matches!(o.status.code(), Some(2) | Some(3)), "{:?}", o.status);
    assert!(!tmp.path().join("res").exists());
}

#[test]
fn simulate_with_seeded_random_control_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"kind": "simulate", "seed": 5, "system": {"model": "oscillator"},
                "params": {"N": 8, "control": {"random": {"segments": 5, "T": 2.0, "K": 1.5}}, "sample_every": 0.25}}),
    );
    for d in ["a", "b"] {
        let o = run(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", d]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    for f in ["trajectory.csv", "final_state.json"] {
        assert_eq!(fs::read(tmp.path().join("a").join(f)).unwrap(), fs::read(tmp.path().join("b").join(f)).unwrap());
    }
    let fin = read_json(&tmp.path().join("a/final_state.json"));
    assert!((fin["l1_norm"].as_f64().unwrap() - 1.5).abs() < 1e-12);
    let csv = fs::read_to_string(tmp.path().join("a/trajectory.csv")).unwrap();
    // Grid points 0, 0.25, ..., 2 plus the four interior segment boundaries.
    assert_eq!(csv.lines().count(), 1 + 9 + 4);
    assert!(csv.lines().last().unwrap().starts_with("2.0000000000000000e0,"));

    // Without any seed the random control is rejected.
    let cfg = write(
        tmp.path(),
        "n.json",
        &json!({"system": {"model": "oscillator"}, "params": {"N": 8, "control": {"random": {"segments": 5, "T": 2.0, "K": 1.5}}}}),
    );
    let o = run(tmp.path(), &["simulate", "--config", cfg.to_str().unwrap(), "--out-dir", "c"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn control_and_system_files_are_resolved() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "sys.json", &rotor_table(10, 1.0));
    write(tmp.path(), "u.json", &json!({"segments": [{"dt": 0.5, "u": [1.0]}, {"dt": 0.5, "u": [-0.5]}]}));
    let cfg = write(
        tmp.path(),
        "c.json",
        &json!({"system": {"file": "sys.json"}, "params": {"N": 6, "control": {"file": "u.json"}, "dt": 1e-4}}),
    );
    let o = run(tmp.path(), &["oracle-compare", "--config", cfg.to_str().unwrap(), "--out-dir", "res"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let r = read_json(&tmp.path().join("res/oracle.json"));
    assert!(r["distance"].as_f64().unwrap() < 1e-9);
    assert!((r["l1_norm"].as_f64().unwrap() - 0.75).abs() < 1e-15);
}

#[test]
fn self_test_passes_on_builtins() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["self-test", "--out-dir", "st"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.lines().filter(|l| l.starts_with("PASS ")).count() >= 15, "{out}");
    assert!(!out.contains("FAIL"));
    let report = read_json(&tmp.path().join("st/self-test.json"));
    assert!(report["items"].as_array().unwrap().iter().all(|i| i["outcome"] == "pass"));
}

#[test]
fn self_test_on_an_exact_rotor_table() {
    // A table carries no model tag, so the rotor-specific closed-form projection
    // bound is unavailable and only the general combinatorial bound applies.
    // Every other rotor golden must still hold.
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "rotor.json", &rotor_table(260, 1.0));
    let cfg = write(tmp.path(), "st.json", &json!({"kind": "self-test", "params": {"rotor": {"file": "rotor.json"}}}));
    let o = run(tmp.path(), &["self-test", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    let failed: Vec<&str> = err.lines().filter_map(|l| l.strip_prefix("FAIL ")).map(|l| l.split(':').next().unwrap()).collect();
    assert_eq!(failed, ["rotor-projection", "rotor-min-dim"], "{err}");
    for item in ["rotor-coupling-constant-k1", "rotor-coupling-constant-k2", "rotor-numeric-coupling-k1", "rotor-transition", "rotor-generic-threshold"] {
        assert!(err.contains(&format!("PASS {item}:")), "{item}: {err}");
    }
}

#[test]
fn self_test_rejects_a_perturbed_rotor() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "rotor.json", &rotor_table(260, 1.1));
    let cfg = write(tmp.path(), "st.json", &json!({"params": {"rotor": {"file": "rotor.json"}}}));
    let o = run(tmp.path(), &["self-test", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("FAIL rotor-coupling-constant-k1"), "{err}");
    assert!(err.contains("c_1 = 1.65"), "{err}");
    assert!(err.contains("self-test failed: ") && err.contains("rotor-coupling-constant-k1"), "{err}");
}

#[test]
fn self_test_skips_missing_model_files() {
    let tmp = tempfile::tempdir().unwrap();
    write(tmp.path(), "osc.json", &json!({"model": "oscillator"}));
    let cfg = write(
        tmp.path(),
        "st.json",
        &json!({"params": {"models": ["osc.json", "missing.json"], "rotor": {"file": "gone.json"}}}),
    );
    let o = run(tmp.path(), &["self-test", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("warning: skipping model file"), "{out}");
    assert!(out.contains("warning: rotor override"), "{out}");
    assert!(out.contains("SKIP model-file missing.json"), "{out}");
    assert!(out.contains("PASS model-file osc.json"), "{out}");
    assert!(out.contains("PASS oscillator-projection-413"), "{out}");
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_spectral-clt");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("SPECTRAL_CLT_WORKERS")
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const MA1_CLT: &str =
    r#"{"process":"ma1","n":256,"replicates":4000,"thetas":[2.0],"master_seed":7}"#;

#[test]
fn generate_writes_reproducible_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"process":"two_state(0.25)","n":100,"master_seed":3}"#,
    );
    let out = dir.path().join("p.csv");
    let o = run(&["generate", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,value");
    assert_eq!(lines.len(), 101);
    for (k, line) in lines[1..].iter().enumerate() {
        let (i, v) = line.split_once(',').unwrap();
        assert_eq!(i.parse::<usize>().unwrap(), k + 1);
        assert!(["1", "-1"].contains(&v));
    }
    let again = run(&["generate", "--config", s(&cfg)]);
    assert_eq!(String::from_utf8(again.stdout).unwrap(), text);
    let other = run(&["generate", "--config", s(&cfg), "--seed", "4"]);
    assert_ne!(String::from_utf8(other.stdout).unwrap(), text);
}

#[test]
fn spectrum_writes_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"process":"ma1","n_grid":64}"#);
    let out = dir.path().join("g.csv");
    let o = run(&["spectrum", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("theta,g"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (t, g) = l.split_once(',').unwrap();
            (t.parse().unwrap(), g.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 64);
    for (t, g) in rows {
        assert!((g - (1.25 + t.cos())).abs() < 1e-12);
    }
    let gf = write(
        dir.path(),
        "gf.json",
        r#"{"process":{"kind":"gaussian_functional","phi":0.5,"h":"sign"}}"#,
    );
    assert_eq!(
        run(&["spectrum", "--config", s(&gf)]).status.code(),
        Some(2)
    );
}

#[test]
fn configuration_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (
            "bad.json",
            r#"{"process":"ma1","thetas":[0.0]}"#,
            "theta=0 excluded",
        ),
        (
            "unknown.json",
            r#"{"process":"ma1","thetas":[1.0],"colour":"red"}"#,
            "colour",
        ),
        ("malformed.json", "{\"process\": \"ma1\",, }", "byte 18"),
        (
            "rows.json",
            r#"{"thetas":[1.0],"process":{"kind":"markov","transition":[[0.5,0.5],[0.2,0.7]],"f":[1,-1]}}"#,
            "row 1",
        ),
    ];
    for (name, text, needle) in cases {
        let cfg = write(dir.path(), name, text);
        let o = run(&["clt", "--config", s(&cfg)]);
        assert_eq!(o.status.code(), Some(2), "{name}");
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains(needle), "{name}: {err}");
    }
    assert_eq!(run(&["clt"]).status.code(), Some(2));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(
        run(&["clt", "--config", "/does/not/exist.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn clt_report_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", MA1_CLT);
    let out = dir.path().join("r.json");
    let o = run(&["clt", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let report: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(report["kind"], "fixed_freq_clt");
    assert_eq!(report["parameters"]["n"], 256);
    assert!(report["verdicts"]
        .as_object()
        .unwrap()
        .values()
        .all(|v| v["passed"] == true));

    // a zero variance tolerance cannot be met
    let o = run(&[
        "clt",
        "--config",
        s(&cfg),
        "--override",
        "tolerances.var_rel=0",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("FAIL"));
}

#[test]
fn override_changes_exactly_the_named_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", MA1_CLT);
    let base: Value = serde_json::from_slice(&run(&["clt", "--config", s(&cfg)]).stdout).unwrap();
    let over: Value = serde_json::from_slice(
        &run(&["clt", "--config", s(&cfg), "--override", "replicates=400"]).stdout,
    )
    .unwrap();
    let (a, b) = (
        base["parameters"].as_object().unwrap(),
        over["parameters"].as_object().unwrap(),
    );
    assert_eq!(a.keys().collect::<Vec<_>>(), b.keys().collect::<Vec<_>>());
    let changed: Vec<&String> = a.keys().filter(|k| a[*k] != b[*k]).collect();
    assert_eq!(changed, vec!["replicates"]);
    assert_eq!(b["replicates"], 400);

    let seeded: Value =
        serde_json::from_slice(&run(&["clt", "--config", s(&cfg), "--seed", "99"]).stdout).unwrap();
    assert_eq!(seeded["parameters"]["master_seed"], 99);
}

#[test]
fn outputs_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        r#"{"process":"two_state(0.3)","n":256,"replicates":200,"thetas":[1.0,2.5],"n_ladder":[16,64,256]}"#,
    );
    for sub in [
        "clt",
        "cross",
        "annealed",
        "periodogram",
        "invariance",
        "variance",
        "diag",
    ] {
        let mut outputs = Vec::new();
        for workers in ["1", "4"] {
            let samples = dir.path().join(format!("{sub}-{workers}.csv"));
            let o = run(&[
                sub,
                "--config",
                s(&cfg),
                "--workers",
                workers,
                "--override",
                &format!("output.samples={}", s(&samples)),
            ]);
            assert!(
                o.status.code().unwrap() < 2,
                "{sub}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
            let csv = std::fs::read(&samples).ok();
            // sample paths differ by name, so drop them from the echo
            let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
            v["parameters"]["output"] = Value::Null;
            v["samples_written"] = Value::Null;
            outputs.push((serde_json::to_string(&v).unwrap(), csv));
        }
        assert_eq!(outputs[0], outputs[1], "{sub}");
    }
}

#[test]
fn workers_env_var_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", MA1_CLT);
    let with_env = Command::new(BIN)
        .args(["clt", "--config", s(&cfg)])
        .env("SPECTRAL_CLT_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(with_env.status.code(), Some(0));
    assert_eq!(
        with_env.stdout,
        run(&["clt", "--config", s(&cfg), "--workers", "1"]).stdout
    );
    let bad = Command::new(BIN)
        .args(["clt", "--config", s(&cfg)])
        .env("SPECTRAL_CLT_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn report_and_samples_paths_from_config() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let samples = dir.path().join("samples.csv");
    let text = format!(
        r#"{{"process":"iid_gauss","n":128,"replicates":100,"thetas":[1.0],
            "output":{{"report":"{}","samples":"{}"}}}}"#,
        s(&report),
        s(&samples)
    );
    let cfg = write(dir.path(), "c.json", &text);
    let o = run(&["periodogram", "--config", s(&cfg)]);
    assert!(o.status.code().unwrap() < 2);
    assert_eq!(std::fs::read(&report).unwrap(), o.stdout);
    let csv = std::fs::read_to_string(&samples).unwrap();
    assert!(csv.starts_with("replicate,theta,re,im,periodogram\n"));
    assert_eq!(csv.lines().count(), 101);
}

#[test]
fn suite_with_bad_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.json", r#"{"seeds":[1],"min_passing":3}"#);
    assert_eq!(run(&["suite", "--config", s(&cfg)]).status.code(), Some(2));
}

#[test]
fn shipped_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        let bytes = std::fs::read(&path).unwrap();
        if path.file_name().unwrap() == "suite.json" {
            spectral_clt::experiments::suite::SuiteConfig::parse(&bytes).unwrap();
        } else {
            spectral_clt::experiments::parse_config(&bytes)
                .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        }
        seen += 1;
    }
    assert!(seen >= 5);
}

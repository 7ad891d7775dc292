//! Black-box runs of the `amoeba-lab` binary: output shape, exit codes,
//! diagnostics and configuration precedence.

use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amoeba-lab"))
        .args(args)
        .env_remove("AMOEBA_LAB_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn diagnostic(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is one JSON object");
    v["error"].clone()
}

#[test]
fn newton_reports_lattice_invariants() {
    let out = run(&["newton", "-p", "1 + x + y"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["vertices"].as_array().unwrap().len(), 3);
    assert_eq!(v["vol"]["num"], 1);
    assert_eq!(v["vol"]["den"], 2);
    assert_eq!((v["g"].as_u64(), v["s"].as_u64()), (Some(0), Some(3)));
    assert_eq!(v["pick_ok"], true);
}

#[test]
fn degenerate_support_and_syntax_errors_are_usage_errors() {
    let out = run(&["newton", "-p", "x + x^2"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(diagnostic(&out)["kind"], "degenerate_support");

    let out = run(&["newton", "-p", "1 + x +"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(diagnostic(&out)["kind"], "parse");

    let out = run(&["newton"]);
    assert_eq!(out.status.code(), Some(64));
    assert_eq!(diagnostic(&out)["code"], 64);
}

#[test]
fn missing_input_file_is_an_io_error() {
    let out = run(&["newton", "-p", "@/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(74));
    assert_eq!(diagnostic(&out)["kind"], "io");
}

#[test]
fn polynomial_from_json_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("poly.json");
    std::fs::write(
        &path,
        r#"{"terms": [{"i": 0, "j": 0, "c": 1.0}, {"i": 2, "j": 0, "c": 1.0}, {"i": 0, "j": 2, "c": -1.0}]}"#,
    )
    .unwrap();
    let arg = format!("@{}", path.display());
    let out = run(&["newton", "-p", &arg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["vol"]["num"], 2);
    assert_eq!(v["s"], 6);
}

#[test]
fn classify_writes_the_evidence_trail() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("line");
    let out = run(&["classify", "-p", "1 + x + y", "-o", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out)["verdict"], "Harnack");
    for name in [
        "lattice.json",
        "arcs.csv",
        "curvature.json",
        "gauss_scan.json",
        "verdict.json",
        "figure.svg",
    ] {
        assert!(out_dir.join(name).is_file(), "missing {name}");
    }
    let csv = std::fs::read_to_string(out_dir.join("arcs.csv")).unwrap();
    assert!(csv.starts_with("arc,quadrant,x,y,u,v"));

    let out = run(&[
        "classify",
        "-p",
        "x^2 + y^2 + 1",
        "-o",
        dir.path().join("empty").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out)["verdict"], "NotHarnack");
}

#[test]
fn report_schema_is_stable() {
    let out = run(&["report", "-p", "1 + x + y"]);
    assert_eq!(out.status.code(), Some(0));
    let v = stdout_json(&out);
    assert_eq!(v["schema"], "amoeba-lab/report/v1");
    assert_eq!(v["status"], "ok");
    let mut keys: Vec<&str> = v.as_object().unwrap().keys().map(String::as_str).collect();
    keys.sort_unstable();
    assert_eq!(
        keys,
        [
            "area_bound",
            "area_estimate",
            "config",
            "crofton_total",
            "curvature_bound",
            "polynomial",
            "schema",
            "stages",
            "status",
            "total_curvature"
        ]
    );
    for stage in ["newton", "trace", "fibers", "curvature", "raster"] {
        assert_eq!(v["stages"][stage]["status"], "ok", "stage {stage}");
    }
    let total = v["total_curvature"].as_f64().unwrap();
    assert!((total - std::f64::consts::PI).abs() < 1e-2);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "poly = \"1 + x + y\"\nwindow = 5.0\ntheta_samples = 32\n").unwrap();
    let cfg = cfg.to_str().unwrap();

    let v = stdout_json(&run(&["report", "--config", cfg]));
    assert_eq!(v["config"]["window"], 5.0);
    assert_eq!(v["config"]["theta_samples"], 32);

    let v = stdout_json(&run(&["report", "--config", cfg, "--window", "7"]));
    assert_eq!(v["config"]["window"], 7.0);
    assert_eq!(v["config"]["theta_samples"], 32);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "poly = \"1 + x + y\"\nwindoww = 5.0\n").unwrap();
    let out = run(&["newton", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
}

#[test]
fn fibers_over_one_direction() {
    let out = run(&["fibers", "-p", "1 + x + y", "--theta", "-0.3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = stdout_json(&out);
    assert_eq!(v["real_count"], 1);
}

#[test]
fn svg_outputs_are_well_formed_enough() {
    for cmd in ["trace", "raster"] {
        let out = run(&[cmd, "-p", "1 + x + y", "--format", "svg", "--resolution", "32"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}");
        let text = String::from_utf8(out.stdout).unwrap();
        assert!(
            text.trim_start().starts_with("<svg") || text.starts_with("<?xml"),
            "{cmd}"
        );
        assert!(text.trim_end().ends_with("</svg>"), "{cmd}");
    }
}

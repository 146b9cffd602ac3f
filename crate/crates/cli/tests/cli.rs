use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use quermass_cli::output::{emit_csv, emit_svg, CSV_HEADER};
use quermass_cli::RunConfig;
use quermass_core::flows::{self, FlowConfig};
use quermass_core::{build_grid, Hypersurface, ScalarField};

fn quermass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quermass")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn verify_symfun_prints_a_passing_table() {
    let out = quermass(&["verify", "symfun"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().filter(|l| l.starts_with("PASS")).count() >= 2, "{text}");
    assert!(text.contains("0 failed"));
}

#[test]
fn unknown_suite_is_a_validation_error() {
    let out = quermass(&["verify", "nonsense"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn sphere_flow_leaves_the_ratio_column_empty() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"flow","grid":[16,32],
            "flow":{"kind":"inverse","t_end":0.2,"diag_stride":5,"compute_alpha":false},
            "shape":{"type":"harmonic","harmonic":[]}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = quermass(&["flow", "run", &cfg, "--out", out_dir.to_str().unwrap(), "--svg"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "t,I_k,I_km1,Vol,A,S,alpha,vp_ratio,bar_x,bar_y,bar_z,C0,C1,C2,cone_margin");
    let mut count = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 15);
        assert_eq!(cells[5], "", "S must be empty: {line}");
        assert_eq!(cells[7], "", "vp_ratio must be empty: {line}");
        count += 1;
    }
    assert!(count >= 2);
    assert!(out_dir.join("diagnostics.svg").exists());
}

#[test]
fn analyze_reports_deficit_above_asymmetry_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"analyze","shape":{"type":"harmonic","harmonic":[[2,0,0.05]]}}"#,
    );
    let out = quermass(&["analyze", "--config", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let alpha = report["alpha"].as_f64().unwrap();
    let delta = report["delta_1_0"].as_f64().unwrap();
    assert!(alpha > 0.0);
    assert!(delta >= (1.0 / 18.0 - 0.01) * alpha * alpha, "{delta} vs {alpha}");
    for key in ["Ik", "bar", "A", "C0", "C1", "C2", "delta_2_-1"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    let saved: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(saved, report);
}

#[test]
fn malformed_configs_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "a.json", "{\n  \"mode\": \"flow\",\n  \"flow\": {\"kind\": \"inverse\",}\n}");
    let out = quermass(&["flow", "run", &broken]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let unknown = write(dir.path(), "b.json", r#"{"mode":"analyze","shape":{"type":"harmonic","harmonic":[]},"bogus":true}"#);
    let out = quermass(&["analyze", &unknown]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));

    let wrong_mode = write(dir.path(), "c.json", r#"{"mode":"analyze","shape":{"type":"harmonic","harmonic":[]}}"#);
    assert_eq!(quermass(&["flow", "run", &wrong_mode]).status.code(), Some(1));
    assert_eq!(quermass(&["flow", "run"]).status.code(), Some(1));
    assert_eq!(quermass(&["analyze", "--resolution", "12"]).status.code(), Some(1));
}

#[test]
fn rough_initial_surface_is_rejected_by_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"flow","grid":[16,32],"flow":{},"shape":{"type":"harmonic","harmonic":[[6,0,0.2]]}}"#,
    );
    let out = quermass(&["flow", "run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("C2"));
}

#[test]
fn cone_exit_is_a_numerical_failure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"flow","grid":[32,64],"flow":{"c2_gate":100.0},
            "shape":{"type":"harmonic","harmonic":[[8,0,0.1]]}}"#,
    );
    let out = quermass(&["flow", "run", &cfg, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cone exit"));
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"mode":"flow","grid":[16,32],"seed":3,
            "flow":{"kind":"volume_preserving","t_end":0.05,"diag_stride":4},
            "shape":{"type":"random_band","random_band":{"l_min":2,"l_max":6,"target_c2":0.05},"symmetrize":true}}"#,
    );
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = quermass(&["flow", "run", &cfg, "--out", out.to_str().unwrap(), "--seed", seed]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out.join("diagnostics.csv")).unwrap()
    };
    let a = run("a", "3");
    let b = run("b", "3");
    let c = run("c", "4");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn run_config_round_trips() {
    let text = r#"{"mode":"flow","n":2,"grid":[32,64],"seed":9,"emit_svg":true,"output_dir":"runs/x",
        "flow":{"kind":"volume_preserving","alpha":2.0,"t_end":1.5,"pinching":0.2},
        "shape":{"type":"translated_ball","translated_ball":{"center":[0.1,0.0,0.05]},"symmetrize":false}}"#;
    let cfg = RunConfig::parse(text).unwrap();
    let again = RunConfig::parse(&cfg.to_json()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(cfg.to_json(), again.to_json());
}

fn sample_rows(steps: usize) -> Vec<quermass_core::DiagnosticsRow> {
    let g = build_grid(2, 16, 32).unwrap();
    let m = Hypersurface::new(ScalarField::from_fn(&g, |x| 0.02 * (3.0 * x[2] * x[2] - 1.0))).unwrap();
    let cfg = FlowConfig { t_end: steps as f64 * 0.01, diag_stride: 1, compute_alpha: false, ..Default::default() };
    flows::run(&cfg, &m).unwrap().rows
}

#[test]
fn one_row_gives_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sample_rows(1);
    let path = dir.path().join("one.csv");
    emit_csv(&rows[..1], &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert_eq!(text.lines().next().unwrap(), CSV_HEADER.join(","));
    assert!(emit_csv(&[], &path).is_err());
}

#[test]
fn thousand_row_plot_stays_small() {
    let dir = tempfile::tempdir().unwrap();
    let rows = sample_rows(1000);
    assert!(rows.len() >= 1000, "{} rows", rows.len());
    let path = dir.path().join("plot.svg");
    emit_svg(&rows, &["C0", "C1", "C2", "A", "S"], true, &path).unwrap();
    let size = fs::metadata(&path).unwrap().len();
    assert!(size < 200_000, "{size} bytes");
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn io_failures_name_the_path() {
    let rows = sample_rows(1);
    let err = emit_csv(&rows, Path::new("/nonexistent/dir/x.csv")).unwrap_err();
    assert!(err.to_string().contains("/nonexistent/dir/x.csv"));
}

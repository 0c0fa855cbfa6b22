//! End-to-end checks of the command-line interface, including exit codes.

use std::path::Path;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_maxrank"))
}

#[test]
fn classify_catalog_entry() {
    let out = bin()
        .args(["classify", "catalog:sym_gradient", "--n", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"is_elliptic\": true"));
    assert!(text.contains("\"is_maximal_rank\": false"));
    assert!(text.contains("\"seed\""));
    assert!(text.contains("\"tolerance\""));
}

#[test]
fn classify_malformed_json_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"n\": 2, \"dim_v\": ").unwrap();
    let out = bin()
        .arg("classify")
        .arg(bad.to_str().unwrap())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    // position diagnostic from the json parser
    assert!(err.contains("line") || err.contains("column"), "{err}");
}

#[test]
fn catalog_dump_roundtrips_through_classify() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("div.json");
    let out = bin()
        .args(["catalog", "dump", "catalog:divergence", "--n", "2", "--rows", "1"])
        .arg("--out")
        .arg(&spec)
        .output()
        .unwrap();
    assert!(out.status.success());
    let out = bin().arg("classify").arg(spec.to_str().unwrap()).output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("\"is_maximal_rank\": true"));
}

#[test]
fn solve_and_project_files() {
    use maxrank::grid::{random_band_limited, BoxGrid};
    use maxrank::io;
    use maxrank::multiplier::apply_operator;

    let dir = tempfile::tempdir().unwrap();
    let g = BoxGrid::new(2, 64, 1.0, 2).unwrap();
    let spec = maxrank::catalog::laplacian(2).unwrap();
    let u = random_band_limited(&g, 1, 8, 7);
    let au = apply_operator(&spec, &u).unwrap();
    let u_path = dir.path().join("u.grf");
    let au_path = dir.path().join("au.grf");
    io::write_field(&u_path, &u).unwrap();
    io::write_field(&au_path, &au).unwrap();

    let shape = r#"{"ball": {"center": [0.5, 0.5], "radius": 0.2}}"#;
    let v_path = dir.path().join("v.grf");
    let report_path = dir.path().join("report.json");
    let out = bin()
        .args(["solve", "catalog:laplacian", "--n", "2"])
        .arg("--rhs")
        .arg(&au_path)
        .args(["--shape", shape, "--grid", "64"])
        .arg("--out")
        .arg(&v_path)
        .arg("--report")
        .arg(&report_path)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(v_path.exists());
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    assert!(report["residual_rel_mask"].as_f64().unwrap() <= 1e-8);
    assert!(report["multiplier_norms"]["unit_norm_sup"].as_f64().unwrap() <= 1.0 + 1e-9);

    let proj_report = dir.path().join("proj.json");
    let out = bin()
        .args(["project", "catalog:laplacian", "--n", "2"])
        .arg("--u")
        .arg(&u_path)
        .arg("--au")
        .arg(&au_path)
        .args(["--shape", shape])
        .arg("--report")
        .arg(&proj_report)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&proj_report).unwrap()).unwrap();
    assert!(report["norms"]["korn_ratio"].as_f64().is_some());
}

#[test]
fn bench_empty_config_and_bad_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("empty.json");
    std::fs::write(&cfg, r#"{"scenarios": []}"#).unwrap();
    let out_dir = dir.path().join("out");
    let out = bin()
        .arg("bench")
        .arg("--config")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let csv = std::fs::read_to_string(out_dir.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2); // schema + header only

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{nope").unwrap();
    let out = bin()
        .arg("bench")
        .arg("--config")
        .arg(&bad)
        .arg("--out-dir")
        .arg(&out_dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_default_suite_matches_builtin() {
    // the repo file is generated from the built-in default suite
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .join("suites/default.json");
    let text = std::fs::read_to_string(path).unwrap();
    let parsed: maxrank::bench::SuiteConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, maxrank::bench::default_suite());
}

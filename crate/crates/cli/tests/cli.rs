use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shiftinv"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(cmd: &str, cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    bin()
        .arg(cmd)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> (String, Vec<Vec<f64>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().to_string();
    let rows = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    (header, rows)
}

fn quadratic_bspline(t: f64) -> f64 {
    if (0.0..1.0).contains(&t) {
        t * t / 2.0
    } else if (1.0..2.0).contains(&t) {
        (-2.0 * t * t + 6.0 * t - 3.0) / 2.0
    } else if (2.0..3.0).contains(&t) {
        (3.0 - t).powi(2) / 2.0
    } else {
        0.0
    }
}

#[test]
fn forward_p3_reconstructs_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("reconstruct", &config("forward_p3.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert_eq!(report["schemaVersion"], 1);
    assert_eq!(report["seed"], 42);
    assert!(report["maxAbsError"].as_f64().unwrap() <= 1e-8);
    assert!(report["l2Error"].as_f64().unwrap() >= 0.0);
    assert!(report["runtimeSeconds"].as_f64().is_some());
    let (header, rows) = read_csv(&dir.path().join("error.csv"));
    assert_eq!(header, "t,value");
    assert_eq!(rows.len(), 257);
    assert!(rows.iter().all(|r| r[1].abs() <= 1e-8));
}

#[test]
fn frame_configs_reconstruct_exactly() {
    for name in ["frame_q3p2.json", "frame_q3p2_random_u.json"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run("reconstruct", &config(name), dir.path(), &[]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = json(&dir.path().join("report.json"));
        assert!(report["maxAbsError"].as_f64().unwrap() <= 1e-8, "{name}");
        assert_eq!(report["samplesPerChannel"].as_array().unwrap().len(), 3);
    }
}

#[test]
fn two_dimensional_configs_reconstruct() {
    for name in ["separable_2x3.json", "general_3x3.json"] {
        let dir = tempfile::tempdir().unwrap();
        let out = run("reconstruct", &config(name), dir.path(), &[]);
        assert!(out.status.success(), "{name}: {}", String::from_utf8_lossy(&out.stderr));
        let report = json(&dir.path().join("report.json"));
        assert_eq!(report["dimension"], 2);
        assert!(report["maxAbsError"].as_f64().unwrap() <= 1e-7, "{name}");
        let (header, rows) = read_csv(&dir.path().join("reconstruction.csv"));
        assert_eq!(header, "t,s,value");
        assert_eq!(rows.len(), 65 * 65);
    }
}

#[test]
fn malformed_spec_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("reconstruct", &config("bad_scheme.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fwd^9@0"), "{err}");
}

#[test]
fn degenerate_kernel_exits_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("kernel", &config("quadratic_a0.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("x = 0.5"), "{err}");
}

#[test]
fn cubic_kernel_csv_interpolates() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("kernel", &config("cubic_a0.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&dir.path().join("S.csv"));
    assert_eq!(header, "t,value");
    let mut integers = 0;
    for r in &rows {
        if r[0].fract() == 0.0 {
            let target = if r[0] == 0.0 { 1.0 } else { 0.0 };
            assert!((r[1] - target).abs() <= 1e-8, "S({}) = {}", r[0], r[1]);
            integers += 1;
        }
    }
    assert_eq!(integers, 21);
    for k in 1..=3 {
        assert!(dir.path().join(format!("T{k}.csv")).exists());
    }
    // 17 significant digits
    let text = std::fs::read_to_string(dir.path().join("S.csv")).unwrap();
    let first = text.lines().nth(1).unwrap();
    let mantissa = first.split(',').next().unwrap().split('e').next().unwrap();
    assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
}

#[test]
fn quadratic_half_kernel_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("kernel", &config("quadratic_half.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (_, rows) = read_csv(&dir.path().join("S.csv"));
    let r = 2.0 * 2f64.sqrt() - 3.0;
    for row in rows {
        let t = row[0];
        let expect: f64 = (-45i32..=45)
            .map(|n| 2f64.sqrt() * r.powi((n + 1).abs()) * quadratic_bspline(t - n as f64))
            .sum();
        assert!((row[1] - expect).abs() <= 1e-9, "t = {t}: {} vs {expect}", row[1]);
    }
}

#[test]
fn identical_seed_gives_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        assert!(run("reconstruct", &config("forward_p3.json"), d.path(), &["--seed", "9"]).status.success());
    }
    assert!(run("reconstruct", &config("forward_p3.json"), c.path(), &["--seed", "10"]).status.success());
    for file in ["reconstruction.csv", "error.csv"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        let z = std::fs::read(c.path().join(file)).unwrap();
        assert_eq!(x, y, "{file}");
        assert_ne!(x, z, "{file}");
    }
    assert_eq!(json(&a.path().join("report.json"))["seed"], 9);
}

#[test]
fn kernel_dump_round_trips_bit_for_bit() {
    let dir = tempfile::tempdir().unwrap();
    let kdir = dir.path().join("kernels");
    assert!(run("kernel", &config("frame_q3p2.json"), &kdir, &[]).status.success());

    let dump = json(&kdir.join("kernels.json"));
    assert_eq!(dump["schemaVersion"], 1);
    let ks: shiftinv::SamplingKernelSet = serde_json::from_value(dump["kernels"].clone()).unwrap();
    let again = serde_json::to_value(&ks).unwrap();
    let mut original = dump["kernels"].clone();
    original.as_object_mut().unwrap().remove("dimension");
    assert_eq!(again, original);

    let mut cfg = json(&config("frame_q3p2.json"));
    cfg["kernelFile"] = Value::String(kdir.join("kernels.json").to_string_lossy().into_owned());
    let cfg_path = dir.path().join("from_dump.json");
    std::fs::write(&cfg_path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let fresh = dir.path().join("fresh");
    let loaded = dir.path().join("loaded");
    assert!(run("reconstruct", &config("frame_q3p2.json"), &fresh, &[]).status.success());
    let out = run("reconstruct", &cfg_path, &loaded, &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(
        std::fs::read(fresh.join("reconstruction.csv")).unwrap(),
        std::fs::read(loaded.join("reconstruction.csv")).unwrap()
    );
}

#[test]
fn verify_passes_by_default_and_fails_on_wrong_sign() {
    let dir = tempfile::tempdir().unwrap();
    let out = run("verify", &config("verify_default.json"), dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let summary = json(&dir.path().join("verify.json"));
    assert_eq!(summary["passed"], true);
    let names: Vec<&str> = summary["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"pascal p=8") && names.contains(&"involution p=8"));

    let out = run("verify", &config("verify_wrong_sign.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(4));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL biorthogonality fixture"), "{stdout}");
    assert!(stdout.contains("deviation 2.000e0"), "{stdout}");
}

#[test]
fn narrow_sample_window_reports_required_window() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = json(&config("forward_p3.json"));
    cfg["sampleWindow"] = serde_json::json!([-1, 1]);
    let path = dir.path().join("narrow.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run("reconstruct", &path, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("does not cover required window") && err.contains("sampleWindow"), "{err}");
}

#[test]
fn missing_referenced_file_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = json(&config("forward_p3.json"));
    cfg["signal"] = serde_json::json!({ "kind": "file", "path": "no_such_coeffs.json" });
    let path = dir.path().join("missing.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run("reconstruct", &path, dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn coefficient_file_signal() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("coeffs.json"), r#"{ "start": -3, "coeffs": [1, -0.5, 0.25, 2, 0] }"#).unwrap();
    let mut cfg = json(&config("forward_p3.json"));
    cfg["signal"] = serde_json::json!({ "kind": "file", "path": "coeffs.json" });
    let path = dir.path().join("file_signal.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let out = run("reconstruct", &path, dir.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&dir.path().join("report.json"));
    assert!(report["seed"].is_null());
    assert!(report["maxAbsError"].as_f64().unwrap() <= 1e-8);
}

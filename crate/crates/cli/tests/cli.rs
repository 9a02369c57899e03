use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypregen"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

/// Asserts the exit code and returns the single-line stderr error object.
fn stderr_error(out: &Output, code: i32) -> Value {
    assert_eq!(out.status.code(), Some(code), "stdout: {}", String::from_utf8_lossy(&out.stdout));
    let text = String::from_utf8(out.stderr.clone()).unwrap();
    assert_eq!(text.trim_end().lines().count(), 1, "stderr: {text}");
    let v: Value = serde_json::from_str(text.trim()).expect("stderr is JSON");
    assert!(v["code"].is_string());
    assert!(v["message"].is_string());
    v
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PENTAGON: &str = "1.5707963,1.5707963,1.5707963,1.5707963,1.5707963";

#[test]
fn min_polygon_all_methods_agree_on_pentagon() {
    let v = stdout_json(&run(&["min-polygon", "--angles", PENTAGON, "--mode", "all", "--json"]));
    for m in ["incircle", "weighted", "oracle"] {
        let p = f(&v["methods"][m]["perimeter"]);
        assert!((p - 5.3063755).abs() < 1e-6, "{m}: {p}");
        assert!(f(&v["methods"][m]["characterization"]["spread"]) < 1e-5);
        assert!(f(&v["methods"][m]["criticality"]["min_eigenvalue"]) > 0.0);
    }
    assert!((f(&v["methods"]["incircle"]["r"]) - 0.6268696870).abs() < 1e-8);
    assert_eq!(v["agreement"].as_array().unwrap().len(), 3);
    assert_eq!(v["all_agree"], Value::Bool(true));
}

#[test]
fn min_polygon_single_modes() {
    let v = stdout_json(&run(&["min-polygon", "--angles", "1,1,1", "--mode", "incircle"]));
    assert!(v["methods"]["incircle"]["r"].is_number());
    assert!(v["methods"].get("oracle").is_none());
    assert!(v.get("agreement").is_none());

    let v = stdout_json(&run(&["min-polygon", "--angles", "1,1,1,1", "--weights", "1,2,1,2", "--mode", "weighted"]));
    let w = &v["methods"]["weighted"];
    assert_eq!(w["distances"].as_array().unwrap().len(), 4);
    assert!(f(&w["c"]) > 0.0);
}

#[test]
fn min_polygon_weighted_all_skips_incircle() {
    let v = stdout_json(&run(&["min-polygon", "--angles", "1,1.2,0.9,1.1", "--weights", "1,2,1.5,0.7"]));
    assert!(v["methods"].get("incircle").is_none());
    let a = f(&v["methods"]["weighted"]["w_perimeter"]);
    let b = f(&v["methods"]["oracle"]["w_perimeter"]);
    assert!((a - b).abs() < 1e-6 * a, "{a} vs {b}");
}

#[test]
fn min_polygon_obtuse_needs_flag() {
    let angles = "2.0,0.5,0.5,0.5,0.5";
    let e = stderr_error(&run(&["min-polygon", "--angles", angles]), 1);
    assert_eq!(e["code"], "angle_above_right");
    let v = stdout_json(&run(&["min-polygon", "--angles", angles, "--allow-obtuse"]));
    assert!(v["methods"]["oracle"]["perimeter"].is_number());
    assert!(v["methods"].get("incircle").is_none());
}

#[test]
fn min_polygon_rejects_non_hyperbolic() {
    // Σ(π - θ) = 2π - 0.01
    let t = std::f64::consts::PI - (2.0 * std::f64::consts::PI - 0.01) / 4.0;
    let angles = format!("{t},{t},{t},{t}");
    let e = stderr_error(&run(&["min-polygon", "--angles", &angles]), 1);
    assert_eq!(e["code"], "not_hyperbolic");
    assert!(e["message"].as_str().unwrap().contains("not hyperbolic"));
}

#[test]
fn min_polygon_rejects_bad_weights() {
    let e = stderr_error(&run(&["min-polygon", "--angles", "1,1,1", "--weights", "1,2"]), 1);
    assert_eq!(e["code"], "weight_mismatch");
    let e = stderr_error(&run(&["min-polygon", "--angles", "1,1,1", "--weights", "1,-2,1"]), 1);
    assert_eq!(e["code"], "bad_weight");
    let e = stderr_error(&run(&["min-polygon", "--angles", "1,x,1"]), 1);
    assert_eq!(e["code"], "parse_error");
}

#[test]
fn min_polygon_is_deterministic() {
    let args = ["min-polygon", "--angles", "0.9,1.1,1.0,1.2", "--weights", "1,2,3,1", "--mode", "oracle", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.json");
    let out = run(&["min-polygon", "--angles", "1,1,1", "--mode", "incircle", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "min-polygon");
}

#[test]
fn numbers_carry_seventeen_digits() {
    let out = run(&["min-polygon", "--angles", "1,1,1", "--mode", "incircle", "--json"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let r = v["methods"]["incircle"]["r"].to_string();
    let mantissa = r.split('e').next().unwrap();
    assert_eq!(mantissa.trim_start_matches('-').replace('.', "").len(), 17, "{r}");
    assert_eq!(text.trim_end().lines().count(), 1);
}

const PERPENDICULAR: &str = r#"{"sigma": [[0, 1], [0, 2.718281828459045]],
  "faults": [{"endpoints": [-1.6487212707001282, 1.6487212707001282], "weight": 1}]}"#;

#[test]
fn earthquake_check_perpendicular_midpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", PERPENDICULAR);
    let v = stdout_json(&run(&["earthquake", "--config", &cfg, "--check"]));
    let first = &v["check"]["first"];
    assert!(f(&first["closed_form"]).abs() < 1e-8);
    assert!(f(&first["finite_difference"]).abs() < 1e-8);
    let second = &v["check"]["second"];
    let closed = f(&second["closed_form"]);
    assert!((closed - 1.0819767068693262).abs() < 1e-12);
    assert!((closed - f(&second["finite_difference"])).abs() < 1e-4);
    assert_eq!(second["pass"], Value::Bool(true));
}

#[test]
fn earthquake_without_faults_keeps_length() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"sigma": [[0.3, 1], [1, 2]], "faults": []}"#);
    let v = stdout_json(&run(&["earthquake", "--config", &cfg, "--t", "5"]));
    assert_eq!(f(&v["length"]), f(&v["length_at_t"]));
}

#[test]
fn earthquake_negative_shear() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "cfg.json", PERPENDICULAR);
    let a = stdout_json(&run(&["earthquake", "--config", &cfg, "--t", "-0.4"]));
    let b = stdout_json(&run(&["earthquake", "--config", &cfg, "--t", "0.4"]));
    // symmetric crossing: the length is even in t
    assert!((f(&a["length_at_t"]) - f(&b["length_at_t"])).abs() < 1e-12);
    assert!(f(&a["length_at_t"]) > f(&a["length"]));
}

#[test]
fn earthquake_errors() {
    let dir = tempfile::tempdir().unwrap();
    let overlap = write(
        dir.path(),
        "overlap.json",
        r#"{"sigma": [[0, 1], [0, 3]], "faults": [{"endpoints": [-2, 2], "weight": 1}, {"endpoints": [0, 3], "weight": 1}]}"#,
    );
    let e = stderr_error(&run(&["earthquake", "--config", &overlap]), 1);
    assert_eq!(e["code"], "faults_not_disjoint");
    assert!(e["message"].as_str().unwrap().contains("faults not disjoint"));

    let broken = write(dir.path(), "broken.json", r#"{"sigma": [[0, 1]"#);
    assert_eq!(stderr_error(&run(&["earthquake", "--config", &broken]), 1)["code"], "malformed_config");

    let missing = write(dir.path(), "missing.json", r#"{"sigma": [[0, 1], [0, 2]]}"#);
    assert_eq!(stderr_error(&run(&["earthquake", "--config", &missing]), 1)["code"], "malformed_config");

    let tangent = write(
        dir.path(),
        "tangent.json",
        r#"{"sigma": [[0, 1], [0, 3]], "faults": [{"endpoints": [-4e-8, 1e8], "weight": 1}]}"#,
    );
    assert_eq!(stderr_error(&run(&["earthquake", "--config", &tangent]), 2)["code"], "tangent_crossing");

    let absent = dir.path().join("absent.json");
    assert_eq!(stderr_error(&run(&["earthquake", "--config", absent.to_str().unwrap()]), 1)["code"], "io_error");
}

#[test]
fn killing_example() {
    let v = stdout_json(&run(&["killing", "--a", "[[1,0],[0,-1]]", "--b", "[[-3,4],[-2,3]]"]));
    assert_eq!(f(&v["killing_form"][0]), -24.0);
    assert_eq!(f(&v["killing_form"][1]), 0.0);
    let c2 = &v["identities"]["cosh_squared"];
    assert!((f(&c2[0]) - 9.0).abs() < 1e-12 && f(&c2[1]).abs() < 1e-12);
    assert!(f(&v["identities"]["killing_distance_residual"]) < 1e-12);
    assert_eq!(v["classification"]["a"]["type"], "axis");
    assert_eq!(v["classification"]["a"]["p_plus"], "inf");
}

#[test]
fn killing_complex_entries_and_parabolics() {
    let v = stdout_json(&run(&["killing", "--a", "[[0,[1,1]],[0,0]]", "--b", "[[[0.5,0.5],0],[1,[-0.5,-0.5]]]"]));
    assert_eq!(v["classification"]["a"]["type"], "parabolic");
    let id = &v["identities"]["parabolic_loxodromic"];
    assert!(id.is_object(), "{v}");

    let v = stdout_json(&run(&["killing", "--a", "[[0,1],[0,0]]", "--b", "[[0,0],[1,0]]", "--t", "0.5"]));
    let id = &v["identities"]["two_parabolics"];
    assert!(f(&id["swapped_residual"]) < 1e-10);
    assert!(f(&id["printed_residual"]) > 1e-2);
}

#[test]
fn killing_suite_passes() {
    let v = stdout_json(&run(&["killing", "--suite", "--trials", "200", "--seed", "3"]));
    let s = &v["suite"];
    assert!(f(&s["max_residual"]) < 1e-8);
    assert!(f(&s["two_parabolics_printed_min"]) > 1e-2);
    assert_eq!(s["pass"], Value::Bool(true));
}

#[test]
fn killing_errors() {
    let e = stderr_error(&run(&["killing", "--a", "[[1,0],[0,1]]", "--b", "[[0,1],[0,0]]"]), 1);
    assert_eq!(e["code"], "not_traceless");
    let e = stderr_error(&run(&["killing", "--a", "[[1,0]]", "--b", "[[0,1],[0,0]]"]), 1);
    assert_eq!(e["code"], "malformed_matrix");
    let e = stderr_error(&run(&["killing", "--a", "[[1,0],[0,-1]]"]), 1);
    assert_eq!(e["code"], "missing_matrix");
}

#[test]
fn whitehead_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("curve.csv");
    let v = stdout_json(&run(&["whitehead", "--n", "5", "--steps", "50", "--csv", csv.to_str().unwrap()]));
    assert_eq!(v["rows"], 50);
    assert!(f(&v["max_abs_p"]) < 1e-9);
    assert!(f(&v["max_relator_defect"]) < 1e-9);
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "alpha,re_x,re_y,re_z,im_z,abs_p,relator_defect");
    assert_eq!(lines.count(), 50);
}

#[test]
fn whitehead_errors() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("c.csv");
    let csv = csv.to_str().unwrap();
    let e = stderr_error(&run(&["whitehead", "--n", "4", "--csv", csv]), 1);
    assert!(e["message"].as_str().unwrap().contains("n > 4"));
    let e = stderr_error(&run(&["whitehead", "--n", "5", "--steps", "1", "--csv", csv]), 1);
    assert!(e["message"].as_str().unwrap().contains("steps ≥ 2"));
    let e = stderr_error(&run(&["whitehead", "--n", "5", "--alpha-lo", "2.0", "--alpha-hi", "3.0", "--csv", csv]), 1);
    assert_eq!(e["code"], "range_misses_pi");
}

const THIRDS: &str = "1.0471975511965976,1.0471975511965976,1.0471975511965976,1.0471975511965976";

#[test]
fn polygon_close_roundtrip() {
    let v = stdout_json(&run(&["polygon-close", "--angles", THIRDS, "--free", "1.5", "--guess", "1.5,1.5,1.5"]));
    let lengths = v["polygon"]["lengths"].as_array().unwrap();
    assert!((f(&lengths[0]) - 1.5).abs() < 1e-12);
    let angles = v["polygon"]["angles"].as_array().unwrap();
    for a in angles {
        assert!((f(a) - std::f64::consts::FRAC_PI_3).abs() < 1e-9);
    }
}

#[test]
fn polygon_close_failures() {
    let e = stderr_error(&run(&["polygon-close", "--angles", THIRDS, "--free", "1.0", "--guess", "1.5,1.5,1.5"]), 2);
    assert!(["no_convergence", "degenerate_length", "ill_conditioned", "non_convex"].contains(&e["code"].as_str().unwrap()));
    let e = stderr_error(&run(&["polygon-close", "--angles", THIRDS, "--free", "1.5,1.0"]), 1);
    assert_eq!(e["code"], "length_mismatch");
    let e = stderr_error(&run(&["polygon-close", "--angles", THIRDS, "--free", "1.5", "--guess", "1,1"]), 1);
    assert_eq!(e["code"], "length_mismatch");
}

#[test]
fn usage_errors_are_json() {
    let e = stderr_error(&run(&["min-polygon"]), 1);
    assert_eq!(e["code"], "usage");
    let e = stderr_error(&run(&["no-such-command"]), 1);
    assert_eq!(e["code"], "usage");
    let e = stderr_error(&run(&["min-polygon", "--angles", "1,1,1", "--mode", "fastest"]), 1);
    assert_eq!(e["code"], "usage");
}

#[test]
fn help_and_version_exit_zero() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["--version"]).status.success());
    assert!(run(&["whitehead", "--help"]).status.success());
}

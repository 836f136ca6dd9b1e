use lorentzlab_cli::{render, run, Analysis, CliError, Options};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::Command;

fn spec_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn run_spec(name: &str, opts: &Options) -> Result<(Value, bool), CliError> {
    let bytes = std::fs::read(spec_path(name)).unwrap();
    let out = run(&bytes, opts)?;
    Ok((out.report, out.rejected))
}

fn bin(args: &[&str]) -> (Option<i32>, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lorentzlab")).args(args).output().unwrap();
    (out.status.code(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn minkowski_curvature_vanishes() {
    let (r, _) = run_spec("minkowski3.json", &Options::new(Analysis::Curvature)).unwrap();
    let res = &r["results"];
    assert!(res["sectional"]["spread"].as_f64().unwrap() < 1e-9);
    assert_eq!(res["max_abs_riemann"].as_f64().unwrap(), 0.0);
    assert_eq!(r["analysis"], "curvature");
    assert_eq!(r["input_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn de_sitter_curvature_is_one() {
    let (r, _) = run_spec("de_sitter3.json", &Options::new(Analysis::Curvature)).unwrap();
    let k = r["results"]["sectional"]["k_mean"].as_f64().unwrap();
    assert!((k - 1.0).abs() < 1e-6, "{k}");
    assert_eq!(r["results"]["constant_curvature"], true);
}

#[test]
fn malformed_specs_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let out = out.to_str().unwrap();
    let cases = [
        "{ not json",
        r#"{"schema_version": 1, "name": "x", "metric": {"builtin": "minkowski", "params": {"n": 3}}, "extra": 1}"#,
        r#"{"schema_version": 2, "name": "x", "metric": {"builtin": "minkowski", "params": {"n": 3}}}"#,
        r#"{"schema_version": 1, "name": "x", "metric": {"builtin": "nope"}}"#,
        r#"{"schema_version": 1, "name": "x", "metric": {"coords": ["t"], "components": [["-1 +"]], "signature": [-1]}}"#,
        r#"{"schema_version": 1, "name": "x", "metric": {"builtin": "minkowski", "params": {"n": 3}}, "point": [0, 0]}"#,
    ];
    for (i, text) in cases.iter().enumerate() {
        let spec = dir.path().join(format!("s{i}.json"));
        std::fs::write(&spec, text).unwrap();
        let (code, err) = bin(&["curvature", "--spec", spec.to_str().unwrap(), "--out", out]);
        assert_eq!(code, Some(2), "case {i}: {err}");
        assert!(!Path::new(out).exists(), "no report on failure");
    }
}

#[test]
fn domain_errors_exit_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("deg.json");
    std::fs::write(
        &spec,
        r#"{"schema_version": 1, "name": "x", "point": [0, 0],
            "metric": {"coords": ["t", "x"], "components": [["-1", "0"], ["x^2"]], "signature": [-1, 1]}}"#,
    )
    .unwrap();
    let out = dir.path().join("r.json");
    let (code, _) = bin(&["curvature", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, Some(3));
}

#[test]
fn warped_verdicts_and_exit_codes() {
    let (r, rejected) = run_spec("warped_w1.json", &Options::new(Analysis::Warped)).unwrap();
    assert_eq!(r["results"]["criterion"]["verdict"], "warped");
    assert!(!rejected);
    let (r, rejected) = run_spec("not_warped.json", &Options::new(Analysis::Warped)).unwrap();
    assert_eq!(r["results"]["criterion"]["verdict"], "not_warped");
    assert!(rejected);

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let spec = spec_path("not_warped.json");
    let (code, _) = bin(&["warped", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, Some(1));
    assert!(out.exists());
}

#[test]
fn warped_needs_a_product_split() {
    let err = run_spec("minkowski3.json", &Options::new(Analysis::Warped)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn minkowski_geodesic_is_a_straight_line() {
    let mut opts = Options::new(Analysis::Geodesic);
    opts.point = Some(vec![0.0, 0.0, 0.0]);
    opts.velocity = Some(vec![1.0, 0.5, -0.25]);
    let bytes = std::fs::read(spec_path("minkowski3.json")).unwrap();
    let out = run(&bytes, &opts).unwrap();
    let res = &out.report["results"];
    assert!(res["energy_drift"].as_f64().unwrap() < 1e-12);
    let x: Vec<f64> = serde_json::from_value(res["endpoint"]["x"].clone()).unwrap();
    for (a, b) in x.iter().zip([1.0, 0.5, -0.25]) {
        assert!((a - b).abs() < 1e-12);
    }
    let csv = out.csv.unwrap();
    assert!(csv.starts_with("s,x_t,x_x,x_y,v_t,v_x,v_y\n"));
    assert_eq!(csv.lines().count(), 102);
}

#[test]
fn geodesic_without_velocity_is_an_input_error() {
    let err = run_spec("minkowski3.json", &Options::new(Analysis::Geodesic)).unwrap_err();
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn killing_search_on_de_sitter_is_empty() {
    let (r, _) = run_spec("de_sitter3.json", &Options::new(Analysis::Killing)).unwrap();
    assert_eq!(r["results"]["search"]["empty"], true);
}

#[test]
fn killing_flags_non_killing_fields() {
    let (r, rejected) = run_spec("killing_minkowski.json", &Options::new(Analysis::Killing)).unwrap();
    let fields = r["results"]["fields"].as_array().unwrap();
    let killing: Vec<bool> = fields.iter().map(|f| f["is_killing"].as_bool().unwrap()).collect();
    assert_eq!(killing, [true, true, false]);
    assert!(rejected);
    assert_eq!(fields[0]["lightlike"]["lightlike_everywhere"], true);
    assert!(!r["results"]["search"]["candidates"].as_array().unwrap().is_empty());
}

#[test]
fn scan_labels() {
    let opts = Options::new(Analysis::ScanCx);
    let (r, _) = run_spec("minkowski3.json", &opts).unwrap();
    assert_eq!(r["results"]["scan"]["class_label"], "cone");
    let (r, _) = run_spec("perturbed.json", &opts).unwrap();
    assert_eq!(r["results"]["scan"]["class_label"], "empty");
}

#[test]
fn tolerance_overrides_are_recorded() {
    let text = r#"{"schema_version": 1, "name": "x", "metric": {"builtin": "minkowski", "params": {"n": 3}},
                   "tolerances": {"curvature_spread": 1e-3}}"#;
    let out = run(text.as_bytes(), &Options::new(Analysis::Curvature)).unwrap();
    assert_eq!(out.report["parameters"]["tolerances"]["curvature_spread"], 1e-3);
    assert_eq!(out.report["parameters"]["tolerances"]["certificate"], 1e-7);
    assert!(render(&out.report).ends_with("}\n"));
}

#[test]
fn seeds_change_sampled_planes_but_not_reruns() {
    let bytes = std::fs::read(spec_path("de_sitter3.json")).unwrap();
    let mut opts = Options::new(Analysis::Curvature);
    let a = render(&run(&bytes, &opts).unwrap().report);
    let b = render(&run(&bytes, &opts).unwrap().report);
    assert_eq!(a, b);
    opts.seed = 9;
    let c = render(&run(&bytes, &opts).unwrap().report);
    assert_ne!(a, c);
}

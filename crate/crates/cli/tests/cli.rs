//! End-to-end checks of the command-line interface against the shipped
//! system files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rgflow"))
}

fn systems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../systems")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn rgflow")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn shipped_files_round_trip_byte_identically() {
    for name in [
        "forced_oscillator_omega3.json",
        "forced_oscillator_omega2.json",
        "forced_oscillator_omega1.json",
        "mathieu_linear.json",
        "enzyme_manifold.json",
        "radial_oscillator_phase.json",
    ] {
        let path = systems_dir().join(name);
        let text = std::fs::read_to_string(&path).unwrap();
        let (raw, _) = rgflow::io::parse_system_str(&text).unwrap();
        let again = rgflow::io::canonical_json(&raw).unwrap();
        assert_eq!(text, again, "{name} does not round trip");
    }
}

#[test]
fn derive_renders_the_known_equation() {
    let tmp = std::env::temp_dir().join("rgflow_cli_derive");
    std::fs::create_dir_all(&tmp).unwrap();
    let json_path = tmp.join("rg3.json");
    let txt_path = tmp.join("rg3.txt");
    let input = systems_dir().join("forced_oscillator_omega3.json");
    let out = run(&[
        "derive",
        "--order",
        "2",
        "--in",
        input.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
        "--render",
        txt_path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rendered = std::fs::read_to_string(&txt_path).unwrap();
    assert!(rendered.contains("1/2*y1 + (-3/2-8/3i)*y1^2*y2"), "{rendered}");
    assert!(rendered.contains("dr/dt += eps^2*( 1/2*r - 3/2*r^3 )"));
    assert!(rendered.contains("dtheta/dt += eps^2*( -8/3*r^2 )"));
    // identical invocation gives byte-identical output
    let first = std::fs::read(&json_path).unwrap();
    let out2 = run(&[
        "derive",
        "--order",
        "2",
        "--in",
        input.to_str().unwrap(),
        "--out",
        json_path.to_str().unwrap(),
    ]);
    assert!(out2.status.success());
    let second = std::fs::read(&json_path).unwrap();
    assert_eq!(first, second);
}

#[test]
fn derive_rejects_order_zero_with_exit_two() {
    let input = systems_dir().join("forced_oscillator_omega3.json");
    let out = run(&["derive", "--order", "0", "--in", input.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_errors_exit_with_code_two() {
    let tmp = std::env::temp_dir().join("rgflow_cli_bad.json");
    std::fs::write(&tmp, "{\"mode\": \"periodic\", \"n\": 1, \"orders\": {\"1\": [{\"component\": 1, \"coeff_re\": \"1/0\", \"coeff_im\": \"0\", \"alpha\": [1], \"k\": []}]}}").unwrap();
    let out = run(&["derive", "--order", "1", "--in", tmp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("coeff_re"), "{err}");
}

#[test]
fn linear_derive_echoes_constant_matrix() {
    let tmp = std::env::temp_dir().join("rgflow_cli_linear.json");
    std::fs::write(
        &tmp,
        r#"{
  "mode": "linear",
  "n": 2,
  "scalar_mode": "exact",
  "base_frequencies": ["1"],
  "orders": {
    "1": [
      {"component": 1, "coeff_re": "2", "coeff_im": "0", "alpha": [1, 0], "k": [0]},
      {"component": 2, "coeff_re": "-1", "coeff_im": "0", "alpha": [0, 1], "k": [0]}
    ]
  }
}
"#,
    )
    .unwrap();
    let out = run(&["derive", "--order", "1", "--in", tmp.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed["r"][0][0]["coeff_re"], "2");
}

#[test]
fn fixed_points_locates_the_reference_point() {
    let input = systems_dir().join("forced_oscillator_omega1.json");
    let out = run(&[
        "fixed-points",
        "--order",
        "2",
        "--in",
        input.to_str().unwrap(),
        "--eps",
        "0.01",
        "--real",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let hit = text.lines().skip(1).any(|line| {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() < 5 {
            return false;
        }
        let x1: f64 = fields[0].parse().unwrap_or(f64::NAN);
        let x2: f64 = fields[2].parse().unwrap_or(f64::NAN);
        ((x1 + 4.35).powi(2) + (x2 - 2.31).powi(2)).sqrt() < 0.02 && line.contains("stable")
    });
    assert!(hit, "reference fixed point missing from:\n{text}");
}

#[test]
fn gsp_prints_the_reduced_drift_at_the_golden_point() {
    let input = systems_dir().join("enzyme_manifold.json");
    let out = run(&[
        "gsp",
        "--in",
        input.to_str().unwrap(),
        "--order",
        "1",
        "--alpha",
        "1,1,1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let line = text.lines().nth(1).expect("data row");
    let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((fields[1] + 0.25).abs() < 1e-10, "{line}");
    assert!((fields[3] - 1.0 / 32.0).abs() < 1e-10, "{line}");
}

#[test]
fn verify_reports_second_order_slope() {
    let input = systems_dir().join("forced_oscillator_omega3.json");
    let out = run(&[
        "verify",
        "--order",
        "2",
        "--in",
        input.to_str().unwrap(),
        "--y0",
        "0.2,-0.1,0.2,0.1",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let slope_line = text
        .lines()
        .find(|l| l.starts_with("# fitted_slope"))
        .expect("slope line");
    let slope: f64 = slope_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!(slope >= 1.7, "slope {slope}");
}

#[test]
fn floquet_sweep_emits_exponent_columns() {
    let input = systems_dir().join("mathieu_linear.json");
    let out = run(&[
        "floquet",
        "--order",
        "1",
        "--in",
        input.to_str().unwrap(),
        "--sweep",
        "0.05,0.2,3",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.starts_with("eps,defect_norm,exponent_re_1,exponent_im_1"));
    assert_eq!(text.lines().count(), 4, "{text}");
}

#[test]
fn phase_prints_unit_coupling_for_tangential_forcing() {
    let input = systems_dir().join("radial_oscillator_phase.json");
    let out = run(&["phase", "--in", input.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let coupling_line = text
        .lines()
        .find(|l| l.starts_with("# coupling"))
        .expect("coupling line");
    let coupling: f64 = coupling_line.split('=').nth(1).unwrap().trim().parse().unwrap();
    assert!((coupling - 1.0).abs() < 1e-6, "{coupling_line}");
}

#[test]
fn numeric_nonconvergence_exits_with_code_four() {
    // a contracting field has no limit cycle, so the shooting fails
    let tmp = std::env::temp_dir().join("rgflow_cli_nocycle.json");
    std::fs::write(
        &tmp,
        r#"{
  "mode": "phase",
  "n": 2,
  "scalar_mode": "float",
  "fast": [
    {"num": [{"coeff": "-1", "alpha": [1, 0]}]},
    {"num": [{"coeff": "-1", "alpha": [0, 1]}]}
  ],
  "slow_orders": {
    "1": [
      {"num": [{"coeff": "1", "alpha": [0, 0]}]},
      {"num": []}
    ]
  },
  "cycle_seed": [1.0, 0.0],
  "period_hint": 6.0
}
"#,
    )
    .unwrap();
    let out = run(&["phase", "--in", tmp.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

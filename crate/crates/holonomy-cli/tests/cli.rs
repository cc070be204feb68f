//! End-to-end runs of the `holonomy` binary against the bundled configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../..")
        .canonicalize()
        .unwrap()
}

fn holonomy(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_holonomy"))
        .args(args)
        .current_dir(workspace_root())
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn phase_bloch_theta_matches_closed_form() {
    let out = holonomy(&["phase", "--config", "configs/bloch_theta.json"]);
    let report = stdout_json(&out);
    let weighted = report["weighted"].as_f64().unwrap();
    let expected = -0.8 * std::f64::consts::PI;
    assert!(
        (weighted - expected).abs() < 1e-4,
        "weighted {weighted} vs {expected}"
    );
}

#[test]
fn phase_is_deterministic_up_to_runtime() {
    let strip = |out: &Output| {
        let mut v = stdout_json(out);
        v.as_object_mut().unwrap().remove("runtime_ms");
        v
    };
    let a = holonomy(&["phase", "--config", "configs/bloch_theta.json"]);
    let b = holonomy(&["phase", "--config", "configs/bloch_theta.json"]);
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn phase_rejects_malformed_weights() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"n": 3, "k": 2, "weights": [0.5, 0.2],
            "curve": {"generator": "random_loop", "modes": 2}}"#,
    )
    .unwrap();
    let out = holonomy(&["phase", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("weights"), "stderr: {stderr}");
}

#[test]
fn usage_error_exits_one() {
    let out = holonomy(&["phase", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn npc_classifies_fixtures() {
    let out = holonomy(&["npc", "--config", "configs/geodesic.json"]);
    let report = stdout_json(&out);
    assert_eq!(report["class"], "NPC");
    assert!(report["witness"].is_null());

    let out = holonomy(&["npc", "--config", "configs/orthogonal_pair.json"]);
    let report = stdout_json(&out);
    assert_eq!(report["class"], "invalid");
    assert!(report["witness"].is_object());
}

#[test]
fn npc_triangle_residual_is_small() {
    let out = holonomy(&["npc", "--config", "configs/triangle_n3k2.json", "--triangle"]);
    let report = stdout_json(&out);
    let residual = report["residual"].as_f64().unwrap();
    assert!(residual < 1e-5, "residual {residual}");
}

#[test]
fn sweep_theta_is_monotone_to_minus_two_pi() {
    let out = holonomy(&["sweep", "--config", "configs/sweep_theta.json"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut weighted = Vec::new();
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        weighted.push(cols[5].parse::<f64>().unwrap());
    }
    assert_eq!(weighted.len(), 32);
    assert!(weighted[0].abs() < 1e-9);
    assert!((weighted[31] + 2.0 * std::f64::consts::PI).abs() < 1e-4);
    for w in weighted.windows(2) {
        assert!(w[1] <= w[0] + 1e-12, "not monotone: {} then {}", w[0], w[1]);
    }
}

#[test]
fn sweep_empty_grid_gives_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.json");
    std::fs::write(
        &path,
        r#"{"n": 2, "k": 1, "weights": [1.0],
            "curve": {"generator": "bloch_circle", "theta": 0.5},
            "sweep": {"param": "theta", "from": 0.0, "to": 1.0, "points": 0}}"#,
    )
    .unwrap();
    let out = holonomy(&["sweep", "--config", path.to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("theta,n,k,"));
}

#[test]
fn sweep_output_is_deterministic_modulo_runtime() {
    let strip = |out: &Output| -> String {
        String::from_utf8_lossy(&out.stdout)
            .lines()
            .map(|l| l.rsplit_once(',').unwrap().0.to_string())
            .collect::<Vec<_>>()
            .join("\n")
    };
    let a = holonomy(&["sweep", "--config", "configs/sweep_kappa.json"]);
    let b = holonomy(&["sweep", "--config", "configs/sweep_kappa.json"]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn samples_and_grid_surface_round_trip() {
    // literal-sample loop with a coarse grid surface: the residual is
    // dominated by the 17×17 first-order quadrature, so --strict trips
    let out = holonomy(&["phase", "--config", "configs/samples_phase.json"]);
    let report = stdout_json(&out);
    assert!(report["area"].is_number());
    let out = holonomy(&[
        "phase",
        "--config",
        "configs/samples_phase.json",
        "--strict",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn constant_loop_reports_zero_phases() {
    let out = holonomy(&["phase", "--config", "configs/constant_loop.json"]);
    let report = stdout_json(&out);
    for p in report["per_level"].as_array().unwrap() {
        assert!(p.as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn non_cyclic_hamiltonian_is_a_numeric_failure() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("noncyclic.json");
    // generic Hermitian matrix: exp(−iTH) does not commute with ρ₀
    std::fs::write(
        &path,
        r#"{"n": 2, "k": 1, "weights": [1.0],
            "curve": {"generator": "hamiltonian",
                      "matrix": [[1.0, 0.0], [0.3, 0.1], [0.3, -0.1], [2.0, 0.0]],
                      "t": 1.0}}"#,
    )
    .unwrap();
    let out = holonomy(&["phase", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn selftest_filter_runs_single_check() {
    let out = holonomy(&["selftest", "--filter", "chart"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains("chart-roundtrip"));
    assert!(lines[0].starts_with("PASS"));
}

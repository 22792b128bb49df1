use std::process::{Command, Output};

use serde_json::Value;

fn dualrail(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dualrail"))
        .args(args)
        .output()
        .unwrap()
}

fn report(args: &[&str]) -> Value {
    let out = dualrail(args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn regenerate_exact_example() {
    let r = report(&[
        "regenerate",
        "--gamma",
        "0.5",
        "--c0",
        "0.7071",
        "--c1",
        "0.7071",
        "--mode",
        "exact",
    ]);
    assert_eq!(r["command"], "regenerate");
    let p = r["results"]["p_success"].as_f64().unwrap();
    assert!((p - (-0.5f64).exp()).abs() < 1e-12);
    assert!((r["results"]["fidelity"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(r.get("seed").is_none());
}

#[test]
fn watchdog_table() {
    let r = report(&["watchdog", "--eps", "0.001", "--steps", "10"]);
    let t = &r["results"];
    assert!((t["unregenerated_closed_form"].as_f64().unwrap() - 0.9).abs() < 1e-15);
    assert!((t["regenerated_closed_form"].as_f64().unwrap() - 0.999f64.powi(10)).abs() < 1e-15);
    assert!((t["unregenerated_exact"].as_f64().unwrap() - 0.9).abs() < 1e-4);
}

#[test]
fn capacity_and_visibility() {
    let r = report(&["capacity", "--alpha", "1.0"]);
    assert_eq!(r["results"]["classical_bits"], 1.0);
    assert_eq!(r["results"]["quantum_lower_bound_qubits"], 0.5);
    let r = report(&[
        "visibility",
        "--gamma-a",
        "0",
        "--gamma-b",
        &4f64.ln().to_string(),
    ]);
    assert!((r["results"]["visibility"].as_f64().unwrap() - 0.8).abs() < 1e-15);
}

#[test]
fn magnitude_and_phase_amplitudes() {
    let r = report(&[
        "channel",
        "--gamma",
        "0",
        "--cutoff",
        "2",
        "--c0",
        "0.6",
        "--c1",
        "0.8",
        "--c1-phase",
        "1.5707963267948966",
    ]);
    let m = &r["results"]["output_density_matrix"]["matrix"];
    // rho[01][10] = c0 conj(c1) = 0.6 * 0.8 * (-i)
    let z = &m[1][2];
    assert!(z[0].as_f64().unwrap().abs() < 1e-12);
    assert!((z[1].as_f64().unwrap() + 0.48).abs() < 1e-12);
}

#[test]
fn csv_output() {
    let out = dualrail(&["--output", "csv", "capacity", "--alpha", "0.5"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        text,
        "key,value\ncommand,capacity\nclassical_bits,0.5\nquantum_lower_bound_qubits,0.25\n"
    );
}

#[test]
fn circuit_file_round_trip() {
    let dir = std::env::temp_dir().join(format!("dualrail-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("hom.json");
    std::fs::write(
        &path,
        r#"{"modes": 2, "cutoff": 3, "elements": [{"type": "beamsplitter", "modes": [0, 1], "theta": 0.7853981633974483}]}"#,
    )
    .unwrap();
    let report_path = dir.join("out.json");
    let out = dualrail(&[
        "--out",
        report_path.to_str().unwrap(),
        "channel",
        "--circuit",
        path.to_str().unwrap(),
        "--input",
        "1,1",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&report_path).unwrap()).unwrap();
    let m = &r["results"]["output_density_matrix"]["matrix"];
    // |11> sits at index 4 in a 2-mode cutoff-3 space.
    assert!(m[4][4][0].as_f64().unwrap().abs() < 1e-12);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn exit_codes() {
    assert_eq!(dualrail(&["transmit", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        dualrail(&["transmit", "--eps", "0.1", "--gamma", "0.1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dualrail(&["capacity", "--alpha", "1.5"]).status.code(),
        Some(3)
    );
    assert_eq!(
        dualrail(&["regenerate", "--c0", "1", "--c1", "1"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        dualrail(&[
            "regenerate",
            "--c0",
            "1",
            "--c1",
            "1",
            "--allow-renormalize"
        ])
        .status
        .code(),
        Some(0)
    );
    assert_eq!(
        dualrail(&["transmit", "--eps", "0.5", "--segments", "10"])
            .status
            .code(),
        Some(3)
    );
    assert_eq!(
        dualrail(&["channel", "--circuit", "/nonexistent/circuit.json"])
            .status
            .code(),
        Some(4)
    );
    assert_eq!(
        dualrail(&[
            "--out",
            "/nonexistent/dir/r.json",
            "capacity",
            "--alpha",
            "1"
        ])
        .status
        .code(),
        Some(4)
    );
}

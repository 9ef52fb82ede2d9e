//! End-to-end checks of the binary: every subcommand runs, outputs parse
//! back through their declared schema, reruns are byte-identical, and the
//! exit codes distinguish configuration from numerical failures.

use std::path::Path;
use std::process::{Command, Output};

fn icw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_icw"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = icw(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8 output")
}

/// Parse a CSV body: `# config {...}` first, optional `# key = value` lines,
/// then a header row and float cells.
fn parse_csv(body: &str) -> (serde_json::Value, Vec<String>, Vec<Vec<f64>>) {
    let mut lines = body.lines();
    let first = lines.next().expect("nonempty output");
    let config: serde_json::Value = serde_json::from_str(
        first
            .strip_prefix("# config ")
            .expect("config header present"),
    )
    .expect("config is valid json");
    let mut header = None;
    let mut rows = Vec::new();
    for line in lines {
        if line.starts_with('#') {
            continue;
        }
        if header.is_none() {
            header = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|c| c.parse::<f64>().expect("float cell"))
            .collect();
        rows.push(row);
    }
    (config, header.expect("header row"), rows)
}

#[test]
fn critical_point_homogeneous_icw_is_one() {
    let body = stdout_of(&["critical-point", "--model", "icw", "--homogeneous"]);
    let (config, header, rows) = parse_csv(&body);
    assert_eq!(header, ["nu", "beta_c"]);
    assert_eq!(rows[0], [1.0, 1.0]);
    assert_eq!(config["beta_c"], 1.0);
}

#[test]
fn critical_point_grg_is_asinh() {
    let body = stdout_of(&["critical-point", "--model", "grg", "--homogeneous"]);
    let (_, _, rows) = parse_csv(&body);
    assert!((rows[0][1] - 1.0_f64.asinh()).abs() < 1e-14);
}

#[test]
fn enumerate_two_spins() {
    let body = stdout_of(&["enumerate", "--n", "2", "--homogeneous", "--theta", "1"]);
    let (_, header, rows) = parse_csv(&body);
    assert_eq!(header, ["s", "probability"]);
    let p0 = rows.iter().find(|r| r[0] == 0.0).unwrap()[1];
    assert!((p0 - 0.2689414213699951).abs() < 1e-12);
    let total: f64 = rows.iter().map(|r| r[1]).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn enumerate_both_measures_reports_tv() {
    let body = stdout_of(&[
        "enumerate",
        "--model",
        "grg",
        "--n",
        "8",
        "--tau",
        "4",
        "--beta-offset",
        "0",
        "--measure",
        "both",
    ]);
    assert!(body.contains("# total_variation = "));
    let (_, header, rows) = parse_csv(&body);
    assert_eq!(header, ["s", "p_tilde", "p_exact"]);
    assert_eq!(rows.len(), 9);
}

#[test]
fn exponent_fit_delta_icw_homogeneous() {
    let body = stdout_of(&["exponent-fit", "--exponent", "delta", "--model", "icw", "--homogeneous"]);
    let doc: serde_json::Value = serde_json::from_str(&body).expect("fit report is json");
    let slope = doc["slope"].as_f64().unwrap();
    assert!((slope - 1.0 / 3.0).abs() < 0.02, "slope {slope}");
    assert_eq!(doc["exponent_name"], "delta");
    assert_eq!(doc["regime"], "finite_fourth");
    assert!(doc["r_squared"].as_f64().unwrap() > 0.999);
}

#[test]
fn magnetization_curve_schema_and_flow() {
    let body = stdout_of(&[
        "magnetization-curve",
        "--model",
        "icw",
        "--homogeneous",
        "--sweep",
        "field",
        "--beta",
        "0.5",
        "--from",
        "0.01",
        "--to",
        "1",
        "--points",
        "7",
        "--log-grid",
    ]);
    let (config, header, rows) = parse_csv(&body);
    assert_eq!(
        header,
        ["beta", "B", "z_star", "magnetization", "susceptibility"]
    );
    assert_eq!(rows.len(), 7);
    assert_eq!(config["theta"], 0.5);
    // magnetization increases with B
    for pair in rows.windows(2) {
        assert!(pair[1][3] > pair[0][3]);
    }
}

#[test]
fn clt_density_reduction_and_normalization() {
    let body = stdout_of(&[
        "clt-density",
        "--homogeneous",
        "--x-max",
        "5",
        "--points",
        "51",
    ]);
    let (_, header, rows) = parse_csv(&body);
    assert_eq!(header, ["x", "f", "unnormalized_density", "normalized_density"]);
    // b = 0: unnormalized density is exactly exp(-f)
    for r in &rows {
        assert_eq!(r[2], (-r[1]).exp());
    }
    // trapezoid over the table integrates the normalized column to ~1
    let h = rows[1][0] - rows[0][0];
    let mass: f64 = rows.windows(2).map(|w| 0.5 * (w[0][3] + w[1][3]) * h).sum();
    assert!((mass - 1.0).abs() < 1e-3, "mass {mass}");
}

#[test]
fn window_tilts_the_density() {
    let flat = stdout_of(&["window", "--homogeneous", "--window-b", "0", "--points", "21"]);
    let tilted = stdout_of(&["window", "--homogeneous", "--window-b", "1", "--points", "21"]);
    let (_, _, rows0) = parse_csv(&flat);
    let (_, _, rows1) = parse_csv(&tilted);
    // positive b pushes mass outward: at x = ±x_max the tilted unnormalized
    // density must exceed the critical one
    assert!(rows1[0][2] > rows0[0][2]);
    // and the b = 1 homogeneous tilt is exp(sqrt(2)/2 x^2 - x^4/12)
    let at = rows1.iter().find(|r| (r[0] - 1.2).abs() < 1e-9).unwrap();
    let expected = (0.5_f64.sqrt() * at[0] * at[0] - at[0].powi(4) / 12.0).exp();
    assert!((at[2] - expected).abs() < 1e-12);
}

#[test]
fn sample_output_parses_and_is_deterministic() {
    let a = stdout_of(&[
        "sample", "--homogeneous", "--n", "12", "--theta", "1", "--samples", "64", "--seed", "9",
    ]);
    let b = stdout_of(&[
        "sample", "--homogeneous", "--n", "12", "--theta", "1", "--samples", "64", "--seed", "9",
    ]);
    assert_eq!(a, b, "same config and seed must be byte-identical");
    let c = stdout_of(&[
        "sample", "--homogeneous", "--n", "12", "--theta", "1", "--samples", "64", "--seed", "10",
    ]);
    assert_ne!(a, c);

    assert!(a.starts_with("# config "));
    let values: Vec<i64> = a
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.parse().expect("integer sample"))
        .collect();
    assert_eq!(values.len(), 64);
    for v in values {
        assert!(v.abs() <= 12 && (v + 12) % 2 == 0);
    }
}

#[test]
fn clt_check_small_system() {
    let body = stdout_of(&[
        "clt-check",
        "--homogeneous",
        "--n",
        "4096",
        "--z",
        "1",
        "--r",
        "0.5",
    ]);
    let (_, header, rows) = parse_csv(&body);
    assert_eq!(header, ["is_mgf", "z", "r", "finite_n", "limit", "abs_diff"]);
    assert_eq!(rows.len(), 2);
    // z-row approaches 1/12 already at n = 4096
    assert!((rows[0][3] - 1.0 / 12.0).abs() < 0.01);
    // MGF row within a few percent of its limit
    assert!(rows[1][5] / rows[1][4] < 0.05);
}

#[test]
fn partition_stabilizes_on_small_sizes() {
    let body = stdout_of(&[
        "partition",
        "--homogeneous",
        "--n-list",
        "100,1000,10000",
        "--format",
        "csv",
    ]);
    let (_, header, rows) = parse_csv(&body);
    assert_eq!(header, ["n", "log_z_tilde", "c_n", "diff_prev"]);
    assert!(rows[2][3].abs() < rows[1][3].abs());
}

#[test]
fn json_format_round_trips() {
    let body = stdout_of(&[
        "critical-point",
        "--model",
        "grg",
        "--tau",
        "4",
        "--n",
        "100",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&body).expect("valid json");
    assert_eq!(doc["config"]["model"], "grg");
    assert_eq!(doc["columns"][1], "beta_c");
    assert!(doc["rows"][0]["beta_c"].as_f64().unwrap() > 0.0);
}

#[test]
fn deterministic_output_files() {
    let dir = std::env::temp_dir().join("icw-cli-test");
    std::fs::create_dir_all(&dir).unwrap();
    let p1 = dir.join("a.csv");
    let p2 = dir.join("b.csv");
    for p in [&p1, &p2] {
        let out = icw(&[
            "magnetization-curve",
            "--model",
            "grg",
            "--tau",
            "3.5",
            "--n",
            "50",
            "--sweep",
            "beta",
            "--from",
            "0.1",
            "--to",
            "1.2",
            "--points",
            "12",
            "--output",
            p.to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert_eq!(a, b);
    cleanup(&dir);
}

fn cleanup(dir: &Path) {
    let _ = std::fs::remove_dir_all(dir);
}

#[test]
fn exit_code_2_on_config_errors() {
    // missing weights
    let out = icw(&["critical-point", "--model", "icw"]);
    assert_eq!(out.status.code(), Some(2));
    // tau outside (3,5) for a finite sequence
    let out = icw(&["critical-point", "--tau", "5", "--n", "10"]);
    assert_eq!(out.status.code(), Some(2));
    // enumeration too large
    let out = icw(&["enumerate", "--homogeneous", "--n", "30", "--theta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    // exact measure needs the graph model
    let out = icw(&[
        "enumerate",
        "--model",
        "icw",
        "--homogeneous",
        "--n",
        "4",
        "--theta",
        "0.5",
        "--measure",
        "exact",
    ]);
    assert_eq!(out.status.code(), Some(2));
    // clap-level parse failure
    let out = icw(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn beta_offset_is_relative_to_the_critical_sequence() {
    let body = stdout_of(&[
        "enumerate",
        "--model",
        "grg",
        "--n",
        "6",
        "--tau",
        "4",
        "--beta-offset",
        "0",
        "--format",
        "json",
    ]);
    let doc: serde_json::Value = serde_json::from_str(&body).unwrap();
    let beta = doc["config"]["beta"].as_f64().unwrap();
    let beta_c = doc["config"]["beta_c"].as_f64().unwrap();
    assert_eq!(beta, beta_c);
    // theta = sinh(beta_cN) = 1/nu_N
    let theta = doc["config"]["theta"].as_f64().unwrap();
    let nu = doc["config"]["nu"].as_f64().unwrap();
    assert!((theta - 1.0 / nu).abs() < 1e-13);
}

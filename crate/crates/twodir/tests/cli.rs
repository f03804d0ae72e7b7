//! End-to-end tests of the `twodir` binary: exit codes, output formats, and
//! byte determinism.

// frozen oracle values keep their full digits
#![allow(clippy::excessive_precision)]

use std::path::Path;
use std::process::{Command, Output};

fn twodir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twodir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

/// Parse the tool's CSV into (header, rows of numbers).
fn parse_csv(text: &str) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .expect("csv has a header")
        .split(',')
        .map(str::to_string)
        .collect();
    let rows = lines
        .map(|line| {
            line.split(',')
                .map(|cell| cell.parse::<f64>().expect("numeric cell"))
                .collect()
        })
        .collect();
    (header, rows)
}

#[test]
fn example_then_condition_e() {
    let dir = tempfile::tempdir().unwrap();
    let mask = dir.path().join("m.json");
    let out = twodir(&["example", "5.2", "--emit", mask.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr_str(&out));
    assert!(mask.exists());

    let out = twodir(&["condition-e", mask.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert!(text.contains("satisfied: true"), "{text}");
    let eigen_lines: Vec<&str> = text
        .lines()
        .skip_while(|l| *l != "eigenvalues:")
        .skip(1)
        .collect();
    assert_eq!(eigen_lines.len(), 4);
    let first: f64 = eigen_lines[0].split(' ').next().unwrap().parse().unwrap();
    assert!((first - 1.0).abs() < 1e-10);
}

#[test]
fn values_level0_for_builtin_5_1() {
    let out = twodir(&["values", "5.1", "--levels", "0", "--function", "phi"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, ["x", "f_1"]);
    assert_eq!(rows.len(), 5);
    let want = [0.0, -0.0564, 0.7566, 0.0069, 0.0];
    for (i, row) in rows.iter().enumerate() {
        assert!((row[0] - i as f64).abs() < 1e-14);
        assert!((row[1] - want[i]).abs() < 5e-4);
    }
}

#[test]
fn wavelet_values_for_builtin_5_2() {
    let out = twodir(&["values", "5.2", "--levels", "0", "--function", "psi:1"]);
    assert_eq!(out.status.code(), Some(0));
    let (header, rows) = parse_csv(&stdout_str(&out));
    assert_eq!(header, ["x", "f_1", "f_2"]);
    assert!((rows[1][1] - 1.2247448713915890491).abs() < 1e-9);
    assert!((rows[1][2] - std::f64::consts::SQRT_2 / 2.0).abs() < 1e-9);
}

#[test]
fn second_derivative_is_a_domain_error() {
    let out = twodir(&["values", "5.1", "--derivative", "2"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_str(&out);
    assert!(err.contains("no eigenvalue near 0.25"), "{err}");
}

#[test]
fn first_derivative_csv() {
    let out = twodir(&["values", "5.1", "--derivative", "1", "--levels", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = parse_csv(&stdout_str(&out));
    let want = [0.0, -0.6569, -4.4763, -0.0646, 0.0];
    for (row, w) in rows.iter().zip(want) {
        assert!((row[1] - w).abs() < 5e-4);
    }
}

#[test]
fn first_derivative_wavelet_csv() {
    let out = twodir(&[
        "values",
        "5.1",
        "--derivative",
        "1",
        "--function",
        "psi:1",
        "--levels",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let (_, rows) = parse_csv(&stdout_str(&out));
    let want = [0.0, 0.4775, 0.0, -0.4775, 0.0];
    for (row, w) in rows.iter().zip(want) {
        assert!((row[1] - w).abs() < 5e-4);
    }
}

#[test]
fn json_report_schema() {
    let out = twodir(&["values", "5.1", "--levels", "1", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("valid json");
    assert_eq!(value["kind"], "phi");
    assert_eq!(value["level"], 1);
    assert_eq!(value["grid"].as_array().unwrap().len(), 9);
    assert_eq!(value["values"].as_array().unwrap().len(), 9);
    let spectrum = value["spectrum"].as_array().unwrap();
    assert_eq!(spectrum.len(), 5);
    assert!((spectrum[0]["re"].as_f64().unwrap() - 1.0).abs() < 1e-10);
    assert!((value["normalizing_constant"].as_f64().unwrap() - 1.0).abs() < 1e-10);
}

#[test]
fn byte_identical_reruns() {
    for args in [
        vec!["values", "5.2", "--levels", "3", "--format", "json"],
        vec!["values", "5.1", "--levels", "2"],
        vec!["moments", "5.2", "--order", "2"],
        vec![
            "cascade",
            "5.1",
            "--levels",
            "3",
            "--iterations",
            "40",
            "--tol",
            "1e-10",
        ],
    ] {
        let a = twodir(&args);
        let b = twodir(&args);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout, "stdout differs for {args:?}");
        assert_eq!(a.stderr, b.stderr, "stderr differs for {args:?}");
    }
}

#[test]
fn emitted_csv_satisfies_table_invariants() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("phi.csv");
    let out = twodir(&[
        "values",
        "5.2",
        "--levels",
        "2",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let (header, rows) = parse_csv(&std::fs::read_to_string(&path).unwrap());
    assert_eq!(header, ["x", "f_1", "f_2"]);
    assert_eq!(rows.len(), 9);
    // rows ordered by increasing x with uniform spacing 1/4 over [0, 2]
    for (i, row) in rows.iter().enumerate() {
        assert!((row[0] - i as f64 * 0.25).abs() < 1e-15);
    }
    // boundary entries vanish
    assert_eq!(&rows[0][1..], &[0.0, 0.0]);
    assert_eq!(&rows[8][1..], &[0.0, 0.0]);
    // normalization: m_0^T sum over integer grid points = 1/2
    let sys = twodir::fixtures::system_5_2();
    let m0 = twodir::moments::zeroth_moment(&sys).unwrap();
    let mut sum = [0.0, 0.0];
    for i in (0..rows.len()).step_by(4) {
        sum[0] += rows[i][1];
        sum[1] += rows[i][2];
    }
    assert!((m0[0] * sum[0] + m0[1] * sum[1] - 0.5).abs() < 1e-9);
}

#[test]
fn cascade_reports_statistics() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cascade.csv");
    let out = twodir(&[
        "cascade",
        "5.1",
        "--levels",
        "3",
        "--iterations",
        "50",
        "--tol",
        "1e-10",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let stats = stdout_str(&out);
    assert!(stats.contains("converged: true"), "{stats}");
    assert!(stats.contains("iterations: "));
    assert!(stats.contains("final delta: "));
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("x,f_1\n"));
    // without --out the table goes to stdout and the stats to stderr
    let out = twodir(&[
        "cascade",
        "5.1",
        "--levels",
        "3",
        "--iterations",
        "50",
        "--tol",
        "1e-10",
    ]);
    assert!(stdout_str(&out).starts_with("x,f_1\n"));
    assert!(stderr_str(&out).contains("converged: true"));
}

#[test]
fn moments_json_output() {
    let out = twodir(&["moments", "5.1", "--order", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let value: serde_json::Value = serde_json::from_str(&stdout_str(&out)).expect("valid json");
    assert_eq!(value["name"], "example-5.1");
    assert_eq!(value["order"], 2);
    let m = value["m"].as_array().unwrap();
    assert!((m[0][0].as_f64().unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
    assert!((m[1][0].as_f64().unwrap() - 1.2374368670764582).abs() < 1e-12);
    assert!((m[2][0].as_f64().unwrap() - 2.1655145173838018).abs() < 1e-12);
    assert_eq!(value["m_plus"].as_array().unwrap().len(), 3);
    assert_eq!(value["m_minus"].as_array().unwrap().len(), 3);
}

#[test]
fn validate_prints_summary() {
    let out = twodir(&["validate", "5.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_str(&out);
    assert!(text.contains("dilation: 2"));
    assert!(text.contains("phi plus support: [1, 4]"));
    assert!(text.contains("support hull: [0, 4]"));
    assert!(text.trim_end().ends_with("ok"));
}

#[test]
fn usage_and_file_errors_exit_2() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["values", "5.1", "--levels", "15"],
        vec!["values", "5.1", "--function", "psi:5"],
        vec!["values", "5.1", "--function", "bogus"],
        vec!["values", "5.1", "--format", "xml"],
        vec!["values", "--levels", "0"],
        vec!["example", "9.9", "--emit", "/tmp/never-written.json"],
        vec!["condition-e", "/nonexistent/mask.json"],
        vec!["frobnicate", "5.1"],
        vec!["values", "5.1", "--no-such-flag"],
        vec!["cascade", "5.1", "--levels", "0"],
        vec!["cascade", "5.1", "--iterations", "0"],
    ];
    for args in cases {
        let out = twodir(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "args {args:?}: {}",
            stderr_str(&out)
        );
    }
}

#[test]
fn malformed_mask_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"name": "x", "dilation": 2}"#).unwrap();
    let out = twodir(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(
        &path,
        r#"{"name": "x", "dilation": 2, "multiplicity": 2,
           "phi": {"plus": {"0": [[1, 0, 0], [0, 1, 0]]}, "minus": {}}}"#,
    )
    .unwrap();
    let out = twodir(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_str(&out).contains("phi.plus[0]"));
}

#[test]
fn emitted_example_equals_builtin_and_loads() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    let out = twodir(&["example", "5.1", "--emit", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, twodir::fixtures::EXAMPLE_5_1);

    // the emitted file and the builtin id produce identical output
    let via_file = twodir(&["values", path.to_str().unwrap(), "--levels", "1"]);
    let via_id = twodir(&["values", "5.1", "--levels", "1"]);
    assert_eq!(via_file.stdout, via_id.stdout);
}

#[test]
fn help_exits_zero() {
    let out = twodir(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(Path::new(env!("CARGO_BIN_EXE_twodir")).exists());
}

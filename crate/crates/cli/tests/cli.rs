//! End-to-end tests of the `carnot` binary: exit-code contract, report
//! schema stability, CSV round-trips, and config-file/flag precedence.

use std::process::{Command, Output};

fn carnot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot"))
        .args(args)
        .env_remove("CARNOT_SEED")
        .output()
        .expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is valid JSON")
}

fn assert_schema(doc: &serde_json::Value) {
    for key in ["tool_version", "config", "check_name", "summary", "verdict", "seed", "rng_name"] {
        assert!(doc.get(key).is_some(), "missing key `{}` in {}", key, doc);
    }
}

#[test]
fn htype_exit_codes() {
    let out = carnot(&["check-htype", "--n", "2", "--L", "1,2", "--metric", "main-assumption"]);
    assert_eq!(out.status.code(), Some(0));
    assert_schema(&stdout_json(&out));

    let out = carnot(&["check-htype", "--n", "2", "--L", "1,2", "--metric", "orthonormal"]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["verdict"], "Fail");

    let out = carnot(&["check-htype", "--L", "0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_exit_codes_and_schema() {
    let out = carnot(&[
        "verify", "--field", "rho", "--operator", "infinity", "--n", "2", "--L", "1,2",
        "--metric", "main-assumption", "--points", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_schema(&doc);
    assert!(doc.get("points").is_some());
    assert!(doc["summary"]["max_abs"].as_f64().unwrap() < 1e-8);

    // counterexample: nonzero infinity-Laplacian confirmed
    let out = carnot(&["verify", "--field", "n", "--L1", "1", "--points", "100"]);
    assert_eq!(out.status.code(), Some(0));

    // log branch p = Q = 6
    let out = carnot(&[
        "verify", "--field", "gamma", "--p", "6", "--n", "2", "--L", "1,2", "--points", "100",
    ]);
    assert_eq!(out.status.code(), Some(0));

    // a generic non-harmonic combination fails with exit 1
    let out = carnot(&[
        "verify", "--field", "rho", "--operator", "infinity", "--n", "2", "--L", "1,2",
        "--metric", "orthonormal", "--points", "100",
    ]);
    assert_eq!(out.status.code(), Some(1));

    // usage errors
    let out = carnot(&["verify", "--field", "gamma", "--n", "1", "--L", "1"]);
    assert_eq!(out.status.code(), Some(2), "gamma without --p");
    let out = carnot(&["verify", "--operator", "infinity", "--L", "1"]);
    assert_eq!(out.status.code(), Some(2), "missing --field");
}

#[test]
fn omega_schema_determinism_and_p_range() {
    let args = [
        "omega", "--p", "2", "--n", "1", "--L", "0.5", "--samples", "50000", "--seed", "7",
    ];
    let a = carnot(&args);
    let b = carnot(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout, "same seed, same bytes");
    let doc = stdout_json(&a);
    assert_schema(&doc);
    assert!(doc["summary"]["value"].as_f64().unwrap() > 0.0);

    let out = carnot(&["omega", "--p", "1", "--n", "1", "--L", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn mul_conventions() {
    let out = carnot(&[
        "mul", "--n", "1", "--L", "1", "--law", "bch", "--a", "1,0,0", "--b", "0,1,0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["summary"]["product"][2].as_f64().unwrap(), 1.0);

    let out = carnot(&[
        "mul", "--n", "1", "--L", "1", "--law", "doubled", "--a", "1,0,0", "--b", "0,1,0",
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["summary"]["product"][2].as_f64().unwrap(), 2.0);
}

#[test]
fn csv_round_trips_the_point_table() {
    let out = carnot(&[
        "verify", "--field", "rho", "--operator", "infinity", "--n", "1", "--L", "1",
        "--metric", "main-assumption", "--points", "50", "--seed", "3", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();

    let json_out = carnot(&[
        "verify", "--field", "rho", "--operator", "infinity", "--n", "1", "--L", "1",
        "--metric", "main-assumption", "--points", "50", "--seed", "3",
    ]);
    let doc = stdout_json(&json_out);
    let points = doc["points"].as_array().unwrap();

    let mut rows = csv.lines().filter(|l| !l.starts_with('#'));
    let header = rows.next().unwrap();
    assert_eq!(header, "x0,x1,t,residual,field_value");
    let mut n_rows = 0;
    for (row, pt) in rows.zip(points) {
        let vals: Vec<f64> = row.split(',').map(|v| v.parse().unwrap()).collect();
        let coords = pt["point"].as_array().unwrap();
        for (a, b) in vals[..3].iter().zip(coords) {
            assert_eq!(a.to_bits(), b.as_f64().unwrap().to_bits());
        }
        assert_eq!(vals[3].to_bits(), pt["residual"].as_f64().unwrap().to_bits());
        assert_eq!(
            vals[4].to_bits(),
            pt["field_value"].as_f64().unwrap().to_bits()
        );
        n_rows += 1;
    }
    assert_eq!(n_rows, 50);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.cfg");
    std::fs::write(
        &path,
        "# batch config\nL = 1,2\nmetric = main-assumption\nfield = rho\noperator = infinity\npoints = 60\nseed = 11\n",
    )
    .unwrap();

    let out = carnot(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["seed"].as_u64().unwrap(), 11);
    assert_eq!(doc["summary"]["count"].as_u64().unwrap(), 60);

    // flag overrides the file's seed
    let out = carnot(&["verify", "--config", path.to_str().unwrap(), "--seed", "99"]);
    let doc = stdout_json(&out);
    assert_eq!(doc["seed"].as_u64().unwrap(), 99);
}

#[test]
fn env_seed_used_as_default() {
    let out = Command::new(env!("CARGO_BIN_EXE_carnot"))
        .args([
            "verify", "--field", "rho", "--n", "1", "--L", "1", "--metric",
            "main-assumption", "--points", "20",
        ])
        .env("CARNOT_SEED", "1234")
        .output()
        .unwrap();
    let doc = stdout_json(&out);
    assert_eq!(doc["seed"].as_u64().unwrap(), 1234);
}

#[test]
fn output_file_and_threads_do_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = carnot(&[
        "omega", "--p", "2", "--n", "1", "--L", "1", "--samples", "50000", "--seed", "5",
        "--threads", "1", "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let single: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();

    let out = carnot(&[
        "omega", "--p", "2", "--n", "1", "--L", "1", "--samples", "50000", "--seed", "5",
        "--threads", "4",
    ]);
    let multi = stdout_json(&out);
    assert_eq!(
        single["summary"]["value"].as_f64().unwrap().to_bits(),
        multi["summary"]["value"].as_f64().unwrap().to_bits(),
        "worker count must not change the estimate"
    );
}

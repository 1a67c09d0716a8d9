use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn zonalpd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zonalpd"))
        .args(args)
        .env_remove("ZONALPD_DEFAULT_DIGITS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.code() != Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn csv_rows(out: &Output) -> Vec<Vec<String>> {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let body = text.split_once('\n').unwrap().1;
    let mut r = csv::Reader::from_reader(body.as_bytes());
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn coeffs_chordal_riesz_on_the_sphere() {
    let out = zonalpd(&["coeffs", "--space", "S2", "--kernel", "riesz-chordal:s=1", "--nmax", "8", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["tool"], "zonalpd");
    assert_eq!(v["config"]["kernel"], "riesz-chordal:s=1");
    assert_eq!(v["config"]["N"], 8);
    let entries = v["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 9);
    for e in entries {
        let value: f64 = e["value"].as_str().unwrap().parse().unwrap();
        assert!((value - 2.0).abs() < 1e-12);
        assert_eq!(e["sign"], "+");
    }
}

#[test]
fn coeffs_log_kernel_on_rp2_all_positive() {
    let out = zonalpd(&["coeffs", "--space", "RP2", "--kernel", "log-geodesic", "--nmax", "32", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 33);
    assert!(rows.iter().all(|r| r[3] == "+"));
}

#[test]
fn non_integrable_kernel_exits_with_one() {
    let out = zonalpd(&["coeffs", "--space", "S2", "--kernel", "riesz-geodesic:s=2.5", "--nmax", "4"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not integrable"));
}

#[test]
fn parse_errors_name_token_and_grammar() {
    let out = zonalpd(&["coeffs", "--space", "S2", "--kernel", "riesz-geodesic:t=1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("position 15") && err.contains("t=1"), "{err}");
    assert!(err.contains("lincomb("), "{err}");
    let out = zonalpd(&["coeffs", "--space", "XP9", "--kernel", "log-geodesic"]);
    assert_eq!(out.status.code(), Some(1));
    let out = zonalpd(&["coeffs", "--space", "S2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn undecided_signs_exit_with_two() {
    let out = zonalpd(&[
        "coeffs",
        "--space",
        "S2",
        "--kernel",
        "lincomb(1*riesz-chordal:s=1+-1*riesz-chordal:s=1)",
        "--nmax",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["result"]["entries"][1]["sign"], "undecided");
}

#[test]
fn poisson_at_zero_radius() {
    let out = zonalpd(&["poisson", "--space", "CP2", "--r", "0", "--theta", "0.7", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((v["result"]["closed_form"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert!((v["result"]["series"].as_f64().unwrap() - 1.0).abs() < 1e-15);
    let out = zonalpd(&["poisson", "--space", "CP2", "--r", "1.0", "--theta", "0.7"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn table1_csv_rows() {
    let out = zonalpd(&["table1", "--nmax", "16", "--digits", "50", "--format", "csv", "--verify"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&out);
    assert_eq!(rows.len(), 7);
    let find = |name: &str| rows.iter().find(|r| r[0] == name).unwrap().clone();
    assert_eq!(find("CP3"), ["CP3", "2", "0", "6", "not-CPD"]);
    assert_eq!(find("RP4")[3], "8");
    assert_eq!(find("HP2")[3], "10");
    assert_eq!(find("RP2")[4], "strictly-PD");
}

#[test]
fn classify_quotes_kernels_with_commas() {
    let out = zonalpd(&[
        "classify",
        "--space",
        "S2",
        "--kernel",
        "product(riesz-chordal:s=1,cospow:n=2)",
        "--nmax",
        "8",
        "--mode",
        "cpd",
        "--format",
        "csv",
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = csv_rows(&out);
    assert_eq!(rows[0][1], "product(riesz-chordal:s=1,cospow:n=2)");
    assert_ne!(rows[0][3], "not-CPD");
}

#[test]
fn classify_geodesic_riesz_on_cp2_is_not_cpd() {
    let out = zonalpd(&["classify", "--space", "CP2", "--kernel", "riesz-geodesic:s=-1", "--mode", "cpd", "--nmax", "8"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["verdict"]["classification"], "not-CPD");
}

#[test]
fn scan_rp2_transition() {
    let out = zonalpd(&[
        "scan",
        "--space",
        "RP2",
        "--kernel",
        "riesz-geodesic",
        "--s-min",
        "-1",
        "--s-max",
        "0",
        "--step",
        "0.05",
        "--nmax",
        "48",
        "--bisect",
        "0.01",
        "--digits",
        "15",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let est = v["result"]["transition"]["estimate"].as_f64().unwrap();
    assert!((-0.64..=-0.54).contains(&est), "{est}");
}

#[test]
fn scan_csv_columns() {
    let out = zonalpd(&[
        "scan", "--space", "S2", "--kernel", "riesz-chordal", "--s-min", "-1", "--s-max", "1", "--step", "0.5", "--nmax",
        "8", "--bisect", "0.1", "--digits", "15", "--format", "csv", "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    assert_eq!(text.lines().nth(1), Some("s,verdict,first_negative_n"));
    assert_eq!(csv_rows(&out).len(), 5);
}

#[test]
fn energy_of_four_points_on_a_closed_geodesic() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    let wts = dir.path().join("w.txt");
    let mut f = std::fs::File::create(&pts).unwrap();
    writeln!(f, "# space=RP2 field=R d=3").unwrap();
    for k in 0..4 {
        let a = k as f64 * std::f64::consts::FRAC_PI_4;
        writeln!(f, "{:e},{:e},0", a.cos(), a.sin()).unwrap();
    }
    std::fs::write(&wts, "0.25\n-0.25\n0.25\n-0.25\n").unwrap();
    let out_path = dir.path().join("e.json");
    let out = zonalpd(&[
        "energy",
        "--kernel",
        "lincomb(-1*riesz-geodesic:s=-2)",
        "--points",
        pts.to_str().unwrap(),
        "--weights",
        wts.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
        "--verify",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let e = v["result"]["energy"].as_f64().unwrap();
    let pi = std::f64::consts::PI;
    assert!((e - pi * pi / 32.0).abs() < 1e-12, "{e}");
    assert_eq!(v["result"]["measure"], "discrete");
}

#[test]
fn energy_uniform_and_perturbed() {
    let out = zonalpd(&["energy", "--space", "S2", "--kernel", "riesz-chordal:s=1", "--digits", "20"]);
    let v = json(&out);
    assert!((v["result"]["energy"].as_f64().unwrap() - 2.0).abs() < 1e-12);
    assert_eq!(v["result"]["method"], "quadrature");
    let out = zonalpd(&[
        "energy", "--space", "S2", "--kernel", "jacobi:n=1", "--perturb", "n=1,eps=0.1", "--samples", "100000",
        "--seed", "5",
    ]);
    let v = json(&out);
    assert!((v["result"]["energy"].as_f64().unwrap() - 1.0 / 900.0).abs() < 1e-15);
    assert_eq!(v["result"]["mc"]["samples"], 100000);
    let out = zonalpd(&["energy", "--space", "S2", "--kernel", "jacobi:n=1", "--perturb", "n=1,eps=2"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let path = dir.path().join(format!("c{threads}.json"));
        let out = zonalpd(&[
            "coeffs", "--space", "HP2", "--kernel", "riesz-geodesic:s=1.5", "--nmax", "12", "--threads", threads, "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
        outputs.push(std::fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn digits_default_comes_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_zonalpd"))
        .args(["coeffs", "--space", "S4", "--kernel", "gauss-chordal:lambda=1", "--nmax", "4"])
        .env("ZONALPD_DEFAULT_DIGITS", "20")
        .output()
        .unwrap();
    assert_eq!(json(&out)["config"]["digits"], 20);
    let out = Command::new(env!("CARGO_BIN_EXE_zonalpd"))
        .args(["coeffs", "--space", "S4", "--kernel", "gauss-chordal:lambda=1", "--nmax", "4"])
        .env("ZONALPD_DEFAULT_DIGITS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn precision_above_cap_is_an_error() {
    let out = zonalpd(&["coeffs", "--space", "S2", "--kernel", "riesz-chordal:s=1", "--nmax", "2", "--digits", "80"]);
    assert_eq!(out.status.code(), Some(1));
}

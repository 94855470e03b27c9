use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn einlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_einlab"))
        .args(args)
        .env_remove("EINLAB_TOL")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("invalid JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

#[test]
fn spaces_list_names_constraints() {
    let out = einlab(&["spaces-list"]);
    assert!(out.status.success());
    let v = json(&out);
    let kinds: Vec<&str> = v["result"]["spaces"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["kind"].as_str().unwrap())
        .collect();
    assert_eq!(kinds, ["space-form", "sphere-hyperbolic", "cylinder", "product", "chart"]);
    assert_eq!(v["header"]["command"], "spaces-list");
    assert_eq!(v["header"]["tool"], "einlab");
    assert!(v["header"]["conventions"].is_object());
}

#[test]
fn compute_sphere_hyperbolic() {
    let out = einlab(&["compute", "--space", "sphere-hyperbolic", "--n", "9", "--d", "2"]);
    assert!(out.status.success());
    let v = json(&out);
    let prof = &v["result"]["profile"];
    assert_eq!(prof["Ein"], 4.8);
    assert_eq!(prof["ein"], -12.0);
    assert_eq!(v["result"]["closed_form"]["Ein"]["exact"], "24/5");
    assert_eq!(v["header"]["config"]["space"], "sphere-hyperbolic(9,2)");
    assert_eq!(v["header"]["tolerances"]["positivity"], 1e-9);
    // Full spec syntax resolves to the same report body.
    let same = json(&einlab(&["compute", "--space", "sphere-hyperbolic(9,2)"]));
    assert_eq!(same["result"], v["result"]);
}

#[test]
fn compute_sphere_reports_minus_infinity_and_q() {
    let v = json(&einlab(&["compute", "--space", "sphere", "--n", "4"]));
    assert_eq!(v["result"]["profile"]["Ein"], 4.0);
    assert_eq!(v["result"]["profile"]["ein"], "-inf");
    let pt = &v["result"]["points"][0];
    assert_eq!(pt["sigma2"], 1.5);
    assert_eq!(pt["q_curvature"], 3.0);
}

#[test]
fn compute_from_chart_file() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "n = 4\n# stereographic sphere").unwrap();
    for i in 1..=4 {
        for j in i..=4 {
            let expr = if i == j { "4/(1+x1^2+x2^2+x3^2+x4^2)^2" } else { "0" };
            writeln!(f, "g[{i}][{j}] = {expr}").unwrap();
        }
    }
    writeln!(f, "points = (0.1, 0.2, -0.1, 0.3)").unwrap();
    let path = f.path().to_str().unwrap();
    let v = json(&einlab(&["compute", "--chart", path]));
    let prof = &v["result"]["profile"];
    assert!((prof["Ein"].as_f64().unwrap() - 4.0).abs() < 1e-6);
    let pt = &v["result"]["points"][0];
    assert!((pt["q_curvature"].as_f64().unwrap() - 3.0).abs() < 1e-4, "{pt}");

    let out = einlab(&["compute", "--chart", path, "--point", "-0.5,0.1,0,0.2"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["header"]["config"]["points"][0][0], -0.5);
}

#[test]
fn thresholds_example() {
    let v = json(&einlab(&["thresholds", "--n", "6", "--p", "2"]));
    let row = &v["result"]["table"][0];
    assert_eq!(row["k1"]["value"], -10.0);
    assert_eq!(row["k2"]["exact"], "10/3");
    assert_eq!(row["k2"]["value"], 3.33333333333);
    let v = json(&einlab(&["thresholds", "--n", "5", "--p", "4"]));
    assert_eq!(v["result"]["table"][0]["k2"], "-inf");
}

#[test]
fn thresholds_with_negative_ein() {
    let v = json(&einlab(&["thresholds", "--n", "9", "--ein", "-13"]));
    let degrees: Vec<u64> = v["result"]["vanishing"]["degrees"]
        .as_array()
        .unwrap()
        .iter()
        .map(|d| d.as_u64().unwrap())
        .collect();
    assert_eq!(degrees, [3, 4, 5, 6]);
    let v = json(&einlab(&["thresholds", "--n", "9", "--ein", "-inf"]));
    assert_eq!(v["result"]["bounds"]["ein"], "-inf");
    let out = einlab(&["thresholds", "--n", "6", "--Ein", "-1"]);
    assert!(out.status.success());
    assert_eq!(json(&out)["result"]["vanishing"]["degrees"], serde_json::json!([]));
}

#[test]
fn theorem_c_example_with_oracle() {
    let out = einlab(&["theorem-c", "--yamabe", "10", "--sigma2-integral", "-1", "--oracle", "1e-5"]);
    assert!(out.status.success());
    let v = json(&out);
    let r = &v["result"];
    assert_eq!(r["case"], "negative");
    assert_eq!(r["Ein_bound"], 1.66666666667);
    assert_eq!(r["ein_bound"], -10.0);
    assert_eq!(r["strict"], false);
    assert_eq!(r["oracle"]["agreement"], true);
    assert!(r["oracle"]["summary"].as_str().unwrap().starts_with("oracle agreement"));

    let zero = json(&einlab(&["theorem-c", "--yamabe", "3", "--sigma2-integral", "0"]));
    assert_eq!(zero["result"]["ein_bound"], "-inf");
    assert_eq!(zero["result"]["case"], "zero");
}

#[test]
fn theorem_c_from_catalog_space() {
    let v = json(&einlab(&["theorem-c", "--yamabe", "10", "--space", "space-form(4,1)", "--volume", "2"]));
    assert_eq!(v["result"]["sigma2_integral"], 3.0);
    assert_eq!(v["result"]["case"], "positive");
}

#[test]
fn weitzenbock_reports_both_paths() {
    let v = json(&einlab(&["weitzenbock", "--space", "sphere", "--n", "5", "--p", "2"]));
    let pt = &v["result"]["per_point"][0];
    assert_eq!(pt["general"]["min_eigenvalue"], 6.0);
    assert_eq!(pt["conformally_flat"]["min_eigenvalue"], 6.0);
    assert_eq!(pt["reduction_residual"], 0.0);
    assert_eq!(pt["companion"]["p"], 3);

    let v = json(&einlab(&["weitzenbock", "--space", "product(space-form(2,1),space-form(2,1))", "--p", "2"]));
    let pt = &v["result"]["per_point"][0];
    assert_eq!(pt["conformally_flat"]["error"]["kind"], "weyl_nonzero");
    assert!(pt["general"]["spectrum"].is_array());
}

#[test]
fn errors_are_machine_readable() {
    let out = einlab(&["weitzenbock", "--space", "sphere", "--n", "5", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "degree_out_of_range");

    let out = einlab(&["theorem-c", "--yamabe", "-1", "--sigma2-integral", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"]["message"].as_str().unwrap().contains("positive Yamabe required"));

    let out = einlab(&["compute", "--space", "sphere-hyperbolic", "--n", "5", "--d", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "invalid_parameter");

    let out = einlab(&["compute", "--space", "sphere", "--n", "3", "--bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "usage");

    let out = einlab(&["thresholds", "--n", "9", "--betti", "1,0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_chart_pass_and_fail() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        f,
        "n = 3\ng[1][1] = 1/x3^2\ng[2][2] = 1/x3^2\ng[3][3] = 1/x3^2\ng[1][2] = 0\ng[1][3] = 0\ng[2][3] = 0\npoints = (0.1, 0.2, 1.5), (-0.3, 0, 0.7)"
    )
    .unwrap();
    let path = f.path().to_str().unwrap();
    let out = einlab(&["validate-chart", "--file", path, "--against", "space-form(3,-1)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["pass"], true);

    let out = einlab(&["validate-chart", "--file", path, "--against", "space-form(3,1)"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["result"]["pass"], false);

    let mut bad = tempfile::NamedTempFile::new().unwrap();
    writeln!(bad, "n = 2\ng[1][1] = 1\ng[1][2] = 0\ng[2][2] = sin(x1").unwrap();
    let out = einlab(&["validate-chart", "--file", bad.path().to_str().unwrap(), "--against", "space-form(2,0)"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "parse_error");
}

#[test]
fn tolerance_override_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = Command::new(env!("CARGO_BIN_EXE_einlab"))
        .args(["compute", "--space", "cylinder", "--n", "4", "--output", path.to_str().unwrap()])
        .env("EINLAB_TOL", "1e-6")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["header"]["tolerances"]["positivity"], 1e-6);
    assert_eq!(v["result"]["profile"]["Ein"], 3.0);

    let out = Command::new(env!("CARGO_BIN_EXE_einlab"))
        .args(["spaces-list"])
        .env("EINLAB_TOL", "abc")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn table_format() {
    let out = einlab(&["thresholds", "--n", "6", "--p", "2", "--format", "table"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exact: 10/3"), "{text}");
    assert!(!text.trim_start().starts_with('{'));
}

#[test]
fn reports_are_deterministic() {
    let args = ["weitzenbock", "--space", "sphere-hyperbolic(7,1)", "--p", "3"];
    assert_eq!(einlab(&args).stdout, einlab(&args).stdout);
}

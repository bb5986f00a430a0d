use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_liepert"))
}

fn problem(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert!(
        out.status.success(),
        "{:?} failed: {}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn p(name: &str) -> String {
    problem(name).display().to_string()
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("liepert-cli-{}-{}", tag, std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

#[test]
fn exact_and_approximate_dimensions() {
    let free = p("ypp0.prob");
    assert_eq!(json(&["exact", &free])["dimension"], 8);
    let r = json(&["approx", &free]);
    assert_eq!(r["dimension"], 16);
    assert_eq!(r["stability"]["stable_dim"], 8);

    let inv = p("ypp_eps_inv.prob");
    assert_eq!(json(&["exact", &inv])["dimension"], 8);
    let r = json(&["approx", &inv]);
    assert_eq!(r["dimension"], 12);
    assert_eq!(r["stability"]["stable_dim"], 4);
    assert_eq!(r["exact_basis"].as_array().unwrap().len(), 8);

    let r = json(&["approx", &p("ypp_eps_yprime.prob")]);
    assert_eq!(r["dimension"], 16);
}

#[test]
fn boussinesq_point_symmetries_use_file_kernels() {
    let r = json(&["exact", &p("bouss.prob")]);
    assert_eq!(r["dimension"], 6);
    let etas: Vec<&str> = r["basis"]
        .as_array()
        .unwrap()
        .iter()
        .map(|g| g["eta0"].as_str().unwrap())
        .collect();
    assert!(etas.contains(&"sin(x)"));
    assert!(etas.contains(&"cos(x)"));
    let r = json(&["approx", &p("bouss.prob")]);
    assert_eq!(r["dimension"], 8);
}

#[test]
fn missing_file_and_bad_arguments() {
    let out = run(&["exact", "/nonexistent/problem.prob"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = run(&["invariant", &p("ypp0.prob")]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn syntax_errors_exit_one() {
    let dir = scratch("syntax");
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("bad.prob");
    std::fs::write(&f, "[problem]\norder = 2\nf0 = (y\n").unwrap();
    let out = run(&["exact", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn correction_for_a_projective_characteristic() {
    let r = json(&["correct", &p("ypp_eps_inv.prob"), "--zeta0", "x*y - x^2*y'"]);
    let g = &r["basis"][0];
    assert_eq!(g["class"], "particular");
    assert_eq!(g["zeta1"], "-1/2*x^2*y*y'^(-2) + x^3/y'");
}

#[test]
fn non_symmetry_correction_exits_three() {
    let out = run(&["correct", &p("ypp_eps_inv.prob"), "--zeta0", "y^2"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn integrating_factor_and_reduction() {
    let r = json(&["mu", &p("oscillator.prob")]);
    let primary: Vec<&Value> = r["series"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["role"] == "primary")
        .collect();
    assert!(primary.iter().any(|s| s["e0"] == "y'" && s["e1"] == "-1"));

    let r = json(&["reduce", &p("oscillator.prob"), "--mu", "y' - eps"]);
    assert_eq!(r["series"][0]["role"], "integral");
    assert_eq!(r["series"][0]["e0"], "1/2*y^2 + 1/2*y'^2");
}

#[test]
fn first_order_factor_with_log_kernel() {
    let r = json(&["mu", &p("growth.prob")]);
    assert!(r["dimension"].as_u64().unwrap() >= 1);
    assert!(r["series"]
        .as_array()
        .unwrap()
        .iter()
        .any(|s| s["e0"] == "y^(-1)"));
}

#[test]
fn invariants_of_a_shift() {
    let r = json(&["invariant", &p("ypp_eps_inv.prob"), "--xi", "0", "--eta", "1"]);
    let e0: Vec<&str> = r["series"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| s["e0"].as_str().unwrap())
        .collect();
    assert!(e0.contains(&"x"));
    assert!(!e0.iter().any(|s| s.contains("y") && !s.contains("y'")));
}

#[test]
fn results_round_trip_through_verify() {
    let dir = scratch("verify");
    let d = dir.to_str().unwrap();
    let inv = p("ypp_eps_inv.prob");
    for cmd in [
        vec!["approx", inv.as_str(), "--out", d],
        vec!["correct", inv.as_str(), "--zeta0", "x*y - x^2*y'", "--out", d],
    ] {
        let out = run(&cmd);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for name in ["approx", "correct"] {
        let file = dir.join(format!("ypp_eps_inv.{}.json", name));
        assert!(file.is_file());
        let out = run(&["verify", &inv, "--result", file.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let file = dir.join("ypp_eps_inv.approx.json");
    let mut doc: Value = serde_json::from_str(&std::fs::read_to_string(&file).unwrap()).unwrap();
    doc["basis"][0]["eta1"] = Value::String("2*x^2 + y^2".into());
    doc["basis"][0]["eta0"] = Value::String("x^2".into());
    doc["basis"][0]["xi0"] = Value::String("0".into());
    doc["basis"][0]["xi1"] = Value::String("0".into());
    let bad = dir.join("tampered.json");
    std::fs::write(&bad, serde_json::to_string(&doc).unwrap()).unwrap();
    let out = run(&["verify", &inv, "--result", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn output_is_deterministic() {
    let inv = p("ypp_eps_inv.prob");
    let a = run(&["approx", &inv]).stdout;
    let b = run(&["approx", &inv]).stdout;
    assert_eq!(a, b);
    let a = run(&["verify", &inv, "--result", "/nonexistent.json"]);
    assert_eq!(a.status.code(), Some(1));
}

#[test]
fn compare_meets_the_slope_threshold() {
    let bouss = p("bouss.prob");
    let r = json(&["compare", &bouss]);
    let slope = r["numeric"]["slope"].as_f64().unwrap();
    assert!(slope >= 1.9, "{}", slope);
    let out = run(&["compare", &bouss, "--min-slope", "2.5"]);
    assert_eq!(out.status.code(), Some(4));
    let out = run(&["compare", &bouss, "--ics", "1, 1, -1, -1"]);
    assert_eq!(out.status.code(), Some(4));
    let file = problem("bouss_solution.txt");
    let r = json(&["compare", &bouss, "--solution", file.to_str().unwrap(), "--eps", "0.01,0.005"]);
    assert!(r["numeric"]["slope"].as_f64().unwrap() >= 1.9);
}

#[test]
fn flow_modes_agree_to_first_order() {
    let r = json(&[
        "flow", "--xi", "0", "--eta", "x^2 + 2*eps*x^2", "--point", "1,1", "--a", "0.1", "--eps", "0.001",
    ]);
    let rows = r["numeric"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let y = |i: usize| rows[i]["point"][1].as_f64().unwrap();
    assert!((y(0) - y(1)).abs() < 1e-9);
    assert!((y(0) - (1.0 + 0.1 * 1.002)).abs() < 1e-9);
}

#[test]
fn plot_data_files() {
    let dir = scratch("plot");
    let d = dir.to_str().unwrap();
    for kind in ["circles", "lines", "perturbed-circles"] {
        let out = run(&["plotdata", "--kind", kind, "--out", d]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let text = std::fs::read_to_string(dir.join("perturbed-circles.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (lvl, moved) = (0, header.len() - 1);
    for line in lines {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        assert!((v[lvl] - v[moved]).abs() < 1e-10);
    }
    let out = run(&["plotdata", "--kind", "solution", &p("bouss.prob"), "--out", d]);
    assert!(out.status.success());
    assert!(dir.join("solution.csv").is_file());
    assert_eq!(run(&["plotdata", "--kind", "solution"]).status.code(), Some(1));
}

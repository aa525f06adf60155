use std::process::{Command, Output};

use serde_json::Value;

fn schwarzian(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_schwarzian"))
        .args(args)
        .env_remove("SCHWARZIAN_LOG")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let o = schwarzian(&full);
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn third_order_schwarzian_of_exp() {
    let o = schwarzian(&["eval", "-f", "exp(z)", "-k", "3", "-z", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "re(z),im(z),re(value),im(value),abs_error,re(closed_form),im(closed_form),rel_error"
    );
    let cells: Vec<f64> = lines.next().unwrap().split(',').map(|c| c.parse().unwrap()).collect();
    assert!((cells[2] - 1.0 / 9.0).abs() < 1e-14);
    assert_eq!(cells[3], 0.0);
}

#[test]
fn report_schema() {
    let r = json(&["eval", "-f", "exp(z)", "-k", "3", "-z", "0"]);
    assert_eq!(r["command"], "eval");
    assert_eq!(r["config"]["args"]["k"], 3);
    assert_eq!(r["rows"].as_array().unwrap().len(), 1);
    assert_eq!(r["summary"]["pass"], true);
    assert!(r["summary"]["max_error"].is_number());
    assert!(r["summary"]["runtime_ms"].is_null());
    let timed = json(&["eval", "-f", "exp(z)", "-z", "0", "--timing"]);
    assert!(timed["summary"]["runtime_ms"].is_u64());
}

#[test]
fn oracle_suite_passes() {
    let r = json(&["verify", "faa-di-bruno", "-k", "4", "--trials", "50", "--seed", "7"]);
    assert_eq!(r["summary"]["pass"], true);
    assert_eq!(r["rows"].as_array().unwrap().len(), 50);
    assert!(r["summary"]["max_error"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn same_seed_same_bytes() {
    for args in [
        &["verify", "disconjugacy", "--seed", "3", "--trials", "2"][..],
        &["bessel", "counterexample", "--seed", "3"][..],
        &["verify", "marty", "--seed", "3", "--trials", "200"][..],
    ] {
        let mut with_json = args.to_vec();
        with_json.extend(["--format", "json"]);
        let a = schwarzian(&with_json);
        let b = schwarzian(&with_json);
        assert_eq!(a.status.code(), Some(0));
        assert_eq!(a.stdout, b.stdout);
    }
    let a = schwarzian(&["verify", "mobius", "--seed", "3"]);
    let b = schwarzian(&["verify", "mobius", "--seed", "4"]);
    assert_ne!(a.stdout, b.stdout);
}

#[test]
fn bessel_counterexample_on_a_strip() {
    let r = json(&["bessel", "counterexample", "--grid-strip", "2"]);
    let rows = r["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 10);
    for row in rows {
        let z = &row["z"];
        assert!(z[0].as_f64().unwrap().abs() <= 3.0 && z[1].as_f64().unwrap().abs() <= 2.0);
        assert!(row["rel_error"].as_f64().unwrap() <= 1e-8);
    }
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["eval", "-f", "exp(", "-z", "0"][..],
        &["eval", "-f", "exp(z)", "-z", "z"][..],
        &["verify", "nope"][..],
        &["eval", "-f", "@nope"][..],
        &["eval", "-f", "exp(z)", "-z", "0", "--tol-oracle", "1e-3"][..],
        &["frobnicate"][..],
    ] {
        assert_eq!(schwarzian(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn loosened_tolerance_needs_unsafe() {
    let o = schwarzian(&["eval", "-f", "exp(z)", "-z", "0", "--tol-oracle", "1e-3", "--unsafe"]);
    assert_eq!(o.status.code(), Some(0));
    let o = schwarzian(&["eval", "-f", "exp(z)", "-z", "0", "--tol-oracle", "1e-12"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn numerical_failures_exit_with_one() {
    // S_2(z^2) has a pole at the critical point
    let o = schwarzian(&["eval", "-f", "z^2", "-z", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("pole"));
    // the zeros for n >= 5 sit about 0.005 to 0.01 from their asymptotic positions
    let o = schwarzian(&["verify", "bessel-zeros", "--tol-suite", "0.001"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn vacuous_disconjugacy_is_reported() {
    let r = json(&["disconjugacy", "-f", "100", "-k", "2", "--trials", "4"]);
    assert_eq!(r["summary"]["vacuous"], true);
    assert!(r["summary"]["max_count"].as_i64().unwrap() >= 2);
    let r = json(&["disconjugacy", "-f", "1.5", "-k", "2", "--trials", "8", "--shape", "square"]);
    assert_eq!(r["summary"]["vacuous"], false);
    assert!(r["summary"]["max_count"].as_i64().unwrap() <= 1);
}

#[test]
fn tables_for_the_exact_commands() {
    let text = stdout(&schwarzian(&["partitions", "-k", "4"]));
    assert_eq!(text.lines().count(), 1 + 5);
    let r = json(&["coefficients", "-k", "2"]);
    let coeffs: Vec<&str> = r["rows"].as_array().unwrap().iter().map(|x| x["coefficient"].as_str().unwrap()).collect();
    assert_eq!(coeffs, ["-1/2", "1"]);
    let r = json(&["grahl", "-k", "6"]);
    assert_eq!(r["summary"]["pass"], true);
    let r = json(&["pole-order", "-f", "z^2", "-k", "4"]);
    assert_eq!(r["rows"][0]["pole_order"], 4);
    let r = json(&["pole-bound", "-k", "2", "-M", "10"]);
    assert_eq!(r["rows"][0]["n"], r["rows"][0]["cells"]);
}

#[test]
fn catalog_functions_by_name() {
    let r = json(&["omit-check", "-f", "@exp_affine:a=1,b=2,c=0.5", "-k", "3"]);
    assert_eq!(r["summary"]["pass"], true);
    let r = json(&["marty", "-f", "@hayman:c=1+1i"]);
    assert_eq!(r["summary"]["pass"], true);
    let r = json(&["ode-link", "-f", "@mobius_power:n=3", "-k", "3"]);
    assert_eq!(r["summary"]["pass"], true);
    let r = json(&["family-probe", "--family", "linear", "--transform", "spherical"]);
    assert_eq!(r["summary"]["diverging"], true);
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("schwarzian-cli-{}.csv", std::process::id()));
    let o = schwarzian(&["bessel", "zeros", "--count", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.starts_with("n,zero,asymptotic,difference\n1,2.40482555"));
}

#[test]
fn help_lists_every_subcommand() {
    let text = stdout(&schwarzian(&["--help"]));
    for cmd in [
        "eval", "partitions", "coefficients", "grahl", "pole-order", "ode-link", "disconjugacy", "pole-bound",
        "bessel", "marty", "family-probe", "omit-check", "verify",
    ] {
        assert!(text.contains(&format!("  {cmd} ")), "{cmd}");
    }
}

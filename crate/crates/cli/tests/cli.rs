use serde_json::Value;
use std::io::Write;
use std::process::{Command, Output};
use tempfile::NamedTempFile;

fn villadsen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_villadsen"))
        .args(args)
        .env_remove("ENGINE_GENERATOR_BUDGET")
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("report is json")
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn temp_json(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn chern_of_a_bundle_file() {
    let f = temp_json(
        r#"{"base": {"factors": [{"kind": "s2"}, {"kind": "s2"}]},
            "summands": [{"line": {"factor": 0}, "mult": "1"}, {"line": {"factor": 1}, "mult": 1}]}"#,
    );
    let out = villadsen(&["chern", "--bundle", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["ok"], true);
    assert_eq!(check(&r, "euler_class")["verdict"], "pass");
}

#[test]
fn chern_rejects_malformed_bundles() {
    let f = temp_json(r#"{"base": {"factors": []}, "summands": [], "extra": 1}"#);
    let out = villadsen(&["chern", "--bundle", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty());
}

#[test]
fn chern_budget_refusal_sets_exit_two() {
    let out = Command::new(env!("CARGO_BIN_EXE_villadsen"))
        .args(["chern", "--preset", "v2-eta:2:3"])
        .env("ENGINE_GENERATOR_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(report(&out)["ok"], false);
}

#[test]
fn vi_config_runs_and_witness_checks_pass() {
    let f = temp_json(r#"{"seed_dim": 2, "steps": [{"proj_mults": {"p1": 2, "p2": 1}, "point_evals": 3}, {"proj_mults": {"a": 1, "b": 1}}]}"#);
    let out = villadsen(&["vi", f.path().to_str().unwrap(), "--witness", "2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(&out);
    assert_eq!(check(&r, "stats_multiplicative")["verdict"], "pass");
    assert_eq!(check(&r, "top_chern")["verdict"], "pass");
}

#[test]
fn vi_config_rejects_unknown_keys() {
    let f = temp_json(r#"{"seed_dim": 2, "steps": [{"proj_mults": {"p": 1}, "point_eval": 3}]}"#);
    let out = villadsen(&["vi", f.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn v2_unit_bundle_and_traces() {
    let out = villadsen(&["v2", "-k", "2,inf", "-n", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    for name in ["unit_bundle[k=2,n=3]", "traces[k=2,n=3]", "traces[k=inf,n=3]"] {
        assert_eq!(check(&r, name)["verdict"], "pass", "{name}");
    }
}

#[test]
fn v2_rejects_zero_k() {
    assert_eq!(villadsen(&["v2", "-k", "0", "-n", "2"]).status.code(), Some(1));
}

#[test]
fn cfp_default_and_override() {
    let r = report(&villadsen(&["cfp"]));
    assert_eq!(r["ok"], true);
    assert_eq!(check(&r, "upper[1]")["verdict"], "pass");

    let out = villadsen(&["cfp", "--terms", "2", "--override-l", "5,12"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(report(&out)["ok"], true);

    assert_eq!(villadsen(&["cfp", "--override-l", "4,5"]).status.code(), Some(1));
}

#[test]
fn help_exits_cleanly() {
    let out = villadsen(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("v2"));
}

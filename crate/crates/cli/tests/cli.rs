use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

const CROSSED: &str = "resource a cap 1
resource b cap 1
thread T1 = Pa Pb Vb Va
thread T2 = Pb Pa Va Vb
program m = T1 | T2
program three = T1 | T2 | T1
";

const CHAIN3: &str = "resource a cap 1
resource b cap 1
resource c cap 1
thread T = Pa Pb Va Pc Vb Pa Vc Va
program m2 = T^2
program m3 = T^3
";

const SMALL: &str = "resource a cap 1
resource s cap 2
resource b cap 2
thread T = Pa Va
thread U = Ps Vs
thread W = Ps Pb Vs Ps Vb Vs Ps Vs
program m3 = T^3
program wide = U^2
program big = T^9
program w3 = W^3
";

fn fixture(name: &str, text: &str) -> String {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pvguard"))
        .args(args)
        .env_remove("PVGUARD_MAX_STATES")
        .output()
        .unwrap()
}

fn json_run(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = run(&all);
    let v = serde_json::from_slice(&out.stdout).expect("json on stdout");
    (out.status.code().unwrap(), v)
}

#[test]
fn check_accepts_and_rejects() {
    let f = fixture("check_ok.pv", CROSSED);
    assert_eq!(run(&["check", &f]).status.code(), Some(0));

    let bad = fixture("check_bad.pv", "resource a cap 1\nthread T = Pa Pa Va Va\n");
    let (code, v) = json_run(&["check", &bad]);
    assert_eq!(code, 2);
    assert_eq!(v["result"]["error"]["detail"]["position"], 2);

    let missing = fixture("check_missing.pv", "thread T = Pa Va\n");
    let out = run(&["check", &missing]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown resource"));

    assert_eq!(run(&["check", "/no/such/file.pv"]).status.code(), Some(2));
}

#[test]
fn envelope_fields() {
    let f = fixture("envelope.pv", CROSSED);
    let (_, v) = json_run(&["check", &f]);
    assert_eq!(v["command"], "check");
    assert_eq!(v["toolVersion"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["sourceDigest"].as_str().unwrap().len(), 64);
    assert!(v["timingMs"].is_u64());
    assert_eq!(v["result"]["valid"], true);
}

#[test]
fn deadlocks_exit_codes() {
    let f = fixture("deadlocks.pv", CROSSED);
    let (code, v) = json_run(&["deadlocks", &f, "m"]);
    assert_eq!(code, 1);
    let d = &v["result"]["deadlocks"][0];
    assert_eq!(d["positions"], json!([2, 2]));
    assert_eq!(d["path"], json!([0, 0, 1, 1]));
    assert_eq!(d["state"][0], json!({"thread": 0, "name": "T1", "position": 2, "action": "Pb"}));

    let g = fixture("deadlocks_chain.pv", CHAIN3);
    assert_eq!(json_run(&["deadlocks", &g, "m2"]).0, 0);
    let (code, v) = json_run(&["deadlocks", &g, "m3"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["deadlocks"].as_array().unwrap().len(), 6);

    let (code, v) = json_run(&["deadlocks", &f, "m", "--potential"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["potentialDeadlocks"][0]["positions"], json!([2, 2]));
    assert_eq!(run(&["deadlocks", &f, "nope"]).status.code(), Some(2));
}

#[test]
fn text_output_draws_two_threads() {
    let f = fixture("text.pv", CROSSED);
    let out = run(&["deadlocks", &f, "m"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("(2,2)"));
    assert!(text.contains('D') && text.contains('#'));
}

#[test]
fn family_verdicts() {
    let g = fixture("family_chain.pv", CHAIN3);
    let (code, v) = json_run(&["family", &g, "T", "deadlock"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["cutoff"], 3);
    assert_eq!(v["result"]["theorem"], "deadlock-cutoff");
    assert_eq!(v["result"]["manifestsAt"], 3);
    assert_eq!(v["result"]["witnesses"].as_array().unwrap().len(), 6);

    let s = fixture("family_small.pv", SMALL);
    let (code, v) = json_run(&["family", &s, "T", "serializability"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["theorem"], "pair-cutoff");

    let (code, v) = json_run(&["family", &s, "W", "serializability"]);
    assert_eq!(code, 4);
    let w: Vec<Value> = v["result"]["witnesses"].as_array().unwrap().clone();
    assert!(w.iter().any(|x| x["positions"] == json!([4, 2, 2, 9, 9])));

    let f = fixture("family_prog.pv", CROSSED);
    let (code, v) = json_run(&["family", &f, "three", "deadlock", "--program"]);
    assert_eq!(code, 1);
    assert_eq!(v["result"]["witnesses"][0]["positions"], json!([2, 2, 5]));
    assert_eq!(run(&["family", &f, "T9", "deadlock"]).status.code(), Some(2));
}

#[test]
fn class_counts() {
    let s = fixture("classes.pv", SMALL);
    let (code, v) = json_run(&["classes", &s, "m3"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["classCount"], 6);
    let (code, v) = json_run(&["classes", &s, "wide"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["classCount"], 1);

    let (code, v) = json_run(&["--max-states", "1000", "classes", &s, "big"]);
    assert_eq!(code, 3);
    assert_eq!(v["result"]["error"]["kind"], "overflow");
    let out = Command::new(env!("CARGO_BIN_EXE_pvguard"))
        .args(["classes", &s, "big"])
        .env("PVGUARD_MAX_STATES", "1000")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn choice_points() {
    let s = fixture("lcp.pv", SMALL);
    let (code, v) = json_run(&["lcp", &s, "w3"]);
    assert_eq!(code, 1);
    let cps = v["result"]["choicePoints"].as_array().unwrap();
    let cp = cps.iter().find(|c| c["positions"] == json!([4, 2, 2])).unwrap();
    assert_eq!(cp["resource"], "b");
    assert_eq!(cp["reachable"], true);
    assert_eq!(cp["liftedTo"]["positions"], json!([4, 4, 2, 2]));
    assert_eq!(json_run(&["lcp", &s, "wide"]).0, 0);
}

#[test]
fn witnesses_reproduce_their_findings() {
    let (code, v) = json_run(&["witness", "deadlock", "a:1", "b:1", "c:1"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["thread"], "Pa Pb Va Pc Vb Pa Vc Va");
    assert_eq!(v["result"]["expected"]["positions"], json!([6, 2, 4]));
    let src = fixture("witness_d.pv", v["result"]["source"].as_str().unwrap());
    let (code, d) = json_run(&["deadlocks", &src, "witness"]);
    assert_eq!(code, 1);
    let found: Vec<&Value> = d["result"]["deadlocks"].as_array().unwrap().iter().map(|e| &e["positions"]).collect();
    assert!(found.contains(&&json!([6, 2, 4])));

    let (_, v) = json_run(&["witness", "deadlock", "a:1", "b:1"]);
    assert_eq!(v["result"]["thread"], "Pa Pb Va Pa Vb Va");
    assert_eq!(v["result"]["expected"]["positions"], json!([4, 2]));

    let (code, v) = json_run(&["witness", "lcp", "a:2", "b:2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["thread"], "Pa Pb Va Pa Vb Va Pa Va");
    let src = fixture("witness_l.pv", v["result"]["source"].as_str().unwrap());
    let (code, l) = json_run(&["lcp", &src, "witness"]);
    assert_eq!(code, 1);
    assert!(l["result"]["choicePoints"]
        .as_array()
        .unwrap()
        .iter()
        .any(|c| c["positions"] == json!([4, 2, 2])));

    assert_eq!(run(&["witness", "lcp", "a:1", "b:2"]).status.code(), Some(2));
    assert_eq!(run(&["witness", "deadlock", "a"]).status.code(), Some(2));
}

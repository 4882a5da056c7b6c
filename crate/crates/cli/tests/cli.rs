use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_cartier-lab"));
    c.env_remove("CARTIER_LAB_PROFILE");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn ok(args: &[&str]) -> Value {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let v = match args.iter().position(|a| *a == "--output") {
        Some(i) => {
            assert!(out.stdout.is_empty());
            serde_json::from_str(&std::fs::read_to_string(args[i + 1]).unwrap()).unwrap()
        }
        None => json(&out),
    };
    assert_eq!(v["schema"], "v1");
    v
}

fn tmp(name: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("cartier-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn ghost_components() {
    let v = ok(&["witt", "ghost", "--p", "2", "--n", "2", "--components", "1,1"]);
    assert_eq!(v["ghost"], serde_json::json!(["1", "3"]));
}

#[test]
fn ghost_length_mismatch_is_an_error() {
    let out = run(&["witt", "ghost", "--p", "2", "--n", "3", "--components", "1,1"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "usage");
}

#[test]
fn witt_arith_matches_integers() {
    // W_2(F_2) = Z/4: 1 + 1 = 2 = (0, 1), 3 = (1, 1) and 3 · 3 = 1
    let comps = |v: Value| v["result"]["components"].clone();
    let two = ok(&["witt", "arith", "--p", "2", "--op", "add", "--a", "1,0", "--b", "1,0"]);
    assert_eq!(comps(two), serde_json::json!(["0", "1"]));
    let nine = ok(&["witt", "arith", "--p", "2", "--op", "mul", "--a", "1,1", "--b", "1,1"]);
    assert_eq!(comps(nine), serde_json::json!(["1", "0"]));
    let four = ok(&["witt", "arith", "--p", "2", "--op", "mul", "--a", "0,1", "--b", "0,1"]);
    assert_eq!(comps(four), serde_json::json!(["0", "0"]));
    let five = ok(&["witt", "arith", "--p", "3", "--base", "z", "--op", "add", "--a", "2", "--b", "3"]);
    assert_eq!(comps(five), serde_json::json!(["5"]));
}

#[test]
fn suite_relations_drw_parameterized() {
    let v = ok(&["suite", "--name", "relations-drw", "--p", "2", "--m", "2", "--deg", "6"]);
    assert_eq!(v["failures"], 0);
    assert_eq!(v["passed"], true);
}

#[test]
fn failing_suite_exits_with_two() {
    let out = run(&["suite", "--name", "bridge"]);
    assert_eq!(out.status.code(), Some(2));
    let v = json(&out);
    assert!(v["failures"].as_u64().unwrap() > 0);
}

#[test]
fn tc_sphere_graded_pieces() {
    let v = ok(&["filtered", "tc-sphere", "--N", "4"]);
    let mut got: Vec<(i64, i64)> = v["table"]["graded"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["group"] != "0")
        .map(|e| (e["degree"].as_i64().unwrap(), e["weight"].as_i64().unwrap()))
        .collect();
    got.sort();
    assert_eq!(got, vec![(-1, 0), (0, 0), (1, 1), (3, 2), (5, 3), (7, 4)]);
}

#[test]
fn output_is_deterministic() {
    let a = run(&["drw", "identity-suite", "--p", "3", "--m", "2", "--deg", "4", "--seed", "7", "--compact"]);
    let b = run(&["drw", "identity-suite", "--p", "3", "--m", "2", "--deg", "4", "--seed", "7", "--compact"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["failures"], 0);
}

#[test]
fn results_feed_back_as_inputs() {
    let path = tmp("drw.json");
    let p = path.to_str().unwrap();
    let written = ok(&["drw", "to-cartier", "--p", "2", "--m", "2", "--deg", "3", "--output", p]);
    assert_eq!(written["report"]["valid"], true);
    assert_eq!(ok(&["cartier", "verify", "--input", p])["report"]["valid"], true);
    assert_eq!(ok(&["cartier", "norm", "--input", p])["comparison"]["equal"], true);
    assert_eq!(ok(&["cartier", "complete", "--input", p, "--depth", "3"])["complete"], true);

    let path = tmp("cyclic.json");
    let c = path.to_str().unwrap();
    let first = ok(&["filtered", "cyclic-n", "--n", "3", "--deg", "6", "--output", c]);
    assert_eq!(first["matches_periodic_resolution"], true);
    let again = ok(&["filtered", "homotopy", "--input", c, "--degrees", "-6:0", "--weights", "-4:0"]);
    assert_eq!(again["table"]["levels"], first["table"]["levels"]);
}

#[test]
fn json_round_trip() {
    for args in [
        vec!["witt", "structure-polys", "--p", "3", "--n", "2"],
        vec!["dieudonne", "slopes", "--module", "supersingular", "--p", "3", "--k", "4"],
        vec!["cartier", "tc", "--input", "witt", "--p", "5", "--k", "3"],
        vec!["drw", "basis", "--p", "2", "--m", "2", "--deg", "3"],
    ] {
        let v = ok(&args);
        let text = serde_json::to_string(&v).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), v);
    }
    let m = ok(&["dieudonne", "verify", "--module", "formal", "--p", "2", "--k", "3"]);
    let path = tmp("module.json");
    std::fs::write(&path, m.to_string()).unwrap();
    let again = ok(&["dieudonne", "verify", "--module", path.to_str().unwrap()]);
    assert_eq!(again["module"], m["module"]);
}

#[test]
fn numbers_travel_as_strings() {
    let v = ok(&["cartier", "tc", "--input", "witt", "--p", "3", "--k", "2"]);
    assert_eq!(v["H0"]["0"], "Z/9");
    let h = ok(&["dieudonne", "hom", "--source", "etale", "--target", "etale", "--p", "2", "--k", "3"]);
    assert_eq!(h["hom"]["at_depth"]["group_type"]["invariant_factors"], serde_json::json!(["8"]));
}

#[test]
fn structured_errors() {
    let cases: [(&[&str], &str); 4] = [
        (&["drw", "basis", "--p", "2", "--m", "40"], "TooLarge"),
        (&["dieudonne", "hom", "--source", "etale", "--target", "formal", "--k", "3", "--depth", "1"], "NoStabilization"),
        (&["cartier", "verify", "--input", "{\"p\": 2}"], "SchemaViolation"),
        (&["drw", "op", "--p", "2", "--m", "1", "--deg", "1", "--expr", "{\"op\":\"teich\",\"c\":1,\"j\":5}"], "DegreeOverflow"),
    ];
    for (args, code) in cases {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert_eq!(json(&out)["error"]["code"], code, "{args:?}");
    }
}

#[test]
fn profile_supplies_defaults_and_rejects_unknown_fields() {
    let out = bin().args(["drw", "basis"]).env("CARTIER_LAB_PROFILE", r#"{"p": 3, "m": 1, "deg": 2}"#).output().unwrap();
    let v = json(&out);
    assert_eq!(v["complex"]["p"], 3);
    assert_eq!(v["complex"]["bound"], 2);
    let out = bin().args(["drw", "basis"]).env("CARTIER_LAB_PROFILE", r#"{"prime": 3}"#).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["error"]["kind"], "profile");
    let out = bin().args(["drw", "basis", "--p", "5"]).env("CARTIER_LAB_PROFILE", r#"{"p": 3, "m": 1, "deg": 1}"#).output().unwrap();
    assert_eq!(json(&out)["complex"]["p"], 5);
}

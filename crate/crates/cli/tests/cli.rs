use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn riglab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_riglab")).args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8(out.stdout).unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn analyze(name: &str) -> (i32, Value, String) {
    let path = data(name);
    let (code, out, err) = riglab(&["analyze", path.to_str().unwrap()]);
    let json = serde_json::from_str(&out).unwrap_or(Value::Null);
    (code, json, err)
}

#[test]
fn four_cycle_with_reflection() {
    let (code, r, _) = analyze("four_cycle_reflection.json");
    assert_eq!(code, 0);
    assert_eq!(r["kind"], "ggraph");
    assert_eq!(r["betti"], 1);
    let rigs = r["rigidities"].as_array().unwrap();
    assert_eq!(rigs.len(), 2);
    assert!(rigs.iter().all(|x| x["singular"] == true && x["rigidifier_order"] == 2));
    let verdicts = r["bounds"]["verdicts"].as_object().unwrap();
    assert_eq!(verdicts["tree"]["status"], "not_applicable");
    for t in ["fixpoint", "orbit-avoid", "main", "corollary"] {
        assert_eq!(verdicts[t], serde_json::json!({"status": "holds", "tight": true}), "{t}");
    }
}

#[test]
fn gamma_delta_reduction() {
    let (code, r, _) = analyze("gamma_delta.json");
    assert_eq!(code, 0);
    assert_eq!(r["kind"], "reduction");
    assert_eq!(r["n"], 1);
    assert_eq!(r["beta_prime"], 0);
    assert_eq!(r["omega_rat_int"], serde_json::json!(["Gamma"]));
    assert_eq!(r["base_change"]["vertices"], 5);
    assert_eq!(r["subcurves"][0]["components"], serde_json::json!(["Delta"]));
}

#[test]
fn conjugate_pair_meets_its_genus_budget() {
    let (code, r, _) = analyze("conjugate_pair.json");
    assert_eq!(code, 0);
    assert_eq!(r["beta_prime"], 1);
    assert_eq!(r["local_square"]["log2_bound"], 1);
    assert_eq!(r["genus"]["consistent"], true);
}

#[test]
fn exit_codes() {
    assert_eq!(analyze("malformed.json").0, 2);
    assert_eq!(analyze("bad_action.json").0, 3);
    let (code, _, err) = analyze("over_budget.json");
    assert_eq!(code, 3);
    assert!(err.contains("inconsistent with paper bounds"));
    assert_eq!(analyze("no_such_file.json").0, 2);
    assert_eq!(riglab(&["verify", "--random", "5"]).0, 2, "--random needs --seed");
    assert_eq!(riglab(&["verify"]).0, 2);
    assert_eq!(riglab(&["frobnicate"]).0, 2);
    assert_eq!(riglab(&["--help"]).0, 0);
}

#[test]
fn text_format() {
    let path = data("four_cycle_reflection.json");
    let (code, out, _) = riglab(&["analyze", path.to_str().unwrap(), "--format", "text"]);
    assert_eq!(code, 0);
    assert!(out.contains("betti: 1"));
    assert!(out.contains("corollary    holds (tight)"));
}

#[test]
fn exhaustive_five_passes() {
    let (code, out, _) = riglab(&["verify", "--exhaustive", "5"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["violations"], serde_json::json!([]));
    assert_eq!(r["exhaustive"]["instances"], 2410);
}

#[test]
fn raw_enumeration_agrees_on_small_graphs() {
    let (code, out, _) = riglab(&["verify", "--exhaustive", "4", "--raw"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["config"]["enumeration"], "raw");
    assert!(r["exhaustive"]["graphs"].as_u64().unwrap() > 63);
}

#[test]
fn mutant_is_caught_and_replays() {
    let (code, _, err) = riglab(&["verify", "--random", "20", "--seed", "3", "--mutant", "corollary"]);
    assert_eq!(code, 4);
    let first: Value = serde_json::from_str(err.lines().next().unwrap()).unwrap();
    assert_eq!(first["suite"], "random");
    assert!(first["version"].as_str().unwrap().starts_with("riglab "));
    // The dumped instance replays through analyze and the unmutated checks hold.
    let dir = std::env::temp_dir().join(format!("riglab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("repro.json");
    std::fs::write(&file, first["instance"].to_string()).unwrap();
    let (code, _, _) = riglab(&["analyze", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    // And the seed regenerates the same instance.
    let seed = first["seed"].as_u64().unwrap().to_string();
    let (_, generated, _) = riglab(&["generate", "ggraph", "--seed", &seed]);
    assert_eq!(serde_json::from_str::<Value>(&generated).unwrap(), first["instance"]);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn theorem_subset() {
    let (code, out, _) = riglab(&["verify", "--exhaustive", "3", "--theorems", "tree,main"]);
    assert_eq!(code, 0);
    let r: Value = serde_json::from_str(&out).unwrap();
    let keys: Vec<&String> = r["exhaustive"]["verdicts"].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["main", "tree"]);
    assert_eq!(riglab(&["verify", "--exhaustive", "3", "--theorems", "nope"]).0, 2);
}

#[test]
fn bounds_examples() {
    let (code, out, _) = riglab(&["bounds", "--n", "2", "--genus", "3", "--nonreal", "--format", "text"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().next().unwrap(), "rho_1 <= 8, index <= 2^8");
    let (_, out, _) = riglab(&["bounds", "--n", "3", "--genus", "2", "--real", "--witness"]);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["rho"], 6);
    assert_eq!(r["witness"]["count"], 6);
    let tree = &r["witness"]["tree"];
    let size = |n: &Value| -> usize {
        fn go(n: &Value) -> usize {
            1 + n["children"].as_array().map_or(0, |c| c.iter().map(go).sum())
        }
        go(n)
    };
    assert_eq!(size(tree) - 1, 6);
    let (_, out, _) = riglab(&["bounds", "--n", "0"]);
    let r: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(r["rho"], 0);
    let (_, out, _) = riglab(&["bounds", "--n", "1", "--genus", "1", "--index", "--format", "text"]);
    assert_eq!(out.trim(), "2^2");
    let (_, out, _) = riglab(&["bounds", "--n", "3", "--genus", "1", "--ell", "2", "--format", "text"]);
    assert!(out.contains("optimality not established"));
    assert_eq!(riglab(&["bounds", "--n", "1", "--real", "--nonreal"]).0, 2);
}

#[test]
fn generate_is_deterministic() {
    let a = riglab(&["generate", "reduction", "--seed", "42"]);
    let b = riglab(&["generate", "reduction", "--seed", "42"]);
    assert_eq!(a.0, 0);
    assert_eq!(a.1, b.1);
    let r: Value = serde_json::from_str(&a.1).unwrap();
    assert!(r["galois"]["order"].as_u64().unwrap() <= 12);
}

#[test]
fn in_process_run_matches_binary() {
    let path = data("gamma_delta.json");
    let outcome = riglab_cli::run(["riglab", "analyze", path.to_str().unwrap()]);
    let (code, out, _) = riglab(&["analyze", path.to_str().unwrap()]);
    assert_eq!(outcome.code, code);
    assert_eq!(outcome.stdout, out);
}

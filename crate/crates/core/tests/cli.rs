use std::process::Command;

use germlab::cli::{run, EXIT_OK, EXIT_REJECTED, EXIT_USAGE};
use serde_json::Value;

fn corpus(file: &str) -> String {
    format!("{}/corpus/{}", env!("CARGO_MANIFEST_DIR"), file)
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("germlab").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut a = args.to_vec();
    a.extend(["--json", "-"]);
    let (code, out, _) = call(&a);
    (code, serde_json::from_str(&out).expect("json on stdout"))
}

#[test]
fn milnor_square_case() {
    let (code, out, _) = call(&["milnor", &corpus("mfx1.germ")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("det A = x^3 - x*y^2 - x*z^2"), "{}", out);
}

#[test]
fn envelope_fields() {
    let (code, v) = json(&["--seed", "7", "sing", &corpus("mfx1.germ")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "sing");
    assert_eq!(v["config"]["seed"], 7);
    assert_eq!(v["results"][0]["minors"][2], "x^2");
}

#[test]
fn negative_verdict_is_still_success() {
    let (code, v) = json(&["hwc", &corpus("t.germ")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"][0]["holds"], false);
}

#[test]
fn rejected_product_exits_one() {
    let (code, out, _) = call(&["construct", "product", &corpus("product.germ"), "--germ", "N"]);
    assert_eq!(code, EXIT_REJECTED);
    assert!(out.contains("rejected"));
    let (code, _, _) = call(&["construct", "product", &corpus("product.germ"), "--germ", "P"]);
    assert_eq!(code, EXIT_OK);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(call(&["frobnicate"]).0, EXIT_USAGE);
    assert_eq!(call(&["milnor", "/definitely/not/here.germ"]).0, EXIT_USAGE);
    assert_eq!(call(&["milnor", &corpus("mfx1.germ"), "--germ", "Nope"]).0, EXIT_USAGE);
    assert_eq!(call(&["--radius", "0", "probe-b", &corpus("mfx1.germ")]).0, EXIT_USAGE);
    let (code, out, _) = call(&["--help"]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("corpus"));
}

#[test]
fn malformed_file_names_the_position() {
    let path = std::env::temp_dir().join(format!("germlab-bad-{}.germ", std::process::id()));
    std::fs::write(&path, "map G : R^2 -> R^1\nvars x, y\nG1 = x*y +\n").unwrap();
    let (code, _, err) = call(&["parse", path.to_str().unwrap()]);
    assert_eq!(code, EXIT_USAGE);
    assert!(err.contains("line 3"), "{}", err);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn mixed_algorithm_from_flags() {
    let (code, v) = json(&[
        "construct", "mixed-algo", "--vars", "z1,z2,z3,z4,z5", "--block", "1,3,5",
        "--product", "z1^4*z5^3;z2^5", "--product", "z3^2;z4",
        "--holomorphic", "z1^4 - z3^6", "--conjugated", "-z2^7*z4^3",
    ]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["hwc"]["holds"], true);
    let f = germlab::dsl::parse_mixed_function(
        "f",
        &["z1", "z2", "z3", "z4", "z5"],
        "z1^4*z5^3*conj(z2)^5 + z1^4 - z3^6 + z3^2*conj(z4) - conj(z2)^7*conj(z4)^3",
    )
    .unwrap();
    assert_eq!(v["function"], f.formal().to_string());
}

#[test]
fn witness_and_compose() {
    let (code, out, _) = call(&["witness", &corpus("ent1.germ")]);
    assert_eq!(code, EXIT_OK);
    assert!(out.contains("w: witness (limit (0, 0, 2*s)"), "{}", out);
    let (code, v) = json(&["compose-check", &corpus("comp48.germ")]);
    assert_eq!(code, EXIT_OK);
    assert_eq!(v["results"][0]["exact"]["holds"], true);
}

#[test]
fn json_is_deterministic() {
    let (ent1, mhx1) = (corpus("ent1.germ"), corpus("mhx1.germ"));
    for args in [
        vec!["certify", &ent1, "--json", "-"],
        vec!["probe-b", &mhx1, "--json", "-"],
        vec!["corpus", "run", "--filter", "contraexamplo", "--json", "-"],
    ] {
        let (_, a, _) = call(&args);
        let (_, b, _) = call(&args);
        assert_eq!(a, b, "{:?}", args);
    }
}

#[test]
fn seed_changes_only_the_config_and_samples() {
    let (_, a) = json(&["--seed", "1", "probe-b", &corpus("mhx1.germ")]);
    let (_, b) = json(&["--seed", "2", "probe-b", &corpus("mhx1.germ")]);
    assert_ne!(a["config"], b["config"]);
    assert_eq!(a["results"][0]["probe"]["violation"], b["results"][0]["probe"]["violation"]);
}

#[test]
fn binary_exit_codes_and_env_seed() {
    let bin = env!("CARGO_BIN_EXE_germlab");
    let st = Command::new(bin).args(["sing", &corpus("mfx1.germ")]).output().unwrap();
    assert_eq!(st.status.code(), Some(0));
    let st = Command::new(bin).arg("nonsense").output().unwrap();
    assert_eq!(st.status.code(), Some(2));
    let out = Command::new(bin)
        .env("GERMLAB_SEED", "0x10")
        .args(["sing", &corpus("mfx1.germ"), "--json", "-"])
        .output()
        .unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 16);
    let out = Command::new(bin).env("GERMLAB_SEED", "0x10").args(["--seed", "5", "sing", &corpus("mfx1.germ"), "--json", "-"]).output().unwrap();
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["seed"], 5);
}

//! End-to-end runs of the `carnot` binary.

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn carnot(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_carnot")).args(args).output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn json(args: &[&str]) -> Value {
    let mut v = args.to_vec();
    v.push("--json");
    let r = carnot(&v);
    assert_eq!(r.code, 0, "{}", r.stderr);
    serde_json::from_str(&r.stdout).unwrap()
}

fn scratch_file(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn abelian_product() {
    let r = carnot(&["mul", "--group", "abelian:3", "1,2,3", "4,5,6"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.stdout, "5,7,9\n");
    let v = json(&["mul", "--group", "abelian:3", "1,2,3", "4,5,6"]);
    assert_eq!(v["results"]["product"], serde_json::json!(["5", "7", "9"]));
    assert_eq!(v["subcommand"], "mul");
}

#[test]
fn engel_fields() {
    let r = carnot(&["vf", "--group", "engel"]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(
        lines,
        ["X1 = d1", "X2 = d2 - x1*d3 + 1/2*x1^2*d4", "X3 = d3 - x1*d4", "X4 = d4"]
    );
}

#[test]
fn group_operations() {
    assert_eq!(carnot(&["inv", "--group", "engel", "1,2,3,4"]).stdout.trim(), {
        let v = json(&["inv", "--group", "engel", "1,2,3,4"]);
        let parts: Vec<String> = v["results"]["inverse"]
            .as_array()
            .unwrap()
            .iter()
            .map(|s| s.as_str().unwrap().to_string())
            .collect();
        parts.join(",")
    });
    let x = "1/2,-1,3,2/3";
    let inv = carnot(&["inv", "--group", "engel", x]).stdout.trim().to_string();
    assert_eq!(carnot(&["mul", "--group", "engel", x, &inv]).stdout.trim(), "0,0,0,0");
    assert_eq!(
        carnot(&["dilate", "--group", "engel", "2", "1,1,1,1"]).stdout.trim(),
        "2,2,4,8"
    );
    assert_eq!(
        carnot(&["conj", "--group", "abelian:2", "1,1", "3,-4"]).stdout.trim(),
        "3,-4"
    );
    assert_eq!(
        carnot(&["flow", "--group", "heisenberg1", "0,0,0", "X1", "2"])
            .stdout
            .trim(),
        "2,0,0"
    );
    assert_eq!(
        carnot(&["inv", "--group", "engel", "--coords", "first", "1,2,3,4"])
            .stdout
            .trim(),
        "-1,-2,-3,-4"
    );
}

#[test]
fn pab_classification() {
    let v = json(&["classify", "--group", "engel", "--set", "pab:1,0"]);
    let r = &v["results"];
    assert_eq!(r["verdict"], "not-a-halfspace");
    assert_eq!(r["cone"], false);
    assert_eq!(r["constant_normal"]["nu"], serde_json::json!(["0", "1"]));
    assert_eq!(r["constant_normal"]["derivative"], "x1^2 + 1");
    assert_eq!(r["constant_normal"]["verdict"]["sign"], "positive");
    let d = json(&["deriv", "--group", "engel", "--set", "pab:1,0", "--vec", "X1"]);
    assert_eq!(d["results"]["derivatives"][0]["value"], "0");
}

#[test]
fn halfspace_classification() {
    let v = json(&["classify", "--group", "engel", "--set", "halfspace:3,-2,4"]);
    assert_eq!(v["results"]["verdict"], "halfspace");
    assert_eq!(v["results"]["halfspace"]["nu"], serde_json::json!(["-1", "2"]));
    assert_eq!(v["results"]["halfspace"]["c"], "3/2");
}

#[test]
fn cone_blowup() {
    let v = json(&["blowup", "--group", "engel", "--set", "cone:1/2", "--at", "0,1,0,-1/4"]);
    let r = &v["results"];
    assert_eq!(r["expansion"]["1"], "3/2*x2");
    assert_eq!(r["expansion"]["3"], "1/2*x2^3 + 2*x4");
    assert_eq!(r["tangent"]["classification"], "halfspace");
    assert_eq!(r["tangent"]["halfspace"]["nu"], serde_json::json!(["0", "1"]));
    let e = json(&["blowup", "--group", "engel", "--set", "cone:1/2"]);
    assert_eq!(e["results"]["tangent"]["classification"], "self-similar");
    let off = json(&["blowup", "--group", "engel", "--set", "cone:1/2", "--at", "0,1,0,0"]);
    assert_eq!(off["results"]["on_boundary"], false);
}

#[test]
fn span_and_escape() {
    let v = json(&["span", "--group", "engel", "--sub", "X1", "--vec", "X2"]);
    assert_eq!(v["results"]["orbit_equals_x_plus_iterated"], true);
    assert_eq!(v["results"]["orbit"]["dim"], 3);
    let e = json(&[
        "escape", "--group", "engel", "--sub", "X1", "--vec", "X2", "--seed", "5",
    ]);
    assert_eq!(e["results"]["hypotheses"]["generation"], true);
    let bad = carnot(&[
        "escape", "--group", "engel", "--sub", "X1;X3;X4", "--vec", "X2", "--json",
    ]);
    assert_eq!(bad.code, 3);
    let doc: Value = serde_json::from_str(&bad.stdout).unwrap();
    assert_eq!(doc["error"]["code"], "hypothesis-failure");
    assert_eq!(doc["error"]["hypothesis"], "codimension");
}

#[test]
fn reports_are_deterministic() {
    let density = [
        "density",
        "--group",
        "engel",
        "--set",
        "cone:1/2",
        "--dir",
        "horizontal",
        "--dir",
        "0,1,-1,1/2",
        "--radii",
        "1,1/2,1/4",
        "--json",
    ];
    let a = carnot(&density);
    let b = carnot(&density);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let haar = [
        "haar",
        "--group",
        "engel",
        "--mc-samples",
        "20000",
        "--seed",
        "9",
        "--json",
    ];
    let h1 = carnot(&haar);
    assert_eq!(h1.stdout, carnot(&haar).stdout);
    let other = carnot(&[
        "haar",
        "--group",
        "engel",
        "--mc-samples",
        "20000",
        "--seed",
        "10",
        "--json",
    ]);
    assert_ne!(h1.stdout, other.stdout);
    let v: Value = serde_json::from_str(&h1.stdout).unwrap();
    assert_eq!(v["results"]["closed_form"], "128");
    assert_eq!(v["seed"], 9);
}

#[test]
fn density_csv() {
    let r = carnot(&[
        "density", "--group", "engel", "--set", "cone:1/2", "--radii", "1,1/2", "--csv",
    ]);
    assert_eq!(r.code, 0);
    let lines: Vec<&str> = r.stdout.lines().collect();
    assert_eq!(lines[0], "series,r,estimate,error,slope,constant");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("horizontal,0.5,"));
}

#[test]
fn spec_files_round_trip() {
    let v = json(&["validate", "--group", "engel"]);
    assert_eq!(v["results"]["passed"], true);
    let spec = serde_json::to_string(&v["results"]["spec"]).unwrap();
    let path = scratch_file("engel-spec.json", &spec);
    let p = path.to_str().unwrap();
    let from_file = carnot(&["mul", "--group", p, "1,2,3,4", "-1,1/2,0,5"]);
    let preset = carnot(&["mul", "--group", "engel", "1,2,3,4", "-1,1/2,0,5"]);
    assert_eq!(from_file.code, 0, "{}", from_file.stderr);
    assert_eq!(from_file.stdout, preset.stdout);

    let heis = r#"{"name":"H","dim":3,"layers":[1,1,2],"brackets":{"1,2":{"3":"-4"}}}"#;
    let path = scratch_file("heisenberg-spec.json", heis);
    let d = json(&["deriv", "--group", path.to_str().unwrap(), "--set", "rloca"]);
    assert_eq!(d["results"]["derivatives"][0]["value"], "4*x2");
}

#[test]
fn exit_codes() {
    assert_eq!(carnot(&["frobnicate"]).code, 1);
    assert_eq!(carnot(&["mul", "--group", "abelian:3", "1,2", "3,4,5"]).code, 1);
    assert_eq!(carnot(&["classify", "--set", "blob"]).code, 1);
    let bad = scratch_file(
        "bad-spec.json",
        r#"{"name":"B","dim":3,"layers":[1,1,2],"brackets":{}}"#,
    );
    let r = carnot(&["validate", "--group", bad.to_str().unwrap(), "--json"]);
    assert_eq!(r.code, 2);
    let doc: Value = serde_json::from_str(&r.stdout).unwrap();
    assert_eq!(doc["error"]["code"], "validation-failure");
    assert!(doc["error"]["report"].is_object());
    let exits = carnot(&["density", "--group", "engel", "--set", "pab:1,0", "--radii", "1/2"]);
    assert_eq!(exits.code, 3);
    assert!(exits.stderr.contains("graph-exits-box"));
    assert_eq!(
        carnot(&["density", "--group", "engel", "--set", "pab:1,0", "--radii", "1/2", "--clip"]).code,
        0
    );
}

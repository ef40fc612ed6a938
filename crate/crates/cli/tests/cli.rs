use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use indexmap::IndexMap;
use ordcsp::template::PRESET_NAMES;
use ordcsp::{verify_direct_assignment, FiniteStructure, Instance};
use tempfile::TempDir;

fn ordcsp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ordcsp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

const ORD3_SAT: &str = r#"{"variables":["x","y","z","w"],"constraints":[{"rel":"T","args":["x","y","z"]},{"rel":"T","args":["y","z","w"]},{"rel":"T","args":["w","x","x"]}]}"#;

#[test]
fn sample_qlt_three() {
    let dir = TempDir::new().unwrap();
    let out = ordcsp(
        dir.path(),
        &["preset", "--name", "qlt", "--out", "qlt.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    let out = ordcsp(
        dir.path(),
        &[
            "sample",
            "--template",
            "qlt.json",
            "--size",
            "3",
            "--out",
            "b.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).is_empty());
    let b = FiniteStructure::from_json(&fs::read_to_string(dir.path().join("b.json")).unwrap())
        .unwrap();
    assert_eq!(b.size(), 3);
    assert_eq!(
        b.relation("Lt").unwrap().tuples(),
        &[vec![0, 1], vec![0, 2], vec![1, 2]]
    );
}

#[test]
fn orbits_gamma2_four() {
    let dir = TempDir::new().unwrap();
    ordcsp(
        dir.path(),
        &["preset", "--name", "gamma2", "--out", "gamma2.json"],
    );
    let out = ordcsp(
        dir.path(),
        &["orbits", "--template", "gamma2.json", "--size", "4"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "{\"n\":4,\"class_count\":8,\"exactness\":\"exact\"}\n"
    );
}

#[test]
fn solve_ord3_with_witness() {
    let dir = TempDir::new().unwrap();
    ordcsp(
        dir.path(),
        &["preset", "--name", "ord3", "--out", "ord3.json"],
    );
    write(dir.path(), "a.json", ORD3_SAT);
    let out = ordcsp(
        dir.path(),
        &[
            "solve",
            "--template",
            "ord3.json",
            "--instance",
            "a.json",
            "--witness",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["accept"], true);
    assert_eq!(verdict["sample_size"], 4);
    let witness: IndexMap<String, i64> =
        serde_json::from_value(verdict["witness"].clone()).unwrap();
    let a = Instance::from_json(ORD3_SAT).unwrap();
    assert!(verify_direct_assignment(&ordcsp::preset("ord3").unwrap(), &a, &witness).unwrap());
}

#[test]
fn solve_without_flag_omits_witness() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "a.json", ORD3_SAT);
    let out = ordcsp(
        dir.path(),
        &["solve", "--template", "ord3", "--instance", "a.json"],
    );
    assert_eq!(out.status.code(), Some(0));
    assert!(!stdout(&out).contains("witness"));
}

#[test]
fn reject_exits_one() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "c.json",
        r#"{"variables":["x","y"],"constraints":[{"rel":"Lt","args":["x","y"]},{"rel":"Lt","args":["y","x"]}]}"#,
    );
    let out = ordcsp(
        dir.path(),
        &["solve", "--template", "qlt", "--instance", "c.json"],
    );
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "{\"accept\":false,\"sample_size\":2}\n");
}

#[test]
fn preset_files_match_builtins() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "a.json",
        r#"{"variables":["p","q"],"constraints":[]}"#,
    );
    for name in PRESET_NAMES {
        let file = format!("{name}.json");
        let out = ordcsp(dir.path(), &["preset", "--name", name, "--out", &file]);
        assert_eq!(out.status.code(), Some(0));
        let runs: [&[&str]; 3] = [
            &["sample", "--size", "2"],
            &["orbits", "--size", "3"],
            &["solve", "--instance", "a.json", "--witness"],
        ];
        for args in runs {
            let with = |t: &str| {
                let mut full = vec![args[0], "--template", t];
                full.extend_from_slice(&args[1..]);
                ordcsp(dir.path(), &full)
            };
            let (from_file, builtin) = (with(&file), with(name));
            assert_eq!(
                from_file.status.code(),
                builtin.status.code(),
                "{name} {args:?}"
            );
            assert_eq!(from_file.stdout, builtin.stdout, "{name} {args:?}");
            assert!(!from_file.stdout.is_empty());
        }
    }
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = [
        "sample",
        "--template",
        "gamma3",
        "--size",
        "3",
        "--seed",
        "11",
    ];
    let first = ordcsp(dir.path(), &args);
    let second = ordcsp(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn structure_commands() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "k3.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":3,"relations":{"E":[[0,1],[0,2],[1,0],[1,2],[2,0],[2,1]]}}"#,
    );
    write(
        dir.path(),
        "k4.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":4,"relations":{"E":[[0,1],[0,2],[0,3],[1,0],[1,2],[1,3],[2,0],[2,1],[2,3],[3,0],[3,1],[3,2]]}}"#,
    );
    write(
        dir.path(),
        "k4i.json",
        r#"{"variables":["a","b","c","d"],"constraints":[{"rel":"E","args":["a","b"]},{"rel":"E","args":["a","c"]},{"rel":"E","args":["a","d"]},{"rel":"E","args":["b","c"]},{"rel":"E","args":["b","d"]},{"rel":"E","args":["c","d"]}]}"#,
    );
    let code = |args: &[&str]| ordcsp(dir.path(), args).status.code();
    assert_eq!(
        code(&["ac", "--instance", "k4i.json", "--structure", "k3.json"]),
        Some(0)
    );
    assert_eq!(
        code(&["hom", "--from", "k4.json", "--to", "k3.json"]),
        Some(1)
    );
    assert_eq!(
        code(&["hom", "--from", "k3.json", "--to", "k4.json"]),
        Some(0)
    );
    assert_eq!(
        code(&["check-ts", "--structure", "k3.json", "--arity", "2"]),
        Some(1)
    );
    assert_eq!(
        code(&["check-semilattice", "--structure", "k3.json"]),
        Some(1)
    );
    assert_eq!(
        code(&[
            "walk",
            "--structure",
            "k3.json",
            "--name",
            "E,E",
            "--size",
            "1"
        ]),
        Some(0)
    );

    let out = ordcsp(dir.path(), &["check-equiv", "--structure", "k3.json"]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["set_hom"], false);
    assert_eq!(report["consistent"], true);

    let out = ordcsp(dir.path(), &["powerset", "--structure", "k3.json"]);
    assert_eq!(out.status.code(), Some(0));
    let p = FiniteStructure::from_json(&stdout(&out)).unwrap();
    assert_eq!(p.size(), 7);
}

#[test]
fn walk_lemma_needs_ts_polymorphism() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "k3.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":3,"relations":{"E":[[0,1],[0,2],[1,0],[1,2],[2,0],[2,1]]}}"#,
    );
    let out = ordcsp(
        dir.path(),
        &["walk", "--structure", "k3.json", "--arity", "2"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("totally symmetric"));
}

#[test]
fn caps_exit_three() {
    let dir = TempDir::new().unwrap();
    let out = ordcsp(
        dir.path(),
        &[
            "orbits",
            "--template",
            "gamma1",
            "--size",
            "5",
            "--budget",
            "1000",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("cap"));
    write(
        dir.path(),
        "b.json",
        r#"{"signature":[{"name":"E","arity":2}],"size":3,"relations":{"E":[]}}"#,
    );
    let out = ordcsp(
        dir.path(),
        &[
            "powerset",
            "--structure",
            "b.json",
            "--max-subset-bits",
            "2",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn format_errors_name_the_file() {
    let dir = TempDir::new().unwrap();
    write(
        dir.path(),
        "bad.json",
        r#"{"name":"x","kind":"direct","relations":[{"name":"R","arity":2,"formula":"(lt 0 1"}]}"#,
    );
    write(dir.path(), "a.json", r#"{"variables":[],"constraints":[]}"#);
    let out = ordcsp(
        dir.path(),
        &["solve", "--template", "bad.json", "--instance", "a.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("bad.json") && err.contains("byte"), "{err}");

    write(dir.path(), "broken.json", "{\"variables\": [");
    let out = ordcsp(
        dir.path(),
        &["solve", "--template", "qlt", "--instance", "broken.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(
        err.contains("broken.json") && err.contains("line 1"),
        "{err}"
    );

    let out = ordcsp(
        dir.path(),
        &["solve", "--template", "qlt", "--instance", "missing.json"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("missing.json"));
}

#[test]
fn usage_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    assert_eq!(ordcsp(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        ordcsp(dir.path(), &["sample", "--template", "qlt"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        ordcsp(
            dir.path(),
            &["sample", "--template", "gamma9", "--size", "2"]
        )
        .status
        .code(),
        Some(2)
    );
}

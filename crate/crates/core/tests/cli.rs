//! End-to-end checks of the csurg binary: deterministic reports, canonical
//! round-trips, named exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

fn csurg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csurg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn workdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("csurg-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &PathBuf, name: &str, contents: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p.display().to_string()
}

const FIG: &str = r#"{"components":[{"id":"u","tb":-2,"rot":1,"sign":"+1"}],"linking":[]}"#;
const EMPTY: &str = r#"{"components":[],"linking":[]}"#;

#[test]
fn invariants_report_is_deterministic_and_exact() {
    let dir = workdir();
    let fig = write(&dir, "fig.diagram", FIG);
    let a = csurg(&["invariants", &fig]);
    let b = csurg(&["invariants", &fig]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.contains("d3                       1"), "{text}");
    assert!(text.contains("homology                 0"), "{text}");

    let empty = write(&dir, "empty.diagram", EMPTY);
    let out = csurg(&["invariants", &empty]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("d3                       0"), "{text}");
}

#[test]
fn written_diagrams_reparse_to_equal_values() {
    let dir = workdir();
    let empty = write(&dir, "e.diagram", EMPTY);
    let script = write(
        &dir,
        "s.moves",
        r#"[{"kind":"ambient_connect_sum","params":{"k":1}},
            {"kind":"detour_insert","params":{"p":3}},
            {"kind":"detour_close","params":{"id":"u3"}}]"#,
    );
    let out_path = dir.join("result.diagram").display().to_string();
    let audit_path = dir.join("audit.json").display().to_string();
    let first = csurg(&["move", &empty, &script, "--out", &out_path, "--audit", &audit_path]);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));

    // feeding the written diagram back produces a byte-identical rewrite
    let out2_path = dir.join("result2.diagram").display().to_string();
    let noop = write(&dir, "noop.moves", "[]");
    let second = csurg(&["move", &out_path, &noop, "--out", &out2_path]);
    assert!(second.status.success());
    assert_eq!(
        std::fs::read_to_string(&out_path).unwrap(),
        std::fs::read_to_string(&out2_path).unwrap()
    );
}

#[test]
fn exit_codes_name_the_failure_class() {
    let dir = workdir();
    // parse error
    let bad = write(&dir, "bad.diagram", "{nope");
    assert_eq!(csurg(&["validate", &bad]).status.code(), Some(2));
    // validation violations
    let parity = write(
        &dir,
        "parity.diagram",
        r#"{"components":[{"id":"u","tb":-1,"rot":1,"sign":"+1"}],"linking":[]}"#,
    );
    assert_eq!(csurg(&["validate", &parity]).status.code(), Some(3));
    // rational coefficients are rejected at parse time
    let rational = write(
        &dir,
        "rational.diagram",
        r#"{"components":[{"id":"u","tb":-1,"rot":0,"sign":"1/2"}],"linking":[]}"#,
    );
    assert_eq!(csurg(&["validate", &rational]).status.code(), Some(2));
    // precondition failure: detour close on a linked component
    let linked = write(
        &dir,
        "linked.diagram",
        r#"{"components":[{"id":"a","tb":-4,"rot":1,"sign":"-1"},{"id":"b","tb":-2,"rot":1,"sign":"+1"}],
            "linking":[{"a":"a","b":"b","lk":1}]}"#,
    );
    let close = write(&dir, "close.moves", r#"[{"kind":"detour_close","params":{"id":"a"}}]"#);
    assert_eq!(csurg(&["move", &linked, &close]).status.code(), Some(4));
}

#[test]
fn ladder_certificate_roundtrips_through_detour() {
    let dir = workdir();
    let cert = dir.join("ladder.json").display().to_string();
    let out = csurg(&["ladder", "--from", "0", "--to", "2", "--out", &cert]);
    assert!(out.status.success());
    let rerouted = dir.join("detoured.json").display().to_string();
    let out = csurg(&["detour", &cert, "--p", "3", "--out", &rerouted]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("length                   4"), "{text}");

    let ot = dir.join("otd.json").display().to_string();
    let out = csurg(&["ot-distance", &cert, "--out", &ot]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn subgraph_dot_is_stable() {
    let dir = workdir();
    let dot1 = dir.join("a.dot").display().to_string();
    let dot2 = dir.join("b.dot").display().to_string();
    let args = ["subgraph", "--tb-floor", "2", "--signs", "+1", "--depth", "2", "--dot"];
    let a = csurg(&[&args[..], &[dot1.as_str()]].concat());
    let b = csurg(&[&args[..], &[dot2.as_str()]].concat());
    assert!(a.status.success() && b.status.success());
    assert_eq!(
        std::fs::read_to_string(&dot1).unwrap(),
        std::fs::read_to_string(&dot2).unwrap()
    );
}

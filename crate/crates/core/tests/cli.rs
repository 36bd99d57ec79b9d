use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../problems")
        .join(name)
}

fn termreg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termreg"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(name: &str) -> String {
    problem(name).to_string_lossy().into_owned()
}

#[test]
fn exit_codes() {
    assert_eq!(termreg(&["decide", &path("linear.trp")]).status.code(), Some(0));
    assert_eq!(termreg(&["decide", &path("covered.trp")]).status.code(), Some(0));
    assert_eq!(termreg(&["decide", &path("finite.trp")]).status.code(), Some(0));
    assert_eq!(termreg(&["decide", &path("diagonal.trp")]).status.code(), Some(1));
    assert_eq!(termreg(&["decide", &path("ternary.trp")]).status.code(), Some(1));
    let missing = termreg(&["decide", "/nonexistent/problem.trp"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).starts_with("error:"));
}

#[test]
fn syntax_errors_name_the_position() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.trp");
    std::fs::write(&file, "signature f/2 a/0\nvar x : any\npattern f(x, q)\n").unwrap();
    let o = termreg(&["decide", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("3:14: unknown symbol or variable `q`"));
}

#[test]
fn json_report() {
    let o = termreg(&["decide", &path("diagonal.trp"), "--json"]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "termreg.report/1");
    assert_eq!(v["verdict"], "not-regular");
    assert_eq!(v["refutation"]["pattern"], "f(x,x)");
    let ws: Vec<&str> = v["witnesses"]
        .as_array()
        .unwrap()
        .iter()
        .map(|w| w.as_str().unwrap())
        .collect();
    assert_eq!(ws.len(), 10);
    assert_eq!(&ws[..3], ["f(a,a)", "f(b,b)", "f(f(a,a),f(a,a))"]);
    assert!(v["trace"].is_null());

    let o = termreg(&["decide", &path("linear.trp"), "--json", "--trace"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "regular");
    assert!(v["refutation"].is_null());
    assert!(v["trace"].as_array().unwrap().last().unwrap() == "REGULAR");
    assert!(v["stats"]["h"].as_u64().unwrap() >= v["stats"]["states"].as_u64().unwrap());
}

#[test]
fn golden_trace() {
    let o = termreg(&["decide", &path("covered.trp"), "--trace"]);
    let expected = "\
SINGLE |S2| = 2, |Q| = 1, H = 1, h = 3
PATTERN f(x_3,x_3) : checking
BRANCH f(x_3,x_3) : S3 = {f(y_4,z_5)}
FORMULA ⊥
REDUCED ⊥
W += {x_3}
PATTERN f(y_4,z_5) : regular
REGULAR
regular
";
    assert!(stdout(&o).starts_with(expected), "{}", stdout(&o));
}

#[test]
fn witness_count_and_binarized_decoding() {
    let o = termreg(&["decide", &path("ternary.trp"), "--witnesses", "3"]);
    let text = stdout(&o);
    assert!(text.contains("    g(a,a,a)\n    g(b,a,b)\n"), "{text}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("g/3"));
}

#[test]
fn seeded_order_gives_the_same_verdict() {
    for seed in ["1", "2", "99"] {
        for (file, code) in [("covered.trp", 0), ("diagonal.trp", 1), ("linear.trp", 0)] {
            let o = termreg(&["decide", &path(file), "--seed-order", seed]);
            assert_eq!(o.status.code(), Some(code), "{file} with seed {seed}");
        }
    }
}

#[test]
fn oracle_commands() {
    let o = termreg(&["oracle", "enum", &path("diagonal.trp"), "--max-height", "2"]);
    assert_eq!(stdout(&o).lines().count(), 6);

    let o = termreg(&["oracle", "check", &path("covered.trp")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("agrees on 1446 terms"));

    let o = termreg(&["oracle", "check", &path("diagonal.trp")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("10 witnesses, all instances"));

    let o = termreg(&["oracle", "check", &path("diagonal.trp"), "f(a,a)", "f(a,b)"]);
    assert_eq!(stdout(&o), "instance f(a,a)\nnot-instance f(a,b)\n");
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn hardness_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let automata = dir.path().join("automata.trp");
    // One automaton accepting only `a`: its union is not universal.
    std::fs::write(
        &automata,
        "signature f/2 a/0 b/0\nautomaton OnlyA\n  states p\n  final p\n  a -> p\nend\n",
    )
    .unwrap();
    let o = termreg(&["oracle", "gen-hardness", automata.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("# union of the automata is universal: false"));
    let generated = dir.path().join("hard.trp");
    std::fs::write(&generated, &text).unwrap();
    let o = termreg(&["decide", generated.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

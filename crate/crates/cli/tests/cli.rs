use std::io::Write;
use std::process::{Command, Output, Stdio};

use tempfile::NamedTempFile;

const ROSE3: &str = "axis a\nedge x a a\nedge y a a\nedge z a a\n";
const BARBELL: &str = "axis a\naxis b\naxis c\naxis d\nedge p a a\nedge q a b\nedge r b c\nedge s c d\nedge t d d\n";
const LOOPED_RAY: &str = "axis o\nray r attach o period 1\n";
const LINE: &str = "# two loopless rays\naxis o\nray l attach o period 0\nray r attach o period 0 # right\n";

fn file(text: &str) -> NamedTempFile {
    let mut f = NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_ckgraph"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut input = child.stdin.take().unwrap();
    input.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(input);
    child.wait_with_output().unwrap()
}

fn run_file(args: &[&str], text: &str) -> Output {
    let f = file(text);
    let mut all = args.to_vec();
    all.push(f.path().to_str().unwrap());
    run(&all, None)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn kgroups_rose3() {
    let o = run_file(&["kgroups"], ROSE3);
    assert!(o.status.success());
    assert_eq!(stdout(&o).trim(), "K0 = Z^3 (+) Z/2, K1 = Z^3");
}

#[test]
fn kgroups_json() {
    let o = run_file(&["kgroups", "--json"], ROSE3);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({"k0": {"free": 3, "torsion": [2]}, "k1": {"free": 3}}));

    let o = run_file(&["kgroups", "--json"], LOOPED_RAY);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v, serde_json::json!({"k0": {"free": "countable", "torsion": []}, "k1": {"free": "countable"}}));
}

#[test]
fn kgroups_line_from_stdin() {
    let o = run(&["kgroups", "-"], Some(LINE));
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "K0 = Z^2, K1 = 0");
}

#[test]
fn info_lines() {
    let o = run_file(&["info"], LINE);
    assert_eq!(stdout(&o), "axes=1 links=0 rays=2\nbeta=0 gamma=2 rose-tree=yes\ndead-ends: none\n");
    let o = run_file(&["info"], BARBELL);
    assert!(stdout(&o).starts_with("axes=4 links=5 rays=0\nbeta=2 gamma=0"));
}

#[test]
fn reduce_barbell() {
    let o = run_file(&["reduce"], BARBELL);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("certified: yes"));
    assert!(out.contains("E-tilde: K0 = Z^2, K1 = Z^2"));
    assert!(out.contains("rose-tree: axes=1 loops=2 tails=0"));
}

#[test]
fn reduce_emit_round_trips_through_kgroups() {
    for (text, expected) in
        [(BARBELL, "K0 = Z^2, K1 = Z^2"), (LOOPED_RAY, "K0 = Z^(N), K1 = Z^(N)"), (LINE, "K0 = Z^2, K1 = 0")]
    {
        let o = run_file(&["reduce", "--emit"], text);
        assert!(o.status.success(), "{}", stderr(&o));
        assert!(stderr(&o).contains("certified: yes"));
        let again = run(&["kgroups", "-"], Some(&stdout(&o)));
        assert_eq!(stdout(&again).trim(), expected);
        let info = run(&["info", "-"], Some(&stdout(&o)));
        assert!(stdout(&info).contains("rose-tree=yes"));
    }
}

#[test]
fn parse_errors_exit_2() {
    let cases = [
        ("axis a\nedge e a b\n", "unknown axis b, line 2"),
        ("axis a\naxis a\n", "duplicate name a, line 2"),
        ("axis a\nray r attach a period\n", "empty period, line 2"),
        ("axis a\nray r attach a period 1,x\n", "non-numeric loop count x, line 2"),
        ("foo\n", "unknown keyword foo, line 1"),
        ("# nothing\n", "no axes declared"),
    ];
    for (text, message) in cases {
        let o = run_file(&["kgroups"], text);
        assert_eq!(o.status.code(), Some(2), "{text}");
        assert!(stderr(&o).contains(message), "{}", stderr(&o));
    }
}

#[test]
fn missing_file_exit_2() {
    let o = run(&["info", "/nonexistent/graph.txt"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_random_modes() {
    for mode in ["finite-formula", "shrink", "k1-cycles", "valency"] {
        let o = run(&["verify", mode, "--seed", "7", "--count", "4"], None);
        assert!(o.status.success(), "{mode}: {}", stderr(&o));
        assert!(stdout(&o).ends_with(&format!("{mode}: 4/4 passed\n")), "{}", stdout(&o));
    }
}

#[test]
fn verify_shrink_on_file() {
    let o = run(&["verify", "shrink", "--tree", "q,r"], None);
    assert_eq!(o.status.code(), Some(2));
    let f = file(BARBELL);
    let o = run(&["verify", "shrink", f.path().to_str().unwrap(), "--tree", "q", "--tree", "s"], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("J=yes Pi=yes"));
}

#[test]
fn verify_shrink_rejects_cycle() {
    let f = file(BARBELL);
    let o = run(&["verify", "shrink", f.path().to_str().unwrap(), "--tree", "p"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_k1_cycles_single_loop_fails() {
    let o = run_file(&["verify", "k1-cycles"], "axis a\nedge e a a\n");
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("verification failed"));
}

#[test]
fn verify_valency_on_file() {
    let o = run_file(&["verify", "valency", "--depth", "3"], LINE);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("gamma 2 -> 2"));
}

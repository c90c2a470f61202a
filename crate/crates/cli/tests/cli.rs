//! Command-line plumbing: argument validation, exit codes, report
//! structure, and the CSV schema.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_errbound")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("..").join("data").join(name)
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("the binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("stdout is utf-8")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("stderr is utf-8")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("the process exits normally")
}

#[test]
fn help_and_version_exit_zero() {
    let help = run(&["--help"]);
    assert_eq!(code(&help), 0);
    assert!(stdout(&help).contains("hoffman"));
    let version = run(&["--version"]);
    assert_eq!(code(&version), 0);
    for sub in ["hoffman", "phi", "modulus", "stability", "oracle-check"] {
        assert_eq!(code(&run(&[sub, "--help"])), 0, "{sub} --help");
    }
}

#[test]
fn unknown_flags_and_subcommands_exit_one() {
    assert_eq!(code(&run(&["nonsense"])), 1);
    assert_eq!(code(&run(&["phi", "--bogus"])), 1);
    assert_eq!(code(&run(&[])), 1);
}

#[test]
fn missing_spec_file_exits_one() {
    let out = run(&["hoffman", "/nonexistent/system.json"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("cannot read"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn malformed_spec_files_exit_one() {
    let cases: &[(&str, &str)] = &[
        ("garbage.json", "this is not json"),
        ("unknown-field.json", r#"{"space_dim":2,"norm":"euclidean","rows":[],"extra":1}"#),
        (
            "unknown-row-field.json",
            r#"{"space_dim":2,"norm":"euclidean","rows":[{"label":"1","a":[1.0,1.0],"b":0.0,"c":2}]}"#,
        ),
        ("empty-rows.json", r#"{"space_dim":2,"norm":"euclidean","rows":[]}"#),
        (
            "bad-norm.json",
            r#"{"space_dim":2,"norm":"manhattan","rows":[{"label":"1","a":[1.0,1.0],"b":0.0}]}"#,
        ),
        (
            "dim-mismatch.json",
            r#"{"space_dim":2,"norm":"euclidean","rows":[{"label":"1","a":[1.0],"b":0.0}]}"#,
        ),
        ("zero-dim.json", r#"{"space_dim":0,"norm":"euclidean","rows":[]}"#),
    ];
    for (name, text) in cases {
        let path = tmp(name);
        std::fs::write(&path, text).expect("the fixture writes");
        let out = run(&["hoffman", path.to_str().expect("utf-8 path")]);
        assert_eq!(code(&out), 1, "{name} should exit 1, stderr: {}", stderr(&out));
        assert!(stderr(&out).contains("invalid input"), "{name}");
    }
}

#[test]
fn source_selection_is_strict() {
    let ex1 = data("ex1.json");
    let ex1 = ex1.to_str().expect("utf-8 path");
    // Both a path and --function.
    assert_eq!(code(&run(&["phi", ex1, "--function", "abs", "--at", "0"])), 1);
    // Neither.
    let out = run(&["phi", "--at", "0"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("spec path or --function"));
    // Unknown named function.
    assert_eq!(code(&run(&["phi", "--function", "nosuch", "--at", "0"])), 1);
}

#[test]
fn coordinate_parsing_is_strict() {
    let ex1 = data("ex1.json");
    let ex1 = ex1.to_str().expect("utf-8 path");
    assert_eq!(code(&run(&["phi", ex1, "--at", "1,abc"])), 1);
    assert_eq!(code(&run(&["phi", ex1, "--at", ""])), 1);
    assert_eq!(code(&run(&["phi", ex1, "--at", "inf,0"])), 1);
    // Dimension mismatch against the loaded system.
    assert_eq!(code(&run(&["phi", ex1, "--at", "1,2,3"])), 1);
}

#[test]
fn modulus_scope_flags_are_strict() {
    let ex1 = data("ex1.json");
    let ex1 = ex1.to_str().expect("utf-8 path");
    // Both scopes.
    assert_eq!(code(&run(&["modulus", ex1, "--global", "--local", "--at", "0,0"])), 1);
    // Neither scope.
    let out = run(&["modulus", ex1]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("exactly one of --global or --local"));
    // Local without an anchor.
    assert_eq!(code(&run(&["modulus", ex1, "--local"])), 1);
    // Global with an anchor.
    assert_eq!(code(&run(&["modulus", ex1, "--global", "--at", "0,0"])), 1);
    // Bad radii.
    assert_eq!(code(&run(&["modulus", ex1, "--global", "--shells", "1,-2"])), 1);
    assert_eq!(code(&run(&["modulus", ex1, "--local", "--at", "0,0", "--radius=-1"])), 1);
}

#[test]
fn stability_needs_exactly_one_scope() {
    let ex2 = data("ex2.json");
    let ex2 = ex2.to_str().expect("utf-8 path");
    let out = run(&["stability", ex2]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--at or --global"));
    assert_eq!(code(&run(&["stability", ex2, "--at", "0,0", "--global"])), 1);
}

#[test]
fn sweep_flags_are_strict() {
    let ex2 = data("ex2.json");
    let ex2 = ex2.to_str().expect("utf-8 path");
    let out_path = tmp("never-written.csv");
    let out_str = out_path.to_str().expect("utf-8 path");
    // --out without --sweep.
    let out = run(&["hoffman", ex2, "--out", out_str]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("--out needs --sweep"));
    assert!(!out_path.exists());
    // Negative magnitudes.
    assert_eq!(code(&run(&["hoffman", ex2, "--sweep=-0.1"])), 1);
    // Unparseable list.
    assert_eq!(code(&run(&["hoffman", ex2, "--sweep", "0.1;0.2"])), 1);
}

#[test]
fn sweep_csv_has_the_documented_schema() {
    let ex2 = data("ex2.json");
    let csv_path = tmp("schema.csv");
    let out = run(&[
        "hoffman",
        ex2.to_str().expect("utf-8 path"),
        "--sweep",
        "0.0,0.1",
        "--out",
        csv_path.to_str().expect("utf-8 path"),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr(&out));
    let text = std::fs::read_to_string(&csv_path).expect("the csv was written");
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,anchor_id,direction_id,lower_bound,sigma_sampled"));
    let mut rows = 0;
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5, "row {line:?}");
        let _: f64 = fields[0].parse().expect("eps parses");
        for value in [fields[3], fields[4]] {
            assert!(value == "inf" || value.parse::<f64>().is_ok(), "cell {value:?}");
        }
        rows += 1;
    }
    // One anchor (the single active set), dim + 2 random = 6 directions,
    // two magnitudes.
    assert_eq!(rows, 12);
    assert!(stdout(&out).contains("csv written"));
}

#[test]
fn threads_environment_variable_is_echoed() {
    let ex2 = data("ex2.json");
    let out = Command::new(bin())
        .args(["phi", ex2.to_str().expect("utf-8 path"), "--at", "0,0"])
        .env("ERRBOUND_THREADS", "7")
        .output()
        .expect("the binary runs");
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("threads: 1 (ERRBOUND_THREADS=7"));
    let unset = run(&["phi", ex2.to_str().expect("utf-8 path"), "--at", "0,0"]);
    assert!(stdout(&unset).contains("threads: 1 (ERRBOUND_THREADS unset)"));
}

#[test]
fn reports_name_their_inputs() {
    let ex1 = data("ex1.json");
    let out = run(&["hoffman", ex1.to_str().expect("utf-8 path")]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("3 rows, dimension 2, euclidean norm"));
    assert!(text.contains("seed: 42"));
    assert!(text.contains("stability verdict: stable"));
}

#[test]
fn oracle_check_passes_on_the_shipped_corpus() {
    for name in ["ex1.json", "ex2.json", "halfspace.json"] {
        let path = data(name);
        let out = run(&["oracle-check", path.to_str().expect("utf-8 path")]);
        assert_eq!(code(&out), 0, "{name} stderr: {}", stderr(&out));
        let text = stdout(&out);
        assert!(text.contains("result: pass"), "{name}: {text}");
        assert!(!text.contains("[fail]"), "{name}");
    }
}

#[test]
fn scalar_functions_work_end_to_end() {
    let out = run(&["phi", "--function", "abs", "--at", "0"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("phi: 1.0000000000000000e0"), "{text}");
    let out = run(&["stability", "--function", "abs", "--at", "0"]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("verdict: stable"));
}

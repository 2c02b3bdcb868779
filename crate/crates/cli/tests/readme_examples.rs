//! Runs every `console` block of the workspace README against the built
//! binary. In expected output a line `...` matches any number of lines and a
//! trailing `[exit N]` gives the expected exit status (default 0).

use std::path::Path;
use std::process::Command;

struct Example {
    args: Vec<String>,
    expected: Vec<String>,
    exit: i32,
}

fn parse_examples(readme: &str) -> Vec<Example> {
    let mut out: Vec<Example> = Vec::new();
    let mut in_console = false;
    for line in readme.lines() {
        if !in_console {
            in_console = line.trim_end() == "```console";
            continue;
        }
        if line.trim_end() == "```" {
            in_console = false;
            continue;
        }
        if let Some(cmd) = line.strip_prefix("$ ") {
            let mut words = cmd.split_whitespace().map(str::to_string);
            assert_eq!(words.next().as_deref(), Some("pmzv"), "example must invoke pmzv: {line}");
            out.push(Example {
                args: words.collect(),
                expected: Vec::new(),
                exit: 0,
            });
            continue;
        }
        let ex = out.last_mut().expect("output line before any command");
        if let Some(code) = line.strip_prefix("[exit ").and_then(|s| s.strip_suffix(']')) {
            ex.exit = code.parse().unwrap();
        } else {
            ex.expected.push(line.to_string());
        }
    }
    out
}

/// Matches `actual` against `pattern`, where a `...` pattern line absorbs
/// zero or more actual lines.
fn matches(pattern: &[String], actual: &[&str]) -> bool {
    match pattern.split_first() {
        None => actual.is_empty(),
        Some((p, rest)) if p == "..." => (0..=actual.len()).any(|skip| matches(rest, &actual[skip..])),
        Some((p, rest)) => match actual.split_first() {
            Some((a, tail)) => a.trim_end() == p.trim_end() && matches(rest, tail),
            None => false,
        },
    }
}

fn readme() -> String {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../README.md");
    std::fs::read_to_string(path).expect("README.md")
}

fn run(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pmzv")).args(args).output().expect("spawn pmzv")
}

#[test]
fn readme_console_examples() {
    let examples = parse_examples(&readme());
    assert!(examples.len() >= 15, "only {} examples found", examples.len());
    let mut failures = Vec::new();
    for ex in &examples {
        let args: Vec<&str> = ex.args.iter().map(String::as_str).collect();
        let output = run(&args);
        let text = format!(
            "{}{}",
            String::from_utf8_lossy(&output.stdout),
            String::from_utf8_lossy(&output.stderr)
        );
        let lines: Vec<&str> = text.lines().collect();
        let code = output.status.code().unwrap_or(-1);
        if code != ex.exit || !matches(&ex.expected, &lines) {
            failures.push(format!(
                "$ pmzv {}\n  exit {code} (expected {})\n--- expected\n{}\n--- actual\n{text}",
                ex.args.join(" "),
                ex.exit,
                ex.expected.join("\n")
            ));
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n\n"));
}

#[test]
fn pattern_matching() {
    let p = |v: &[&str]| v.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    assert!(matches(&p(&["a", "...", "d"]), &["a", "b", "c", "d"]));
    assert!(matches(&p(&["a", "...", "b"]), &["a", "b"]));
    assert!(matches(&p(&["..."]), &[]));
    assert!(!matches(&p(&["a", "b"]), &["a", "b", "c"]));
    assert!(!matches(&p(&["a", "...", "d"]), &["a", "b"]));
}

#[test]
fn json_report_without_timestamp_is_reproducible() {
    let args = [
        "verify", "--suite", "thm11ii", "--weight-max", "3", "--r-max", "1", "--grid", "1,1.5", "--output", "json",
        "--no-timestamp",
    ];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let report: serde_json::Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(report["suite"], "thm11ii");
    assert!(report.get("timestamp_unix").is_none_or(|t| t.is_null()));
}

#[test]
fn csv_compute_output() {
    let out = run(&["compute", "--family", "Zstar", "--word", "1:1,1:2", "--r-vector", "0,1", "--output", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    let headers = reader.headers().unwrap().clone();
    assert_eq!(
        headers.iter().collect::<Vec<_>>(),
        ["family", "word", "alpha", "beta", "r", "value_re", "value_im", "err_estimate", "n_used", "converged"]
    );
    let row = reader.records().next().unwrap().unwrap();
    let v: f64 = row[5].parse().unwrap();
    // Closed form of this value: π⁴/72.
    assert!((v - std::f64::consts::PI.powi(4) / 72.0).abs() < 1e-9, "{v}");
}

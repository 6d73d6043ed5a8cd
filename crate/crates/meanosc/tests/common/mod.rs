//! The generate -> analyze -> theorem1 -> theorem2 -> rh pipeline behind the
//! golden files.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub const CASES: &[(&str, &str)] = &[
    (
        "spike4",
        r#"{"kind":{"type":"spike","m":1,"position":"last"},"shape":[4]}"#,
    ),
    (
        "power05",
        r#"{"kind":{"type":"power","a":0.5},"shape":[1024]}"#,
    ),
];

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI in-process.
pub fn run(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("meanosc").chain(args.iter().copied());
    let code = meanosc::run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

pub fn golden_dir(case: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(case)
}

/// Drops the `tool_version` line so a version bump does not invalidate the
/// stored reports.
pub fn strip_version(s: &str) -> String {
    s.lines()
        .filter(|l| !l.trim_start().starts_with("\"tool_version\""))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Output files of the pipeline, by name, in pipeline order.
pub fn pipeline(spec: &str, dir: &Path) -> Vec<(&'static str, String)> {
    let input = dir.join("wgrid.json");
    let input = input.to_str().unwrap();
    let r = run(&["generate", "--spec", spec, "--out", input]);
    assert_eq!(r.code, 0, "generate: {}", r.stderr);
    let mut outputs = vec![("wgrid", std::fs::read_to_string(input).unwrap())];
    let steps: [(&str, Vec<&str>); 4] = [
        ("analyze", vec!["analyze", input]),
        ("theorem1", vec!["theorem1", input]),
        ("theorem2", vec!["theorem2", input]),
        ("rh", vec!["rh", input, "--auto"]),
    ];
    for (name, args) in steps {
        let r = run(&args);
        assert_eq!(r.code, 0, "{name}: {}", r.stderr);
        outputs.push((name, strip_version(&r.stdout)));
    }
    outputs
}

/// Compares against (or with `UPDATE_GOLDEN=1`, rewrites) the stored files.
/// Returns the names that differ.
pub fn check_golden(case: &str, outputs: &[(&str, String)]) -> Vec<String> {
    let dir = golden_dir(case);
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    if update {
        std::fs::create_dir_all(&dir).unwrap();
    }
    let mut mismatched = Vec::new();
    for (name, text) in outputs {
        let path = dir.join(format!("{name}.json"));
        if update {
            std::fs::write(&path, text).unwrap();
            continue;
        }
        match std::fs::read_to_string(&path) {
            Ok(stored) if stored == *text => {}
            _ => mismatched.push(format!("{case}/{name}")),
        }
    }
    mismatched
}

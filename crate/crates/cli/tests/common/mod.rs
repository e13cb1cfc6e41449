#![allow(dead_code)]

use std::path::Path;

pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run(args: &[&str]) -> Outcome {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let argv = std::iter::once("fixlab").chain(args.iter().copied());
    let code = fixlab_cli::run(argv, &mut stdout, &mut stderr);
    Outcome { code, stdout: String::from_utf8(stdout).unwrap(), stderr: String::from_utf8(stderr).unwrap() }
}

/// Runs a command in structured format and parses the report from stdout.
pub fn report(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = args.to_vec();
    full.extend(["--format", "structured"]);
    let out = run(&full);
    let value = serde_json::from_str(&out.stdout)
        .unwrap_or_else(|e| panic!("no report for {args:?} ({e}); stderr: {}", out.stderr));
    (out.code, value)
}

pub fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

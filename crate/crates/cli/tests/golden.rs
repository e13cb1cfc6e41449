//! Pins the serialized certification report of example-3.5. Regenerate with
//! `FIXLAB_BLESS=1 cargo test -p fixlab --test golden` after intended changes.

mod common;

use std::path::PathBuf;

#[test]
fn certify_example_3_5_report() {
    let out = common::run(&["certify", "--example", "example-3.5", "--format", "structured"]);
    assert_eq!(out.code, 0, "{}", out.stderr);
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/certify_example_3_5.json");
    if std::env::var_os("FIXLAB_BLESS").is_some() {
        std::fs::write(&path, &out.stdout).unwrap();
    }
    let golden = std::fs::read_to_string(&path).expect("golden file present");
    assert!(out.stdout == golden, "report differs from {}:\n{}", path.display(), out.stdout);
}

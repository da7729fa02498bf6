mod common;

use common::*;

#[test]
fn every_proven_application_preserves_results() {
    let p = check_preservation(3, 40, 100, 1e-9, 7);
    assert!(p.programs >= 20);
    assert!(p.failures.is_empty(), "{}", p.failures.join("\n"));
    eprintln!("{} applications, {} runs", p.applications, p.runs);
}

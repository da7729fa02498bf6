mod common;

use common::soundness::{check_program, Tally};
use common::*;
use rand::rngs::StdRng;
use rand::SeedableRng;

#[test]
fn true_predicates_survive_dynamic_traces() {
    let mut tally = Tally::default();
    let mut rng = StdRng::seed_from_u64(11);
    for (name, prog) in sem_corpus() {
        check_program(&name, &prog, 4, 6, &mut rng, &mut tally);
    }
    eprintln!("{:?}", tally.checked);
    assert!(
        tally.violations.is_empty(),
        "{}",
        tally.violations.join("\n")
    );
    assert!(tally.checked.len() >= 7, "{:?}", tally.checked);
}

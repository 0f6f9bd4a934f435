use pqm::harness::shrink::candidates;
use pqm::harness::{check_program, gen_corpus, shrink, GenParams, Program, Property};
use pqm::mutant::{EvalOptions, Mutant};

fn fails_under(m: Mutant) -> impl Fn(&Program) -> bool {
    move |p| !check_program(p, 10_000, &EvalOptions::with_mutant(m), &Property::ALL).1.is_empty()
}

#[test]
fn tuple_join_mutant_shrinks_to_a_small_pair() {
    let failing = fails_under(Mutant::MachineTupleJoinSwap);
    let corpus: Vec<Program> =
        gen_corpus(&GenParams { seed: 3, ..GenParams::default() }, 500).into_iter().map(Result::unwrap).collect();
    let original = corpus.iter().filter(|p| failing(p)).max_by_key(|p| p.term.size()).expect("mutant is caught");
    let small = shrink(original, &failing);
    assert!(failing(&small));
    assert_eq!(small.ty, original.ty);
    assert!(small.term.size() <= original.term.size());
    assert!(small.term.contains(&|t| matches!(t, pqm::Term::Pair(..))), "{}", small.term);
    // a second pass finds nothing smaller
    assert_eq!(shrink(&small, &failing), small);
    assert!(small.term.size() <= 7, "{} has size {}", small.term, small.term.size());
}

#[test]
fn candidates_are_smaller_or_contracted() {
    let t = pqm::parse("(\\x:Qubit. apply(gate H, x)) #0").unwrap();
    let cs = candidates(&t);
    assert!(cs.iter().any(|c| c.to_string() == "apply(gate H, #0)"));
    assert!(cs.iter().any(|c| c.to_string() == "#0"));
}

mod common;

use clarith::cl12::{check_proof, search, Budget, Checker, Rule};
use clarith::syntax::{parse_formula, parse_sequent, parse_term, Sequent};
use common::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn corpus_proofs_check() {
    for (name, p) in all_cl12_proofs() {
        let r = check_proof(&p);
        assert!(r.ok, "{name}: {:?}", r.first_failure);
        assert!(r.trusted_steps.is_empty(), "{name}");
    }
    assert_eq!(cl12_corpus("example_8_1.cl12").lines.len(), 10);
}

#[test]
fn mutants_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(81);
    for (name, p) in all_cl12_proofs() {
        let concl = p.conclusion().unwrap().clone();
        for _ in 0..120 {
            let m = mutate_cl12(&p, &mut rng);
            let r = check_proof(&m);
            assert!(!r.ok || m.conclusion() != Some(&concl), "{name}: mutant accepted:\n{}", m.to_text());
        }
    }
}

#[test]
fn choosing_the_wrong_term_is_a_violation() {
    let mut p = cl12_corpus("example_8_1.cl12");
    let Rule::AllChoose(_, t) = &mut p.lines[4].rule else { panic!("line 5 is ⊓x-Choose") };
    *t = parse_term("r").unwrap();
    let r = check_proof(&p);
    assert_eq!(r.first_failure.map(|f| f.0), Some(5));
}

#[test]
fn search_examples() {
    let none = [
        "⟹ ⊓x p(x) → ∀x p(x)",
        "⟹ ⊔y⊓x(p(x) → p(y))",
        "⟹ ⊓x⊔y(y=f(x))",
        "⟹ p⊓q → (p⊓q)∧(p⊓q)",
    ];
    let some = [
        "⟹ ∀x p(x) → ⊓x p(x)",
        "⟹ ⊓x⊔y(p(x) → p(y))",
        "⟹ ∀x∃y(y=f(x))",
        "p⊓q ⟹ (p⊓q)∧(p⊓q)",
    ];
    for s in none {
        assert!(search(&parse_sequent(s).unwrap(), &Budget::default()).is_none(), "{s}");
    }
    for s in some {
        let x = parse_sequent(s).unwrap();
        let p = search(&x, &Budget::default()).unwrap_or_else(|| panic!("{s}"));
        assert!(check_proof(&p).ok, "{s}");
        assert_eq!(p.conclusion(), Some(&x));
    }
}

#[test]
fn stability_examples() {
    let mut c = Checker::default();
    let seq = |s: &str| parse_sequent(s).unwrap();
    assert!(c.stability(&seq("⟹ p → p")).is_valid());
    assert!(!c.stability(&seq("⟹ ⊔x¬p(x) ∨ ∀x p(x)")).is_valid());
    assert!(c.stability(&seq("∀x(cube(x)=(x×x)×x), t=s×s, r=t×s ⟹ r=cube(s)")).is_valid());
}

#[test]
fn stability_sweep_has_no_false_valid() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checker = Checker::default();
    let mut falsified = 0;
    while falsified < 200 {
        let x = random_sequent(&mut rng, 3);
        if falsified_small(&x).is_some() {
            falsified += 1;
            assert!(!checker.stability(&x).is_valid(), "claimed valid: {x}");
        }
    }
}

#[test]
fn oracle_agrees_with_library_elementarization() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let f = random_formula(&mut rng, 4);
        assert_eq!(oracle_elementarize(&f), f.elementarize());
        assert!(f.elementarize().is_elementary());
    }
    assert_eq!(
        parse_formula("⊔x¬p(x) ∨ ∀x p(x)").unwrap().elementarize(),
        parse_formula("⊥ ∨ ∀x p(x)").unwrap()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn search_results_check(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Sequent = random_sequent(&mut rng, 2);
        let budget = Budget { depth: 5, ..Budget::default() };
        if let Some(p) = search(&x, &budget) {
            let r = check_proof(&p);
            prop_assert!(r.ok, "{:?}", r.first_failure);
            prop_assert_eq!(p.conclusion(), Some(&x));
        }
    }

    #[test]
    fn stability_is_sound(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_sequent(&mut rng, 3);
        if falsified_small(&x).is_some() {
            prop_assert!(!Checker::default().stability(&x).is_valid());
        }
    }

    #[test]
    fn accepted_wait_premises_use_fresh_variables(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_sequent(&mut rng, 2);
        if let Some(p) = search(&x, &Budget { depth: 5, ..Budget::default() }) {
            for l in &p.lines {
                if l.rule != Rule::Wait {
                    continue;
                }
                for &n in &l.premises {
                    let prem = &p.line(n).unwrap().sequent;
                    for v in prem.free_vars().difference(&l.sequent.free_vars()) {
                        prop_assert!(!l.sequent.all_vars().contains(v), "{} reuses {}", prem, v);
                    }
                }
            }
        }
    }
}

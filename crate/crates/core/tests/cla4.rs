mod common;

use clarith::cla4::*;
use clarith::syntax::{parse_formula, Formula};
use common::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn line(label: &str, s: &str, just: Justification) -> Cla4Line {
    Cla4Line { label: label.into(), sentence: f(s), just }
}

#[test]
fn corpus_is_extraction_ready() {
    // the three PA facts of 11.4 are universal, so they are trusted
    for (name, pa) in [("example_11_2.cla4", 0), ("example_11_4.cla4", 3)] {
        let r = check_cla4(&cla4_corpus(name), &Cla4Options::default());
        assert!(r.ok, "{name}: {:?}", r.lines);
        assert!(r.extraction_ready, "{name}: {:?}", r.offending);
        assert_eq!(r.pa_trusted, pa);
        assert_eq!(r.trusted_stability, 0);
    }
}

#[test]
fn summary_line() {
    let r = check_cla4(&cla4_corpus("example_11_2.cla4"), &Cla4Options::default());
    assert_eq!(r.summary(), "ok: 3 lines, 0 PA-trusted, 0 trusted stability, extraction-ready: yes");
}

#[test]
fn axioms_are_recognized() {
    for k in 1..=9 {
        if let Some(a) = axiom_formula(k) {
            assert_eq!(is_axiom(&a), Some(AxiomMatch::Axiom(k)), "axiom {k}");
        }
    }
    assert_eq!(is_axiom(&f("⊓x⊔y(y=x′)")), Some(AxiomMatch::Axiom(8)));
    assert_eq!(is_axiom(&f("⊓x⊔y(y=x0)")), Some(AxiomMatch::Axiom(9)));
    assert_eq!(is_axiom(&f("⊓x⊔y(y=x1)")), None);
}

#[test]
fn wrong_axiom_number_is_reported() {
    let p = Cla4Proof { lines: vec![line("I", "⊓x⊔y(y=x′)", Justification::Axiom(9))] };
    let r = check_cla4(&p, &Cla4Options::default());
    assert!(!r.ok);
    assert!(r.lines[0].result.as_ref().unwrap_err().contains("Axiom 8"));
}

#[test]
fn pa_lines_must_be_elementary_and_true() {
    let pa = || Justification::Pa("t".into());
    let bad = Cla4Proof { lines: vec![line("I", "0=0 ⊔ 0≠0", pa())] };
    assert!(!check_cla4(&bad, &Cla4Options::default()).ok);
    let false_ = Cla4Proof { lines: vec![line("I", "1=0", pa())] };
    assert!(!check_cla4(&false_, &Cla4Options::default()).ok);
    let open = Cla4Proof { lines: vec![line("I", "∀x(x+0=x)", pa())] };
    let r = check_cla4(&open, &Cla4Options::default());
    assert!(r.ok);
    assert_eq!(r.pa_trusted, 1);
    let strict = Cla4Options { allow_pa: false, ..Cla4Options::default() };
    assert!(!check_cla4(&open, &strict).ok);
}

#[test]
fn induction_needs_the_right_premises() {
    let mut p = cla4_corpus("example_11_4.cla4");
    let Justification::Induction { left, right, .. } = &mut p.lines.last_mut().unwrap().just else { panic!() };
    std::mem::swap(left, right);
    assert!(!check_cla4(&p, &Cla4Options::default()).ok);

    // changing the basis premise from x=0⊔x≠0 to a different formula
    let mut p = cla4_corpus("example_11_4.cla4");
    p.lines[0].sentence = f("0=0 ⊔ 0=0");
    p.lines[0].just = Justification::Lc { premises: vec![], proof: None };
    assert!(!check_cla4(&p, &Cla4Options::default()).ok);
}

#[test]
fn induction_without_a_sizebound_is_rejected() {
    // ⊔ under the induction variable with no bound on the witness
    let basis = line("I", "⊔y(y=0)", Justification::Lc { premises: vec![], proof: None });
    let left = line("II", "⊓x(⊔y(y=x) → ⊔y(y=x0))", Justification::Lc { premises: vec![], proof: None });
    let right = line("III", "⊓x(⊔y(y=x) → ⊔y(y=x1))", Justification::Lc { premises: vec![], proof: None });
    let ind = line(
        "IV",
        "⊓x⊔y(y=x)",
        Justification::Induction { var: "x".into(), basis: "I".into(), left: "II".into(), right: "III".into() },
    );
    let p = Cla4Proof { lines: vec![basis, left, right, ind] };
    let r = check_cla4(&p, &Cla4Options::default());
    let err = r.lines[3].result.as_ref().unwrap_err();
    assert!(err.contains("polynomially bounded"), "{err}");
}

#[test]
fn lc_premise_order_may_change() {
    let mut p = cla4_corpus("example_11_2.cla4");
    let Justification::Lc { premises, .. } = &mut p.lines[2].just else { panic!() };
    premises.reverse();
    // the attached proof's antecedents no longer line up
    let with_proof = check_cla4(&p, &Cla4Options::default());
    let Justification::Lc { proof, .. } = &mut p.lines[2].just else { panic!() };
    *proof = None;
    let searched = check_cla4(&p, &Cla4Options::default());
    assert!(with_proof.ok || searched.ok);
    assert!(searched.ok, "{:?}", searched.lines[2].result);
    assert_eq!(searched.lines[2].result, Ok(LineStatus::Lc { trusted_stability: 0, searched: true }));
}

#[test]
fn mutants_are_rejected() {
    let mut rng = ChaCha8Rng::seed_from_u64(114);
    for name in ["example_11_2.cla4", "example_11_4.cla4"] {
        let p = cla4_corpus(name);
        let concl = p.conclusion().unwrap().sentence.clone();
        for _ in 0..120 {
            let m = mutate_cla4(&p, &mut rng);
            let r = check_cla4(&m, &Cla4Options::default());
            assert!(!r.ok || m.conclusion().map(|l| &l.sentence) != Some(&concl), "{name}: accepted:\n{}", m.to_text());
        }
    }
}

#[test]
fn text_round_trip() {
    for name in ["example_11_2.cla4", "example_11_4.cla4"] {
        let p = cla4_corpus(name);
        assert_eq!(parse_cla4(&p.to_text(), None).unwrap(), p);
    }
}

#[test]
fn dropping_a_line_only_removes_trust() {
    // auditing a prefix never reports more failures than the whole proof
    let p = cla4_corpus("example_11_4.cla4");
    for k in 1..=p.lines.len() {
        let pre = Cla4Proof { lines: p.lines[..k].to_vec() };
        assert!(check_cla4(&pre, &Cla4Options::default()).ok, "prefix {k}");
    }
}

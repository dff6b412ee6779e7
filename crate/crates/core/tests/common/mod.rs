//! Shared oracles and generators for the integration tests.
#![allow(dead_code)]

use clarith::cl12::{parse_proof, Proof, Rule};
use clarith::cla4::{parse_cla4, Cla4Proof, Justification};
use clarith::syntax::parse::hygiene;
use clarith::syntax::{Atom, BinOp, Formula, Loc, QuantOp, Sequent, Side, Term};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;
use std::path::PathBuf;

pub fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

pub fn cl12_corpus(name: &str) -> Proof {
    let p = corpus(name);
    parse_proof(&std::fs::read_to_string(&p).unwrap(), p.parent()).unwrap()
}

pub fn cla4_corpus(name: &str) -> Cla4Proof {
    let p = corpus(name);
    parse_cla4(&std::fs::read_to_string(&p).unwrap(), p.parent()).unwrap()
}

/// The CL12 proofs of the corpus: Example 8.1 and every attached
/// justification.
pub fn all_cl12_proofs() -> Vec<(String, Proof)> {
    let mut out = vec![("example 8.1".to_string(), cl12_corpus("example_8_1.cl12"))];
    for f in ["example_11_2.cla4", "example_11_4.cla4"] {
        for l in cla4_corpus(f).lines {
            if let Justification::Lc { proof: Some(p), .. } = l.just {
                out.push((format!("{f} line {}", l.label), p));
            }
        }
    }
    out
}

// ---- mutations -------------------------------------------------------------

fn other_term(t: &Term, rng: &mut impl Rng) -> Term {
    let pool = ["s", "t", "r", "x", "y", "z", "u"];
    loop {
        let c = match rng.gen_range(0..3) {
            0 => Term::var(pool.choose(rng).unwrap()),
            1 => Term::succ(t.clone()),
            _ => Term::num(rng.gen_range(0..4)),
        };
        if &c != t {
            return c;
        }
    }
}

fn other_loc(l: &Loc, nant: usize, rng: &mut impl Rng) -> Loc {
    loop {
        let mut m = l.clone();
        match rng.gen_range(0..3) {
            0 => m.side = if rng.gen_bool(0.5) || nant == 0 { Side::Succ } else { Side::Ant(rng.gen_range(0..nant)) },
            1 => m.path.push(rng.gen_range(0..2)),
            _ => {
                if m.path.pop().is_none() {
                    m.path.push(1);
                }
            }
        }
        if &m != l {
            return m;
        }
    }
}

fn other_rule(r: &Rule, nant: usize, rng: &mut impl Rng) -> Rule {
    let loc = match r {
        Rule::OrChoose(l, _) | Rule::AndChoose(l, _) | Rule::ExistsChoose(l, _) | Rule::AllChoose(l, _) => l.clone(),
        _ => Loc { side: Side::Succ, path: Vec::new() },
    };
    loop {
        let c = match rng.gen_range(0..6) {
            0 => Rule::OrChoose(loc.clone(), rng.gen_range(0..2)),
            1 => Rule::AndChoose(loc.clone(), rng.gen_range(0..2)),
            2 => Rule::ExistsChoose(loc.clone(), Term::var("s")),
            3 => Rule::AllChoose(loc.clone(), Term::var("s")),
            4 => Rule::Replicate(rng.gen_range(0..nant.max(1))),
            _ => Rule::Wait,
        };
        if std::mem::discriminant(&c) != std::mem::discriminant(r) {
            return c;
        }
    }
}

/// One random edit of a rule id, an occurrence path, a rule parameter or a
/// premise reference.
pub fn mutate_cl12(p: &Proof, rng: &mut impl Rng) -> Proof {
    loop {
        let mut m = p.clone();
        let k = rng.gen_range(0..m.lines.len());
        let nant = m.lines[k].sequent.ant.len();
        let nlines = m.lines.len();
        let line = &mut m.lines[k];
        match rng.gen_range(0..4) {
            0 => line.rule = other_rule(&line.rule, nant, rng),
            1 => match &mut line.rule {
                Rule::OrChoose(l, _) | Rule::AndChoose(l, _) | Rule::ExistsChoose(l, _) | Rule::AllChoose(l, _) => {
                    *l = other_loc(l, nant, rng)
                }
                _ => continue,
            },
            2 => match &mut line.rule {
                Rule::OrChoose(_, i) | Rule::AndChoose(_, i) => *i = 1 - *i,
                Rule::ExistsChoose(_, t) | Rule::AllChoose(_, t) => *t = other_term(t, rng),
                Rule::Replicate(i) => *i = (*i + 1 + rng.gen_range(0..nant.max(1))) % (nant + 1),
                Rule::Wait => continue,
            },
            _ => match rng.gen_range(0..3) {
                0 if !line.premises.is_empty() => {
                    let i = rng.gen_range(0..line.premises.len());
                    line.premises.remove(i);
                }
                1 if !line.premises.is_empty() => {
                    let i = rng.gen_range(0..line.premises.len());
                    line.premises[i] = rng.gen_range(1..=nlines);
                }
                _ => line.premises.push(rng.gen_range(1..=nlines)),
            },
        }
        if m != *p && !same_target(&p.lines[k], &m.lines[k]) {
            return m;
        }
    }
}

fn loc_of(r: &Rule) -> Option<&Loc> {
    match r {
        Rule::OrChoose(l, _) | Rule::AndChoose(l, _) | Rule::ExistsChoose(l, _) | Rule::AllChoose(l, _) => Some(l),
        _ => None,
    }
}

// moving a choice to an identical antecedent is no edit at all
fn same_target(a: &clarith::cl12::Line, b: &clarith::cl12::Line) -> bool {
    let (Some(la), Some(lb)) = (loc_of(&a.rule), loc_of(&b.rule)) else { return false };
    let side = |l: &Loc| match l.side {
        Side::Ant(i) => a.sequent.ant.get(i),
        Side::Succ => Some(&a.sequent.succ),
    };
    let mut ra = a.rule.clone();
    if let Some(l) = match &mut ra {
        Rule::OrChoose(l, _) | Rule::AndChoose(l, _) | Rule::ExistsChoose(l, _) | Rule::AllChoose(l, _) => Some(l),
        _ => None,
    } {
        l.side = lb.side.clone();
    }
    la.side != lb.side && ra == b.rule && a.premises == b.premises && side(la).is_some() && side(la) == side(lb)
}

/// One random edit of a CLA4 justification, or of an attached CL12 proof.
pub fn mutate_cla4(p: &Cla4Proof, rng: &mut impl Rng) -> Cla4Proof {
    let labels: Vec<String> = p.lines.iter().map(|l| l.label.clone()).collect();
    loop {
        let mut m = p.clone();
        let k = rng.gen_range(0..m.lines.len());
        let pick = |rng: &mut _| labels.choose(rng).unwrap().clone();
        match &mut m.lines[k].just {
            Justification::Axiom(a) => *a = (*a + rng.gen_range(0..8)) % 9 + 1,
            Justification::Pa(_) => m.lines[k].just = Justification::Axiom(rng.gen_range(1..=9)),
            Justification::Lc { premises, proof } => match rng.gen_range(0..3) {
                0 if proof.is_some() => *proof = Some(mutate_cl12(proof.as_ref().unwrap(), rng)),
                1 if !premises.is_empty() => {
                    let i = rng.gen_range(0..premises.len());
                    premises[i] = pick(rng);
                }
                _ => {
                    if premises.is_empty() || rng.gen_bool(0.5) {
                        premises.push(pick(rng));
                    } else {
                        premises.pop();
                    }
                }
            },
            Justification::Induction { var, basis, left, right } => match rng.gen_range(0..4) {
                0 => *basis = pick(rng),
                1 => *left = pick(rng),
                2 => *right = pick(rng),
                _ => *var = if var == "x" { "y".into() } else { "x".into() },
            },
        }
        if m != *p {
            return m;
        }
    }
}

// ---- random sequents and the model oracle ----------------------------------

const VARS: [&str; 3] = ["x", "y", "z"];

fn random_atom(rng: &mut impl Rng) -> Formula {
    let v = |rng: &mut _| Term::var(VARS.choose(rng).unwrap());
    let f = match rng.gen_range(0..4) {
        0 => Formula::pred("p", vec![]),
        1 => Formula::pred("q", vec![]),
        2 => Formula::pred("r", vec![v(rng)]),
        _ => Formula::eq(v(rng), v(rng)),
    };
    if rng.gen_bool(0.3) {
        f.neg()
    } else {
        f
    }
}

pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth == 0 || rng.gen_bool(0.3) {
        return random_atom(rng);
    }
    let v = VARS.choose(rng).unwrap();
    match rng.gen_range(0..8) {
        0 => Formula::and(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        1 => Formula::or(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        2 => Formula::meet(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        3 => Formula::join(random_formula(rng, depth - 1), random_formula(rng, depth - 1)),
        4 => Formula::quant(QuantOp::All, v, random_formula(rng, depth - 1)),
        5 => Formula::quant(QuantOp::Ex, v, random_formula(rng, depth - 1)),
        6 => Formula::quant(QuantOp::Meet, v, random_formula(rng, depth - 1)),
        _ => Formula::quant(QuantOp::Join, v, random_formula(rng, depth - 1)),
    }
}

pub fn random_sequent(rng: &mut impl Rng, depth: usize) -> Sequent {
    let n = rng.gen_range(0..=2);
    let ant = (0..n).map(|_| random_formula(rng, depth)).collect();
    hygiene(Sequent::new(ant, random_formula(rng, depth)))
}

/// Elementarization written out independently of the library.
pub fn oracle_elementarize(f: &Formula) -> Formula {
    match f {
        Formula::Bin(BinOp::Meet, ..) | Formula::Quant(QuantOp::Meet, ..) => Formula::True,
        Formula::Bin(BinOp::Join, ..) | Formula::Quant(QuantOp::Join, ..) => Formula::False,
        Formula::Bin(op, a, b) => Formula::Bin(*op, Box::new(oracle_elementarize(a)), Box::new(oracle_elementarize(b))),
        Formula::Quant(op, v, b) => Formula::Quant(*op, v.clone(), Box::new(oracle_elementarize(b))),
        f => f.clone(),
    }
}

/// A model over `{0, …, n-1}`: truth of `p`, `q` and the extension of `r`.
#[derive(Clone, Copy, Debug)]
pub struct SmallModel {
    pub n: u8,
    pub p: bool,
    pub q: bool,
    pub r: u8,
}

fn holds(f: &Formula, m: &SmallModel, env: &mut Vec<(String, u8)>) -> bool {
    let val = |t: &Term, env: &Vec<(String, u8)>| match t {
        Term::Var(v) => env.iter().rev().find(|(n, _)| n == v).map(|(_, d)| *d).expect("closed"),
        _ => panic!("oracle models only variables"),
    };
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Lit(pos, a) => {
            let t = match a {
                Atom::Pred(name, args) => match name.as_str() {
                    "p" => m.p,
                    "q" => m.q,
                    "r" => m.r >> val(&args[0], env) & 1 == 1,
                    other => panic!("unexpected letter {other}"),
                },
                Atom::Eq(a, b) => val(a, env) == val(b, env),
                _ => panic!("oracle handles = and letters only"),
            };
            t == *pos
        }
        Formula::Bin(BinOp::And, a, b) => holds(a, m, env) && holds(b, m, env),
        Formula::Bin(BinOp::Or, a, b) => holds(a, m, env) || holds(b, m, env),
        Formula::Quant(op @ (QuantOp::All | QuantOp::Ex), v, b) => {
            let mut any = false;
            let mut all = true;
            for d in 0..m.n {
                env.push((v.clone(), d));
                let t = holds(b, m, env);
                env.pop();
                any |= t;
                all &= t;
            }
            if *op == QuantOp::All {
                all
            } else {
                any
            }
        }
        _ => panic!("choice operator in an elementary formula"),
    }
}

/// A falsifying model of size at most 3 for the universal closure of the
/// elementarization of `x`, by exhaustive enumeration.
pub fn falsified_small(x: &Sequent) -> Option<SmallModel> {
    let mut f = oracle_elementarize(&x.succ);
    if !x.ant.is_empty() {
        let ant = x.ant.iter().map(oracle_elementarize).reduce(Formula::and).unwrap();
        f = Formula::or(ant.neg(), f);
    }
    let free: Vec<String> = x.free_vars().into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let closed = free.iter().rev().fold(f, |acc, v| Formula::quant(QuantOp::All, v, acc));
    for n in 1..=3u8 {
        for p in [false, true] {
            for q in [false, true] {
                for r in 0..(1u8 << n) {
                    let m = SmallModel { n, p, q, r };
                    if !holds(&closed, &m, &mut Vec::new()) {
                        return Some(m);
                    }
                }
            }
        }
    }
    None
}

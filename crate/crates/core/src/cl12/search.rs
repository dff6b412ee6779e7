//! Bounded proof search. Sound (results pass the checker) and deliberately
//! incomplete: depth, Replicate copies and numeral choices are capped.

use super::check::{choose_premise, default_fresh_premise, replicate_premise, wait_requirements, Checker, WaitReq};
use super::proof::{Evidence, Line, Proof, Rule};
use super::prover::Validity;
use crate::syntax::{fresh_var, seq_surface, BinOp, Formula, QuantOp, Sequent, Side, Term};
use std::collections::{BTreeSet, HashMap};

#[derive(Clone, Debug)]
pub struct Budget {
    pub depth: usize,
    /// extra copies of any single antecedent
    pub replicate_cap: usize,
    /// numerals `0..=numeral_cap` are tried as chosen constants
    pub numeral_cap: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { depth: 8, replicate_cap: 1, numeral_cap: 0 }
    }
}

#[derive(Clone, Debug)]
struct Deriv {
    seq: Sequent,
    rule: Rule,
    premises: Vec<Deriv>,
}

struct Searcher<'a> {
    budget: &'a Budget,
    checker: Checker,
    failed: HashMap<String, usize>,
    /// antecedent keys of the root, for counting Replicate copies
    base_counts: HashMap<String, usize>,
}

fn ant_counts(s: &Sequent) -> HashMap<String, usize> {
    let mut m = HashMap::new();
    for a in &s.ant {
        *m.entry(a.alpha_key()).or_insert(0) += 1;
    }
    m
}

impl Searcher<'_> {
    fn go(&mut self, x: &Sequent, depth: usize) -> Option<Deriv> {
        if depth == 0 {
            return None;
        }
        let key = x.key();
        if let Some(&d) = self.failed.get(&key) {
            if d >= depth {
                return None;
            }
        }
        let r = self.attempt(x, depth);
        if r.is_none() {
            self.failed.insert(key, depth);
        }
        r
    }

    fn attempt(&mut self, x: &Sequent, depth: usize) -> Option<Deriv> {
        if let Some(d) = self.try_wait(x, depth) {
            return Some(d);
        }
        for rule in self.choose_rules(x) {
            if let Ok(p) = choose_premise(x, &rule) {
                if let Some(d) = self.go(&p, depth - 1) {
                    return Some(Deriv { seq: x.clone(), rule, premises: vec![d] });
                }
            }
        }
        let counts = ant_counts(x);
        for (k, a) in x.ant.iter().enumerate() {
            if a.is_elementary() || x.ant[..k].iter().any(|b| b.alpha_eq(a)) {
                continue;
            }
            let key = a.alpha_key();
            let base = self.base_counts.get(&key).copied().unwrap_or(1);
            if counts[&key] >= base + self.budget.replicate_cap {
                continue;
            }
            let p = replicate_premise(x, k).ok()?;
            if let Some(d) = self.go(&p, depth - 1) {
                return Some(Deriv { seq: x.clone(), rule: Rule::Replicate(k), premises: vec![d] });
            }
        }
        None
    }

    fn try_wait(&mut self, x: &Sequent, depth: usize) -> Option<Deriv> {
        if !matches!(self.checker.stability(x), Validity::Valid(_)) {
            return None;
        }
        let mut premises = Vec::new();
        for req in wait_requirements(x) {
            match req {
                WaitReq::Both { premises: ps, .. } => {
                    for p in ps {
                        premises.push(self.go(&p, depth - 1)?);
                    }
                }
                WaitReq::Fresh { loc, var, body } => {
                    let (_, p) = default_fresh_premise(x, &loc, &var, &body);
                    premises.push(self.go(&p, depth - 1)?);
                }
            }
        }
        Some(Deriv { seq: x.clone(), rule: Rule::Wait, premises })
    }

    fn choose_rules(&self, x: &Sequent) -> Vec<Rule> {
        let mut terms: Vec<Term> = Vec::new();
        let free = x.free_vars();
        for v in &free {
            terms.push(Term::var(v));
        }
        let consts: BTreeSet<_> = x.constants();
        for c in consts {
            terms.push(Term::Num(c));
        }
        for v in 0..=self.budget.numeral_cap {
            let t = Term::num(v);
            if !terms.contains(&t) {
                terms.push(t);
            }
        }
        let fresh = fresh_var("v", &x.all_vars());
        terms.push(Term::var(&fresh));

        let mut out = Vec::new();
        for (loc, f) in seq_surface(x) {
            let succ = loc.side == Side::Succ;
            match f {
                Formula::Bin(BinOp::Join, ..) if succ => {
                    out.push(Rule::OrChoose(loc.clone(), 0));
                    out.push(Rule::OrChoose(loc, 1));
                }
                Formula::Bin(BinOp::Meet, ..) if !succ => {
                    out.push(Rule::AndChoose(loc.clone(), 0));
                    out.push(Rule::AndChoose(loc, 1));
                }
                Formula::Quant(QuantOp::Join, ..) if succ => {
                    out.extend(terms.iter().map(|t| Rule::ExistsChoose(loc.clone(), t.clone())));
                }
                Formula::Quant(QuantOp::Meet, ..) if !succ => {
                    out.extend(terms.iter().map(|t| Rule::AllChoose(loc.clone(), t.clone())));
                }
                _ => {}
            }
        }
        out
    }
}

fn linearize(d: &Deriv, lines: &mut Vec<Line>, index: &mut HashMap<String, usize>) -> usize {
    let key = d.seq.key();
    if let Some(&n) = index.get(&key) {
        return n;
    }
    let mut premises: Vec<usize> = Vec::new();
    for p in &d.premises {
        // one line may answer several Wait conditions; cite it once
        let k = linearize(p, lines, index);
        if !premises.contains(&k) {
            premises.push(k);
        }
    }
    let n = lines.len() + 1;
    lines.push(Line { n, sequent: d.seq.clone(), rule: d.rule.clone(), premises, evidence: Evidence::Builtin });
    index.insert(key, n);
    n
}

pub fn search(x: &Sequent, budget: &Budget) -> Option<Proof> {
    let mut s = Searcher {
        budget,
        checker: Checker::default(),
        failed: HashMap::new(),
        base_counts: ant_counts(x),
    };
    let d = s.go(x, budget.depth)?;
    let mut lines = Vec::new();
    linearize(&d, &mut lines, &mut HashMap::new());
    Some(Proof { lines })
}

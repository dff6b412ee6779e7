//! Rule checking for CL12 proofs.

use super::proof::{Evidence, Line, Proof, Rule};
use super::prover::{self, Validity};
use crate::syntax::{
    fresh_var, seq_get, seq_replace, seq_surface, BinOp, Formula, Loc, QuantOp, Sequent, Side, Term,
};
use std::collections::HashMap;

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub budget: usize,
    pub allow_trusted: bool,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions { budget: prover::DEFAULT_BUDGET, allow_trusted: true }
    }
}

/// A structural obligation of Wait for one surface choice occurrence.
#[derive(Clone, Debug)]
pub enum WaitReq {
    /// ⊓ in the succedent or ⊔ in an antecedent: both components needed.
    Both { loc: Loc, premises: [Sequent; 2] },
    /// ⊓x in the succedent or ⊔x in an antecedent: `H(y)` for a fresh `y`.
    Fresh { loc: Loc, var: String, body: Formula },
}

impl WaitReq {
    pub fn loc(&self) -> &Loc {
        match self {
            WaitReq::Both { loc, .. } | WaitReq::Fresh { loc, .. } => loc,
        }
    }

    pub fn condition_name(&self) -> &'static str {
        match self {
            WaitReq::Both { loc, .. } if loc.side == Side::Succ => "⊓-Condition",
            WaitReq::Both { .. } => "⊔-Condition",
            WaitReq::Fresh { loc, .. } if loc.side == Side::Succ => "⊓x-Condition",
            WaitReq::Fresh { .. } => "⊔x-Condition",
        }
    }
}

pub fn wait_requirements(x: &Sequent) -> Vec<WaitReq> {
    let mut out = Vec::new();
    for (loc, f) in seq_surface(x) {
        let in_succ = loc.side == Side::Succ;
        match f {
            Formula::Bin(op, a, b) if (*op == BinOp::Meet && in_succ) || (*op == BinOp::Join && !in_succ) => {
                let p0 = seq_replace(x, &loc, (**a).clone()).expect("surface path");
                let p1 = seq_replace(x, &loc, (**b).clone()).expect("surface path");
                out.push(WaitReq::Both { loc, premises: [p0, p1] });
            }
            Formula::Quant(op, v, body)
                if (*op == QuantOp::Meet && in_succ) || (*op == QuantOp::Join && !in_succ) =>
            {
                out.push(WaitReq::Fresh { loc, var: v.clone(), body: (**body).clone() });
            }
            _ => {}
        }
    }
    out
}

/// `X[H(y)]`.
pub fn fresh_instance(x: &Sequent, loc: &Loc, var: &str, body: &Formula, y: &str) -> Option<Sequent> {
    let h = body.substitute1(var, &Term::var(y)).ok()?;
    seq_replace(x, loc, h).ok()
}

/// The premise `X[H(y)]` with a canonical fresh `y`.
pub fn default_fresh_premise(x: &Sequent, loc: &Loc, var: &str, body: &Formula) -> (String, Sequent) {
    let y = fresh_var(var, &x.all_vars());
    let p = fresh_instance(x, loc, var, body, &y).expect("fresh variable cannot be captured");
    (y, p)
}

/// If `p` is `X[H(y)]` for some `y` not occurring in `X`, returns that `y`.
pub fn match_fresh(x: &Sequent, loc: &Loc, var: &str, body: &Formula, p: &Sequent) -> Option<String> {
    let xv = x.all_vars();
    let key = p.key();
    let mut cands: Vec<String> = p.all_vars().into_iter().filter(|v| !xv.contains(v)).collect();
    cands.push(fresh_var(var, &xv));
    cands.into_iter().find(|y| fresh_instance(x, loc, var, body, y).map(|s| s.key()) == Some(key.clone()))
}

/// Sequent after a Choose step, or why it cannot be formed.
pub fn choose_premise(x: &Sequent, rule: &Rule) -> Result<Sequent, String> {
    let (loc, want_succ) = match rule {
        Rule::OrChoose(l, _) | Rule::ExistsChoose(l, _) => (l, true),
        Rule::AndChoose(l, _) | Rule::AllChoose(l, _) => (l, false),
        _ => return Err("not a Choose rule".into()),
    };
    if (loc.side == Side::Succ) != want_succ {
        return Err(format!(
            "{} applies to {}",
            rule.name(),
            if want_succ { "the succedent" } else { "an antecedent" }
        ));
    }
    let node = seq_get(x, loc)?;
    let replacement = match (rule, node) {
        (Rule::OrChoose(_, i), Formula::Bin(BinOp::Join, a, b)) | (Rule::AndChoose(_, i), Formula::Bin(BinOp::Meet, a, b)) => {
            if *i == 0 {
                (**a).clone()
            } else {
                (**b).clone()
            }
        }
        (Rule::ExistsChoose(_, t), Formula::Quant(QuantOp::Join, v, body))
        | (Rule::AllChoose(_, t), Formula::Quant(QuantOp::Meet, v, body)) => {
            match t {
                Term::Num(_) | Term::Var(_) => {}
                _ => return Err("chosen term must be a constant or a variable".into()),
            }
            body.substitute1(v, t)?
        }
        _ => return Err(format!("{} does not match the operator at {loc}", rule.name())),
    };
    let p = seq_replace(x, loc, replacement)?;
    if let Term::Var(v) = choose_term(rule).unwrap_or(&Term::zero()) {
        if p.bound_vars().contains(v) {
            return Err(format!("variable {v} has bound occurrences in the premise"));
        }
    }
    Ok(p)
}

fn choose_term(rule: &Rule) -> Option<&Term> {
    match rule {
        Rule::ExistsChoose(_, t) | Rule::AllChoose(_, t) => Some(t),
        _ => None,
    }
}

/// Premise of Replicate on antecedent `k`.
pub fn replicate_premise(x: &Sequent, k: usize) -> Result<Sequent, String> {
    let e = x.ant.get(k).ok_or_else(|| format!("no antecedent a{}", k + 1))?;
    let mut p = x.clone();
    p.ant.push(e.clone());
    Ok(p)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineOk {
    pub trusted: bool,
}

#[derive(Clone, Debug)]
pub struct LineReport {
    pub n: usize,
    pub result: Result<LineOk, String>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub ok: bool,
    pub trusted_steps: Vec<usize>,
    pub lines: Vec<LineReport>,
    pub first_failure: Option<(usize, String)>,
}

/// Checker with a cache of stability verdicts.
#[derive(Default)]
pub struct Checker {
    pub opts: CheckOptions,
    cache: HashMap<String, Validity>,
}

impl Checker {
    pub fn new(opts: CheckOptions) -> Self {
        Checker { opts, cache: HashMap::new() }
    }

    pub fn stability(&mut self, x: &Sequent) -> Validity {
        let key = x.key();
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let v = prover::decide(&x.elementarize(), self.opts.budget);
        self.cache.insert(key, v.clone());
        v
    }

    pub fn check_line(&mut self, line: &Line, earlier: &[Line]) -> Result<LineOk, String> {
        let x = &line.sequent;
        let mut prem = Vec::new();
        for &p in &line.premises {
            let l = earlier.iter().find(|l| l.n == p).ok_or_else(|| format!("premise {p} is not an earlier line"))?;
            prem.push(&l.sequent);
        }
        match &line.rule {
            Rule::Wait => self.check_wait(line, &prem),
            Rule::Replicate(k) => {
                let want = replicate_premise(x, *k)?;
                single(&prem, &want, "Replicate")?;
                Ok(LineOk { trusted: false })
            }
            rule => {
                let want = choose_premise(x, rule)?;
                single(&prem, &want, rule.name())?;
                Ok(LineOk { trusted: false })
            }
        }
    }

    fn check_wait(&mut self, line: &Line, prem: &[&Sequent]) -> Result<LineOk, String> {
        let x = &line.sequent;
        let keys: Vec<String> = prem.iter().map(|p| p.key()).collect();
        let reqs = wait_requirements(x);
        if let Some(d) = line.premises.iter().enumerate().find(|(i, n)| line.premises[..*i].contains(n)) {
            return Err(format!("Wait: premise {} cited twice", d.1));
        }
        // every cited premise must answer some condition
        for (p, k) in prem.iter().zip(&keys) {
            let used = reqs.iter().any(|req| match req {
                WaitReq::Both { premises, .. } => premises.iter().any(|q| &q.key() == k),
                WaitReq::Fresh { loc, var, body } => match_fresh(x, loc, var, body, p).is_some(),
            });
            if !used {
                return Err(format!("Wait: premise {p} answers no condition"));
            }
        }
        for req in reqs {
            match &req {
                WaitReq::Both { loc, premises } => {
                    for (i, p) in premises.iter().enumerate() {
                        if !keys.contains(&p.key()) {
                            return Err(format!("{}: missing premise for H{i} at {loc}", req.condition_name()));
                        }
                    }
                }
                WaitReq::Fresh { loc, var, body } => {
                    let found = prem.iter().any(|p| match_fresh(x, loc, var, body, p).is_some());
                    if !found {
                        return Err(format!("{}: missing premise H(y) with fresh y at {loc}", req.condition_name()));
                    }
                }
            }
        }
        let trusted = match &line.evidence {
            Evidence::Trusted(tag) => {
                if !self.opts.allow_trusted {
                    return Err(format!("Stability Condition: trusted evidence {tag:?} not allowed"));
                }
                true
            }
            Evidence::Cert(name, c) => {
                if !prover::replay(&x.elementarize(), c) {
                    return Err(format!("Stability Condition: certificate {name} does not replay"));
                }
                false
            }
            Evidence::Builtin => match self.stability(x) {
                Validity::Valid(_) => false,
                Validity::Refuted(m) => return Err(format!("Stability Condition: not stable, countermodel {m}")),
                Validity::Unknown => return Err("Stability Condition: unknown within budget".into()),
            },
        };
        Ok(LineOk { trusted })
    }

    pub fn check_proof(&mut self, proof: &Proof) -> Report {
        let mut lines = Vec::new();
        let mut trusted = Vec::new();
        let mut first = None;
        for (i, l) in proof.lines.iter().enumerate() {
            let r = if proof.lines[..i].iter().any(|e| e.n == l.n) {
                Err(format!("duplicate line number {}", l.n))
            } else {
                self.check_line(l, &proof.lines[..i])
            };
            match &r {
                Ok(ok) if ok.trusted => trusted.push(l.n),
                Err(e) if first.is_none() => first = Some((l.n, e.clone())),
                _ => {}
            }
            lines.push(LineReport { n: l.n, result: r });
        }
        Report { ok: first.is_none() && !proof.lines.is_empty(), trusted_steps: trusted, lines, first_failure: first }
    }
}

fn single(prem: &[&Sequent], want: &Sequent, rule: &str) -> Result<(), String> {
    match prem {
        [p] if p.key() == want.key() => Ok(()),
        [_] => Err(format!("{rule}: premise does not match, expected {want}")),
        _ => Err(format!("{rule}: exactly one premise expected")),
    }
}

pub fn check_proof(proof: &Proof) -> Report {
    Checker::default().check_proof(proof)
}

//! CLA4 proofs: axioms, Logical Consequence with attached CL12 proofs,
//! induction on binary successors, and PA-trusted lines.
//!
//! File format, one step per line (an LC step may carry a `{ … }` block of
//! CL12 proof lines):
//!
//! ```text
//! I. ⊓x⊔y(y=x′) ; axiom:8
//! II. ∀x(x=0 → x0=0) ; pa:tag
//! III. ⊓x⊔y(y=(x0)′) ; lc:I,II {
//! 1. … ; wait
//! }
//! VII. ⊓x(x=0 ⊔ x≠0) ; ind:x basis=I left=IV right=VI
//! ```

use crate::cl12::{self, parse_proof, search, Budget, CheckOptions, Checker, Proof};
use crate::game::{eval_standard, GameError};
use crate::syntax::{bounds, parse_formula, Formula, QuantOp, Sequent, Term};
use std::path::Path;
use thiserror::Error;

const AXIOMS: [&str; 9] = [
    "∀x(0≠x′)",
    "∀x∀y(x′=y′ → x=y)",
    "∀x(x+0=x)",
    "∀x∀y(x+y′=(x+y)′)",
    "∀x(x×0=0)",
    "∀x∀y(x×y′=(x×y)+x)",
    "",
    "⊓x⊔y(y=x′)",
    "⊓x⊔y(y=x0)",
];

pub fn axiom_formula(k: usize) -> Option<Formula> {
    AXIOMS.get(k.checked_sub(1)?).filter(|s| !s.is_empty()).map(|s| parse_formula(s).expect("axiom text"))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AxiomMatch {
    Axiom(usize),
    /// Axiom 7 with its formula `F(x)` and variable `x`
    PeanoInduction(Formula, String),
}

/// `∀(F(0) ∧ ∀x(F(x)→F(x′)) → ∀xF(x))` with `F` elementary.
fn peano_instance(s: &Formula) -> Option<(Formula, String)> {
    if !s.is_sentence() {
        return None;
    }
    let mut body = s;
    while let Formula::Quant(QuantOp::All, _, b) = body {
        if let Formula::Bin(crate::syntax::BinOp::Or, ..) = b.as_ref() {
            body = b;
            break;
        }
        body = b;
    }
    let Formula::Bin(crate::syntax::BinOp::Or, _, concl) = body else { return None };
    let Formula::Quant(QuantOp::All, x, f) = concl.as_ref() else { return None };
    if !f.is_elementary() {
        return None;
    }
    let f0 = f.substitute1(x, &Term::zero()).ok()?;
    let fs = f.substitute1(x, &Term::succ(Term::var(x))).ok()?;
    let step = Formula::quant(QuantOp::All, x, Formula::imp((**f).clone(), fs));
    let expect = Formula::imp(Formula::and(f0, step), (**concl).clone());
    expect.alpha_eq(body).then(|| ((**f).clone(), x.clone()))
}

pub fn is_axiom(s: &Formula) -> Option<AxiomMatch> {
    for k in [1, 2, 3, 4, 5, 6, 8, 9] {
        if axiom_formula(k).map(|a| a.alpha_eq(s)).unwrap_or(false) {
            return Some(AxiomMatch::Axiom(k));
        }
    }
    peano_instance(s).map(|(f, x)| AxiomMatch::PeanoInduction(f, x))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Justification {
    Axiom(usize),
    Pa(String),
    Lc { premises: Vec<String>, proof: Option<Proof> },
    Induction { var: String, basis: String, left: String, right: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cla4Line {
    pub label: String,
    pub sentence: Formula,
    pub just: Justification,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Cla4Proof {
    pub lines: Vec<Cla4Line>,
}

impl Cla4Proof {
    pub fn get(&self, label: &str) -> Option<&Cla4Line> {
        self.lines.iter().find(|l| l.label == label)
    }

    pub fn conclusion(&self) -> Option<&Cla4Line> {
        self.lines.last()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for l in &self.lines {
            s.push_str(&format!("{}. {} ; ", l.label, l.sentence));
            match &l.just {
                Justification::Axiom(k) => s.push_str(&format!("axiom:{k}\n")),
                Justification::Pa(t) => s.push_str(&format!("pa:{t}\n")),
                Justification::Lc { premises, proof } => {
                    s.push_str(&format!("lc:{}", premises.join(",")));
                    match proof {
                        Some(p) => s.push_str(&format!(" {{\n{}}}\n", p.to_text())),
                        None => s.push('\n'),
                    }
                }
                Justification::Induction { var, basis, left, right } => {
                    s.push_str(&format!("ind:{var} basis={basis} left={left} right={right}\n"))
                }
            }
        }
        s
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct Cla4FormatError {
    pub line: usize,
    pub msg: String,
}

fn parse_just(text: &str) -> Result<Justification, String> {
    let t = text.trim();
    if let Some(k) = t.strip_prefix("axiom:") {
        return k.trim().parse().map(Justification::Axiom).map_err(|_| format!("bad axiom number {k:?}"));
    }
    if let Some(tag) = t.strip_prefix("pa") {
        return Ok(Justification::Pa(tag.trim_start_matches(':').trim().to_string()));
    }
    if let Some(p) = t.strip_prefix("lc") {
        let p = p.trim_start_matches(':');
        let premises = p.split(',').map(|x| x.trim().to_string()).filter(|x| !x.is_empty()).collect();
        return Ok(Justification::Lc { premises, proof: None });
    }
    if let Some(rest) = t.strip_prefix("ind:") {
        let mut parts = rest.split_whitespace();
        let var = parts.next().ok_or("ind needs a variable")?.to_string();
        let (mut b, mut l, mut r) = (None, None, None);
        for p in parts {
            let (k, v) = p.split_once('=').ok_or_else(|| format!("bad ind field {p:?}"))?;
            match k {
                "basis" => b = Some(v.to_string()),
                "left" => l = Some(v.to_string()),
                "right" => r = Some(v.to_string()),
                _ => return Err(format!("bad ind field {p:?}")),
            }
        }
        return Ok(Justification::Induction {
            var,
            basis: b.ok_or("missing basis=")?,
            left: l.ok_or("missing left=")?,
            right: r.ok_or("missing right=")?,
        });
    }
    Err(format!("unknown justification {t:?}"))
}

pub fn parse_cla4(text: &str, base: Option<&Path>) -> Result<Cla4Proof, Cla4FormatError> {
    let mut lines = Vec::new();
    let mut it = text.lines().enumerate();
    while let Some((i, raw)) = it.next() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let err = |msg: String| Cla4FormatError { line: i + 1, msg };
        let (label, rest) = t.split_once('.').ok_or_else(|| err("expected `<label>. <formula> ; <justification>`".into()))?;
        let (formula, just) = rest.split_once(';').ok_or_else(|| err("missing justification".into()))?;
        let sentence = parse_formula(formula.trim()).map_err(|e| err(e.to_string()))?;
        let (just_text, block) = match just.split_once('{') {
            Some((j, after)) => {
                if !after.trim().is_empty() {
                    return Err(err("text after `{`".into()));
                }
                (j, true)
            }
            None => (just, false),
        };
        let mut just = parse_just(just_text).map_err(err)?;
        if block {
            let mut body = String::new();
            let start = i + 1;
            loop {
                let (_, l) = it.next().ok_or_else(|| err("unterminated `{`".into()))?;
                if l.trim() == "}" {
                    break;
                }
                body.push_str(l);
                body.push('\n');
            }
            let p = parse_proof(&body, base).map_err(|e| Cla4FormatError { line: start + e.line, msg: e.msg })?;
            match &mut just {
                Justification::Lc { proof, .. } => *proof = Some(p),
                _ => return Err(err("only lc steps take a proof block".into())),
            }
        }
        lines.push(Cla4Line { label: label.trim().to_string(), sentence, just });
    }
    Ok(Cla4Proof { lines })
}

/// `⊓`-closure, as written by the sequent that LC must prove.
pub fn lc_sequent(premises: &[&Formula], conclusion: &Formula) -> Sequent {
    Sequent::new(
        premises.iter().map(|p| p.closure(QuantOp::Meet)).collect(),
        conclusion.closure(QuantOp::Meet),
    )
}

pub fn check_lc(
    conclusion: &Formula,
    premises: &[&Formula],
    proof: Option<&Proof>,
    checker: &mut Checker,
) -> Result<LcOk, String> {
    let want = lc_sequent(premises, conclusion);
    match proof {
        Some(p) => {
            let got = p.conclusion().ok_or("empty attached proof")?;
            if got.key() != want.key() {
                return Err(format!("attached proof concludes {got}, expected {want}"));
            }
            let r = checker.check_proof(p);
            if let Some((n, e)) = r.first_failure {
                return Err(format!("attached proof line {n}: {e}"));
            }
            Ok(LcOk { proof: p.clone(), trusted: r.trusted_steps.len(), searched: false })
        }
        None => match search(&want, &Budget::default()) {
            Some(p) => Ok(LcOk { proof: p, trusted: 0, searched: true }),
            None => Err(format!("no attached proof and search found none for {want}")),
        },
    }
}

#[derive(Clone, Debug)]
pub struct LcOk {
    pub proof: Proof,
    pub trusted: usize,
    pub searched: bool,
}

fn permutations(v: &[String]) -> Vec<Vec<String>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x.clone());
            out.push(p);
        }
    }
    out
}

/// If `s` is a ⊓-closure of `g` with the prefix in some order, that order
/// as variables of `g`.
pub fn meet_closure_order(s: &Formula, g: &Formula) -> Option<Vec<String>> {
    let free: Vec<String> = g.free_vars().into_iter().collect();
    let orders = if free.len() > 5 { vec![free] } else { permutations(&free) };
    orders.into_iter().find(|order| {
        let mut f = g.clone();
        for v in order.iter().rev() {
            f = Formula::quant(QuantOp::Meet, v, f);
        }
        f.alpha_eq(s)
    })
}

pub fn is_meet_closure_of(s: &Formula, g: &Formula) -> bool {
    meet_closure_order(s, g).is_some()
}

/// Splits a ⊓-closure into its body, trying every prefix length.
fn closure_bodies<'a>(c: &'a Formula) -> Vec<(Vec<String>, &'a Formula)> {
    let mut out = Vec::new();
    let mut vars = Vec::new();
    let mut cur = c;
    out.push((vars.clone(), cur));
    while let Formula::Quant(QuantOp::Meet, v, b) = cur {
        vars.push(v.clone());
        cur = b;
        out.push((vars.clone(), cur));
    }
    out
}

pub fn check_induction(
    conclusion: &Formula,
    var: &str,
    basis: &Formula,
    left: &Formula,
    right: &Formula,
) -> Result<(), String> {
    let mut last = format!("conclusion is not a ⊓-closure over {var}");
    for (vars, f) in closure_bodies(conclusion) {
        if !vars.iter().any(|v| v == var) {
            continue;
        }
        let fv = f.free_vars();
        if fv.len() != vars.len() || !vars.iter().all(|v| fv.contains(v)) {
            continue;
        }
        let x = Term::var(var);
        let f0 = f.substitute1(var, &Term::zero()).map_err(|e| e.to_string())?;
        let f_l = f.substitute1(var, &Term::bin0(x.clone())).map_err(|e| e.to_string())?;
        let f_r = f.substitute1(var, &Term::bin1(x)).map_err(|e| e.to_string())?;
        if !is_meet_closure_of(basis, &f0) {
            last = "basis is not ⊓(F(0))".into();
            continue;
        }
        if !is_meet_closure_of(left, &Formula::imp(f.clone(), f_l)) {
            last = "left premise is not ⊓(F(x)→F(x0))".into();
            continue;
        }
        if !is_meet_closure_of(right, &Formula::imp(f.clone(), f_r)) {
            last = "right premise is not ⊓(F(x)→F(x1))".into();
            continue;
        }
        return bounds::check_polynomially_bounded(f).map_err(|path| {
            let p: Vec<String> = path.iter().map(|x| x.to_string()).collect();
            format!("F is not polynomially bounded: quantifier at path [{}]", p.join("."))
        });
    }
    Err(last)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineStatus {
    Axiom(usize),
    PeanoInduction,
    /// discharged by evaluation
    PaEvaluated,
    PaTrusted,
    Lc { trusted_stability: usize, searched: bool },
    Induction,
}

impl std::fmt::Display for LineStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LineStatus::Axiom(k) => write!(f, "axiom {k}"),
            LineStatus::PeanoInduction => write!(f, "axiom 7 instance"),
            LineStatus::PaEvaluated => write!(f, "PA, evaluated"),
            LineStatus::PaTrusted => write!(f, "PA, trusted"),
            LineStatus::Lc { trusted_stability, searched } => {
                write!(f, "LC, {}", if *searched { "proof found by search" } else { "attached proof" })?;
                if *trusted_stability > 0 {
                    write!(f, ", {trusted_stability} trusted stability")?;
                }
                Ok(())
            }
            LineStatus::Induction => write!(f, "induction"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct LineAudit {
    pub label: String,
    pub result: Result<LineStatus, String>,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub ok: bool,
    pub lines: Vec<LineAudit>,
    pub pa_trusted: usize,
    pub trusted_stability: usize,
    pub extraction_ready: bool,
    /// lines that block extraction
    pub offending: Vec<String>,
}

impl AuditReport {
    pub fn summary(&self) -> String {
        format!(
            "{}: {} lines, {} PA-trusted, {} trusted stability, extraction-ready: {}",
            if self.ok { "ok" } else { "REJECTED" },
            self.lines.len(),
            self.pa_trusted,
            self.trusted_stability,
            if self.extraction_ready { "yes" } else { "no" }
        )
    }
}

#[derive(Clone, Debug)]
pub struct Cla4Options {
    pub cl12: CheckOptions,
    pub allow_pa: bool,
}

impl Default for Cla4Options {
    fn default() -> Self {
        Cla4Options { cl12: CheckOptions::default(), allow_pa: true }
    }
}

pub fn check_line(line: &Cla4Line, earlier: &[Cla4Line], opts: &Cla4Options, checker: &mut Checker) -> Result<LineStatus, String> {
    let find = |l: &str| {
        earlier
            .iter()
            .find(|e| e.label == l)
            .map(|e| &e.sentence)
            .ok_or_else(|| format!("{l} is not an earlier line"))
    };
    let s = &line.sentence;
    match &line.just {
        Justification::Axiom(k) => match is_axiom(&s.closure(QuantOp::All)) {
            Some(AxiomMatch::Axiom(j)) if j == *k => Ok(LineStatus::Axiom(j)),
            Some(AxiomMatch::PeanoInduction(..)) if *k == 7 => Ok(LineStatus::PeanoInduction),
            Some(AxiomMatch::Axiom(j)) => Err(format!("this is Axiom {j}, not Axiom {k}")),
            Some(AxiomMatch::PeanoInduction(..)) => Err(format!("this is an Axiom 7 instance, not Axiom {k}")),
            None => Err(format!("not an instance of Axiom {k}")),
        },
        Justification::Pa(_) => {
            if !s.is_elementary() {
                return Err("PA steps must be elementary".into());
            }
            if !s.is_sentence() {
                return Err("PA steps must be sentences".into());
            }
            match eval_standard(s) {
                Ok(true) => Ok(LineStatus::PaEvaluated),
                Ok(false) => Err("false in the standard model".into()),
                Err(GameError::UndecidableFragment(_)) | Err(GameError::TooLarge(_)) if opts.allow_pa => {
                    Ok(LineStatus::PaTrusted)
                }
                Err(e) if opts.allow_pa => Err(e.to_string()),
                Err(_) => Err("PA-trusted steps are not allowed".into()),
            }
        }
        Justification::Lc { premises, proof } => {
            let ps = premises.iter().map(|p| find(p)).collect::<Result<Vec<_>, _>>()?;
            let ok = check_lc(s, &ps, proof.as_ref(), checker)?;
            Ok(LineStatus::Lc { trusted_stability: ok.trusted, searched: ok.searched })
        }
        Justification::Induction { var, basis, left, right } => {
            check_induction(&s.closure(QuantOp::Meet), var, find(basis)?, find(left)?, find(right)?)?;
            Ok(LineStatus::Induction)
        }
    }
}

pub fn check_cla4(proof: &Cla4Proof, opts: &Cla4Options) -> AuditReport {
    let mut checker = Checker::new(opts.cl12.clone());
    let mut lines = Vec::new();
    let (mut pa, mut ts) = (0, 0);
    let mut offending = Vec::new();
    for (i, l) in proof.lines.iter().enumerate() {
        let r = if proof.lines[..i].iter().any(|e| e.label == l.label) {
            Err(format!("duplicate label {}", l.label))
        } else {
            check_line(l, &proof.lines[..i], opts, &mut checker)
        };
        match &r {
            Ok(LineStatus::PaTrusted) => pa += 1,
            Ok(LineStatus::Lc { trusted_stability, .. }) if *trusted_stability > 0 => {
                ts += trusted_stability;
                offending.push(l.label.clone());
            }
            Err(_) => offending.push(l.label.clone()),
            _ => {}
        }
        lines.push(LineAudit { label: l.label.clone(), result: r });
    }
    let ok = !proof.lines.is_empty() && lines.iter().all(|l| l.result.is_ok());
    AuditReport { ok, lines, pa_trusted: pa, trusted_stability: ts, extraction_ready: ok && offending.is_empty(), offending }
}

/// Re-exported for callers that only need the CL12 side.
pub use cl12::check::check_proof as check_cl12;

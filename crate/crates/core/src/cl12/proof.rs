//! CL12 proof objects and their text format.
//!
//! ```text
//! n. <sequent> ; <rule> ; premises=i,j ; evidence=builtin|cert:<file>|trusted:<tag>
//! ```
//! Rules: `wait`, `replicate:<k>` (antecedent counted from 1),
//! `or-choose:<loc>:<i>`, `and-choose:<loc>:<i>`, `exists-choose:<loc>:<term>`,
//! `all-choose:<loc>:<term>`. The `premises` and `evidence` fields may be
//! omitted. Blank lines and lines starting with `#` are ignored.

use super::prover::Certificate;
use crate::syntax::{parse_sequent, parse_term, print::term_to_string, Loc, Sequent, Term};
use std::fmt;
use std::path::Path;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rule {
    /// ⊔-Choose: component `i` of a ⊔ in the succedent
    OrChoose(Loc, usize),
    /// ⊓-Choose: component `i` of a ⊓ in an antecedent
    AndChoose(Loc, usize),
    /// ⊔x-Choose in the succedent
    ExistsChoose(Loc, Term),
    /// ⊓x-Choose in an antecedent
    AllChoose(Loc, Term),
    /// duplicates antecedent `k` (0-based)
    Replicate(usize),
    Wait,
}

impl Rule {
    pub fn name(&self) -> &'static str {
        match self {
            Rule::OrChoose(..) => "⊔-Choose",
            Rule::AndChoose(..) => "⊓-Choose",
            Rule::ExistsChoose(..) => "⊔x-Choose",
            Rule::AllChoose(..) => "⊓x-Choose",
            Rule::Replicate(_) => "Replicate",
            Rule::Wait => "Wait",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rule::OrChoose(l, i) => write!(f, "or-choose:{l}:{i}"),
            Rule::AndChoose(l, i) => write!(f, "and-choose:{l}:{i}"),
            Rule::ExistsChoose(l, t) => write!(f, "exists-choose:{l}:{}", term_to_string(t)),
            Rule::AllChoose(l, t) => write!(f, "all-choose:{l}:{}", term_to_string(t)),
            Rule::Replicate(k) => write!(f, "replicate:{}", k + 1),
            Rule::Wait => write!(f, "wait"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Evidence {
    Builtin,
    /// file name as written, and its parsed content
    Cert(String, Certificate),
    Trusted(String),
}

impl fmt::Display for Evidence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Evidence::Builtin => write!(f, "builtin"),
            Evidence::Cert(name, _) => write!(f, "cert:{name}"),
            Evidence::Trusted(t) => write!(f, "trusted:{t}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Line {
    pub n: usize,
    pub sequent: Sequent,
    pub rule: Rule,
    /// line numbers
    pub premises: Vec<usize>,
    pub evidence: Evidence,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Proof {
    pub lines: Vec<Line>,
}

impl Proof {
    pub fn conclusion(&self) -> Option<&Sequent> {
        self.lines.last().map(|l| &l.sequent)
    }

    pub fn line(&self, n: usize) -> Option<&Line> {
        self.lines.iter().find(|l| l.n == n)
    }

    pub fn to_text(&self) -> String {
        self.lines.iter().map(|l| format!("{l}\n")).collect()
    }
}

impl fmt::Display for Line {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}. {} ; {}", self.n, self.sequent, self.rule)?;
        if !self.premises.is_empty() {
            let p: Vec<String> = self.premises.iter().map(|p| p.to_string()).collect();
            write!(f, " ; premises={}", p.join(","))?;
        }
        if self.evidence != Evidence::Builtin {
            write!(f, " ; evidence={}", self.evidence)?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct FormatError {
    pub line: usize,
    pub msg: String,
}

pub fn parse_rule(text: &str) -> Result<Rule, String> {
    let text = text.trim();
    if text == "wait" {
        return Ok(Rule::Wait);
    }
    if let Some(k) = text.strip_prefix("replicate:") {
        let k: usize = k.trim().parse().map_err(|_| format!("bad antecedent index {k:?}"))?;
        if k == 0 {
            return Err("antecedents are counted from 1".into());
        }
        return Ok(Rule::Replicate(k - 1));
    }
    let (name, rest) = text.split_once(':').ok_or_else(|| format!("unknown rule {text:?}"))?;
    let (loc, param) = rest.split_once(':').ok_or_else(|| format!("{name} needs <loc>:<param>"))?;
    let loc = Loc::parse(loc).ok_or_else(|| format!("bad location {loc:?}"))?;
    let bit = || -> Result<usize, String> {
        match param.trim() {
            "0" => Ok(0),
            "1" => Ok(1),
            p => Err(format!("choice index must be 0 or 1, got {p:?}")),
        }
    };
    let term = || parse_term(param.trim()).map_err(|e| e.to_string());
    match name {
        "or-choose" => Ok(Rule::OrChoose(loc, bit()?)),
        "and-choose" => Ok(Rule::AndChoose(loc, bit()?)),
        "exists-choose" => Ok(Rule::ExistsChoose(loc, term()?)),
        "all-choose" => Ok(Rule::AllChoose(loc, term()?)),
        _ => Err(format!("unknown rule {name:?}")),
    }
}

/// Parses one proof line; `base` resolves `cert:` file names.
pub fn parse_line(text: &str, base: Option<&Path>) -> Result<Line, String> {
    let mut fields = text.split(';');
    let head = fields.next().unwrap_or_default();
    let (num, seq) = head.split_once('.').ok_or("expected `n. <sequent>`")?;
    let n: usize = num.trim().parse().map_err(|_| format!("bad line number {num:?}"))?;
    let sequent = parse_sequent(seq.trim()).map_err(|e| e.to_string())?;
    let rule = parse_rule(fields.next().ok_or("missing rule")?)?;
    let mut premises = Vec::new();
    let mut evidence = Evidence::Builtin;
    for f in fields {
        let f = f.trim();
        if let Some(p) = f.strip_prefix("premises=") {
            for x in p.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                premises.push(x.parse().map_err(|_| format!("bad premise {x:?}"))?);
            }
        } else if let Some(e) = f.strip_prefix("evidence=") {
            evidence = parse_evidence(e.trim(), base)?;
        } else if !f.is_empty() {
            return Err(format!("unknown field {f:?}"));
        }
    }
    Ok(Line { n, sequent, rule, premises, evidence })
}

fn parse_evidence(e: &str, base: Option<&Path>) -> Result<Evidence, String> {
    if e == "builtin" {
        Ok(Evidence::Builtin)
    } else if let Some(t) = e.strip_prefix("trusted:") {
        Ok(Evidence::Trusted(t.to_string()))
    } else if let Some(file) = e.strip_prefix("cert:") {
        let path = match base {
            Some(b) => b.join(file),
            None => Path::new(file).to_path_buf(),
        };
        let text = std::fs::read_to_string(&path).map_err(|err| format!("{}: {err}", path.display()))?;
        let c = Certificate::from_text(&text).ok_or_else(|| format!("{}: malformed certificate", path.display()))?;
        Ok(Evidence::Cert(file.to_string(), c))
    } else {
        Err(format!("unknown evidence {e:?}"))
    }
}

pub fn parse_proof(text: &str, base: Option<&Path>) -> Result<Proof, FormatError> {
    let mut lines = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        lines.push(parse_line(t, base).map_err(|msg| FormatError { line: i + 1, msg })?);
    }
    Ok(Proof { lines })
}

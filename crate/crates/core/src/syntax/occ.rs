use super::ast::{Formula, Sequent};
use std::fmt;

/// Child selectors from the root of a formula. A `Bin` node has children 0 and 1,
/// a blind quantifier has child 0. Choice nodes are never descended through.
pub type OccPath = Vec<usize>;

/// Where in a sequent an occurrence lives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Succ,
    /// 0-based antecedent index
    Ant(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Loc {
    pub side: Side,
    pub path: OccPath,
}

impl Loc {
    pub fn succ(path: OccPath) -> Self {
        Loc { side: Side::Succ, path }
    }

    pub fn ant(i: usize, path: OccPath) -> Self {
        Loc { side: Side::Ant(i), path }
    }

    /// Text form: `s`, `s.1.0`, `a1`, `a2.0` (antecedents counted from 1).
    pub fn parse(text: &str) -> Option<Loc> {
        let mut parts = text.trim().split('.');
        let head = parts.next()?;
        let side = if head == "s" {
            Side::Succ
        } else if let Some(n) = head.strip_prefix('a') {
            let k: usize = n.parse().ok()?;
            if k == 0 {
                return None;
            }
            Side::Ant(k - 1)
        } else {
            return None;
        };
        let mut path = Vec::new();
        for p in parts {
            path.push(p.parse().ok()?);
        }
        Some(Loc { side, path })
    }
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            Side::Succ => write!(f, "s")?,
            Side::Ant(i) => write!(f, "a{}", i + 1)?,
        }
        for p in &self.path {
            write!(f, ".{p}")?;
        }
        Ok(())
    }
}

/// All surface occurrences (including the root), in pre-order.
pub fn surface_occurrences(f: &Formula) -> Vec<(OccPath, &Formula)> {
    let mut out = Vec::new();
    walk(f, &mut Vec::new(), &mut out);
    out
}

fn walk<'a>(f: &'a Formula, path: &mut OccPath, out: &mut Vec<(OccPath, &'a Formula)>) {
    out.push((path.clone(), f));
    match f {
        Formula::Bin(op, a, b) if !op.is_choice() => {
            path.push(0);
            walk(a, path, out);
            path.pop();
            path.push(1);
            walk(b, path, out);
            path.pop();
        }
        Formula::Quant(op, _, b) if !op.is_choice() => {
            path.push(0);
            walk(b, path, out);
            path.pop();
        }
        _ => {}
    }
}

pub fn get_at<'a>(f: &'a Formula, path: &[usize]) -> Result<&'a Formula, String> {
    let mut cur = f;
    for (depth, &sel) in path.iter().enumerate() {
        cur = match (cur, sel) {
            (Formula::Bin(op, a, b), s) if !op.is_choice() && s < 2 => {
                if s == 0 {
                    a
                } else {
                    b
                }
            }
            (Formula::Quant(op, _, b), 0) if !op.is_choice() => b,
            (Formula::Bin(op, ..), _) if op.is_choice() => {
                return Err(format!("path descends through a choice operator at depth {depth}"))
            }
            (Formula::Quant(op, ..), _) if op.is_choice() => {
                return Err(format!("path descends through a choice operator at depth {depth}"))
            }
            _ => return Err(format!("invalid selector {sel} at depth {depth}")),
        };
    }
    Ok(cur)
}

pub fn replace_at(f: &Formula, path: &[usize], h: Formula) -> Result<Formula, String> {
    if path.is_empty() {
        return Ok(h);
    }
    match (f, path[0]) {
        (Formula::Bin(op, a, b), s) if !op.is_choice() && s < 2 => {
            if s == 0 {
                Ok(Formula::bin(*op, replace_at(a, &path[1..], h)?, (**b).clone()))
            } else {
                Ok(Formula::bin(*op, (**a).clone(), replace_at(b, &path[1..], h)?))
            }
        }
        (Formula::Quant(op, v, b), 0) if !op.is_choice() => {
            Ok(Formula::Quant(*op, v.clone(), Box::new(replace_at(b, &path[1..], h)?)))
        }
        _ => Err("not a surface path".to_string()),
    }
}

pub fn seq_get<'a>(s: &'a Sequent, loc: &Loc) -> Result<&'a Formula, String> {
    match loc.side {
        Side::Succ => get_at(&s.succ, &loc.path),
        Side::Ant(i) => get_at(s.ant.get(i).ok_or_else(|| format!("no antecedent a{}", i + 1))?, &loc.path),
    }
}

pub fn seq_replace(s: &Sequent, loc: &Loc, h: Formula) -> Result<Sequent, String> {
    let mut out = s.clone();
    match loc.side {
        Side::Succ => out.succ = replace_at(&s.succ, &loc.path, h)?,
        Side::Ant(i) => {
            let f = s.ant.get(i).ok_or_else(|| format!("no antecedent a{}", i + 1))?;
            out.ant[i] = replace_at(f, &loc.path, h)?;
        }
    }
    Ok(out)
}

/// Every surface occurrence of a sequent with its location.
pub fn seq_surface(s: &Sequent) -> Vec<(Loc, &Formula)> {
    let mut out = Vec::new();
    for (i, a) in s.ant.iter().enumerate() {
        for (p, f) in surface_occurrences(a) {
            out.push((Loc::ant(i, p), f));
        }
    }
    for (p, f) in surface_occurrences(&s.succ) {
        out.push((Loc::succ(p), f));
    }
    out
}

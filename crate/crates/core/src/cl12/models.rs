//! Finite countermodel search for elementary formulas.
//!
//! Function and predicate tables start empty; evaluation stops at the first
//! missing entry and the search branches over its possible values. A result
//! reached without touching missing entries holds in every completion.

use super::prover::{flatten_atom, GLit, GTerm};
use crate::syntax::{BinOp, Formula, QuantOp};
use std::collections::HashMap;
use std::fmt::Write;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Fun(String, Vec<u8>),
    Pred(String, Vec<u8>),
}

#[derive(Default)]
struct Model {
    n: u8,
    funs: HashMap<(String, Vec<u8>), u8>,
    preds: HashMap<(String, Vec<u8>), bool>,
}

fn term(t: &GTerm, env: &[(String, u8)], m: &Model) -> Result<u8, Key> {
    match t {
        GTerm::Var(v) => Ok(env.iter().rev().find(|(n, _)| n == v).map(|(_, d)| *d).unwrap_or(0)),
        GTerm::Fn(f, args) => {
            let vals = args.iter().map(|a| term(a, env, m)).collect::<Result<Vec<_>, _>>()?;
            let k = (f.clone(), vals);
            m.funs.get(&k).copied().ok_or(Key::Fun(k.0, k.1))
        }
    }
}

fn lit(l: &GLit, env: &[(String, u8)], m: &Model) -> Result<bool, Key> {
    match l {
        GLit::Eq(a, b) => Ok(term(a, env, m)? == term(b, env, m)?),
        GLit::Pred(p, args) => {
            let vals = args.iter().map(|a| term(a, env, m)).collect::<Result<Vec<_>, _>>()?;
            let k = (p.clone(), vals);
            m.preds.get(&k).copied().ok_or(Key::Pred(k.0, k.1))
        }
    }
}

fn eval(f: &Formula, env: &mut Vec<(String, u8)>, m: &Model) -> Result<bool, Key> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Lit(p, a) => {
            let bound: Vec<String> = env.iter().map(|(n, _)| n.clone()).collect();
            let look = |v: &str| bound.iter().any(|b| b == v).then(|| GTerm::Var(v.to_string()));
            Ok(lit(&flatten_atom(a, &look), env, m)? == *p)
        }
        Formula::Bin(op, a, b) => {
            let conj = matches!(op, BinOp::And | BinOp::Meet);
            let l = eval(a, env, m)?;
            if l != conj {
                return Ok(l);
            }
            eval(b, env, m)
        }
        Formula::Quant(op, x, body) => {
            let univ = matches!(op, QuantOp::All | QuantOp::Meet);
            for d in 0..m.n {
                env.push((x.clone(), d));
                let r = eval(body, env, m);
                env.pop();
                if r? != univ {
                    return Ok(!univ);
                }
            }
            Ok(univ)
        }
    }
}

fn search(f: &Formula, m: &mut Model, nodes: &mut usize, budget: usize) -> Option<bool> {
    *nodes += 1;
    if *nodes > budget {
        return None;
    }
    match eval(f, &mut Vec::new(), m) {
        Ok(false) => Some(true),
        Ok(true) => Some(false),
        Err(Key::Fun(s, a)) => {
            for d in 0..m.n {
                m.funs.insert((s.clone(), a.clone()), d);
                match search(f, m, nodes, budget) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            m.funs.remove(&(s, a));
            Some(false)
        }
        Err(Key::Pred(s, a)) => {
            for v in [false, true] {
                m.preds.insert((s.clone(), a.clone()), v);
                match search(f, m, nodes, budget) {
                    Some(true) => return Some(true),
                    None => return None,
                    Some(false) => {}
                }
            }
            m.preds.remove(&(s, a));
            Some(false)
        }
    }
}

fn describe(m: &Model) -> String {
    let mut s = format!("domain {{0..{}}}", m.n - 1);
    let mut funs: Vec<_> = m.funs.iter().collect();
    funs.sort();
    for ((f, a), v) in funs {
        let _ = write!(s, "; {f}{a:?}={v}");
    }
    let mut preds: Vec<_> = m.preds.iter().collect();
    preds.sort();
    for ((p, a), v) in preds {
        let _ = write!(s, "; {p}{a:?}={v}");
    }
    s
}

/// A model with at most `max_size` elements falsifying `f`, described as text.
pub fn countermodel(f: &Formula, max_size: u8, budget: usize) -> Option<String> {
    let mut nodes = 0;
    for n in 1..=max_size {
        let mut m = Model { n, ..Default::default() };
        match search(f, &mut m, &mut nodes, budget) {
            Some(true) => return Some(describe(&m)),
            Some(false) => {}
            None => return None,
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn finds_and_misses() {
        assert!(countermodel(&parse_formula("⊥ ∨ ∀x p(x)").unwrap(), 4, 100_000).is_some());
        assert!(countermodel(&parse_formula("p → p").unwrap(), 4, 100_000).is_none());
        assert!(countermodel(&parse_formula("0=1").unwrap(), 4, 100_000).is_some());
        assert!(countermodel(&parse_formula("∀x∃y(y=f(x))").unwrap(), 4, 100_000).is_none());
    }
}

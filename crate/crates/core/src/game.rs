//! Game semantics of formulas: legal moves, prefixation, adjudication and the
//! elementary evaluator for the standard model of arithmetic.
//!
//! Moves: `0`/`1` at ⊓ and ⊔, a binary numeral at ⊓x and ⊔x, `i.β` to move
//! inside component `i` of ∧ and ∨. Blind quantifiers pass moves through.

use crate::syntax::numeral::{bit_at, substring};
use crate::syntax::{Atom, BinOp, Formula, Numeral, QuantOp, Term};
use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Player {
    /// ⊤, the machine
    Top,
    /// ⊥, the environment
    Bot,
}

impl Player {
    pub fn other(self) -> Player {
        match self {
            Player::Top => Player::Bot,
            Player::Bot => Player::Top,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Player::Top => "⊤",
            Player::Bot => "⊥",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LabMove {
    pub player: Player,
    pub mv: String,
}

impl LabMove {
    pub fn top(mv: &str) -> Self {
        LabMove { player: Player::Top, mv: mv.to_string() }
    }

    pub fn bot(mv: &str) -> Self {
        LabMove { player: Player::Bot, mv: mv.to_string() }
    }
}

impl fmt::Display for LabMove {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.player.symbol(), self.mv)
    }
}

pub type Run = Vec<LabMove>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("undecidable-fragment: {0}")]
    UndecidableFragment(String),
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("uninterpreted symbol {0}")]
    Uninterpreted(String),
    #[error("value too large: {0}")]
    TooLarge(String),
    #[error("bad transcript line {line}: {msg}")]
    Transcript { line: usize, msg: String },
}

type PredFn = Arc<dyn Fn(&[BigUint]) -> bool + Send + Sync>;
type FunFn = Arc<dyn Fn(&[BigUint]) -> BigUint + Send + Sync>;

/// Meaning of predicate and function letters beyond standard arithmetic, plus
/// an optional finite domain `{0,…,n−1}` for blind quantifiers.
#[derive(Clone, Default)]
pub struct Interpretation {
    preds: BTreeMap<String, PredFn>,
    funs: BTreeMap<String, FunFn>,
    pub domain: Option<u64>,
}

impl fmt::Debug for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Interpretation")
            .field("preds", &self.preds.keys().collect::<Vec<_>>())
            .field("funs", &self.funs.keys().collect::<Vec<_>>())
            .field("domain", &self.domain)
            .finish()
    }
}

impl Interpretation {
    pub fn standard() -> Self {
        Self::default()
    }

    pub fn with_pred(mut self, name: &str, f: impl Fn(&[BigUint]) -> bool + Send + Sync + 'static) -> Self {
        self.preds.insert(name.to_string(), Arc::new(f));
        self
    }

    pub fn with_fun(mut self, name: &str, f: impl Fn(&[BigUint]) -> BigUint + Send + Sync + 'static) -> Self {
        self.funs.insert(name.to_string(), Arc::new(f));
        self
    }

    /// Predicate given by the set of argument tuples where it holds.
    pub fn with_table(self, name: &str, truths: Vec<Vec<u64>>) -> Self {
        self.with_pred(name, move |args| {
            truths.iter().any(|row| {
                row.len() == args.len() && row.iter().zip(args).all(|(a, b)| BigUint::from(*a) == *b)
            })
        })
    }

    pub fn with_domain(mut self, n: u64) -> Self {
        self.domain = Some(n);
        self
    }
}

pub type Valuation = BTreeMap<String, Numeral>;

/// Blind quantifiers over a bounded range are enumerated up to this many values.
const ENUM_LIMIT: u64 = 1 << 20;
/// Exponents of `2^t` beyond this are refused.
const POW_LIMIT: u64 = 1 << 20;

pub fn eval_term(t: &Term, env: &BTreeMap<String, BigUint>, interp: &Interpretation) -> Result<BigUint, GameError> {
    Ok(match t {
        Term::Var(v) => env.get(v).cloned().ok_or_else(|| GameError::Unbound(v.clone()))?,
        Term::Num(n) => n.value().clone(),
        Term::Succ(a) => eval_term(a, env, interp)? + BigUint::one(),
        Term::Add(a, b) => eval_term(a, env, interp)? + eval_term(b, env, interp)?,
        Term::Mul(a, b) => eval_term(a, env, interp)? * eval_term(b, env, interp)?,
        Term::App(f, args) => {
            let fun = interp.funs.get(f).ok_or_else(|| GameError::Uninterpreted(f.clone()))?;
            let vals = args.iter().map(|a| eval_term(a, env, interp)).collect::<Result<Vec<_>, _>>()?;
            fun(&vals)
        }
        Term::Size(a) => BigUint::from(eval_term(a, env, interp)?.bits()),
        Term::Pow2(a) => {
            let e = eval_term(a, env, interp)?;
            match e.to_u64() {
                Some(k) if k <= POW_LIMIT => BigUint::one() << k,
                _ => return Err(GameError::TooLarge(format!("2^{e}"))),
            }
        }
        Term::Bit(a, b) => bit_at(&eval_term(a, env, interp)?, &eval_term(b, env, interp)?),
        Term::Substr(a, b, c) => substring(
            &eval_term(a, env, interp)?,
            &eval_term(b, env, interp)?,
            &eval_term(c, env, interp)?,
        ),
    })
}

fn eval_atom(a: &Atom, env: &BTreeMap<String, BigUint>, interp: &Interpretation) -> Result<bool, GameError> {
    Ok(match a {
        Atom::Eq(x, y) => eval_term(x, env, interp)? == eval_term(y, env, interp)?,
        Atom::Le(x, y) => eval_term(x, env, interp)? <= eval_term(y, env, interp)?,
        Atom::Lt(x, y) => eval_term(x, env, interp)? < eval_term(y, env, interp)?,
        Atom::Pred(p, args) => {
            let pred = interp.preds.get(p).ok_or_else(|| GameError::Uninterpreted(p.clone()))?;
            let vals = args.iter().map(|a| eval_term(a, env, interp)).collect::<Result<Vec<_>, _>>()?;
            pred(&vals)
        }
    })
}

/// Exclusive upper bound for `x` read off a guard literal that must hold for
/// the body to matter: `x≤t`, `x<t` or `|x|≤t`.
fn guard_bound(
    guard: &Formula,
    x: &str,
    env: &BTreeMap<String, BigUint>,
    interp: &Interpretation,
) -> Result<Option<BigUint>, GameError> {
    let is_x = |t: &Term| matches!(t, Term::Var(v) if v == x);
    let mentions_x = |t: &Term| {
        let mut s = Default::default();
        t.vars(&mut s);
        s.contains(x)
    };
    match guard {
        Formula::Lit(true, Atom::Le(l, r)) if is_x(l) && !mentions_x(r) => {
            Ok(Some(eval_term(r, env, interp)? + BigUint::one()))
        }
        Formula::Lit(true, Atom::Lt(l, r)) if is_x(l) && !mentions_x(r) => Ok(Some(eval_term(r, env, interp)?)),
        Formula::Lit(true, Atom::Le(Term::Size(l), r)) if is_x(l) && !mentions_x(r) => {
            let k = eval_term(r, env, interp)?;
            match k.to_u64() {
                Some(k) if k <= POW_LIMIT => Ok(Some(BigUint::one() << k)),
                _ => Err(GameError::TooLarge(format!("2^{k}"))),
            }
        }
        _ => Ok(None),
    }
}

fn eval_with(f: &Formula, env: &mut BTreeMap<String, BigUint>, interp: &Interpretation) -> Result<bool, GameError> {
    match f {
        Formula::True => Ok(true),
        Formula::False => Ok(false),
        Formula::Lit(p, a) => Ok(eval_atom(a, env, interp)? == *p),
        Formula::Bin(BinOp::And, a, b) => Ok(eval_with(a, env, interp)? && eval_with(b, env, interp)?),
        Formula::Bin(BinOp::Or, a, b) => Ok(eval_with(a, env, interp)? || eval_with(b, env, interp)?),
        Formula::Bin(..) | Formula::Quant(QuantOp::Meet | QuantOp::Join, ..) => {
            Err(GameError::UndecidableFragment("choice operator in an elementary evaluation".into()))
        }
        Formula::Quant(op, x, body) => {
            let universal = *op == QuantOp::All;
            if !body.free_vars().contains(x) {
                return eval_with(body, env, interp);
            }
            // ∀x(¬G ∨ B) and ∃x(G ∧ B) with G a guard bounding x.
            let bound = match (universal, body.as_ref()) {
                (true, Formula::Bin(BinOp::Or, g, _)) => guard_bound(&g.neg(), x, env, interp)?,
                (false, Formula::Bin(BinOp::And, g, _)) => guard_bound(g, x, env, interp)?,
                _ => None,
            };
            let limit = match (bound, interp.domain) {
                (Some(b), Some(d)) => b.min(BigUint::from(d)),
                (Some(b), None) => b,
                (None, Some(d)) => BigUint::from(d),
                (None, None) => {
                    return Err(GameError::UndecidableFragment(format!(
                        "unbounded quantifier {}{x} over ℕ",
                        op.symbol()
                    )))
                }
            };
            let n = limit
                .to_u64()
                .filter(|n| *n <= ENUM_LIMIT)
                .ok_or_else(|| GameError::TooLarge(format!("quantifier range {limit}")))?;
            let saved = env.get(x).cloned();
            let mut result = universal;
            for i in 0..n {
                env.insert(x.clone(), BigUint::from(i));
                let v = eval_with(body, env, interp);
                let v = match v {
                    Ok(v) => v,
                    Err(e) => {
                        restore(env, x, saved);
                        return Err(e);
                    }
                };
                if v != universal {
                    result = v;
                    break;
                }
            }
            restore(env, x, saved);
            Ok(result)
        }
    }
}

fn restore(env: &mut BTreeMap<String, BigUint>, x: &str, saved: Option<BigUint>) {
    match saved {
        Some(v) => env.insert(x.to_string(), v),
        None => env.remove(x),
    };
}

/// Truth of an elementary formula under the valuation.
pub fn eval_elementary(f: &Formula, valuation: &Valuation, interp: &Interpretation) -> Result<bool, GameError> {
    let mut env: BTreeMap<String, BigUint> = valuation.iter().map(|(k, v)| (k.clone(), v.value().clone())).collect();
    eval_with(f, &mut env, interp)
}

/// Convenience: truth in the standard model with no free variables.
pub fn eval_standard(f: &Formula) -> Result<bool, GameError> {
    eval_elementary(f, &Valuation::new(), &Interpretation::standard())
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub formula: Formula,
    pub valuation: Valuation,
    pub interp: Arc<Interpretation>,
}

/// What a player may do at some choice node. `prefix` leads into the node; the
/// full move is `prefix` followed by `0`/`1` or by any numeral.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveFamily {
    pub prefix: String,
    pub player: Player,
    pub numeral: bool,
}

impl MoveFamily {
    /// Concrete moves, numerals truncated to values `≤ bound`.
    pub fn instances(&self, bound: u64) -> Vec<String> {
        if self.numeral {
            (0..=bound).map(|v| format!("{}{}", self.prefix, Numeral::from_u64(v))).collect()
        } else {
            vec![format!("{}0", self.prefix), format!("{}1", self.prefix)]
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reason {
    IllegalMove { index: usize, offender: Player },
    TerminalTruth,
    TerminalStructure,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub winner: Player,
    pub reason: Reason,
}

/// Component move `i.β`.
fn split_component(mv: &str) -> Option<(usize, &str)> {
    let (i, rest) = mv.split_once('.')?;
    match i {
        "0" => Some((0, rest)),
        "1" => Some((1, rest)),
        _ => None,
    }
}


/// Result of making a move in a formula, or `None` if the move is illegal.
pub fn move_formula(f: &Formula, player: Player, mv: &str) -> Option<Formula> {
    match f {
        Formula::Bin(op @ (BinOp::Meet | BinOp::Join), a, b) => {
            let mover = if *op == BinOp::Meet { Player::Bot } else { Player::Top };
            if player != mover {
                return None;
            }
            match mv {
                "0" => Some((**a).clone()),
                "1" => Some((**b).clone()),
                _ => None,
            }
        }
        Formula::Quant(op @ (QuantOp::Meet | QuantOp::Join), x, body) => {
            let mover = if *op == QuantOp::Meet { Player::Bot } else { Player::Top };
            if player != mover {
                return None;
            }
            let c = Numeral::parse(mv)?;
            body.substitute1(x, &Term::Num(c)).ok()
        }
        Formula::Bin(op, a, b) => {
            let (i, rest) = split_component(mv)?;
            if i == 0 {
                Some(Formula::bin(*op, move_formula(a, player, rest)?, (**b).clone()))
            } else {
                Some(Formula::bin(*op, (**a).clone(), move_formula(b, player, rest)?))
            }
        }
        Formula::Quant(op, x, body) => Some(Formula::quant(*op, x, move_formula(body, player, mv)?)),
        _ => None,
    }
}

pub fn legal_move_families(f: &Formula) -> Vec<MoveFamily> {
    fn go(f: &Formula, prefix: &str, out: &mut Vec<MoveFamily>) {
        match f {
            Formula::Bin(BinOp::Meet, ..) => out.push(MoveFamily { prefix: prefix.into(), player: Player::Bot, numeral: false }),
            Formula::Bin(BinOp::Join, ..) => out.push(MoveFamily { prefix: prefix.into(), player: Player::Top, numeral: false }),
            Formula::Quant(QuantOp::Meet, ..) => out.push(MoveFamily { prefix: prefix.into(), player: Player::Bot, numeral: true }),
            Formula::Quant(QuantOp::Join, ..) => out.push(MoveFamily { prefix: prefix.into(), player: Player::Top, numeral: true }),
            Formula::Bin(_, a, b) => {
                go(a, &format!("{prefix}0."), out);
                go(b, &format!("{prefix}1."), out);
            }
            Formula::Quant(_, _, b) => go(b, prefix, out),
            _ => {}
        }
    }
    let mut out = Vec::new();
    go(f, "", &mut out);
    out
}

impl GameState {
    pub fn new(formula: Formula) -> Self {
        GameState { formula, valuation: Valuation::new(), interp: Arc::new(Interpretation::standard()) }
    }

    pub fn with_interp(formula: Formula, interp: Interpretation) -> Self {
        GameState { formula, valuation: Valuation::new(), interp: Arc::new(interp) }
    }

    pub fn legal_moves(&self) -> Vec<MoveFamily> {
        legal_move_families(&self.formula)
    }

    pub fn legal_moves_for(&self, p: Player) -> Vec<MoveFamily> {
        self.legal_moves().into_iter().filter(|m| m.player == p).collect()
    }

    pub fn is_legal(&self, m: &LabMove) -> bool {
        move_formula(&self.formula, m.player, &m.mv).is_some()
    }

    /// Prefixation by one labmove; `Err` carries the offending move.
    pub fn apply(&self, m: &LabMove) -> Result<GameState, LabMove> {
        match move_formula(&self.formula, m.player, &m.mv) {
            Some(f) => Ok(GameState { formula: f, valuation: self.valuation.clone(), interp: self.interp.clone() }),
            None => Err(m.clone()),
        }
    }

    pub fn depth(&self) -> usize {
        self.formula.choice_depth()
    }

    /// Winner of the game if play stops here.
    pub fn wn_empty(&self) -> Result<Player, GameError> {
        let e = self.formula.elementarize();
        Ok(if eval_elementary(&e, &self.valuation, &self.interp)? { Player::Top } else { Player::Bot })
    }
}

pub fn adjudicate(initial: &GameState, run: &[LabMove]) -> Result<Verdict, GameError> {
    let mut st = initial.clone();
    for (i, m) in run.iter().enumerate() {
        match st.apply(m) {
            Ok(s) => st = s,
            Err(_) => {
                return Ok(Verdict { winner: m.player.other(), reason: Reason::IllegalMove { index: i, offender: m.player } })
            }
        }
    }
    let winner = st.wn_empty()?;
    let reason = if st.formula.is_elementary() { Reason::TerminalTruth } else { Reason::TerminalStructure };
    Ok(Verdict { winner, reason })
}

/// Every legal run (each finite legal position), numerals truncated to `≤ bound`.
pub fn enumerate_legal_runs(state: &GameState, bound: u64) -> Vec<Run> {
    let mut out = Vec::new();
    fn go(f: &Formula, prefix: &mut Run, bound: u64, out: &mut Vec<Run>) {
        out.push(prefix.clone());
        for fam in legal_move_families(f) {
            for mv in fam.instances(bound) {
                if let Some(g) = move_formula(f, fam.player, &mv) {
                    prefix.push(LabMove { player: fam.player, mv });
                    go(&g, prefix, bound, out);
                    prefix.pop();
                }
            }
        }
    }
    go(&state.formula, &mut Vec::new(), bound, &mut out);
    out
}

/// Transcript text: one labmove per line, `T:` or `B:` then the move.
pub fn format_transcript(run: &[LabMove]) -> String {
    run.iter()
        .map(|m| match m.player {
            Player::Top => format!("T:{}\n", m.mv),
            Player::Bot => format!("B:{}\n", m.mv),
        })
        .collect()
}

pub fn parse_transcript(text: &str) -> Result<Run, GameError> {
    let mut run = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let (who, mv) = line
            .split_once(':')
            .ok_or_else(|| GameError::Transcript { line: i + 1, msg: "missing ':'".into() })?;
        let player = match who.trim() {
            "T" => Player::Top,
            "B" => Player::Bot,
            other => return Err(GameError::Transcript { line: i + 1, msg: format!("unknown player {other:?}") }),
        };
        run.push(LabMove { player, mv: mv.trim().to_string() });
    }
    Ok(run)
}

/// Value of a numeral move, accepting `""` as 0.
pub fn numeral_value(mv: &str) -> Option<BigUint> {
    Numeral::parse(mv).map(|n| n.into_value())
}

pub fn is_zero_move(mv: &str) -> bool {
    numeral_value(mv).map(|v| v.is_zero()).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula;

    #[test]
    fn choice_moves() {
        let s = GameState::new(parse_formula("p ⊓ q").unwrap());
        assert_eq!(s.apply(&LabMove::bot("0")).unwrap().formula, parse_formula("p").unwrap());
        assert!(s.apply(&LabMove::top("0")).is_err());
        assert!(s.legal_moves_for(Player::Top).is_empty());
    }

    #[test]
    fn binary_successor_values() {
        let f = parse_formula("(101)0 = 1010 ∧ (101)1 = 1011").unwrap();
        assert!(eval_standard(&f).unwrap());
        assert!(!eval_standard(&parse_formula("|1111| ≤ |11|′").unwrap()).unwrap());
    }

    #[test]
    fn bounded_quantifier() {
        let f = parse_formula("∀x(x≤11 → x×x ≤ 1001)").unwrap();
        assert!(eval_standard(&f).unwrap());
        let g = parse_formula("∀x(x=x)").unwrap();
        assert!(matches!(eval_standard(&g), Err(GameError::UndecidableFragment(_))));
    }

    #[test]
    fn transcript_round_trip() {
        let run = vec![LabMove::bot("101"), LabMove::top("1011")];
        let t = format_transcript(&run);
        assert_eq!(t, "B:101\nT:1011\n");
        assert_eq!(parse_transcript(&t).unwrap(), run);
    }
}

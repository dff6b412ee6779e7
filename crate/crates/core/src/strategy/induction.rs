//! Binary induction: a chain of simulated sessions joined by copycat, and the
//! clipping of unreasonable constant choices.

use super::{locate_move, move_prefix, prefix_slack, Agent, Choice, Strategy, StrategyError};
use crate::cla4::meet_closure_order;
use crate::game::{eval_elementary, GameState, LabMove, Player};
use crate::polyfun::{compose, constant_bound, iterate_bounds, sum_bounds, Builder, ExplicitPolyFn, GraphTerm};
use crate::syntax::{get_at, Atom, BinOp, Formula, Numeral, QuantOp, Term};
use num_bigint::BigUint;
use num_traits::Zero;
use std::collections::{BTreeMap, VecDeque};

/// The guard atom `|v| ≤ τ` of `⊔v(|v| ≤ τ ∧ H)`, after any substitution.
fn guard(v: &str, body: &Formula) -> Option<Formula> {
    match body {
        Formula::Bin(BinOp::And, s, _) => match s.as_ref() {
            Formula::Lit(true, Atom::Le(Term::Size(l), _)) if matches!(l.as_ref(), Term::Var(u) if u == v) => {
                Some((**s).clone())
            }
            _ => None,
        },
        _ => None,
    }
}

/// Replaces a machine move choosing `c` for a sizebound-guarded `⊔x` by the
/// choice of 0 when `c` violates the sizebound in `state`.
pub fn clip_move(state: &GameState, mv: &str) -> String {
    let Some((path, Choice::Const(c))) = locate_move(&state.formula, Player::Top, mv) else {
        return mv.to_string();
    };
    let Ok(Formula::Quant(QuantOp::Join, v, body)) = get_at(&state.formula, &path) else {
        return mv.to_string();
    };
    let Some(s) = guard(v, body) else { return mv.to_string() };
    let Ok(s) = s.substitute1(v, &Term::Num(c)) else { return mv.to_string() };
    match eval_elementary(&s, &state.valuation, &state.interp) {
        Ok(false) => format!("{}0", move_prefix(&state.formula, &path)),
        _ => mv.to_string(),
    }
}

#[derive(Clone)]
struct Reasonable {
    inner: Box<dyn Agent>,
    state: GameState,
}

impl Agent for Reasonable {
    fn step(&mut self, env: &[String]) -> Result<Vec<String>, StrategyError> {
        for m in env {
            if let Ok(s) = self.state.apply(&LabMove::bot(m)) {
                self.state = s;
            }
        }
        let outs = self.inner.step(env)?;
        Ok(outs
            .into_iter()
            .map(|o| {
                let c = clip_move(&self.state, &o);
                if let Ok(s) = self.state.apply(&LabMove::top(&c)) {
                    self.state = s;
                }
                c
            })
            .collect())
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }

    fn sessions(&self) -> Vec<String> {
        self.inner.sessions()
    }
}

/// The reasonable counterpart: identical except that unreasonable constant
/// choices become 0.
pub fn reasonable_wrap(s: &Strategy) -> Strategy {
    let agent = Reasonable { inner: s.spawn(), state: GameState::new(s.game.clone()) };
    Strategy::new(&format!("reasonable {}", s.name), s.game.clone(), s.certificate.clone(), Box::new(agent))
}

#[derive(Clone)]
struct Premise {
    strategy: Strategy,
    /// the premise prefix, as variable names of the conclusion body
    order: Vec<String>,
}

#[derive(Clone)]
struct InductionAgent {
    x: String,
    prefix: Vec<String>,
    basis: Premise,
    steps: [Premise; 2],
    real: GameState,
    chosen: BTreeMap<String, BigUint>,
    sessions: Vec<(String, Box<dyn Agent>)>,
    halted: bool,
}

enum Dest {
    Session(usize, String),
    Real(String),
}

impl InductionAgent {
    fn numerals(order: &[String], vals: &BTreeMap<String, BigUint>) -> Vec<String> {
        order.iter().map(|v| Numeral::from_value(vals[v].clone()).to_string()).collect()
    }

    fn spawn_chain(&mut self, queue: &mut VecDeque<(usize, String)>) -> Result<(), StrategyError> {
        let xv = self.chosen[&self.x].clone();
        let bits = if xv.is_zero() { String::new() } else { xv.to_str_radix(2) };
        let mut vals = self.chosen.clone();
        let mut n = Box::new(Reasonable { inner: self.basis.strategy.spawn(), state: GameState::new(self.basis.strategy.game.clone()) })
            as Box<dyn Agent>;
        let outs = n.step(&Self::numerals(&self.basis.order, &vals))?;
        queue.extend(outs.into_iter().map(|o| (0, o)));
        self.sessions.push(("N′".into(), n));
        let mut d = BigUint::zero();
        for (i, b) in bits.chars().enumerate() {
            let bit = (b == '1') as usize;
            let p = &self.steps[bit];
            vals.insert(self.x.clone(), d.clone());
            let mut k = Box::new(Reasonable { inner: p.strategy.spawn(), state: GameState::new(p.strategy.game.clone()) })
                as Box<dyn Agent>;
            let outs = k.step(&Self::numerals(&p.order, &vals))?;
            queue.extend(outs.into_iter().map(|o| (i + 1, o)));
            self.sessions.push((format!("K′{bit}"), k));
            d = (d << 1) + bit as u32;
        }
        Ok(())
    }

    /// Where a move made by session `i` is copied to.
    fn route(&self, i: usize, mv: &str) -> Result<Dest, StrategyError> {
        let last = self.sessions.len() - 1;
        if i == 0 {
            return Ok(if last == 0 { Dest::Real(mv.into()) } else { Dest::Session(1, format!("0.{mv}")) });
        }
        let fault = || StrategyError::ProviderFault { session: self.sessions[i].0.clone(), msg: format!("unexpected move {mv:?}") };
        let (c, rest) = mv.split_once('.').ok_or_else(fault)?;
        match c {
            "0" if i == 1 => Ok(Dest::Session(0, rest.into())),
            "0" => Ok(Dest::Session(i - 1, format!("1.{rest}"))),
            "1" if i == last => Ok(Dest::Real(rest.into())),
            "1" => Ok(Dest::Session(i + 1, format!("0.{rest}"))),
            _ => Err(fault()),
        }
    }

    fn pump(&mut self, mut queue: VecDeque<(usize, String)>, out: &mut Vec<String>) -> Result<(), StrategyError> {
        while let Some((i, mv)) = queue.pop_front() {
            match self.route(i, &mv)? {
                Dest::Real(m) => {
                    // moderated synchronization
                    let m = clip_move(&self.real, &m);
                    if let Ok(s) = self.real.apply(&LabMove::top(&m)) {
                        self.real = s;
                    }
                    out.push(m);
                }
                Dest::Session(j, m) => {
                    let outs = self.sessions[j].1.step(&[m])?;
                    queue.extend(outs.into_iter().map(|o| (j, o)));
                }
            }
        }
        Ok(())
    }
}

impl Agent for InductionAgent {
    fn step(&mut self, env: &[String]) -> Result<Vec<String>, StrategyError> {
        let mut out = Vec::new();
        for m in env {
            if self.halted {
                break;
            }
            match self.real.apply(&LabMove::bot(m)) {
                Ok(s) => self.real = s,
                Err(_) => {
                    self.halted = true;
                    break;
                }
            }
            if self.chosen.len() < self.prefix.len() {
                let v = self.prefix[self.chosen.len()].clone();
                let c = Numeral::parse(m).expect("legal prefix move is a numeral");
                self.chosen.insert(v, c.into_value());
                if self.chosen.len() == self.prefix.len() {
                    let mut q = VecDeque::new();
                    self.spawn_chain(&mut q)?;
                    self.pump(q, &mut out)?;
                }
            } else {
                let last = self.sessions.len() - 1;
                let msg = if last == 0 { m.clone() } else { format!("1.{m}") };
                let outs = self.sessions[last].1.step(&[msg])?;
                self.pump(outs.into_iter().map(|o| (last, o)).collect(), &mut out)?;
            }
        }
        if self.chosen.len() == self.prefix.len() && !self.halted && env.is_empty() {
            let mut q = VecDeque::new();
            for (i, s) in self.sessions.iter_mut().enumerate() {
                q.extend(s.1.step(&[])?.into_iter().map(|o| (i, o)));
            }
            self.pump(q, &mut out)?;
        }
        Ok(out)
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }

    fn sessions(&self) -> Vec<String> {
        self.sessions.iter().map(|s| s.0.clone()).collect()
    }
}

/// `y + Σ τ_i(y)` over the sizebounds of `f`, iterated once per choice
/// quantifier, plus room for move prefixes.
fn induction_certificate(f: &Formula) -> ExplicitPolyFn {
    let mut taus = Vec::new();
    let mut quants = 0;
    fn walk(f: &Formula, taus: &mut Vec<GraphTerm>, quants: &mut usize) {
        match f {
            Formula::Lit(_, Atom::Le(Term::Size(_), t)) => {
                if let Some(g) = GraphTerm::from_size_term(t) {
                    taus.push(g);
                }
            }
            Formula::Bin(_, a, b) => {
                walk(a, taus, quants);
                walk(b, taus, quants);
            }
            Formula::Quant(op, _, b) => {
                if op.is_choice() {
                    *quants += 1;
                }
                walk(b, taus, quants);
            }
            _ => {}
        }
    }
    walk(f, &mut taus, &mut quants);
    let mut b = Builder::new();
    let y = b.var();
    let mut acc = y;
    for t in &taus {
        let r = b.import(t);
        acc = b.add(acc, r);
    }
    let p = ExplicitPolyFn::single(b.finish(acc));
    let slack = constant_bound(prefix_slack(f) as u64 + 1);
    let body = iterate_bounds(&p, quants.max(1));
    let mut c = Builder::new();
    let y = c.var();
    let r = c.ph(1, y);
    let id = compose(&c.finish(r), &[body]).expect("one letter");
    sum_bounds(&id, &slack)
}

/// Composes solutions of `⊓(F(0))`, `⊓(F(x)→F(x0))` and `⊓(F(x)→F(x1))` into
/// one of `conclusion`, the ⊓-closure of `F(x)`.
pub fn induction_compose(
    conclusion: &Formula,
    x: &str,
    basis: &Strategy,
    left: &Strategy,
    right: &Strategy,
) -> Result<Strategy, StrategyError> {
    let bad = |m: &str| StrategyError::Invalid(m.to_string());
    let mut prefix = Vec::new();
    let mut f = conclusion;
    // the shortest prefix that binds x and leaves every prefix variable free
    loop {
        if prefix.iter().any(|v| v == x) {
            break;
        }
        match f {
            Formula::Quant(QuantOp::Meet, v, b) => {
                prefix.push(v.clone());
                f = b;
            }
            _ => return Err(bad("conclusion is not a ⊓-closure over the induction variable")),
        }
    }
    let fv = f.free_vars();
    while fv.len() > prefix.len() {
        match f {
            Formula::Quant(QuantOp::Meet, v, b) if fv.contains(v) => {
                prefix.push(v.clone());
                f = b;
            }
            _ => return Err(bad("conclusion is not the ⊓-closure of its body")),
        }
    }
    let xt = Term::var(x);
    let sub = |t: Term| f.substitute1(x, &t).map_err(|e| bad(&e));
    let f0 = sub(Term::zero())?;
    let fl = Formula::imp(f.clone(), sub(Term::bin0(xt.clone()))?);
    let fr = Formula::imp(f.clone(), sub(Term::bin1(xt))?);
    let premise = |s: &Strategy, g: &Formula, name: &str| -> Result<Premise, StrategyError> {
        let order = meet_closure_order(&s.game, g).ok_or_else(|| bad(&format!("{name} premise does not match F")))?;
        Ok(Premise { strategy: s.clone(), order })
    };
    let agent = InductionAgent {
        x: x.to_string(),
        prefix,
        basis: premise(basis, &f0, "basis")?,
        steps: [premise(left, &fl, "left")?, premise(right, &fr, "right")?],
        real: GameState::new(conclusion.clone()),
        chosen: BTreeMap::new(),
        sessions: Vec::new(),
        halted: false,
    };
    Ok(Strategy::new("induction", conclusion.clone(), induction_certificate(f), Box::new(agent)))
}

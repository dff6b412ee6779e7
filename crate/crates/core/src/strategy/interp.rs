//! Playing a CL12 proof: walk from the conclusion toward the leaves, moving at
//! Choose lines and waiting at Wait lines.

use super::{locate_move, move_prefix, prefix_slack, Agent, Choice, Strategy, StrategyError};
use crate::cl12::check::{choose_premise, fresh_instance, match_fresh, replicate_premise, wait_requirements, WaitReq};
use crate::cl12::{Proof, Rule};
use crate::game::Player;
use crate::polyfun::{compose, iterate_bounds, Builder, ExplicitPolyFn};
use crate::syntax::{Formula, Numeral, Sequent, Side, Term};
use num_bigint::BigUint;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::sync::{Arc, Mutex};

#[derive(Clone)]
struct Session {
    id: String,
    agent: Box<dyn Agent>,
}

#[derive(Clone, Debug)]
enum Event {
    Real(String),
    Provider(usize, String),
}

/// Where a step of the walk leads: the premise line and, for each of its
/// antecedents, the index of the session that plays it.
#[derive(Clone, Debug)]
struct Edge {
    target: usize,
    perm: Vec<usize>,
}

#[derive(Clone, Debug)]
enum Act {
    Emit { side: Side, prefix: String, choice: Result<usize, Term> },
    Fork(usize),
    Stop,
}

/// Transitions depend only on the proof, never on the values played.
#[derive(Default)]
struct Plan {
    acts: HashMap<usize, (Act, Option<Edge>)>,
    waits: HashMap<(usize, Side, Vec<usize>, Option<usize>), Option<(Edge, Option<String>)>>,
}

#[derive(Clone)]
struct Cl12Agent {
    plan: Arc<Mutex<Plan>>,
    proof: Arc<Proof>,
    index: Arc<HashMap<usize, usize>>,
    cur: usize,
    val: BTreeMap<String, BigUint>,
    sessions: Vec<Session>,
    queue: VecDeque<Event>,
    started: bool,
    halted: bool,
    forks: usize,
}

impl Cl12Agent {
    fn value(&mut self, t: &Term) -> Result<BigUint, StrategyError> {
        match t {
            Term::Num(n) => Ok(n.value().clone()),
            Term::Var(v) => Ok(self.val.entry(v.clone()).or_default().clone()),
            _ => Err(StrategyError::Invalid(format!("cannot choose the term {t}"))),
        }
    }

    fn provider_fault(&self, k: usize, msg: String) -> StrategyError {
        StrategyError::ProviderFault { session: self.sessions[k].id.clone(), msg }
    }

    fn edge(&self, want: &Sequent, n: usize) -> Result<Edge, StrategyError> {
        let j = *self.index.get(&n).ok_or_else(|| StrategyError::Invalid(format!("no line {n}")))?;
        let target = &self.proof.lines[j].sequent;
        let keys: Vec<String> = want.ant.iter().map(|a| a.alpha_key()).collect();
        let mut used = vec![false; keys.len()];
        let mut perm = Vec::with_capacity(target.ant.len());
        for a in &target.ant {
            let k = a.alpha_key();
            let i = (0..keys.len())
                .find(|&i| !used[i] && keys[i] == k)
                .ok_or_else(|| StrategyError::Invalid(format!("line {n} does not match the expected premise")))?;
            used[i] = true;
            perm.push(i);
        }
        Ok(Edge { target: j, perm })
    }

    fn follow(&mut self, e: &Edge) {
        self.sessions = e.perm.iter().map(|&i| self.sessions[i].clone()).collect();
        self.cur = e.target;
    }

    fn send(&mut self, k: usize, mv: String) -> Result<(), StrategyError> {
        let outs = self.sessions[k].agent.step(&[mv])?;
        self.queue.extend(outs.into_iter().map(|o| Event::Provider(k, o)));
        Ok(())
    }

    fn plan_act(&self, cur: usize) -> Result<(Act, Option<Edge>), StrategyError> {
        let line = &self.proof.lines[cur];
        let x = &line.sequent;
        let (act, want) = match &line.rule {
            Rule::Wait => return Ok((Act::Stop, None)),
            Rule::Replicate(k) => (Act::Fork(*k), replicate_premise(x, *k).map_err(StrategyError::Invalid)?),
            rule => {
                let (loc, choice) = match rule {
                    Rule::OrChoose(l, i) | Rule::AndChoose(l, i) => (l, Ok(*i)),
                    Rule::ExistsChoose(l, t) | Rule::AllChoose(l, t) => (l, Err(t.clone())),
                    _ => unreachable!(),
                };
                let f = match loc.side {
                    Side::Succ => &x.succ,
                    Side::Ant(k) => &x.ant[k],
                };
                let act = Act::Emit { side: loc.side.clone(), prefix: move_prefix(f, &loc.path), choice };
                (act, choose_premise(x, rule).map_err(StrategyError::Invalid)?)
            }
        };
        let n = *line.premises.first().ok_or_else(|| StrategyError::Invalid(format!("line {} has no premise", line.n)))?;
        Ok((act, Some(self.edge(&want, n)?)))
    }

    /// Runs Choose and Replicate lines until a Wait line.
    fn advance(&mut self, out: &mut Vec<String>) -> Result<(), StrategyError> {
        loop {
            let cached = self.plan.lock().expect("plan lock").acts.get(&self.cur).cloned();
            let (act, edge) = match cached {
                Some(p) => p,
                None => {
                    let p = self.plan_act(self.cur)?;
                    self.plan.lock().expect("plan lock").acts.insert(self.cur, p.clone());
                    p
                }
            };
            match act {
                Act::Stop => return Ok(()),
                Act::Fork(k) => {
                    let mut s = self.sessions[k].clone();
                    self.forks += 1;
                    s.id = format!("{}#{}", s.id.split('#').next().unwrap_or_default(), self.forks);
                    self.sessions.push(s);
                }
                Act::Emit { side, prefix, choice } => {
                    let c = match choice {
                        Ok(i) => i.to_string(),
                        Err(t) => Numeral::from_value(self.value(&t)?).to_string(),
                    };
                    match side {
                        Side::Succ => out.push(format!("{prefix}{c}")),
                        Side::Ant(k) => self.send(k, format!("{prefix}{c}"))?,
                    }
                }
            }
            self.follow(&edge.expect("non-Wait lines have a premise"));
        }
    }

    /// The premise a Wait line moves to when `side`/`path` is chosen.
    fn plan_wait(&self, side: &Side, path: &[usize], bit: Option<usize>) -> Result<Option<(Edge, Option<String>)>, StrategyError> {
        let line = &self.proof.lines[self.cur];
        let x = &line.sequent;
        let req = wait_requirements(x).into_iter().find(|r| &r.loc().side == side && r.loc().path == path);
        let found = match (req, bit) {
            (Some(WaitReq::Both { premises, .. }), Some(i)) => {
                let key = premises[i].key();
                line.premises
                    .iter()
                    .find(|n| self.index.get(n).map(|&j| self.proof.lines[j].sequent.key()) == Some(key.clone()))
                    .map(|&n| (premises[i].clone(), n, None))
            }
            (Some(WaitReq::Fresh { loc, var, body }), None) => line.premises.iter().find_map(|&n| {
                let p = &self.proof.lines[*self.index.get(&n)?].sequent;
                let y = match_fresh(x, &loc, &var, &body, p)?;
                Some((fresh_instance(x, &loc, &var, &body, &y)?, n, Some(y)))
            }),
            _ => None,
        };
        match found {
            Some((want, n, y)) => Ok(Some((self.edge(&want, n)?, y))),
            None => Ok(None),
        }
    }

    fn handle(&mut self, ev: Event) -> Result<(), StrategyError> {
        let line = self.proof.lines[self.cur].clone();
        let x = &line.sequent;
        let (side, player, mv) = match &ev {
            Event::Real(m) => (Side::Succ, Player::Bot, m.as_str()),
            Event::Provider(k, m) => (Side::Ant(*k), Player::Top, m.as_str()),
        };
        let f: &Formula = match side {
            Side::Succ => &x.succ,
            Side::Ant(k) => &x.ant[k],
        };
        let located = locate_move(f, player, mv);
        let Some((path, choice)) = located else {
            return match ev {
                // an illegal environment move loses the play; nothing more to do
                Event::Real(_) => {
                    self.halted = true;
                    Ok(())
                }
                Event::Provider(k, m) => Err(self.provider_fault(k, format!("illegal move {m:?}"))),
            };
        };
        let bit = match &choice {
            Choice::Bit(i) => Some(*i),
            Choice::Const(_) => None,
        };
        let key = (self.cur, side.clone(), path.clone(), bit);
        let cached = self.plan.lock().expect("plan lock").waits.get(&key).cloned();
        let found = match cached {
            Some(f) => f,
            None => {
                let f = self.plan_wait(&side, &path, bit)?;
                self.plan.lock().expect("plan lock").waits.insert(key, f.clone());
                f
            }
        };
        match found {
            Some((edge, y)) => {
                if let (Some(y), Choice::Const(c)) = (y, choice) {
                    self.val.insert(y, c.into_value());
                }
                self.follow(&edge);
                Ok(())
            }
            None => match ev {
                Event::Real(_) => {
                    self.halted = true;
                    Ok(())
                }
                Event::Provider(k, m) => Err(self.provider_fault(k, format!("move {m:?} has no premise in line {}", line.n))),
            },
        }
    }
}

impl Agent for Cl12Agent {
    fn step(&mut self, env: &[String]) -> Result<Vec<String>, StrategyError> {
        let mut out = Vec::new();
        if !self.started {
            self.started = true;
            for k in 0..self.sessions.len() {
                let outs = self.sessions[k].agent.step(&[])?;
                self.queue.extend(outs.into_iter().map(|o| Event::Provider(k, o)));
            }
        }
        self.queue.extend(env.iter().map(|m| Event::Real(m.clone())));
        loop {
            if self.halted {
                self.queue.clear();
                break;
            }
            self.advance(&mut out)?;
            match self.queue.pop_front() {
                Some(ev) => self.handle(ev)?,
                None => break,
            }
        }
        Ok(out)
    }

    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }

    fn sessions(&self) -> Vec<String> {
        self.sessions.iter().map(|s| s.id.clone()).collect()
    }
}

/// `h(y) = y + c + Σ g_k(y)` iterated once per proof line.
fn lc_certificate(proof: &Proof, providers: &[Strategy]) -> ExplicitPolyFn {
    let x = proof.conclusion().expect("nonempty proof");
    let slack = x.formulas().map(prefix_slack).max().unwrap_or(0);
    let consts = proof.lines.iter().flat_map(|l| l.sequent.constants()).map(|c| c.size()).max().unwrap_or(1);
    let c = (slack + consts + 1) as u64;
    let mut b = Builder::new();
    let y = b.var();
    let k = b.constant(&BigUint::from(c));
    let mut acc = b.add(y, k);
    for i in 0..providers.len() {
        let g = b.ph(i + 1, y);
        acc = b.add(acc, g);
    }
    let certs: Vec<ExplicitPolyFn> = providers.iter().map(|p| p.certificate.clone()).collect();
    let h = compose(&b.finish(acc), &certs).expect("one letter per provider");
    iterate_bounds(&h, proof.lines.len())
}

/// A strategy for the conclusion's succedent, given one provider per
/// antecedent of the conclusion, in order.
pub fn compile_cl12(proof: &Proof, providers: Vec<Strategy>) -> Result<Strategy, StrategyError> {
    let x = proof.conclusion().ok_or_else(|| StrategyError::Invalid("empty proof".into()))?;
    if providers.len() != x.ant.len() {
        return Err(StrategyError::Invalid(format!(
            "{} providers for {} antecedents",
            providers.len(),
            x.ant.len()
        )));
    }
    for (i, (p, a)) in providers.iter().zip(&x.ant).enumerate() {
        if !p.game.alpha_eq(a) {
            return Err(StrategyError::Invalid(format!("provider {} plays {}, expected {a}", i + 1, p.game)));
        }
    }
    let index: HashMap<usize, usize> = proof.lines.iter().enumerate().map(|(i, l)| (l.n, i)).collect();
    let sessions = providers
        .iter()
        .enumerate()
        .map(|(i, p)| Session { id: format!("a:{}", i + 1), agent: p.spawn() })
        .collect();
    let agent = Cl12Agent {
        plan: Arc::new(Mutex::new(Plan::default())),
        proof: Arc::new(proof.clone()),
        index: Arc::new(index),
        cur: proof.lines.len() - 1,
        val: BTreeMap::new(),
        sessions,
        queue: VecDeque::new(),
        started: false,
        halted: false,
        forks: 0,
    };
    let cert = lc_certificate(proof, &providers);
    Ok(Strategy::new("lc", x.succ.clone(), cert, Box::new(agent)))
}

//! Strategies as deterministic reactive agents, their composition from proofs,
//! and a metered play harness.

mod extract;
mod induction;
mod interp;
mod play;

pub use extract::{extract, load_bundle, Bundle, BUNDLE_VERSION};
pub use induction::{clip_move, induction_compose, reasonable_wrap};
pub use interp::compile_cl12;
pub use play::{play, Environment, MoveMeter, PlayOutcome, RandomEnv, ScriptedEnv};

use crate::cla4::axiom_formula;
use crate::game::Player;
use crate::polyfun::{Builder, ExplicitPolyFn};
use crate::syntax::{parse_formula, BinOp, Formula, Numeral, OccPath, QuantOp};
use num_bigint::BigUint;
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StrategyError {
    #[error("provider fault in session {session}: {msg}")]
    ProviderFault { session: String, msg: String },
    #[error("proof is not extraction-ready; offending lines: {}", .0.join(", "))]
    NotReady(Vec<String>),
    #[error("{0}")]
    Invalid(String),
}

/// Reacts to the environment's moves, returning its own moves. An empty
/// slice is a plain tick.
pub trait Agent: Send {
    fn step(&mut self, env: &[String]) -> Result<Vec<String>, StrategyError>;
    fn clone_box(&self) -> Box<dyn Agent>;
    /// Labels of simulated sub-sessions, in creation order.
    fn sessions(&self) -> Vec<String> {
        Vec::new()
    }
}

impl Clone for Box<dyn Agent> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// A strategy for `game`, with a bound on its move sizes as a function of
/// the background.
pub struct Strategy {
    pub name: String,
    pub game: Formula,
    pub certificate: ExplicitPolyFn,
    proto: Box<dyn Agent>,
}

impl Clone for Strategy {
    fn clone(&self) -> Self {
        Strategy {
            name: self.name.clone(),
            game: self.game.clone(),
            certificate: self.certificate.clone(),
            proto: self.proto.clone_box(),
        }
    }
}

impl fmt::Debug for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Strategy({} for {})", self.name, self.game)
    }
}

impl Strategy {
    pub fn new(name: &str, game: Formula, certificate: ExplicitPolyFn, agent: Box<dyn Agent>) -> Self {
        Strategy { name: name.to_string(), game, certificate, proto: agent }
    }

    /// A fresh agent at the start of a play.
    pub fn spawn(&self) -> Box<dyn Agent> {
        self.proto.clone_box()
    }
}

#[derive(Clone)]
struct Silent;

impl Agent for Silent {
    fn step(&mut self, _: &[String]) -> Result<Vec<String>, StrategyError> {
        Ok(Vec::new())
    }
    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// Never moves. Wins exactly the true elementary sentences.
pub fn silent_strategy(game: Formula) -> Strategy {
    Strategy::new("silent", game, ExplicitPolyFn::zero(), Box::new(Silent))
}

type NumFn = Arc<dyn Fn(&[BigUint]) -> BigUint + Send + Sync>;

#[derive(Clone)]
struct FnAgent {
    arity: usize,
    f: NumFn,
    got: Vec<BigUint>,
    done: bool,
}

impl Agent for FnAgent {
    fn step(&mut self, env: &[String]) -> Result<Vec<String>, StrategyError> {
        let mut out = Vec::new();
        for m in env {
            match Numeral::parse(m) {
                Some(n) if self.got.len() < self.arity => self.got.push(n.into_value()),
                _ => self.done = true,
            }
        }
        if !self.done && self.got.len() == self.arity {
            self.done = true;
            out.push(Numeral::from_value((self.f)(&self.got)).to_string());
        }
        Ok(out)
    }
    fn clone_box(&self) -> Box<dyn Agent> {
        Box::new(self.clone())
    }
}

/// For `⊓x1…⊓xn⊔y φ`: waits for the `n` choices, then answers `f(x1,…,xn)`.
pub fn function_strategy(
    name: &str,
    game: Formula,
    arity: usize,
    certificate: ExplicitPolyFn,
    f: impl Fn(&[BigUint]) -> BigUint + Send + Sync + 'static,
) -> Strategy {
    let agent = FnAgent { arity, f: Arc::new(f), got: Vec::new(), done: false };
    Strategy::new(name, game, certificate, Box::new(agent))
}

/// `y′` as a certificate.
fn succ_bound() -> ExplicitPolyFn {
    let mut b = Builder::new();
    let y = b.var();
    let r = b.succ(y);
    ExplicitPolyFn::single(b.finish(r))
}

/// Axiom strategies: 8 answers `x+1`, 9 answers `2x`, the rest never move.
/// Axiom 7 is represented by its instance for `F(x) = (x=0)`.
pub fn axiom_strategy(k: usize) -> Strategy {
    let game = axiom_formula(k).unwrap_or_else(|| {
        assert_eq!(k, 7, "axioms are numbered 1 to 9");
        parse_formula("0=0 ∧ ∀x(x=0 → x′=0) → ∀x(x=0)").expect("axiom 7 instance")
    });
    axiom_strategy_for(k, game)
}

/// As [`axiom_strategy`], for an α-variant of the axiom.
pub fn axiom_strategy_for(k: usize, game: Formula) -> Strategy {
    match k {
        8 => function_strategy("axiom 8", game, 1, succ_bound(), |a| &a[0] + 1u32),
        9 => function_strategy("axiom 9", game, 1, succ_bound(), |a| &a[0] << 1),
        _ => {
            let mut s = silent_strategy(game);
            s.name = format!("axiom {k}");
            s
        }
    }
}

/// What a located move chooses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Choice {
    Bit(usize),
    Const(Numeral),
}

/// Finds the surface choice occurrence a move addresses, for the given mover.
pub fn locate_move(f: &Formula, player: Player, mv: &str) -> Option<(OccPath, Choice)> {
    let mut path = Vec::new();
    let mut cur = f;
    let mut rest = mv;
    loop {
        match cur {
            Formula::Bin(op @ (BinOp::Meet | BinOp::Join), ..) => {
                let mover = if *op == BinOp::Meet { Player::Bot } else { Player::Top };
                return match rest {
                    "0" if mover == player => Some((path, Choice::Bit(0))),
                    "1" if mover == player => Some((path, Choice::Bit(1))),
                    _ => None,
                };
            }
            Formula::Quant(op @ (QuantOp::Meet | QuantOp::Join), ..) => {
                let mover = if *op == QuantOp::Meet { Player::Bot } else { Player::Top };
                if mover != player {
                    return None;
                }
                return Numeral::parse(rest).map(|c| (path, Choice::Const(c)));
            }
            Formula::Bin(_, a, b) => {
                let (i, r) = rest.split_once('.')?;
                cur = match i {
                    "0" => a,
                    "1" => b,
                    _ => return None,
                };
                path.push(if i == "0" { 0 } else { 1 });
                rest = r;
            }
            Formula::Quant(_, _, b) => {
                path.push(0);
                cur = b;
            }
            _ => return None,
        }
    }
}

/// The `i.` prefix leading to the occurrence at `path`.
pub fn move_prefix(f: &Formula, path: &[usize]) -> String {
    let mut s = String::new();
    let mut cur = f;
    for &p in path {
        match cur {
            Formula::Bin(_, a, b) => {
                s.push_str(if p == 0 { "0." } else { "1." });
                cur = if p == 0 { a } else { b };
            }
            Formula::Quant(_, _, b) => cur = b,
            _ => break,
        }
    }
    s
}

/// Upper bound on the length of any `i.` prefix in `f`.
pub(crate) fn prefix_slack(f: &Formula) -> usize {
    match f {
        Formula::Bin(op, a, b) if !op.is_choice() => 2 + prefix_slack(a).max(prefix_slack(b)),
        Formula::Bin(_, a, b) => prefix_slack(a).max(prefix_slack(b)),
        Formula::Quant(_, _, b) => prefix_slack(b),
        _ => 0,
    }
}

//! The play harness: environment and machine alternate in abstract ticks.

use super::Strategy;
use crate::game::{adjudicate, GameState, LabMove, MoveFamily, Player, Verdict};
use crate::syntax::Numeral;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::VecDeque;

/// The environment side of a play. `None` means it will not move again.
pub trait Environment {
    fn moves(&mut self, state: &GameState, tick: usize) -> Option<Vec<String>>;
}

/// Plays a fixed list of moves, one per tick.
pub struct ScriptedEnv {
    moves: VecDeque<String>,
}

impl ScriptedEnv {
    pub fn new<S: Into<String>>(moves: impl IntoIterator<Item = S>) -> Self {
        ScriptedEnv { moves: moves.into_iter().map(Into::into).collect() }
    }
}

impl Environment for ScriptedEnv {
    fn moves(&mut self, _: &GameState, _: usize) -> Option<Vec<String>> {
        self.moves.pop_front().map(|m| vec![m])
    }
}

/// Picks uniformly among its legal move families; numerals have up to
/// `max_bits` bits.
pub struct RandomEnv {
    rng: ChaCha8Rng,
    pub max_bits: u64,
    pub max_moves: usize,
    made: usize,
}

impl RandomEnv {
    pub fn new(seed: u64, max_bits: u64) -> Self {
        RandomEnv { rng: ChaCha8Rng::seed_from_u64(seed), max_bits, max_moves: usize::MAX, made: 0 }
    }

    pub fn numeral(&mut self) -> Numeral {
        let bits = self.rng.gen_range(0..=self.max_bits);
        let mut v = BigUint::default();
        for _ in 0..bits {
            v = (v << 1u32) + self.rng.gen_range(0..2u32);
        }
        Numeral::from_value(v)
    }

    fn instance(&mut self, fam: &MoveFamily) -> String {
        if fam.numeral {
            format!("{}{}", fam.prefix, self.numeral())
        } else {
            format!("{}{}", fam.prefix, self.rng.gen_range(0..2u32))
        }
    }
}

impl Environment for RandomEnv {
    fn moves(&mut self, state: &GameState, _: usize) -> Option<Vec<String>> {
        let fams = state.legal_moves_for(Player::Bot);
        if fams.is_empty() || self.made >= self.max_moves {
            return None;
        }
        let i = self.rng.gen_range(0..fams.len());
        self.made += 1;
        Some(vec![self.instance(&fams[i])])
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MoveMeter {
    /// position in the run
    pub index: usize,
    pub player: Player,
    pub size: usize,
    /// greatest size of an environment move so far, 0 if none
    pub background: usize,
    /// ticks since the previous move by either player, counting this one
    pub timecost: usize,
}

#[derive(Clone, Debug)]
pub struct PlayOutcome {
    pub run: Vec<LabMove>,
    pub verdict: Option<Verdict>,
    pub meters: Vec<MoveMeter>,
    pub background: usize,
    pub ticks: usize,
    /// tick budget ran out before the play settled
    pub stalled: bool,
    pub fault: Option<String>,
    pub sessions: Vec<String>,
}

impl PlayOutcome {
    pub fn machine_won(&self) -> bool {
        matches!(&self.verdict, Some(v) if v.winner == Player::Top)
    }

    /// Machine moves whose size exceeds the certificate at their background.
    pub fn certificate_violations(&self, s: &Strategy) -> Vec<MoveMeter> {
        self.meters
            .iter()
            .filter(|m| m.player == Player::Top)
            .filter(|m| BigUint::from(m.size) > s.certificate.eval(&BigUint::from(m.background)))
            .cloned()
            .collect()
    }
}

pub fn play(strategy: &Strategy, initial: &GameState, env: &mut dyn Environment, tick_budget: usize) -> PlayOutcome {
    let mut agent = strategy.spawn();
    let mut state = initial.clone();
    let mut run = Vec::new();
    let mut meters = Vec::new();
    let mut background = 0;
    let mut last_tick = 0;
    let mut env_done = false;
    let mut settled = false;
    let mut illegal = false;
    let mut fault = None;
    let mut ticks = 0;
    let mut record = |m: LabMove, tick: usize, bg: usize, run: &mut Vec<LabMove>, last: &mut usize| {
        meters.push(MoveMeter {
            index: run.len(),
            player: m.player,
            size: m.mv.chars().count(),
            background: bg,
            timecost: tick + 1 - *last,
        });
        *last = tick + 1;
        run.push(m);
    };
    'outer: for tick in 0..tick_budget {
        ticks = tick + 1;
        let envm = if env_done {
            Vec::new()
        } else {
            env.moves(&state, tick).unwrap_or_else(|| {
                env_done = true;
                Vec::new()
            })
        };
        for m in &envm {
            background = background.max(m.chars().count());
            let lm = LabMove::bot(m);
            let next = state.apply(&lm);
            record(lm, tick, background, &mut run, &mut last_tick);
            match next {
                Ok(s) => state = s,
                Err(_) => {
                    illegal = true;
                    break 'outer;
                }
            }
        }
        let outs = match agent.step(&envm) {
            Ok(o) => o,
            Err(e) => {
                fault = Some(e.to_string());
                break;
            }
        };
        let quiet = outs.is_empty();
        for o in outs {
            let lm = LabMove::top(&o);
            let next = state.apply(&lm);
            record(lm, tick, background, &mut run, &mut last_tick);
            match next {
                Ok(s) => state = s,
                Err(_) => {
                    illegal = true;
                    break 'outer;
                }
            }
        }
        if env_done && envm.is_empty() && quiet {
            settled = true;
            break;
        }
    }
    PlayOutcome {
        verdict: adjudicate(initial, &run).ok(),
        run,
        meters,
        background,
        ticks,
        stalled: !settled && !illegal && fault.is_none(),
        fault,
        sessions: agent.sessions(),
    }
}

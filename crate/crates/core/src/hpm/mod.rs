//! Hard-play machines: a two-tape Turing machine with a run tape and move
//! states, a cycle-exact simulator with interactive complexity meters, and
//! the numeric encoding of configurations.

mod codec;

pub use codec::{concat_codes, Codec, CodecError, Sym, Truth};

use crate::polyfun::ExplicitPolyFn;
use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use std::fmt;
use thiserror::Error;

pub const BLANK: char = '_';
pub const TOP: char = '⊤';
pub const BOT: char = '⊥';

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HpmError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("invalid machine: {0}")]
    Invalid(String),
    #[error("symbol {0:?} is not in the tape alphabet")]
    Symbol(char),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Dir {
    L,
    R,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct Row {
    state: usize,
    work: Option<usize>,
    run: Option<usize>,
    next: usize,
    /// `None` rewrites what was read
    write: Option<usize>,
    dw: Dir,
    dr: Dir,
}

/// What one transition does.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Action {
    pub next: usize,
    pub write: usize,
    pub dw: Dir,
    pub dr: Dir,
}

/// A machine. Tape symbol 0 is blank, 1 is ⊤ and 2 is ⊥; `0`, `1` and `.`
/// always follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpmSpec {
    states: Vec<String>,
    start: usize,
    is_move: Vec<bool>,
    symbols: Vec<char>,
    rows: Vec<Row>,
}

impl HpmSpec {
    pub fn parse(text: &str) -> Result<Self, HpmError> {
        let err = |line: usize, msg: &str| HpmError::Format { line, msg: msg.to_string() };
        let mut states: Option<Vec<String>> = None;
        let mut start = None;
        let mut moves = Vec::new();
        let mut symbols = vec![BLANK, TOP, BOT, '0', '1', '.'];
        let mut raw = Vec::new();
        for (k, line) in text.lines().enumerate() {
            let n = k + 1;
            let line = line.split('#').next().unwrap_or_default().trim();
            if line.is_empty() {
                continue;
            }
            if let Some((key, rest)) = line.split_once(':') {
                let words: Vec<String> = rest.split_whitespace().map(str::to_string).collect();
                match key.trim() {
                    "states" => states = Some(words),
                    "start" => start = Some(words.first().cloned().ok_or_else(|| err(n, "missing start state"))?),
                    "move" => moves = words,
                    "alphabet" => {
                        for w in words {
                            let mut cs = w.chars();
                            let (Some(c), None) = (cs.next(), cs.next()) else {
                                return Err(err(n, "tape symbols are single characters"));
                            };
                            if c == '*' {
                                return Err(err(n, "* is reserved"));
                            }
                            if !symbols.contains(&c) {
                                symbols.push(c);
                            }
                        }
                    }
                    _ => return Err(err(n, "unknown header")),
                }
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| err(n, "expected `s w r -> s' w' D D`"))?;
            let l: Vec<&str> = lhs.split_whitespace().collect();
            let r: Vec<&str> = rhs.split_whitespace().collect();
            if l.len() != 3 || r.len() != 4 {
                return Err(err(n, "expected `s w r -> s' w' D D`"));
            }
            raw.push((n, l.iter().map(|s| s.to_string()).collect::<Vec<_>>(), r.iter().map(|s| s.to_string()).collect::<Vec<_>>()));
        }
        let states = states.ok_or_else(|| err(0, "missing `states:`"))?;
        let state = |n: usize, s: &str| states.iter().position(|x| x == s).ok_or_else(|| err(n, &format!("unknown state {s}")));
        let start = state(0, &start.ok_or_else(|| err(0, "missing `start:`"))?)?;
        let mut is_move = vec![false; states.len()];
        for m in &moves {
            is_move[state(0, m)?] = true;
        }
        let sym = |n: usize, s: &str| -> Result<Option<usize>, HpmError> {
            if s == "*" {
                return Ok(None);
            }
            let mut cs = s.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) => symbols.iter().position(|&x| x == c).map(Some).ok_or(HpmError::Symbol(c)),
                _ => Err(err(n, &format!("bad symbol {s}"))),
            }
        };
        let dir = |n: usize, s: &str| match s {
            "L" => Ok(Dir::L),
            "R" => Ok(Dir::R),
            _ => Err(err(n, "directions are L or R")),
        };
        let mut rows = Vec::new();
        for (n, l, r) in raw {
            let write = sym(n, &r[1])?;
            if matches!(write, Some(0..=2)) {
                return Err(err(n, "blank, ⊤ and ⊥ cannot be written"));
            }
            rows.push(Row {
                state: state(n, &l[0])?,
                work: sym(n, &l[1])?,
                run: sym(n, &l[2])?,
                next: state(n, &r[0])?,
                write,
                dw: dir(n, &r[2])?,
                dr: dir(n, &r[3])?,
            });
        }
        let spec = HpmSpec { states, start, is_move, symbols, rows };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), HpmError> {
        if self.is_move[self.start] {
            return Err(HpmError::Invalid("the start state is a move state".into()));
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("states: {}\nstart: {}\nmove:", self.states.join(" "), self.states[self.start]);
        for (k, m) in self.is_move.iter().enumerate() {
            if *m {
                s += &format!(" {}", self.states[k]);
            }
        }
        s += "\nalphabet:";
        for c in &self.symbols[3..] {
            s += &format!(" {c}");
        }
        s.push('\n');
        let sym = |x: Option<usize>| x.map_or("*".to_string(), |i| self.symbols[i].to_string());
        for r in &self.rows {
            s += &format!(
                "{} {} {} -> {} {} {:?} {:?}\n",
                self.states[r.state],
                sym(r.work),
                sym(r.run),
                self.states[r.next],
                sym(r.write),
                r.dw,
                r.dr
            );
        }
        s
    }

    /// A stable code for the machine: the hash of its normalized text.
    pub fn code(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn is_move_state(&self, q: usize) -> bool {
        self.is_move[q]
    }

    pub fn symbol_index(&self, c: char) -> Option<usize> {
        self.symbols.iter().position(|&x| x == c)
    }

    /// The transition for state `q` reading `w` and `r`. The first matching
    /// row wins; without one the machine keeps its state, rewrites the cell
    /// (or writes `0` over a blank) and moves both heads left.
    pub fn action(&self, q: usize, w: usize, r: usize) -> Action {
        let keep = if w <= 2 { 3 } else { w };
        for row in &self.rows {
            if row.state == q && row.work.map_or(true, |x| x == w) && row.run.map_or(true, |x| x == r) {
                return Action { next: row.next, write: row.write.unwrap_or(keep), dw: row.dw, dr: row.dr };
            }
        }
        Action { next: q, write: keep, dw: Dir::L, dr: Dir::L }
    }

    pub fn initial(&self) -> Configuration {
        Configuration { state: self.start, work: Vec::new(), run: Vec::new(), i: 0, j: 0 }
    }

    fn encode_move(&self, mv: &str) -> Result<Vec<usize>, HpmError> {
        mv.chars()
            .map(|c| match self.symbol_index(c) {
                Some(k) if k > 2 => Ok(k),
                _ => Err(HpmError::Symbol(c)),
            })
            .collect()
    }
}

/// Tape contents up to, not including, the first blank cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub state: usize,
    pub work: Vec<usize>,
    pub run: Vec<usize>,
    pub i: usize,
    pub j: usize,
}

impl Configuration {
    /// The string left of the work head.
    pub fn pending_move(&self, spec: &HpmSpec) -> String {
        self.work[..self.i].iter().map(|&s| spec.symbols[s]).collect()
    }

    pub fn run_text(&self, spec: &HpmSpec) -> String {
        self.run.iter().map(|&s| spec.symbols[s]).collect()
    }
}

fn cell(tape: &[usize], k: usize) -> usize {
    tape.get(k).copied().unwrap_or(0)
}

/// One clock cycle. A machine move goes on the run tape before the
/// environment's moves of the same cycle. Returns the machine's move, if any.
pub fn step(spec: &HpmSpec, c: &Configuration, env: &[String]) -> Result<(Configuration, Option<String>), HpmError> {
    let w = cell(&c.work, c.i);
    let r = cell(&c.run, c.j);
    let a = spec.action(c.state, w, r);
    let mut n = c.clone();
    n.state = a.next;
    if c.i == n.work.len() {
        n.work.push(a.write);
    } else {
        n.work[c.i] = a.write;
    }
    n.i = match a.dw {
        Dir::L => c.i.saturating_sub(1),
        Dir::R => c.i + 1,
    };
    n.j = match a.dr {
        Dir::L => c.j.saturating_sub(1),
        Dir::R if r == 0 => c.j,
        Dir::R => c.j + 1,
    };
    let mut made = None;
    if spec.is_move[c.state] {
        n.run.push(1);
        n.run.extend_from_slice(&c.work[..c.i]);
        made = Some(c.pending_move(spec));
    }
    for m in env {
        n.run.push(2);
        n.run.extend(spec.encode_move(m)?);
    }
    Ok((n, made))
}

/// A move with the cycle it was made on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimedMove {
    pub machine: bool,
    pub mv: String,
    pub timestamp: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HpmMeter {
    pub timestamp: usize,
    pub size: usize,
    pub background: usize,
    pub timecost: usize,
    /// work cells visited by then
    pub space: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TraceRow {
    pub cycle: usize,
    pub state: String,
    pub i: usize,
    pub j: usize,
    /// what was appended to the run tape on this cycle
    pub delta: String,
}

impl fmt::Display for TraceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {} {}", self.cycle, self.state, self.i, self.j, if self.delta.is_empty() { "-" } else { &self.delta })
    }
}

#[derive(Clone, Debug)]
pub struct HpmRun {
    pub moves: Vec<TimedMove>,
    /// one per machine move
    pub meters: Vec<HpmMeter>,
    pub trace: Vec<TraceRow>,
    pub last: Configuration,
    pub cycles: usize,
    /// greatest number of work cells visited at any point
    pub space: usize,
    /// the fuel ran out while the script still had moves left
    pub fuel_exhausted: bool,
}

impl HpmRun {
    /// Machine moves whose size or timecost exceeds `h(background)`.
    pub fn time_violations(&self, h: &ExplicitPolyFn) -> Vec<HpmMeter> {
        self.meters
            .iter()
            .filter(|m| {
                let bound = h.eval(&BigUint::from(m.background));
                BigUint::from(m.size) > bound || BigUint::from(m.timecost) > bound
            })
            .cloned()
            .collect()
    }

    pub fn trace_text(&self) -> String {
        self.trace.iter().map(|r| format!("{r}\n")).collect()
    }
}

/// Runs `fuel` cycles; `script` lists environment moves with the cycle on
/// which each is made.
pub fn run_hpm(spec: &HpmSpec, script: &[(usize, String)], fuel: usize) -> Result<HpmRun, HpmError> {
    let mut c = spec.initial();
    let mut moves: Vec<TimedMove> = Vec::new();
    let mut meters = Vec::new();
    let mut trace = Vec::new();
    let mut space = 1;
    for cycle in 0..fuel {
        let env: Vec<String> = script.iter().filter(|(t, _)| *t == cycle).map(|(_, m)| m.clone()).collect();
        let (next, made) = step(spec, &c, &env)?;
        if let Some(mv) = &made {
            // background and timecost look at moves made strictly earlier
            let background = moves.iter().filter(|m| !m.machine).map(|m| m.mv.chars().count()).max().unwrap_or(0);
            let last = moves.iter().map(|m| m.timestamp).filter(|&t| t < cycle).max().unwrap_or(0);
            meters.push(HpmMeter { timestamp: cycle, size: mv.chars().count(), background, timecost: cycle - last, space });
            moves.push(TimedMove { machine: true, mv: mv.clone(), timestamp: cycle });
        }
        for m in &env {
            moves.push(TimedMove { machine: false, mv: m.clone(), timestamp: cycle });
        }
        let delta: String = next.run[c.run.len()..].iter().map(|&s| spec.symbols[s]).collect();
        trace.push(TraceRow { cycle, state: spec.states[c.state].clone(), i: c.i, j: c.j, delta });
        c = next;
        space = space.max(c.i + 1);
    }
    let fuel_exhausted = script.iter().any(|(t, _)| *t >= fuel);
    Ok(HpmRun { moves, meters, trace, last: c, cycles: fuel, space, fuel_exhausted })
}

/// Configurations reached from the start under random environment moves.
pub fn reachable_configs(spec: &HpmSpec, seed: u64, count: usize, max_cycles: usize) -> Vec<Configuration> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let mut c = spec.initial();
        let len = rng.gen_range(0..=max_cycles);
        for _ in 0..len {
            let env: Vec<String> = if rng.gen_bool(0.2) {
                let n = rng.gen_range(1..=6);
                vec![(0..n).map(|_| if rng.gen_bool(0.5) { '1' } else { '0' }).collect()]
            } else {
                Vec::new()
            };
            c = step(spec, &c, &env).expect("bit moves are in every alphabet").0;
        }
        out.push(c);
    }
    out
}

/// The bundled sample machines, by name.
pub fn sample_machine(name: &str) -> Option<HpmSpec> {
    let text = match name {
        "writer" => include_str!("../../corpus/machines/writer.hpm"),
        "echo" => include_str!("../../corpus/machines/echo.hpm"),
        "counter" => include_str!("../../corpus/machines/counter.hpm"),
        _ => return None,
    };
    Some(HpmSpec::parse(text).expect("sample machines parse"))
}

pub const SAMPLE_MACHINES: [&str; 3] = ["writer", "echo", "counter"];

//! Live play sessions over a line-delimited JSON protocol.
//!
//! Every line is one object with a protocol version `v` and a `kind`:
//!
//! | kind           | direction | fields                                              |
//! |----------------|-----------|-----------------------------------------------------|
//! | `new-session`  | client    | `sentence` or `bundle`, optional `strict`           |
//! | `env-move`     | client    | `move`                                              |
//! | `end`          | client    | none; asks for the verdict                          |
//! | `state`        | server    | `formula`, `tree`, `options`, `meters`              |
//! | `machine-move` | server    | `move`                                              |
//! | `env-move`     | server    | `move`, echoing an accepted environment move        |
//! | `verdict`      | server    | `winner` (`⊤` or `⊥`), `reason`, `transcript`       |
//! | `error`        | server    | `text`                                              |
//!
//! A `state` message follows every accepted move and reflects the position
//! after it.

use crate::cl12::{search, Budget};
use crate::game::{adjudicate, format_transcript, GameState, LabMove, Player, Reason};
use crate::strategy::{compile_cl12, load_bundle, silent_strategy, Agent, Bundle, Strategy};
use crate::syntax::{parse_formula, BinOp, Formula, QuantOp, Sequent};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::mpsc;
use std::sync::Arc;
use std::thread;

pub const PROTOCOL_VERSION: u32 = 1;

/// Agent steps allowed between two environment moves.
const REPLY_BUDGET: usize = 256;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SessionMsg {
    NewSession {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sentence: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        bundle: Option<Bundle>,
        #[serde(default)]
        strict: bool,
    },
    State { formula: String, tree: Tree, options: Vec<MoveOption>, meters: Meters },
    EnvMove {
        #[serde(rename = "move")]
        mv: String,
    },
    MachineMove {
        #[serde(rename = "move")]
        mv: String,
    },
    End,
    Verdict { winner: String, reason: String, transcript: String },
    Error { text: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Envelope {
    pub v: u32,
    #[serde(flatten)]
    pub msg: SessionMsg,
}

impl SessionMsg {
    pub fn to_line(&self) -> String {
        serde_json::to_string(&Envelope { v: PROTOCOL_VERSION, msg: self.clone() }).expect("messages serialize")
    }

    pub fn from_line(line: &str) -> Result<Self, String> {
        let e: Envelope = serde_json::from_str(line).map_err(|e| format!("bad message: {e}"))?;
        if e.v != PROTOCOL_VERSION {
            return Err(format!("unsupported protocol version {}", e.v));
        }
        Ok(e.msg)
    }
}

/// A formula rendered as a tree. `prefix` is set on choice nodes that can
/// be moved on now, and `mover` says who moves there.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub op: String,
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mover: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Tree>,
}

pub fn formula_tree(f: &Formula) -> Tree {
    tree(f, Some(String::new()))
}

fn tree(f: &Formula, prefix: Option<String>) -> Tree {
    let text = f.to_string();
    let leaf = |op: &str| Tree { op: op.into(), text: text.clone(), prefix: None, mover: None, children: Vec::new() };
    match f {
        Formula::True | Formula::False | Formula::Lit(..) => leaf("atom"),
        Formula::Bin(op, a, b) => {
            let (kids, here) = if op.is_choice() {
                (None, prefix.clone())
            } else {
                (prefix.clone(), None)
            };
            let child = |k: &str, x: &Formula| tree(x, kids.as_ref().map(|p| format!("{p}{k}.")));
            Tree {
                op: op.symbol().into(),
                text,
                mover: here.as_ref().map(|_| mover(*op == BinOp::Meet)),
                prefix: here,
                children: vec![child("0", a), child("1", b)],
            }
        }
        Formula::Quant(op, x, body) => {
            let choice = matches!(op, QuantOp::Meet | QuantOp::Join);
            let (kids, here) = if choice { (None, prefix) } else { (prefix, None) };
            Tree {
                op: format!("{}{x}", op.symbol()),
                text,
                mover: here.as_ref().map(|_| mover(*op == QuantOp::Meet)),
                prefix: here,
                children: vec![tree(body, kids)],
            }
        }
    }
}

fn mover(meet: bool) -> String {
    if meet { Player::Bot } else { Player::Top }.symbol().to_string()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveOption {
    pub prefix: String,
    pub player: String,
    /// `true` for a numeral, `false` for a bit
    pub numeral: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Meters {
    pub background: usize,
    pub last_move_size: usize,
    /// the certificate evaluated at the background
    pub certificate: String,
    pub moves: usize,
}

/// One play between a client acting as environment and a strategy.
pub struct Session {
    strategy: Strategy,
    agent: Box<dyn Agent>,
    initial: GameState,
    state: GameState,
    run: Vec<LabMove>,
    background: usize,
    strict: bool,
    done: bool,
}

/// A strategy for a sentence: a compiled logical proof if one is found, and
/// otherwise the silent strategy for elementary sentences.
pub fn strategy_for_sentence(f: &Formula) -> Result<Strategy, String> {
    if !f.is_sentence() {
        return Err(format!("{f} has free variables"));
    }
    if let Some(p) = search(&Sequent::new(Vec::new(), f.clone()), &Budget::default()) {
        return compile_cl12(&p, Vec::new()).map_err(|e| e.to_string());
    }
    if f.is_elementary() {
        return Ok(silent_strategy(f.clone()));
    }
    Err(format!("no strategy found for {f}; supply a bundle"))
}

impl Session {
    pub fn new(strategy: Strategy, strict: bool) -> Self {
        let initial = GameState::new(strategy.game.clone());
        Session {
            agent: strategy.spawn(),
            strategy,
            state: initial.clone(),
            initial,
            run: Vec::new(),
            background: 0,
            strict,
            done: false,
        }
    }

    /// Opens a session from a `new-session` message; the replies include
    /// the machine's opening moves.
    pub fn open(msg: &SessionMsg) -> Result<(Session, Vec<SessionMsg>), String> {
        let SessionMsg::NewSession { sentence, bundle, strict } = msg else {
            return Err("expected new-session".into());
        };
        let strategy = match (sentence, bundle) {
            (Some(s), None) => strategy_for_sentence(&parse_formula(s).map_err(|e| e.to_string())?)?,
            (None, Some(b)) => load_bundle(b).map_err(|e| e.to_string())?,
            _ => return Err("new-session needs exactly one of sentence and bundle".into()),
        };
        let mut s = Session::new(strategy, *strict);
        let out = s.opening();
        Ok((s, out))
    }

    /// The initial state and whatever the machine does before any input.
    pub fn opening(&mut self) -> Vec<SessionMsg> {
        let mut out = vec![self.state_msg()];
        self.machine_turn(None, &mut out);
        out
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn run(&self) -> &[LabMove] {
        &self.run
    }

    pub fn transcript(&self) -> String {
        format_transcript(&self.run)
    }

    pub fn state_msg(&self) -> SessionMsg {
        let last = self.run.last().map_or(0, |m| m.mv.chars().count());
        SessionMsg::State {
            formula: self.state.formula.to_string(),
            tree: formula_tree(&self.state.formula),
            options: self
                .state
                .legal_moves()
                .into_iter()
                .map(|m| MoveOption { prefix: m.prefix, player: m.player.symbol().into(), numeral: m.numeral })
                .collect(),
            meters: Meters {
                background: self.background,
                last_move_size: last,
                certificate: self.strategy.certificate.eval(&BigUint::from(self.background)).to_string(),
                moves: self.run.len(),
            },
        }
    }

    fn verdict(&mut self, out: &mut Vec<SessionMsg>) {
        self.done = true;
        match adjudicate(&self.initial, &self.run) {
            Ok(v) => out.push(SessionMsg::Verdict {
                winner: v.winner.symbol().into(),
                reason: match v.reason {
                    Reason::IllegalMove { index, offender } => format!("illegal move #{index} by {}", offender.symbol()),
                    Reason::TerminalTruth => "final position is true".into(),
                    Reason::TerminalStructure => "final position decided by structure".into(),
                },
                transcript: self.transcript(),
            }),
            Err(e) => out.push(SessionMsg::Error { text: e.to_string() }),
        }
    }

    /// Lets the agent react to `env` and then run until it goes quiet.
    fn machine_turn(&mut self, env: Option<&str>, out: &mut Vec<SessionMsg>) {
        let mut input: Vec<String> = env.into_iter().map(str::to_string).collect();
        for _ in 0..REPLY_BUDGET {
            let moves = match self.agent.step(&input) {
                Ok(m) => m,
                Err(e) => {
                    out.push(SessionMsg::Error { text: e.to_string() });
                    return;
                }
            };
            input.clear();
            if moves.is_empty() {
                return;
            }
            for m in moves {
                let lm = LabMove::top(&m);
                let next = self.state.apply(&lm);
                self.run.push(lm);
                out.push(SessionMsg::MachineMove { mv: m });
                match next {
                    Ok(s) => {
                        self.state = s;
                        out.push(self.state_msg());
                    }
                    Err(_) => return self.verdict(out),
                }
            }
        }
    }

    pub fn handle(&mut self, msg: SessionMsg) -> Vec<SessionMsg> {
        let mut out = Vec::new();
        if self.done {
            out.push(SessionMsg::Error { text: "session is over".into() });
            return out;
        }
        match msg {
            SessionMsg::EnvMove { mv } => {
                let lm = LabMove::bot(&mv);
                match self.state.apply(&lm) {
                    Ok(s) => {
                        self.background = self.background.max(mv.chars().count());
                        self.run.push(lm);
                        self.state = s;
                        out.push(SessionMsg::EnvMove { mv: mv.clone() });
                        out.push(self.state_msg());
                        self.machine_turn(Some(&mv), &mut out);
                    }
                    Err(_) if self.strict => {
                        self.run.push(lm);
                        self.verdict(&mut out);
                    }
                    Err(_) => out.push(SessionMsg::Error { text: format!("illegal move {mv:?}; try again") }),
                }
            }
            SessionMsg::End => self.verdict(&mut out),
            other => out.push(SessionMsg::Error { text: format!("unexpected message {:?}", kind(&other)) }),
        }
        out
    }
}

fn kind(m: &SessionMsg) -> &'static str {
    match m {
        SessionMsg::NewSession { .. } => "new-session",
        SessionMsg::State { .. } => "state",
        SessionMsg::EnvMove { .. } => "env-move",
        SessionMsg::MachineMove { .. } => "machine-move",
        SessionMsg::End => "end",
        SessionMsg::Verdict { .. } => "verdict",
        SessionMsg::Error { .. } => "error",
    }
}

/// Connection state: no session until `new-session`, which may also
/// restart a finished one.
#[derive(Default)]
pub struct Connection {
    session: Option<Session>,
}

impl Connection {
    /// Handles one input line, returning the reply lines.
    pub fn handle_line(&mut self, line: &str) -> Vec<String> {
        let replies = match SessionMsg::from_line(line) {
            Err(text) => vec![SessionMsg::Error { text }],
            Ok(m @ SessionMsg::NewSession { .. }) => match Session::open(&m) {
                Ok((s, out)) => {
                    self.session = Some(s);
                    out
                }
                Err(text) => vec![SessionMsg::Error { text }],
            },
            Ok(m) => match &mut self.session {
                Some(s) => s.handle(m),
                None => vec![SessionMsg::Error { text: "no session; send new-session first".into() }],
            },
        };
        replies.iter().map(SessionMsg::to_line).collect()
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }
}

#[derive(Clone, Debug, Default)]
pub struct ServeOptions {
    /// finished sessions' transcripts go here
    pub log_dir: Option<PathBuf>,
}

/// Serves connections until the listener fails, one thread per connection.
pub fn serve(listener: TcpListener, opts: ServeOptions) -> io::Result<()> {
    let counter = Arc::new(AtomicU64::new(0));
    for stream in listener.incoming() {
        let stream = stream?;
        let opts = opts.clone();
        let counter = counter.clone();
        thread::spawn(move || {
            let _ = handle_connection(stream, &opts, &counter);
        });
    }
    Ok(())
}

fn handle_connection(stream: TcpStream, opts: &ServeOptions, counter: &AtomicU64) -> io::Result<()> {
    let mut writer = stream.try_clone()?;
    // a slow reader on the other end never stalls the play loop
    let (tx, rx) = mpsc::channel::<String>();
    let out = thread::spawn(move || {
        for line in rx {
            if writeln!(writer, "{line}").and_then(|_| writer.flush()).is_err() {
                break;
            }
        }
    });
    let mut conn = Connection::default();
    for line in BufReader::new(stream).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let was_done = conn.session().is_none_or(Session::is_done);
        for r in conn.handle_line(&line) {
            let _ = tx.send(r);
        }
        if let (Some(dir), Some(s)) = (&opts.log_dir, conn.session()) {
            if s.is_done() && !was_done {
                let n = counter.fetch_add(1, Ordering::SeqCst);
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join(format!("session-{n}.txt")), s.transcript())?;
            }
        }
    }
    drop(tx);
    let _ = out.join();
    Ok(())
}

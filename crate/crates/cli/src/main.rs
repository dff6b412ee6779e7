use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use clarith::cl12::{self, search, Budget};
use clarith::cla4::{check_cla4, parse_cla4, Cla4Options};
use clarith::game::{format_transcript, parse_transcript, GameState, Player};
use clarith::hpm::{reachable_configs, run_hpm, sample_machine, step, Codec, HpmSpec};
use clarith::service::{serve, strategy_for_sentence, ServeOptions, Session, SessionMsg};
use clarith::strategy::{extract, load_bundle, play, Bundle, RandomEnv, ScriptedEnv, Strategy};
use clarith::syntax::{parse_formula, parse_sequent};
use num_bigint::BigUint;
use std::io::{self, BufRead, Write};
use std::net::TcpListener;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "clarith", version, about = "Check CL12/CLA4 proofs, extract strategies and play them")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a proof file (.cl12 or .cla4); exit 0 iff it is accepted.
    Check {
        file: PathBuf,
        /// reject PA-justified lines
        #[arg(long)]
        no_pa: bool,
        /// reject steps whose stability was trusted rather than certified
        #[arg(long)]
        no_trusted: bool,
    },
    /// Search for a CL12 proof of a sequent such as "p ⊓ q ⟹ p".
    Search {
        sequent: String,
        #[arg(long, default_value_t = Budget::default().depth)]
        depth: usize,
    },
    /// Extract a strategy bundle from a CLA4 proof.
    Extract {
        file: PathBuf,
        /// where to write the bundle (default: stdout)
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Play a strategy against a scripted, random or human environment.
    Play(PlayArgs),
    /// Serve live sessions over TCP, one JSON message per line.
    Serve {
        #[arg(long, env = "CLARITH_PORT", default_value_t = 7474)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// directory for transcripts of finished sessions
        #[arg(long)]
        log_dir: Option<PathBuf>,
    },
    /// Run a machine and show its configuration codes.
    Codec(CodecArgs),
}

#[derive(Args)]
struct PlayArgs {
    /// bundle written by `extract`
    bundle: Option<PathBuf>,
    /// play a sentence directly instead of a bundle
    #[arg(long, conflicts_with = "bundle")]
    sentence: Option<String>,
    /// transcript whose B: lines are the environment's moves
    #[arg(long, group = "mode")]
    script: Option<PathBuf>,
    /// number of plays against a random environment
    #[arg(long, group = "mode")]
    random: Option<u64>,
    #[arg(long, group = "mode")]
    interactive: bool,
    #[arg(long, env = "CLARITH_SEED", default_value_t = 0)]
    seed: u64,
    /// greatest bit length of random numerals
    #[arg(long, default_value_t = 64)]
    bits: u64,
    #[arg(long, env = "CLARITH_TICKS", default_value_t = 10_000)]
    ticks: usize,
    /// an illegal interactive move loses instead of being retried
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct CodecArgs {
    /// a bundled machine (writer, echo, counter) or a machine file
    machine: String,
    #[arg(long, default_value_t = 10)]
    cycles: usize,
    /// environment move as CYCLE:MOVE, repeatable
    #[arg(long = "env")]
    env: Vec<String>,
    /// print the cycle-by-cycle trace
    #[arg(long)]
    trace: bool,
    /// decode a configuration code given in binary instead of running
    #[arg(long)]
    decode: Option<String>,
    /// compare the code-level successor with simulation on N random configurations
    #[arg(long)]
    verify: Option<usize>,
    #[arg(long, env = "CLARITH_SEED", default_value_t = 0)]
    seed: u64,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn read(p: &Path) -> Result<String> {
    std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::Check { file, no_pa, no_trusted } => check(&file, no_pa, no_trusted),
        Cmd::Search { sequent, depth } => {
            let x = parse_sequent(&sequent)?;
            match search(&x, &Budget { depth, ..Budget::default() }) {
                Some(p) => {
                    print!("{}", p.to_text());
                    Ok(true)
                }
                None => {
                    println!("none");
                    Ok(false)
                }
            }
        }
        Cmd::Extract { file, out } => {
            let proof = parse_cla4(&read(&file)?, file.parent())?;
            let s = extract(&proof)?;
            let json = serde_json::to_string_pretty(&Bundle::new(&proof, &s))?;
            match out {
                Some(p) => {
                    std::fs::write(&p, json + "\n").with_context(|| format!("writing {}", p.display()))?;
                    println!("game: {}", s.game);
                    println!("certificate:\n{}", s.certificate.to_text());
                }
                None => println!("{json}"),
            }
            Ok(true)
        }
        Cmd::Play(args) => play_cmd(args),
        Cmd::Serve { port, host, log_dir } => {
            let listener = TcpListener::bind((host.as_str(), port))?;
            eprintln!("listening on {}", listener.local_addr()?);
            serve(listener, ServeOptions { log_dir })?;
            Ok(true)
        }
        Cmd::Codec(args) => codec(args),
    }
}

fn check(file: &Path, no_pa: bool, no_trusted: bool) -> Result<bool> {
    let text = read(file)?;
    let mut opts = Cla4Options { allow_pa: !no_pa, ..Cla4Options::default() };
    opts.cl12.allow_trusted = !no_trusted;
    if file.extension().is_some_and(|e| e == "cl12") {
        let proof = cl12::parse_proof(&text, file.parent())?;
        let report = cl12::Checker::new(opts.cl12).check_proof(&proof);
        match &report.first_failure {
            None => println!(
                "ok: {} lines, {} trusted stability, concludes {}",
                proof.lines.len(),
                report.trusted_steps.len(),
                proof.conclusion().map(|s| s.to_string()).unwrap_or_default()
            ),
            Some((n, msg)) => println!("REJECTED at line {n}: {msg}"),
        }
        return Ok(report.ok);
    }
    let proof = parse_cla4(&text, file.parent())?;
    let report = check_cla4(&proof, &opts);
    for l in &report.lines {
        match &l.result {
            Ok(s) => println!("{:>6}  {s}", l.label),
            Err(e) => println!("{:>6}  REJECTED: {e}", l.label),
        }
    }
    println!("{}", report.summary());
    Ok(report.ok)
}

fn load_strategy(args: &PlayArgs) -> Result<Strategy> {
    match (&args.bundle, &args.sentence) {
        (Some(p), None) => {
            let b: Bundle = serde_json::from_str(&read(p)?).context("parsing bundle")?;
            Ok(load_bundle(&b)?)
        }
        (None, Some(s)) => strategy_for_sentence(&parse_formula(s)?).map_err(anyhow::Error::msg),
        _ => bail!("give a bundle file or --sentence"),
    }
}

fn play_cmd(args: PlayArgs) -> Result<bool> {
    let s = load_strategy(&args)?;
    let initial = GameState::new(s.game.clone());
    if let Some(p) = &args.script {
        let moves: Vec<String> = parse_transcript(&read(p)?)?
            .into_iter()
            .filter(|m| m.player == Player::Bot)
            .map(|m| m.mv)
            .collect();
        let o = play(&s, &initial, &mut ScriptedEnv::new(moves), args.ticks);
        print!("{}", format_transcript(&o.run));
        for m in &o.meters {
            println!("# move {} by {}: size {}, background {}", m.index, m.player.symbol(), m.size, m.background);
        }
        if let Some(f) = &o.fault {
            println!("# fault: {f}");
        }
        match &o.verdict {
            Some(v) => println!("# winner {} ({:?})", v.winner.symbol(), v.reason),
            None => println!("# no verdict"),
        }
        return Ok(o.machine_won() && o.certificate_violations(&s).is_empty());
    }
    if let Some(n) = args.random {
        let (mut wins, mut violations, mut stalled) = (0, 0, 0);
        for k in 0..n {
            let mut env = RandomEnv::new(args.seed + k, args.bits);
            let o = play(&s, &initial, &mut env, args.ticks);
            wins += o.machine_won() as u64;
            violations += o.certificate_violations(&s).len();
            stalled += o.stalled as u64;
        }
        println!("plays {n}, machine wins {wins}, certificate violations {violations}, stalled {stalled}");
        return Ok(wins == n && violations == 0);
    }
    if args.interactive {
        return interactive(s, args.strict);
    }
    bail!("choose one of --script, --random or --interactive")
}

fn interactive(s: Strategy, strict: bool) -> Result<bool> {
    println!("game: {}", s.game);
    println!("enter your moves, one per line; `end` asks for the verdict");
    let mut session = Session::new(s, strict);
    let mut out = session.opening();
    let stdin = io::stdin();
    let mut lines = stdin.lock().lines();
    loop {
        let mut won = None;
        for m in out.drain(..) {
            match m {
                SessionMsg::State { formula, meters, .. } => {
                    println!("  position: {formula}   [background {}, certificate {}]", meters.background, meters.certificate)
                }
                SessionMsg::MachineMove { mv } => println!("T:{mv}"),
                SessionMsg::EnvMove { mv } => println!("B:{mv}"),
                SessionMsg::Verdict { winner, reason, .. } => {
                    println!("winner {winner}: {reason}");
                    won = Some(winner == Player::Top.symbol());
                }
                SessionMsg::Error { text } => println!("! {text}"),
                _ => {}
            }
        }
        if let Some(w) = won {
            return Ok(w);
        }
        print!("> ");
        io::stdout().flush()?;
        let msg = match lines.next().transpose()? {
            None => SessionMsg::End,
            Some(l) if l.trim() == "end" => SessionMsg::End,
            Some(l) => SessionMsg::EnvMove { mv: l.trim().to_string() },
        };
        out = session.handle(msg);
    }
}

fn machine(name: &str) -> Result<HpmSpec> {
    match sample_machine(name) {
        Some(m) => Ok(m),
        None => Ok(HpmSpec::parse(&read(Path::new(name))?)?),
    }
}

fn codec(args: CodecArgs) -> Result<bool> {
    let m = machine(&args.machine)?;
    let c = Codec::new(&m);
    println!("symbol width {}", c.width());
    if let Some(bits) = &args.decode {
        let code = BigUint::parse_bytes(bits.as_bytes(), 2).context("codes are binary numerals")?;
        let cfg = c.decode(&code)?;
        println!("state {}", m.states()[cfg.state]);
        println!("work {:?} head {}", cfg.work.iter().map(|&s| m.symbols()[s]).collect::<String>(), cfg.i);
        println!("run {:?} head {}", cfg.run_text(&m), cfg.j);
        return Ok(true);
    }
    if let Some(n) = args.verify {
        let mut bad = 0;
        for cfg in reachable_configs(&m, args.seed, n, 40) {
            let code = c.encode(&cfg);
            let direct = c.encode(&step(&m, &cfg, &[])?.0);
            if c.decode(&code).ok().as_ref() != Some(&cfg) || c.successor(&code)? != direct {
                bad += 1;
            }
        }
        println!("configurations {n}, disagreements {bad}");
        return Ok(bad == 0);
    }
    let mut script = Vec::new();
    for e in &args.env {
        let (t, mv) = e.split_once(':').context("--env takes CYCLE:MOVE")?;
        script.push((t.parse::<usize>().context("bad cycle")?, mv.to_string()));
    }
    let r = run_hpm(&m, &script, args.cycles)?;
    if args.trace {
        print!("{}", r.trace_text());
    }
    for (mv, meter) in r.moves.iter().filter(|m| m.machine).zip(&r.meters) {
        println!(
            "move {:?} at cycle {}: size {}, background {}, timecost {}, space {}",
            mv.mv, meter.timestamp, meter.size, meter.background, meter.timecost, meter.space
        );
    }
    println!("run tape {}", r.last.run_text(&m));
    println!("code {}", c.encode(&r.last).to_str_radix(2));
    Ok(true)
}

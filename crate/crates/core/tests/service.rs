mod common;

use clarith::game::parse_transcript;
use clarith::service::*;
use clarith::strategy::{extract, Bundle};
use common::cla4_corpus;
use std::io::{BufRead, BufReader, Write};
use std::net::{TcpListener, TcpStream};
use std::time::Duration;

fn onesuc_bundle() -> Bundle {
    let p = cla4_corpus("example_11_2.cla4");
    Bundle::new(&p, &extract(&p).unwrap())
}

fn kinds(lines: &[String]) -> Vec<String> {
    lines
        .iter()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).unwrap()["kind"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn wire_format() {
    assert_eq!(SessionMsg::EnvMove { mv: "101".into() }.to_line(), r#"{"v":1,"kind":"env-move","move":"101"}"#);
    assert_eq!(SessionMsg::End.to_line(), r#"{"v":1,"kind":"end"}"#);
    let m = SessionMsg::from_line(r#"{"v":1,"kind":"new-session","sentence":"0=0"}"#).unwrap();
    assert_eq!(m, SessionMsg::NewSession { sentence: Some("0=0".into()), bundle: None, strict: false });
    assert!(SessionMsg::from_line(r#"{"v":2,"kind":"end"}"#).unwrap_err().contains("version"));
    assert!(SessionMsg::from_line(r#"{"v":1,"kind":"resign"}"#).is_err());
    assert!(SessionMsg::from_line("not json").is_err());
}

#[test]
fn every_kind_round_trips() {
    let msgs = vec![
        SessionMsg::NewSession { sentence: None, bundle: Some(onesuc_bundle()), strict: true },
        SessionMsg::EnvMove { mv: "0.1".into() },
        SessionMsg::MachineMove { mv: "1.11".into() },
        SessionMsg::End,
        SessionMsg::Verdict { winner: "⊤".into(), reason: "final position is true".into(), transcript: "B:1\nT:11\n".into() },
        SessionMsg::Error { text: "x".into() },
    ];
    for m in msgs {
        assert_eq!(SessionMsg::from_line(&m.to_line()).unwrap(), m);
    }
}

#[test]
fn state_tree_marks_movable_nodes() {
    let t = formula_tree(&clarith::syntax::parse_formula("(0=0 ⊓ 0=1) → (10=11 ⊓ 10=10)").unwrap());
    let mut movable = Vec::new();
    fn walk(t: &Tree, out: &mut Vec<(String, String)>) {
        if let (Some(p), Some(m)) = (&t.prefix, &t.mover) {
            out.push((p.clone(), m.clone()));
        }
        t.children.iter().for_each(|c| walk(c, out));
    }
    walk(&t, &mut movable);
    movable.sort();
    assert_eq!(movable, [("0.".to_string(), "⊤".to_string()), ("1.".to_string(), "⊥".to_string())]);
}

#[test]
fn a_bundle_session() {
    let mut c = Connection::default();
    let open = SessionMsg::NewSession { sentence: None, bundle: Some(onesuc_bundle()), strict: false }.to_line();
    assert_eq!(kinds(&c.handle_line(&open)), ["state"]);
    let r = c.handle_line(&SessionMsg::EnvMove { mv: "101".into() }.to_line());
    assert_eq!(kinds(&r), ["env-move", "state", "machine-move", "state"]);
    assert_eq!(SessionMsg::from_line(&r[2]).unwrap(), SessionMsg::MachineMove { mv: "1011".into() });
    let SessionMsg::State { meters, options, .. } = SessionMsg::from_line(&r[3]).unwrap() else { panic!() };
    assert_eq!(meters.background, 3);
    assert_eq!(meters.last_move_size, 4);
    assert_eq!(meters.moves, 2);
    assert!(options.is_empty());
    let v = c.handle_line(&SessionMsg::End.to_line());
    let SessionMsg::Verdict { winner, transcript, .. } = SessionMsg::from_line(&v[0]).unwrap() else { panic!() };
    assert_eq!(winner, "⊤");
    assert_eq!(transcript, "B:101\nT:1011\n");
    assert_eq!(kinds(&c.handle_line(&SessionMsg::End.to_line())), ["error"]);
}

#[test]
fn illegal_moves_strict_and_lenient() {
    for strict in [false, true] {
        let mut c = Connection::default();
        let open = SessionMsg::NewSession { sentence: Some("⊓x(x=x)".into()), bundle: None, strict }.to_line();
        c.handle_line(&open);
        let r = c.handle_line(&SessionMsg::EnvMove { mv: "0.1".into() }.to_line());
        if strict {
            let SessionMsg::Verdict { winner, reason, .. } = SessionMsg::from_line(&r[0]).unwrap() else { panic!() };
            assert_eq!(winner, "⊤");
            assert!(reason.contains("illegal"));
        } else {
            assert_eq!(kinds(&r), ["error"]);
            let r = c.handle_line(&SessionMsg::EnvMove { mv: "1".into() }.to_line());
            assert_eq!(kinds(&r), ["env-move", "state"]);
            let v = c.handle_line(&SessionMsg::End.to_line());
            let SessionMsg::Verdict { winner, .. } = SessionMsg::from_line(&v[0]).unwrap() else { panic!() };
            assert_eq!(winner, "⊤");
        }
    }
}

#[test]
fn sentences_without_strategies_are_refused() {
    let mut c = Connection::default();
    let r = c.handle_line(&SessionMsg::NewSession { sentence: Some("⊓x⊔y(y=x1)".into()), bundle: None, strict: false }.to_line());
    assert_eq!(kinds(&r), ["error"]);
    assert_eq!(kinds(&c.handle_line(&SessionMsg::End.to_line())), ["error"]);
    // a logically valid sentence gets a compiled strategy
    let r = c.handle_line(&SessionMsg::NewSession { sentence: Some("⊓x(x=0 ⊔ x≠0) → ⊓x(x=0 ⊔ x≠0)".into()), bundle: None, strict: false }.to_line());
    assert_eq!(kinds(&r), ["state"]);
    let r = c.handle_line(&SessionMsg::EnvMove { mv: "1.0".into() }.to_line());
    let r = kinds(&r);
    assert_eq!(&r[..2], ["env-move", "state"]);
    assert!(r.contains(&"machine-move".to_string()));
}

fn read_until_verdict(rd: &mut impl BufRead) -> Vec<String> {
    let mut out = Vec::new();
    loop {
        let mut l = String::new();
        assert!(rd.read_line(&mut l).unwrap() > 0, "server hung up");
        let done = l.contains("\"verdict\"");
        out.push(l.trim_end().to_string());
        if done {
            return out;
        }
    }
}

#[test]
fn tcp_server_plays_and_logs() {
    let dir = std::env::temp_dir().join(format!("clarith-serve-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let opts = ServeOptions { log_dir: Some(dir.clone()) };
    std::thread::spawn(move || serve(listener, opts));

    let mut clients = Vec::new();
    for x in ["1", "1101"] {
        let s = TcpStream::connect(addr).unwrap();
        s.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
        clients.push((x, s));
    }
    for (x, s) in &mut clients {
        let lines = [
            SessionMsg::NewSession { sentence: None, bundle: Some(onesuc_bundle()), strict: true }.to_line(),
            SessionMsg::EnvMove { mv: x.to_string() }.to_line(),
            SessionMsg::End.to_line(),
        ];
        for l in lines {
            writeln!(s, "{l}").unwrap();
        }
    }
    for (x, s) in clients {
        let got = read_until_verdict(&mut BufReader::new(s));
        let SessionMsg::Verdict { winner, transcript, .. } = SessionMsg::from_line(got.last().unwrap()).unwrap() else { panic!() };
        assert_eq!(winner, "⊤");
        assert_eq!(transcript, format!("B:{x}\nT:{x}1\n"));
    }
    // logs are written after the verdict is queued; give the writer a moment
    let mut logs = Vec::new();
    for _ in 0..100 {
        logs = std::fs::read_dir(&dir).map(|d| d.flatten().map(|e| e.path()).collect()).unwrap_or_default();
        if logs.len() == 2 {
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    assert_eq!(logs.len(), 2);
    for p in logs {
        // a logged transcript replays as a script
        let run = parse_transcript(&std::fs::read_to_string(p).unwrap()).unwrap();
        assert_eq!(run.len(), 2);
    }
    let _ = std::fs::remove_dir_all(&dir);
}

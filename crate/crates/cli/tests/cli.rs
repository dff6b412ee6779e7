use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::Duration;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_clarith"))
}

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(name)
}

fn run(args: &[&str]) -> (i32, String, String) {
    let Output { status, stdout, stderr } = bin().args(args).env_remove("CLARITH_SEED").output().unwrap();
    (status.code().unwrap(), String::from_utf8(stdout).unwrap(), String::from_utf8(stderr).unwrap())
}

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("clarith-cli-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d.join(name)
}

#[test]
fn check_cl12() {
    let (code, out, _) = run(&["check", corpus("example_8_1.cl12").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "ok: 10 lines, 0 trusted stability, concludes ∀x(cube(x)=x×x×x), ⊓x⊓y⊔z(z=x×y) ∘– ⊓x⊔y(y=cube(x))\n"
    );
}

#[test]
fn check_cla4_audit() {
    let (code, out, _) = run(&["check", corpus("example_11_4.cla4").to_str().unwrap()]);
    assert_eq!(code, 0);
    let want = "     I  LC, attached proof
    II  PA, trusted
   III  PA, trusted
    IV  LC, attached proof
     V  PA, trusted
    VI  LC, attached proof
   VII  induction
ok: 7 lines, 3 PA-trusted, 0 trusted stability, extraction-ready: yes
";
    assert_eq!(out, want);
    let (code, out, _) = run(&["check", "--no-pa", corpus("example_11_4.cla4").to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.ends_with("REJECTED: 7 lines, 0 PA-trusted, 0 trusted stability, extraction-ready: no\n"), "{out}");
}

#[test]
fn check_reports_the_failing_line() {
    let text = std::fs::read_to_string(corpus("example_8_1.cl12")).unwrap();
    let bad = text.replace("all-choose:a3:t", "all-choose:a3:r");
    let p = scratch("bad.cl12");
    std::fs::write(&p, bad).unwrap();
    let (code, out, _) = run(&["check", p.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.starts_with("REJECTED at line 5: "), "{out}");
}

#[test]
fn search_command() {
    let (code, out, _) = run(&["search", "⟹ ⊓x p(x) → ∀x p(x)"]);
    assert_eq!((code, out.as_str()), (1, "none\n"));
    let (code, out, _) = run(&["search", "⟹ ∀x p(x) → ⊓x p(x)"]);
    assert_eq!(code, 0);
    assert_eq!(out, "1. ∘– ∀x p(x) → p(x_1) ; wait\n2. ∘– ∀x p(x) → ⊓x p(x) ; wait ; premises=1\n");
    let (code, _, err) = run(&["search", "⟹ ⊓x("]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"), "{err}");
}

#[test]
fn extract_then_play_a_script() {
    let bundle = scratch("onesuc.json");
    let (code, out, _) = run(&["extract", corpus("example_11_2.cla4").to_str().unwrap(), "-o", bundle.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.starts_with("game: ⊓x⊔y(y=x1)\ncertificate:\n"), "{out}");
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&bundle).unwrap()).unwrap();
    assert_eq!(json["version"], 1);
    assert_eq!(json["game"], "⊓x⊔y(y=x1)");

    let script = scratch("script.txt");
    std::fs::write(&script, "B:101\n").unwrap();
    let (code, out, _) = run(&["play", bundle.to_str().unwrap(), "--script", script.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(
        out,
        "B:101\nT:1011\n# move 0 by ⊥: size 3, background 3\n# move 1 by ⊤: size 4, background 3\n# winner ⊤ (TerminalTruth)\n"
    );
}

#[test]
fn random_plays_are_seeded() {
    let a = run(&["play", "--sentence", "⊓x(x=x)", "--random", "5", "--seed", "4"]);
    let b = bin().args(["play", "--sentence", "⊓x(x=x)", "--random", "5"]).env("CLARITH_SEED", "4").output().unwrap();
    assert_eq!(a.0, 0);
    assert_eq!(a.1, String::from_utf8(b.stdout).unwrap());
    assert_eq!(a.1, "plays 5, machine wins 5, certificate violations 0, stalled 0\n");
}

#[test]
fn codec_command() {
    let (code, out, _) = run(&["codec", "writer", "--cycles", "3", "--trace"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("symbol width 8\n0 s 0 0 -\n1 m 1 0 ⊤1\n2 i 0 0 -\n"), "{out}");
    assert!(out.contains("run tape ⊤1\n"));
    let (code, out, _) = run(&["codec", "counter", "--verify", "100"]);
    assert_eq!(code, 0);
    assert!(out.ends_with("configurations 100, disagreements 0\n"), "{out}");
    let (code, _, _) = run(&["codec", "nosuch"]);
    assert_eq!(code, 2);
}

#[test]
fn missing_files_are_errors() {
    let (code, _, err) = run(&["check", "/nonexistent.cl12"]);
    assert_eq!(code, 2);
    assert!(err.contains("nonexistent"));
}

#[test]
fn serve_speaks_the_protocol() {
    let port = {
        let l = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
        l.local_addr().unwrap().port()
    };
    let mut child = bin()
        .args(["serve", "--host", "127.0.0.1", "--port", &port.to_string()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let mut stream = None;
    for _ in 0..100 {
        if let Ok(s) = TcpStream::connect(("127.0.0.1", port)) {
            stream = Some(s);
            break;
        }
        std::thread::sleep(Duration::from_millis(50));
    }
    let mut s = stream.expect("server came up");
    s.set_read_timeout(Some(Duration::from_secs(20))).unwrap();
    writeln!(s, r#"{{"v":1,"kind":"new-session","sentence":"⊓x(x=x)"}}"#).unwrap();
    writeln!(s, r#"{{"v":1,"kind":"env-move","move":"11"}}"#).unwrap();
    writeln!(s, r#"{{"v":1,"kind":"end"}}"#).unwrap();
    let mut kinds = Vec::new();
    let mut last = serde_json::Value::Null;
    for line in BufReader::new(s).lines() {
        let v: serde_json::Value = serde_json::from_str(&line.unwrap()).unwrap();
        kinds.push(v["kind"].as_str().unwrap().to_string());
        if v["kind"] == "verdict" {
            last = v;
            break;
        }
    }
    child.kill().unwrap();
    let _ = child.wait();
    assert_eq!(kinds, ["state", "env-move", "state", "verdict"]);
    assert_eq!(last["winner"], "⊤");
    assert_eq!(last["transcript"], "B:11\n");
}

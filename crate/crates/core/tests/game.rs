mod common;

use clarith::game::*;
use clarith::syntax::parse_formula;
use common::random_formula;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn example_3_4() -> GameState {
    GameState::new(parse_formula("(0=0 ⊓ 0=1) → (10=11 ⊓ 10=10)").unwrap())
}

fn show(run: &Run) -> String {
    run.iter().map(|m| format!("{}{}", m.player.symbol(), m.mv)).collect::<Vec<_>>().join(",")
}

#[test]
fn example_3_4_has_thirteen_runs() {
    let g = example_3_4();
    let runs = enumerate_legal_runs(&g, 0);
    assert_eq!(runs.len(), 13);
    let mut lost: Vec<String> = runs
        .iter()
        .filter(|r| adjudicate(&g, r).unwrap().winner == Player::Bot)
        .map(show)
        .collect();
    lost.sort();
    let mut want = vec![
        show(&vec![LabMove::bot("1.0")]),
        show(&vec![LabMove::top("0.0"), LabMove::bot("1.0")]),
        show(&vec![LabMove::bot("1.0"), LabMove::top("0.0")]),
    ];
    want.sort();
    assert_eq!(lost, want);
}

#[test]
fn moves_in_the_wrong_place_are_illegal() {
    let g = example_3_4();
    // ⊤ resolves the antecedent ⊓ (it is a ⊔ after negation), ⊥ the consequent
    assert!(g.is_legal(&LabMove::top("0.1")));
    assert!(!g.is_legal(&LabMove::bot("0.1")));
    assert!(!g.is_legal(&LabMove::top("1.0")));
    assert!(!g.is_legal(&LabMove::bot("1.2")));
    let v = adjudicate(&g, &[LabMove::bot("1.1"), LabMove::bot("1.0")]).unwrap();
    assert_eq!(v, Verdict { winner: Player::Top, reason: Reason::IllegalMove { index: 1, offender: Player::Bot } });
}

#[test]
fn numeral_moves() {
    let g = GameState::new(parse_formula("⊓x⊔y(y=x′)").unwrap());
    let run = [LabMove::bot("101"), LabMove::top("110")];
    assert_eq!(adjudicate(&g, &run).unwrap().winner, Player::Top);
    let run = [LabMove::bot("101"), LabMove::top("111")];
    assert_eq!(adjudicate(&g, &run).unwrap().winner, Player::Bot);
    // a leading zero is not a numeral
    assert!(!g.is_legal(&LabMove::bot("0101")));
    // silence on ⊓ is a win for ⊤, silence on ⊔ a loss
    assert_eq!(adjudicate(&g, &[]).unwrap().winner, Player::Top);
    assert_eq!(adjudicate(&g, &[LabMove::bot("1")]).unwrap().winner, Player::Bot);
}

#[test]
fn transcripts_round_trip() {
    let runs = enumerate_legal_runs(&example_3_4(), 0);
    for r in runs {
        assert_eq!(parse_transcript(&format_transcript(&r)).unwrap(), r);
    }
    assert!(parse_transcript("X:1\n").is_err());
}

fn random_run(g: &GameState, rng: &mut impl Rng) -> Run {
    let mut st = g.clone();
    let mut run = Vec::new();
    loop {
        let fams = st.legal_moves();
        if fams.is_empty() || rng.gen_bool(0.2) {
            return run;
        }
        let fam = &fams[rng.gen_range(0..fams.len())];
        let opts = fam.instances(5);
        let m = LabMove { player: fam.player, mv: opts[rng.gen_range(0..opts.len())].clone() };
        st = st.apply(&m).unwrap();
        run.push(m);
    }
}

proptest! {
    #[test]
    fn prefixation_splits_runs(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = random_formula(&mut rng, 4).closure(clarith::syntax::QuantOp::All);
        let g = GameState::with_interp(f, Interpretation::standard().with_domain(3).with_table("p", vec![vec![]]).with_table("q", vec![]).with_table("r", vec![vec![1]]));
        let run = random_run(&g, &mut rng);
        let k = rng.gen_range(0..=run.len());
        let mut mid = g.clone();
        for m in &run[..k] {
            mid = mid.apply(m).unwrap();
        }
        let whole = adjudicate(&g, &run);
        prop_assert!(whole.is_ok(), "{:?}", whole);
        let rest = adjudicate(&mid, &run[k..]);
        prop_assert_eq!(whole.map(|v| v.winner).ok(), rest.map(|v| v.winner).ok());
    }

    #[test]
    fn every_legal_move_lowers_depth(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = GameState::new(random_formula(&mut rng, 4));
        for fam in g.legal_moves() {
            for mv in fam.instances(2) {
                let next = g.apply(&LabMove { player: fam.player, mv }).unwrap();
                prop_assert!(next.depth() < g.depth());
            }
        }
        prop_assert_eq!(g.legal_moves().is_empty(), g.formula.is_elementary());
    }
}

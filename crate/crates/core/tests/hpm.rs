use clarith::hpm::*;
use clarith::polyfun::{Builder, ExplicitPolyFn};
use num_bigint::BigUint;
use proptest::prelude::*;

fn machines() -> Vec<HpmSpec> {
    SAMPLE_MACHINES.iter().map(|n| sample_machine(n).unwrap()).collect()
}

fn n(bits: &str) -> BigUint {
    BigUint::parse_bytes(bits.as_bytes(), 2).unwrap()
}

#[test]
fn appendix_spot_checks() {
    for m in machines() {
        let c = Codec::new(&m);
        let checks = c.checks("101").unwrap();
        let hats = c.hats("101").unwrap();
        assert!(c.is_e(&n("101"), &checks));
        assert!(c.is_d(&hats, &n("101")));
        assert!(!c.is_e(&n("100"), &checks));
        assert!(!c.is_d(&hats, &n("100")));
        // leading zero is not a numeral
        assert!(!c.is_d(&c.hats("01").unwrap(), &n("1")));
        assert!(c.is_d(&BigUint::default(), &BigUint::default()));
        assert!(c.is_n(&c.hats("1.0").unwrap(), &c.checks("1.0").unwrap()));
        assert!(!c.is_n(&c.hats("1.0").unwrap(), &c.checks("1.1").unwrap()));
    }
}

#[test]
fn concat_examples() {
    assert_eq!(concat_codes(&n("101"), &n("11")), n("10111"));
    assert_eq!(concat_codes(&n("101"), &BigUint::default()), n("101"));
    assert_eq!(concat_codes(&BigUint::default(), &n("11")), n("11"));
}

#[test]
fn concat_is_sequence_concatenation() {
    let m = sample_machine("echo").unwrap();
    let c = Codec::new(&m);
    let a = c.hats("10.").unwrap();
    let b = c.checks("0⊤1").unwrap();
    let mut syms = c.decode_seq(&a).unwrap();
    syms.extend(c.decode_seq(&b).unwrap());
    assert_eq!(c.encode_seq(&syms), concat_codes(&a, &b));
}

#[test]
fn code_length_is_width_times_symbols() {
    for m in machines() {
        let c = Codec::new(&m);
        for cfg in reachable_configs(&m, 3, 50, 30) {
            let code = c.encode(&cfg);
            let blocks = 1 + cfg.work.len() + 1 + cfg.run.len() + 1;
            assert_eq!(code.bits() as usize, c.width() * blocks);
            assert_eq!(c.width().count_ones(), 1);
        }
    }
}

#[test]
fn successor_agrees_with_step_on_reachable_configs() {
    for (k, m) in machines().iter().enumerate() {
        let c = Codec::new(m);
        for cfg in reachable_configs(m, 10 + k as u64, 1000, 40) {
            let code = c.encode(&cfg);
            assert_eq!(c.decode(&code).unwrap(), cfg);
            let (next, _) = step(m, &cfg, &[]).unwrap();
            assert_eq!(c.successor(&code).unwrap(), c.encode(&next));
            assert!(c.is_s(&code, &c.encode(&next)));
        }
    }
}

#[test]
fn head_predicates_match_decode() {
    let m = sample_machine("echo").unwrap();
    let c = Codec::new(&m);
    let run = run_hpm(&m, &[(0, "10110".into())], 5).unwrap();
    let code = c.encode(&run.last);
    // after four copying cycles the work head sits on cell 3
    assert!(c.is_i(&code, &BigUint::from(3u32)));
    assert!(c.is_j(&code, &BigUint::from(run.last.j)));
    assert!(c.is_m(&code, &BigUint::from(run.last.work.len())));
    assert!(!c.is_i(&code, &BigUint::from(2u32)));
}

#[test]
fn ill_formed_codes_are_rejected() {
    let m = sample_machine("writer").unwrap();
    let c = Codec::new(&m);
    let good = c.encode(&m.initial());
    assert!(c.is_c(&good));
    assert!(!c.is_c(&(&good + 1u32)));
    assert!(!c.is_c(&(&good >> 1)));
    assert!(!c.is_c(&c.hats("1").unwrap()));
    assert!(c.decode(&BigUint::from(5u32)).is_err());
}

#[test]
fn run_predicates() {
    let m = sample_machine("writer").unwrap();
    let c = Codec::new(&m);
    let c0 = m.initial();
    let c1 = step(&m, &c0, &[]).unwrap().0;
    let (z, x) = (c.encode(&c0), c.encode(&c1));
    assert_eq!(c.is_a(&z, &z, &BigUint::default(), 10), Truth::True);
    // c1 is in a move state
    assert_eq!(c.is_a(&z, &x, &BigUint::from(1u32), 10), Truth::False);
    assert_eq!(c.is_a_prime(&z, &BigUint::default(), 10), Truth::True);
    assert_eq!(c.is_a_prime(&z, &BigUint::from(1u32), 10), Truth::False);
    assert_eq!(c.is_b(&z, &x, 10), Truth::True);
    assert_eq!(c.is_b(&z, &z, 10), Truth::False);
    assert_eq!(c.is_a(&z, &z, &BigUint::from(100u32), 10), Truth::Unknown);
    // echo never moves without input
    let e = sample_machine("echo").unwrap();
    let ce = Codec::new(&e);
    let ze = ce.encode(&e.initial());
    assert_eq!(ce.is_b(&ze, &ze, 50), Truth::False);
    assert_eq!(ce.is_b(&ze, &ce.encode(&c1), 50), Truth::Unknown);
}

#[test]
fn step_orders_machine_move_first() {
    let m = sample_machine("writer").unwrap();
    let c1 = step(&m, &m.initial(), &[]).unwrap().0;
    let (c2, made) = step(&m, &c1, &["0".into(), "11".into()]).unwrap();
    assert_eq!(made.as_deref(), Some("1"));
    assert_eq!(c2.run_text(&m), "⊤1⊥0⊥11");
}

#[test]
fn quiet_non_move_state_keeps_run_tape() {
    let m = sample_machine("echo").unwrap();
    let c = Codec::new(&m);
    for cfg in reachable_configs(&m, 7, 200, 30) {
        if m.is_move_state(cfg.state) {
            continue;
        }
        let next = c.decode(&c.successor(&c.encode(&cfg)).unwrap()).unwrap();
        assert_eq!(next.run, cfg.run);
    }
}

#[test]
fn meters() {
    let echo = sample_machine("echo").unwrap();
    let r = run_hpm(&echo, &[(0, "10110".into())], 30).unwrap();
    assert_eq!(r.meters.len(), 1);
    assert_eq!(r.meters[0].background, 5);
    assert_eq!(r.meters[0].timecost, r.meters[0].timestamp);
    assert!(!r.fuel_exhausted);

    let writer = sample_machine("writer").unwrap();
    let r = run_hpm(&writer, &[], 20).unwrap();
    assert_eq!(r.meters[0].timecost, 1);

    // the counter's moves grow without a growing background
    let counter = sample_machine("counter").unwrap();
    let r = run_hpm(&counter, &[], 60).unwrap();
    let mut b = Builder::new();
    let y = b.var();
    let c = b.constant(&BigUint::from(10u32));
    let t = b.add(y, c);
    let h = ExplicitPolyFn::single(b.finish(t));
    assert!(!r.time_violations(&h).is_empty());
    let quiet = run_hpm(&echo, &[], 60).unwrap();
    assert!(quiet.time_violations(&ExplicitPolyFn::zero()).is_empty());
    assert!(run_hpm(&echo, &[(100, "1".into())], 10).unwrap().fuel_exhausted);
}

#[test]
fn spec_text_round_trips() {
    for m in machines() {
        let again = HpmSpec::parse(&m.to_text()).unwrap();
        assert_eq!(again, m);
        assert_eq!(again.code(), m.code());
    }
    assert!(HpmSpec::parse("states: s\nstart: s\nmove: s\n").is_err());
    assert!(HpmSpec::parse("states: s\nstart: s\ns * * -> s _ L L\n").is_err());
}

proptest! {
    #[test]
    fn decode_inverts_encode(seed in 0u64..10_000, which in 0usize..3) {
        let m = sample_machine(SAMPLE_MACHINES[which]).unwrap();
        let c = Codec::new(&m);
        for cfg in reachable_configs(&m, seed, 5, 40) {
            let code = c.encode(&cfg);
            prop_assert_eq!(c.decode(&code).unwrap(), cfg);
        }
    }

    #[test]
    fn simulation_is_deterministic(seed in 0u64..10_000, which in 0usize..3) {
        let m = sample_machine(SAMPLE_MACHINES[which]).unwrap();
        prop_assert_eq!(reachable_configs(&m, seed, 3, 30), reachable_configs(&m, seed, 3, 30));
    }
}

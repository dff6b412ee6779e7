use clarith::polyfun::*;
use num_bigint::BigUint;
use proptest::prelude::*;

fn big(v: u64) -> BigUint {
    BigUint::from(v)
}

fn square() -> ExplicitPolyFn {
    let mut b = Builder::new();
    let y = b.var();
    let r = b.mul(y, y);
    ExplicitPolyFn::single(b.finish(r))
}

fn cube() -> ExplicitPolyFn {
    let mut b = Builder::new();
    let y = b.var();
    let s = b.mul(y, y);
    let r = b.mul(s, y);
    ExplicitPolyFn::single(b.finish(r))
}

#[test]
fn figure_one_is_eighth_power() {
    let f = ExplicitPolyFn::single(figure1());
    let t = ExplicitPolyFn::single(figure1_tree());
    for y in 0..20u64 {
        assert_eq!(f.eval_u64(y), big(y).pow(8));
        assert_eq!(t.eval_u64(y), big(y).pow(8));
    }
    assert_eq!(figure1().size(), 4);
    assert_eq!(figure1_tree().size(), 15);
}

#[test]
fn figure_two_with_square_and_cube() {
    let f = compose(&figure2(), &[square(), cube()]).unwrap();
    for y in 0..10u64 {
        assert_eq!(f.eval_u64(y), (big(y).pow(2) + big(y).pow(3)).pow(3), "y={y}");
    }
}

#[test]
fn figure_two_over_figure_one() {
    let f = ExplicitPolyFn::new(vec![figure1(), figure1(), figure2()]).unwrap();
    for y in 0..3u64 {
        assert_eq!(f.eval_u64(y), (big(y).pow(8) * 2u32).pow(8));
    }
}

#[test]
fn sum_adds_four_nodes() {
    for (a, b) in [(square(), cube()), (ExplicitPolyFn::single(figure1()), ExplicitPolyFn::identity())] {
        let s = sum_bounds(&a, &b);
        assert_eq!(s.size(), a.size() + b.size() + 4);
        for y in 0..6u64 {
            assert_eq!(s.eval_u64(y), a.eval_u64(y) + b.eval_u64(y));
        }
    }
}

#[test]
fn stratification_is_enforced() {
    assert_eq!(ExplicitPolyFn::new(vec![figure2()]), Err(PolyError::Stratification { index: 1, letter: 2 }));
    assert!(ExplicitPolyFn::new(vec![]).is_err());
    assert!(compose(&figure2(), &[square()]).is_err());
    assert!(figure2().eval_closed(&big(1)).is_err());
}

#[test]
fn dag_and_tree_sizes() {
    // y^(2^k) by k shared squarings: k+1 nodes against 2^(k+1)-1
    for k in 1..40u32 {
        let mut b = Builder::new();
        let mut r = b.var();
        for _ in 0..k {
            r = b.mul(r, r);
        }
        let g = b.finish(r);
        assert_eq!(g.size(), k as usize + 1);
        assert_eq!(g.tree_size(), (BigUint::from(1u32) << (k + 1)) - 1u32);
    }
}

#[test]
fn iteration_is_linear_in_size() {
    let h = square();
    for n in 1..30 {
        let it = iterate_bounds(&h, n);
        // two nodes for the first copy, three for each one after
        assert_eq!(it.size(), h.size() + 3 * n - 1);
    }
    assert_eq!(iterate_bounds(&h, 5).eval_u64(2), big(2).pow(32));
}

#[test]
fn text_round_trip() {
    let f = compose(&figure2(), &[square(), cube()]).unwrap();
    assert_eq!(ExplicitPolyFn::parse(&f.to_text()).unwrap(), f);
    assert!(ExplicitPolyFn::parse("def f1\n0: mul(0,1)\nroot 0\n").is_err());
}

fn poly(seed: u64) -> ExplicitPolyFn {
    // a small random polynomial built from the bound helpers
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        s >> 33
    };
    let mut f = constant_bound(next() % 4);
    for _ in 0..(next() % 4) {
        f = match next() % 4 {
            0 => sum_bounds(&f, &ExplicitPolyFn::identity()),
            1 => scale_bounds(&f, next() % 3 + 1),
            2 => apply_bounds(&square(), &f),
            _ => sum_bounds(&f, &cube()),
        };
    }
    f
}

proptest! {
    #[test]
    fn bounds_are_monotone(seed in any::<u64>(), y in 0u64..50) {
        let f = poly(seed);
        prop_assert!(f.eval_u64(y) <= f.eval_u64(y + 1));
    }

    #[test]
    fn composition_is_application(seed in any::<u64>(), y in 0u64..30) {
        let g = poly(seed);
        let h = poly(seed ^ 0x9e37);
        prop_assert_eq!(apply_bounds(&g, &h).eval_u64(y), g.eval(&h.eval_u64(y)));
        prop_assert_eq!(sum_bounds(&g, &h).size(), g.size() + h.size() + 4);
    }
}

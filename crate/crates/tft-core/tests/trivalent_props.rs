mod common;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use tft_core::tensorlab::{r, C64};
use tft_core::trivalent::{
    beta4_sums, braid_phase, crossing, evaluate, evaluate_with, h_move, i_move, inner_product, reduce, reduce_with,
    resolve_crossings, DiagramSum, Morphism, TrivalentParams,
};
use tft_core::Error;

fn params(seed: u64) -> TrivalentParams {
    let mut g = rng(seed);
    if g.random_bool(0.3) {
        TrivalentParams::fibonacci()
    } else {
        TrivalentParams::so3(r(g.random_range(1.5..3.0)), r(g.random_range(0.5..1.5))).unwrap()
    }
}

/// A random product of local moves on `strands` strands.
fn random_morphism(seed: u64, strands: usize, len: usize) -> Morphism {
    let mut g = rng(seed);
    let pieces = [i_move(), h_move(), Morphism::cup_cap(), Morphism::identity(2)];
    let mut m = Morphism::identity(strands);
    for _ in 0..len {
        let piece = &pieces[g.random_range(0..pieces.len())];
        let at = g.random_range(0..=strands - 2);
        let layer = Morphism::identity(at).tensor(piece).tensor(&Morphism::identity(strands - 2 - at));
        m = layer.compose(&m).unwrap();
    }
    m
}

fn close(a: C64, b: C64) -> bool {
    (a - b).norm() < 1e-9 * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn closed_reduction_is_confluent(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = params(g.random());
        let strands = g.random_range(2..=4);
        let len = g.random_range(1..=12);
        let closed = random_morphism(g.random(), strands, len).trace().unwrap();
        let reference = match evaluate(&closed, &p) {
            Ok(v) => v,
            Err(Error::Irreducible(_)) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        for _ in 0..3 {
            let mut choose = |n: usize| g.random_range(0..n);
            let v = evaluate_with(&closed, &p, &mut choose).unwrap();
            prop_assert!(close(v, reference), "{v} vs {reference}");
        }
    }

    #[test]
    fn open_reduction_is_confluent(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = params(g.random());
        let m = random_morphism(g.random(), 2, g.random_range(1..=6));
        let fixed = reduce(&m.sum, &p).unwrap();
        let mut choose = |n: usize| g.random_range(0..n);
        let random = reduce_with(&m.sum, &p, &mut choose).unwrap();
        for beta in beta4_sums() {
            let a = inner_product(&beta, &fixed, &p).unwrap();
            let b = inner_product(&beta, &random, &p).unwrap();
            prop_assert!(close(a, b));
        }
    }

    #[test]
    fn reduction_preserves_inner_products(seed in any::<u64>()) {
        let mut g = rng(seed);
        let p = params(g.random());
        let m = random_morphism(g.random(), 2, g.random_range(1..=5));
        let reduced = reduce(&m.sum, &p).unwrap();
        for beta in beta4_sums() {
            let a = inner_product(&beta, &m.sum, &p).unwrap();
            let b = inner_product(&beta, &reduced, &p).unwrap();
            prop_assert!(close(a, b));
        }
    }
}

#[test]
fn reidemeister_two_on_test_vectors() {
    let p = TrivalentParams::fibonacci();
    let x = Morphism::new(2, 2, resolve_crossings(&crossing().sum, braid_phase())).unwrap();
    let both = x.dagger().compose(&x).unwrap();
    let id = Morphism::identity(2);
    for v in [id.clone(), Morphism::cup_cap(), i_move(), h_move()] {
        let lhs = reduce(&both.compose(&v).unwrap().sum, &p).unwrap();
        for beta in beta4_sums() {
            let a = inner_product(&beta, &lhs, &p).unwrap();
            let b = inner_product(&beta, &v.sum, &p).unwrap();
            assert!(close(a, b), "{a} vs {b}");
        }
    }
}

#[test]
fn fibonacci_conditions_hold() {
    let (a, b) = TrivalentParams::fibonacci().fib_conditions();
    assert!(a.norm() < 1e-12 && b.norm() < 1e-12);
}

#[test]
fn scalars_pass_through() {
    let p = TrivalentParams::fibonacci();
    assert_eq!(evaluate(&DiagramSum::scalar(r(2.5)), &p).unwrap(), r(2.5));
}

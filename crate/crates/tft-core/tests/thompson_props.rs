mod common;

use common::{element, random_word, rng};
use proptest::prelude::*;
use rand::Rng;
use tft_core::thompson::{element_to_pl, inverse, multiply, pl_to_element, reduce, GroupElement};
use tft_core::Dyadic;

const LETTERS: &str = "AaBbCc";

fn grid_agrees(f: &GroupElement, g: impl Fn(Dyadic) -> Dyadic) -> bool {
    let pl = element_to_pl(f);
    (0..4096).all(|i| {
        let x = Dyadic::new(i, 12);
        pl.eval(x).frac() == g(x).frac()
    })
}

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn group_axioms(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = element(&random_word(&mut r, LETTERS, 10));
        let b = element(&random_word(&mut r, LETTERS, 10));
        let c = element(&random_word(&mut r, LETTERS, 10));
        prop_assert_eq!(multiply(&multiply(&a, &b), &c), multiply(&a, &multiply(&b, &c)));
        prop_assert_eq!(multiply(&a, &GroupElement::identity()), a.clone());
        prop_assert_eq!(multiply(&GroupElement::identity(), &a), a.clone());
        prop_assert!(multiply(&a, &inverse(&a)).is_identity());
        prop_assert!(multiply(&inverse(&a), &a).is_identity());
    }

    #[test]
    fn pl_map_is_a_homomorphism(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = element(&random_word(&mut r, LETTERS, 6));
        let b = element(&random_word(&mut r, LETTERS, 6));
        let (pa, pb) = (element_to_pl(&a), element_to_pl(&b));
        prop_assert!(grid_agrees(&multiply(&a, &b), |x| pb.eval(pa.eval(x).frac())));
    }

    #[test]
    fn pl_maps_are_valid_and_invertible(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = element(&random_word(&mut r, LETTERS, 10));
        let pl = element_to_pl(&a);
        prop_assert!(pl.validate().is_ok());
        prop_assert_eq!(pl_to_element(&pl).unwrap(), a);
    }

    #[test]
    fn reduced_form_is_unique(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = element(&random_word(&mut r, LETTERS, 8));
        let (mut num, mut den, mut rot) = (a.num.clone(), a.den.clone(), a.rot);
        for _ in 0..r.random_range(1..=6) {
            let g = GroupElement { num: num.clone(), den: den.clone(), rot };
            let i = r.random_range(0..g.leaf_count());
            (num, den, rot) = g.expand_at(i);
        }
        prop_assert_eq!(reduce(&num, &den, rot as i64).unwrap(), a);
    }
}

#[test]
fn presentation_relations() {
    for w in ["CCC", "CACA", "aBAbabAABa", "aBAAbaabAAABaa"] {
        assert!(element(w).is_identity(), "{w}");
    }
}

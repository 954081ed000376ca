#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tft_core::forest::{BinaryTree, Forest};
use tft_core::thompson::{self, GroupElement};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random tree with exactly `leaves` leaves.
pub fn random_tree(rng: &mut impl Rng, leaves: usize) -> BinaryTree {
    if leaves <= 1 {
        return BinaryTree::Leaf;
    }
    let k = rng.random_range(1..leaves);
    BinaryTree::node(random_tree(rng, k), random_tree(rng, leaves - k))
}

/// A random forest with `domain` trees and `codomain` leaves, `codomain >= domain`.
pub fn random_forest(rng: &mut impl Rng, domain: usize, codomain: usize) -> Forest {
    let mut sizes = vec![1; domain];
    for _ in domain..codomain {
        let i = rng.random_range(0..domain);
        sizes[i] += 1;
    }
    Forest::new(sizes.into_iter().map(|n| random_tree(rng, n)).collect())
}

/// A random word over `letters` (upper case: generator, lower case: inverse).
pub fn random_word(rng: &mut impl Rng, letters: &str, max_len: usize) -> String {
    let alphabet: Vec<char> = letters.chars().collect();
    let n = rng.random_range(0..=max_len);
    (0..n).map(|_| alphabet[rng.random_range(0..alphabet.len())]).collect()
}

pub fn element(word: &str) -> GroupElement {
    thompson::parse_word(word).expect("valid word")
}

/// Proptest configuration without failure persistence files.
pub fn config(cases: u32) -> proptest::test_runner::Config {
    proptest::test_runner::Config { cases, failure_persistence: None, ..Default::default() }
}

//! Binary trees, binary and annular forests, pushouts, and standard dyadic partitions.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::dyadic::{Dyadic, MAX_EXP};
use crate::error::{Error, Result};

/// A rooted planar binary tree.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum BinaryTree {
    Leaf,
    Node(Box<BinaryTree>, Box<BinaryTree>),
}

impl BinaryTree {
    pub fn leaf() -> Self {
        BinaryTree::Leaf
    }

    /// The two-leaf tree.
    pub fn caret() -> Self {
        BinaryTree::node(BinaryTree::Leaf, BinaryTree::Leaf)
    }

    pub fn node(left: BinaryTree, right: BinaryTree) -> Self {
        BinaryTree::Node(Box::new(left), Box::new(right))
    }

    /// The regular tree with `2^level` leaves.
    pub fn regular(level: u32) -> Self {
        if level == 0 {
            BinaryTree::Leaf
        } else {
            BinaryTree::node(BinaryTree::regular(level - 1), BinaryTree::regular(level - 1))
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, BinaryTree::Leaf)
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            BinaryTree::Leaf => 1,
            BinaryTree::Node(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            BinaryTree::Leaf => 0,
            BinaryTree::Node(l, r) => 1 + l.depth().max(r.depth()),
        }
    }

    /// Depth of every leaf, left to right.
    pub fn leaf_depths(&self) -> Vec<u32> {
        fn go(t: &BinaryTree, d: u32, out: &mut Vec<u32>) {
            match t {
                BinaryTree::Leaf => out.push(d),
                BinaryTree::Node(l, r) => {
                    go(l, d + 1, out);
                    go(r, d + 1, out);
                }
            }
        }
        let mut out = Vec::new();
        go(self, 0, &mut out);
        out
    }

    /// Standard dyadic intervals of the leaves, left to right.
    pub fn leaf_intervals(&self) -> Vec<(Dyadic, Dyadic)> {
        let p = self.partition();
        p.breakpoints.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// The standard dyadic partition of `[0, 1]` corresponding to this tree.
    pub fn partition(&self) -> DyadicPartition {
        let mut pts = vec![Dyadic::ZERO];
        let mut acc = Dyadic::ZERO;
        for d in self.leaf_depths() {
            assert!(d <= MAX_EXP, "tree too deep for exact arithmetic");
            acc = acc + Dyadic::pow2_neg(d);
            pts.push(acc);
        }
        DyadicPartition { breakpoints: pts }
    }

    /// Rebuild a tree from its leaf depth sequence.
    pub fn from_leaf_depths(depths: &[u32]) -> Result<Self> {
        fn build(depths: &[u32], pos: &mut usize, d: u32) -> Option<BinaryTree> {
            let cur = *depths.get(*pos)?;
            if cur == d {
                *pos += 1;
                Some(BinaryTree::Leaf)
            } else if cur > d {
                let l = build(depths, pos, d + 1)?;
                let r = build(depths, pos, d + 1)?;
                Some(BinaryTree::node(l, r))
            } else {
                None
            }
        }
        let mut pos = 0;
        match build(depths, &mut pos, 0) {
            Some(t) if pos == depths.len() => Ok(t),
            _ => Err(Error::Partition(format!("{depths:?} is not a leaf depth sequence"))),
        }
    }

    /// Whether `other` is obtained from `self` by grafting trees onto its leaves.
    pub fn is_prefix_of(&self, other: &BinaryTree) -> bool {
        match (self, other) {
            (BinaryTree::Leaf, _) => true,
            (BinaryTree::Node(..), BinaryTree::Leaf) => false,
            (BinaryTree::Node(a, b), BinaryTree::Node(c, d)) => a.is_prefix_of(c) && b.is_prefix_of(d),
        }
    }

    /// For `self` a prefix of `other`, the forest `p` with `self ∘ p = other`.
    pub fn complement_in(&self, other: &BinaryTree) -> Result<Forest> {
        fn go(s: &BinaryTree, o: &BinaryTree, out: &mut Vec<BinaryTree>) -> bool {
            match (s, o) {
                (BinaryTree::Leaf, _) => {
                    out.push(o.clone());
                    true
                }
                (BinaryTree::Node(..), BinaryTree::Leaf) => false,
                (BinaryTree::Node(a, b), BinaryTree::Node(c, d)) => go(a, c, out) && go(b, d, out),
            }
        }
        let mut out = Vec::new();
        if go(self, other, &mut out) {
            Ok(Forest::new(out))
        } else {
            Err(Error::Refinement(format!("{other} does not refine {self}")))
        }
    }

    pub fn as_forest(&self) -> Forest {
        Forest::new(vec![self.clone()])
    }

    fn parse_at(bytes: &[u8], pos: &mut usize) -> Result<BinaryTree> {
        skip_ws(bytes, pos);
        match bytes.get(*pos) {
            Some(b'*') => {
                *pos += 1;
                Ok(BinaryTree::Leaf)
            }
            Some(b'(') => {
                *pos += 1;
                let l = BinaryTree::parse_at(bytes, pos)?;
                let r = BinaryTree::parse_at(bytes, pos)?;
                skip_ws(bytes, pos);
                if bytes.get(*pos) != Some(&b')') {
                    return Err(Error::Parse(format!("expected ')' at offset {}", *pos)));
                }
                *pos += 1;
                Ok(BinaryTree::node(l, r))
            }
            Some(c) => Err(Error::Parse(format!("unexpected {:?} at offset {}", *c as char, *pos))),
            None => Err(Error::Parse("unexpected end of tree".into())),
        }
    }
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    while bytes.get(*pos).is_some_and(|c| c.is_ascii_whitespace()) {
        *pos += 1;
    }
}

impl FromStr for BinaryTree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let t = BinaryTree::parse_at(bytes, &mut pos)?;
        skip_ws(bytes, &mut pos);
        if pos != bytes.len() {
            return Err(Error::Parse(format!("trailing input in tree {s:?}")));
        }
        Ok(t)
    }
}

impl fmt::Display for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BinaryTree::Leaf => write!(f, "*"),
            BinaryTree::Node(l, r) => write!(f, "({l}{r})"),
        }
    }
}

impl fmt::Debug for BinaryTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for BinaryTree {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinaryTree {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// An ordered list of binary trees: a morphism `domain -> codomain` of the forest category.
#[derive(Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Forest {
    pub trees: Vec<BinaryTree>,
}

impl Forest {
    pub fn new(trees: Vec<BinaryTree>) -> Self {
        Forest { trees }
    }

    pub fn empty() -> Self {
        Forest { trees: Vec::new() }
    }

    /// `n` single leaves.
    pub fn identity(n: usize) -> Self {
        Forest { trees: vec![BinaryTree::Leaf; n] }
    }

    pub fn domain(&self) -> usize {
        self.trees.len()
    }

    pub fn codomain(&self) -> usize {
        self.trees.iter().map(BinaryTree::leaf_count).sum()
    }

    pub fn is_identity(&self) -> bool {
        self.trees.iter().all(BinaryTree::is_leaf)
    }

    /// Whitespace-separated trees.
    pub fn parse(s: &str) -> Result<Self> {
        let bytes = s.as_bytes();
        let mut pos = 0;
        let mut trees = Vec::new();
        loop {
            skip_ws(bytes, &mut pos);
            if pos == bytes.len() {
                break;
            }
            trees.push(BinaryTree::parse_at(bytes, &mut pos)?);
        }
        Ok(Forest { trees })
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.trees.iter().map(|t| t.to_string()).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

/// A forest together with a cyclic shift of its leaves.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct AnnularForest {
    pub trees: Vec<BinaryTree>,
    pub rotation: usize,
}

impl AnnularForest {
    pub fn new(forest: Forest, rotation: i64) -> Self {
        let n = forest.codomain();
        let rotation = if n == 0 { 0 } else { rotation.rem_euclid(n as i64) as usize };
        AnnularForest { trees: forest.trees, rotation }
    }

    pub fn forest(&self) -> Forest {
        Forest::new(self.trees.clone())
    }
}

/// Graft tree `i` of `w2` onto leaf `i` of `w1`.
pub fn compose(w1: &Forest, w2: &Forest) -> Result<Forest> {
    if w1.codomain() != w2.domain() {
        return Err(Error::Composition(format!(
            "codomain {} of first forest differs from domain {} of second",
            w1.codomain(),
            w2.domain()
        )));
    }
    fn graft<'a>(t: &BinaryTree, it: &mut impl Iterator<Item = &'a BinaryTree>) -> BinaryTree {
        match t {
            BinaryTree::Leaf => it.next().expect("arity checked").clone(),
            BinaryTree::Node(l, r) => {
                let l = graft(l, it);
                let r = graft(r, it);
                BinaryTree::node(l, r)
            }
        }
    }
    let mut it = w2.trees.iter();
    Ok(Forest::new(w1.trees.iter().map(|t| graft(t, &mut it)).collect()))
}

/// Grafting a forest onto a single tree.
pub fn compose_tree(t: &BinaryTree, w: &Forest) -> Result<BinaryTree> {
    Ok(compose(&t.as_forest(), w)?.trees.pop().expect("one tree"))
}

/// Side-by-side juxtaposition.
pub fn tensor(w1: &Forest, w2: &Forest) -> Forest {
    let mut trees = w1.trees.clone();
    trees.extend(w2.trees.iter().cloned());
    Forest::new(trees)
}

/// `[k](w)_i = w_{(i + k) mod m}`.
pub fn rotate(w: &Forest, k: i64) -> Forest {
    let m = w.domain();
    if m == 0 {
        return w.clone();
    }
    let k = k.rem_euclid(m as i64) as usize;
    Forest::new((0..m).map(|i| w.trees[(i + k) % m].clone()).collect())
}

/// Pushout of two trees: `(s ∨ t, τ, σ)` with `s ∘ τ = s ∨ t = t ∘ σ`.
pub fn join(s: &BinaryTree, t: &BinaryTree) -> (BinaryTree, Forest, Forest) {
    match (s, t) {
        (BinaryTree::Leaf, _) => (t.clone(), t.as_forest(), Forest::identity(t.leaf_count())),
        (_, BinaryTree::Leaf) => (s.clone(), Forest::identity(s.leaf_count()), s.as_forest()),
        (BinaryTree::Node(sl, sr), BinaryTree::Node(tl, tr)) => {
            let (jl, tau_l, sig_l) = join(sl, tl);
            let (jr, tau_r, sig_r) = join(sr, tr);
            (BinaryTree::node(jl, jr), tensor(&tau_l, &tau_r), tensor(&sig_l, &sig_r))
        }
    }
}

/// Componentwise pushout of two forests with equal domain.
pub fn join_forests(s: &Forest, t: &Forest) -> Result<(Forest, Forest, Forest)> {
    if s.domain() != t.domain() {
        return Err(Error::Composition(format!(
            "forests have different domains {} and {}",
            s.domain(),
            t.domain()
        )));
    }
    let mut j = Forest::empty();
    let mut tau = Forest::empty();
    let mut sigma = Forest::empty();
    for (a, b) in s.trees.iter().zip(&t.trees) {
        let (x, y, z) = join(a, b);
        j.trees.push(x);
        tau = tensor(&tau, &y);
        sigma = tensor(&sigma, &z);
    }
    Ok((j, tau, sigma))
}

/// A standard dyadic partition of `[0, 1]` given by its breakpoints.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct DyadicPartition {
    pub breakpoints: Vec<Dyadic>,
}

impl DyadicPartition {
    /// Validates that every interval is standard dyadic and the points run from 0 to 1.
    pub fn new(breakpoints: Vec<Dyadic>) -> Result<Self> {
        let p = DyadicPartition { breakpoints };
        p.to_tree()?;
        Ok(p)
    }

    pub fn trivial() -> Self {
        DyadicPartition { breakpoints: vec![Dyadic::ZERO, Dyadic::ONE] }
    }

    pub fn len(&self) -> usize {
        self.breakpoints.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn intervals(&self) -> Vec<(Dyadic, Dyadic)> {
        self.breakpoints.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// Inverse of [`BinaryTree::partition`].
    pub fn to_tree(&self) -> Result<BinaryTree> {
        partition_tree(self)
    }
}

impl fmt::Display for DyadicPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.breakpoints.iter().map(|d| d.to_string()).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

/// Whether `[a, b]` is of the form `[j/2^n, (j+1)/2^n]`; returns `n`.
pub fn standard_level(a: Dyadic, b: Dyadic) -> Option<u32> {
    let len = b - a;
    let j = len.log2_exact()?;
    if j > 0 {
        return None;
    }
    let n = (-j) as u32;
    a.is_multiple_of_pow2_neg(n).then_some(n)
}

/// The tree of a standard dyadic partition.
pub fn tree_partition(t: &BinaryTree) -> DyadicPartition {
    t.partition()
}

/// The tree whose leaves are the intervals of a standard dyadic partition.
pub fn partition_tree(p: &DyadicPartition) -> Result<BinaryTree> {
    let pts = &p.breakpoints;
    if pts.len() < 2 || pts[0] != Dyadic::ZERO || *pts.last().unwrap() != Dyadic::ONE {
        return Err(Error::Partition(format!("{p} must run from 0 to 1")));
    }
    let mut depths = Vec::with_capacity(pts.len() - 1);
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            return Err(Error::Partition(format!("{p} is not strictly increasing")));
        }
        match standard_level(w[0], w[1]) {
            Some(n) => depths.push(n),
            None => {
                return Err(Error::Partition(format!("[{}, {}] is not a standard dyadic interval", w[0], w[1])))
            }
        }
    }
    BinaryTree::from_leaf_depths(&depths)
        .map_err(|_| Error::Partition(format!("{p} is not a standard dyadic partition")))
}

/// All trees with exactly `n` leaves.
pub fn trees_with_leaves(n: usize) -> Vec<BinaryTree> {
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![BinaryTree::Leaf];
    }
    let mut out = Vec::new();
    for k in 1..n {
        let lefts = trees_with_leaves(k);
        let rights = trees_with_leaves(n - k);
        for l in &lefts {
            for r in &rights {
                out.push(BinaryTree::node(l.clone(), r.clone()));
            }
        }
    }
    out
}

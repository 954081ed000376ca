//! Thompson's groups F and T as reduced tree-pair fractions with a cyclic rotation.
//!
//! An element maps the partition of its denominator tree onto the partition of its numerator
//! tree; denominator leaf `i` goes to numerator leaf `(i + rot) mod n`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::forest::{self, rotate, standard_level, BinaryTree, DyadicPartition, Forest};

/// Bisection depth beyond which a PL map is declared not to lie in T.
const MAX_BISECTION_DEPTH: u32 = 60;

/// A reduced tree pair with rotation.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupElement {
    pub num: BinaryTree,
    pub den: BinaryTree,
    pub rot: usize,
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}@{}", self.num, self.den, self.rot)
    }
}

impl GroupElement {
    pub fn identity() -> Self {
        GroupElement { num: BinaryTree::Leaf, den: BinaryTree::Leaf, rot: 0 }
    }

    pub fn is_identity(&self) -> bool {
        self.num.is_leaf() && self.den.is_leaf()
    }

    pub fn leaf_count(&self) -> usize {
        self.num.leaf_count()
    }

    /// Whether the element fixes 0, i.e. lies in F.
    pub fn in_f(&self) -> bool {
        self.rot == 0
    }

    pub fn to_pl(&self) -> PLMap {
        element_to_pl(self)
    }

    /// Value of the lift at a real point in `[0, 1]`.
    pub fn eval_f64(&self, x: f64) -> f64 {
        element_to_pl(self).eval_f64(x)
    }

    /// The unreduced pair obtained by adding a caret at denominator leaf `i`.
    pub fn expand_at(&self, i: usize) -> (BinaryTree, BinaryTree, usize) {
        let n = self.leaf_count();
        let mut trees = vec![BinaryTree::Leaf; n];
        trees[i % n] = BinaryTree::caret();
        let (num, den, rot) = extend_den(&self.num, &self.den, self.rot, &Forest::new(trees));
        (num, den, rot)
    }
}

/// Extend a pair on its denominator side by the forest `w`.
///
/// Returns `(num ∘ [-rot] w, den ∘ w, R)`.
pub fn extend_den(num: &BinaryTree, den: &BinaryTree, rot: usize, w: &Forest) -> (BinaryTree, BinaryTree, usize) {
    let n = den.leaf_count();
    assert_eq!(w.domain(), n, "forest must have one tree per leaf");
    let new_den = forest::compose_tree(den, w).expect("arity checked");
    let new_num = forest::compose_tree(num, &rotate(w, -(rot as i64))).expect("arity checked");
    let total = w.codomain();
    let shift: usize = (n - rot..n).map(|i| w.trees[i].leaf_count()).sum();
    (new_num, new_den, shift % total)
}

/// Extend a pair on its numerator side by the forest `u`.
pub fn extend_num(num: &BinaryTree, den: &BinaryTree, rot: usize, u: &Forest) -> (BinaryTree, BinaryTree, usize) {
    extend_den(num, den, rot, &rotate(u, rot as i64))
}

/// Two leaves of a partition, `i` and `i + 1`, are siblings in its tree.
fn siblings(p: &[Dyadic], i: usize) -> bool {
    let l1 = p[i + 1] - p[i];
    let l2 = p[i + 2] - p[i + 1];
    if l1 != l2 {
        return false;
    }
    match l1.log2_exact() {
        Some(j) if j <= -1 => p[i].is_multiple_of_pow2_neg((-j - 1) as u32),
        _ => false,
    }
}

/// Canonical representative of the fraction `num / den` with rotation `rot`.
pub fn reduce(num: &BinaryTree, den: &BinaryTree, rot: i64) -> Result<GroupElement> {
    let n = den.leaf_count();
    if num.leaf_count() != n {
        return Err(Error::Element(format!(
            "numerator has {} leaves, denominator has {}",
            num.leaf_count(),
            n
        )));
    }
    let mut np = num.partition().breakpoints;
    let mut dp = den.partition().breakpoints;
    let mut r = rot.rem_euclid(n as i64) as usize;
    let mut i = 0;
    while dp.len() > 2 && i + 2 < dp.len() {
        let n = dp.len() - 1;
        let j = (i + r) % n;
        if j + 1 < n && siblings(&dp, i) && siblings(&np, j) {
            dp.remove(i + 1);
            np.remove(j + 1);
            r = (j + (n - 1) - i) % (n - 1);
            i = i.saturating_sub(1);
        } else {
            i += 1;
        }
    }
    let num = forest::partition_tree(&DyadicPartition { breakpoints: np }).expect("valid partition");
    let den = forest::partition_tree(&DyadicPartition { breakpoints: dp }).expect("valid partition");
    Ok(GroupElement { num, den, rot: r })
}

/// The product `b ∘ a`: `a` is applied first.
pub fn multiply(a: &GroupElement, b: &GroupElement) -> GroupElement {
    let (_, tau, sigma) = forest::join(&a.num, &b.den);
    let (_, den_a, ra) = extend_num(&a.num, &a.den, a.rot, &tau);
    let (num_b, _, rb) = extend_den(&b.num, &b.den, b.rot, &sigma);
    reduce(&num_b, &den_a, (ra + rb) as i64).expect("leaf counts agree")
}

/// Apply the elements in order, first to last.
pub fn word(elements: &[GroupElement]) -> GroupElement {
    elements.iter().fold(GroupElement::identity(), |acc, g| multiply(&acc, g))
}

pub fn inverse(a: &GroupElement) -> GroupElement {
    let n = a.leaf_count() as i64;
    reduce(&a.den, &a.num, (-(a.rot as i64)).rem_euclid(n)).expect("leaf counts agree")
}

/// The generators A, B of F and C of T.
pub fn generator(name: &str) -> Result<GroupElement> {
    let (num, den, rot) = match name {
        "A" | "a" => ("((**)*)", "(*(**))", 0),
        "B" | "b" => ("(*((**)*))", "(*(*(**)))", 0),
        "C" | "c" => ("(*(**))", "(*(**))", 2),
        _ => return Err(Error::Parse(format!("unknown generator {name:?}"))),
    };
    Ok(GroupElement { num: num.parse()?, den: den.parse()?, rot })
}

/// Parse a word such as `"CAB"` into the product applying letters left to right.
/// Lower-case letters denote inverses.
pub fn parse_word(s: &str) -> Result<GroupElement> {
    let mut gens = Vec::new();
    for c in s.chars().filter(|c| !c.is_whitespace()) {
        let g = generator(&c.to_ascii_uppercase().to_string())?;
        gens.push(if c.is_ascii_lowercase() { inverse(&g) } else { g });
    }
    Ok(word(&gens))
}

/// A dyadic piecewise-linear map given by breakpoints of its lift.
///
/// For circle maps the lift satisfies `y_0 ∈ [0, 1)` and `y_last = y_0 + 1`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PLMap {
    pub circle: bool,
    pub points: Vec<(Dyadic, Dyadic)>,
}

fn odd_part(m: i128) -> i128 {
    if m == 0 {
        0
    } else {
        m >> m.trailing_zeros()
    }
}

/// Whether `dy / dx` is an integer power of two.
fn is_pow2_ratio(dy: Dyadic, dx: Dyadic) -> bool {
    dy.is_positive() && dx.is_positive() && odd_part(dy.numerator()) == odd_part(dx.numerator())
}

impl PLMap {
    pub fn identity() -> Self {
        PLMap { circle: false, points: vec![(Dyadic::ZERO, Dyadic::ZERO), (Dyadic::ONE, Dyadic::ONE)] }
    }

    /// Checks dyadic breakpoints, monotonicity and power-of-two slopes.
    pub fn validate(&self) -> Result<()> {
        let pts = &self.points;
        let bad = |msg: String| Err(Error::NotInGroup(msg));
        if pts.len() < 2 {
            return bad("a PL map needs at least two points".into());
        }
        if pts[0].0 != Dyadic::ZERO || pts[pts.len() - 1].0 != Dyadic::ONE {
            return bad("x-coordinates must run from 0 to 1".into());
        }
        let (y0, y1) = (pts[0].1, pts[pts.len() - 1].1);
        if y1 - y0 != Dyadic::ONE {
            return bad("the map must cover one full period".into());
        }
        if self.circle {
            if y0 < Dyadic::ZERO || y0 >= Dyadic::ONE {
                return bad("lift must start in [0, 1)".into());
            }
        } else if y0 != Dyadic::ZERO {
            return bad("interval maps must fix 0".into());
        }
        for w in pts.windows(2) {
            let dx = w[1].0 - w[0].0;
            let dy = w[1].1 - w[0].1;
            if !dx.is_positive() || !dy.is_positive() {
                return bad("breakpoints must be strictly increasing".into());
            }
            if !is_pow2_ratio(dy, dx) {
                return bad(format!("slope between x = {} and x = {} is not a power of 2", w[0].0, w[1].0));
            }
        }
        Ok(())
    }

    /// Index of the segment containing `x ∈ [0, 1]` (right-continuous).
    fn segment(&self, x: Dyadic) -> usize {
        let n = self.points.len() - 1;
        match self.points.binary_search_by(|p| p.0.cmp(&x)) {
            Ok(i) => i.min(n - 1),
            Err(i) => i.saturating_sub(1).min(n - 1),
        }
    }

    /// Exact value of the lift at `x ∈ ℝ`, extended periodically with integer shifts.
    pub fn eval(&self, x: Dyadic) -> Dyadic {
        let shift = x.floor();
        let mut t = x.frac();
        let mut extra = Dyadic::from_int(shift);
        if t == Dyadic::ZERO && shift > 0 && !self.circle {
            t = Dyadic::ONE;
            extra = Dyadic::from_int(shift - 1);
        }
        let i = self.segment(t);
        let (x0, y0) = self.points[i];
        let (x1, y1) = self.points[i + 1];
        let dx = x1 - x0;
        let dy = y1 - y0;
        let j = log2_ratio(dy, dx);
        y0 + (t - x0).mul_pow2(j) + extra
    }

    /// Floating-point value of the lift.
    pub fn eval_f64(&self, x: f64) -> f64 {
        let shift = x.floor();
        let mut t = x - shift;
        let mut extra = shift;
        if t == 0.0 && shift > 0.0 && !self.circle {
            t = 1.0;
            extra -= 1.0;
        }
        let n = self.points.len() - 1;
        let mut i = 0;
        while i + 1 < n && self.points[i + 1].0.to_f64() <= t {
            i += 1;
        }
        let (x0, y0) = (self.points[i].0.to_f64(), self.points[i].1.to_f64());
        let (x1, y1) = (self.points[i + 1].0.to_f64(), self.points[i + 1].1.to_f64());
        y0 + (t - x0) * (y1 - y0) / (x1 - x0) + extra
    }

    /// Right derivative at `x ∈ [0, 1)`.
    pub fn slope_at(&self, x: f64) -> f64 {
        let n = self.points.len() - 1;
        let mut i = 0;
        while i + 1 < n && self.points[i + 1].0.to_f64() <= x {
            i += 1;
        }
        let (p, q) = (self.points[i], self.points[i + 1]);
        (q.1 - p.1).to_f64() / (q.0 - p.0).to_f64()
    }

    /// The same map with collinear interior breakpoints removed.
    pub fn simplified(&self) -> PLMap {
        let mut pts: Vec<(Dyadic, Dyadic)> = Vec::with_capacity(self.points.len());
        for &p in &self.points {
            if pts.len() >= 2 {
                let (a, b) = (pts[pts.len() - 2], pts[pts.len() - 1]);
                if log2_ratio(b.1 - a.1, b.0 - a.0) == log2_ratio(p.1 - b.1, p.0 - b.0) {
                    pts.pop();
                }
            }
            pts.push(p);
        }
        PLMap { circle: self.circle, points: pts }
    }

    /// Breakpoint x-coordinates.
    pub fn breakpoints(&self) -> Vec<Dyadic> {
        self.points.iter().map(|p| p.0).collect()
    }
}

/// `log2(dy / dx)` for a power-of-two ratio.
fn log2_ratio(dy: Dyadic, dx: Dyadic) -> i32 {
    let ty = dy.numerator().trailing_zeros() as i32 - dy.exponent() as i32;
    let tx = dx.numerator().trailing_zeros() as i32 - dx.exponent() as i32;
    ty - tx
}

/// The PL lift of an element: denominator breakpoint `i` goes to numerator breakpoint `i + rot`.
pub fn element_to_pl(a: &GroupElement) -> PLMap {
    let d = a.den.partition().breakpoints;
    let nb = a.num.partition().breakpoints;
    let n = d.len() - 1;
    let points = (0..=n)
        .map(|i| {
            let k = i + a.rot;
            (d[i], nb[k % n] + Dyadic::from_int((k / n) as i128))
        })
        .collect();
    PLMap { circle: a.rot != 0, points }
}

/// Whether the map is linear on `[a, b]` and sends it to a standard dyadic interval.
fn good_interval(f: &PLMap, a: Dyadic, b: Dyadic) -> bool {
    let next = f.points.partition_point(|p| p.0 <= a);
    if next < f.points.len() && f.points[next].0 < b {
        return false;
    }
    let (ya, yb) = (f.eval(a), end_eval(f, b));
    let shift = Dyadic::from_int(ya.floor());
    standard_level(ya - shift, yb - shift).is_some()
}

/// Value at the right endpoint of an interval, taken from the left.
fn end_eval(f: &PLMap, b: Dyadic) -> Dyadic {
    if b == Dyadic::ONE {
        f.points[f.points.len() - 1].1
    } else {
        f.eval(b)
    }
}

/// Split `[a, b]` until every piece is good for `f`.
fn bisect(f: &PLMap, a: Dyadic, b: Dyadic, depth: u32, out: &mut Vec<Dyadic>) -> Result<()> {
    if good_interval(f, a, b) {
        out.push(b);
        return Ok(());
    }
    if depth >= MAX_BISECTION_DEPTH {
        return Err(Error::NotInGroup(format!("no finite dyadic subdivision found near x = {a}")));
    }
    let mid = a + (b - a).mul_pow2(-1);
    bisect(f, a, mid, depth + 1, out)?;
    bisect(f, mid, b, depth + 1, out)
}

/// Rebuild the reduced element from a valid PL map.
pub fn pl_to_element(f: &PLMap) -> Result<GroupElement> {
    f.validate()?;
    let mut dom = vec![Dyadic::ZERO];
    bisect(f, Dyadic::ZERO, Dyadic::ONE, 0, &mut dom)?;
    let n = dom.len() - 1;
    let mut images: Vec<Dyadic> = dom[..n].iter().map(|&x| f.eval(x).frac()).collect();
    let first = images[0];
    images.sort();
    images.push(Dyadic::ONE);
    let rot = images.iter().position(|&y| y == first).expect("image present");
    let den = forest::partition_tree(&DyadicPartition { breakpoints: dom })?;
    let num = forest::partition_tree(&DyadicPartition { breakpoints: images })
        .map_err(|e| Error::NotInGroup(format!("image is not a dyadic partition: {e}")))?;
    if !f.circle && rot != 0 {
        return Err(Error::NotInGroup("interval map does not fix 0".into()));
    }
    reduce(&num, &den, rot as i64)
}

/// Coarsest refinement of `p` on which `a` is linear with standard dyadic images.
pub fn good_refinement(a: &GroupElement, p: &DyadicPartition) -> Result<DyadicPartition> {
    let f = element_to_pl(a);
    let mut out = vec![Dyadic::ZERO];
    for (x, y) in p.intervals() {
        bisect(&f, x, y, 0, &mut out)?;
    }
    Ok(DyadicPartition { breakpoints: out })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn generators_match_pl_data() {
        let a = generator("A").unwrap().to_pl();
        assert_eq!(a.eval(d("1/2")), d("1/4"));
        assert_eq!(
            a.points,
            vec![(d("0"), d("0")), (d("1/2"), d("1/4")), (d("3/4"), d("1/2")), (d("1"), d("1"))]
        );
        let c = generator("C").unwrap().to_pl();
        assert_eq!(c.eval(Dyadic::ZERO), d("3/4"));
        let b = generator("B").unwrap().to_pl();
        for x in ["0", "1/8", "3/8", "1/2"] {
            assert_eq!(b.eval(d(x)), d(x));
        }
    }

    #[test]
    fn presentation_relations() {
        let a = generator("A").unwrap();
        let c = generator("C").unwrap();
        assert!(word(&[c.clone(), c.clone(), c.clone()]).is_identity());
        let ca = multiply(&c, &a);
        assert!(!ca.is_identity());
        assert!(multiply(&ca, &ca).is_identity());
    }

    #[test]
    fn caret_extended_a_reduces() {
        let num: BinaryTree = "((*(**))*)".parse().unwrap();
        let den: BinaryTree = "(*((**)*))".parse().unwrap();
        assert_eq!(reduce(&num, &den, 0).unwrap(), generator("A").unwrap());
    }

    #[test]
    fn good_refinement_of_a() {
        let a = generator("A").unwrap();
        let p = "(**)".parse::<BinaryTree>().unwrap().partition();
        let q = good_refinement(&a, &p).unwrap();
        assert_eq!(q.breakpoints, vec![d("0"), d("1/2"), d("3/4"), d("1")]);
    }

    #[test]
    fn pl_round_trip_generators() {
        for g in ["A", "B", "C"] {
            let e = generator(g).unwrap();
            assert_eq!(pl_to_element(&e.to_pl()).unwrap(), e);
        }
    }
}

//! States of the semicontinuous limit and the unitary action of T on them.
//!
//! A state lives on a context tree; leg `i` of the amplitude vector sits at leaf
//! `(i + rot) mod n`, with leg 0 the most significant index.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forest::{self, BinaryTree, Forest};
use crate::tensorlab::{r, verify_tensor, CMatrix, Isometry3, C64, DEFAULT_TOL};
use crate::thompson::{extend_den, GroupElement};

/// Default cap on the number of context leaves.
pub const DEFAULT_MAX_LEAVES: usize = 12;

/// The leaf cap, overridable through `TFT_MAX_LEAVES`.
pub fn max_leaves() -> usize {
    std::env::var("TFT_MAX_LEAVES").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_MAX_LEAVES)
}

fn check_leaves(n: usize) -> Result<()> {
    let cap = max_leaves();
    if n > cap {
        return Err(Error::Resource(format!("{n} leaves exceed the cap of {cap} (set TFT_MAX_LEAVES to raise it)")));
    }
    Ok(())
}

/// Apply `V` to leg `leg` of an `n`-leg vector, producing `n + 1` legs.
pub fn apply_caret(v: &Isometry3, amps: &[C64], n: usize, leg: usize) -> Vec<C64> {
    let d = v.d;
    let after = d.pow((n - leg - 1) as u32);
    let before = d.pow(leg as u32);
    let mut out = vec![r(0.0); amps.len() * d];
    for a in 0..before {
        for l in 0..d {
            let src = &amps[(a * d + l) * after..(a * d + l + 1) * after];
            for j in 0..d {
                for k in 0..d {
                    let w = v.entry(j, k, l);
                    if w == r(0.0) {
                        continue;
                    }
                    let base = ((a * d + j) * d + k) * after;
                    for (o, s) in out[base..base + after].iter_mut().zip(src) {
                        *o += w * s;
                    }
                }
            }
        }
    }
    out
}

fn apply_tree(v: &Isometry3, amps: Vec<C64>, n: usize, leg: usize, t: &BinaryTree) -> (Vec<C64>, usize) {
    match t {
        BinaryTree::Leaf => (amps, n),
        BinaryTree::Node(left, right) => {
            let amps = apply_caret(v, &amps, n, leg);
            let (amps, n) = apply_tree(v, amps, n + 1, leg + 1, right);
            apply_tree(v, amps, n, leg, left)
        }
    }
}

/// Apply `Φ(w)` to a vector with `w.domain()` legs.
pub fn apply_forest(v: &Isometry3, amps: Vec<C64>, w: &Forest) -> Result<Vec<C64>> {
    check_leaves(w.codomain())?;
    let mut n = w.domain();
    let mut amps = amps;
    for (i, t) in w.trees.iter().enumerate().rev() {
        let (a, m) = apply_tree(v, amps, n, i, t);
        amps = a;
        n = m;
    }
    Ok(amps)
}

/// The isometry `Φ(w): (C^d)^{⊗dom} → (C^d)^{⊗cod}` as a dense matrix.
pub fn phi(w: &Forest, v: &Isometry3) -> Result<CMatrix> {
    if w.domain() == 0 {
        return Err(Error::Forest("empty forest".into()));
    }
    let d = v.d;
    let (rows, cols) = (d.pow(w.codomain() as u32), d.pow(w.domain() as u32));
    let mut m = CMatrix::zeros(rows, cols);
    for c in 0..cols {
        let mut e = vec![r(0.0); cols];
        e[c] = r(1.0);
        for (i, z) in apply_forest(v, e, w)?.into_iter().enumerate() {
            m[(i, c)] = z;
        }
    }
    Ok(m)
}

/// A vector of the semicontinuous limit, stored at a concrete context.
#[derive(Clone, Debug, PartialEq)]
pub struct LimitState {
    pub context: BinaryTree,
    pub rot: usize,
    pub amps: Vec<C64>,
}

#[derive(Serialize, Deserialize)]
struct ContextJson {
    tree: BinaryTree,
    rot: usize,
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    context: ContextJson,
    amps: Vec<[f64; 2]>,
}

impl LimitState {
    pub fn new(context: BinaryTree, rot: usize, amps: Vec<C64>, d: usize) -> Result<Self> {
        let n = context.leaf_count();
        check_leaves(n)?;
        if amps.len() != d.pow(n as u32) {
            return Err(Error::Shape(format!("{} amplitudes for {n} legs of dimension {d}", amps.len())));
        }
        Ok(LimitState { context, rot: rot % n, amps })
    }

    pub fn leaf_count(&self) -> usize {
        self.context.leaf_count()
    }

    /// Local dimension inferred from the amplitude count.
    pub fn dim(&self) -> usize {
        let n = self.leaf_count() as u32;
        (2..=64).find(|d: &usize| d.checked_pow(n) == Some(self.amps.len())).unwrap_or(1)
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Same state with `rot = 0`, obtained by permuting legs cyclically.
    pub fn normalized(&self) -> LimitState {
        if self.rot == 0 {
            return self.clone();
        }
        let n = self.leaf_count();
        let d = self.dim();
        let mut out = vec![r(0.0); self.amps.len()];
        let mut digits = vec![0usize; n];
        for (idx, z) in self.amps.iter().enumerate() {
            let mut rest = idx;
            for leg in (0..n).rev() {
                digits[leg] = rest % d;
                rest /= d;
            }
            let mut target = 0;
            for leaf in 0..n {
                target = target * d + digits[(leaf + n - self.rot) % n];
            }
            out[target] = *z;
        }
        LimitState { context: self.context.clone(), rot: 0, amps: out }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: StateJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let n = j.context.tree.leaf_count();
        let d = (2..=64)
            .find(|d: &usize| d.checked_pow(n as u32) == Some(j.amps.len()))
            .ok_or_else(|| Error::Shape(format!("{} amplitudes do not fit {n} legs", j.amps.len())))?;
        let amps = j.amps.iter().map(|p| C64::new(p[0], p[1])).collect();
        LimitState::new(j.context.tree, j.context.rot, amps, d)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let j = StateJson {
            context: ContextJson { tree: self.context.clone(), rot: self.rot },
            amps: self.amps.iter().map(|z| [z.re, z.im]).collect(),
        };
        serde_json::to_value(j).expect("serializable")
    }
}

/// Embed a state into a refinement of its context.
pub fn embed(s: &LimitState, target: &BinaryTree, v: &Isometry3) -> Result<LimitState> {
    let s = s.normalized();
    let p = s.context.complement_in(target)?;
    check_leaves(target.leaf_count())?;
    let amps = apply_forest(v, s.amps, &p)?;
    Ok(LimitState { context: target.clone(), rot: 0, amps })
}

/// Both states embedded into the join of their contexts.
pub fn common_refinement(a: &LimitState, b: &LimitState, v: &Isometry3) -> Result<(LimitState, LimitState)> {
    let (j, _, _) = forest::join(&a.context, &b.context);
    Ok((embed(a, &j, v)?, embed(b, &j, v)?))
}

/// `⟨a, b⟩`, antilinear in `a`.
pub fn inner(a: &LimitState, b: &LimitState, v: &Isometry3) -> Result<C64> {
    let (x, y) = common_refinement(a, b, v)?;
    Ok(x.amps.iter().zip(&y.amps).map(|(p, q)| p.conj() * q).sum())
}

/// `‖a - b‖` in the limit.
pub fn distance(a: &LimitState, b: &LimitState, v: &Isometry3) -> Result<f64> {
    let (x, y) = common_refinement(a, b, v)?;
    Ok(x.amps.iter().zip(&y.amps).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt())
}

/// The vacuum `Ω_{ljk} = ⟨jk|V|l⟩ / √d` on the three-leaf context `((**)*)`.
pub fn vacuum(v: &Isometry3) -> Result<LimitState> {
    let rep = verify_tensor(v, DEFAULT_TOL);
    if !(rep.isometry && rep.planar_perfect && rep.rotation_invariant) {
        return Err(Error::Vacuum(format!("tensor is not a rotation-invariant planar perfect isometry: {rep:?}")));
    }
    let d = v.d;
    let s = 1.0 / (d as f64).sqrt();
    let mut amps = Vec::with_capacity(d * d * d);
    for l in 0..d {
        for j in 0..d {
            for k in 0..d {
                amps.push(v.entry(j, k, l) * s);
            }
        }
    }
    LimitState::new("((**)*)".parse().expect("valid tree"), 0, amps, d)
}

/// The unitary action of `g`: the state is refined until `g` is linear on its leaves and then
/// transported to the image partition.
pub fn act(g: &GroupElement, s: &LimitState, v: &Isometry3) -> Result<LimitState> {
    let s = s.normalized();
    let (j, tau, sigma) = forest::join(&g.den, &s.context);
    check_leaves(j.leaf_count())?;
    let amps = apply_forest(v, s.amps, &sigma)?;
    let (num, _, rot) = extend_den(&g.num, &g.den, g.rot, &tau);
    let out = LimitState { context: num, rot, amps };
    Ok(out.normalized())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thompson::generator;

    #[test]
    fn vacuum_is_normalized_and_invariant() {
        let v = Isometry3::qutrit();
        let omega = vacuum(&v).unwrap();
        assert!((omega.norm() - 1.0).abs() < 1e-12);
        for g in ["A", "C"] {
            let moved = act(&generator(g).unwrap(), &omega, &v).unwrap();
            assert!(distance(&moved, &omega, &v).unwrap() < 1e-9, "{g}");
        }
        let moved = act(&generator("B").unwrap(), &omega, &v).unwrap();
        assert!(distance(&moved, &omega, &v).unwrap() > 1e-3);
    }

    #[test]
    fn phi_of_caret_is_v() {
        let v = Isometry3::qutrit();
        let m = phi(&BinaryTree::caret().as_forest(), &v).unwrap();
        assert!((m - &v.v).norm() < 1e-15);
        assert!(phi(&Forest::empty(), &v).is_err());
    }
}

//! Correlation functions of discretized fields: tree metric, minimal supporting partitions,
//! smeared fields, n-point functions in the vacuum and in transformed states, closed forms,
//! a brute-force lattice oracle, OPE data and Thompson covariance.
//!
//! The default vacuum is the tree density `A ↦ tr(W† A W) / d` of the network `W` generated by
//! `V` alone; its field one-point values are `tr(μ^α) / d`. The circle vacuum of
//! [`crate::semicont::vacuum`] is available as an alternative.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::dyadic::Dyadic;
use crate::error::{Error, Result};
use crate::forest::{self, BinaryTree, DyadicPartition, Forest};
use crate::semicont::{self, apply_forest, embed, max_leaves, LimitState};
use crate::tensorlab::{hs_inner, r, AscendingSystem, CMatrix, Isometry3, C64};
use crate::thompson::{self, GroupElement};

/// Simpson subintervals per dyadic interval in [`smeared_field`].
pub const SIMPSON_STEPS: usize = 64;

/// Largest dense dimension `d^|P|` accepted by [`smeared_field`].
pub const MAX_DENSE_DIM: usize = 2187;

/// Largest partition accepted by [`smeared_field`].
pub const MAX_SMEARED_INTERVALS: usize = 8;

/// A point of `[0, 1)` with a finite binary expansion.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DyadicPoint(Dyadic);

impl DyadicPoint {
    pub fn new(x: Dyadic) -> Result<Self> {
        if x < Dyadic::ZERO || x >= Dyadic::ONE {
            return Err(Error::Dyadic(format!("{x} is not in [0, 1)")));
        }
        Ok(DyadicPoint(x))
    }

    /// The point `j / 2^level`.
    pub fn from_leaf(j: u64, level: u32) -> Result<Self> {
        DyadicPoint::new(Dyadic::new(j as i128, level))
    }

    pub fn value(&self) -> Dyadic {
        self.0
    }

    /// Number of significant binary digits.
    pub fn level(&self) -> u32 {
        self.0.exponent()
    }

    /// The first `level` binary digits, zero padded.
    pub fn digits(&self, level: u32) -> Result<Vec<u8>> {
        let j = self.leaf_index(level)?;
        Ok((0..level).map(|i| ((j >> (level - 1 - i)) & 1) as u8).collect())
    }

    /// Index of the leaf of the level-`level` regular tree labelled by this point.
    pub fn leaf_index(&self, level: u32) -> Result<u128> {
        if self.level() > level {
            return Err(Error::Dyadic(format!("{} needs more than {level} digits", self.0)));
        }
        Ok((self.0.numerator() as u128) << (level - self.level()))
    }

    /// `x^{(j)}`: drop the last `j` of `level` digits.
    pub fn truncate(&self, j: u32, level: u32) -> Result<Self> {
        let idx = self.leaf_index(level)?;
        let j = j.min(level);
        DyadicPoint::new(Dyadic::new((idx >> j) as i128, level - j))
    }

    /// Digitwise XOR `y ⊖ x`.
    pub fn xor(&self, other: &DyadicPoint) -> Dyadic {
        let level = self.level().max(other.level());
        let a = self.leaf_index(level).expect("level is large enough");
        let b = other.leaf_index(level).expect("level is large enough");
        Dyadic::new((a ^ b) as i128, level)
    }
}

impl fmt::Display for DyadicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = self.digits(self.level()).expect("own level");
        let s: String = digits.iter().map(|d| char::from(b'0' + d)).collect();
        write!(f, "0.{s}")
    }
}

impl FromStr for DyadicPoint {
    type Err = Error;

    /// Accepts binary expansions `0.01101`, fractions `13/32` and decimals `0.40625`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(bits) = s.strip_prefix("0b0.").or_else(|| s.strip_prefix("0b.")) {
            if bits.is_empty() || !bits.chars().all(|c| c == '0' || c == '1') {
                return Err(Error::Parse(format!("bad binary expansion {s:?}")));
            }
            let m = i128::from_str_radix(bits, 2).map_err(|e| Error::Parse(e.to_string()))?;
            return DyadicPoint::new(Dyadic::new(m, bits.len() as u32));
        }
        DyadicPoint::new(parse_point(s)?)
    }
}

/// Parse a dyadic number written as `m/2^k`, `m/n` with `n` a power of two, or a decimal.
pub fn parse_point(s: &str) -> Result<Dyadic> {
    let s = s.trim();
    if s.contains('/') {
        if let Ok(d) = s.parse::<Dyadic>() {
            return Ok(d);
        }
        let (a, b) = s.split_once('/').expect("contains slash");
        let m: i128 = a.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let n: u128 = b.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if !n.is_power_of_two() {
            return Err(Error::Dyadic(format!("{s} is not dyadic")));
        }
        return Ok(Dyadic::new(m, n.trailing_zeros()));
    }
    let x: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number {s:?}")))?;
    Dyadic::from_f64(x)
}

/// `y ⊖ x` together with the recursive and closed-form tree metrics on the level-`l` tree.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct TreeMetric {
    pub xor: Dyadic,
    pub recursive: u32,
    pub closed_form: u32,
}

pub fn xor_and_tree_metric(x: &DyadicPoint, y: &DyadicPoint, l: u32) -> Result<TreeMetric> {
    let (a, b) = (x.leaf_index(l)?, y.leaf_index(l)?);
    let xor = Dyadic::new((a ^ b) as i128, l);
    let mut recursive = 0;
    let (mut p, mut q) = (*x, *y);
    while p != q {
        p = p.truncate(1, l - recursive)?;
        q = q.truncate(1, l - recursive)?;
        recursive += 1;
    }
    let closed_form = if a == b {
        0
    } else {
        // floor(log2(xor)) for xor = m / 2^k is bitlen(m) - 1 - k.
        let bitlen = 128 - xor.numerator().leading_zeros() as i64;
        (l as i64 + 1 + bitlen - 1 - xor.exponent() as i64) as u32
    };
    Ok(TreeMetric { xor, recursive, closed_form })
}

/// Depth of the standard dyadic interval of length `b - a`.
fn interval_level(a: Dyadic, b: Dyadic) -> u32 {
    forest::standard_level(a, b).expect("standard dyadic interval")
}

/// An exact rational point `num / den` with `den > 0`, for support questions about
/// non-dyadic points.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct RationalPoint {
    num: i128,
    den: i128,
}

impl RationalPoint {
    pub fn new(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Parse("zero denominator".into()));
        }
        let g = gcd(num.unsigned_abs(), den.unsigned_abs()).max(1) as i128;
        let sign = den.signum();
        Ok(RationalPoint { num: sign * num / g, den: sign * den / g })
    }

    pub fn numerator(&self) -> i128 {
        self.num
    }

    pub fn denominator(&self) -> i128 {
        self.den
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// The point itself when its denominator is a power of two.
    pub fn to_dyadic(&self) -> Option<Dyadic> {
        let den = self.den as u128;
        den.is_power_of_two().then(|| Dyadic::new(self.num, den.trailing_zeros()))
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl From<Dyadic> for RationalPoint {
    fn from(x: Dyadic) -> Self {
        RationalPoint { num: x.numerator(), den: 1i128 << x.exponent() }
    }
}

impl Ord for RationalPoint {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.num * other.den).cmp(&(other.num * self.den))
    }
}

impl PartialOrd for RationalPoint {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RationalPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl FromStr for RationalPoint {
    type Err = Error;

    /// Accepts `p/q` for any `q > 0` and every dyadic form of [`parse_point`].
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((a, b)) = s.split_once('/') {
            if !b.contains('^') {
                let num = a.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
                let den = b.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
                return RationalPoint::new(num, den);
            }
        }
        Ok(parse_point(s)?.into())
    }
}

/// A point that can be located against dyadic breakpoints.
pub trait SupportPoint: Ord + fmt::Display {
    fn cmp_dyadic(&self, x: Dyadic) -> std::cmp::Ordering;
}

impl SupportPoint for Dyadic {
    fn cmp_dyadic(&self, x: Dyadic) -> std::cmp::Ordering {
        self.cmp(&x)
    }
}

impl SupportPoint for RationalPoint {
    fn cmp_dyadic(&self, x: Dyadic) -> std::cmp::Ordering {
        self.cmp(&RationalPoint::from(x))
    }
}

fn in_interval<P: SupportPoint>(x: &P, a: Dyadic, b: Dyadic) -> bool {
    x.cmp_dyadic(a).is_ge() && x.cmp_dyadic(b).is_lt()
}

/// The coarsest standard dyadic partition with at most one point per interval.
pub fn minimal_supporting_partition<P: SupportPoint>(points: &[P]) -> Result<DyadicPartition> {
    for w in points.windows(2) {
        if w[1] == w[0] {
            return Err(Error::Support(format!("point {} appears twice", w[0])));
        }
        if w[1] < w[0] {
            return Err(Error::Support("points must be strictly increasing".into()));
        }
    }
    if let Some(x) = points.iter().find(|x| !in_interval(*x, Dyadic::ZERO, Dyadic::ONE)) {
        return Err(Error::Support(format!("{x} is not in [0, 1)")));
    }
    fn split<P: SupportPoint>(pts: &[P], a: Dyadic, k: u32, out: &mut Vec<Dyadic>) {
        let b = a + Dyadic::pow2_neg(k);
        if pts.len() <= 1 {
            out.push(b);
            return;
        }
        let mid = a + Dyadic::pow2_neg(k + 1);
        let cut = pts.partition_point(|x| x.cmp_dyadic(mid).is_lt());
        split(&pts[..cut], a, k + 1, out);
        split(&pts[cut..], mid, k + 1, out);
    }
    let mut out = vec![Dyadic::ZERO];
    split(points, Dyadic::ZERO, 0, &mut out);
    Ok(DyadicPartition { breakpoints: out })
}

/// Whether every interval of `p` contains at most one of `points`.
pub fn is_supporting<P: SupportPoint>(p: &DyadicPartition, points: &[P]) -> bool {
    p.intervals().iter().all(|(a, b)| points.iter().filter(|x| in_interval(*x, *a, *b)).count() <= 1)
}

/// `λ^e` for an integer exponent.
pub fn lambda_pow(lambda: C64, e: i64) -> Result<C64> {
    if e < 0 && lambda.norm() == 0.0 {
        return Err(Error::SingularEigenvalue(format!("λ = 0 raised to the power {e}")));
    }
    let e = i32::try_from(e).map_err(|_| Error::Resource(format!("exponent {e} out of range")))?;
    Ok(lambda.powi(e))
}

/// Apply a one-site operator to leg `leg` of an `n`-leg vector.
pub fn apply_local(amps: &[C64], d: usize, n: usize, leg: usize, a: &CMatrix) -> Vec<C64> {
    let after = d.pow((n - leg - 1) as u32);
    let block = d * after;
    let mut out = vec![r(0.0); amps.len()];
    let mut col = vec![r(0.0); d];
    for start in (0..amps.len()).step_by(block) {
        for t in 0..after {
            for (i, c) in col.iter_mut().enumerate() {
                *c = amps[start + i * after + t];
            }
            for i in 0..d {
                let mut s = r(0.0);
                for (j, c) in col.iter().enumerate() {
                    s += a[(i, j)] * c;
                }
                out[start + i * after + t] = s;
            }
        }
    }
    out
}

/// `Σ_l ⟨ψ_l, (A_1 ⋯ A_n) ψ_l⟩` with weights, for one-site operators on distinct or equal legs.
fn weighted_expectation(states: &[(f64, Vec<C64>)], d: usize, n: usize, ops: &[(usize, CMatrix)]) -> C64 {
    let mut total = r(0.0);
    for (w, psi) in states {
        let mut phi = psi.clone();
        for (leg, a) in ops.iter().rev() {
            phi = apply_local(&phi, d, n, *leg, a);
        }
        let e: C64 = psi.iter().zip(&phi).map(|(p, q)| p.conj() * q).sum();
        total += e * *w;
    }
    total
}

/// Which vacuum the field correlators are evaluated in.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Vacuum {
    /// The tree density `tr(W† · W) / d`, an equal mixture of `Φ(t) e_l`.
    #[default]
    Density,
    /// The vector `Ω` of the semicontinuous limit.
    Circle,
}

impl FromStr for Vacuum {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "density" => Ok(Vacuum::Density),
            "circle" => Ok(Vacuum::Circle),
            _ => Err(Error::Parse(format!("unknown vacuum {s:?}"))),
        }
    }
}

/// A weighted ensemble of limit states.
pub fn vacuum_ensemble(v: &Isometry3, kind: Vacuum) -> Result<Vec<(f64, LimitState)>> {
    let d = v.d;
    match kind {
        Vacuum::Density => (0..d)
            .map(|l| {
                let mut amps = vec![r(0.0); d];
                amps[l] = r(1.0);
                Ok((1.0 / d as f64, LimitState::new(BinaryTree::Leaf, 0, amps, d)?))
            })
            .collect(),
        Vacuum::Circle => Ok(vec![(1.0, semicont::vacuum(v)?)]),
    }
}

/// A field model: the tensor, its ascending system and the choice of vacuum.
#[derive(Clone, Debug)]
pub struct Model {
    pub v: Isometry3,
    pub sys: AscendingSystem,
    pub vacuum: Vacuum,
}

/// Outcome of [`Model::npoint`].
#[derive(Clone, Debug)]
pub struct NPoint {
    pub value: C64,
    /// The minimal supporting partition of the evaluated points.
    pub partition: DyadicPartition,
    /// The partition the value was actually computed on.
    pub evaluated_on: DyadicPartition,
}

impl Model {
    pub fn new(v: Isometry3, sys: AscendingSystem) -> Self {
        Model { v, sys, vacuum: Vacuum::Density }
    }

    pub fn qutrit() -> Self {
        Model::new(Isometry3::qutrit(), crate::tensorlab::qutrit_system())
    }

    pub fn with_vacuum(mut self, vacuum: Vacuum) -> Self {
        self.vacuum = vacuum;
        self
    }

    fn check_alphas(&self, alphas: &[usize]) -> Result<()> {
        match alphas.iter().find(|a| **a >= self.sys.len()) {
            Some(a) => Err(Error::Shape(format!("field index {a} out of range"))),
            None => Ok(()),
        }
    }

    /// The n-point function in the vacuum, or in `U(g)` applied to it when `state` is given.
    pub fn npoint(&self, points: &[Dyadic], alphas: &[usize], state: Option<&GroupElement>) -> Result<NPoint> {
        self.npoint_refined(points, alphas, state, None)
    }

    /// As [`Model::npoint`], evaluated on the join of the minimal supporting partition with an
    /// extra refinement.
    pub fn npoint_refined(
        &self,
        points: &[Dyadic],
        alphas: &[usize],
        state: Option<&GroupElement>,
        refine: Option<&BinaryTree>,
    ) -> Result<NPoint> {
        if points.len() != alphas.len() {
            return Err(Error::Shape(format!("{} points but {} field labels", points.len(), alphas.len())));
        }
        self.check_alphas(alphas)?;
        let p = minimal_supporting_partition(points)?;
        let mut target = p.to_tree()?;
        if let Some(t) = refine {
            target = forest::join(&target, t).0;
        }
        let mut ensemble = vacuum_ensemble(&self.v, self.vacuum)?;
        if let Some(g) = state {
            for (_, s) in ensemble.iter_mut() {
                *s = semicont::act(g, s, &self.v)?;
            }
        }
        for (_, s) in &ensemble {
            target = forest::join(&target, &s.context).0;
        }
        let n = target.leaf_count();
        if n > max_leaves() {
            return Err(Error::Resource(format!(
                "{n} leaves exceed the cap of {} (set TFT_MAX_LEAVES to raise it)",
                max_leaves()
            )));
        }
        let intervals = target.leaf_intervals();
        let mut ops = Vec::with_capacity(points.len());
        for (x, &a) in points.iter().zip(alphas) {
            let leg = intervals.iter().position(|(lo, hi)| lo <= x && x < hi).expect("intervals cover [0, 1)");
            let k = interval_level(intervals[leg].0, intervals[leg].1);
            let coeff = lambda_pow(self.sys.eigenvalues[a], -(k as i64))?;
            ops.push((leg, &self.sys.mu[a] * coeff));
        }
        let mut states = Vec::with_capacity(ensemble.len());
        for (w, s) in &ensemble {
            states.push((*w, embed(s, &target, &self.v)?.amps));
        }
        let value = weighted_expectation(&states, self.v.d, n, &ops);
        Ok(NPoint { value, partition: p, evaluated_on: target.partition() })
    }

    /// Closed form of the vacuum two-point function for distinct dyadic `x`, `y`.
    pub fn two_point_closed_form(&self, x: Dyadic, y: Dyadic, alpha: usize, beta: usize) -> Result<C64> {
        two_point_closed_form(x, y, alpha, beta, &self.sys)
    }

    /// `|C(x) - Π_j λ_{α_j}^{-log₂ f'(x_j)} C_{|f⟩}(f(x))|`.
    pub fn covariance_residual(&self, f: &GroupElement, points: &[Dyadic], alphas: &[usize]) -> Result<f64> {
        let lhs = self.npoint(points, alphas, None)?.value;
        let pl = f.to_pl();
        let mut factor = r(1.0);
        let mut moved: Vec<(Dyadic, usize)> = Vec::with_capacity(points.len());
        for (x, &a) in points.iter().zip(alphas) {
            let slope = pl.slope_at(x.to_f64());
            let j = slope.log2().round() as i64;
            factor *= lambda_pow(self.sys.eigenvalues[a], -j)?;
            moved.push((pl.eval(*x).frac(), a));
        }
        moved.sort_by(|p, q| p.0.cmp(&q.0));
        let (zs, bs): (Vec<Dyadic>, Vec<usize>) = moved.into_iter().unzip();
        let rhs = self.npoint(&zs, &bs, Some(f))?.value;
        Ok((lhs - factor * rhs).norm())
    }
}

/// Number of leading binary digits shared by `x` and `y` in `[0, 1)`.
pub fn common_digits(x: Dyadic, y: Dyadic) -> u32 {
    let k = x.exponent().max(y.exponent());
    let a = x.mul_pow2(k as i32).numerator() as u128;
    let b = y.mul_pow2(k as i32).numerator() as u128;
    let diff = a ^ b;
    if diff == 0 {
        return k;
    }
    k - (128 - diff.leading_zeros())
}

/// `D(x, y) = 2^{-l-1}` with `l` the number of common leading digits.
pub fn coarse_graining_distance(x: Dyadic, y: Dyadic) -> Dyadic {
    Dyadic::pow2_neg(common_digits(x, y) + 1)
}

/// `Σ_γ f^{αβ}_γ (λ_α λ_β)^{-l-1} λ_γ^l tr(μ^γ)/d` with `l` the shared leading digits.
pub fn two_point_closed_form(x: Dyadic, y: Dyadic, alpha: usize, beta: usize, sys: &AscendingSystem) -> Result<C64> {
    if x == y {
        return Err(Error::Support(format!("coincident points at {x}")));
    }
    for p in [x, y] {
        DyadicPoint::new(p)?;
    }
    let (alpha, beta) = if x < y { (alpha, beta) } else { (beta, alpha) };
    let l = common_digits(x, y) as i64;
    let lam = &sys.eigenvalues;
    let outer = lambda_pow(lam[alpha] * lam[beta], -l - 1)?;
    let mut s = r(0.0);
    for g in 0..sys.len() {
        let f = sys.fusion[alpha][beta][g];
        if f.norm() == 0.0 {
            continue;
        }
        s += f * lambda_pow(lam[g], l)? * sys.omega[g];
    }
    Ok(outer * s)
}

/// Vacuum one-point function of `μ^α` at any site of the level-`m` lattice: `λ_α^m tr(μ^α)/d`.
pub fn lattice_one_point(sys: &AscendingSystem, m: u32, alpha: usize) -> Result<C64> {
    Ok(lambda_pow(sys.eigenvalues[alpha], m as i64)? * sys.omega[alpha])
}

/// Vacuum two-point function `⟨μ^α_j μ^β_k⟩` on the level-`m` lattice.
///
/// With `d_T(j, k) = k' + 1` this is `(λ_α λ_β)^{k'} Σ_γ f^{αβ}_γ λ_γ^{m-k'-1} tr(μ^γ)/d`.
pub fn lattice_two_point(sys: &AscendingSystem, m: u32, j: usize, k: usize, alpha: usize, beta: usize) -> Result<C64> {
    let n = 1usize << m;
    if j >= n || k >= n {
        return Err(Error::Shape(format!("site out of range for {n} sites")));
    }
    let lam = &sys.eigenvalues;
    if j == k {
        let prod = &sys.mu[alpha] * &sys.mu[beta];
        let mut s = r(0.0);
        for g in 0..sys.len() {
            s += hs_inner(&sys.nu[g], &prod) * lambda_pow(lam[g], m as i64)? * sys.omega[g];
        }
        return Ok(s);
    }
    let (alpha, beta) = if j < k { (alpha, beta) } else { (beta, alpha) };
    let dt = (usize::BITS - (j ^ k).leading_zeros()) as i64;
    let kp = dt - 1;
    let mut s = r(0.0);
    for g in 0..sys.len() {
        let f = sys.fusion[alpha][beta][g];
        if f.norm() == 0.0 {
            continue;
        }
        s += f * lambda_pow(lam[g], m as i64 - kp - 1)? * sys.omega[g];
    }
    Ok(lambda_pow(lam[alpha] * lam[beta], kp)? * s)
}

/// The vectors `W e_l` for the level-`m` regular network `W`.
pub fn regular_network(v: &Isometry3, m: u32) -> Result<Vec<Vec<C64>>> {
    let n = 1usize << m;
    if n > max_leaves() {
        return Err(Error::Resource(format!(
            "{n} sites exceed the cap of {} (set TFT_MAX_LEAVES to raise it)",
            max_leaves()
        )));
    }
    let w = Forest::new(vec![BinaryTree::regular(m)]);
    (0..v.d)
        .map(|l| {
            let mut e = vec![r(0.0); v.d];
            e[l] = r(1.0);
            apply_forest(v, e, &w)
        })
        .collect()
}

/// Exact contraction `tr(W† (A_1 ⋯ A_n) W) / d` on the level-`m` regular network.
pub fn brute_force_npoint(v: &Isometry3, m: u32, leaf_ops: &[(usize, CMatrix)]) -> Result<C64> {
    let states = regular_network(v, m)?;
    brute_force_with(&states, v.d, m, leaf_ops)
}

/// As [`brute_force_npoint`] with the network vectors precomputed by [`regular_network`].
pub fn brute_force_with(states: &[Vec<C64>], d: usize, m: u32, leaf_ops: &[(usize, CMatrix)]) -> Result<C64> {
    let n = 1usize << m;
    for (leaf, a) in leaf_ops {
        if *leaf >= n {
            return Err(Error::Shape(format!("leaf {leaf} out of range for {n} sites")));
        }
        if a.shape() != (d, d) {
            return Err(Error::Shape(format!("operator of shape {:?}, expected {d}×{d}", a.shape())));
        }
    }
    let w = 1.0 / d as f64;
    let weighted: Vec<(f64, Vec<C64>)> = states.iter().map(|s| (w, s.clone())).collect();
    Ok(weighted_expectation(&weighted, d, n, leaf_ops))
}

/// `φ_P^α(z) = λ_α^{log₂|I|} μ^α_I` on the interval `I ∈ P` containing `z`, as a dense matrix.
pub fn discretized_field(p: &DyadicPartition, z: Dyadic, alpha: usize, sys: &AscendingSystem) -> Result<CMatrix> {
    check_dense(p, sys.d)?;
    let ivs = p.intervals();
    let i = ivs
        .iter()
        .position(|(a, b)| *a <= z && z < *b)
        .ok_or_else(|| Error::Support(format!("{z} is not in [0, 1)")))?;
    let k = interval_level(ivs[i].0, ivs[i].1);
    let a = &sys.mu[alpha] * lambda_pow(sys.eigenvalues[alpha], -(k as i64))?;
    Ok(embed_local(&a, i, p.len(), sys.d))
}

fn check_dense(p: &DyadicPartition, d: usize) -> Result<usize> {
    let n = p.len();
    let dim = d.checked_pow(n as u32).filter(|&x| x <= MAX_DENSE_DIM && n <= MAX_SMEARED_INTERVALS);
    dim.ok_or_else(|| {
        Error::Resource(format!(
            "{n} intervals of dimension {d} exceed the dense cap ({MAX_SMEARED_INTERVALS} intervals, {MAX_DENSE_DIM} states)"
        ))
    })
}

/// `1 ⊗ ⋯ ⊗ a ⊗ ⋯ ⊗ 1` with `a` on site `i` of `n`.
fn embed_local(a: &CMatrix, i: usize, n: usize, d: usize) -> CMatrix {
    let before = CMatrix::identity(d.pow(i as u32), d.pow(i as u32));
    let after = CMatrix::identity(d.pow((n - i - 1) as u32), d.pow((n - i - 1) as u32));
    before.kronecker(a).kronecker(&after)
}

/// `φ_P(f) = Σ_α Σ_I f̄_α(I) λ_α^{log₂|I|} μ^α_I` with `f̄_α(I) = (1/d) ∫_I tr((ν^α)† f)`.
pub fn smeared_field(p: &DyadicPartition, f: &dyn Fn(f64) -> CMatrix, sys: &AscendingSystem) -> Result<CMatrix> {
    let d = sys.d;
    let dim = check_dense(p, d)?;
    let mut out = CMatrix::zeros(dim, dim);
    for (i, (a, b)) in p.intervals().into_iter().enumerate() {
        let k = interval_level(a, b);
        let coeffs = simpson_hs(f, a.to_f64(), b.to_f64(), &sys.nu, d)?;
        let mut local = CMatrix::zeros(d, d);
        for (al, c) in coeffs.into_iter().enumerate() {
            if c.norm() == 0.0 {
                continue;
            }
            local += &sys.mu[al] * (c * lambda_pow(sys.eigenvalues[al], -(k as i64))?);
        }
        out += embed_local(&local, i, p.len(), d);
    }
    Ok(out)
}

/// Composite Simpson estimates of `(1/d) ∫_a^b tr((ν^α)† f(x)) dx` for every `α`.
fn simpson_hs(f: &dyn Fn(f64) -> CMatrix, a: f64, b: f64, nu: &[CMatrix], d: usize) -> Result<Vec<C64>> {
    let h = (b - a) / SIMPSON_STEPS as f64;
    let mut acc = CMatrix::zeros(d, d);
    for s in 0..=SIMPSON_STEPS {
        let w = if s == 0 || s == SIMPSON_STEPS {
            1.0
        } else if s % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let m = f(a + s as f64 * h);
        if m.shape() != (d, d) {
            return Err(Error::Shape(format!("smearing function returned shape {:?}", m.shape())));
        }
        acc += m * r(w);
    }
    acc *= r(h / 3.0);
    Ok(nu.iter().map(|n| hs_inner(n, &acc)).collect())
}

/// One row of the operator product expansion.
#[derive(Clone, Debug)]
pub struct OpeEntry {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub coefficient: C64,
    /// `h_γ - h_α - h_β`.
    pub exponent: f64,
}

/// OPE coefficients with their short-distance exponents and the fusion matrices `N^α`.
#[derive(Clone, Debug)]
pub struct OpeTable {
    pub entries: Vec<OpeEntry>,
    /// `n[α][β][γ] = 1` iff `|f^{αβ}_γ| > tol`.
    pub n: Vec<Vec<Vec<u8>>>,
}

impl OpeTable {
    /// `[N^α]_{βγ}`.
    pub fn fusion_matrix(&self, alpha: usize) -> Vec<Vec<u8>> {
        self.n[alpha].clone()
    }

    pub fn entry(&self, alpha: usize, beta: usize, gamma: usize) -> Option<&OpeEntry> {
        self.entries.iter().find(|e| e.alpha == alpha && e.beta == beta && e.gamma == gamma)
    }

    /// The nonzero entries of the product `φ^α φ^β`.
    pub fn row(&self, alpha: usize, beta: usize) -> Vec<&OpeEntry> {
        self.entries.iter().filter(|e| e.alpha == alpha && e.beta == beta).collect()
    }
}

pub fn ope_table(sys: &AscendingSystem, tol: f64) -> OpeTable {
    ope_from_fusion(&sys.eigenvalues, &sys.fusion, tol)
}

/// OPE entries from eigenvalues `λ_α` and fusion coefficients `f^{αβ}_γ`.
pub fn ope_from_fusion(eigenvalues: &[C64], fusion: &[Vec<Vec<C64>>], tol: f64) -> OpeTable {
    let h: Vec<f64> = eigenvalues.iter().map(|l| -l.norm().log2()).collect();
    let k = eigenvalues.len();
    let mut entries = Vec::new();
    let mut n = vec![vec![vec![0u8; k]; k]; k];
    for a in 0..k {
        for b in 0..k {
            for g in 0..k {
                let f = fusion[a][b][g];
                if f.norm() > tol {
                    n[a][b][g] = 1;
                    entries.push(OpeEntry { alpha: a, beta: b, gamma: g, coefficient: f, exponent: h[g] - h[a] - h[b] });
                }
            }
        }
    }
    OpeTable { entries, n }
}

/// Convert exact dyadic points to the representation used by [`Model::npoint`].
pub fn points_from_f64(xs: &[f64]) -> Result<Vec<Dyadic>> {
    xs.iter().map(|&x| Dyadic::from_f64(x)).collect()
}

/// A refinement of `p` on which `g` is linear with standard dyadic images.
pub fn good_partition(g: &GroupElement, p: &DyadicPartition) -> Result<DyadicPartition> {
    thompson::good_refinement(g, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thompson::generator;

    fn d(s: &str) -> Dyadic {
        parse_point(s).unwrap()
    }

    #[test]
    fn tree_metric_example() {
        let x: DyadicPoint = "0b0.01101".parse().unwrap();
        let y: DyadicPoint = "15/32".parse().unwrap();
        let t = xor_and_tree_metric(&x, &y, 5).unwrap();
        assert_eq!((t.recursive, t.closed_form), (2, 2));
        assert_eq!(t.xor, d("1/16"));
        assert_eq!(x.to_string(), "0.01101");
    }

    #[test]
    fn supporting_partition_example() {
        let pts = points_from_f64(&[1.0 / 7.0, 2.0 / 3.0, 5.0 / 6.0]).unwrap();
        let p = minimal_supporting_partition(&pts).unwrap();
        assert_eq!(p.breakpoints, vec![d("0"), d("1/2"), d("3/4"), d("1")]);
        assert_eq!(minimal_supporting_partition(&[d("3/8")]).unwrap(), DyadicPartition::trivial());
        assert!(matches!(minimal_supporting_partition(&[d("1/4"), d("1/4")]), Err(Error::Support(_))));
        let q = |s: &str| s.parse::<RationalPoint>().unwrap();
        let p = minimal_supporting_partition(&[q("1/7"), q("2/3"), q("5/6")]).unwrap();
        assert_eq!(p.breakpoints, vec![d("0"), d("1/2"), d("3/4"), d("1")]);
    }

    #[test]
    fn closed_form_matches_npoint() {
        let model = Model::qutrit();
        let b1 = model.sys.index_of("beta1").unwrap();
        let (x, y) = (d("3/16"), d("5/16"));
        let a = model.npoint(&[x, y], &[b1, b1], None).unwrap().value;
        let b = model.two_point_closed_form(x, y, b1, b1).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!((model.two_point_closed_form(x, y, 0, 0).unwrap() - r(1.0)).norm() < 1e-12);
    }

    #[test]
    fn lattice_matches_oracle() {
        let model = Model::qutrit();
        let states = regular_network(&model.v, 2).unwrap();
        for a in 0..9 {
            for b in 0..9 {
                let ops = [(1, model.sys.mu[a].clone()), (2, model.sys.mu[b].clone())];
                let brute = brute_force_with(&states, 3, 2, &ops).unwrap();
                let formula = lattice_two_point(&model.sys, 2, 1, 2, a, b).unwrap();
                assert!((brute - formula).norm() < 1e-12, "{a} {b}");
            }
        }
    }

    #[test]
    fn covariance_under_a() {
        let model = Model::qutrit();
        let b1 = model.sys.index_of("beta1").unwrap();
        let res = model.covariance_residual(&generator("A").unwrap(), &[d("1/8"), d("5/8")], &[b1, b1]).unwrap();
        assert!(res < 1e-9, "{res}");
    }
}

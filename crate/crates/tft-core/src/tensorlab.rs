//! Analysis of a three-leg isometry `V: h → h ⊗ h`: perfectness checks, the ascending map
//! `E(A) = V†(A ⊗ 1)V`, its eigensystem, fusion coefficients and blob vectors.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Default numerical tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tolerance for grouping numerically equal eigenvalues.
const CLUSTER_TOL: f64 = 1e-6;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `⟨a, b⟩₂ = tr(a† b) / d`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    let d = a.nrows() as f64;
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum::<C64>() / d
}

/// Row-major vectorization.
fn vec_of(a: &CMatrix) -> Vec<C64> {
    let d = a.nrows();
    (0..d * d).map(|i| a[(i / d, i % d)]).collect()
}

fn unvec(v: &[C64], d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

/// An isometry `V: C^d → C^d ⊗ C^d` stored as a `d² × d` matrix with rows `(j, k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Isometry3 {
    pub d: usize,
    pub v: CMatrix,
}

#[derive(Serialize, Deserialize)]
struct TensorJson {
    d: usize,
    entries: Vec<[f64; 2]>,
}

impl Isometry3 {
    pub fn new(d: usize, v: CMatrix) -> Result<Self> {
        if v.nrows() != d * d || v.ncols() != d {
            return Err(Error::Shape(format!(
                "expected a {}x{} matrix, got {}x{}",
                d * d,
                d,
                v.nrows(),
                v.ncols()
            )));
        }
        Ok(Isometry3 { d, v })
    }

    /// Build from a function of `(j, k, l)`.
    pub fn from_fn(d: usize, f: impl Fn(usize, usize, usize) -> C64) -> Self {
        Isometry3 { d, v: CMatrix::from_fn(d * d, d, |row, l| f(row / d, row % d, l)) }
    }

    /// `⟨jk|V|l⟩ = 1/√2` for distinct `j, k, l` and 0 otherwise.
    pub fn qutrit() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Isometry3::from_fn(3, |j, k, l| if j != k && k != l && j != l { r(s) } else { r(0.0) })
    }

    /// Look up a named preset.
    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "qutrit" => Ok(Isometry3::qutrit()),
            _ => Err(Error::Parse(format!("unknown tensor preset {name:?}"))),
        }
    }

    pub fn entry(&self, j: usize, k: usize, l: usize) -> C64 {
        self.v[(j * self.d + k, l)]
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let t: TensorJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        let d = t.d;
        if d == 0 || t.entries.len() != d * d * d {
            return Err(Error::Shape(format!("{} entries do not form a d = {} tensor", t.entries.len(), d)));
        }
        Ok(Isometry3::from_fn(d, |j, k, l| {
            let e = t.entries[(j * d + k) * d + l];
            c(e[0], e[1])
        }))
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let d = self.d;
        let mut entries = Vec::with_capacity(d * d * d);
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let z = self.entry(j, k, l);
                    entries.push([z.re, z.im]);
                }
            }
        }
        serde_json::to_value(TensorJson { d, entries }).expect("serializable")
    }

    /// `E(A) = V†(A ⊗ 1)V`.
    pub fn ascend(&self, a: &CMatrix) -> CMatrix {
        self.fuse(a, &CMatrix::identity(self.d, self.d))
    }

    /// `F(A, B) = V†(A ⊗ B)V`.
    pub fn fuse(&self, a: &CMatrix, b: &CMatrix) -> CMatrix {
        self.v.adjoint() * a.kronecker(b) * &self.v
    }

    /// Matrix of `E` on row-major vectorized operators.
    pub fn ascending_matrix(&self) -> CMatrix {
        let d = self.d;
        let mut m = CMatrix::zeros(d * d, d * d);
        for col in 0..d * d {
            let mut e = CMatrix::zeros(d, d);
            e[(col / d, col % d)] = r(1.0);
            let img = vec_of(&self.ascend(&e));
            for (row, z) in img.into_iter().enumerate() {
                m[(row, col)] = z;
            }
        }
        m
    }

    /// The three-leg tensor `T_{abc} = V_{bc,a}` with the input leg bent up.
    fn leg_tensor(&self) -> impl Fn(usize, usize, usize) -> C64 + '_ {
        move |a, b, c| self.entry(b, c, a)
    }
}

/// Outcome of [`verify_tensor`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorReport {
    pub isometry: bool,
    pub swap_invariant: bool,
    pub planar_perfect: bool,
    pub rotation_invariant: bool,
}

/// Whether `m†m = c·1` with `c > 0`, relative deviation below `tol`.
pub fn proportional_to_isometry(m: &CMatrix, tol: f64) -> bool {
    let g = m.adjoint() * m;
    let n = g.nrows();
    let scale = g.trace().re / n as f64;
    if !(scale > tol) {
        return false;
    }
    let dev = (&g - CMatrix::identity(n, n) * r(scale)).norm();
    dev / scale < tol
}

/// Isometry, swap invariance, planar perfectness and rotation invariance of `V`.
pub fn verify_tensor(v: &Isometry3, tol: f64) -> TensorReport {
    let d = v.d;
    let id = CMatrix::identity(d, d);
    let isometry = (v.v.adjoint() * &v.v - &id).norm() < tol;
    let mut swap_invariant = true;
    let mut rotation_invariant = true;
    let t = v.leg_tensor();
    for a in 0..d {
        for b in 0..d {
            for cc in 0..d {
                if (v.entry(a, b, cc) - v.entry(b, a, cc)).norm() > tol {
                    swap_invariant = false;
                }
                if (t(a, b, cc) - t(b, cc, a)).norm() > tol {
                    rotation_invariant = false;
                }
            }
        }
    }
    // The state T itself is trivially proportional to an isometry when nonzero; the remaining
    // cases send one leg to the two cyclically following legs.
    let state = CMatrix::from_fn(d * d * d, 1, |i, _| t(i / (d * d), (i / d) % d, i % d));
    let mut planar_perfect = proportional_to_isometry(&state, tol);
    for shift in 0..3 {
        let m = CMatrix::from_fn(d * d, d, |row, a| {
            let (b, cc) = (row / d, row % d);
            let legs = [a, b, cc];
            t(legs[(3 - shift) % 3], legs[(4 - shift) % 3], legs[(5 - shift) % 3])
        });
        planar_perfect &= proportional_to_isometry(&m, tol);
    }
    TensorReport { isometry, swap_invariant, planar_perfect, rotation_invariant }
}

/// Eigendata of `E` together with fusion coefficients.
#[derive(Clone, Debug)]
pub struct AscendingSystem {
    pub d: usize,
    pub labels: Vec<String>,
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors `μ^α`.
    pub mu: Vec<CMatrix>,
    /// Dual basis `ν^α` with `⟨ν^α, μ^β⟩₂ = δ_{αβ}`.
    pub nu: Vec<CMatrix>,
    /// `fusion[α][β][γ] = f^{αβ}_γ`.
    pub fusion: Vec<Vec<Vec<C64>>>,
    /// Vacuum weights `ω(μ^α) = tr(μ^α) / d`.
    pub omega: Vec<C64>,
}

impl AscendingSystem {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `h_α = -Re log₂ λ_α`.
    pub fn scaling_dimensions(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| -l.norm().log2()).collect()
    }

    /// Resolve a label or a numeric index.
    pub fn index_of(&self, name: &str) -> Result<usize> {
        if let Some(i) = self.labels.iter().position(|l| l == name) {
            return Ok(i);
        }
        match name.parse::<usize>() {
            Ok(i) if i < self.len() => Ok(i),
            _ => Err(Error::Parse(format!("unknown field label {name:?}"))),
        }
    }

    /// `max_α ‖E(μ^α) - λ_α μ^α‖`.
    pub fn eigen_residual(&self, v: &Isometry3) -> f64 {
        self.mu
            .iter()
            .zip(&self.eigenvalues)
            .map(|(m, l)| (v.ascend(m) - m * *l).norm())
            .fold(0.0, f64::max)
    }

    /// `max |⟨ν^α, μ^β⟩₂ - δ_{αβ}|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for (a, nu) in self.nu.iter().enumerate() {
            for (b, mu) in self.mu.iter().enumerate() {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((hs_inner(nu, mu) - r(target)).norm());
            }
        }
        worst
    }

    /// `Σ_α ⟨ν^α, A⟩₂ μ^α`.
    pub fn expand(&self, a: &CMatrix) -> CMatrix {
        let d = self.d;
        self.nu.iter().zip(&self.mu).fold(CMatrix::zeros(d, d), |acc, (nu, mu)| acc + mu * hs_inner(nu, a))
    }
}

/// Duals `ν^α` from the columns `vec(μ^α)`.
fn duals(mu: &[CMatrix], d: usize) -> Result<Vec<CMatrix>> {
    let n = mu.len();
    let m = CMatrix::from_fn(d * d, n, |i, a| mu[a][(i / d, i % d)]);
    if n != d * d {
        return Err(Error::Degeneracy(format!("{n} eigenvectors for a {}-dimensional space", d * d)));
    }
    let inv = m.clone().try_inverse().ok_or_else(|| Error::Degeneracy("eigenvectors are linearly dependent".into()))?;
    let duals = inv.adjoint() * r(d as f64);
    Ok((0..n).map(|a| unvec(&duals.column(a).iter().copied().collect::<Vec<_>>(), d)).collect())
}

/// Normalize to unit Hilbert-Schmidt norm with the first nonzero entry real positive.
fn fix_phase(m: &CMatrix) -> CMatrix {
    let norm = hs_inner(m, m).re.sqrt();
    let lead = m.iter().copied().find(|z| z.norm() > 1e-8 * norm.max(1e-300)).unwrap_or(r(1.0));
    m * (lead.conj() / lead.norm() / norm)
}

/// Eigendata of `E`. With `basis` supplied, the eigen-relations are verified instead of solved.
pub fn ascending_eigensystem(v: &Isometry3, basis: Option<&[CMatrix]>, tol: f64) -> Result<AscendingSystem> {
    let d = v.d;
    let (eigenvalues, mu) = match basis {
        Some(b) => {
            let mut eig = Vec::with_capacity(b.len());
            for (a, m) in b.iter().enumerate() {
                if m.nrows() != d || m.ncols() != d {
                    return Err(Error::Shape(format!("basis element {a} is not {d}x{d}")));
                }
                let img = v.ascend(m);
                let lambda = hs_inner(m, &img) / hs_inner(m, m);
                if (img - m * lambda).norm() > tol * m.norm().max(1.0) {
                    return Err(Error::Degeneracy(format!("basis element {a} is not an eigenvector of E")));
                }
                eig.push(lambda);
            }
            (eig, b.to_vec())
        }
        None => auto_eigenbasis(v, tol)?,
    };
    let nu = duals(&mu, d)?;
    let omega = mu.iter().map(|m| m.trace() / r(d as f64)).collect();
    let labels = (0..mu.len()).map(|i| i.to_string()).collect();
    let mut sys = AscendingSystem { d, labels, eigenvalues, mu, nu, fusion: Vec::new(), omega };
    sys.fusion = fusion_coefficients(&sys, v);
    Ok(sys)
}

fn auto_eigenbasis(v: &Isometry3, tol: f64) -> Result<(Vec<C64>, Vec<CMatrix>)> {
    let d = v.d;
    let n = d * d;
    let e = v.ascending_matrix();
    let schur = e.clone().schur();
    let eigs: Vec<C64> = match schur.eigenvalues() {
        Some(ev) => ev.iter().copied().collect(),
        None => {
            let (_, t) = schur.unpack();
            (0..n).map(|i| t[(i, i)]).collect()
        }
    };
    let mut clusters: Vec<(C64, usize)> = Vec::new();
    for z in eigs {
        match clusters.iter_mut().find(|(c, _)| (*c - z).norm() < CLUSTER_TOL) {
            Some(entry) => {
                let k = entry.1 as f64;
                entry.0 = (entry.0 * k + z) / (k + 1.0);
                entry.1 += 1;
            }
            None => clusters.push((z, 1)),
        }
    }
    let mut pairs: Vec<(C64, CMatrix)> = Vec::new();
    for (lambda, mult) in clusters {
        let shifted = &e - CMatrix::identity(n, n) * lambda;
        let svd = shifted.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let scale = e.norm().max(1.0);
        let mut null: Vec<Vec<C64>> = Vec::new();
        for (i, s) in svd.singular_values.iter().enumerate() {
            if *s < CLUSTER_TOL * scale {
                null.push(v_t.row(i).iter().map(|z| z.conj()).collect());
            }
        }
        if null.len() < mult {
            return Err(Error::Degeneracy(format!(
                "eigenvalue {lambda} has multiplicity {mult} but only {} eigenvectors",
                null.len()
            )));
        }
        let mut vecs: Vec<CMatrix> = null.iter().map(|x| unvec(x, d)).collect();
        if (lambda - r(1.0)).norm() < CLUSTER_TOL {
            let mut seeded = vec![CMatrix::identity(d, d)];
            seeded.extend(vecs);
            vecs = gram_schmidt(&seeded, tol);
        }
        let lam = if lambda.im.abs() < tol { r(lambda.re) } else { lambda };
        let lam = if (lam.re - lam.re.round()).abs() < tol && lam.im == 0.0 { r(lam.re.round()) } else { lam };
        for m in vecs.into_iter().take(mult) {
            pairs.push((lam, fix_phase(&m)));
        }
    }
    pairs.sort_by(|a, b| {
        let (x, y) = (a.0, b.0);
        let key = |z: C64| (-(z.norm() * 1e9).round(), -(z.re * 1e9).round(), -(z.im * 1e9).round());
        key(x).partial_cmp(&key(y)).expect("finite")
    });
    Ok(pairs.into_iter().unzip())
}

/// Gram-Schmidt in the Hilbert-Schmidt inner product, dropping dependent vectors.
fn gram_schmidt(vs: &[CMatrix], tol: f64) -> Vec<CMatrix> {
    let mut out: Vec<CMatrix> = Vec::new();
    for v in vs {
        let mut w = v.clone();
        for u in &out {
            w -= u * hs_inner(u, &w);
        }
        let n = hs_inner(&w, &w).re.sqrt();
        if n > tol.max(1e-7) {
            out.push(w / r(n));
        }
    }
    out
}

/// `f^{αβ}_γ = ⟨ν^γ, F(μ^α, μ^β)⟩₂`.
pub fn fusion_coefficients(sys: &AscendingSystem, v: &Isometry3) -> Vec<Vec<Vec<C64>>> {
    sys.mu
        .iter()
        .map(|ma| {
            sys.mu
                .iter()
                .map(|mb| {
                    let f = v.fuse(ma, mb);
                    sys.nu.iter().map(|ng| hs_inner(ng, &f)).collect()
                })
                .collect()
        })
        .collect()
}

/// `max ‖F(μ^α, μ^β) - Σ_γ f^{αβ}_γ μ^γ‖`.
pub fn fusion_residual(sys: &AscendingSystem, v: &Isometry3) -> f64 {
    let d = sys.d;
    let mut worst = 0.0f64;
    for (a, ma) in sys.mu.iter().enumerate() {
        for (b, mb) in sys.mu.iter().enumerate() {
            let f = v.fuse(ma, mb);
            let s = sys.mu.iter().enumerate().fold(CMatrix::zeros(d, d), |acc, (g, mg)| acc + mg * sys.fusion[a][b][g]);
            worst = worst.max((f - s).norm());
        }
    }
    worst
}

/// `⟨μ^γ, F(μ^α, μ^β)⟩₂`, the projection onto `μ^γ` itself rather than onto its dual.
///
/// Agrees with `f^{αβ}_γ` only when `μ^γ` is orthonormal to the rest of the basis.
pub fn projection_coefficient(sys: &AscendingSystem, v: &Isometry3, a: usize, b: usize, g: usize) -> C64 {
    hs_inner(&sys.mu[g], &v.fuse(&sys.mu[a], &sys.mu[b]))
}

/// Labels of the qutrit preset basis, in order.
pub const QUTRIT_LABELS: [&str; 9] = ["1", "delta1", "delta2", "beta1", "beta2", "beta3", "alpha1", "alpha2", "alpha3"];

/// The explicit qutrit eigenbasis: identity, two diagonal, three symmetric and three
/// antisymmetric off-diagonal operators.
pub fn qutrit_basis() -> Vec<CMatrix> {
    let m = |rows: [[f64; 3]; 3]| CMatrix::from_fn(3, 3, |i, j| r(rows[i][j]));
    vec![
        CMatrix::identity(3, 3),
        m([[-1.0, 0.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 1.0]]),
        m([[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]),
        m([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]]),
        m([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        m([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
        m([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]),
        m([[0.0, 0.0, -1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]]),
        m([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]),
    ]
}

/// The qutrit ascending system in the explicit labelled basis.
pub fn qutrit_system() -> AscendingSystem {
    let v = Isometry3::qutrit();
    let mut sys = ascending_eigensystem(&v, Some(&qutrit_basis()), DEFAULT_TOL).expect("qutrit basis is an eigenbasis");
    sys.labels = QUTRIT_LABELS.iter().map(|s| s.to_string()).collect();
    sys
}

/// Whether `V†(b ⊗ b) = b` within `tol`.
pub fn verify_blob(v: &Isometry3, b: &[C64], tol: f64) -> Result<bool> {
    let d = v.d;
    if b.len() != d {
        return Err(Error::Shape(format!("blob has {} entries, expected {d}", b.len())));
    }
    if b.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::DegenerateBlob("zero vector".into()));
    }
    for l in 0..d {
        let mut s = r(0.0);
        for j in 0..d {
            for k in 0..d {
                s += v.entry(j, k, l).conj() * b[j] * b[k];
            }
        }
        if (s - b[l]).norm() > tol {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The four qutrit blob vectors.
pub fn qutrit_blobs() -> Vec<Vec<C64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    [[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]]
        .iter()
        .map(|signs| signs.iter().map(|x| r(x * s)).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qutrit_checks() {
        let rep = verify_tensor(&Isometry3::qutrit(), DEFAULT_TOL);
        assert!(rep.isometry && rep.swap_invariant && rep.planar_perfect && rep.rotation_invariant);
        let zero = Isometry3::from_fn(3, |_, _, _| r(0.0));
        assert!(!verify_tensor(&zero, DEFAULT_TOL).isometry);
    }

    #[test]
    fn qutrit_preset_eigenvalues() {
        let sys = qutrit_system();
        let expect = [1.0, -0.5, -0.5, 0.5, 0.5, 0.5, -0.5, -0.5, -0.5];
        for (l, e) in sys.eigenvalues.iter().zip(expect) {
            assert!((l - r(e)).norm() < 1e-12);
        }
        assert!(sys.biorthogonality_residual() < 1e-12);
        let f = &sys.fusion;
        assert!((f[4][8][6] - r(0.5)).norm() < 1e-12);
        let v = Isometry3::qutrit();
        assert!((projection_coefficient(&sys, &v, 4, 8, 6) - r(1.0 / 3.0)).norm() < 1e-12);
        assert!((f[1][2][0] - r(-1.0 / 6.0)).norm() < 1e-12);
    }

    #[test]
    fn auto_basis_spectrum() {
        let v = Isometry3::qutrit();
        let sys = ascending_eigensystem(&v, None, DEFAULT_TOL).unwrap();
        assert_eq!(sys.mu[0], CMatrix::identity(3, 3) / r(1.0));
        assert!(sys.eigen_residual(&v) < 1e-9);
        let plus = sys.eigenvalues.iter().filter(|l| (*l - r(0.5)).norm() < 1e-9).count();
        let minus = sys.eigenvalues.iter().filter(|l| (*l - r(-0.5)).norm() < 1e-9).count();
        assert_eq!((plus, minus), (3, 5));
    }

    #[test]
    fn blobs() {
        let v = Isometry3::qutrit();
        for b in qutrit_blobs() {
            assert!(verify_blob(&v, &b, DEFAULT_TOL).unwrap());
        }
        assert!(!verify_blob(&v, &[r(1.0), r(0.0), r(0.0)], DEFAULT_TOL).unwrap());
        assert!(verify_blob(&v, &[r(0.0); 3], DEFAULT_TOL).is_err());
    }
}

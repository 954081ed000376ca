//! The doubled-line isometry of the Fibonacci category and its ascending operator on the
//! two-strand space spanned by the identity and the cup-cap.

use nalgebra::{Matrix2, Vector2};

use super::diagram::{Builder, DiagramSum, Morphism};
use super::reduce::{inner_product, reduce, resolve_crossings};
use super::TrivalentParams;
use crate::error::{Error, Result};
use crate::tensorlab::{r, C64};

/// Field labels of the Fibonacci system.
pub const FIB_LABELS: [&str; 2] = ["1", "tau"];

/// The braiding phase `e^{4πi/5}`.
pub fn braid_phase() -> C64 {
    C64::from_polar(1.0, 4.0 * std::f64::consts::PI / 5.0)
}

/// The doubled-line vertex `V: 2 → 4`: two trivalent vertices and two crossings. Outputs
/// `0, 1` form the first site and `2, 3` the second.
pub fn fib_v() -> Morphism {
    // Boundary [t1, t0, b0, b1, b2, b3]: inputs t1, t0, outputs b3, b2, b1, b0.
    let mut b = Builder::new(6);
    let p = b.vertex(3);
    let q = b.vertex(3);
    let x1 = b.vertex(4);
    let x2 = b.vertex(4);
    b.edge((p, 0), (0, 1)).edge((p, 1), (x1, 0)).edge((p, 2), (x2, 0));
    b.edge((q, 0), (x2, 1)).edge((q, 1), (x1, 3)).edge((q, 2), (0, 4));
    b.edge((x1, 1), (0, 2)).edge((x1, 2), (0, 3));
    b.edge((x2, 2), (0, 5)).edge((x2, 3), (0, 0));
    Morphism::from_diagram(2, 4, b.build().expect("valid V")).expect("arity")
}

/// Eigendata and fusion coefficients of the Fibonacci ascending operator.
#[derive(Clone, Debug)]
pub struct FibSystem {
    pub params: TrivalentParams,
    /// Matrix of `E` in the basis (identity, cup-cap); column `j` is the image of basis vector `j`.
    pub e_matrix: Matrix2<C64>,
    pub eigenvalues: Vec<C64>,
    /// Eigenvectors `μ^α` in the basis (identity, cup-cap).
    pub mu: Vec<Vector2<C64>>,
    /// `fusion[α][β][γ] = f^{αβ}_γ`.
    pub fusion: Vec<Vec<Vec<C64>>>,
    /// The value of `V†V` on the identity, divided out of every matrix element.
    pub normalization: C64,
    pub labels: Vec<String>,
}

impl FibSystem {
    pub fn scaling_dimensions(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| -l.norm().log2()).collect()
    }
}

/// Coordinates of a two-strand element in the basis (identity, cup-cap).
pub fn two_strand_coords(x: &DiagramSum, p: &TrivalentParams) -> Result<Vector2<C64>> {
    let basis = [Morphism::identity(2).sum, Morphism::cup_cap().sum];
    let overlaps = Vector2::new(inner_product(&basis[0], x, p)?, inner_product(&basis[1], x, p)?);
    let d = p.d;
    let gram = Matrix2::new(d * d, d, d, d * d);
    let inv = gram.try_inverse().ok_or_else(|| Error::Gram("two-strand Gram matrix is singular".into()))?;
    Ok(inv * overlaps)
}

fn basis_element(v: &Vector2<C64>) -> Morphism {
    Morphism::identity(2).scale(v[0]).add(&Morphism::cup_cap().scale(v[1])).expect("same type")
}

/// `V†(A ⊗ B)V` in the basis (identity, cup-cap), unnormalized.
fn fuse_raw(v: &Morphism, vd: &Morphism, a: &Vector2<C64>, bb: &Vector2<C64>, p: &TrivalentParams) -> Result<Vector2<C64>> {
    let mid = basis_element(a).tensor(&basis_element(bb));
    let m = vd.compose(&mid.compose(v)?)?;
    let reduced = reduce(&m.sum, p)?;
    two_strand_coords(&reduced, p)
}

/// Build `V`, resolve its crossings, and compute `E(A) = V†(A ⊗ 1)V` and `F(A, B) = V†(A ⊗ B)V`
/// by diagram reduction.
pub fn fib_ascending(p: &TrivalentParams) -> Result<FibSystem> {
    if !p.is_fibonacci() {
        return Err(Error::Parameter("the doubled-line construction needs Fibonacci parameters".into()));
    }
    let v = fib_v();
    let resolved = Morphism::new(2, 4, resolve_crossings(&v.sum, braid_phase()))?;
    let vd = resolved.dagger();
    let id = Vector2::new(r(1.0), r(0.0));
    let cup = Vector2::new(r(0.0), r(1.0));
    let e_id = fuse_raw(&resolved, &vd, &id, &id, p)?;
    let s = e_id[0];
    if s.norm() < 1e-12 || e_id[1].norm() > 1e-9 * s.norm() {
        return Err(Error::Degeneracy(format!("V†V is not proportional to the identity: {e_id:?}")));
    }
    let e_cup = fuse_raw(&resolved, &vd, &cup, &id, p)? / s;
    let e_matrix = Matrix2::new(r(1.0), e_cup[0], r(0.0), e_cup[1]);
    let lambda = e_cup[1];
    if (lambda - r(1.0)).norm() < 1e-12 {
        return Err(Error::Degeneracy("ascending operator has a repeated eigenvalue".into()));
    }
    // E(a·1 + E) = λ(a·1 + E) gives a = e₀₁ / (λ - 1).
    let mu = vec![id, Vector2::new(e_cup[0] / (lambda - r(1.0)), r(1.0))];
    let basis = Matrix2::from_columns(&mu);
    let to_mu = basis.try_inverse().ok_or_else(|| Error::Degeneracy("eigenvectors are dependent".into()))?;
    let mut fusion = vec![vec![vec![r(0.0); 2]; 2]; 2];
    for a in 0..2 {
        for b in 0..2 {
            let f = to_mu * (fuse_raw(&resolved, &vd, &mu[a], &mu[b], p)? / s);
            fusion[a][b] = vec![f[0], f[1]];
        }
    }
    Ok(FibSystem {
        params: *p,
        e_matrix,
        eigenvalues: vec![r(1.0), lambda],
        mu,
        fusion,
        normalization: s,
        labels: FIB_LABELS.iter().map(|s| s.to_string()).collect(),
    })
}

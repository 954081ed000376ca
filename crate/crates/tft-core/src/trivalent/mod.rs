//! Evaluation of planar trivalent diagrams in a trivalent category with loop value `d`, bigon
//! value `b` and triangle value `t`.

mod diagram;
mod fibonacci;
mod named;
mod reduce;

pub use diagram::{glue, Builder, Diagram, DiagramJson, DiagramSum, End, Morphism};
pub use fibonacci::{braid_phase, fib_ascending, fib_v, two_strand_coords, FibSystem, FIB_LABELS};
pub use named::{beta4, crossing, f4, h_move, i_move, lollipop, named_diagram, theta, window, NAMED_DIAGRAMS};
pub use reduce::{evaluate, evaluate_with, inner_product, reduce, reduce_with, resolve_crossings, Chooser};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tensorlab::{r, C64};

/// Tolerance for the parameter consistency checks.
pub const PARAM_TOL: f64 = 1e-9;

/// Loop, bigon and triangle values together with `dim C₄`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrivalentParams {
    pub d: C64,
    pub b: C64,
    pub t: C64,
    pub dim_c4: u8,
}

/// `(1 + √5)/2`.
pub fn phi_plus() -> f64 {
    (1.0 + 5f64.sqrt()) / 2.0
}

/// `(1 - √5)/2`.
pub fn phi_minus() -> f64 {
    (1.0 - 5f64.sqrt()) / 2.0
}

impl TrivalentParams {
    pub fn new(d: C64, b: C64, t: C64, dim_c4: u8) -> Result<Self> {
        let p = TrivalentParams { d, b, t, dim_c4 };
        p.validate()?;
        Ok(p)
    }

    /// The Fibonacci category with `d = Φ⁺`, `b = 1`, `t = Φ⁻`.
    pub fn fibonacci() -> Self {
        TrivalentParams { d: r(phi_plus()), b: r(1.0), t: r(phi_minus()), dim_c4: 2 }
    }

    /// An `SO(3)_q`-type category: `t` is fixed by `bd + t - dt - 2b = 0`.
    pub fn so3(d: C64, b: C64) -> Result<Self> {
        if (d - r(1.0)).norm() < PARAM_TOL {
            return Err(Error::Parameter("d = 1 leaves t undetermined".into()));
        }
        TrivalentParams::new(d, b, b * (r(2.0) - d) / (r(1.0) - d), 3)
    }

    /// `bd + t - dt - 2b`.
    pub fn p_so3(&self) -> C64 {
        self.b * self.d + self.t - self.d * self.t - self.b * r(2.0)
    }

    /// The two conditions under which `det M(4,0) = det M(4,1) = 0` without `P_SO(3) = 0`.
    pub fn fib_conditions(&self) -> (C64, C64) {
        let (d, b, t) = (self.d, self.b, self.t);
        let first = b * d + t + d * t;
        let second = r(2.0) * b.powi(5) * d + r(2.0) * b.powi(4) * d * t - r(4.0) * b.powi(3) * d * t * t
            + r(2.0) * b * d * t.powi(4)
            + r(2.0) * b * d * d * t.powi(4);
        (first, second)
    }

    pub fn is_fibonacci(&self) -> bool {
        let (a, c) = self.fib_conditions();
        let scale = 1.0 + self.b.norm().powi(5) * self.d.norm().powi(2);
        a.norm() < PARAM_TOL * (1.0 + self.b.norm() * self.d.norm()) && c.norm() < PARAM_TOL * scale
    }

    pub fn validate(&self) -> Result<()> {
        if self.d.norm() < PARAM_TOL || self.b.norm() < PARAM_TOL {
            return Err(Error::Parameter("d and b must be nonzero".into()));
        }
        match self.dim_c4 {
            4 => Ok(()),
            2 if self.is_fibonacci() => Ok(()),
            3 if self.p_so3().norm() < PARAM_TOL * (1.0 + self.b.norm() * self.d.norm()) => Ok(()),
            2 | 3 => Err(Error::Parameter(format!(
                "dim C4 = {} is inconsistent with d = {}, b = {}, t = {}",
                self.dim_c4, self.d, self.b, self.t
            ))),
            k => Err(Error::Parameter(format!("dim C4 must be 2, 3 or 4, not {k}"))),
        }
    }
}

/// Coefficients of the square `f₄` in `β⁴₁ … β⁴ₖ` and the window value `w₄ = ⟨f₄, f₄⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareWindow {
    pub coefficients: Vec<C64>,
    pub w4: C64,
}

/// Closed-form square components and window value for the parameters' `dim C₄`.
pub fn square_window(p: &TrivalentParams) -> Result<SquareWindow> {
    p.validate()?;
    let (d, b, t) = (p.d, p.b, p.t);
    let one = r(1.0);
    let two = r(2.0);
    let nonzero = |x: C64, what: &str| -> Result<C64> {
        if x.norm() < PARAM_TOL {
            Err(Error::Parameter(format!("{what} vanishes at these parameters")))
        } else {
            Ok(x)
        }
    };
    match p.dim_c4 {
        2 => {
            let den = nonzero(d + one, "d + 1")?;
            let c = b * b / den;
            Ok(SquareWindow { coefficients: vec![c, c], w4: two * b.powi(4) * d / den })
        }
        3 => {
            let den = nonzero(d * d - d - one, "d² - d - 1")?;
            let c1 = (b * b * d - b * b - d * t * t) / den;
            let c2 = (b * b * d - two * b * b + t * t) / den;
            let c3 = (d - one) * (d * t * t + t * t - b * b) / (b * den);
            let w4 = d
                * (r(-3.0) * b.powi(4) + two * b.powi(4) * d + two * b * b * t * t - two * b * b * d * t * t - t.powi(4)
                    + d * d * t.powi(4))
                / den;
            Ok(SquareWindow { coefficients: vec![c1, c2, c3], w4 })
        }
        4 => {
            let den = nonzero(b * d + t + d * t, "bd + t + dt")?;
            let c1 = b * (b * b + b * t - t * t) / den;
            let c3 = (t * t * (d + one) - b * b) / den;
            let w4 = two * b * d * (b.powi(4) + b.powi(3) * t - two * b * b * t * t + t.powi(4) + d * t.powi(4)) / den;
            Ok(SquareWindow { coefficients: vec![c1, c1, c3, c3], w4 })
        }
        k => Err(Error::Parameter(format!("dim C4 must be 2, 3 or 4, not {k}"))),
    }
}

/// The symbolic matrix of inner products of `(β⁴₁, β⁴₂, β⁴₃, β⁴₄, f₄)`.
pub fn m41_symbolic(p: &TrivalentParams, w4: C64) -> DMatrix<C64> {
    let (d, b, t) = (p.d, p.b, p.t);
    let z = r(0.0);
    let rows = [
        [d * d, d, b * d, z, b * b * d],
        [d, d * d, z, b * d, b * b * d],
        [b * d, z, b * b * d, b * d * t, b * d * t * t],
        [z, b * d, b * d * t, b * b * d, b * d * t * t],
        [b * b * d, b * b * d, b * d * t * t, b * d * t * t, w4],
    ];
    DMatrix::from_fn(5, 5, |i, j| rows[i][j])
}

/// `det M(4,0) = b²d⁴(bd + t - dt - 2b)(bd + t + dt)`.
pub fn det_m40(p: &TrivalentParams) -> C64 {
    let (d, b, t) = (p.d, p.b, p.t);
    b * b * d.powi(4) * p.p_so3() * (b * d + t + d * t)
}

/// Gram matrix of a list of diagrams with equal boundary counts.
pub fn gram_matrix(diagrams: &[DiagramSum], p: &TrivalentParams) -> Result<DMatrix<C64>> {
    let n = diagrams.len();
    let mut g = DMatrix::from_element(n, n, r(0.0));
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&diagrams[i], &diagrams[j], p)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Orthonormalization data for a Gram matrix.
#[derive(Clone, Debug)]
pub struct Orthonormalization {
    pub gram: DMatrix<C64>,
    /// Lower-triangular `Θ` with `θ_i = Σ_k Θ_{ik} β_k`; rows of dependent vectors are zero.
    pub theta: DMatrix<C64>,
    /// Number of vectors kept in the orthonormal basis.
    pub rank: usize,
}

#[derive(Serialize)]
struct MatrixJson(Vec<Vec<[f64; 2]>>);

/// JSON form of a complex matrix as rows of `[re, im]` pairs.
pub fn matrix_to_json(m: &DMatrix<C64>) -> serde_json::Value {
    let rows = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect();
    serde_json::to_value(MatrixJson(rows)).expect("serializable")
}

/// Gram-Schmidt on a real symmetric (or Hermitian) Gram matrix: `Θ G Θ^T = 1` on the span.
///
/// A negative pivot beyond `tol` means the matrix is indefinite and raises a Gram error.
pub fn gram_orthonormalize(gram: &DMatrix<C64>, tol: f64) -> Result<Orthonormalization> {
    let n = gram.nrows();
    if gram.ncols() != n {
        return Err(Error::Shape("Gram matrix must be square".into()));
    }
    let scale = (0..n).map(|i| gram[(i, i)].norm()).fold(1.0, f64::max);
    let mut theta = DMatrix::from_element(n, n, r(0.0));
    let mut kept: Vec<usize> = Vec::new();
    for i in 0..n {
        // w = β_i - Σ_{kept j} ⟨θ_j, β_i⟩ θ_j, in β coordinates.
        let mut w = vec![r(0.0); n];
        w[i] = r(1.0);
        for &j in &kept {
            let overlap: C64 = (0..n).map(|k| theta[(j, k)] * gram[(k, i)]).sum();
            for k in 0..n {
                w[k] -= overlap * theta[(j, k)];
            }
        }
        let mut norm2 = r(0.0);
        for k in 0..n {
            for l in 0..n {
                norm2 += w[k] * gram[(k, l)] * w[l];
            }
        }
        if norm2.im.abs() > tol * scale {
            return Err(Error::Gram(format!("pivot {i} is not real: {norm2}")));
        }
        if norm2.re < -tol * scale {
            return Err(Error::Gram(format!("Gram matrix is indefinite at pivot {i} ({})", norm2.re)));
        }
        if norm2.re <= tol * scale {
            continue;
        }
        let s = norm2.re.sqrt();
        for k in 0..n {
            theta[(i, k)] = w[k] / s;
        }
        kept.push(i);
    }
    Ok(Orthonormalization { gram: gram.clone(), theta, rank: kept.len() })
}

impl Orthonormalization {
    /// `Θ G Θ^T`.
    pub fn check(&self) -> DMatrix<C64> {
        &self.theta * &self.gram * self.theta.transpose()
    }

    /// Components `c_k = Σ_{jl} Θ_{jl} Θ_{jk} ⟨β_l, x⟩` of a vector in the span.
    pub fn coefficients(&self, overlaps: &[C64]) -> Vec<C64> {
        let n = self.theta.nrows();
        (0..n)
            .map(|k| {
                let mut c = r(0.0);
                for j in 0..n {
                    for l in 0..n {
                        c += self.theta[(j, l)] * self.theta[(j, k)] * overlaps[l];
                    }
                }
                c
            })
            .collect()
    }
}

/// The four diagrams `β⁴₁ … β⁴₄` as sums.
pub fn beta4_sums() -> Vec<DiagramSum> {
    (1..=4).map(|i| DiagramSum::single(beta4(i))).collect()
}

#[cfg(test)]
mod tests;

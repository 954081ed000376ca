mod common;

use common::rng;
use proptest::prelude::*;
use rand::Rng;
use tft_core::tensorlab::{
    ascending_eigensystem, c, hs_inner, fusion_residual, qutrit_system, verify_blob, CMatrix, Isometry3, DEFAULT_TOL,
};

fn random_matrix(seed: u64, d: usize) -> CMatrix {
    let mut r = rng(seed);
    CMatrix::from_fn(d, d, |_, _| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0)))
}

proptest! {
    #![proptest_config(common::config(100))]

    #[test]
    fn trace_of_ascent_two_ways(seed in any::<u64>()) {
        let v = Isometry3::qutrit();
        let a = random_matrix(seed, 3);
        let lhs = v.ascend(&a).trace();
        let a1 = a.kronecker(&CMatrix::identity(3, 3));
        let rhs = (&a1 * &v.v * v.v.adjoint()).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn ascent_is_unital_and_expands(seed in any::<u64>()) {
        let v = Isometry3::qutrit();
        prop_assert!((v.ascend(&CMatrix::identity(3, 3)) - CMatrix::identity(3, 3)).norm() < 1e-12);
        let sys = qutrit_system();
        let a = random_matrix(seed, 3);
        prop_assert!((sys.expand(&a) - &a).norm() < 1e-9);
        let image = (0..sys.len()).fold(CMatrix::zeros(3, 3), |acc, k| acc + &sys.mu[k] * (hs_inner(&sys.nu[k], &a) * sys.eigenvalues[k]));
        prop_assert!((image - v.ascend(&a)).norm() < 1e-9);
    }

    #[test]
    fn random_vectors_are_not_blobs(seed in any::<u64>()) {
        let mut r = rng(seed);
        let mut b: Vec<_> = (0..3).map(|_| c(r.random_range(-1.0..1.0), r.random_range(-1.0..1.0))).collect();
        let n = b.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        b.iter_mut().for_each(|z| *z /= n);
        prop_assert!(!verify_blob(&Isometry3::qutrit(), &b, DEFAULT_TOL).unwrap());
    }
}

#[test]
fn eigen_and_fusion_residuals() {
    let v = Isometry3::qutrit();
    let sys = qutrit_system();
    assert!(sys.eigen_residual(&v) < 1e-9);
    assert!(sys.biorthogonality_residual() < 1e-9);
    assert!(fusion_residual(&sys, &v) < 1e-9);
    let auto = ascending_eigensystem(&v, None, DEFAULT_TOL).unwrap();
    assert!(auto.eigen_residual(&v) < 1e-9);
    assert!(auto.biorthogonality_residual() < 1e-9);
    assert!(fusion_residual(&auto, &v) < 1e-9);
}

use super::*;
use crate::tensorlab::c;

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

fn generic() -> TrivalentParams {
    TrivalentParams::new(c(2.3, 0.0), c(0.7, 0.0), c(-0.4, 0.0), 4).unwrap()
}

fn eval(d: Diagram, p: &TrivalentParams) -> Result<C64> {
    evaluate(&DiagramSum::single(d), p)
}

#[test]
fn small_values() {
    let p = generic();
    assert_eq!(eval(Diagram::loops(1), &p).unwrap(), p.d);
    assert!(close(eval(theta(), &p).unwrap(), p.b * p.d, 1e-15));
    assert_eq!(eval(lollipop(), &p).unwrap(), r(0.0));
}

#[test]
fn beta_inner_products() {
    let p = generic();
    let b = beta4_sums();
    assert!(close(inner_product(&b[0], &b[0], &p).unwrap(), p.d * p.d, 1e-14));
    assert!(close(inner_product(&b[0], &b[1], &p).unwrap(), p.d, 1e-14));
    assert!(close(inner_product(&b[2], &b[3], &p).unwrap(), p.b * p.d * p.t, 1e-14));
}

#[test]
fn m41_matches() {
    let p = generic();
    let mut ds = beta4_sums();
    ds.push(DiagramSum::single(f4()));
    let g = gram_matrix(&ds, &p).unwrap();
    let m = m41_symbolic(&p, square_window(&p).unwrap().w4);
    assert!((g - m).norm() < 1e-10);
}

#[test]
fn window_by_reduction() {
    for p in [TrivalentParams::fibonacci(), TrivalentParams::so3(r(2.7), r(1.3)).unwrap(), generic()] {
        let w = eval(window(), &p).unwrap();
        assert!(close(w, square_window(&p).unwrap().w4, 1e-10), "{p:?}");
    }
}

#[test]
fn parameter_checks() {
    let fib = TrivalentParams::fibonacci();
    let (a, b) = fib.fib_conditions();
    assert!(a.norm() < 1e-12 && b.norm() < 1e-12);
    assert!(det_m40(&fib).norm() < 1e-12);
    assert!(TrivalentParams::new(r(0.0), r(1.0), r(1.0), 4).is_err());
    assert!(TrivalentParams::new(r(2.0), r(1.0), r(0.3), 3).is_err());
    assert!(TrivalentParams::new(r(2.0), r(1.0), r(0.3), 2).is_err());
    let sw = square_window(&fib).unwrap();
    let c2 = r(1.0) / (fib.d + r(1.0));
    assert!(close(sw.coefficients[0], c2, 1e-15) && close(sw.w4, r(2.0) * fib.d / (fib.d + r(1.0)), 1e-15));
    let so3 = TrivalentParams::so3(r(2.5), r(1.0)).unwrap();
    assert!(square_window(&so3).unwrap().coefficients.iter().all(|z| z.re.is_finite()));
}

#[test]
fn theta_matrix_first_entry() {
    let p = generic();
    let g = gram_matrix(&beta4_sums(), &p).unwrap();
    let o = gram_orthonormalize(&g, 1e-12).unwrap();
    assert!(close(o.theta[(0, 0)], r(1.0 / p.d.norm()), 1e-14));
    assert!((o.check() - DMatrix::identity(4, 4)).norm() < 1e-10);
    let overlaps: Vec<C64> = (0..4).map(|l| r(2.0) * g[(l, 0)] - g[(l, 1)]).collect();
    let cs = o.coefficients(&overlaps);
    for (x, e) in cs.iter().zip([2.0, -1.0, 0.0, 0.0]) {
        assert!(close(*x, r(e), 1e-10));
    }
}

#[test]
fn indefinite_gram_rejected() {
    let g = DMatrix::from_row_slice(2, 2, &[r(1.0), r(2.0), r(2.0), r(1.0)]);
    assert!(matches!(gram_orthonormalize(&g, 1e-12), Err(Error::Gram(_))));
}

#[test]
fn fibonacci_system() {
    let s = fib_ascending(&TrivalentParams::fibonacci()).unwrap();
    let l = (3.0 - 5f64.sqrt()) / 2.0;
    let expect = Matrix2Ref([[1.0, l], [0.0, l]]);
    for i in 0..2 {
        for j in 0..2 {
            assert!(close(s.e_matrix[(i, j)], r(expect.0[i][j]), 1e-12));
        }
    }
    assert!((s.scaling_dimensions()[1] - 1.388).abs() < 1e-3);
    let f = &s.fusion;
    assert!(close(f[1][1][0], r(5f64.sqrt() - 2.0), 1e-12));
    assert!(close(f[1][1][1], r(5.0 - 2.0 * 5f64.sqrt()), 1e-12));
    assert!(close(f[0][1][1], r(l), 1e-12) && f[1][0][0].norm() < 1e-12);
}

struct Matrix2Ref([[f64; 2]; 2]);

#[test]
fn reidemeister_two() {
    let p = TrivalentParams::fibonacci();
    let x = Morphism::new(2, 2, resolve_crossings(&crossing().sum, braid_phase())).unwrap();
    let m = x.dagger().compose(&x).unwrap();
    let coords = two_strand_coords(&reduce(&m.sum, &p).unwrap(), &p).unwrap();
    assert!((coords[0].norm() - 1.0).abs() < 1e-12 && coords[1].norm() < 1e-12, "{coords:?}");
}

#[test]
fn json_round_trip() {
    let d = f4();
    let j = serde_json::to_string(&d.to_json_value()).unwrap();
    let back = Diagram::from_json(&j).unwrap();
    assert_eq!(back, d);
    assert!(Diagram::from_json(r#"{"boundary":1,"vertices":[],"half_edges":[[0,0]],"pairing":[1]}"#).is_err());
}

#[test]
fn dodecahedron_is_irreducible() {
    // Pentagonal faces everywhere: build from a 20-vertex rotation system.
    let d = dodecahedron();
    assert!(matches!(eval(d, &TrivalentParams::fibonacci()), Err(Error::Irreducible(_))));
}

/// The dodecahedron as a planar rotation system: an outer 5-cycle, a middle 10-cycle and an
/// inner 5-cycle.
fn dodecahedron() -> Diagram {
    let mut b = Builder::new(0);
    let outer: Vec<usize> = (0..5).map(|_| b.vertex(3)).collect();
    let middle: Vec<usize> = (0..10).map(|_| b.vertex(3)).collect();
    let inner: Vec<usize> = (0..5).map(|_| b.vertex(3)).collect();
    // Slots: outer (next, middle, prev); even middle (radial, next, prev); odd middle
    // (next, radial, prev); inner (middle, next, prev).
    for i in 0..5 {
        b.edge((outer[i], 0), (outer[(i + 1) % 5], 2));
        b.edge((outer[i], 1), (middle[2 * i], 0));
        b.edge((middle[2 * i + 1], 1), (inner[i], 0));
        b.edge((inner[i], 1), (inner[(i + 1) % 5], 2));
    }
    for k in 0..10 {
        let next = if k % 2 == 0 { 1 } else { 0 };
        b.edge((middle[k], next), (middle[(k + 1) % 10], 2));
    }
    b.build().unwrap()
}

#[test]
fn dodecahedron_is_planar() {
    let d = dodecahedron();
    let own = d.owners();
    let (faces, _) = d.faces(&own);
    // V - E + F = 2 with the boundary vertex counted as an isolated extra vertex.
    assert_eq!(20 - 30 + faces.len() as i64, 2);
    assert!(faces.iter().all(|f| f.len() == 5));
}

//! Determinant and minor routines against independent oracles.

use egedyn::linalg::{
    cauchy_binet_sum, char_poly, char_poly_from_spectrum, combinations, compound_det, det,
    eigenvalues, elementary_symmetric, squared_minor_residual, triple_sum_residual, minor_det,
    principal_minor_sum, twice_cofactor_det, CMatrix, MinorIndex, C64,
};
use egedyn::rng::{domain, Stream};
use egedyn::suites::random_test_matrix;
use proptest::prelude::*;

fn cofactor_det(a: &CMatrix) -> C64 {
    let n = a.dim();
    if n == 1 {
        return a[(0, 0)];
    }
    let mut total = C64::new(0.0, 0.0);
    for j in 0..n {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        total += a[(0, j)] * cofactor_det(&a.remove(&[0], &[j])) * sign;
    }
    total
}

fn explicit_submatrix(a: &CMatrix, keep_rows: &[usize], keep_cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(keep_rows.len(), |i, j| a[(keep_rows[i], keep_cols[j])])
}

fn sample(n: usize, k: u64) -> CMatrix {
    let mut s = Stream::new(99, domain("linalg-oracles"), k);
    random_test_matrix(n, &mut s).unwrap()
}

fn close(a: C64, b: C64, scale: f64, tol: f64) -> bool {
    (a - b).norm() <= tol * scale.max(1e-300)
}

#[test]
fn lu_det_matches_cofactor_expansion() {
    for n in 1..=7 {
        for k in 0..5 {
            let a = sample(n, (n * 10 + k) as u64);
            let d = det(&a);
            let c = cofactor_det(&a);
            assert!(close(d, c, c.norm().max(1.0), 1e-11), "n={n}: {d} vs {c}");
        }
    }
}

#[test]
fn minors_match_explicit_submatrices() {
    let a = sample(5, 1);
    let idx = MinorIndex::new(&[1, 3], &[2, 4]).unwrap();
    let explicit = explicit_submatrix(&a, &[1, 3, 4], &[0, 2, 4]);
    let m = minor_det(&a, &idx).unwrap();
    assert!(close(m, cofactor_det(&explicit), 1.0, 1e-12));
    for k in 1..=5 {
        for l in 1..=5 {
            let keep_r: Vec<usize> = (0..5).filter(|&i| i != k - 1).collect();
            let keep_c: Vec<usize> = (0..5).filter(|&j| j != l - 1).collect();
            let m = minor_det(&a, &MinorIndex::single(k, l).unwrap()).unwrap();
            assert!(close(m, cofactor_det(&explicit_submatrix(&a, &keep_r, &keep_c)), 1.0, 1e-12));
        }
    }
}

#[test]
fn identity_matrix_minors() {
    let i3 = CMatrix::identity(3);
    assert_eq!(minor_det(&i3, &MinorIndex::single(1, 1).unwrap()).unwrap(), C64::new(1.0, 0.0));
    assert_eq!(minor_det(&i3, &MinorIndex::single(1, 2).unwrap()).unwrap(), C64::new(0.0, 0.0));
    assert!(minor_det(&i3, &MinorIndex::single(4, 1).unwrap()).is_err());
    let i4 = CMatrix::identity(4);
    assert_eq!(compound_det(&i4, &[0, 1], &[0, 1]).unwrap(), C64::new(1.0, 0.0));
    assert_eq!(compound_det(&i4, &[0, 1], &[0, 2]).unwrap(), C64::new(0.0, 0.0));
}

#[test]
fn cauchy_binet_all_sizes() {
    let a = sample(5, 2);
    let b = sample(5, 3);
    let ab = &a * &b;
    for r in 1..=4 {
        for alpha in combinations(5, r) {
            for beta in combinations(5, r) {
                let lhs = compound_det(&ab, &alpha, &beta).unwrap();
                let rhs = cauchy_binet_sum(&a, &b, &alpha, &beta).unwrap();
                let scale: f64 = combinations(5, r)
                    .iter()
                    .map(|g| (compound_det(&a, &alpha, g).unwrap() * compound_det(&b, g, &beta).unwrap()).norm())
                    .sum();
                assert!(close(lhs, rhs, scale, 1e-12), "r={r} {alpha:?} {beta:?}");
            }
        }
    }
}

#[test]
fn twice_cofactor_all_pairs() {
    for n in 3..=8 {
        let a = sample(n, 40 + n as u64);
        let d = det(&a);
        for k in 0..n {
            for l in k + 1..n {
                let t = twice_cofactor_det(&a, k, l).unwrap();
                assert!(close(t, d, d.norm(), 1e-10), "n={n} ({k},{l}): {t} vs {d}");
            }
        }
    }
    assert_eq!(
        twice_cofactor_det(&CMatrix::from_diag(&[C64::new(2.0, 0.0), C64::new(3.0, 0.0), C64::new(4.0, 0.0)]), 0, 2).unwrap(),
        C64::new(24.0, 0.0)
    );
    assert!(twice_cofactor_det(&sample(4, 0), 2, 1).is_err());
}

#[test]
fn char_poly_examples() {
    let a = CMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 2.0]]).unwrap();
    let e = char_poly(&a, C64::new(0.0, 0.0));
    assert_eq!((e.value, e.d1, e.d2), (C64::new(2.0, 0.0), C64::new(-3.0, 0.0), C64::new(2.0, 0.0)));
    let a = CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap();
    let e = char_poly(&a, C64::new(1.0, 0.0));
    assert!(e.value.norm() < 1e-15);
    assert!((e.d1 - C64::new(2.0, 0.0)).norm() < 1e-15);
}

#[test]
fn principal_minor_sum_examples() {
    let d = CMatrix::from_diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
    assert_eq!(principal_minor_sum(&d, 2).unwrap(), C64::new(11.0, 0.0));
    let a = sample(5, 5);
    assert!(close(principal_minor_sum(&a, 1).unwrap(), a.trace(), 1.0, 1e-14));
    let e3 = elementary_symmetric(&eigenvalues(&a).unwrap(), 3);
    assert!(close(principal_minor_sum(&a, 3).unwrap(), e3, e3.norm(), 1e-9));
    assert!(principal_minor_sum(&a, 0).is_err());
    assert!(principal_minor_sum(&a, 6).is_err());
}

#[test]
fn squared_minor_identity_at_eigenvalues_and_zero() {
    let a = sample(5, 6);
    for l in eigenvalues(&a).unwrap() {
        let c = squared_minor_residual(&a, l).unwrap();
        assert!(c.relative() <= 1e-8, "{c:?}");
    }
    let c = squared_minor_residual(&a, C64::new(0.0, 0.0)).unwrap();
    let f1 = char_poly(&a, C64::new(0.0, 0.0)).d1;
    assert!(c.residual.norm() <= 1e-8 * (f1 * f1).norm().max(c.scale));
}

#[test]
fn triple_sum_random_tuples() {
    let mut s = Stream::new(5, domain("tuples"), 0);
    use egedyn::rng::NormalSource;
    for _ in 0..50 {
        let z: Vec<C64> = (0..6).map(|_| C64::new(s.next_normal(), s.next_normal())).collect();
        let c = triple_sum_residual(&z).unwrap();
        assert!(c.residual.norm() <= 1e-10 * c.scale, "{c:?}");
    }
    assert!(triple_sum_residual(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 0.0)]).is_err());
}

fn matrix_strategy(n: usize) -> impl Strategy<Value = CMatrix> {
    prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), n * n)
        .prop_map(move |v| CMatrix::from_row_major(n, v.into_iter().map(|(r, i)| C64::new(r, i)).collect()).unwrap())
}

fn sized_matrix() -> impl Strategy<Value = CMatrix> {
    (3usize..=8).prop_flat_map(matrix_strategy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twice_cofactor_equals_det(a in sized_matrix(), k in 0usize..8, gap in 1usize..8) {
        let n = a.dim();
        let k = k % (n - 1);
        let l = k + 1 + gap % (n - 1 - k);
        let d = det(&a);
        let hadamard: f64 = (0..n).map(|i| a.row(i).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).product();
        prop_assert!((twice_cofactor_det(&a, k, l).unwrap() - d).norm() <= 1e-12 * hadamard.max(1.0));
    }

    #[test]
    fn minor_sums_are_symmetric_polynomials(a in sized_matrix()) {
        let eigs = eigenvalues(&a).unwrap();
        let abs: Vec<C64> = eigs.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
        for k in 1..=a.dim() {
            let lhs = principal_minor_sum(&a, k).unwrap();
            let rhs = elementary_symmetric(&eigs, k);
            prop_assert!((lhs - rhs).norm() <= 1e-9 * elementary_symmetric(&abs, k).re.max(1.0));
        }
    }

    #[test]
    fn char_poly_routes_agree(a in sized_matrix(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let l = C64::new(re, im);
        let eigs = eigenvalues(&a).unwrap();
        let m = char_poly(&a, l);
        let s = char_poly_from_spectrum(&eigs, l);
        let scale: f64 = eigs.iter().map(|e| (l - e).norm() + 1.0).product();
        prop_assert!((m.value - s.value).norm() <= 1e-9 * scale);
        prop_assert!((m.d1 - s.d1).norm() <= 1e-9 * scale * a.dim() as f64);
        prop_assert!((m.d2 - s.d2).norm() <= 1e-9 * scale * (a.dim() * a.dim()) as f64);
    }

    #[test]
    fn squared_minor_identity_anywhere(a in sized_matrix(), re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let c = squared_minor_residual(&a, C64::new(re, im)).unwrap();
        prop_assert!(c.relative() <= 1e-8, "{:?}", c);
    }

    #[test]
    fn triple_sum_vanishes(z in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 3..=10)) {
        let z: Vec<C64> = z.into_iter().map(|(r, i)| C64::new(r, i)).collect();
        prop_assume!((0..z.len()).all(|i| (i + 1..z.len()).all(|j| (z[i] - z[j]).norm() > 1e-3)));
        let c = triple_sum_residual(&z).unwrap();
        prop_assert!(c.residual.norm() <= 1e-10 * c.scale * z.len() as f64);
    }

    #[test]
    fn cauchy_binet_pairs(a in matrix_strategy(4), b in matrix_strategy(4), r in 1usize..=3, ai in 0usize..64, bi in 0usize..64) {
        let sets = combinations(4, r);
        let alpha = &sets[ai % sets.len()];
        let beta = &sets[bi % sets.len()];
        let lhs = compound_det(&(&a * &b), alpha, beta).unwrap();
        let rhs = cauchy_binet_sum(&a, &b, alpha, beta).unwrap();
        let scale: f64 = sets.iter().map(|g| (compound_det(&a, alpha, g).unwrap() * compound_det(&b, g, beta).unwrap()).norm()).sum();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(1.0));
    }
}

//! Assignment solver against exhaustive search over permutations.

use egedyn::linalg::C64;
use egedyn::spectral::matching::{hungarian, match_eigenvalues};
use proptest::prelude::*;

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

fn brute_force(cost: &[Vec<f64>]) -> f64 {
    permutations(cost.len())
        .iter()
        .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
        .fold(f64::INFINITY, f64::min)
}

fn is_permutation(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&j| j < seen.len() && !std::mem::replace(&mut seen[j], true))
}

fn cost_matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec(prop::collection::vec(0.0f64..10.0, n), n))
}

fn points() -> impl Strategy<Value = Vec<C64>> {
    (1usize..=6).prop_flat_map(|n| prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), n))
        .prop_map(|v| v.into_iter().map(|(a, b)| C64::new(a, b)).collect())
}

#[test]
fn permutation_generator_counts() {
    assert_eq!(permutations(4).len(), 24);
    assert!(permutations(4).iter().all(|p| is_permutation(p)));
}

#[test]
fn forbidden_entries_are_avoided() {
    let inf = f64::INFINITY;
    let cost = vec![vec![inf, 1.0, 5.0], vec![2.0, inf, 1.0], vec![1.0, 3.0, inf]];
    let (assign, total) = hungarian(&cost).unwrap();
    assert_eq!(assign, vec![1, 2, 0]);
    assert_eq!(total, 3.0);
    assert!(hungarian(&[vec![inf, inf], vec![1.0, 1.0]]).is_none());
}

proptest! {
    #[test]
    fn hungarian_is_optimal(cost in cost_matrix()) {
        let (assign, total) = hungarian(&cost).unwrap();
        prop_assert!(is_permutation(&assign));
        let realized: f64 = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        prop_assert!((realized - total).abs() <= 1e-12 * (1.0 + total));
        prop_assert!((total - brute_force(&cost)).abs() <= 1e-9);
    }

    #[test]
    fn eigenvalue_matching_is_optimal(prev in points(), shift in prop::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 6), seed in 0usize..720) {
        let n = prev.len();
        let perms = permutations(n);
        let shuffle = &perms[seed % perms.len()];
        let next: Vec<C64> = shuffle.iter().map(|&k| prev[k] + C64::new(shift[k].0, shift[k].1)).collect();
        let m = match_eigenvalues(&prev, &next);
        prop_assert!(is_permutation(&m.perm));
        let cost: Vec<Vec<f64>> = prev.iter().map(|a| next.iter().map(|b| (a - b).norm_sqr()).collect()).collect();
        prop_assert!((m.cost - brute_force(&cost)).abs() <= 1e-9);
        prop_assert!(m.second_cost >= m.cost - 1e-12);
        if n == 1 {
            prop_assert!(!m.ambiguous);
        }
    }

    #[test]
    fn small_moves_recover_the_shuffle(prev in points(), seed in 0usize..720) {
        let n = prev.len();
        let min_gap = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .map(|(i, j)| (prev[i] - prev[j]).norm())
            .fold(f64::INFINITY, f64::min);
        prop_assume!(min_gap > 0.1);
        let perms = permutations(n);
        let shuffle = &perms[seed % perms.len()];
        let next: Vec<C64> = shuffle.iter().map(|&k| prev[k] + C64::new(0.01 * min_gap.min(1.0), 0.0)).collect();
        let m = match_eigenvalues(&prev, &next);
        for (i, &j) in m.perm.iter().enumerate() {
            prop_assert_eq!(shuffle[j], i);
        }
        prop_assert!(!m.ambiguous);
    }
}

//! Eigenvalue continuation between consecutive frames by optimal assignment.

use crate::linalg::C64;

use super::frame::SpectralFrame;

/// Second-best assignments within this factor of the best flag the step as ambiguous.
pub const AMBIGUITY_RATIO: f64 = 1.1;

#[derive(Debug, Clone, PartialEq)]
pub struct Matching {
    /// `perm[i]` is the index in the next frame that continues path `i`.
    pub perm: Vec<usize>,
    pub cost: f64,
    pub second_cost: f64,
    pub ambiguous: bool,
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian method
/// with potentials, O(N³)). Returns `assign[row] = col`. Entries equal to
/// `f64::INFINITY` are forbidden.
pub fn hungarian(cost: &[Vec<f64>]) -> Option<(Vec<usize>, f64)> {
    let n = cost.len();
    if n == 0 {
        return Some((Vec::new(), 0.0));
    }
    // 1-based potentials formulation; column 0 is a virtual source
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = usize::MAX;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            if j1 == usize::MAX || !delta.is_finite() {
                return None;
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    let total = assign.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    Some((assign, total))
}

/// Optimal continuation minimizing `Σ_i |prev_i − next_{π(i)}|²`.
pub fn match_eigenvalues(prev: &[C64], next: &[C64]) -> Matching {
    assert_eq!(prev.len(), next.len(), "frames must have equal dimension");
    let cost: Vec<Vec<f64>> = prev
        .iter()
        .map(|a| next.iter().map(|b| (a - b).norm_sqr()).collect())
        .collect();
    let (perm, best) = hungarian(&cost).expect("finite cost matrix always has an assignment");
    // Any other assignment avoids at least one edge of the optimum.
    let mut second = f64::INFINITY;
    for i in 0..perm.len() {
        let mut c = cost.clone();
        c[i][perm[i]] = f64::INFINITY;
        if let Some((_, s)) = hungarian(&c) {
            second = second.min(s);
        }
    }
    let ambiguous = second.is_finite() && second <= AMBIGUITY_RATIO * best;
    Matching { perm, cost: best, second_cost: second, ambiguous }
}

pub fn match_paths(prev: &SpectralFrame, next: &SpectralFrame) -> Matching {
    match_eigenvalues(&prev.eigenvalues, &next.eigenvalues)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[(f64, f64)]) -> Vec<C64> {
        v.iter().map(|&(a, b)| C64::new(a, b)).collect()
    }

    #[test]
    fn identity_and_swap() {
        let a = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)]);
        let m = match_eigenvalues(&a, &a);
        assert_eq!(m.perm, vec![0, 1, 2]);
        assert!(!m.ambiguous);
        let b = pts(&[(1.0, 0.0), (0.0, 0.0), (0.0, 2.0)]);
        assert_eq!(match_eigenvalues(&a, &b).perm, vec![1, 0, 2]);
    }

    #[test]
    fn ambiguity_flag() {
        // two candidates equidistant from each source
        let a = pts(&[(-1.0, 0.0), (1.0, 0.0)]);
        let b = pts(&[(0.0, 1.0), (0.0, -1.0)]);
        assert!(match_eigenvalues(&a, &b).ambiguous);
    }

    #[test]
    fn forbidden_edges() {
        let inf = f64::INFINITY;
        let c = vec![vec![inf, 1.0], vec![2.0, inf]];
        let (a, cost) = hungarian(&c).unwrap();
        assert_eq!(a, vec![1, 0]);
        assert_eq!(cost, 3.0);
        assert!(hungarian(&[vec![inf]]).is_none());
    }

    #[test]
    fn single_point_never_ambiguous() {
        let m = match_eigenvalues(&pts(&[(0.0, 0.0)]), &pts(&[(5.0, 0.0)]));
        assert_eq!(m.perm, vec![0]);
        assert!(!m.ambiguous);
    }
}

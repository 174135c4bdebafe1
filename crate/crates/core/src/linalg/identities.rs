//! Minor determinants, characteristic-polynomial evaluations and the
//! determinant identities used to certify the eigenvalue calculus.
//!
//! Everything here is 0-based except [`MinorIndex`], which stores indices in
//! the 1-based convention used in printed formulas and on the command line.

use serde::Serialize;

use super::lu::det;
use super::matrix::{CMatrix, C64, ONE, ZERO};
use super::schur;
use crate::error::{Error, Result};

/// Rows/columns removed from a matrix to form a minor, 1-based, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorIndex {
    removed_rows: Vec<usize>,
    removed_cols: Vec<usize>,
}

impl MinorIndex {
    /// `rows` and `cols` are 1-based; each set must hold 1 or 2 distinct indices
    /// and both sets must have the same size.
    pub fn new(rows: &[usize], cols: &[usize]) -> Result<Self> {
        let norm = |v: &[usize], what: &str| -> Result<Vec<usize>> {
            let mut s = v.to_vec();
            s.sort_unstable();
            if s.is_empty() || s.len() > 2 {
                return Err(Error::argument(format!("{what}: expected 1 or 2 indices, got {}", s.len())));
            }
            if s.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::argument(format!("{what}: duplicate index")));
            }
            if s[0] == 0 {
                return Err(Error::argument(format!("{what}: indices are 1-based")));
            }
            Ok(s)
        };
        let r = norm(rows, "removed rows")?;
        let c = norm(cols, "removed cols")?;
        if r.len() != c.len() {
            return Err(Error::argument("removed row and column sets differ in size"));
        }
        Ok(Self {
            removed_rows: r,
            removed_cols: c,
        })
    }

    /// `A_{k|l}`, 1-based.
    pub fn single(k: usize, l: usize) -> Result<Self> {
        Self::new(&[k], &[l])
    }

    pub fn removed_rows(&self) -> &[usize] {
        &self.removed_rows
    }

    pub fn removed_cols(&self) -> &[usize] {
        &self.removed_cols
    }

    fn zero_based(&self) -> (Vec<usize>, Vec<usize>) {
        (
            self.removed_rows.iter().map(|i| i - 1).collect(),
            self.removed_cols.iter().map(|i| i - 1).collect(),
        )
    }
}

/// Determinant of the submatrix with the listed rows/columns removed. No
/// cofactor sign is applied.
pub fn minor_det(a: &CMatrix, idx: &MinorIndex) -> Result<C64> {
    let n = a.dim();
    if idx.removed_rows.iter().chain(&idx.removed_cols).any(|&i| i > n) {
        return Err(Error::argument(format!("minor index out of range for N = {n}")));
    }
    let (r, c) = idx.zero_based();
    Ok(det(&a.remove(&r, &c)))
}

/// Unchecked 0-based minor used on hot paths.
#[inline]
pub(crate) fn minor0(a: &CMatrix, rows: &[usize], cols: &[usize]) -> C64 {
    det(&a.remove(rows, cols))
}

/// `f(λ) = det(λI - A)` and its first two λ-derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharPolyEval {
    pub value: C64,
    pub d1: C64,
    pub d2: C64,
}

/// Matrix-side route: `f_λ` is the sum of principal (N-1)-minors of `λI - A`
/// and `f_λλ` twice the sum of principal (N-2)-minors.
pub fn char_poly(a: &CMatrix, lambda: C64) -> CharPolyEval {
    let n = a.dim();
    let b = a.shifted_resolvent_base(lambda);
    let value = det(&b);
    let d1 = principal_minor_sum_unchecked(&b, n - 1);
    let d2 = if n >= 2 {
        principal_minor_sum_unchecked(&b, n - 2) * 2.0
    } else {
        ZERO
    };
    CharPolyEval { value, d1, d2 }
}

/// Spectrum-side route from the factorization `f(λ) = Π (λ - λ_j)`.
pub fn char_poly_from_spectrum(eigs: &[C64], lambda: C64) -> CharPolyEval {
    let n = eigs.len();
    let diffs: Vec<C64> = eigs.iter().map(|&e| lambda - e).collect();
    let value = diffs.iter().product();
    let mut d1 = ZERO;
    let mut d2 = ZERO;
    for k in 0..n {
        d1 += (0..n).filter(|&j| j != k).map(|j| diffs[j]).product::<C64>();
        for l in k + 1..n {
            d2 += (0..n).filter(|&m| m != k && m != l).map(|m| diffs[m]).product::<C64>();
        }
    }
    CharPolyEval {
        value,
        d1,
        d2: d2 * 2.0,
    }
}

/// All k-subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub(crate) fn principal_minor_sum_unchecked(a: &CMatrix, k: usize) -> C64 {
    if k == 0 {
        return ONE;
    }
    combinations(a.dim(), k)
        .iter()
        .map(|s| det(&a.select(s, s)))
        .sum()
}

/// Sum of all k×k principal minors of `a` (equals the k-th elementary
/// symmetric polynomial of its eigenvalues).
pub fn principal_minor_sum(a: &CMatrix, k: usize) -> Result<C64> {
    if k == 0 || k > a.dim() {
        return Err(Error::argument(format!("k = {k} outside 1..={}", a.dim())));
    }
    Ok(principal_minor_sum_unchecked(a, k))
}

/// `e_k(values)` by polynomial expansion; `e_0 = 1`.
pub fn elementary_symmetric(values: &[C64], k: usize) -> C64 {
    let mut e = vec![ZERO; values.len() + 1];
    e[0] = ONE;
    for (m, &v) in values.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            let prev = e[j - 1];
            e[j] += prev * v;
        }
    }
    e.get(k).copied().unwrap_or(ZERO)
}

fn check_index_set(set: &[usize], n: usize, what: &str) -> Result<()> {
    if set.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::argument(format!("{what} must be strictly increasing")));
    }
    if set.iter().any(|&i| i >= n) {
        return Err(Error::argument(format!("{what} index out of range for N = {n}")));
    }
    Ok(())
}

/// `det A(rows, cols)` with both sets 0-based and strictly increasing.
pub fn compound_det(a: &CMatrix, rows: &[usize], cols: &[usize]) -> Result<C64> {
    if rows.len() != cols.len() {
        return Err(Error::argument(format!(
            "row set has {} indices, column set has {}",
            rows.len(),
            cols.len()
        )));
    }
    check_index_set(rows, a.dim(), "rows")?;
    check_index_set(cols, a.dim(), "cols")?;
    Ok(det(&a.select(rows, cols)))
}

/// Right-hand side of Cauchy–Binet: `Σ_γ det A(rows, γ) det B(γ, cols)`.
pub fn cauchy_binet_sum(a: &CMatrix, b: &CMatrix, rows: &[usize], cols: &[usize]) -> Result<C64> {
    if a.dim() != b.dim() {
        return Err(Error::argument("factor dimensions differ"));
    }
    let r = rows.len();
    let mut sum = ZERO;
    for gamma in combinations(a.dim(), r) {
        sum += compound_det(a, rows, &gamma)? * compound_det(b, &gamma, cols)?;
    }
    Ok(sum)
}

#[inline]
fn sign(p: usize) -> f64 {
    if p.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Determinant via the eight-term expansion along row `k` then row `l`
/// (`k < l`, 0-based), evaluated term by term.
pub fn twice_cofactor_det(a: &CMatrix, k: usize, l: usize) -> Result<C64> {
    let n = a.dim();
    if n < 3 {
        return Err(Error::argument("twice cofactor expansion needs N >= 3"));
    }
    if k >= l || l >= n {
        return Err(Error::argument(format!("need k < l < N, got k = {k}, l = {l}")));
    }
    let m2 = |p: usize, q: usize| minor0(a, &[k, l], &[p.min(q), p.max(q)]);
    let mut total = a[(k, k)] * minor0(a, &[k], &[k]);
    total -= a[(k, l)] * a[(l, k)] * m2(l, k);
    for q in (0..n).filter(|&q| q != k && q != l) {
        let s = if q < l { sign(k + q + 1) } else { sign(k + q) };
        total += a[(k, l)] * a[(l, q)] * m2(l, q) * s;
    }
    for p in (0..n).filter(|&p| p != k && p != l) {
        let s = if p > k { sign(l + p + 1) } else { sign(l + p) };
        total += a[(k, p)] * a[(l, k)] * m2(p, k) * s;
    }
    for p in (0..n).filter(|&p| p != k && p != l) {
        for q in (0..n).filter(|&q| q != k && q != p) {
            let s = if p > q { sign(k + l + p + q + 1) } else { sign(k + l + p + q) };
            total += a[(k, p)] * a[(l, q)] * m2(p, q) * s;
        }
    }
    Ok(total)
}

/// Residual of an identity together with the magnitude of its largest
/// intermediate term, so callers can form a scale-aware relative error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub residual: C64,
    pub scale: f64,
}

impl IdentityCheck {
    pub fn relative(&self) -> f64 {
        if self.scale == 0.0 {
            self.residual.norm()
        } else {
            self.residual.norm() / self.scale
        }
    }
}

/// `Σ_k det((λI-A)²_{k|k}) - [f_λ(λ)² - 2 Σ_{k<l} (λ-λ_k)(λ-λ_l) Π_{m≠k,l} (λ-λ_m)²]`.
/// The left sum is matrix-side; the bracket uses the spectrum of `a`.
pub fn squared_minor_residual(a: &CMatrix, lambda: C64) -> Result<IdentityCheck> {
    let eigs = schur::eigenvalues(a)?;
    Ok(squared_minor_identity(a, &eigs, lambda))
}

pub(crate) fn squared_minor_identity(a: &CMatrix, eigs: &[C64], lambda: C64) -> IdentityCheck {
    let n = a.dim();
    let b = a.shifted_resolvent_base(lambda);
    let b2 = &b * &b;
    let lhs = principal_minor_sum_unchecked(&b2, n - 1);
    let diffs: Vec<C64> = eigs.iter().map(|&e| lambda - e).collect();
    let f1 = char_poly_from_spectrum(eigs, lambda).d1;
    let mut scale = lhs.norm().max((f1 * f1).norm());
    let mut cross = ZERO;
    for k in 0..n {
        for l in k + 1..n {
            let rest: C64 = (0..n)
                .filter(|&m| m != k && m != l)
                .map(|m| diffs[m] * diffs[m])
                .product();
            let term = diffs[k] * diffs[l] * rest * 2.0;
            scale = scale.max(term.norm());
            cross += term;
        }
    }
    IdentityCheck {
        residual: lhs - (f1 * f1 - cross),
        scale,
    }
}

/// `Σ_i Σ_{j<k; j,k≠i} 1/((z_i-z_j)(z_i-z_k))`, which vanishes identically.
pub fn triple_sum_residual(z: &[C64]) -> Result<IdentityCheck> {
    let n = z.len();
    if n < 3 {
        return Err(Error::argument("need at least three points"));
    }
    for i in 0..n {
        for j in i + 1..n {
            if z[i] == z[j] {
                return Err(Error::argument(format!("points {i} and {j} coincide")));
            }
        }
    }
    let mut sum = ZERO;
    let mut scale: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            for k in j + 1..n {
                if j == i || k == i {
                    continue;
                }
                let term = ONE / ((z[i] - z[j]) * (z[i] - z[k]));
                scale = scale.max(term.norm());
                sum += term;
            }
        }
    }
    Ok(IdentityCheck { residual: sum, scale })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn minor_index_validation() {
        assert!(MinorIndex::new(&[1], &[1, 2]).is_err());
        assert!(MinorIndex::new(&[2, 2], &[1, 3]).is_err());
        assert!(MinorIndex::new(&[0], &[1]).is_err());
        assert!(MinorIndex::new(&[1, 2, 3], &[1, 2, 3]).is_err());
        let m = MinorIndex::new(&[3, 1], &[4, 2]).unwrap();
        assert_eq!(m.removed_rows(), &[1, 3]);
        assert_eq!(m.removed_cols(), &[2, 4]);
        let i3 = CMatrix::identity(3);
        assert!(minor_det(&i3, &MinorIndex::single(4, 1).unwrap()).is_err());
    }

    #[test]
    fn identity_minors() {
        let i3 = CMatrix::identity(3);
        assert_eq!(minor_det(&i3, &MinorIndex::single(1, 1).unwrap()).unwrap(), ONE);
        assert_eq!(minor_det(&i3, &MinorIndex::single(1, 2).unwrap()).unwrap(), ZERO);
    }

    #[test]
    fn char_poly_diag() {
        let a = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0)]);
        let cp = char_poly(&a, ZERO);
        assert_eq!(cp.value, c(2.0, 0.0));
        assert_eq!(cp.d1, c(-3.0, 0.0));
        assert_eq!(cp.d2, c(2.0, 0.0));
        let sp = char_poly_from_spectrum(&[c(1.0, 0.0), c(2.0, 0.0)], ZERO);
        assert_eq!(sp, cp);
    }

    #[test]
    fn char_poly_at_eigenvalue() {
        // eigenvalues {1, -1}
        let a = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, -1.0]]).unwrap();
        let cp = char_poly(&a, ONE);
        assert!(cp.value.norm() < 1e-15);
        assert!((cp.d1 - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn principal_minor_sums_small() {
        let a = CMatrix::from_diag(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        assert_eq!(principal_minor_sum(&a, 2).unwrap(), c(11.0, 0.0));
        assert_eq!(principal_minor_sum(&a, 1).unwrap(), a.trace());
        assert!(principal_minor_sum(&a, 0).is_err());
        assert!(principal_minor_sum(&a, 4).is_err());
        assert_eq!(elementary_symmetric(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 2), c(11.0, 0.0));
        assert_eq!(elementary_symmetric(&[c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)], 3), c(6.0, 0.0));
    }

    #[test]
    fn compound_det_identity_and_errors() {
        let i4 = CMatrix::identity(4);
        assert_eq!(compound_det(&i4, &[0, 1], &[0, 1]).unwrap(), ONE);
        assert_eq!(compound_det(&i4, &[0, 1], &[0, 2]).unwrap(), ZERO);
        assert!(compound_det(&i4, &[0, 1], &[0]).is_err());
        assert!(compound_det(&i4, &[1, 0], &[0, 1]).is_err());
        assert!(compound_det(&i4, &[0, 4], &[0, 1]).is_err());
    }

    #[test]
    fn twice_cofactor_small_cases() {
        let i3 = CMatrix::identity(3);
        assert_eq!(twice_cofactor_det(&i3, 0, 1).unwrap(), ONE);
        let d = CMatrix::from_diag(&[c(2.0, 0.0), c(3.0, 0.0), c(4.0, 0.0)]);
        assert_eq!(twice_cofactor_det(&d, 0, 2).unwrap(), c(24.0, 0.0));
        assert!(twice_cofactor_det(&d, 1, 1).is_err());
        assert!(twice_cofactor_det(&d, 2, 1).is_err());
        assert!(twice_cofactor_det(&CMatrix::identity(2), 0, 1).is_err());
    }

    #[test]
    fn squared_minor_on_diagonal() {
        let a = CMatrix::from_diag(&[c(1.0, 0.5), c(-2.0, 0.0), c(0.3, -1.0), c(4.0, 2.0)]);
        for lam in [ZERO, c(0.7, -0.2), c(1.0, 0.5)] {
            let chk = squared_minor_residual(&a, lam).unwrap();
            assert!(chk.relative() < 1e-12, "{chk:?}");
        }
    }

    #[test]
    fn triple_sum_symmetric_examples() {
        let z = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert!(triple_sum_residual(&z).unwrap().residual.norm() < 1e-15);
        let z = [c(1.0, 0.0), c(0.0, 1.0), c(-1.0, 0.0), c(0.0, -1.0)];
        assert!(triple_sum_residual(&z).unwrap().relative() < 1e-15);
        assert!(triple_sum_residual(&z[..2]).is_err());
        assert!(triple_sum_residual(&[ONE, ZERO, ONE]).is_err());
    }

    #[test]
    fn combinations_enumerate() {
        assert_eq!(combinations(4, 2).len(), 6);
        assert_eq!(combinations(4, 2)[0], vec![0, 1]);
        assert_eq!(combinations(4, 2)[5], vec![2, 3]);
        assert_eq!(combinations(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(combinations(3, 3), vec![vec![0, 1, 2]]);
        assert!(combinations(2, 3).is_empty());
    }
}

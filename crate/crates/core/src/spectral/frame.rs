//! Eigendecomposition with biorthogonal left vectors and eigenvector overlaps.

use crate::error::{Error, Result};
use crate::linalg::identities::{minor0, principal_minor_sum_unchecked};
use crate::linalg::schur::{min_gap, schur, triangular_eigenvectors};
use crate::linalg::{CMatrix, Lu, C64};
use crate::process::MatrixState;

/// Relative gap below which a spectrum is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    pub eigenvalues: Vec<C64>,
    /// Column `i` is the unit-norm right eigenvector `R_i`.
    pub right_vecs: CMatrix,
    /// Column `i` is the left eigenvector `L_i`, with `L_i^* R_j = δ_ij`.
    pub left_vecs: CMatrix,
    pub overlaps: CMatrix,
    pub min_gap: f64,
    /// `max_i ‖J R_i − λ_i R_i‖`.
    pub residual: f64,
}

impl SpectralFrame {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Real diagonal overlaps `O_ii`.
    pub fn diag_overlaps(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.overlaps[(i, i)].re).collect()
    }

    /// Relabels eigenvalues so that new index `i` is old index `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> SpectralFrame {
        let n = self.dim();
        let cols = |m: &CMatrix| CMatrix::from_fn(n, |r, c| m[(r, perm[c])]);
        SpectralFrame {
            t: self.t,
            eigenvalues: perm.iter().map(|&p| self.eigenvalues[p]).collect(),
            right_vecs: cols(&self.right_vecs),
            left_vecs: cols(&self.left_vecs),
            overlaps: CMatrix::from_fn(n, |r, c| self.overlaps[(perm[r], perm[c])]),
            min_gap: self.min_gap,
            residual: self.residual,
        }
    }

    /// `max |L^* R − I|`.
    pub fn biorthogonality_error(&self) -> f64 {
        let g = &self.left_vecs.adjoint() * &self.right_vecs;
        (&g - &CMatrix::identity(self.dim())).max_abs()
    }
}

fn degeneracy_threshold(j: &CMatrix) -> f64 {
    DEGENERACY_GAP * j.frobenius()
}

pub fn decompose(state: &MatrixState) -> Result<SpectralFrame> {
    let j = &state.j;
    let n = j.dim();
    if n == 0 {
        return Err(Error::argument("empty matrix"));
    }
    if !j.is_finite() {
        return Err(Error::argument("matrix has non-finite entries"));
    }
    let s = schur(j, true)?;
    let q = s.q.as_ref().expect("unitary factor requested");
    let eigs = s.eigenvalues();
    let gap = min_gap(&eigs);
    if n > 1 && (gap == 0.0 || gap < degeneracy_threshold(j)) {
        return Err(Error::degenerate(gap).at_time(state.t).with_matrix(&state.j));
    }

    let mut r = q * &triangular_eigenvectors(&s.t);
    for c in 0..n {
        let norm: f64 = (0..n).map(|i| r[(i, c)].norm_sqr()).sum::<f64>().sqrt();
        let tiny = 1e-14 * norm;
        let first = (0..n).map(|i| r[(i, c)]).find(|z| z.norm() > tiny).unwrap_or(C64::new(1.0, 0.0));
        let phase = first.conj() / first.norm();
        for i in 0..n {
            r[(i, c)] = r[(i, c)] * phase / norm;
        }
    }

    let lu = Lu::new(&r);
    let rinv = match lu.inverse() {
        Some(m) if m.is_finite() && lu.pivot_ratio() > f64::EPSILON => m,
        _ => return Err(Error::degenerate(gap).at_time(state.t).with_matrix(&state.j)),
    };
    let left = rinv.adjoint();

    let residual = (0..n)
        .map(|c| {
            let v = r.column(c);
            let jv = j.matvec(&v);
            jv.iter().zip(&v).map(|(a, b)| (a - eigs[c] * b).norm_sqr()).sum::<f64>().sqrt()
        })
        .fold(0.0, f64::max);

    let overlaps = overlap_matrix(&r, &left);
    Ok(SpectralFrame {
        t: state.t,
        eigenvalues: eigs,
        right_vecs: r,
        left_vecs: left,
        overlaps,
        min_gap: gap,
        residual,
    })
}

/// `O_ij = (L_i^* L_j)(R_j^* R_i)`, invariant under `R_i → c R_i, L_i → L_i / conj(c)`.
fn overlap_matrix(r: &CMatrix, l: &CMatrix) -> CMatrix {
    let gl = &l.adjoint() * l;
    let gr = &r.adjoint() * r;
    let n = r.dim();
    let mut o = CMatrix::from_fn(n, |i, j| gl[(i, j)] * gr[(j, i)]);
    for i in 0..n {
        o[(i, i)] = C64::new(o[(i, i)].re, 0.0);
    }
    o
}

/// Overlap from the eigenvectors stored in a frame.
pub fn overlap_eigvec(frame: &SpectralFrame, i: usize, j: usize) -> C64 {
    let (r, l) = (&frame.right_vecs, &frame.left_vecs);
    let n = frame.dim();
    let li_lj: C64 = (0..n).map(|k| l[(k, i)].conj() * l[(k, j)]).sum();
    let rj_ri: C64 = (0..n).map(|k| r[(k, j)].conj() * r[(k, i)]).sum();
    li_lj * rj_ri
}

/// `f_λ(λ_i) = Π_{j≠i} (λ_i − λ_j)`.
pub fn fprime(eigs: &[C64], i: usize) -> C64 {
    eigs.iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &e)| eigs[i] - e)
        .product()
}

/// Drift `τ Σ_{j≠i} 1/(λ_i − λ_j)` of eigenvalue `i`.
pub fn drift(eigs: &[C64], i: usize, tau: f64) -> C64 {
    eigs.iter()
        .enumerate()
        .filter(|&(k, _)| k != i)
        .map(|(_, &e)| (eigs[i] - e).inv())
        .sum::<C64>()
        * tau
}

fn checked_fprime(eigs: &[C64], i: usize, t: f64) -> Result<C64> {
    let d = fprime(eigs, i);
    if d == C64::new(0.0, 0.0) || !d.is_finite() {
        return Err(Error::degenerate(min_gap(eigs)).at_time(t));
    }
    Ok(d)
}

/// Overlap from the principal-minor formula
/// `Σ_k det(((λ_i − J)(λ_j − J)^*)_{k|k}) / (f_λ(λ_i) conj f_λ(λ_j))`.
pub fn overlap_det(state: &MatrixState, eigs: &[C64], i: usize, j: usize) -> Result<C64> {
    let n = state.dim();
    if eigs.len() != n || i >= n || j >= n {
        return Err(Error::argument("eigenvalue list or index does not match the matrix"));
    }
    let di = checked_fprime(eigs, i, state.t)?;
    let dj = checked_fprime(eigs, j, state.t)?;
    let a = state.j.shifted_resolvent_base(eigs[i]);
    let b = state.j.shifted_resolvent_base(eigs[j]);
    let m = &a * &b.adjoint();
    let num = principal_minor_sum_unchecked(&m, n - 1);
    Ok(num / (di * dj.conj()))
}

/// Coefficients `c_kl` of `dJ_kl` in the martingale part of `dλ_i`:
/// `c_kl = (−1)^{k+l} det((λ_i − J)_{k|l}) / f_λ(λ_i)`.
pub fn martingale_coefficients(state: &MatrixState, eigs: &[C64], i: usize) -> Result<CMatrix> {
    let n = state.dim();
    if eigs.len() != n || i >= n {
        return Err(Error::argument("eigenvalue list or index does not match the matrix"));
    }
    let d = checked_fprime(eigs, i, state.t)?;
    let a = state.j.shifted_resolvent_base(eigs[i]);
    Ok(CMatrix::from_fn(n, |k, l| {
        let sign = if (k + l) % 2 == 0 { 1.0 } else { -1.0 };
        minor0(&a, &[k], &[l]) * sign / d
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(j: CMatrix) -> MatrixState {
        MatrixState::new(0.0, j).unwrap()
    }

    fn sorted_re(mut v: Vec<C64>) -> Vec<C64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        v
    }

    #[test]
    fn normal_matrix_has_trivial_overlaps() {
        let j = CMatrix::from_diag(&[C64::new(1.0, 0.0), C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        let f = decompose(&st(j)).unwrap();
        let ev = sorted_re(f.eigenvalues.clone());
        for (e, w) in ev.iter().zip([1.0, 2.0, 3.0]) {
            assert!((e - C64::new(w, 0.0)).norm() < 1e-14);
        }
        assert!((&f.overlaps - &CMatrix::identity(3)).max_abs() < 1e-14);
    }

    #[test]
    fn hand_example_two_by_two() {
        let j = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, -1.0]]).unwrap();
        let s = st(j);
        let f = decompose(&s).unwrap();
        let i1 = f.eigenvalues.iter().position(|e| (e - C64::new(1.0, 0.0)).norm() < 1e-12).unwrap();
        let i2 = 1 - i1;
        assert!((f.overlaps[(i1, i1)] - C64::new(1.25, 0.0)).norm() < 1e-12);
        assert!((f.overlaps[(i1, i2)] - C64::new(-0.25, 0.0)).norm() < 1e-12);
        assert!((overlap_eigvec(&f, i1, i1) - C64::new(1.25, 0.0)).norm() < 1e-12);
        let od = overlap_det(&s, &f.eigenvalues, i1, i1).unwrap();
        assert!((od - C64::new(1.25, 0.0)).norm() < 1e-12);
        assert!(f.biorthogonality_error() < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_is_rejected() {
        let j = CMatrix::from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]).unwrap();
        let err = decompose(&MatrixState::new(0.25, j).unwrap()).unwrap_err();
        assert!(matches!(err, Error::Degenerate { time: Some(t), .. } if t == 0.25));
        let zero = CMatrix::zeros(3);
        assert!(decompose(&st(zero)).is_err());
        // N = 1 is never degenerate
        let one = CMatrix::from_diag(&[C64::new(0.0, 0.0)]);
        let f = decompose(&st(one)).unwrap();
        assert!(f.min_gap.is_infinite());
        assert_eq!(f.overlaps[(0, 0)], C64::new(1.0, 0.0));
    }

    #[test]
    fn coefficients_small_cases() {
        let one = st(CMatrix::from_diag(&[C64::new(0.3, -0.2)]));
        let c = martingale_coefficients(&one, &[C64::new(0.3, -0.2)], 0).unwrap();
        assert_eq!(c[(0, 0)], C64::new(1.0, 0.0));

        let eigs = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        let d = st(CMatrix::from_diag(&eigs));
        let c = martingale_coefficients(&d, &eigs, 0).unwrap();
        assert!((c[(0, 0)] - C64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(c[(0, 1)].norm() + c[(1, 0)].norm() + c[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn drift_two_points() {
        let eigs = [C64::new(1.0, 0.0), C64::new(-1.0, 0.0)];
        assert!((drift(&eigs, 0, 1.0) - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_eq!(drift(&eigs[..1], 0, 1.0), C64::new(0.0, 0.0));
    }
}

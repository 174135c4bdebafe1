//! Complex Schur decomposition `A = Q T Q^*` and right eigenvectors.
//!
//! Householder reduction to upper Hessenberg form followed by implicit
//! single-shift QR sweeps (Wilkinson shift, exceptional shifts on stagnation).
//! Eigenvectors come from back-substitution on the triangular factor.

use super::matrix::{CMatrix, C64, ONE, ZERO};
use crate::error::{Error, Result};

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

#[derive(Debug, Clone)]
pub struct Schur {
    /// Upper triangular factor.
    pub t: CMatrix,
    /// Unitary factor (only when vectors were requested).
    pub q: Option<CMatrix>,
}

impl Schur {
    pub fn eigenvalues(&self) -> Vec<C64> {
        (0..self.t.dim()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Eigenvalues only; skips accumulation of the unitary factor.
pub fn eigenvalues(a: &CMatrix) -> Result<Vec<C64>> {
    Ok(schur(a, false)?.eigenvalues())
}

pub fn schur(a: &CMatrix, want_q: bool) -> Result<Schur> {
    let n = a.dim();
    let mut h = a.clone();
    let mut q = if want_q { Some(CMatrix::identity(n)) } else { None };
    if n <= 1 {
        return Ok(Schur { t: h, q });
    }
    hessenberg(&mut h, q.as_mut());
    qr_iterate(&mut h, q.as_mut())?;
    // Clean the strictly lower part left behind by deflation.
    for i in 1..n {
        for j in 0..i {
            h[(i, j)] = ZERO;
        }
    }
    Ok(Schur { t: h, q })
}

fn hessenberg(h: &mut CMatrix, mut q: Option<&mut CMatrix>) {
    let n = h.dim();
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let norm_x: f64 = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm_x;
        // v = x - alpha e1, normalized
        for i in 0..n {
            v[i] = if i > k { h[(i, k)] } else { ZERO };
        }
        v[k + 1] -= alpha;
        let vnorm: f64 = v[k + 1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v[k + 1..].iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^*) H
        for j in 0..n {
            let s: C64 = (k + 1..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            let s2 = s * 2.0;
            for i in k + 1..n {
                h[(i, j)] -= v[i] * s2;
            }
        }
        // H <- H (I - 2 v v^*)
        for i in 0..n {
            let s: C64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            let s2 = s * 2.0;
            for j in k + 1..n {
                h[(i, j)] -= s2 * v[j].conj();
            }
        }
        if let Some(q) = q.as_deref_mut() {
            for i in 0..n {
                let s: C64 = (k + 1..n).map(|j| q[(i, j)] * v[j]).sum();
                let s2 = s * 2.0;
                for j in k + 1..n {
                    q[(i, j)] -= s2 * v[j].conj();
                }
            }
        }
        for i in k + 2..n {
            h[(i, k)] = ZERO;
        }
        h[(k + 1, k)] = alpha;
    }
}

/// Rotation `G = [[c, s], [-conj(s), c]]` with `G [x; y] = [r; 0]`.
#[inline]
fn givens(x: C64, y: C64) -> (f64, C64) {
    let ay = y.norm();
    if ay == 0.0 {
        return (1.0, ZERO);
    }
    let ax = x.norm();
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = (x / ax) * y.conj() / r;
    (c, s)
}

#[inline]
fn rotate_rows(h: &mut CMatrix, k: usize, c: f64, s: C64, cols: std::ops::Range<usize>) {
    for j in cols {
        let a = h[(k, j)];
        let b = h[(k + 1, j)];
        h[(k, j)] = a * c + s * b;
        h[(k + 1, j)] = -s.conj() * a + b * c;
    }
}

#[inline]
fn rotate_cols(h: &mut CMatrix, k: usize, c: f64, s: C64, rows: std::ops::Range<usize>) {
    for i in rows {
        let a = h[(i, k)];
        let b = h[(i, k + 1)];
        h[(i, k)] = a * c + b * s.conj();
        h[(i, k + 1)] = -a * s + b * c;
    }
}

fn wilkinson_shift(a: C64, b: C64, c: C64, d: C64) -> C64 {
    // eigenvalue of [[a, b], [c, d]] closest to d
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let e1 = tr_half + root;
    let e2 = tr_half - root;
    if (e1 - d).norm() <= (e2 - d).norm() {
        e1
    } else {
        e2
    }
}

fn qr_iterate(h: &mut CMatrix, mut q: Option<&mut CMatrix>) -> Result<()> {
    let n = h.dim();
    let eps = f64::EPSILON;
    let norm = h.max_abs().max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter_since_deflation = 0usize;
    let mut total = 0usize;
    let max_total = MAX_SWEEPS_PER_EIGENVALUE * n;

    while hi > 0 {
        // find start of the unreduced block ending at hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let diag = h[(lo, lo)].norm() + h[(lo - 1, lo - 1)].norm();
            let scale = if diag == 0.0 { norm } else { diag };
            if sub <= eps * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iter_since_deflation = 0;
            continue;
        }
        total += 1;
        iter_since_deflation += 1;
        if total > max_total {
            return Err(Error::NoConvergence { iterations: total });
        }

        let shift = if iter_since_deflation.is_multiple_of(11) {
            // exceptional shift to break cycles
            let e = h[(hi, hi - 1)].norm() + if hi >= 2 { h[(hi - 1, hi - 2)].norm() } else { 0.0 };
            h[(hi, hi)] + C64::new(0.75 * e, -0.4375 * e)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };

        // implicit single-shift sweep on rows/cols lo..=hi
        let mut x = h[(lo, lo)] - shift;
        let mut y = h[(lo + 1, lo)];
        for k in lo..hi {
            let (c, s) = givens(x, y);
            let col_start = if k > lo { k - 1 } else { lo };
            rotate_rows(h, k, c, s, col_start..n);
            let row_end = (k + 3).min(hi + 1);
            rotate_cols(h, k, c, s, 0..row_end);
            if let Some(q) = q.as_deref_mut() {
                rotate_cols(q, k, c, s, 0..n);
            }
            if k > lo {
                h[(k + 1, k - 1)] = ZERO;
            }
            if k + 1 < hi {
                x = h[(k + 1, k)];
                y = h[(k + 2, k)];
            }
        }
    }
    Ok(())
}

/// Smallest pairwise distance between eigenvalues (infinite for N ≤ 1).
pub fn min_gap(eigs: &[C64]) -> f64 {
    let mut g = f64::INFINITY;
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            g = g.min((eigs[i] - eigs[j]).norm());
        }
    }
    g
}

/// Right eigenvectors of an upper-triangular matrix as columns (unnormalized),
/// by back-substitution with tiny-denominator protection.
pub fn triangular_eigenvectors(t: &CMatrix) -> CMatrix {
    let n = t.dim();
    let small = f64::EPSILON * t.max_abs().max(f64::MIN_POSITIVE);
    let mut y = CMatrix::zeros(n);
    let mut col = vec![ZERO; n];
    for k in 0..n {
        let lam = t[(k, k)];
        col.iter_mut().for_each(|v| *v = ZERO);
        col[k] = ONE;
        for j in (0..k).rev() {
            let s: C64 = (j + 1..=k).map(|m| t[(j, m)] * col[m]).sum();
            let mut d = t[(j, j)] - lam;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            col[j] = -s / d;
        }
        for i in 0..n {
            y[(i, k)] = col[i];
        }
    }
    y
}

//! Derivatives of eigenvalues with respect to the real Brownian coordinates
//! of the matrix process, from the characteristic polynomial and by finite
//! differences.
//!
//! `J = a·H1 + i·b·H2` with `H1` built from `x_kk`, `x_kl`, `y_kl` and `H2`
//! from `α_kk`, `α_kl`, `β_kl` (`k < l`), each a standard real coordinate:
//! `H_kl = (x_kl + i y_kl)/√2` off the diagonal.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::Result;
use crate::linalg::identities::minor0;
use crate::linalg::{char_poly, eigenvalues, CMatrix, C64};
use crate::process::{Hermiticity, MatrixState};
use crate::report::{json_f64, VerificationReport};
use crate::spectral::{drift, fprime, overlap_det};
use crate::stats::{linear_fit, LinearFit};

use super::onestep::{nearest, simple_spectrum};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    X(usize, usize),
    Y(usize, usize),
    Alpha(usize, usize),
    Beta(usize, usize),
}

impl Coordinate {
    /// All `2N²` coordinates.
    pub fn all(n: usize) -> Vec<Coordinate> {
        let mut out = Vec::with_capacity(2 * n * n);
        for k in 0..n {
            out.push(Coordinate::X(k, k));
            out.push(Coordinate::Alpha(k, k));
            for l in k + 1..n {
                out.push(Coordinate::X(k, l));
                out.push(Coordinate::Y(k, l));
                out.push(Coordinate::Alpha(k, l));
                out.push(Coordinate::Beta(k, l));
            }
        }
        out
    }

    pub fn label(&self) -> String {
        let (name, k, l) = match *self {
            Coordinate::X(k, l) => ("x", k, l),
            Coordinate::Y(k, l) => ("y", k, l),
            Coordinate::Alpha(k, l) => ("alpha", k, l),
            Coordinate::Beta(k, l) => ("beta", k, l),
        };
        format!("{name}{}{}", k + 1, l + 1)
    }

    /// `∂J/∂η`.
    pub fn direction(&self, n: usize, tau: Hermiticity) -> CMatrix {
        let (a, b) = tau.weights();
        let mut d = CMatrix::zeros(n);
        match *self {
            Coordinate::X(k, l) if k == l => d[(k, k)] = C64::new(a, 0.0),
            Coordinate::Alpha(k, l) if k == l => d[(k, k)] = C64::new(0.0, b),
            Coordinate::X(k, l) => {
                d[(k, l)] = C64::new(a * FRAC_1_SQRT_2, 0.0);
                d[(l, k)] = C64::new(a * FRAC_1_SQRT_2, 0.0);
            }
            Coordinate::Y(k, l) => {
                d[(k, l)] = C64::new(0.0, a * FRAC_1_SQRT_2);
                d[(l, k)] = C64::new(0.0, -a * FRAC_1_SQRT_2);
            }
            Coordinate::Alpha(k, l) => {
                d[(k, l)] = C64::new(0.0, b * FRAC_1_SQRT_2);
                d[(l, k)] = C64::new(0.0, b * FRAC_1_SQRT_2);
            }
            Coordinate::Beta(k, l) => {
                d[(k, l)] = C64::new(-b * FRAC_1_SQRT_2, 0.0);
                d[(l, k)] = C64::new(b * FRAC_1_SQRT_2, 0.0);
            }
        }
        d
    }
}

/// `∂f/∂η` at `λ` from the signed first minors of `λI − J`.
pub fn f_eta(j: &CMatrix, lambda: C64, coord: Coordinate, tau: Hermiticity) -> C64 {
    let (a, b) = tau.weights();
    let m = j.shifted_resolvent_base(lambda);
    let s = FRAC_1_SQRT_2;
    let i = C64::new(0.0, 1.0);
    let signed = |k: usize, l: usize| {
        let sign = if (k + l).is_multiple_of(2) { 1.0 } else { -1.0 };
        (minor0(&m, &[k], &[l]) * sign, minor0(&m, &[l], &[k]) * sign)
    };
    match coord {
        Coordinate::X(k, l) if k == l => -minor0(&m, &[k], &[k]) * a,
        Coordinate::Alpha(k, l) if k == l => -i * b * minor0(&m, &[k], &[k]),
        Coordinate::X(k, l) => {
            let (p, q) = signed(k, l);
            -(p + q) * (a * s)
        }
        Coordinate::Y(k, l) => {
            let (p, q) = signed(k, l);
            -i * (a * s) * (p - q)
        }
        Coordinate::Alpha(k, l) => {
            let (p, q) = signed(k, l);
            -i * (b * s) * (p + q)
        }
        Coordinate::Beta(k, l) => {
            let (p, q) = signed(k, l);
            (p - q) * (b * s)
        }
    }
}

/// `(∂λ_i^R/∂η, ∂λ_i^I/∂η)` for every coordinate, via
/// `∂λ = −f_η conj(f_λ) / |f_λ|²`.
pub fn gradient(state: &MatrixState, eigs: &[C64], i: usize, tau: Hermiticity) -> Vec<C64> {
    let fl = fprime(eigs, i);
    let n = state.dim();
    Coordinate::all(n)
        .into_iter()
        .map(|c| -f_eta(&state.j, eigs[i], c, tau) * fl.conj() / fl.norm_sqr())
        .collect()
}

fn eigen_near(j: &CMatrix, lam: C64) -> Result<C64> {
    let e = eigenvalues(j)?;
    Ok(e[nearest(&e, lam)])
}

/// Central difference of `λ_i` along every coordinate.
pub fn fd_gradient(state: &MatrixState, eigs: &[C64], i: usize, tau: Hermiticity, h: f64) -> Result<Vec<C64>> {
    let n = state.dim();
    Coordinate::all(n)
        .into_iter()
        .map(|c| {
            let d = c.direction(n, tau).scale_real(h);
            let up = eigen_near(&(&state.j + &d), eigs[i])?;
            let down = eigen_near(&(&state.j - &d), eigs[i])?;
            Ok((up - down) / (2.0 * h))
        })
        .collect()
}

/// Default first-derivative step `1e−5·(1 + ‖J‖)`.
pub fn default_h1(state: &MatrixState) -> f64 {
    1e-5 * (1.0 + state.j.frobenius())
}

/// Default second-derivative step `1e−4·(1 + ‖J‖)`.
pub fn default_h2(state: &MatrixState) -> f64 {
    1e-4 * (1.0 + state.j.frobenius())
}

fn max_component(v: &[C64]) -> f64 {
    v.iter().map(|z| z.re.abs().max(z.im.abs())).fold(0.0, f64::max)
}

fn max_component_error(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x.re - y.re).abs().max((x.im - y.im).abs()))
        .fold(0.0, f64::max)
}

pub const FIRST_DERIVATIVE_TOL: f64 = 1e-5;
pub const LAPLACIAN_TOL: f64 = 1e-3;
pub const GRADIENT_IDENTITY_TOL: f64 = 1e-7;

/// Closed-form first derivatives against central differences; the error is
/// the largest component deviation relative to the largest gradient component.
pub fn verify_implicit_derivatives(state: &MatrixState, tau: Hermiticity, i: usize, h: f64) -> Result<VerificationReport> {
    let eigs = simple_spectrum(state)?;
    let theory = gradient(state, &eigs, i, tau);
    let fd = fd_gradient(state, &eigs, i, tau, h)?;
    let scale = max_component(&theory).max(f64::MIN_POSITIVE);
    let err = max_component_error(&theory, &fd) / scale;
    let worst = (0..theory.len())
        .max_by(|&p, &q| {
            let e = |k: usize| (theory[k] - fd[k]).norm();
            e(p).total_cmp(&e(q))
        })
        .unwrap_or(0);
    let coords = Coordinate::all(state.dim());
    Ok(VerificationReport::deterministic(
        format!("implicit_derivatives[l{}]", i + 1),
        theory[worst],
        fd[worst],
        err,
        FIRST_DERIVATIVE_TOL,
        coords.len() as u64,
    )
    .note("worst_coordinate", coords[worst].label())
    .note_f64("h", h)
    .note_f64("tau", tau.tau()))
}

/// Fitted order of the central-difference error over a sweep of steps
/// (close to 2 while truncation dominates rounding).
pub fn fd_convergence_order(state: &MatrixState, tau: Hermiticity, i: usize, hs: &[f64]) -> Result<LinearFit> {
    let eigs = simple_spectrum(state)?;
    let theory = gradient(state, &eigs, i, tau);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for &h in hs {
        let fd = fd_gradient(state, &eigs, i, tau, h)?;
        x.push(h.ln());
        y.push(max_component_error(&theory, &fd).ln());
    }
    Ok(linear_fit(&x, &y))
}

/// The gradient inner-product identities between paths `i` and `j`:
/// `∇λ_i^R·∇λ_i^I = 0`, `|∇λ_i^R|² = (O_ii+τ)/2`, `|∇λ_i^I|² = (O_ii−τ)/2`, and
/// for `i ≠ j` additionally `∇λ_i^R·∇λ_j^R = ∇λ_i^I·∇λ_j^I = Re O_ij/2`,
/// `∇λ_i^R·∇λ_j^I = −Im O_ij/2`, with `O` from the minor-sum formula.
pub fn verify_gradient_products(state: &MatrixState, tau: Hermiticity, i: usize, j: usize) -> Result<VerificationReport> {
    let eigs = simple_spectrum(state)?;
    let gi = gradient(state, &eigs, i, tau);
    let gj = gradient(state, &eigs, j, tau);
    let dot = |p: &[C64], fp: fn(&C64) -> f64, q: &[C64], fq: fn(&C64) -> f64| -> f64 {
        p.iter().zip(q).map(|(a, b)| fp(a) * fq(b)).sum()
    };
    let re = |z: &C64| z.re;
    let im = |z: &C64| z.im;
    let t = tau.tau();
    let oii = overlap_det(state, &eigs, i, i)?.re;
    let ojj = overlap_det(state, &eigs, j, j)?.re;
    let mut checks: Vec<(&str, f64, f64)> = vec![
        ("re_i.im_i", dot(&gi, re, &gi, im), 0.0),
        ("re_i.re_i", dot(&gi, re, &gi, re), (oii + t) / 2.0),
        ("im_i.im_i", dot(&gi, im, &gi, im), (oii - t) / 2.0),
    ];
    if i != j {
        let oij = overlap_det(state, &eigs, i, j)?;
        checks.push(("re_i.re_j", dot(&gi, re, &gj, re), oij.re / 2.0));
        checks.push(("im_i.im_j", dot(&gi, im, &gj, im), oij.re / 2.0));
        checks.push(("re_i.im_j", dot(&gi, re, &gj, im), -oij.im / 2.0));
    }
    let scale = (oii * ojj).sqrt().max(1.0);
    let errors: Vec<f64> = checks.iter().map(|(_, got, want)| (got - want).abs() / scale).collect();
    let worst = (0..errors.len()).max_by(|&p, &q| errors[p].total_cmp(&errors[q])).unwrap_or(0);
    let (label, got, want) = checks[worst];
    let mut out = VerificationReport::deterministic(
        format!("gradient_identities[l{},l{}]", i + 1, j + 1),
        C64::new(want, 0.0),
        C64::new(got, 0.0),
        errors[worst],
        GRADIENT_IDENTITY_TOL,
        checks.len() as u64,
    )
    .note("worst", label);
    for (label, got, want) in &checks {
        out = out.note_f64(&format!("residual.{label}"), got - want);
    }
    Ok(out)
}

/// Second-order central-difference Laplacian of `λ_i` over all coordinates.
pub fn fd_laplacian(state: &MatrixState, eigs: &[C64], i: usize, tau: Hermiticity, h: f64) -> Result<(C64, f64)> {
    let n = state.dim();
    let mut total = C64::new(0.0, 0.0);
    let mut largest = 0.0f64;
    for c in Coordinate::all(n) {
        let d = c.direction(n, tau).scale_real(h);
        let up = eigen_near(&(&state.j + &d), eigs[i])?;
        let down = eigen_near(&(&state.j - &d), eigs[i])?;
        let second = (up - eigs[i] * 2.0 + down) / (h * h);
        largest = largest.max(second.re.abs()).max(second.im.abs());
        total += second;
    }
    Ok((total, largest))
}

/// Laplacian of `λ_i` against `τ f_λλ/f_λ = 2τ Σ_{j≠i} 1/(λ_i − λ_j)`.
pub fn verify_laplacian(state: &MatrixState, tau: Hermiticity, i: usize, h: f64) -> Result<VerificationReport> {
    let eigs = simple_spectrum(state)?;
    let cp = char_poly(&state.j, eigs[i]);
    let theory = cp.d2 * cp.d1.conj() / cp.d1.norm_sqr() * tau.tau();
    let spectral = drift(&eigs, i, tau.tau()) * 2.0;
    let (fd, largest) = fd_laplacian(state, &eigs, i, tau, h)?;
    let scale = theory.re.abs().max(theory.im.abs()).max(largest).max(f64::MIN_POSITIVE);
    let err = (fd.re - theory.re).abs().max((fd.im - theory.im).abs()) / scale;
    Ok(VerificationReport::deterministic(
        format!("laplacian[l{}]", i + 1),
        theory,
        fd,
        err,
        LAPLACIAN_TOL,
        (2 * state.dim() * state.dim()) as u64,
    )
    .note("spectral_form", vec![json_f64(spectral.re), json_f64(spectral.im)])
    .note_f64("h", h)
    .note_f64("tau", tau.tau()))
}

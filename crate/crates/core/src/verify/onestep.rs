//! Frozen-state one-step estimators of the eigenvalue SDE.

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, min_gap, CMatrix, C64};
use crate::parallel;
use crate::process::{ege_gaussian, sample_increment, MatrixState, SimConfig};
use crate::report::{json_f64, VerificationReport};
use crate::rng;
use crate::spectral::{drift, martingale_coefficients, DEGENERACY_GAP};
use crate::stats::{linear_fit, Moments};

/// Index of the eigenvalue closest to `target`.
pub fn nearest(eigs: &[C64], target: C64) -> usize {
    let mut best = 0;
    for (k, e) in eigs.iter().enumerate() {
        if (e - target).norm() < (eigs[best] - target).norm() {
            best = k;
        }
    }
    best
}

/// Eigenvalues of a state, rejecting spectra that are not simple.
pub fn simple_spectrum(state: &MatrixState) -> Result<Vec<C64>> {
    let eigs = eigenvalues(&state.j)?;
    let gap = min_gap(&eigs);
    if eigs.len() > 1 && (gap == 0.0 || gap < DEGENERACY_GAP * state.j.frobenius()) {
        return Err(Error::degenerate(gap).at_time(state.t).with_matrix(&state.j));
    }
    Ok(eigs)
}

fn check_index(eigs: &[C64], i: usize) -> Result<()> {
    if i >= eigs.len() {
        return Err(Error::argument(format!("eigenvalue index {} out of range 1..={}", i + 1, eigs.len())));
    }
    Ok(())
}

/// Eigenvalue `i` after perturbing the state by `dj`.
fn moved(j: &CMatrix, dj: &CMatrix, lam: C64) -> Result<C64> {
    let e = eigenvalues(&(j + dj))?;
    Ok(e[nearest(&e, lam)])
}

/// Rounding floor added in quadrature to Monte-Carlo standard errors so that
/// estimators whose sampling noise is exactly zero (e.g. imaginary parts in
/// the Hermitian case) are judged against floating-point resolution.
pub(crate) fn floored(se: f64, scale: f64) -> f64 {
    se.hypot(1e-9 * scale.max(1.0))
}

/// Conditional mean of `Δλ_i / Δt` from the frozen state, compared with
/// `τ Σ_{j≠i} 1/(λ_i − λ_j)`. Increments are drawn in antithetic pairs
/// `±ΔJ`, which cancels the martingale term exactly and leaves the drift plus
/// an `O(Δt)` bias.
pub fn verify_drift(state: &MatrixState, cfg: &SimConfig, i: usize, draws: u64) -> Result<VerificationReport> {
    let eigs = simple_spectrum(state)?;
    check_index(&eigs, i)?;
    if draws < 2 {
        return Err(Error::argument("drift estimator needs at least 2 draws"));
    }
    let lam = eigs[i];
    let theory = drift(&eigs, i, cfg.tau());
    let dom = rng::domain(&format!("drift/{}", i));
    let parts = parallel::chunked(cfg.seed, dom, draws, |s, count| -> Result<[Moments; 4]> {
        let mut acc = [Moments::new(); 4];
        for _ in 0..count {
            let dj = sample_increment(cfg, s);
            let up = moved(&state.j, &dj, lam)? - lam;
            let down = moved(&state.j, &dj.scale_real(-1.0), lam)? - lam;
            let anti = (up + down) / (2.0 * cfg.dt);
            let plain = up / cfg.dt;
            acc[0].push(anti.re);
            acc[1].push(anti.im);
            acc[2].push(plain.re);
            acc[3].push(plain.im);
        }
        Ok(acc)
    });
    let mut acc = [Moments::new(); 4];
    for p in parts {
        let p = p?;
        for k in 0..4 {
            acc[k].merge(&p[k]);
        }
    }
    let scale = theory.norm();
    let est = C64::new(acc[0].mean(), acc[1].mean());
    Ok(VerificationReport::statistical(
        format!("drift[l{}]", i + 1),
        theory,
        est,
        floored(acc[0].stderr(), scale),
        floored(acc[1].stderr(), scale),
        draws,
    )
    .note("estimator", "antithetic")
    .note("plain_estimate", vec![json_f64(acc[2].mean()), json_f64(acc[3].mean())])
    .note("plain_stderr", vec![json_f64(acc[2].stderr()), json_f64(acc[3].stderr())])
    .note_f64("dt", cfg.dt)
    .note_f64("tau", cfg.tau()))
}

/// Predicted one-step increment `Σ_kl c_kl ΔJ_kl + drift·Δt`.
pub fn predicted_increment(coeffs: &CMatrix, dj: &CMatrix, drift: C64, dt: f64) -> C64 {
    coeffs.as_slice().iter().zip(dj.as_slice()).map(|(c, d)| c * d).sum::<C64>() + drift * dt
}

/// Number of halvings in the martingale-term sweep.
pub const SWEEP_LEVELS: u32 = 6;

#[derive(Debug, Clone)]
pub struct MartingaleSweep {
    pub dts: Vec<f64>,
    pub rms: Vec<f64>,
    pub max_predicted_imag: f64,
}

/// RMS of `Δλ_i − predicted` over a dyadic sweep `dt, dt/2, …`. Each draw
/// reuses one standard Gaussian matrix scaled by `√dt`, so the sweep isolates
/// the dependence on the step size.
pub fn martingale_sweep(state: &MatrixState, cfg: &SimConfig, i: usize, draws: u64) -> Result<MartingaleSweep> {
    let eigs = simple_spectrum(state)?;
    check_index(&eigs, i)?;
    let lam = eigs[i];
    let coeffs = martingale_coefficients(state, &eigs, i)?;
    let dr = drift(&eigs, i, cfg.tau());
    let dts: Vec<f64> = (0..SWEEP_LEVELS).map(|k| cfg.dt / f64::from(1u32 << k)).collect();
    let dom = rng::domain(&format!("martingale/{}", i));
    let parts = parallel::chunked(cfg.seed, dom, draws, |s, count| -> Result<(Vec<f64>, f64)> {
        let mut sq = vec![0.0; dts.len()];
        let mut imag = 0.0f64;
        for _ in 0..count {
            let z = ege_gaussian(cfg.n, cfg.tau, 1.0, s);
            for (k, &dt) in dts.iter().enumerate() {
                let dj = z.scale_real(dt.sqrt());
                let pred = predicted_increment(&coeffs, &dj, dr, dt);
                let actual = moved(&state.j, &dj, lam)? - lam;
                sq[k] += (actual - pred).norm_sqr();
                imag = imag.max(pred.im.abs());
            }
        }
        Ok((sq, imag))
    });
    let mut sq = vec![0.0; dts.len()];
    let mut max_predicted_imag = 0.0f64;
    for p in parts {
        let (s, im) = p?;
        sq.iter_mut().zip(s).for_each(|(a, b)| *a += b);
        max_predicted_imag = max_predicted_imag.max(im);
    }
    let rms = sq.iter().map(|v| (v / draws as f64).sqrt()).collect();
    Ok(MartingaleSweep { dts, rms, max_predicted_imag })
}

/// Residual of the linear-plus-drift prediction must shrink like `Δt`; the
/// fitted log-log exponent is compared with 1 (tolerance 0.15). For `N = 1`
/// the prediction is exact and the residual itself is checked.
pub fn verify_martingale_term(state: &MatrixState, cfg: &SimConfig, i: usize, draws: u64) -> Result<VerificationReport> {
    let sweep = martingale_sweep(state, cfg, i, draws)?;
    let name = format!("martingale_term[l{}]", i + 1);
    let scale = state.j.frobenius().max(1.0);
    let largest = sweep.rms.iter().copied().fold(0.0, f64::max);
    if state.dim() == 1 || largest <= 1e-14 * scale * cfg.dt.sqrt() {
        return Ok(VerificationReport::deterministic(
            name,
            C64::new(0.0, 0.0),
            C64::new(largest, 0.0),
            largest,
            1e-14 * scale,
            draws,
        )
        .note("regime", "exact"));
    }
    let x: Vec<f64> = sweep.dts.iter().map(|d| d.ln()).collect();
    let y: Vec<f64> = sweep.rms.iter().map(|r| r.ln()).collect();
    let fit = linear_fit(&x, &y);
    Ok(VerificationReport::deterministic(
        name,
        C64::new(1.0, 0.0),
        C64::new(fit.slope, 0.0),
        (fit.slope - 1.0).abs(),
        0.15,
        draws,
    )
    .note("dts", sweep.dts.iter().map(|&v| json_f64(v)).collect::<Vec<_>>())
    .note("rms_residual", sweep.rms.iter().map(|&v| json_f64(v)).collect::<Vec<_>>())
    .note_f64("max_predicted_imag", sweep.max_predicted_imag))
}

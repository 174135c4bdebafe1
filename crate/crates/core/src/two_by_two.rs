//! Closed-form overlap dynamics for `N = 2`.

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, C64};
use crate::parallel;
use crate::process::{replica_path, sample_increment, sample_static, MatrixState, SimConfig};
use crate::report::{json_f64, Bound, VerificationReport};
use crate::rng;
use crate::spectral::DEGENERACY_GAP;
use crate::stats::{correlation, ks_one_sample, trapezoid, Moments};
use crate::verify::onestep::floored;

#[derive(Debug, Clone, PartialEq)]
pub struct TwoByTwoFrame {
    pub t: f64,
    pub j: CMatrix,
    pub lambda1: C64,
    pub lambda2: C64,
    pub o11: f64,
    pub o12: f64,
    pub o22: f64,
    pub o21: f64,
    /// `|λ1 − λ2|²`
    pub gap2: f64,
}

/// Overlaps of a 2×2 matrix from the eigenvalues and `‖J‖²`.
pub fn closed_form_overlaps(state: &MatrixState) -> Result<TwoByTwoFrame> {
    let j = &state.j;
    if j.dim() != 2 {
        return Err(Error::argument(format!("expected a 2x2 matrix, got {}x{}", j.dim(), j.dim())));
    }
    let (a, b, c, d) = (j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
    let mid = (a + d) * 0.5;
    let root = (((a - d) * 0.5).powi(2) + b * c).sqrt();
    let (l1, l2) = (mid + root, mid - root);
    let gap2 = (l1 - l2).norm_sqr();
    let norm2 = j.frobenius_sq();
    if gap2 == 0.0 || gap2.sqrt() < DEGENERACY_GAP * norm2.sqrt() {
        return Err(Error::degenerate(gap2.sqrt()).at_time(state.t).with_matrix(&state.j));
    }
    let o11 = (norm2 - 2.0 * (l1 * l2.conj()).re) / gap2;
    let o22 = (norm2 - 2.0 * (l2 * l1.conj()).re) / gap2;
    let o12 = (l1.norm_sqr() + l2.norm_sqr() - norm2) / gap2;
    Ok(TwoByTwoFrame { t: state.t, j: j.clone(), lambda1: l1, lambda2: l2, o11, o12, o22, o21: o12, gap2 })
}

/// `2 Re(1/(λ1 − λ2)²)`
fn two_re_inv_sq(f: &TwoByTwoFrame) -> f64 {
    2.0 * (f.lambda1 - f.lambda2).powi(-2).re
}

/// Drift of `O11`: `((2O−1)² + 1)/gap2 − τ(2O−1)·2Re(1/(λ1−λ2)²)`.
pub fn o11_drift(f: &TwoByTwoFrame, tau: f64) -> f64 {
    let o = f.o11;
    ((2.0 * o - 1.0).powi(2) + 1.0) / f.gap2 - tau * (2.0 * o - 1.0) * two_re_inv_sq(f)
}

/// Quadratic-variation density of `O11`.
pub fn o11_qv(f: &TwoByTwoFrame, tau: f64) -> f64 {
    let o = f.o11;
    4.0 * o * (2.0 * o - 1.0) * (o - 1.0) / f.gap2 - 2.0 * tau * o * (o - 1.0) * two_re_inv_sq(f)
}

fn check_open_tau(cfg: &SimConfig) -> Result<()> {
    if cfg.n != 2 {
        return Err(Error::argument("two-by-two checks need n = 2"));
    }
    if cfg.tau().abs() >= 1.0 {
        return Err(Error::argument("tau must lie strictly inside (-1, 1)"));
    }
    Ok(())
}

fn o11_of(j: &CMatrix) -> Result<f64> {
    Ok(closed_form_overlaps(&MatrixState { t: 0.0, j: j.clone() })?.o11)
}

/// One-step antithetic moments of `O11`: returns accumulators of
/// `(ΔO⁺ + ΔO⁻)/(2Δt)` and `((ΔO⁺)² + (ΔO⁻)²)/(2Δt)`.
fn o11_one_step(state: &MatrixState, cfg: &SimConfig, draws: u64, label: &str) -> Result<(Moments, Moments)> {
    let o = closed_form_overlaps(state)?.o11;
    let parts = parallel::chunked(cfg.seed, rng::domain(label), draws, |s, count| -> Result<(Moments, Moments)> {
        let (mut mean, mut sq) = (Moments::new(), Moments::new());
        for _ in 0..count {
            let dj = sample_increment(cfg, s);
            let up = o11_of(&(&state.j + &dj))? - o;
            let down = o11_of(&(&state.j - &dj))? - o;
            mean.push((up + down) / (2.0 * cfg.dt));
            sq.push((up * up + down * down) / (2.0 * cfg.dt));
        }
        Ok((mean, sq))
    });
    let (mut mean, mut sq) = (Moments::new(), Moments::new());
    for p in parts {
        let (m, s) = p?;
        mean.merge(&m);
        sq.merge(&s);
    }
    Ok((mean, sq))
}

pub fn verify_o11_drift(state: &MatrixState, cfg: &SimConfig, draws: u64) -> Result<VerificationReport> {
    check_open_tau(cfg)?;
    let f = closed_form_overlaps(state)?;
    let theory = o11_drift(&f, cfg.tau());
    let (mean, _) = o11_one_step(state, cfg, draws, "o11-drift")?;
    Ok(VerificationReport::real("o11_drift", theory, mean.mean(), floored(mean.stderr(), theory.abs()), draws)
        .note_f64("o11", f.o11)
        .note_f64("gap2", f.gap2))
}

pub fn verify_o11_qv(state: &MatrixState, cfg: &SimConfig, draws: u64) -> Result<VerificationReport> {
    check_open_tau(cfg)?;
    let f = closed_form_overlaps(state)?;
    let theory = o11_qv(&f, cfg.tau());
    let (_, sq) = o11_one_step(state, cfg, draws, "o11-qv")?;
    Ok(VerificationReport::real("o11_qv", theory, sq.mean(), floored(sq.stderr(), theory.abs()), draws)
        .note_f64("o11", f.o11)
        .note_f64("gap2", f.gap2))
}

/// Realized `⟨O11, gap2⟩` and `−8∫O11(O11−1)dt` along one replica path.
pub fn covariation_path(cfg: &SimConfig, replica: u64) -> Result<(f64, f64)> {
    let mut frames = Vec::with_capacity(cfg.steps + 1);
    for state in replica_path(cfg, replica)? {
        frames.push(closed_form_overlaps(&state)?);
    }
    let realized = frames
        .windows(2)
        .map(|w| (w[1].o11 - w[0].o11) * (w[1].gap2 - w[0].gap2))
        .sum();
    let t: Vec<f64> = frames.iter().map(|f| f.t).collect();
    let y: Vec<f64> = frames.iter().map(|f| -8.0 * f.o11 * (f.o11 - 1.0)).collect();
    Ok((realized, trapezoid(&t, &y)))
}

/// Ensemble comparison of the realized covariation with its integrated
/// theory; additionally fails when the realized mean is positive beyond noise.
pub fn verify_negative_covariation(cfg: &SimConfig, replicas: u64) -> Result<VerificationReport> {
    if cfg.n != 2 {
        return Err(Error::argument("two-by-two checks need n = 2"));
    }
    cfg.validate()?;
    let pairs = parallel::replicas(replicas, |r| covariation_path(cfg, r))?;
    let realized: Moments = pairs.iter().map(|p| p.0).collect();
    let theory: Moments = pairs.iter().map(|p| p.1).collect();
    let diff: Moments = pairs.iter().map(|p| p.0 - p.1).collect();
    let se = floored(diff.stderr(), cfg.horizon() * theory.mean().abs());
    let r = VerificationReport::real("o11_gap2_covariation", theory.mean(), realized.mean(), se, replicas)
        .note_f64("realized_stderr", realized.stderr());
    let sign_se = floored(realized.stderr(), cfg.horizon() * theory.mean().abs());
    if realized.mean() > 3.0 * sign_se {
        Ok(r.fail_because("realized covariation is positive"))
    } else {
        Ok(r)
    }
}

/// Largest sample size used for the exponential-law KS test.
pub const MAX_KS_SAMPLES: u64 = 100_000;

/// `Y = (O11 − 1)·gap2/(t(1 − τ²))` over static draws of `J(t)`: KS test
/// against Exp(1), mean against 1, and correlation diagnostics with
/// `(Re λ1, Im λ1, gap2)`.
pub fn verify_exponential_law(cfg: &SimConfig, t: f64, samples: u64) -> Result<Vec<VerificationReport>> {
    check_open_tau(cfg)?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::argument("t must be positive"));
    }
    if samples < 1000 {
        return Err(Error::argument("exponential-law check needs at least 1000 samples"));
    }
    let samples = samples.min(MAX_KS_SAMPLES);
    let tau = cfg.tau();
    let parts = parallel::chunked(cfg.seed, rng::domain("exp-law"), samples, |s, count| -> Result<Vec<[f64; 4]>> {
        (0..count)
            .map(|_| {
                let st = sample_static(cfg, t, s)?;
                let f = closed_form_overlaps(&st)?;
                let y = (f.o11 - 1.0) * f.gap2 / (t * (1.0 - tau * tau));
                Ok([y, f.lambda1.re, f.lambda1.im, f.gap2])
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(samples as usize);
    for p in parts {
        rows.extend(p?);
    }
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let y = col(0);
    let ks = ks_one_sample(&y, |x| if x <= 0.0 { 0.0 } else { 1.0 - (-x).exp() });
    let m: Moments = y.iter().copied().collect();
    let zero = C64::new(0.0, 0.0);
    let corr = |k: usize| json_f64(correlation(&y, &col(k)));
    let ks_report = VerificationReport::threshold_check(
        "exp_law_ks",
        zero,
        C64::new(ks.statistic, 0.0),
        ks.p_value,
        0.01,
        Bound::AtLeast,
        samples,
    )
    .note_f64("ks_statistic", ks.statistic)
    .note_f64("p_value", ks.p_value)
    .note("corr_re_lambda1", corr(1))
    .note("corr_im_lambda1", corr(2))
    .note("corr_gap2", corr(3));
    let mean_report = VerificationReport::real("exp_law_mean", 1.0, m.mean(), m.stderr(), samples);
    Ok(vec![ks_report, mean_report])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn st(rows: &[&[f64]]) -> MatrixState {
        MatrixState::new(0.0, CMatrix::from_real_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn hand_example() {
        let f = closed_form_overlaps(&st(&[&[1.0, 1.0], &[0.0, -1.0]])).unwrap();
        assert!((f.o11 - 1.25).abs() < 1e-15);
        assert!((f.o12 + 0.25).abs() < 1e-15);
        assert_eq!(f.o11, f.o22);
        assert_eq!(f.gap2, 4.0);
        assert!((o11_drift(&f, 0.0) - 13.0 / 16.0).abs() < 1e-15);
        assert!((o11_qv(&f, 0.0) - 15.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn normal_matrix() {
        let f = closed_form_overlaps(&st(&[&[2.0, 0.0], &[0.0, -1.0]])).unwrap();
        assert_eq!(f.o11, 1.0);
        assert_eq!(o11_qv(&f, 0.3), 0.0);
        assert!((o11_drift(&f, 0.0) - 2.0 / f.gap2).abs() < 1e-15);
    }

    #[test]
    fn rejects_degenerate_and_wrong_size() {
        assert!(closed_form_overlaps(&st(&[&[1.0, 1.0], &[0.0, 1.0]])).is_err());
        let three = MatrixState::new(0.0, CMatrix::identity(3)).unwrap();
        assert!(closed_form_overlaps(&three).is_err());
    }

    #[test]
    fn tau_endpoints_rejected_for_exponential_law() {
        let cfg = SimConfig::new(2, 1.0, 1e-3, 1, 0).unwrap();
        assert!(verify_exponential_law(&cfg, 1.0, 1000).is_err());
    }
}

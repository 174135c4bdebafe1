//! Static-ensemble spectral laws on the scaled matrix `J(t)/√(N t)`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, C64};
use crate::process::{sample_static, Hermiticity, SimConfig};
use crate::report::{json_f64, Bound, VerificationReport};
use crate::rng::{self, Stream};
use crate::spectral::decompose;
use crate::spectral::trajectory::fmt17;
use crate::stats::{chi_squared_sf, ks_one_sample, linear_fit, Moments};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    pub n: usize,
    pub tau: Hermiticity,
    pub t: f64,
    pub samples: usize,
    /// Weak non-hermiticity parameter `α` in `τ = 1 − α/N`.
    pub alpha: f64,
    pub bins: usize,
    pub seed: u64,
}

impl Default for StatsConfig {
    fn default() -> Self {
        Self {
            n: 200,
            tau: Hermiticity::new(0.0).expect("valid tau"),
            t: 1.0,
            samples: 20,
            alpha: 1.0,
            bins: 10,
            seed: 0,
        }
    }
}

/// Dimension from which finite-N checks are treated as asymptotic.
pub const ASYMPTOTIC_MIN_N: usize = 50;
pub const ELLIPSE_INFLATION: f64 = 0.05;
pub const INSIDE_FRACTION_MIN: f64 = 0.99;
pub const SEMICIRCLE_KS_MAX: f64 = 0.05;
pub const BULK_RADIUS: f64 = 0.8;
pub const PROFILE_TOL: f64 = 0.15;
const ANGULAR_SECTORS: usize = 8;

impl StatsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Config("stats needs n >= 2".into()));
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        if !(self.t.is_finite() && self.t > 0.0) {
            return Err(Error::Config(format!("t must be positive, got {}", self.t)));
        }
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::Config(format!("alpha must be nonnegative, got {}", self.alpha)));
        }
        if self.bins == 0 {
            return Err(Error::Config("bins must be positive".into()));
        }
        Ok(())
    }

    pub fn asymptotic_regime(&self) -> bool {
        self.n >= ASYMPTOTIC_MIN_N
    }

    fn sim(&self, n: usize, tau: f64) -> Result<SimConfig> {
        SimConfig::new(n, tau, 1.0, 1, self.seed)
    }
}

/// Scaled static sample `s` of dimension `n`.
fn scaled_sample(cfg: &StatsConfig, n: usize, tau: f64, label: &str, s: usize) -> Result<crate::process::MatrixState> {
    let sim = cfg.sim(n, tau)?;
    let mut src = Stream::new(cfg.seed, rng::domain(label), s as u64);
    let mut st = sample_static(&sim, cfg.t, &mut src)?;
    st.j = st.j.scale_real(1.0 / (n as f64 * cfg.t).sqrt());
    Ok(st)
}

/// Eigenvalues of `samples` scaled draws, pooled in sample order.
pub fn pooled_spectrum(cfg: &StatsConfig, n: usize, tau: f64, label: &str) -> Result<Vec<C64>> {
    let per: Vec<Result<Vec<C64>>> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| eigenvalues(&scaled_sample(cfg, n, tau, label, s)?.j))
        .collect();
    let mut out = Vec::with_capacity(n * cfg.samples);
    for p in per {
        out.extend(p?);
    }
    Ok(out)
}

/// `re,im` CSV of a point cloud.
pub fn write_cloud_csv(points: &[C64], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "re,im")?;
    for z in points {
        writeln!(w, "{},{}", fmt17(z.re), fmt17(z.im))?;
    }
    Ok(())
}

/// Fraction of scaled eigenvalues inside the 5%-inflated ellipse with
/// semi-axes `(1+τ, 1−τ)`, plus a χ² uniformity statistic over equal-area
/// elliptical cells (`bins` rings × 8 sectors) as a diagnostic.
pub fn elliptic_law_check(cfg: &StatsConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let tau = cfg.tau.tau();
    if tau.abs() >= 1.0 {
        return Err(Error::argument("elliptic law check needs -1 < tau < 1"));
    }
    let pts = pooled_spectrum(cfg, cfg.n, tau, "elliptic")?;
    let (ax, ay) = (1.0 + tau, 1.0 - tau);
    let limit = (1.0 + ELLIPSE_INFLATION).powi(2);
    let rings = cfg.bins;
    let mut counts = vec![0usize; rings * ANGULAR_SECTORS];
    let mut inside = 0usize;
    for z in &pts {
        let (u, v) = (z.re / ax, z.im / ay);
        let r2 = u * u + v * v;
        if r2 <= limit {
            inside += 1;
        }
        let ring = ((r2 * rings as f64) as usize).min(rings - 1);
        let angle = v.atan2(u) + PI;
        let sector = ((angle / (2.0 * PI) * ANGULAR_SECTORS as f64) as usize).min(ANGULAR_SECTORS - 1);
        counts[ring * ANGULAR_SECTORS + sector] += 1;
    }
    let expected = pts.len() as f64 / counts.len() as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let frac = inside as f64 / pts.len() as f64;
    Ok(VerificationReport::threshold_check(
        format!("elliptic_law_inside_fraction[tau={tau}]"),
        C64::new(1.0, 0.0),
        C64::new(frac, 0.0),
        frac,
        INSIDE_FRACTION_MIN,
        Bound::AtLeast,
        pts.len() as u64,
    )
    .note("asymptotic_regime", cfg.asymptotic_regime())
    .note("semi_axes", vec![json_f64(ax), json_f64(ay)])
    .note_f64("uniformity_chi2", chi2)
    .note("uniformity_cells", counts.len())
    .note_f64("uniformity_p_value", chi_squared_sf(chi2, (counts.len() - 1) as f64)))
}

/// `∫_{−2}^{x} √(4−s²)/(2π) ds`
pub fn semicircle_cdf(x: f64) -> f64 {
    if x <= -2.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        0.5 + x * (4.0 - x * x).sqrt() / (4.0 * PI) + (x / 2.0).asin() / PI
    }
}

/// KS distance between scaled eigenvalues and the semicircle law (τ = 1 only).
pub fn semicircle_check(cfg: &StatsConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    if cfg.tau.tau() != 1.0 {
        return Err(Error::argument("semicircle check needs tau = 1"));
    }
    let pts = pooled_spectrum(cfg, cfg.n, 1.0, "semicircle")?;
    // imaginary parts before scaling
    let max_im = pts.iter().map(|z| z.im.abs()).fold(0.0, f64::max) * (cfg.n as f64 * cfg.t).sqrt();
    let xs: Vec<f64> = pts.iter().map(|z| z.re).collect();
    let ks = ks_one_sample(&xs, semicircle_cdf);
    Ok(VerificationReport::threshold_check(
        "semicircle_ks",
        C64::new(0.0, 0.0),
        C64::new(ks.statistic, 0.0),
        ks.statistic,
        SEMICIRCLE_KS_MAX,
        Bound::AtMost,
        xs.len() as u64,
    )
    .note("asymptotic_regime", cfg.asymptotic_regime())
    .note_f64("max_abs_imag_unscaled", max_im))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSweep {
    pub ns: Vec<usize>,
    pub taus: Vec<f64>,
    pub std_imag: Vec<f64>,
    pub exponent: f64,
    pub exponent_stderr: f64,
}

/// Standard deviation of `Im λ` of the scaled matrix across `ns`, with
/// `τ = 1 − α/N` when `scaled`, or the configured τ held fixed otherwise.
pub fn imaginary_spread_sweep(cfg: &StatsConfig, ns: &[usize], scaled: bool) -> Result<ScalingSweep> {
    cfg.validate()?;
    if ns.len() < 2 {
        return Err(Error::argument("scaling sweep needs at least two sizes"));
    }
    let mut taus = Vec::new();
    let mut stds = Vec::new();
    for &n in ns {
        let tau = if scaled { 1.0 - cfg.alpha / n as f64 } else { cfg.tau.tau() };
        Hermiticity::new(tau)?;
        let pts = pooled_spectrum(cfg, n, tau, &format!("weak/{n}"))?;
        let m: Moments = pts.iter().map(|z| z.im).collect();
        taus.push(tau);
        stds.push(m.variance().sqrt());
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = stds.iter().map(|s| s.ln()).collect();
    let fit = linear_fit(&x, &y);
    Ok(ScalingSweep { ns: ns.to_vec(), taus, std_imag: stds, exponent: fit.slope, exponent_stderr: fit.slope_stderr })
}

pub const SCALING_TOL: f64 = 0.25;

fn sweep_notes(r: VerificationReport, s: &ScalingSweep) -> VerificationReport {
    r.note("ns", s.ns.clone())
        .note("taus", s.taus.iter().map(|&v| json_f64(v)).collect::<Vec<_>>())
        .note("std_imag", s.std_imag.iter().map(|&v| json_f64(v)).collect::<Vec<_>>())
}

/// Fitted exponent of `std(Im λ) ∝ N^p` under `τ = 1 − α/N`, expected `p = −1`.
/// With `α = 0` the matrix is Hermitian and the spread itself must vanish.
pub fn weak_nonhermiticity_scaling(cfg: &StatsConfig, ns: &[usize]) -> Result<VerificationReport> {
    let s = imaginary_spread_sweep(cfg, ns, true)?;
    let r = if cfg.alpha == 0.0 {
        let worst = s.std_imag.iter().copied().fold(0.0, f64::max);
        VerificationReport::deterministic("weak_nonhermiticity_spread", C64::new(0.0, 0.0), C64::new(worst, 0.0), worst, 1e-10, ns.len() as u64)
    } else {
        VerificationReport::deterministic(
            "weak_nonhermiticity_exponent",
            C64::new(-1.0, 0.0),
            C64::new(s.exponent, 0.0),
            (s.exponent + 1.0).abs(),
            SCALING_TOL,
            ns.len() as u64,
        )
        .note_f64("exponent_stderr", s.exponent_stderr)
    };
    Ok(sweep_notes(r, &s).note_f64("alpha", cfg.alpha))
}

/// Control: with τ fixed the spread does not shrink with N (exponent ≈ 0).
pub fn fixed_tau_control(cfg: &StatsConfig, ns: &[usize]) -> Result<VerificationReport> {
    let s = imaginary_spread_sweep(cfg, ns, false)?;
    let r = VerificationReport::deterministic(
        "fixed_tau_exponent",
        C64::new(0.0, 0.0),
        C64::new(s.exponent, 0.0),
        s.exponent.abs(),
        SCALING_TOL,
        ns.len() as u64,
    )
    .note_f64("tau", cfg.tau.tau());
    Ok(sweep_notes(r, &s))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileBin {
    pub r_lo: f64,
    pub r_hi: f64,
    pub count: usize,
    pub mean_overlap_over_n: f64,
    pub theory: f64,
}

/// Mean `O_ii/N` in equal-area rings `|z|² ∈ [k/K, (k+1)/K)` of the unit disk
/// (points beyond radius 1 are dropped). Theory per ring is the ring average
/// of `1 − |z|²` over the points it holds.
pub fn overlap_profile(cfg: &StatsConfig) -> Result<Vec<ProfileBin>> {
    cfg.validate()?;
    let n = cfg.n;
    let per: Vec<Result<Vec<(f64, f64)>>> = (0..cfg.samples)
        .into_par_iter()
        .map(|s| {
            let st = scaled_sample(cfg, n, cfg.tau.tau(), "chalker-mehlig", s)?;
            let f = decompose(&st)?;
            Ok(f.eigenvalues.iter().zip(f.diag_overlaps()).map(|(z, o)| (z.norm(), o)).collect())
        })
        .collect();
    let k = cfg.bins;
    let mut sum_o = vec![0.0; k];
    let mut sum_th = vec![0.0; k];
    let mut count = vec![0usize; k];
    for p in per {
        for (r, o) in p? {
            if r >= 1.0 {
                continue;
            }
            let b = ((r * r * k as f64) as usize).min(k - 1);
            sum_o[b] += o / n as f64;
            sum_th[b] += 1.0 - r * r;
            count[b] += 1;
        }
    }
    Ok((0..k)
        .map(|b| ProfileBin {
            r_lo: (b as f64 / k as f64).sqrt(),
            r_hi: ((b + 1) as f64 / k as f64).sqrt(),
            count: count[b],
            mean_overlap_over_n: sum_o[b] / count[b].max(1) as f64,
            theory: sum_th[b] / count[b].max(1) as f64,
        })
        .collect())
}

/// Conditional mean diagonal overlap `E[O_ii/N | z] ≈ 1 − |z|²`; bulk rings
/// (outer radius ≤ 0.8) must agree within 15%.
pub fn chalker_mehlig_profile(cfg: &StatsConfig) -> Result<VerificationReport> {
    if cfg.tau.tau() != 0.0 {
        return Err(Error::argument("overlap profile check needs tau = 0"));
    }
    let bins = overlap_profile(cfg)?;
    let bulk: Vec<&ProfileBin> = bins.iter().filter(|b| b.r_hi <= BULK_RADIUS + 1e-12 && b.count > 0).collect();
    if bulk.is_empty() {
        return Err(Error::argument("no populated bulk bins; increase bins or samples"));
    }
    let rel = |b: &ProfileBin| (b.mean_overlap_over_n / b.theory - 1.0).abs();
    let worst = bulk.iter().copied().max_by(|a, b| rel(a).total_cmp(&rel(b))).expect("nonempty");
    let table: Vec<serde_json::Value> = bins
        .iter()
        .map(|b| {
            serde_json::json!({
                "r_lo": json_f64(b.r_lo),
                "r_hi": json_f64(b.r_hi),
                "count": b.count,
                "mean_overlap_over_n": json_f64(b.mean_overlap_over_n),
                "theory": json_f64(b.theory),
            })
        })
        .collect();
    Ok(VerificationReport::deterministic(
        "chalker_mehlig_bulk_profile",
        C64::new(worst.theory, 0.0),
        C64::new(worst.mean_overlap_over_n, 0.0),
        rel(worst),
        PROFILE_TOL,
        bins.iter().map(|b| b.count as u64).sum(),
    )
    .note("asymptotic_regime", cfg.asymptotic_regime())
    .note("bins", table))
}

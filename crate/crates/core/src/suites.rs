//! Batteries of checks shared by the command-line tool and the acceptance
//! tests. Every suite is a pure function of its parameters and seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    cauchy_binet_sum, char_poly, combinations, compound_det, det, eigenvalues, elementary_symmetric,
    triple_sum_residual, min_gap, principal_minor_sum, twice_cofactor_det, CMatrix, C64,
};
use crate::linalg::identities::squared_minor_identity;
use crate::process::{initial_state, sample_static, Hermiticity, Initial, MatrixState, SimConfig};
use crate::report::VerificationReport;
use crate::rng::{self, NormalSource, Stream};
use crate::spectral::{decompose, overlap_det, DEGENERACY_GAP};
use crate::spectral_stats::{
    chalker_mehlig_profile, elliptic_law_check, fixed_tau_control, semicircle_check,
    weak_nonhermiticity_scaling, StatsConfig,
};
use crate::two_by_two::{
    verify_exponential_law, verify_negative_covariation, verify_o11_drift, verify_o11_qv,
};
use crate::verify::derivatives::{default_h1, default_h2};
use crate::verify::{
    all_targets, non_collision_report, simulate_ensemble, verify_drift, verify_gradient_products,
    verify_implicit_derivatives, verify_laplacian, verify_martingale_term, verify_qv,
    verify_vandermonde_martingale,
};
use crate::process::entry_covariance_report;

pub const IDENTITY_TOL: f64 = 1e-8;
pub const BRIDGE_TOL: f64 = 1e-7;
pub const NORMAL_OVERLAP_TOL: f64 = 1e-8;
const MAX_RESAMPLES: usize = 1000;

/// Matrix with i.i.d. standard complex Gaussian entries (`E|z|² = 1`),
/// resampled until its eigenvalues are pairwise further apart than 1e-8.
pub fn random_test_matrix(n: usize, src: &mut impl NormalSource) -> Result<CMatrix> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for _ in 0..MAX_RESAMPLES {
        let a = CMatrix::from_fn(n, |_, _| C64::new(s * src.next_normal(), s * src.next_normal()));
        if min_gap(&eigenvalues(&a)?) > DEGENERACY_GAP {
            return Ok(a);
        }
    }
    Err(Error::degenerate(0.0))
}

fn test_matrix_stream(seed: u64, label: &str, n: usize, m: usize) -> Stream {
    Stream::new(seed, rng::domain(label), ((n as u64) << 32) | m as u64)
}

/// Deterministic report whose estimate is the worst error over a family.
fn worst(name: String, errors: &[f64], tol: f64) -> VerificationReport {
    let w = errors.iter().copied().fold(0.0, |a: f64, b| if b.is_nan() { f64::NAN } else { a.max(b) });
    VerificationReport::deterministic(name, C64::new(0.0, 0.0), C64::new(w, 0.0), w, tol, errors.len() as u64)
}

#[derive(Debug, Default)]
struct IdentityErrors {
    dyson: f64,
    char_poly_routes: f64,
    minor_sums: f64,
    twice_cofactor: f64,
    cauchy_binet: f64,
    squared_minors: f64,
    triple_sum: f64,
}

fn rel(diff: C64, scale: f64) -> f64 {
    diff.norm() / scale.max(f64::MIN_POSITIVE)
}

fn identity_errors(a: &CMatrix, b: &CMatrix, probe: C64) -> Result<IdentityErrors> {
    let n = a.dim();
    let eigs = eigenvalues(a)?;
    let mut e = IdentityErrors::default();
    for (i, &li) in eigs.iter().enumerate() {
        let cp = char_poly(a, li);
        let lhs = cp.d2 / cp.d1;
        let mut rhs = C64::new(0.0, 0.0);
        let mut scale = lhs.norm();
        for (j, &lj) in eigs.iter().enumerate() {
            if j != i {
                let term = (li - lj).inv() * 2.0;
                scale = scale.max(term.norm());
                rhs += term;
            }
        }
        e.dyson = e.dyson.max(rel(lhs - rhs, scale));
        e.squared_minors = e.squared_minors.max(squared_minor_identity(a, &eigs, li).relative());
    }
    e.squared_minors = e.squared_minors.max(squared_minor_identity(a, &eigs, probe).relative());

    let m = char_poly(a, probe);
    let s = crate::linalg::char_poly_from_spectrum(&eigs, probe);
    let abs_eigs: Vec<C64> = eigs.iter().map(|z| C64::new(z.norm() + probe.norm(), 0.0)).collect();
    let mag = |k: usize| elementary_symmetric(&abs_eigs, k).re;
    e.char_poly_routes = rel(m.value - s.value, mag(n))
        .max(rel(m.d1 - s.d1, mag(n - 1) * n as f64))
        .max(if n >= 2 { rel(m.d2 - s.d2, 2.0 * mag(n - 2) * (n * (n - 1)) as f64) } else { 0.0 });

    let abs_spec: Vec<C64> = eigs.iter().map(|z| C64::new(z.norm(), 0.0)).collect();
    for k in 1..=n {
        let lhs = principal_minor_sum(a, k)?;
        e.minor_sums = e.minor_sums.max(rel(lhs - elementary_symmetric(&eigs, k), elementary_symmetric(&abs_spec, k).re));
    }

    if n >= 3 {
        let d = det(a);
        for k in 0..n {
            for l in k + 1..n {
                e.twice_cofactor = e.twice_cofactor.max(rel(twice_cofactor_det(a, k, l)? - d, d.norm()));
            }
        }
        e.triple_sum = triple_sum_residual(&eigs)?.relative();
    }

    let ab = a * b;
    for alpha in combinations(n, 2) {
        for beta in combinations(n, 2) {
            let mut scale = 0.0;
            for gamma in combinations(n, 2) {
                scale += (compound_det(a, &alpha, &gamma)? * compound_det(b, &gamma, &beta)?).norm();
            }
            let diff = compound_det(&ab, &alpha, &beta)? - cauchy_binet_sum(a, b, &alpha, &beta)?;
            e.cauchy_binet = e.cauchy_binet.max(rel(diff, scale));
        }
    }
    Ok(e)
}

/// Determinant and minor identities on `matrices` random matrices for each
/// dimension in `dims`; one report per identity and dimension.
pub fn identity_suite(seed: u64, matrices: usize, dims: &[usize]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &n in dims {
        if n < 3 {
            return Err(Error::argument("identity suite needs N >= 3"));
        }
        let per: Vec<Result<IdentityErrors>> = (0..matrices)
            .into_par_iter()
            .map(|m| {
                let mut s = test_matrix_stream(seed, "identities", n, m);
                let a = random_test_matrix(n, &mut s)?;
                let b = random_test_matrix(n, &mut s)?;
                let probe = C64::new(s.next_normal(), s.next_normal());
                identity_errors(&a, &b, probe)
            })
            .collect();
        let per: Vec<IdentityErrors> = per.into_iter().collect::<Result<_>>()?;
        let col = |f: fn(&IdentityErrors) -> f64| per.iter().map(f).collect::<Vec<f64>>();
        out.push(worst(format!("dyson_drift_identity[N={n}]"), &col(|e| e.dyson), IDENTITY_TOL));
        out.push(worst(format!("char_poly_routes[N={n}]"), &col(|e| e.char_poly_routes), IDENTITY_TOL));
        out.push(worst(format!("principal_minor_sums[N={n}]"), &col(|e| e.minor_sums), IDENTITY_TOL));
        out.push(worst(format!("twice_cofactor_expansion[N={n}]"), &col(|e| e.twice_cofactor), IDENTITY_TOL));
        out.push(worst(format!("cauchy_binet[N={n}]"), &col(|e| e.cauchy_binet), IDENTITY_TOL));
        out.push(worst(format!("squared_minor_sum[N={n}]"), &col(|e| e.squared_minors), IDENTITY_TOL));
        out.push(worst(format!("triple_sum_vanishes[N={n}]"), &col(|e| e.triple_sum), IDENTITY_TOL));
    }
    Ok(out)
}

#[derive(Debug, Default)]
struct OverlapErrors {
    bridge: f64,
    min_diag: f64,
    row_sum: f64,
    biorth: f64,
}

fn overlap_errors(state: &MatrixState) -> Result<OverlapErrors> {
    let f = decompose(state)?;
    let n = f.dim();
    let mut e = OverlapErrors { min_diag: f64::INFINITY, biorth: f.biorthogonality_error(), ..Default::default() };
    for i in 0..n {
        let oii = f.overlaps[(i, i)].re;
        e.min_diag = e.min_diag.min(oii);
        let mut sum = C64::new(0.0, 0.0);
        let mut mag = 0.0;
        for j in 0..n {
            let o = f.overlaps[(i, j)];
            sum += o;
            mag += o.norm();
            let scale = (oii * f.overlaps[(j, j)].re).sqrt().max(1.0);
            e.bridge = e.bridge.max(rel(overlap_det(state, &f.eigenvalues, i, j)? - o, scale));
        }
        e.row_sum = e.row_sum.max(rel(sum - 1.0, mag));
    }
    Ok(e)
}

/// Determinant overlap formula against biorthogonal eigenvectors, plus the
/// structural properties of the overlap matrix.
pub fn overlap_suite(seed: u64, matrices: usize, dims: &[usize]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &n in dims {
        let per: Vec<Result<OverlapErrors>> = (0..matrices)
            .into_par_iter()
            .map(|m| {
                let mut s = test_matrix_stream(seed, "overlaps", n, m);
                overlap_errors(&MatrixState::new(0.0, random_test_matrix(n, &mut s)?)?)
            })
            .collect();
        let per: Vec<OverlapErrors> = per.into_iter().collect::<Result<_>>()?;
        let col = |f: fn(&OverlapErrors) -> f64| per.iter().map(f).collect::<Vec<f64>>();
        out.push(worst(format!("overlap_bridge[N={n}]"), &col(|e| e.bridge), BRIDGE_TOL));
        let min_diag = col(|e| e.min_diag).into_iter().fold(f64::INFINITY, f64::min);
        out.push(VerificationReport::deterministic(
            format!("overlap_diag_at_least_one[N={n}]"),
            C64::new(1.0, 0.0),
            C64::new(min_diag, 0.0),
            (1.0 - min_diag).max(0.0),
            1e-8,
            matrices as u64,
        ));
        out.push(worst(format!("overlap_row_sum[N={n}]"), &col(|e| e.row_sum), IDENTITY_TOL));
        out.push(worst(format!("biorthogonality[N={n}]"), &col(|e| e.biorth), IDENTITY_TOL));
    }
    Ok(out)
}

/// For normal matrices (`τ = ±1`) every overlap matrix is the identity.
pub fn normal_overlap_suite(seed: u64, matrices: usize, dims: &[usize], tau: f64) -> Result<Vec<VerificationReport>> {
    if tau.abs() != 1.0 {
        return Err(Error::argument("normal overlaps need tau = 1 or -1"));
    }
    let mut out = Vec::new();
    for &n in dims {
        let cfg = SimConfig::new(n, tau, 1e-3, 1, seed)?;
        let errs: Vec<Result<f64>> = (0..matrices)
            .into_par_iter()
            .map(|m| {
                let mut s = test_matrix_stream(seed, "normal-overlaps", n, m);
                let f = decompose(&sample_static(&cfg, 1.0, &mut s)?)?;
                let eye = CMatrix::identity(n);
                Ok((0..n * n).map(|k| (f.overlaps.as_slice()[k] - eye.as_slice()[k]).norm()).fold(0.0, f64::max))
            })
            .collect();
        let errs: Vec<f64> = errs.into_iter().collect::<Result<_>>()?;
        out.push(worst(format!("normal_overlaps_identity[tau={tau},N={n}]"), &errs, NORMAL_OVERLAP_TOL));
    }
    Ok(out)
}

/// Frozen state `k` for one-step and derivative checks: a static unit-variance
/// draw with simple spectrum.
pub fn frozen_state(cfg: &SimConfig, label: &str, k: u64) -> Result<MatrixState> {
    let mut c = cfg.clone();
    c.initial = Initial::SampledSimple { scale: 1.0 };
    let mut s = Stream::new(cfg.seed, rng::domain(label), k);
    initial_state(&c, &mut s)
}

/// First derivatives, Laplacians and gradient inner products at `states`
/// random states for each `(N, τ)`.
pub fn derivative_suite(seed: u64, states: usize, dims: &[usize], taus: &[f64]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &n in dims {
        for &tau in taus {
            let cfg = SimConfig::new(n, tau, 1e-3, 1, seed)?;
            let h = Hermiticity::new(tau)?;
            for k in 0..states {
                let st = frozen_state(&cfg, &format!("derivatives/{n}/{tau}"), k as u64)?;
                let tag = |r: VerificationReport| {
                    let name = format!("{}[N={n},tau={tau},state={k}]", r.name);
                    VerificationReport { name, ..r }
                };
                for i in 0..n {
                    out.push(tag(verify_implicit_derivatives(&st, h, i, default_h1(&st))?));
                    out.push(tag(verify_laplacian(&st, h, i, default_h2(&st))?));
                    for j in i..n {
                        out.push(tag(verify_gradient_products(&st, h, i, j)?));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// One-step drift estimates for the first eigenvalue at a random state per
/// `(τ, N)`.
pub fn drift_suite(seed: u64, draws: u64, dt: f64, taus: &[f64], dims: &[usize]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &tau in taus {
        for &n in dims {
            let cfg = SimConfig::new(n, tau, dt, 1, seed)?;
            let st = frozen_state(&cfg, "drift-state", 0)?;
            let r = verify_drift(&st, &cfg, 0, draws)?;
            out.push(VerificationReport { name: format!("{}[N={n},tau={tau}]", r.name), ..r });
        }
    }
    Ok(out)
}

/// Realized brackets of every pair of paths plus the non-collision record.
pub fn qv_suite(cfg: &SimConfig) -> Result<Vec<VerificationReport>> {
    let trs = simulate_ensemble(cfg)?;
    let mut out = all_targets(cfg.n)
        .into_iter()
        .map(|t| verify_qv(&trs, t))
        .collect::<Result<Vec<_>>>()?;
    out.push(non_collision_report(&trs)?);
    Ok(out)
}

/// Minimum eigenvalue gap along `replicas` paths for each `(N, τ)`.
pub fn non_collision_suite(base: &SimConfig, dims: &[usize], taus: &[f64]) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &n in dims {
        for &tau in taus {
            let mut cfg = base.clone();
            cfg.n = n;
            cfg.tau = Hermiticity::new(tau)?;
            let r = non_collision_report(&simulate_ensemble(&cfg)?)?;
            out.push(VerificationReport { name: format!("{}[N={n},tau={tau}]", r.name), ..r });
        }
    }
    Ok(out)
}

/// Eigenvalues on a circle with neighbouring gap exactly `gap`.
pub fn polygon_start(n: usize, gap: f64) -> Initial {
    if n == 1 {
        return Initial::Diagonal { values: vec![C64::new(0.0, 0.0)] };
    }
    let r = gap / (2.0 * (std::f64::consts::PI / n as f64).sin());
    Initial::Diagonal {
        values: (0..n)
            .map(|k| C64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
            .collect(),
    }
}

/// Vandermonde-inverse martingale check from a polygon start with
/// neighbouring gap `gap`. `U` is only a local martingale: its mean decays
/// once `t/gap²` reaches a few percent, so the horizon must stay well below
/// that for the check to be meaningful.
pub fn vandermonde_suite(base: &SimConfig, replicas: u64, checkpoints: usize, taus: &[f64], gap: f64) -> Result<Vec<VerificationReport>> {
    let mut out = Vec::new();
    for &tau in taus {
        let mut cfg = base.clone();
        cfg.tau = Hermiticity::new(tau)?;
        cfg.initial = polygon_start(cfg.n, gap);
        for r in verify_vandermonde_martingale(&cfg, replicas, checkpoints)? {
            let t = r.notes.get("t").and_then(|v| v.as_f64()).unwrap_or(f64::NAN);
            let r = r.note_f64("initial_gap", gap).note_f64("t_over_gap_sq", t / (gap * gap));
            out.push(VerificationReport { name: format!("{}[tau={tau}]", r.name), ..r });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwoByTwoOptions {
    /// Draws for the one-step drift and quadratic-variation estimates.
    pub draws: u64,
    /// Step used by the one-step estimates.
    pub one_step_dt: f64,
    pub covariation_replicas: u64,
    pub covariation_dt: f64,
    pub covariation_steps: usize,
    /// Start of the covariation paths; a well-separated spectrum keeps the
    /// per-path statistic integrable in practice.
    pub covariation_start: Initial,
    pub exp_samples: u64,
    pub exp_time: f64,
}

impl Default for TwoByTwoOptions {
    fn default() -> Self {
        Self {
            draws: 20_000,
            one_step_dt: 1e-5,
            covariation_replicas: 500,
            covariation_dt: 1e-3,
            covariation_steps: 100,
            covariation_start: Initial::Diagonal {
                values: vec![C64::new(1.0, 0.0), C64::new(-1.0, 0.0)],
            },
            exp_samples: 10_000,
            exp_time: 1.0,
        }
    }
}

/// Closed-form `N = 2` dynamics at `τ = sim.tau`.
pub fn two_by_two_suite(sim: &SimConfig, opts: &TwoByTwoOptions) -> Result<Vec<VerificationReport>> {
    if sim.n != 2 {
        return Err(Error::Config("two-by-two needs sim.n = 2".into()));
    }
    let tau = sim.tau();
    if tau.abs() >= 1.0 {
        return Err(Error::Config("two-by-two needs -1 < sim.tau < 1".into()));
    }
    let mut one = SimConfig::new(2, tau, opts.one_step_dt, 1, sim.seed)?;
    one.initial = Initial::SampledSimple { scale: 1.0 };
    let st = frozen_state(&one, "two-by-two-state", 0)?;
    let mut out = vec![verify_o11_drift(&st, &one, opts.draws)?, verify_o11_qv(&st, &one, opts.draws)?];
    let cov = SimConfig::new(2, tau, opts.covariation_dt, opts.covariation_steps, sim.seed)?
        .with_initial(opts.covariation_start.clone())?;
    out.push(verify_negative_covariation(&cov, opts.covariation_replicas)?);
    out.extend(verify_exponential_law(&one, opts.exp_time, opts.exp_samples)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifyOptions {
    /// Frozen states used by the one-step, derivative and overlap checks.
    pub states: usize,
    pub one_step_dt: f64,
    pub drift_draws: u64,
    pub martingale_draws: u64,
    /// Dimension of the entry-covariance check (all index pairs).
    pub entry_n: usize,
    pub entry_draws: u64,
    pub qv_replicas: usize,
    pub vandermonde_replicas: u64,
    pub vandermonde_dt: f64,
    pub vandermonde_steps: usize,
    pub vandermonde_checkpoints: usize,
    /// Neighbouring eigenvalue gap of the polygon start.
    pub vandermonde_gap: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            states: 2,
            one_step_dt: 1e-5,
            drift_draws: 20_000,
            martingale_draws: 2_000,
            entry_n: 2,
            entry_draws: 20_000,
            qv_replicas: 100,
            vandermonde_replicas: 2_000,
            vandermonde_dt: 1e-3,
            vandermonde_steps: 50,
            vandermonde_checkpoints: 5,
            vandermonde_gap: 2.0,
        }
    }
}

/// Everything checkable at the dimension and `τ` of `sim`: overlap formula,
/// derivative identities, one-step drift and martingale term, entry
/// covariances, realized brackets along `sim` paths, non-collision and the
/// Vandermonde-inverse martingale.
pub fn verify_suite(sim: &SimConfig, opts: &VerifyOptions) -> Result<Vec<VerificationReport>> {
    sim.validate()?;
    let n = sim.n;
    let tau = sim.tau();
    let h = sim.tau;
    let mut out = Vec::new();
    let mut one = sim.clone();
    one.dt = opts.one_step_dt;
    one.steps = 1;

    for k in 0..opts.states {
        let st = frozen_state(sim, "verify-state", k as u64)?;
        let tag = |r: VerificationReport| VerificationReport { name: format!("{}[state={k}]", r.name), ..r };
        let e = overlap_errors(&st)?;
        out.push(tag(worst("overlap_bridge".into(), &[e.bridge], BRIDGE_TOL)));
        out.push(tag(VerificationReport::deterministic(
            "overlap_diag_at_least_one",
            C64::new(1.0, 0.0),
            C64::new(e.min_diag, 0.0),
            (1.0 - e.min_diag).max(0.0),
            1e-8,
            1,
        )));
        out.push(tag(worst("overlap_row_sum".into(), &[e.row_sum], IDENTITY_TOL)));
        if tau.abs() == 1.0 {
            let f = decompose(&st)?;
            let eye = CMatrix::identity(n);
            let d = (0..n * n).map(|q| (f.overlaps.as_slice()[q] - eye.as_slice()[q]).norm()).fold(0.0, f64::max);
            out.push(tag(worst("normal_overlaps_identity".into(), &[d], NORMAL_OVERLAP_TOL)));
        }
        for i in 0..n {
            out.push(tag(verify_implicit_derivatives(&st, h, i, default_h1(&st))?));
            out.push(tag(verify_laplacian(&st, h, i, default_h2(&st))?));
            for j in i..n {
                out.push(tag(verify_gradient_products(&st, h, i, j)?));
            }
            if k == 0 {
                out.push(tag(verify_drift(&st, &one, i, opts.drift_draws)?));
                out.push(tag(verify_martingale_term(&st, &one, i, opts.martingale_draws)?));
            }
        }
    }

    let entry = SimConfig::new(opts.entry_n, tau, sim.dt, 1, sim.seed)?;
    out.extend(entry_covariance_report(&entry, opts.entry_draws)?);

    let mut qv = sim.clone();
    qv.replicas = opts.qv_replicas;
    out.extend(qv_suite(&qv)?);

    let mut vm = sim.clone();
    vm.dt = opts.vandermonde_dt;
    vm.steps = opts.vandermonde_steps;
    out.extend(vandermonde_suite(&vm, opts.vandermonde_replicas, opts.vandermonde_checkpoints, &[tau], opts.vandermonde_gap)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsOptions {
    /// Dimensions of the imaginary-spread sweeps.
    pub scaling_ns: Vec<usize>,
    /// Also run the fixed-τ control sweep.
    pub control: bool,
    /// Dimension and sample count of the overlap profile (τ = 0 only).
    pub profile_n: usize,
    pub profile_samples: usize,
    /// Write the pooled eigenvalue cloud as CSV.
    pub cloud_csv: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        Self {
            scaling_ns: vec![50, 100, 200],
            control: true,
            profile_n: 100,
            profile_samples: 200,
            cloud_csv: true,
        }
    }
}

/// Spectral laws for `cfg`: the elliptic law (or the semicircle at τ = 1),
/// the weak non-hermiticity sweep, and the overlap profile when τ = 0.
pub fn stats_suite(cfg: &StatsConfig, opts: &StatsOptions) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    let tau = cfg.tau.tau();
    let mut out = Vec::new();
    if tau == 1.0 {
        out.push(semicircle_check(cfg)?);
    } else if tau.abs() < 1.0 {
        out.push(elliptic_law_check(cfg)?);
    }
    if !opts.scaling_ns.is_empty() {
        out.push(weak_nonhermiticity_scaling(cfg, &opts.scaling_ns)?);
        if opts.control && tau.abs() < 1.0 {
            out.push(fixed_tau_control(cfg, &opts.scaling_ns)?);
        }
    }
    if tau == 0.0 && opts.profile_samples > 0 {
        let prof = StatsConfig {
            n: opts.profile_n,
            samples: opts.profile_samples,
            ..cfg.clone()
        };
        out.push(chalker_mehlig_profile(&prof)?);
    }
    Ok(out)
}

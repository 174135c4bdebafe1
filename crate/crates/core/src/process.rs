//! Exact sampling of the elliptic Ginibre matrix Brownian motion
//! `J = a·H1 + i·b·H2`, `a = √((1+τ)/2)`, `b = √((1−τ)/2)`, with `H1`, `H2`
//! independent Hermitian Brownian matrices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, min_gap, CMatrix, C64};
use crate::parallel;
use crate::report::VerificationReport;
use crate::rng::{self, NormalSource, Stream};
use crate::stats::Moments;

/// Hermiticity parameter τ ∈ [−1, 1].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Hermiticity(f64);

impl Hermiticity {
    pub fn new(tau: f64) -> Result<Self> {
        if tau.is_finite() && tau.abs() <= 1.0 {
            Ok(Self(tau))
        } else {
            Err(Error::Config(format!("tau must lie in [-1, 1], got {tau}")))
        }
    }

    pub fn tau(self) -> f64 {
        self.0
    }

    /// Weights `(a, b)` of the Hermitian and anti-Hermitian parts.
    pub fn weights(self) -> (f64, f64) {
        (((1.0 + self.0) / 2.0).sqrt(), ((1.0 - self.0) / 2.0).sqrt())
    }
}

impl TryFrom<f64> for Hermiticity {
    type Error = String;
    fn try_from(tau: f64) -> std::result::Result<Self, String> {
        Self::new(tau).map_err(|e| match e {
            Error::Config(m) => m,
            other => other.to_string(),
        })
    }
}

impl From<Hermiticity> for f64 {
    fn from(h: Hermiticity) -> f64 {
        h.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Initial {
    Zero,
    /// Diagonal start with the given (pairwise distinct) eigenvalues.
    Diagonal { values: Vec<C64> },
    /// Static draw with entry variance `scale`, resampled until the spectrum
    /// is simple with margin [`SIMPLE_SPECTRUM_GAP`].
    SampledSimple { scale: f64 },
}

impl Default for Initial {
    fn default() -> Self {
        Initial::SampledSimple { scale: 1.0 }
    }
}

pub const SIMPLE_SPECTRUM_GAP: f64 = 1e-6;
const MAX_INITIAL_ATTEMPTS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub n: usize,
    pub tau: Hermiticity,
    pub dt: f64,
    pub steps: usize,
    pub seed: u64,
    pub replicas: usize,
    pub initial: Initial,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 3,
            tau: Hermiticity(0.5),
            dt: 1e-3,
            steps: 100,
            seed: 0,
            replicas: 1,
            initial: Initial::default(),
        }
    }
}

impl SimConfig {
    pub fn new(n: usize, tau: f64, dt: f64, steps: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            tau: Hermiticity::new(tau)?,
            dt,
            steps,
            seed,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_initial(mut self, initial: Initial) -> Result<Self> {
        self.initial = initial;
        self.validate()?;
        Ok(self)
    }

    pub fn with_replicas(mut self, replicas: usize) -> Result<Self> {
        self.replicas = replicas;
        self.validate()?;
        Ok(self)
    }

    pub fn tau(&self) -> f64 {
        self.tau.tau()
    }

    pub fn horizon(&self) -> f64 {
        self.dt * self.steps as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n == 0 {
            return bad("n must be positive".into());
        }
        Hermiticity::new(self.tau.0)?;
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad(format!("dt must be positive and finite, got {}", self.dt));
        }
        if self.steps == 0 {
            return bad("steps must be positive".into());
        }
        if !self.horizon().is_finite() {
            return bad("dt * steps overflows".into());
        }
        if self.replicas == 0 {
            return bad("replicas must be positive".into());
        }
        match &self.initial {
            Initial::Zero => {}
            Initial::Diagonal { values } => {
                if values.len() != self.n {
                    return bad(format!(
                        "diagonal initial condition has {} entries, expected {}",
                        values.len(),
                        self.n
                    ));
                }
                if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
                    return bad("diagonal initial condition must be finite".into());
                }
                if min_gap(values) == 0.0 {
                    return bad("diagonal initial condition must have distinct entries".into());
                }
            }
            Initial::SampledSimple { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return bad(format!("sampled_simple scale must be positive, got {scale}"));
                }
            }
        }
        Ok(())
    }

    /// Random stream owned by replica `r`.
    pub fn replica_stream(&self, r: u64) -> Stream {
        Stream::new(self.seed, rng::domain("path"), r)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixState {
    pub t: f64,
    pub j: CMatrix,
}

impl MatrixState {
    pub fn new(t: f64, j: CMatrix) -> Result<Self> {
        if !t.is_finite() || t < 0.0 {
            return Err(Error::argument(format!("time must be finite and nonnegative, got {t}")));
        }
        if !j.is_finite() {
            return Err(Error::argument("matrix has non-finite entries"));
        }
        Ok(Self { t, j })
    }

    pub fn dim(&self) -> usize {
        self.j.dim()
    }
}

/// Elliptic Gaussian matrix with entry variance `variance`:
/// `E|J_kl|² = variance`, `E[J_kl J_lk] = τ·variance`.
///
/// Normals are consumed in a fixed order (row-major over the upper triangle,
/// four per off-diagonal pair, two per diagonal entry). Entries are assembled
/// in real arithmetic so τ = ±1 yields exact (anti-)Hermitian symmetry.
pub fn ege_gaussian(n: usize, tau: Hermiticity, variance: f64, src: &mut impl NormalSource) -> CMatrix {
    let (a, b) = tau.weights();
    let s = variance.sqrt();
    let s2 = s / std::f64::consts::SQRT_2;
    let mut m = CMatrix::zeros(n);
    for k in 0..n {
        for l in k..n {
            if k == l {
                let x = s * src.next_normal();
                let y = s * src.next_normal();
                m[(k, k)] = C64::new(a * x, b * y);
            } else {
                let h1 = C64::new(s2 * src.next_normal(), s2 * src.next_normal());
                let h2 = C64::new(s2 * src.next_normal(), s2 * src.next_normal());
                m[(k, l)] = C64::new(a * h1.re - b * h2.im, a * h1.im + b * h2.re);
                m[(l, k)] = C64::new(a * h1.re + b * h2.im, -(a * h1.im) + b * h2.re);
            }
        }
    }
    m
}

/// One Brownian increment ΔJ over `cfg.dt`.
pub fn sample_increment(cfg: &SimConfig, src: &mut impl NormalSource) -> CMatrix {
    ege_gaussian(cfg.n, cfg.tau, cfg.dt, src)
}

pub fn advance(state: &MatrixState, cfg: &SimConfig, src: &mut impl NormalSource) -> MatrixState {
    debug_assert_eq!(state.dim(), cfg.n);
    let dj = sample_increment(cfg, src);
    MatrixState { t: state.t + cfg.dt, j: &state.j + &dj }
}

/// One-shot draw of `J(t)` started from zero.
pub fn sample_static(cfg: &SimConfig, t: f64, src: &mut impl NormalSource) -> Result<MatrixState> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::argument(format!("static sample needs t > 0, got {t}")));
    }
    Ok(MatrixState { t, j: ege_gaussian(cfg.n, cfg.tau, t, src) })
}

pub fn initial_state(cfg: &SimConfig, src: &mut impl NormalSource) -> Result<MatrixState> {
    let j = match &cfg.initial {
        Initial::Zero => CMatrix::zeros(cfg.n),
        Initial::Diagonal { values } => CMatrix::from_diag(values),
        Initial::SampledSimple { scale } => {
            let mut found = None;
            for _ in 0..MAX_INITIAL_ATTEMPTS {
                let j = ege_gaussian(cfg.n, cfg.tau, *scale, src);
                if min_gap(&eigenvalues(&j)?) > SIMPLE_SPECTRUM_GAP {
                    found = Some(j);
                    break;
                }
            }
            found.ok_or_else(|| Error::degenerate(0.0).at_time(0.0))?
        }
    };
    Ok(MatrixState { t: 0.0, j })
}

/// Grid states `J(0), J(dt), …, J(steps·dt)` of one replica.
pub struct Path<'a, S> {
    cfg: &'a SimConfig,
    src: S,
    next: Option<MatrixState>,
    step: usize,
}

impl<'a, S: NormalSource> Path<'a, S> {
    pub fn new(cfg: &'a SimConfig, mut src: S) -> Result<Self> {
        let start = initial_state(cfg, &mut src)?;
        Ok(Self::from_state(cfg, src, start))
    }

    pub fn from_state(cfg: &'a SimConfig, src: S, start: MatrixState) -> Self {
        Self { cfg, src, next: Some(start), step: 0 }
    }
}

impl<S: NormalSource> Iterator for Path<'_, S> {
    type Item = MatrixState;

    fn next(&mut self) -> Option<MatrixState> {
        let cur = self.next.take()?;
        if self.step < self.cfg.steps {
            let mut nxt = advance(&cur, self.cfg, &mut self.src);
            // keep the grid exact instead of accumulating rounding in t
            nxt.t = (self.step + 1) as f64 * self.cfg.dt;
            self.next = Some(nxt);
        }
        self.step += 1;
        Some(cur)
    }
}

/// Path of replica `r` on its own derived stream.
pub fn replica_path(cfg: &SimConfig, r: u64) -> Result<Path<'_, Stream>> {
    Path::new(cfg, cfg.replica_stream(r))
}

fn label(i: usize, j: usize) -> String {
    format!("J{}{}", i + 1, j + 1)
}

/// Empirical one-step covariations of the increment entries,
/// `d⟨J_p, conj J_q⟩/dt` against `δ_pq` and `d⟨J_ij, J_kl⟩/dt` against
/// `τ δ_il δ_jk`, for every unordered pair of entry positions.
pub fn entry_covariance_report(cfg: &SimConfig, draws: u64) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    if draws < 1000 {
        return Err(Error::argument(format!("entry covariance needs at least 1000 draws, got {draws}")));
    }
    let n = cfg.n;
    let m = n * n;
    let pairs: Vec<(usize, usize)> = (0..m).flat_map(|p| (p..m).map(move |q| (p, q))).collect();
    // per pair: [mixed re, mixed im, holo re, holo im]
    let partial = parallel::chunked(cfg.seed, rng::domain("entry-covariance"), draws, |s, count| {
        let mut acc = vec![[Moments::new(); 4]; pairs.len()];
        for _ in 0..count {
            let dj = sample_increment(cfg, s);
            let e = dj.as_slice();
            for (slot, &(p, q)) in acc.iter_mut().zip(&pairs) {
                let mixed = e[p] * e[q].conj() / cfg.dt;
                let holo = e[p] * e[q] / cfg.dt;
                slot[0].push(mixed.re);
                slot[1].push(mixed.im);
                slot[2].push(holo.re);
                slot[3].push(holo.im);
            }
        }
        acc
    });
    let mut total = vec![[Moments::new(); 4]; pairs.len()];
    for chunk in &partial {
        for (t, c) in total.iter_mut().zip(chunk) {
            for k in 0..4 {
                t[k].merge(&c[k]);
            }
        }
    }
    let tau = cfg.tau();
    let mut out = Vec::with_capacity(2 * pairs.len());
    for (&(p, q), acc) in pairs.iter().zip(&total) {
        let (i, j, k, l) = (p / n, p % n, q / n, q % n);
        let mixed_theory = if p == q { 1.0 } else { 0.0 };
        let holo_theory = if i == l && j == k { tau } else { 0.0 };
        out.push(VerificationReport::statistical(
            format!("entry_qv[{},conj {}]", label(i, j), label(k, l)),
            C64::new(mixed_theory, 0.0),
            C64::new(acc[0].mean(), acc[1].mean()),
            acc[0].stderr(),
            acc[1].stderr(),
            draws,
        ));
        out.push(VerificationReport::statistical(
            format!("entry_qv[{},{}]", label(i, j), label(k, l)),
            C64::new(holo_theory, 0.0),
            C64::new(acc[2].mean(), acc[3].mean()),
            acc[2].stderr(),
            acc[3].stderr(),
            draws,
        ));
    }
    Ok(out)
}

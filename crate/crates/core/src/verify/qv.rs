//! Realized quadratic covariations of eigenvalue paths.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::report::VerificationReport;
use crate::spectral::Trajectory;
use crate::stats::{trapezoid, Moments};

use super::onestep::floored;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QVKind {
    /// `⟨λ_i^R, λ_j^R⟩`
    RR,
    /// `⟨λ_i^I, λ_j^I⟩`
    II,
    /// `⟨λ_i^R, λ_j^I⟩`
    RI,
    /// `⟨λ_i, λ_j⟩`
    ComplexHolomorphic,
    /// `⟨λ_i, conj λ_j⟩`
    ComplexMixed,
}

/// A bracket between eigenvalue paths `i` and `j` (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QVTarget {
    pub kind: QVKind,
    pub i: usize,
    pub j: usize,
}

impl QVTarget {
    pub fn new(kind: QVKind, i: usize, j: usize) -> Self {
        Self { kind, i, j }
    }

    pub fn name(&self) -> String {
        let (i, j) = (self.i + 1, self.j + 1);
        match self.kind {
            QVKind::RR => format!("qv[re l{i},re l{j}]"),
            QVKind::II => format!("qv[im l{i},im l{j}]"),
            QVKind::RI => format!("qv[re l{i},im l{j}]"),
            QVKind::ComplexHolomorphic => format!("qv[l{i},l{j}]"),
            QVKind::ComplexMixed => format!("qv[l{i},conj l{j}]"),
        }
    }

    /// Increment product whose sum is the realized bracket.
    fn product(&self, di: C64, dj: C64) -> C64 {
        match self.kind {
            QVKind::RR => C64::new(di.re * dj.re, 0.0),
            QVKind::II => C64::new(di.im * dj.im, 0.0),
            QVKind::RI => C64::new(di.re * dj.im, 0.0),
            QVKind::ComplexHolomorphic => di * dj,
            QVKind::ComplexMixed => di * dj.conj(),
        }
    }

    /// Instantaneous bracket density given the overlap matrix.
    pub fn density(&self, overlaps: &crate::linalg::CMatrix, tau: f64) -> C64 {
        let o = overlaps[(self.i, self.j)];
        let same = self.i == self.j;
        let v = match self.kind {
            QVKind::RR if same => (o.re + tau) / 2.0,
            QVKind::II if same => (o.re - tau) / 2.0,
            QVKind::RI if same => 0.0,
            QVKind::RR | QVKind::II => o.re / 2.0,
            QVKind::RI => -o.im / 2.0,
            QVKind::ComplexHolomorphic => return C64::new(if same { tau } else { 0.0 }, 0.0),
            QVKind::ComplexMixed => return o,
        };
        C64::new(v, 0.0)
    }
}

/// Realized bracket and integrated theory along one trajectory.
pub fn realized_and_theory(tr: &Trajectory, target: &QVTarget) -> (C64, C64) {
    let tau = tr.config.tau();
    let mut realized = C64::new(0.0, 0.0);
    for w in tr.paths.windows(2) {
        realized += target.product(w[1][target.i] - w[0][target.i], w[1][target.j] - w[0][target.j]);
    }
    let dens: Vec<C64> = tr.overlaps.iter().map(|o| target.density(o, tau)).collect();
    let re: Vec<f64> = dens.iter().map(|z| z.re).collect();
    let im: Vec<f64> = dens.iter().map(|z| z.im).collect();
    let theory = C64::new(trapezoid(&tr.times, &re), trapezoid(&tr.times, &im));
    (realized, theory)
}

/// Ensemble comparison of realized brackets with their integrated theory.
/// The standard error comes from the per-replica differences.
pub fn verify_qv(trajectories: &[Trajectory], target: QVTarget) -> Result<VerificationReport> {
    let first = trajectories.first().ok_or_else(|| Error::argument("no trajectories"))?;
    let n = first.dim();
    if target.i >= n || target.j >= n {
        return Err(Error::argument(format!("bracket index out of range 1..={n}")));
    }
    let mut real = [Moments::new(), Moments::new()];
    let mut theo = [Moments::new(), Moments::new()];
    let mut diff = [Moments::new(), Moments::new()];
    for tr in trajectories {
        let (r, t) = realized_and_theory(tr, &target);
        real[0].push(r.re);
        real[1].push(r.im);
        theo[0].push(t.re);
        theo[1].push(t.im);
        diff[0].push(r.re - t.re);
        diff[1].push(r.im - t.im);
    }
    let theory = C64::new(theo[0].mean(), theo[1].mean());
    let horizon = first.times.last().copied().unwrap_or(0.0) - first.times[0];
    let scale = horizon * theory.norm().max(1.0);
    Ok(VerificationReport::statistical(
        target.name(),
        theory,
        C64::new(real[0].mean(), real[1].mean()),
        floored(diff[0].stderr(), scale),
        floored(diff[1].stderr(), scale),
        trajectories.len() as u64,
    ))
}

/// All brackets among `n` paths: every kind for `i = j`, and for `i < j` the
/// kinds RR, II, RI (both orders), holomorphic and mixed.
pub fn all_targets(n: usize) -> Vec<QVTarget> {
    use QVKind::*;
    let mut out = Vec::new();
    for i in 0..n {
        for kind in [RR, II, RI, ComplexHolomorphic, ComplexMixed] {
            out.push(QVTarget::new(kind, i, i));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            out.push(QVTarget::new(RR, i, j));
            out.push(QVTarget::new(II, i, j));
            out.push(QVTarget::new(RI, i, j));
            out.push(QVTarget::new(RI, j, i));
            out.push(QVTarget::new(ComplexHolomorphic, i, j));
            out.push(QVTarget::new(ComplexMixed, i, j));
        }
    }
    out
}

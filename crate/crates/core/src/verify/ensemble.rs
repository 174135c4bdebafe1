//! Path-ensemble checks: Vandermonde-inverse martingale and non-collision.

use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::parallel;
use crate::process::{replica_path, Path, SimConfig};
use crate::report::{json_f64, VerificationReport};
use crate::rng::NormalSource;
use crate::spectral::{match_eigenvalues, simulate_replica, Trajectory};
use crate::stats::{kurtosis, median_of_means, Moments};

use super::onestep::{floored, simple_spectrum};

/// Simulates replicas `0..cfg.replicas` in parallel (results in replica order).
pub fn simulate_ensemble(cfg: &SimConfig) -> Result<Vec<Trajectory>> {
    cfg.validate()?;
    parallel::replicas(cfg.replicas as u64, |r| simulate_replica(cfg, r))
}

/// `Π_{i<j} 1/(λ_i − λ_j)` in the given labelling.
pub fn vandermonde_inverse(eigs: &[C64]) -> C64 {
    let mut p = C64::new(1.0, 0.0);
    for i in 0..eigs.len() {
        for j in i + 1..eigs.len() {
            p *= eigs[i] - eigs[j];
        }
    }
    p.inv()
}

/// Label-tracked eigenvalues only, without eigenvectors.
pub fn track_eigenvalues<S: NormalSource>(path: Path<'_, S>) -> Result<Vec<(f64, Vec<C64>)>> {
    let mut out: Vec<(f64, Vec<C64>)> = Vec::new();
    for state in path {
        let eigs = simple_spectrum(&state)?;
        let eigs = match out.last() {
            None => eigs,
            Some((_, prev)) => {
                let m = match_eigenvalues(prev, &eigs);
                m.perm.iter().map(|&p| eigs[p]).collect()
            }
        };
        out.push((state.t, eigs));
    }
    Ok(out)
}

pub const MOM_BLOCKS: usize = 20;
pub const HEAVY_TAIL_KURTOSIS: f64 = 100.0;

/// Grid indices of `checkpoints` evenly spaced times after the start.
pub fn checkpoint_steps(steps: usize, checkpoints: usize) -> Vec<usize> {
    let c = checkpoints.clamp(1, steps);
    let mut v: Vec<usize> = (1..=c).map(|k| (k * steps).div_ceil(c)).collect();
    v.dedup();
    v
}

/// Ensemble mean of `U(λ_t) − U(λ_0)` at each checkpoint, estimated by
/// median-of-means (the plain mean is kept in the notes). The increments of
/// a local martingale need not be integrable, so the pass criterion is a
/// heuristic certification; a kurtosis above 100 is flagged.
pub fn verify_vandermonde_martingale(cfg: &SimConfig, replicas: u64, checkpoints: usize) -> Result<Vec<VerificationReport>> {
    cfg.validate()?;
    if replicas < MOM_BLOCKS as u64 {
        return Err(Error::argument(format!("need at least {MOM_BLOCKS} replicas")));
    }
    let steps = checkpoint_steps(cfg.steps, checkpoints);
    let per_replica = parallel::replicas(replicas, |r| -> Result<(C64, Vec<C64>)> {
        let tracked = track_eigenvalues(replica_path(cfg, r)?)?;
        let u0 = vandermonde_inverse(&tracked[0].1);
        Ok((u0, steps.iter().map(|&s| vandermonde_inverse(&tracked[s].1) - u0).collect()))
    })?;
    let u0: Moments = per_replica.iter().map(|(u, _)| u.re).collect();
    let u0i: Moments = per_replica.iter().map(|(u, _)| u.im).collect();
    let base = C64::new(u0.mean(), u0i.mean());
    let mut out = Vec::new();
    for (k, &s) in steps.iter().enumerate() {
        let dre: Vec<f64> = per_replica.iter().map(|(_, d)| d[k].re).collect();
        let dim: Vec<f64> = per_replica.iter().map(|(_, d)| d[k].im).collect();
        let (mre, sre) = median_of_means(&dre, MOM_BLOCKS);
        let (mim, sim) = median_of_means(&dim, MOM_BLOCKS);
        let plain: Moments = dre.iter().copied().collect();
        let plain_i: Moments = dim.iter().copied().collect();
        let kurt = kurtosis(&dre).max(kurtosis(&dim));
        let scale = base.norm();
        let t = s as f64 * cfg.dt;
        let mut r = VerificationReport::statistical(
            format!("vandermonde_inverse_mean[t={t}]"),
            base,
            base + C64::new(mre, mim),
            floored(sre, scale),
            floored(sim, scale),
            replicas,
        )
        .note("estimator", "median_of_means")
        .note("local_martingale_heuristic", true)
        .note("plain_mean_increment", vec![json_f64(plain.mean()), json_f64(plain_i.mean())])
        .note("plain_stderr", vec![json_f64(plain.stderr()), json_f64(plain_i.stderr())])
        .note_f64("kurtosis", kurt)
        .note_f64("t", t);
        if kurt > HEAVY_TAIL_KURTOSIS {
            r = r.note("heavy_tail_warning", true);
        }
        out.push(r);
    }
    Ok(out)
}

/// Smallest eigenvalue gap seen over all replicas and grid points.
pub fn non_collision_report(trajectories: &[Trajectory]) -> Result<VerificationReport> {
    if trajectories.is_empty() {
        return Err(Error::argument("no trajectories"));
    }
    let mut per: Vec<f64> = trajectories.iter().map(|t| t.min_gap()).collect();
    per.sort_by(|a, b| a.total_cmp(b));
    let overall = per[0];
    let ok = overall > 0.0 && !overall.is_nan();
    let q = |p: f64| per[((per.len() - 1) as f64 * p).round() as usize];
    let steps: usize = trajectories.iter().map(|t| t.len()).sum();
    let ambiguous: usize = trajectories.iter().map(|t| t.ambiguous_steps).sum();
    Ok(VerificationReport::deterministic(
        "non_collision",
        C64::new(0.0, 0.0),
        C64::new(overall, 0.0),
        if ok { 0.0 } else { f64::INFINITY },
        1.0,
        steps as u64,
    )
    .note_f64("min_gap", overall)
    .note_f64("replica_min_gap_median", q(0.5))
    .note_f64("replica_min_gap_p10", q(0.1))
    .note("replicas", trajectories.len())
    .note("ambiguous_matching_steps", ambiguous))
}

//! Identity-matched eigenvalue paths along a simulated matrix path.

use std::io::Write;

use crate::error::Result;
use crate::linalg::{CMatrix, C64};
use crate::process::{replica_path, MatrixState, SimConfig};

use super::frame::decompose;
use super::matching::match_paths;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    /// `paths[s][i]`: eigenvalue of path `i` at grid point `s`.
    pub paths: Vec<Vec<C64>>,
    pub diag_overlaps: Vec<Vec<f64>>,
    /// Full overlap matrices in path labelling.
    pub overlaps: Vec<CMatrix>,
    pub min_gaps: Vec<f64>,
    /// Steps whose matching was flagged ambiguous.
    pub ambiguous_steps: usize,
    pub config: SimConfig,
}

impl Trajectory {
    /// Decomposes every state and continues labels by optimal matching. The
    /// first state's eigenvalue order fixes the labels.
    pub fn from_states(config: &SimConfig, states: impl IntoIterator<Item = MatrixState>) -> Result<Self> {
        let mut tr = Trajectory {
            times: Vec::new(),
            paths: Vec::new(),
            diag_overlaps: Vec::new(),
            overlaps: Vec::new(),
            min_gaps: Vec::new(),
            ambiguous_steps: 0,
            config: config.clone(),
        };
        let mut prev = None;
        for state in states {
            let frame = decompose(&state).map_err(|e| e.at_time(state.t))?;
            let frame = match &prev {
                None => frame,
                Some(p) => {
                    let m = match_paths(p, &frame);
                    if m.ambiguous {
                        tr.ambiguous_steps += 1;
                    }
                    frame.permuted(&m.perm)
                }
            };
            tr.times.push(frame.t);
            tr.paths.push(frame.eigenvalues.clone());
            tr.diag_overlaps.push(frame.diag_overlaps());
            tr.overlaps.push(frame.overlaps.clone());
            tr.min_gaps.push(frame.min_gap);
            prev = Some(frame);
        }
        Ok(tr)
    }

    pub fn dim(&self) -> usize {
        self.config.n
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn path(&self, i: usize) -> Vec<C64> {
        self.paths.iter().map(|row| row[i]).collect()
    }

    pub fn min_gap(&self) -> f64 {
        self.min_gaps.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Writes `t,re_l1,im_l1,o11,…,min_gap` with 17 significant digits.
    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        let n = self.dim();
        let mut header = String::from("t");
        for i in 1..=n {
            header.push_str(&format!(",re_l{i},im_l{i},o{i}{i}"));
        }
        header.push_str(",min_gap");
        writeln!(w, "{header}")?;
        for s in 0..self.len() {
            let mut line = fmt17(self.times[s]);
            for i in 0..n {
                line.push(',');
                line.push_str(&fmt17(self.paths[s][i].re));
                line.push(',');
                line.push_str(&fmt17(self.paths[s][i].im));
                line.push(',');
                line.push_str(&fmt17(self.diag_overlaps[s][i]));
            }
            line.push(',');
            line.push_str(&fmt17(self.min_gaps[s]));
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Round-trip exact decimal form of a double.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn simulate_replica(cfg: &SimConfig, replica: u64) -> Result<Trajectory> {
    cfg.validate()?;
    Trajectory::from_states(cfg, replica_path(cfg, replica)?)
}

/// Trajectory of replica 0.
pub fn simulate_trajectory(cfg: &SimConfig) -> Result<Trajectory> {
    simulate_replica(cfg, 0)
}

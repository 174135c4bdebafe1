//! Verification reports and their JSON form.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::linalg::C64;

/// Default |z| threshold for a single statistical check.
pub const Z_THRESHOLD: f64 = 3.0;
/// Widened threshold once a command emits more than [`BONFERRONI_MIN_REPORTS`] statistical reports.
pub const Z_THRESHOLD_FAMILY: f64 = 4.0;
pub const BONFERRONI_MIN_REPORTS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// Monte-Carlo estimate compared in standard-error units.
    Statistical,
    /// Exact identity or tolerance check; `z` is error / tolerance.
    Deterministic,
    /// A statistic compared with a fixed bound (p-value, distance, fraction);
    /// `z` is the ratio that must not exceed 1.
    Threshold,
}

/// Direction of a [`CheckKind::Threshold`] bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bound {
    /// statistic ≤ limit
    AtMost,
    /// statistic ≥ limit
    AtLeast,
}

mod pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub name: String,
    #[serde(with = "pair")]
    pub theory: C64,
    #[serde(with = "pair")]
    pub estimate: C64,
    pub stderr: f64,
    pub z: f64,
    pub samples: u64,
    pub pass: bool,
    pub kind: CheckKind,
    pub threshold: f64,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub notes: BTreeMap<String, Value>,
}

fn z_component(diff: f64, se: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if se > 0.0 {
        diff / se
    } else {
        f64::INFINITY.copysign(diff)
    }
}

impl VerificationReport {
    /// Complex estimate with per-component standard errors. The reported `z`
    /// is the component with the larger magnitude.
    pub fn statistical(
        name: impl Into<String>,
        theory: C64,
        estimate: C64,
        stderr_re: f64,
        stderr_im: f64,
        samples: u64,
    ) -> Self {
        let z_re = z_component(estimate.re - theory.re, stderr_re);
        let z_im = z_component(estimate.im - theory.im, stderr_im);
        let (z, stderr) = if z_im.abs() > z_re.abs() {
            (z_im, stderr_im)
        } else {
            (z_re, stderr_re)
        };
        let mut r = Self {
            name: name.into(),
            theory,
            estimate,
            stderr,
            z,
            samples,
            pass: false,
            kind: CheckKind::Statistical,
            threshold: Z_THRESHOLD,
            notes: BTreeMap::new(),
        };
        if stderr_im > 0.0 || theory.im != 0.0 || estimate.im != 0.0 {
            r.notes.insert("stderr_re".into(), json_f64(stderr_re));
            r.notes.insert("stderr_im".into(), json_f64(stderr_im));
            r.notes.insert("z_re".into(), json_f64(z_re));
            r.notes.insert("z_im".into(), json_f64(z_im));
        }
        r.refresh_pass();
        r
    }

    pub fn real(name: impl Into<String>, theory: f64, estimate: f64, stderr: f64, samples: u64) -> Self {
        Self::statistical(name, C64::new(theory, 0.0), C64::new(estimate, 0.0), stderr, 0.0, samples)
    }

    /// Deterministic check: passes when `error <= tolerance`.
    pub fn deterministic(
        name: impl Into<String>,
        theory: C64,
        estimate: C64,
        error: f64,
        tolerance: f64,
        samples: u64,
    ) -> Self {
        let z = if error.is_nan() { f64::INFINITY } else { error / tolerance };
        let mut notes = BTreeMap::new();
        notes.insert("error".into(), json_f64(error));
        notes.insert("tolerance".into(), json_f64(tolerance));
        let mut r = Self {
            name: name.into(),
            theory,
            estimate,
            stderr: 0.0,
            z,
            samples,
            pass: false,
            kind: CheckKind::Deterministic,
            threshold: 1.0,
            notes,
        };
        r.refresh_pass();
        r
    }

    /// Checks `statistic` against `limit` in the given direction.
    pub fn threshold_check(
        name: impl Into<String>,
        theory: C64,
        estimate: C64,
        statistic: f64,
        limit: f64,
        bound: Bound,
        samples: u64,
    ) -> Self {
        let z = match bound {
            Bound::AtMost => statistic / limit,
            Bound::AtLeast => limit / statistic,
        };
        let z = if z.is_nan() { f64::INFINITY } else { z };
        let mut r = Self {
            name: name.into(),
            theory,
            estimate,
            stderr: 0.0,
            z,
            samples,
            pass: false,
            kind: CheckKind::Threshold,
            threshold: 1.0,
            notes: BTreeMap::new(),
        };
        r.notes.insert("statistic".into(), json_f64(statistic));
        r.notes.insert("limit".into(), json_f64(limit));
        r.notes.insert(
            "bound".into(),
            Value::from(match bound {
                Bound::AtMost => "at_most",
                Bound::AtLeast => "at_least",
            }),
        );
        r.refresh_pass();
        r
    }

    /// Overrides the z threshold (statistical reports only).
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        if self.kind == CheckKind::Statistical {
            self.threshold = threshold;
            self.refresh_pass();
        }
        self
    }

    pub fn note(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.notes.insert(key.to_string(), value.into());
        self
    }

    pub fn note_f64(self, key: &str, value: f64) -> Self {
        let v = json_f64(value);
        self.note(key, v)
    }

    /// Forces a failure (e.g. an auxiliary condition was violated).
    pub fn fail_because(mut self, reason: &str) -> Self {
        self.pass = false;
        self.notes.insert("failure".into(), Value::from(reason));
        self
    }

    fn refresh_pass(&mut self) {
        self.pass = self.z.is_finite() && self.z.abs() <= self.threshold;
        if self.notes.contains_key("failure") {
            self.pass = false;
        }
    }

    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }

    pub fn one_line(&self) -> String {
        format!(
            "{} {:<48} theory=({:+.6e},{:+.6e}) estimate=({:+.6e},{:+.6e}) z={:+.3} n={}",
            self.status(),
            self.name,
            self.theory.re,
            self.theory.im,
            self.estimate.re,
            self.estimate.im,
            self.z,
            self.samples
        )
    }
}

pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map(Value::Number).unwrap_or(Value::Null)
}

/// Ordered collection of reports emitted by one command.
#[derive(Debug, Clone, Default)]
pub struct Suite {
    pub reports: Vec<VerificationReport>,
}

impl Suite {
    pub fn push(&mut self, r: VerificationReport) {
        self.reports.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = VerificationReport>) {
        self.reports.extend(rs);
    }

    /// Widens statistical thresholds to [`Z_THRESHOLD_FAMILY`] when the suite
    /// holds more than [`BONFERRONI_MIN_REPORTS`] statistical reports. Reports
    /// that set a custom threshold below the default are left alone.
    pub fn apply_family_threshold(&mut self) {
        let count = self
            .reports
            .iter()
            .filter(|r| r.kind == CheckKind::Statistical)
            .count();
        if count <= BONFERRONI_MIN_REPORTS {
            return;
        }
        for r in self.reports.iter_mut() {
            if r.kind == CheckKind::Statistical && r.threshold == Z_THRESHOLD {
                r.threshold = Z_THRESHOLD_FAMILY;
                r.refresh_pass();
            }
        }
    }

    pub fn all_pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> usize {
        self.reports.iter().filter(|r| !r.pass).count()
    }

    pub fn summary_line(&self, label: &str) -> String {
        format!(
            "{label}: {} {}/{} reports passed",
            if self.all_pass() { "PASS" } else { "FAIL" },
            self.reports.len() - self.failures(),
            self.reports.len()
        )
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.reports)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn statistical_pass_tracks_z() {
        let r = VerificationReport::real("x", 1.0, 1.2, 0.1, 100);
        assert!((r.z - 2.0).abs() < 1e-12);
        assert!(r.pass);
        let r = r.with_threshold(1.5);
        assert!(!r.pass);
    }

    #[test]
    fn zero_stderr_with_exact_match_passes() {
        let r = VerificationReport::real("x", 0.0, 0.0, 0.0, 10);
        assert!(r.pass);
        let r = VerificationReport::real("x", 0.0, 1e-3, 0.0, 10);
        assert!(!r.pass);
    }

    #[test]
    fn threshold_directions() {
        let c = C64::new(0.0, 0.0);
        assert!(VerificationReport::threshold_check("p", c, c, 0.2, 0.01, Bound::AtLeast, 1).pass);
        assert!(!VerificationReport::threshold_check("p", c, c, 0.001, 0.01, Bound::AtLeast, 1).pass);
        assert!(!VerificationReport::threshold_check("p", c, c, 0.0, 0.01, Bound::AtLeast, 1).pass);
        assert!(VerificationReport::threshold_check("d", c, c, 0.03, 0.05, Bound::AtMost, 1).pass);
        assert!(!VerificationReport::threshold_check("d", c, c, 0.06, 0.05, Bound::AtMost, 1).pass);
    }

    #[test]
    fn json_shape() {
        let r = VerificationReport::statistical("c", C64::new(0.5, 0.0), C64::new(0.49, 0.01), 0.01, 0.02, 1000);
        let v: Value = serde_json::to_value(&r).unwrap();
        assert_eq!(v["theory"], serde_json::json!([0.5, 0.0]));
        assert_eq!(v["estimate"][1], serde_json::json!(0.01));
        for key in ["name", "stderr", "z", "samples", "pass"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: VerificationReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn family_threshold_widens_only_large_suites() {
        let mut s = Suite::default();
        for _ in 0..51 {
            s.push(VerificationReport::real("x", 0.0, 3.5, 1.0, 10));
        }
        assert!(!s.all_pass());
        s.apply_family_threshold();
        assert!(s.all_pass());

        let mut small = Suite::default();
        small.push(VerificationReport::real("x", 0.0, 3.5, 1.0, 10));
        small.apply_family_threshold();
        assert!(!small.all_pass());
    }
}

//! Command-line front end: configuration, orchestration and output files.

use std::fs;
use std::io::BufWriter;
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::parallel::with_threads;
use crate::process::SimConfig;
use crate::report::Suite;
use crate::spectral::Trajectory;
use crate::spectral_stats::{pooled_spectrum, write_cloud_csv, StatsConfig};
use crate::suites::{
    identity_suite, stats_suite, two_by_two_suite, verify_suite, StatsOptions, TwoByTwoOptions,
    VerifyOptions,
};
use crate::verify::{non_collision_report, simulate_ensemble};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "egedyn", version, about = "Elliptic Ginibre eigenvalue dynamics: simulation and verification")]
pub struct Cli {
    /// JSON configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Seed for every random stream (overrides sim.seed and stats.seed).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses all cores.
    #[arg(long, global = true, env = "EGEDYN_THREADS")]
    pub threads: Option<usize>,
    /// Output directory.
    #[arg(long, global = true, default_value = "egedyn-out")]
    pub out: PathBuf,
    /// Override a config value by dotted path, e.g. `sim.tau=0.5`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Simulate eigenvalue trajectories and write them as CSV.
    Simulate,
    /// Full battery of SDE, bracket and derivative checks.
    Verify,
    /// Determinant and minor identities on random matrices.
    Identities,
    /// Closed-form 2x2 overlap dynamics.
    TwoByTwo,
    /// Static spectral laws.
    Stats,
}

impl Command {
    pub fn label(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Verify => "verify",
            Command::Identities => "identities",
            Command::TwoByTwo => "two-by-two",
            Command::Stats => "stats",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdentityOptions {
    pub matrices: usize,
    pub dims: Vec<usize>,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            matrices: 100,
            dims: (3..=8).collect(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SubcommandDefaults {
    pub verify: VerifyOptions,
    pub identities: IdentityOptions,
    #[serde(rename = "two-by-two")]
    pub two_by_two: TwoByTwoOptions,
    pub stats: StatsOptions,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub stats: StatsConfig,
    #[serde(rename = "subcommand-defaults")]
    pub subcommand_defaults: SubcommandDefaults,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate().map_err(as_config)?;
        self.stats.validate().map_err(as_config)
    }

    /// Canonical JSON: keys sorted, no whitespace.
    pub fn canonical_json(&self) -> Result<String> {
        let v = serde_json::to_value(self)?;
        Ok(serde_json::to_string(&v)?)
    }

    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(self.canonical_json()?.as_bytes())))
    }
}

fn as_config(e: Error) -> Error {
    match e {
        Error::Argument(m) => Error::Config(m),
        other => other,
    }
}

/// Recursively overlays `patch` on `base`. Tagged objects (with a `kind`
/// field) are replaced wholesale so variants never mix fields.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) if !p.contains_key("kind") => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

/// Sets a dotted path; the value is parsed as JSON, else taken as a string.
fn set_path(root: &mut Value, assignment: &str) -> Result<()> {
    let (key, raw) = assignment
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{assignment}` is not KEY=VALUE")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("bad override key `{key}`")));
    }
    let mut cur = root;
    for p in &parts[..parts.len() - 1] {
        let obj = cur
            .as_object_mut()
            .ok_or_else(|| Error::Config(format!("`{key}`: `{p}` is not inside an object")))?;
        cur = obj.entry(p.to_string()).or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = cur
        .as_object_mut()
        .ok_or_else(|| Error::Config(format!("`{key}` does not name an object field")))?;
    merge(obj.entry(parts[parts.len() - 1].to_string()).or_insert(Value::Null), value);
    Ok(())
}

/// Defaults, then the config file, then `--set` overrides, then `--seed`.
pub fn resolve_config(path: Option<&FsPath>, overrides: &[String], seed: Option<u64>) -> Result<RunConfig> {
    let mut v = serde_json::to_value(RunConfig::default())?;
    if let Some(p) = path {
        let text = fs::read_to_string(p)?;
        let file: Value = serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
        if !file.is_object() {
            return Err(Error::Config("config must be a JSON object".into()));
        }
        merge(&mut v, file);
    }
    for o in overrides {
        set_path(&mut v, o)?;
    }
    if let Some(s) = seed {
        v["sim"]["seed"] = s.into();
        v["stats"]["seed"] = s.into();
    }
    let cfg: RunConfig = serde_json::from_value(v).map_err(|e| Error::Config(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub config: Value,
}

struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    fn file(&mut self, name: &str) -> Result<BufWriter<fs::File>> {
        self.written.push(name.to_string());
        Ok(BufWriter::new(fs::File::create(self.dir.join(name))?))
    }

    fn text(&mut self, name: &str, body: &str) -> Result<()> {
        self.written.push(name.to_string());
        fs::write(self.dir.join(name), body)?;
        Ok(())
    }
}

fn write_trajectory(out: &mut Outputs, r: usize, tr: &Trajectory) -> Result<()> {
    use std::io::Write;
    let mut w = out.file(&format!("trajectory_{r:04}.csv"))?;
    tr.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

fn execute(command: Command, cfg: &RunConfig, out: &mut Outputs) -> Result<Suite> {
    let d = &cfg.subcommand_defaults;
    let mut suite = Suite::default();
    match command {
        Command::Simulate => {
            let trs = simulate_ensemble(&cfg.sim)?;
            for (r, tr) in trs.iter().enumerate() {
                write_trajectory(out, r, tr)?;
            }
            suite.push(non_collision_report(&trs)?);
        }
        Command::Verify => suite.extend(verify_suite(&cfg.sim, &d.verify)?),
        Command::Identities => suite.extend(identity_suite(cfg.sim.seed, d.identities.matrices, &d.identities.dims).map_err(as_config)?),
        Command::TwoByTwo => suite.extend(two_by_two_suite(&cfg.sim, &d.two_by_two)?),
        Command::Stats => {
            suite.extend(stats_suite(&cfg.stats, &d.stats).map_err(as_config)?);
            if d.stats.cloud_csv {
                use std::io::Write;
                let pts = pooled_spectrum(&cfg.stats, cfg.stats.n, cfg.stats.tau.tau(), "cloud")?;
                let mut w = out.file("cloud.csv")?;
                write_cloud_csv(&pts, &mut w)?;
                w.flush()?;
            }
        }
    }
    suite.apply_family_threshold();
    Ok(suite)
}

fn degeneracy_dump(e: &Error) -> Value {
    let Error::Degenerate { min_gap, time, matrix } = e else {
        return Value::Null;
    };
    let rows: Option<Vec<Vec<[f64; 2]>>> = matrix.as_ref().map(|m| {
        (0..m.dim())
            .map(|i| m.row(i).iter().map(|z| [z.re, z.im]).collect())
            .collect()
    });
    serde_json::json!({
        "error": e.to_string(),
        "min_gap": crate::report::json_f64(*min_gap),
        "time": time,
        "matrix": rows,
    })
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Argument(_) | Error::Json(_) => EXIT_CONFIG,
        Error::Degenerate { .. } | Error::NoConvergence { .. } => EXIT_DEGENERATE,
        Error::Io(_) => EXIT_FAILURE,
    }
}

/// Runs one subcommand; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let started = chrono::Utc::now().to_rfc3339();
    let cfg = match resolve_config(cli.config.as_deref(), &cli.overrides, cli.seed) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("egedyn: {e}");
            return EXIT_CONFIG;
        }
    };
    if let Err(e) = fs::create_dir_all(&cli.out) {
        eprintln!("egedyn: cannot create {}: {e}", cli.out.display());
        return EXIT_CONFIG;
    }
    let mut out = Outputs { dir: cli.out.clone(), written: Vec::new() };
    let label = cli.command.label();
    let result = with_threads(cli.threads.unwrap_or(0), || execute(cli.command, &cfg, &mut out));
    let code = match result {
        Ok(suite) => {
            let report_name = format!("report_{}.json", label.replace('-', "_"));
            let written = suite.to_json().map_err(Error::from).and_then(|j| out.text(&report_name, &(j + "\n")));
            if let Err(e) = written {
                eprintln!("egedyn: {e}");
                return EXIT_FAILURE;
            }
            for r in suite.reports.iter().filter(|r| !r.pass) {
                eprintln!("{}", r.one_line());
            }
            println!("{}", suite.summary_line(label));
            if suite.all_pass() {
                EXIT_PASS
            } else {
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("egedyn: {e}");
            let code = exit_code(&e);
            if code == EXIT_DEGENERATE {
                let dump = degeneracy_dump(&e);
                eprintln!("{dump}");
                let body = serde_json::to_string_pretty(&dump).unwrap_or_default();
                let _ = out.text("degeneracy.json", &(body + "\n"));
            }
            code
        }
    };
    let seed = match cli.command {
        Command::Stats => cfg.stats.seed,
        _ => cfg.sim.seed,
    };
    let manifest = cfg.hash().and_then(|hash| {
        Ok(RunManifest {
            command: label.to_string(),
            config_hash: hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started,
            finished: chrono::Utc::now().to_rfc3339(),
            outputs: out.written.clone(),
            config: serde_json::to_value(&cfg)?,
        })
    });
    match manifest.and_then(|m| Ok(serde_json::to_string_pretty(&m)?)) {
        Ok(body) => {
            if let Err(e) = fs::write(cli.out.join("manifest.json"), body + "\n") {
                eprintln!("egedyn: cannot write manifest: {e}");
                return EXIT_FAILURE.max(code);
            }
        }
        Err(e) => eprintln!("egedyn: cannot build manifest: {e}"),
    }
    code
}

pub fn main() -> i32 {
    run(&Cli::parse())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_by_dotted_path() {
        let c = resolve_config(None, &["sim.tau=0.25".into(), "sim.n=4".into()], Some(9)).unwrap();
        assert_eq!(c.sim.tau(), 0.25);
        assert_eq!(c.sim.n, 4);
        assert_eq!(c.sim.seed, 9);
        assert_eq!(c.stats.seed, 9);
    }

    #[test]
    fn tagged_initial_is_replaced_not_mixed() {
        let c = resolve_config(None, &[r#"sim.initial={"kind":"diagonal","values":[[1,0],[-1,0],[0,1]]}"#.into()], None).unwrap();
        assert!(matches!(c.sim.initial, crate::process::Initial::Diagonal { .. }));
    }

    #[test]
    fn invalid_values_are_config_errors() {
        for o in ["sim.tau=2", "sim.bogus=1", "sim.n=0", "stats.samples=0", "novalue"] {
            let e = resolve_config(None, &[o.into()], None).unwrap_err();
            assert_eq!(exit_code(&e), EXIT_CONFIG, "{o}: {e}");
        }
    }

    #[test]
    fn hash_is_canonical() {
        let a = resolve_config(None, &["sim.n=4".into(), "sim.tau=0.1".into()], None).unwrap();
        let b = resolve_config(None, &["sim.tau=0.1".into(), "sim.n=4".into()], None).unwrap();
        assert_eq!(a.hash().unwrap(), b.hash().unwrap());
        let c = resolve_config(None, &["sim.tau=0.2".into()], None).unwrap();
        assert_ne!(a.hash().unwrap(), c.hash().unwrap());
    }

    #[test]
    fn cli_parses() {
        let cli = Cli::try_parse_from(["egedyn", "verify", "--seed", "3", "--set", "sim.n=2", "--threads", "2"]).unwrap();
        assert_eq!(cli.command, Command::Verify);
        assert_eq!(cli.seed, Some(3));
        assert_eq!(cli.threads, Some(2));
    }
}

//! Experiment configuration: a TOML file plus `--set key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    CpcSweep,
    ReadoutSweep,
    BoundsReport,
    CompileOnly,
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Experiment::CpcSweep => "cpc_sweep",
            Experiment::ReadoutSweep => "readout_sweep",
            Experiment::BoundsReport => "bounds_report",
            Experiment::CompileOnly => "compile_only",
        })
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PayloadSpec {
    /// Uniformly random Clifford on `n` qubits, drawn from the root seed.
    RandomClifford { n: usize },
    /// Gate list in the circuit text format.
    Circuit { path: PathBuf },
    /// `depth` CNOTs on the pairs (0,1), (1,2), ... in turn.
    RepeatedCnot { n: usize, depth: usize },
    /// Random qubit permutation built from adjacent SWAPs.
    Permutation { n: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ConnectivitySpec {
    #[default]
    AllToAll,
    Lnn,
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    OneSided,
    #[default]
    TwoSided,
}

/// Inline uniform depolarizing rate or a noise-model file.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum NoiseSpec {
    Depolarizing(f64),
    File(PathBuf),
}

#[derive(Clone, Copy, Debug, Default, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Three-state chain with per-check CX counts.
    #[default]
    Markov,
    /// Segment-level model driven by the full noise model.
    Extended,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum PayloadErrorSource {
    /// `1 − L` from the payload bounds.
    Bound,
    /// Simulated zero-check error rate.
    Simulated,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum PayloadErrorSpec {
    Value(f64),
    Source(PayloadErrorSource),
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ReadoutSpec {
    pub m: f64,
    #[serde(default)]
    pub g_control: f64,
    #[serde(default)]
    pub g_target: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default = "default_bound_gates")]
    pub gates: Vec<usize>,
    #[serde(default = "default_bound_eps")]
    pub eps: Vec<f64>,
}

impl Default for BoundsSpec {
    fn default() -> Self {
        BoundsSpec { gates: default_bound_gates(), eps: default_bound_eps() }
    }
}

fn default_bound_gates() -> Vec<usize> {
    vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000]
}

fn default_bound_eps() -> Vec<f64> {
    vec![1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3, 1e-2]
}

fn default_shots() -> u64 {
    10_000
}

fn default_replicates() -> usize {
    1
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Option<Experiment>,
    pub payload: Option<PayloadSpec>,
    #[serde(default)]
    pub connectivity: ConnectivitySpec,
    #[serde(default)]
    pub sidedness: Sidedness,
    #[serde(default)]
    pub flags: bool,
    #[serde(default)]
    pub checks_max: usize,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub seed: u64,
    pub noise: Option<NoiseSpec>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default)]
    pub model: ModelKind,
    pub payload_error: Option<PayloadErrorSpec>,
    pub readout: Option<ReadoutSpec>,
    pub bounds: Option<BoundsSpec>,
}

/// A validated configuration with paths resolved against the config file.
#[derive(Clone, Debug)]
pub struct Loaded {
    pub cfg: Config,
    /// First 16 hex digits of the SHA-256 of the resolved configuration and
    /// the contents of every file it references.
    pub hash: String,
}

/// Reads `path`, applies overrides and validates the result for
/// `experiment`.
pub fn load(path: &Path, overrides: &[String], seed: Option<u64>, experiment: Experiment) -> Result<Loaded, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    load_str(&text, base, overrides, seed, experiment).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn load_str(text: &str, base: &Path, overrides: &[String], seed: Option<u64>, experiment: Experiment) -> Result<Loaded, CliError> {
    let mut cfg: Config = if overrides.is_empty() {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?
    } else {
        let mut table: toml::Table = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        for o in overrides {
            apply_override(&mut table, o)?;
        }
        Config::deserialize(table).map_err(|e| CliError::Config(format!("after --set overrides: {e}")))?
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let as_written = cfg.clone();
    resolve_paths(&mut cfg, base);
    validate(&cfg, experiment).map_err(|(key, msg)| CliError::Config(locate(text, overrides, &key, &msg)))?;
    let hash = config_hash(&as_written, &cfg)?;
    Ok(Loaded { cfg, hash })
}

/// Parses `key=value` with a TOML value; bare words are taken as strings.
fn apply_override(table: &mut toml::Table, o: &str) -> Result<(), CliError> {
    let (key, raw) = o.split_once('=').ok_or_else(|| CliError::Config(format!("--set {o}: expected key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = match toml::from_str::<toml::Table>(&format!("v = {raw}")) {
        Ok(mut t) => t.remove("v").expect("parsed key"),
        Err(_) => toml::Value::String(raw.to_string()),
    };
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(CliError::Config(format!("--set {o}: empty key segment")));
    }
    let mut cur = table;
    for p in &parts[..parts.len() - 1] {
        let entry = cur.entry(p.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry.as_table_mut().ok_or_else(|| CliError::Config(format!("--set {o}: '{p}' is not a table")))?;
    }
    cur.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn resolve_paths(cfg: &mut Config, base: &Path) {
    if let Some(PayloadSpec::Circuit { path }) = &mut cfg.payload {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
    if let Some(NoiseSpec::File(path)) = &mut cfg.noise {
        if path.is_relative() {
            *path = base.join(&*path);
        }
    }
}

/// Validation failure: the offending key and a message.
type Invalid = (String, String);

fn bad<T>(key: &str, msg: impl Into<String>) -> Result<T, Invalid> {
    Err((key.to_string(), msg.into()))
}

fn validate(cfg: &Config, experiment: Experiment) -> Result<(), Invalid> {
    if let Some(e) = cfg.experiment {
        if e != experiment {
            return bad("experiment", format!("config is for {e} but the subcommand runs {experiment}"));
        }
    }
    if cfg.shots == 0 {
        return bad("shots", "shots must be at least 1");
    }
    if cfg.replicates == 0 {
        return bad("replicates", "replicates must be at least 1");
    }
    if cfg.flags && cfg.sidedness != Sidedness::TwoSided {
        return bad("flags", "flags require sidedness = \"two_sided\"");
    }
    if let Some(NoiseSpec::Depolarizing(e)) = cfg.noise {
        if !(0.0..=1.0).contains(&e) {
            return bad("noise", format!("depolarizing rate must lie in [0, 1], got {e}"));
        }
    }
    if let Some(PayloadErrorSpec::Value(v)) = cfg.payload_error {
        if !(0.0..=1.0).contains(&v) {
            return bad("payload_error", format!("payload error must lie in [0, 1], got {v}"));
        }
    }
    if let Some(p) = &cfg.payload {
        let n = match p {
            PayloadSpec::RandomClifford { n } | PayloadSpec::RepeatedCnot { n, .. } | PayloadSpec::Permutation { n, .. } => Some(*n),
            PayloadSpec::Circuit { .. } => None,
        };
        if n == Some(0) {
            return bad("n", "payload needs at least one qubit");
        }
        if let PayloadSpec::RepeatedCnot { n, .. } = p {
            if *n < 2 {
                return bad("n", "repeated_cnot needs at least two qubits");
            }
        }
        if let Some(n) = n {
            let available = match cfg.sidedness {
                Sidedness::TwoSided => 4f64.powi(n as i32) - 1.0,
                Sidedness::OneSided => 2f64.powi(n as i32) - 1.0,
            };
            if cfg.checks_max as f64 > available {
                return bad("checks_max", format!("only {available} distinct checks exist on {n} qubits"));
            }
        }
    }
    match experiment {
        Experiment::CpcSweep | Experiment::CompileOnly => {
            if cfg.payload.is_none() {
                return bad("payload", "a [payload] table is required");
            }
        }
        Experiment::ReadoutSweep => {
            let Some(r) = cfg.readout else {
                return bad("readout", "a [readout] table is required");
            };
            for (key, v) in [("m", r.m), ("g_control", r.g_control), ("g_target", r.g_target)] {
                if !(0.0..=1.0).contains(&v) {
                    return bad(key, format!("{key} must lie in [0, 1], got {v}"));
                }
            }
        }
        Experiment::BoundsReport => {
            if cfg.payload.is_none() {
                return bad("payload", "a [payload] table is required for the per-check CX count");
            }
            let b = cfg.bounds.clone().unwrap_or_default();
            if b.gates.is_empty() || b.eps.is_empty() {
                return bad("bounds", "gates and eps must be non-empty");
            }
            if let Some(e) = b.eps.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                return bad("eps", format!("eps values must lie in [0, 1], got {e}"));
            }
        }
    }
    if experiment == Experiment::CpcSweep && cfg.noise.is_none() {
        return bad("noise", "a noise model is required");
    }
    Ok(())
}

/// Attaches the line of `key` in `text`, or the override that set it.
fn locate(text: &str, overrides: &[String], key: &str, msg: &str) -> String {
    let last = key.rsplit('.').next().unwrap_or(key);
    if let Some(o) = overrides.iter().rev().find(|o| o.split('=').next().is_some_and(|k| k.trim().rsplit('.').next() == Some(last))) {
        return format!("--set {o}: {msg}");
    }
    for (i, line) in text.lines().enumerate() {
        let l = line.trim_start();
        let is_key = l.strip_prefix(last).is_some_and(|rest| rest.trim_start().starts_with('='));
        let is_table = l.trim_end() == format!("[{last}]");
        if is_key || is_table {
            return format!("line {}: {msg}", i + 1);
        }
    }
    msg.to_string()
}

/// Hashes the configuration with paths as written, so the hash does not
/// depend on the working directory, plus the referenced file contents.
fn config_hash(as_written: &Config, cfg: &Config) -> Result<String, CliError> {
    let canonical = toml::to_string(as_written).map_err(|e| CliError::Config(e.to_string()))?;
    let mut h = Sha256::new();
    h.update(canonical.as_bytes());
    let files = [
        match &cfg.payload {
            Some(PayloadSpec::Circuit { path }) => Some(path),
            _ => None,
        },
        match &cfg.noise {
            Some(NoiseSpec::File(path)) => Some(path),
            _ => None,
        },
    ];
    for path in files.into_iter().flatten() {
        let bytes = std::fs::read(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        h.update(&bytes);
    }
    Ok(h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect())
}

/// Seed for one random stream, derived from the root seed and a tuple that
/// names the stream.
pub fn derive_seed(root: u64, parts: &[u64]) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    for p in parts {
        h.update(p.to_le_bytes());
    }
    let d = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&d[..8]);
    u64::from_le_bytes(b)
}

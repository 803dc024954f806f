//! Experiment runners. Each returns the full output text so that it can be
//! compared byte for byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use cpc_core::checks::{covering_sample, sample_one_sided, sample_two_sided, CheckKind, CheckSet};
use cpc_core::compile::{build_readout_repetition, compile, CheckedCircuit, Connectivity, Side};
use cpc_core::gate::parse_circuit;
use cpc_core::models::{
    asymptotic_error, check_rates, cpc_curve_with, depolarizing_upper_bound, extended_model, majority_curve, nesting_order,
    readout_asymptote, readout_curve, DataErrorRule, ExtendedOptions, PayloadError, ReadoutParams,
};
use cpc_core::noise::{NoiseModel, PauliChannel};
use cpc_core::schedule::schedule;
use cpc_core::sim::{simulate, RepetitionMode, SimOptions, SimStats};
use cpc_core::stats::{wilson, Z95};
use cpc_core::synth::synthesize;
use cpc_core::tableau::{apply_circuit, random_clifford};
use cpc_core::{CliffordTableau, Gate, GateKind};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{
    derive_seed, ConnectivitySpec, Loaded, ModelKind, NoiseSpec, PayloadErrorSource, PayloadErrorSpec, PayloadSpec, Sidedness,
};
use crate::CliError;

/// Stream tags for `derive_seed`.
const TAG_PAYLOAD: u64 = 0;
const TAG_CHECKS: u64 = 1;
const TAG_SHOTS: u64 = 2;
const TAG_READOUT: u64 = 3;

pub struct Payload {
    pub gates: Vec<Gate>,
    pub tableau: CliffordTableau,
}

pub fn build_payload(spec: &PayloadSpec, root: u64) -> Result<Payload, CliError> {
    let gates = match spec {
        PayloadSpec::RandomClifford { n } => {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(root, &[TAG_PAYLOAD]));
            synthesize(&random_clifford(*n, &mut rng)?)
        }
        PayloadSpec::Circuit { path } => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            parse_circuit(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        PayloadSpec::RepeatedCnot { n, depth } => (0..*depth).map(|i| Gate::cx(i % (n - 1), i % (n - 1) + 1)).collect(),
        PayloadSpec::Permutation { n, seed } => {
            let mut perm: Vec<usize> = (0..*n).collect();
            perm.shuffle(&mut ChaCha8Rng::seed_from_u64(*seed));
            swap_network(&perm)
        }
    };
    let n = match spec {
        PayloadSpec::RandomClifford { n } | PayloadSpec::RepeatedCnot { n, .. } | PayloadSpec::Permutation { n, .. } => *n,
        PayloadSpec::Circuit { .. } => cpc_core::gate::circuit_width(&gates),
    };
    if n == 0 {
        return Err(CliError::Config("payload circuit is empty".into()));
    }
    let tableau = apply_circuit(n, &gates).map_err(|e| CliError::Config(format!("payload: {e}")))?;
    Ok(Payload { gates, tableau })
}

/// Adjacent SWAPs (bubble sort) moving the state of qubit `i` to `perm[i]`.
fn swap_network(perm: &[usize]) -> Vec<Gate> {
    let mut at = perm.to_vec();
    let mut gates = Vec::new();
    for pass in 0..at.len() {
        for i in 0..at.len() - 1 - pass.min(at.len() - 1) {
            if at[i] > at[i + 1] {
                at.swap(i, i + 1);
                gates.push(Gate::two(GateKind::SWAP, i, i + 1));
            }
        }
    }
    gates
}

pub fn build_noise(spec: &NoiseSpec) -> Result<NoiseModel, CliError> {
    let nm = match spec {
        NoiseSpec::Depolarizing(e) => NoiseModel::uniform_depolarizing(*e)?,
        NoiseSpec::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            NoiseModel::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
    };
    Ok(nm.scaled()?)
}

/// Error rate of a two-qubit check gate, used by the three-state model.
fn check_gate_eps(spec: &NoiseSpec, nm: &NoiseModel) -> f64 {
    match spec {
        NoiseSpec::Depolarizing(e) => *e,
        NoiseSpec::File(_) => nm.gate_channel(&Gate::cx(0, 1)).map(|c| c.error_prob()).unwrap_or_else(|| {
            log::warn!("noise model has no CX channel; the three-state model uses a zero check error rate");
            0.0
        }),
    }
}

fn connectivity(c: ConnectivitySpec) -> Connectivity {
    match c {
        ConnectivitySpec::AllToAll => Connectivity::AllToAll,
        ConnectivitySpec::Lnn => Connectivity::Lnn,
    }
}

fn check_kind(s: Sidedness) -> CheckKind {
    match s {
        Sidedness::TwoSided => CheckKind::TwoSided,
        Sidedness::OneSided => CheckKind::OneSided,
    }
}

/// Expected CX count per check for random checks on `n` data qubits.
fn typical_check_cx(n: usize, conn: ConnectivitySpec, side: Sidedness) -> usize {
    let beta = match (conn, side) {
        (ConnectivitySpec::AllToAll, Sidedness::TwoSided) => 1.5,
        (ConnectivitySpec::AllToAll, Sidedness::OneSided) => 0.75,
        (ConnectivitySpec::Lnn, Sidedness::TwoSided) => 4.5,
        (ConnectivitySpec::Lnn, Sidedness::OneSided) => 2.25,
    };
    ((beta * n as f64).round() as usize).max(1)
}

/// Check set for replicate `r` at `m` checks. Covering sets are preferred;
/// when none is found the plain sample is used.
fn check_set(loaded: &Loaded, payload: &Payload, r: usize, m: usize) -> Result<CheckSet, CliError> {
    let cfg = &loaded.cfg;
    let kind = check_kind(cfg.sidedness);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, &[TAG_CHECKS, r as u64, m as u64]));
    let cs = if m == 0 {
        match kind {
            CheckKind::TwoSided => CheckSet::two_sided(payload.tableau.clone(), vec![])?,
            _ => CheckSet::one_sided(payload.tableau.clone(), vec![])?,
        }
    } else {
        match covering_sample(&payload.tableau, m, kind, &mut rng) {
            Ok(cs) => cs,
            Err(cpc_core::Error::Runtime(msg)) => {
                log::warn!("{msg}; using an uncovered sample");
                match kind {
                    CheckKind::TwoSided => sample_two_sided(&payload.tableau, m, &mut rng)?,
                    _ => sample_one_sided(&payload.tableau, m, &mut rng)?,
                }
            }
            Err(e) => return Err(e.into()),
        }
    };
    Ok(cs.with_flags(cfg.flags)?)
}

fn checked_circuit(loaded: &Loaded, payload: &Payload, nm: &NoiseModel, r: usize, m: usize) -> Result<CheckedCircuit, CliError> {
    let cs = check_set(loaded, payload, r, m)?;
    let c = compile(&cs, connectivity(loaded.cfg.connectivity), Some(&payload.gates))?;
    Ok(if nm.has_thermal() { schedule(&c, &nm.durations)? } else { c })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Pooled model prediction for one check count.
struct ModelPoint {
    postselect: f64,
    logical_error: Option<f64>,
}

/// Model prediction pooled over replicates: the mean post-selection rate
/// and the post-selection-weighted logical error.
fn model_point(circuits: &[CheckedCircuit], loaded: &Loaded, nm: &NoiseModel, eps_pl: f64) -> Result<ModelPoint, CliError> {
    let cfg = &loaded.cfg;
    let eps = check_gate_eps(cfg.noise.as_ref().expect("validated"), nm);
    let (mut ps, mut err) = (0.0, 0.0);
    for c in circuits {
        let last = match cfg.model {
            ModelKind::Markov => {
                let order = nesting_order(c)?;
                let rates = order.iter().map(|&i| check_rates(c.check_cx_count(i, None), eps)).collect::<Result<Vec<_>, _>>()?;
                *cpc_curve_with(eps_pl, &rates)?.last().expect("curve has a start point")
            }
            ModelKind::Extended => {
                let opts = ExtendedOptions { rule: DataErrorRule::Pessimistic, payload_error: PayloadError::Value(eps_pl), group: 2 };
                *extended_model(c, nm, &opts)?.curve.last().expect("curve has a start point")
            }
        };
        ps += last.postselect;
        err += last.postselect * last.logical_error.unwrap_or(0.0);
    }
    Ok(ModelPoint { postselect: ps / circuits.len() as f64, logical_error: (ps > 0.0).then(|| err / ps) })
}

/// Payload error from the bounds: `1 − L` of the zero-check circuit.
fn bound_payload_error(c: &CheckedCircuit, nm: &NoiseModel) -> Result<f64, CliError> {
    Ok(extended_model(c, nm, &ExtendedOptions::default())?.eps_pl)
}

/// Per-check-count simulation counts saved while a sweep runs.
struct Checkpoint {
    path: PathBuf,
    hash: String,
    done: Mutex<BTreeMap<usize, SimStats>>,
}

impl Checkpoint {
    fn open(out: Option<&Path>, hash: &str) -> Result<Option<Checkpoint>, CliError> {
        let Some(out) = out else { return Ok(None) };
        let mut name = out.as_os_str().to_owned();
        name.push(".checkpoint");
        let path = PathBuf::from(name);
        let mut done = BTreeMap::new();
        if let Ok(text) = std::fs::read_to_string(&path) {
            let mut lines = text.lines();
            if lines.next() == Some(&format!("# config_hash {hash}")) {
                for line in lines {
                    let f: Vec<u64> = line.split(',').filter_map(|t| t.parse().ok()).collect();
                    if let [c, shots, accepted, errors] = f[..] {
                        done.insert(c as usize, SimStats { shots, accepted, errors });
                    }
                }
                log::info!("resuming from {} with {} check counts done", path.display(), done.len());
            } else {
                log::warn!("ignoring checkpoint {} written for a different configuration", path.display());
            }
        }
        let cp = Checkpoint { path, hash: hash.to_string(), done: Mutex::new(done) };
        cp.flush()?;
        Ok(Some(cp))
    }

    fn get(&self, c: usize) -> Option<SimStats> {
        self.done.lock().expect("checkpoint lock").get(&c).copied()
    }

    fn record(&self, c: usize, s: SimStats) -> Result<(), CliError> {
        self.done.lock().expect("checkpoint lock").insert(c, s);
        self.flush()
    }

    fn flush(&self) -> Result<(), CliError> {
        let done = self.done.lock().expect("checkpoint lock");
        let mut text = format!("# config_hash {}\n", self.hash);
        for (c, s) in done.iter() {
            let _ = writeln!(text, "{c},{},{},{}", s.shots, s.accepted, s.errors);
        }
        let tmp = self.path.with_extension("checkpoint.tmp");
        std::fs::write(&tmp, text).and_then(|_| std::fs::rename(&tmp, &self.path)).map_err(|e| CliError::Runtime(format!("{}: {e}", self.path.display())))
    }

    fn finish(self) {
        let _ = std::fs::remove_file(&self.path);
    }
}

/// Check-count sweep. With `simulate` false only model columns are emitted.
pub fn cpc_sweep(loaded: &Loaded, simulate_shots: bool, out: Option<&Path>) -> Result<String, CliError> {
    let cfg = &loaded.cfg;
    let payload = build_payload(cfg.payload.as_ref().expect("validated"), cfg.seed)?;
    let noise_spec = cfg.noise.as_ref().expect("validated");
    let nm = build_noise(noise_spec)?;
    let counts: Vec<usize> = (0..=cfg.checks_max).collect();
    let circuits: Vec<Vec<CheckedCircuit>> = counts
        .par_iter()
        .map(|&m| (0..cfg.replicates).map(|r| checked_circuit(loaded, &payload, &nm, r, m)).collect())
        .collect::<Result<_, _>>()?;

    let stats: Option<Vec<SimStats>> = if simulate_shots {
        let cp = Checkpoint::open(out, &loaded.hash)?;
        let stats = counts
            .par_iter()
            .map(|&m| {
                if let Some(s) = cp.as_ref().and_then(|cp| cp.get(m)) {
                    return Ok(s);
                }
                let mut total = SimStats::default();
                for (r, c) in circuits[m].iter().enumerate() {
                    let opts = SimOptions::new(cfg.shots, derive_seed(cfg.seed, &[TAG_SHOTS, r as u64, m as u64]));
                    total = total.merge(simulate(c, &nm, &opts).map_err(|e| CliError::Runtime(e.to_string()))?.stats);
                }
                if let Some(cp) = &cp {
                    cp.record(m, total)?;
                }
                Ok(total)
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        if let Some(cp) = cp {
            cp.finish();
        }
        Some(stats)
    } else {
        None
    };

    let eps_pl = match (cfg.payload_error, &stats) {
        (Some(PayloadErrorSpec::Value(v)), _) => v,
        (Some(PayloadErrorSpec::Source(PayloadErrorSource::Simulated)), Some(s)) | (None, Some(s)) => match s[0].logical_error_rate() {
            Some(v) => v,
            None => return Err(CliError::Runtime("zero-check circuit accepted no shots".into())),
        },
        (Some(PayloadErrorSpec::Source(PayloadErrorSource::Simulated)), None) => {
            return Err(CliError::Config("payload_error = \"simulated\" needs the simulate subcommand".into()))
        }
        (Some(PayloadErrorSpec::Source(PayloadErrorSource::Bound)), _) | (None, None) => bound_payload_error(&circuits[0][0], &nm)?,
    };

    let models: Vec<ModelPoint> = circuits.par_iter().map(|cs| model_point(cs, loaded, &nm, eps_pl)).collect::<Result<_, _>>()?;
    let check_ks: Vec<usize> = circuits.iter().flatten().flat_map(|c| (0..c.n_checks()).map(move |i| c.check_cx_count(i, None))).collect();
    let k_mean = if check_ks.is_empty() {
        typical_check_cx(payload.tableau.n(), cfg.connectivity, cfg.sidedness)
    } else {
        (check_ks.iter().sum::<usize>() as f64 / check_ks.len() as f64).round() as usize
    };
    let asymptote = asymptotic_error(check_rates(k_mean, check_gate_eps(noise_spec, &nm))?, eps_pl);

    let mut text = String::new();
    match &stats {
        Some(stats) => {
            text.push_str("checks,shots,accepted,errors,postselect_rate,logical_error_rate,ci_low,ci_high,model_postselect,model_logical_error,asymptote,config_hash\n");
            for ((m, s), model) in counts.iter().zip(stats).zip(&models) {
                let ci = wilson(s.errors, s.accepted, Z95);
                let _ = writeln!(
                    text,
                    "{m},{},{},{},{},{},{},{},{},{},{asymptote},{}",
                    s.shots,
                    s.accepted,
                    s.errors,
                    s.postselect_rate(),
                    fmt_opt(s.logical_error_rate()),
                    fmt_opt(ci.map(|c| c.0)),
                    fmt_opt(ci.map(|c| c.1)),
                    model.postselect,
                    fmt_opt(model.logical_error),
                    loaded.hash
                );
            }
        }
        None => {
            text.push_str("checks,model_postselect,model_logical_error,asymptote,config_hash\n");
            for (m, model) in counts.iter().zip(&models) {
                let _ = writeln!(text, "{m},{},{},{asymptote},{}", model.postselect, fmt_opt(model.logical_error), loaded.hash);
            }
        }
    }
    Ok(text)
}

/// Repetition-readout sweep for both decoders.
pub fn readout_sweep(loaded: &Loaded) -> Result<String, CliError> {
    let cfg = &loaded.cfg;
    let r = cfg.readout.expect("validated");
    let rp = ReadoutParams::new(r.m, r.g_control, r.g_target)?;
    let mut nm = NoiseModel::noiseless();
    nm.set_gate_default(GateKind::CX, PauliChannel::tensor(&PauliChannel::bit_flip(r.g_control)?, &PauliChannel::bit_flip(r.g_target)?)?)?;
    nm.set_readout_default(r.m)?;
    let kmax = cfg.checks_max;
    let una = readout_curve(rp, kmax);
    let maj = majority_curve(rp, kmax);
    let asymptote = readout_asymptote(rp);
    let modes = [(RepetitionMode::Unanimous, "unanimous"), (RepetitionMode::Majority, "majority")];
    let points: Vec<(usize, usize)> = (0..=kmax).flat_map(|k| (0..modes.len()).map(move |mi| (k, mi))).collect();
    let stats: Vec<SimStats> = points
        .par_iter()
        .map(|&(k, mi)| {
            let mut opts = SimOptions::new(cfg.shots, derive_seed(cfg.seed, &[TAG_READOUT, k as u64, mi as u64]));
            opts.repetition = modes[mi].0;
            simulate(&build_readout_repetition(k), &nm, &opts).map(|r| r.stats).map_err(|e| CliError::Runtime(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let mut text = String::from(
        "checks,mode,shots,accepted,errors,error_rate,postselect_rate,ci_low,ci_high,model_error_rate,model_postselect_rate,asymptote,config_hash\n",
    );
    for (&(k, mi), s) in points.iter().zip(&stats) {
        let model = if mi == 0 { una[k] } else { maj[k] };
        let ci = wilson(s.errors, s.accepted, Z95);
        let asym = if mi == 0 { asymptote.to_string() } else { String::new() };
        let _ = writeln!(
            text,
            "{k},{},{},{},{},{},{},{},{},{},{},{asym},{}",
            modes[mi].1,
            s.shots,
            s.accepted,
            s.errors,
            fmt_opt(s.logical_error_rate()),
            s.postselect_rate(),
            fmt_opt(ci.map(|c| c.0)),
            fmt_opt(ci.map(|c| c.1)),
            fmt_opt(model.error_rate),
            model.postselect,
            loaded.hash
        );
    }
    Ok(text)
}

/// Grid of payload success bounds for depolarizing payloads against the
/// asymptotic floor of typical checks.
pub fn bounds_report(loaded: &Loaded) -> Result<String, CliError> {
    let cfg = &loaded.cfg;
    let n = build_payload(cfg.payload.as_ref().expect("validated"), cfg.seed)?.tableau.n();
    let grid = cfg.bounds.clone().unwrap_or_default();
    let k = typical_check_cx(n, cfg.connectivity, cfg.sidedness);
    let mut text = String::from("cx,eps,L,U,error_low,error_high,check_cx,floor,t_ok_above_half,region,config_hash\n");
    for &eps in &grid.eps {
        let rates = check_rates(k, eps)?;
        for &g in &grid.gates {
            let l = (1.0 - eps).powi(g as i32);
            let u = depolarizing_upper_bound(eps, g);
            let (low, high) = (1.0 - u, 1.0 - l);
            let floor = asymptotic_error(rates, high.min(1.0 - f64::EPSILON));
            // Checks help for sure when even the best payload is worse than
            // the floor, and hurt for sure when the worst payload is better.
            let region = if low > floor {
                "improve"
            } else if high < floor {
                "deteriorate"
            } else {
                "uncertain"
            };
            let _ = writeln!(text, "{g},{eps},{l},{u},{low},{high},{k},{floor},{},{region},{}", rates.t_ok > 0.5, loaded.hash);
        }
    }
    Ok(text)
}

/// Checked circuit for replicate 0 at `checks_max` checks, preceded by
/// comment lines with CNOT counts.
pub fn compile_only(loaded: &Loaded) -> Result<String, CliError> {
    let cfg = &loaded.cfg;
    let payload = build_payload(cfg.payload.as_ref().expect("validated"), cfg.seed)?;
    let cs = check_set(loaded, &payload, 0, cfg.checks_max)?;
    let c = compile(&cs, connectivity(cfg.connectivity), Some(&payload.gates))?;
    let mut text = format!("# config_hash {}\n", loaded.hash);
    let _ = writeln!(text, "# qubits {} (data {}, checks {}, flags {})", c.n_qubits(), c.n_data, c.n_check, c.n_flag);
    let _ = writeln!(text, "# cx total {}", c.cx_count());
    let _ = writeln!(text, "# cx payload {}", cpc_core::gate::count_kind(&c.payload, GateKind::CX));
    for (i, check) in cs.checks.iter().enumerate() {
        let _ = writeln!(
            text,
            "# check {i} left {} right {} cx_left {} cx_right {}",
            check.left,
            check.right,
            c.check_cx_count(i, Some(Side::Left)),
            c.check_cx_count(i, Some(Side::Right))
        );
    }
    text.push_str(&c.to_text());
    Ok(text)
}

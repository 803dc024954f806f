//! Pauli-frame Monte Carlo simulation of checked circuits.
//!
//! Each shot carries a Pauli frame: the difference between the noisy and the
//! ideal run. Gates conjugate the frame, noise channels multiply sampled
//! Paulis into it, and a measurement records the frame's X-component as the
//! flip of the measured bit. Shots are processed in bit-sliced blocks whose
//! randomness derives from `(seed, block index)` only, so results do not
//! depend on the number of threads.

mod frame;
mod program;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::checks::CheckKind;
use crate::compile::{CheckedCircuit, Role};
use crate::error::{invalid, Result};
use crate::noise::NoiseModel;
use crate::pauli::PauliString;
use crate::stats::Rate;
use frame::{Block, Frames, LANES, WORDS};
use program::Program;

/// How a repetition-code readout is decoded.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RepetitionMode {
    #[default]
    Unanimous,
    Majority,
}

/// Outcome of decoding one repetition-code readout.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RepetitionOutcome {
    Accept(bool),
    Reject,
}

/// Decodes repeated measurement bits. Unanimous accepts only identical bits;
/// majority accepts the majority value and rejects ties.
pub fn decode_repetition(bits: &[bool], mode: RepetitionMode) -> Result<RepetitionOutcome> {
    if bits.is_empty() {
        return invalid("decode_repetition needs at least one bit");
    }
    let ones = bits.iter().filter(|&&b| b).count();
    let zeros = bits.len() - ones;
    Ok(match mode {
        RepetitionMode::Unanimous if ones == 0 => RepetitionOutcome::Accept(false),
        RepetitionMode::Unanimous if zeros == 0 => RepetitionOutcome::Accept(true),
        RepetitionMode::Unanimous => RepetitionOutcome::Reject,
        RepetitionMode::Majority if ones == zeros => RepetitionOutcome::Reject,
        RepetitionMode::Majority => RepetitionOutcome::Accept(ones > zeros),
    })
}

/// What counts as a logical error on an accepted shot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum LogicalCriterion {
    /// Two-sided: any non-identity residual on the data. One-sided: any
    /// flipped data measurement.
    #[default]
    Frame,
    /// Data qubits `a` and `b` of each pair must show equal X flips, as for
    /// EPR pairs measured in the computational basis.
    PairMismatch(Vec<(usize, usize)>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimOptions {
    pub shots: u64,
    pub seed: u64,
    pub criterion: LogicalCriterion,
    pub repetition: RepetitionMode,
    pub keep_records: bool,
}

impl SimOptions {
    pub fn new(shots: u64, seed: u64) -> SimOptions {
        SimOptions { shots, seed, criterion: LogicalCriterion::Frame, repetition: RepetitionMode::Unanimous, keep_records: false }
    }
}

/// One simulated shot.
#[derive(Clone, Debug, PartialEq)]
pub struct ShotRecord {
    /// One bit per check (for one-sided checks the measured bit XOR the
    /// classically evaluated right-check parity), then one per flag. For
    /// repetition readout, the raw measured bits.
    pub syndrome_bits: Vec<bool>,
    /// Residual Pauli on the data qubits at the end of the circuit, in data
    /// index order, with readout flips included in the X-component.
    pub data_error: PauliString,
    pub accepted: bool,
    pub logical_error: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SimStats {
    pub shots: u64,
    pub accepted: u64,
    pub errors: u64,
}

impl SimStats {
    pub fn merge(self, o: SimStats) -> SimStats {
        SimStats { shots: self.shots + o.shots, accepted: self.accepted + o.accepted, errors: self.errors + o.errors }
    }

    pub fn postselect_rate(&self) -> f64 {
        if self.shots == 0 {
            0.0
        } else {
            self.accepted as f64 / self.shots as f64
        }
    }

    /// Errors among accepted shots; `None` when nothing was accepted.
    pub fn logical_error_rate(&self) -> Option<f64> {
        (self.accepted > 0).then(|| self.errors as f64 / self.accepted as f64)
    }

    pub fn rates(&self) -> Result<Rates> {
        if self.shots == 0 {
            return invalid("no shots");
        }
        Ok(Rates {
            postselect: Rate::new(self.accepted, self.shots).expect("shots > 0"),
            logical_error: Rate::new(self.errors, self.accepted),
        })
    }
}

/// Post-selection and logical error rates with Wilson 95% intervals.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rates {
    pub postselect: Rate,
    /// `None` when no shot was accepted.
    pub logical_error: Option<Rate>,
}

pub fn estimate_rates(records: &[ShotRecord]) -> Result<Rates> {
    if records.is_empty() {
        return invalid("estimate_rates needs at least one record");
    }
    let accepted = records.iter().filter(|r| r.accepted).count() as u64;
    let errors = records.iter().filter(|r| r.accepted && r.logical_error).count() as u64;
    SimStats { shots: records.len() as u64, accepted, errors }.rates()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimResult {
    pub stats: SimStats,
    pub records: Option<Vec<ShotRecord>>,
}

struct Layout {
    kind: CheckKind,
    check_bits: Vec<usize>,
    flag_bits: Vec<usize>,
    data_bits: Vec<Option<usize>>,
    data_final: Vec<usize>,
    right_support: Vec<Vec<usize>>,
    rep_bits: Vec<usize>,
}

impl Layout {
    fn new(c: &CheckedCircuit) -> Result<Layout> {
        let mut check_bits = vec![None; c.n_check];
        let mut flag_bits = vec![None; c.n_flag];
        let mut data_bits = vec![None; c.n_data];
        for (b, m) in c.measurements.iter().enumerate() {
            match m.role {
                Role::Check(i) => check_bits[i] = Some(b),
                Role::Flag(i) => flag_bits[i] = Some(b),
                Role::Data(j) => data_bits[j] = Some(b),
            }
        }
        let unmeasured = || invalid("every check and flag qubit must be measured");
        let check_bits = check_bits.into_iter().collect::<Option<Vec<_>>>().map_or_else(unmeasured, Ok)?;
        let flag_bits = flag_bits.into_iter().collect::<Option<Vec<_>>>().map_or_else(unmeasured, Ok)?;
        let right_support = if c.kind == CheckKind::OneSided {
            if data_bits.iter().any(Option::is_none) {
                return invalid("one-sided checks need every data qubit measured");
            }
            c.checks.iter().map(|ch| ch.right.support()).collect()
        } else {
            Vec::new()
        };
        Ok(Layout {
            kind: c.kind,
            check_bits,
            flag_bits,
            data_final: (0..c.n_data).map(|j| c.data_out(j)).collect(),
            data_bits,
            right_support,
            rep_bits: (0..c.measurements.len()).collect(),
        })
    }

    fn syndrome_words(&self, f: &Frames) -> Vec<Block> {
        if self.kind == CheckKind::ReadoutRepetition {
            return self.rep_bits.iter().map(|&b| f.bits[b]).collect();
        }
        let mut out = Vec::with_capacity(self.check_bits.len() + self.flag_bits.len());
        for (i, &b) in self.check_bits.iter().enumerate() {
            let mut s = f.bits[b];
            if let Some(sup) = self.right_support.get(i) {
                for &j in sup {
                    let d = f.bits[self.data_bits[j].expect("measured")];
                    for w in 0..WORDS {
                        s[w] ^= d[w];
                    }
                }
            }
            out.push(s);
        }
        out.extend(self.flag_bits.iter().map(|&b| f.bits[b]));
        out
    }

    /// X flips of data qubit `j`: its measured bit if it was measured,
    /// otherwise the final frame.
    fn data_x(&self, f: &Frames, j: usize) -> Block {
        match self.data_bits[j] {
            Some(b) => f.bits[b],
            None => f.x[self.data_final[j]],
        }
    }

    /// Accept and logical-error masks for the first `lanes` lanes.
    fn decode(&self, f: &Frames, lanes: usize, crit: &LogicalCriterion, mode: RepetitionMode) -> (Block, Block) {
        let mut valid = [0u64; WORDS];
        for (w, v) in valid.iter_mut().enumerate() {
            let lo = 64 * w;
            *v = if lanes >= lo + 64 {
                u64::MAX
            } else if lanes > lo {
                (1u64 << (lanes - lo)) - 1
            } else {
                0
            };
        }
        let syn = self.syndrome_words(f);
        let mut accept = valid;
        let mut error = [0u64; WORDS];
        if self.kind == CheckKind::ReadoutRepetition {
            let mut all1 = valid;
            let mut all0 = valid;
            for s in &syn {
                for w in 0..WORDS {
                    all1[w] &= s[w];
                    all0[w] &= !s[w];
                }
            }
            match mode {
                RepetitionMode::Unanimous => {
                    for w in 0..WORDS {
                        accept[w] = all0[w] | all1[w];
                        error[w] = all1[w];
                    }
                }
                RepetitionMode::Majority => {
                    accept = [0; WORDS];
                    let k = syn.len();
                    for lane in 0..lanes {
                        let ones = syn.iter().filter(|s| Frames::lane(s, lane)).count();
                        if 2 * ones != k {
                            accept[lane / 64] |= 1 << (lane % 64);
                            if 2 * ones > k {
                                error[lane / 64] |= 1 << (lane % 64);
                            }
                        }
                    }
                }
            }
            return (accept, error);
        }
        for s in &syn {
            for w in 0..WORDS {
                accept[w] &= !s[w];
            }
        }
        match crit {
            LogicalCriterion::Frame => {
                for (j, &q) in self.data_final.iter().enumerate() {
                    let x = self.data_x(f, j);
                    for w in 0..WORDS {
                        error[w] |= if self.kind == CheckKind::OneSided { x[w] } else { x[w] | f.z[q][w] };
                    }
                }
            }
            LogicalCriterion::PairMismatch(pairs) => {
                for &(a, b) in pairs {
                    let (xa, xb) = (self.data_x(f, a), self.data_x(f, b));
                    for w in 0..WORDS {
                        error[w] |= xa[w] ^ xb[w];
                    }
                }
            }
        }
        for w in 0..WORDS {
            error[w] &= accept[w];
        }
        (accept, error)
    }

    fn record(&self, f: &Frames, lane: usize, accept: &Block, error: &Block) -> ShotRecord {
        let syndrome_bits = self.syndrome_words(f).iter().map(|s| Frames::lane(s, lane)).collect();
        let mut data_error = PauliString::identity(self.data_final.len());
        for (j, &q) in self.data_final.iter().enumerate() {
            data_error.set_bits(j, Frames::lane(&self.data_x(f, j), lane), Frames::lane(&f.z[q], lane));
        }
        ShotRecord { syndrome_bits, data_error, accepted: Frames::lane(accept, lane), logical_error: Frames::lane(error, lane) }
    }
}

/// A circuit and noise model prepared for repeated simulation.
pub struct Simulator {
    program: Program,
    layout: Layout,
}

impl Simulator {
    pub fn new(c: &CheckedCircuit, noise: &NoiseModel) -> Result<Simulator> {
        Ok(Simulator { program: Program::build(c, noise)?, layout: Layout::new(c)? })
    }

    pub fn run(&self, opts: &SimOptions) -> Result<SimResult> {
        if let LogicalCriterion::PairMismatch(pairs) = &opts.criterion {
            let n = self.layout.data_final.len();
            if pairs.iter().any(|&(a, b)| a >= n || b >= n) {
                return invalid(format!("pair index out of range for {n} data qubits"));
            }
        }
        let n_blocks = opts.shots.div_ceil(LANES as u64);
        let blocks: Vec<(SimStats, Vec<ShotRecord>)> =
            (0..n_blocks).into_par_iter().map(|b| self.run_block(b, opts)).collect();
        let mut stats = SimStats::default();
        let mut records = opts.keep_records.then(Vec::new);
        for (s, r) in blocks {
            stats = stats.merge(s);
            if let Some(all) = records.as_mut() {
                all.extend(r);
            }
        }
        Ok(SimResult { stats, records })
    }

    fn run_block(&self, block: u64, opts: &SimOptions) -> (SimStats, Vec<ShotRecord>) {
        let lanes = (opts.shots - block * LANES as u64).min(LANES as u64) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        rng.set_stream(block);
        let mut f = Frames::new(self.program.n_qubits, self.program.n_bits);
        f.run(&self.program, &self.program.ops, Some(&mut rng), lanes);
        let (accept, error) = self.layout.decode(&f, lanes, &opts.criterion, opts.repetition);
        let count = |b: &Block| b.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        let stats = SimStats { shots: lanes as u64, accepted: count(&accept), errors: count(&error) };
        let records = if opts.keep_records {
            (0..lanes).map(|l| self.layout.record(&f, l, &accept, &error)).collect()
        } else {
            Vec::new()
        };
        (stats, records)
    }

    /// Noiseless run with Pauli faults injected on physical qubits: each
    /// `(g, P)` multiplies `P` into the frame just before gate `g`
    /// (`g == gates.len()` means at the end). A readout flip is an X fault
    /// right before the measurement.
    pub fn propagate_faults(&self, faults: &[(usize, PauliString)], opts: &SimOptions) -> Result<ShotRecord> {
        let n_gates = self.program.op_start.len() - 1;
        for (g, p) in faults {
            if *g > n_gates || p.n() != self.program.n_qubits {
                return invalid(format!("fault at gate {g} on {} qubits does not fit the circuit", p.n()));
            }
        }
        let mut f = Frames::new(self.program.n_qubits, self.program.n_bits);
        for g in 0..=n_gates {
            for (_, p) in faults.iter().filter(|(at, _)| *at == g) {
                f.inject(0, p);
            }
            if g < n_gates {
                let ops = &self.program.ops[self.program.op_start[g]..self.program.op_start[g + 1]];
                f.run::<ChaCha8Rng>(&self.program, ops, None, 1);
            }
        }
        let (accept, error) = self.layout.decode(&f, 1, &opts.criterion, opts.repetition);
        Ok(self.layout.record(&f, 0, &accept, &error))
    }
}

/// Simulates `opts.shots` shots of `c` under `noise`.
pub fn simulate(c: &CheckedCircuit, noise: &NoiseModel, opts: &SimOptions) -> Result<SimResult> {
    Simulator::new(c, noise)?.run(opts)
}

/// Noiseless run of `c` with injected faults; see
/// [`Simulator::propagate_faults`].
pub fn propagate_faults(c: &CheckedCircuit, faults: &[(usize, PauliString)]) -> Result<ShotRecord> {
    Simulator::new(c, &NoiseModel::noiseless())?.propagate_faults(faults, &SimOptions::new(1, 0))
}

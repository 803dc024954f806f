//! Lowering of a checked circuit plus noise model to frame operations.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Geometric;

use crate::compile::CheckedCircuit;
use crate::error::{invalid, Result};
use crate::gate::GateKind;
use crate::noise::channel::{label_bits, PauliChannel};
use crate::noise::NoiseModel;

/// Samples the lanes hit by a non-identity label of a channel and the label
/// for each hit.
#[derive(Clone, Debug)]
pub(crate) struct ErrorSampler {
    arity: usize,
    always: bool,
    gap: Geometric,
    labels: Vec<(u8, u8)>,
    pick: WeightedIndex<f64>,
}

impl ErrorSampler {
    pub(crate) fn new(ch: &PauliChannel) -> Option<ErrorSampler> {
        let p = ch.error_prob();
        if p <= 0.0 {
            return None;
        }
        let arity = ch.arity();
        let mut labels = Vec::new();
        let mut weights = Vec::new();
        for (l, &w) in ch.probs().iter().enumerate().skip(1) {
            if w > 0.0 {
                labels.push(label_bits(l, arity));
                weights.push(w);
            }
        }
        let pick = WeightedIndex::new(&weights).ok()?;
        let always = p >= 1.0;
        let gap = Geometric::new(p.min(1.0)).ok()?;
        Some(ErrorSampler { arity, always, gap, labels, pick })
    }

    pub(crate) fn arity(&self) -> usize {
        self.arity
    }

    /// Calls `hit(lane, x_bits, z_bits)` for every lane below `lanes` that
    /// suffers an error.
    pub(crate) fn sample<R: Rng + ?Sized>(&self, rng: &mut R, lanes: usize, mut hit: impl FnMut(usize, u8, u8)) {
        let mut pos: u64 = if self.always { 0 } else { self.gap.sample(rng) };
        while pos < lanes as u64 {
            let (x, z) = self.labels[self.pick.sample(rng)];
            hit(pos as usize, x, z);
            pos += 1;
            if !self.always {
                pos = pos.saturating_add(self.gap.sample(rng));
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Op {
    H(usize),
    S(usize),
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
    /// Channel `sampler` on qubits `q` (second entry unused for arity 1).
    Noise { q: [usize; 2], sampler: usize },
    /// Readout flip (optional) then record the X-component as bit `bit`.
    Measure { q: usize, flip: Option<usize>, bit: usize },
}

#[derive(Clone, Debug)]
pub(crate) struct Program {
    pub n_qubits: usize,
    pub n_bits: usize,
    pub ops: Vec<Op>,
    /// `ops[op_start[g]..op_start[g + 1]]` implements gate `g`.
    pub op_start: Vec<usize>,
    pub samplers: Vec<ErrorSampler>,
}

impl Program {
    pub(crate) fn build(c: &CheckedCircuit, noise: &NoiseModel) -> Result<Program> {
        let nm = noise.scaled()?;
        if nm.has_thermal() && !c.scheduled {
            return invalid("thermal noise needs a scheduled circuit");
        }
        let mut ops = Vec::new();
        let mut op_start = Vec::with_capacity(c.gates.len() + 1);
        let mut samplers = Vec::new();
        let mut warned = BTreeSet::new();
        let mut bit_of_gate = vec![None; c.gates.len()];
        for (b, m) in c.measurements.iter().enumerate() {
            bit_of_gate[m.gate] = Some(b);
        }
        let add = |ch: &PauliChannel, samplers: &mut Vec<ErrorSampler>| {
            ErrorSampler::new(ch).map(|s| {
                samplers.push(s);
                samplers.len() - 1
            })
        };
        for (g, gate) in c.gates.iter().enumerate() {
            op_start.push(ops.len());
            let q0 = gate.q0();
            match gate.kind {
                GateKind::H => ops.push(Op::H(q0)),
                GateKind::S | GateKind::Sdg => ops.push(Op::S(q0)),
                GateKind::X | GateKind::Y | GateKind::Z | GateKind::BARRIER => {}
                GateKind::CX => ops.push(Op::Cx(q0, gate.q1())),
                GateKind::CZ => ops.push(Op::Cz(q0, gate.q1())),
                GateKind::SWAP => ops.push(Op::Swap(q0, gate.q1())),
                GateKind::DELAY => {
                    if let Some(ch) = nm.delay_channel(q0, gate.duration)? {
                        if let Some(s) = add(&ch, &mut samplers) {
                            ops.push(Op::Noise { q: [q0, q0], sampler: s });
                        }
                    }
                }
                GateKind::MEASURE => {
                    let m = nm.readout_flip(q0);
                    let flip = add(&PauliChannel::bit_flip(m)?, &mut samplers);
                    let bit = bit_of_gate[g].expect("measurement registered");
                    ops.push(Op::Measure { q: q0, flip, bit });
                }
            }
            if gate.kind.is_unitary() && gate.kind != GateKind::BARRIER {
                match nm.gate_channel(gate) {
                    Some(ch) => {
                        if let Some(s) = add(&ch, &mut samplers) {
                            let q = if gate.is_two_qubit() { [q0, gate.q1()] } else { [q0, q0] };
                            ops.push(Op::Noise { q, sampler: s });
                        }
                    }
                    None if gate.is_two_qubit() && nm.has_gate_channels() && warned.insert(gate.kind) => {
                        log::warn!("no noise channel for {}; treating it as noiseless", gate.kind);
                    }
                    None => {}
                }
            }
        }
        op_start.push(ops.len());
        Ok(Program { n_qubits: c.n_qubits(), n_bits: c.measurements.len(), ops, op_start, samplers })
    }
}

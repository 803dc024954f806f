//! Shared test oracles: exact fault enumeration with string-level Pauli
//! propagation, independent of the bit-sliced simulator.

#![allow(dead_code)]

use cpc_core::checks::CheckKind;
use cpc_core::compile::{CheckedCircuit, Role};
use cpc_core::gate::GateKind;
use cpc_core::noise::{NoiseModel, PauliChannel};
use cpc_core::pauli::PauliString;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub accepted: bool,
    pub logical_error: bool,
}

/// Runs `c` with Pauli faults multiplied in right after the given gates
/// (physical-qubit strings) and readout flips on the given MEASURE gates.
pub fn run_faulty(c: &CheckedCircuit, faults: &[(usize, PauliString)], flips: &[usize]) -> Outcome {
    let nq = c.n_qubits();
    let mut frame = PauliString::identity(nq);
    let mut bit_of = vec![None; c.gates.len()];
    for (b, m) in c.measurements.iter().enumerate() {
        bit_of[m.gate] = Some(b);
    }
    let mut bits = vec![false; c.measurements.len()];
    for (g, gate) in c.gates.iter().enumerate() {
        if gate.kind == GateKind::MEASURE {
            let q = gate.q0();
            if flips.contains(&g) {
                let (x, z) = (frame.x_bit(q), frame.z_bit(q));
                frame.set_bits(q, !x, z);
            }
            bits[bit_of[g].unwrap()] = frame.x_bit(q);
        } else {
            gate.conjugate_pauli(&mut frame);
        }
        for (_, p) in faults.iter().filter(|(at, _)| *at == g) {
            frame = frame.mul(p).unwrap();
        }
    }
    decode(c, &frame, &bits)
}

fn decode(c: &CheckedCircuit, frame: &PauliString, bits: &[bool]) -> Outcome {
    let bit = |role: Role| c.measurements.iter().position(|m| m.role == role).map(|b| bits[b]);
    match c.kind {
        CheckKind::ReadoutRepetition => {
            let all1 = bits.iter().all(|&b| b);
            let all0 = bits.iter().all(|&b| !b);
            Outcome { accepted: all0 || all1, logical_error: all1 }
        }
        CheckKind::TwoSided => {
            let accepted = !bits.iter().any(|&b| b);
            let err = (0..c.n_data).any(|j| {
                let q = c.data_out(j);
                frame.x_bit(q) || frame.z_bit(q)
            });
            Outcome { accepted, logical_error: accepted && err }
        }
        CheckKind::OneSided => {
            let data = |j: usize| bit(Role::Data(j)).unwrap();
            let mut accepted = (0..c.n_flag).all(|i| !bit(Role::Flag(i)).unwrap());
            for (i, ch) in c.checks.iter().enumerate() {
                let parity = ch.right.support().into_iter().fold(false, |a, j| a ^ data(j));
                accepted &= !(bit(Role::Check(i)).unwrap() ^ parity);
            }
            let err = (0..c.n_data).any(data);
            Outcome { accepted, logical_error: accepted && err }
        }
    }
}

pub struct NoisyGate {
    pub gate: usize,
    pub channel: PauliChannel,
}

pub struct NoisyReadout {
    pub gate: usize,
    pub m: f64,
}

/// Noise locations of `c` under `nm` (after scaling).
pub fn locations(c: &CheckedCircuit, nm: &NoiseModel) -> (Vec<NoisyGate>, Vec<NoisyReadout>) {
    let nm = nm.scaled().unwrap();
    let mut gates = Vec::new();
    let mut readout = Vec::new();
    for (g, gate) in c.gates.iter().enumerate() {
        if gate.kind == GateKind::MEASURE {
            let m = nm.readout_flip(gate.q0());
            if m > 0.0 {
                readout.push(NoisyReadout { gate: g, m });
            }
        } else if gate.kind.is_unitary() {
            if let Some(ch) = nm.gate_channel(gate) {
                if !ch.is_identity() {
                    gates.push(NoisyGate { gate: g, channel: ch });
                }
            }
        }
    }
    (gates, readout)
}

/// Exact `(P(accept), P(accept and logical error))` by enumerating every
/// combination of Pauli faults and readout flips.
pub fn exact_rates(c: &CheckedCircuit, gates: &[NoisyGate], readout: &[NoisyReadout]) -> (f64, f64) {
    let nq = c.n_qubits();
    let mut acc = 0.0;
    let mut err = 0.0;
    let mut labels = vec![0usize; gates.len()];
    loop {
        let mut w = 1.0;
        let mut faults = Vec::new();
        for (ng, &l) in gates.iter().zip(&labels) {
            w *= ng.channel.prob(l);
            let arity = ng.channel.arity();
            let local = PauliChannel::label_pauli(l, arity);
            let mut p = PauliString::identity(nq);
            for (k, &q) in c.gates[ng.gate].qubits().iter().enumerate() {
                p.set_bits(q, local.x_bit(k), local.z_bit(k));
            }
            faults.push((ng.gate, p));
        }
        if w > 0.0 {
            for mask in 0u32..(1 << readout.len()) {
                let mut wm = w;
                let mut flips = Vec::new();
                for (i, r) in readout.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        wm *= r.m;
                        flips.push(r.gate);
                    } else {
                        wm *= 1.0 - r.m;
                    }
                }
                let o = run_faulty(c, &faults, &flips);
                if o.accepted {
                    acc += wm;
                    if o.logical_error {
                        err += wm;
                    }
                }
            }
        }
        let mut i = 0;
        loop {
            if i == labels.len() {
                return (acc, err);
            }
            labels[i] += 1;
            if labels[i] < gates[i].channel.probs().len() {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Binomial count compared with its exact probability: within `k` standard
/// deviations (exact zero when the probability is zero).
pub fn within_sigma(count: u64, n: u64, p: f64, k: f64) -> bool {
    let nf = n as f64;
    let sd = (p * (1.0 - p) / nf).sqrt();
    let est = count as f64 / nf;
    if sd == 0.0 {
        return (est - p).abs() < 1e-12;
    }
    (est - p).abs() <= k * sd
}

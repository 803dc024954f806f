//! Bounds on the success probability of a noisy payload from aggregated
//! per-group channels.

use std::collections::HashMap;

use crate::error::{invalid, Result};
use crate::gate::{Gate, GateKind};
use crate::noise::NoiseModel;
use crate::pauli::PauliString;

/// Identity weight `s` and largest non-identity weight `alpha` of a channel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelSummary {
    pub s: f64,
    pub alpha: f64,
}

/// Order in which summaries enter the upper-bound recursion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum BoundOrder {
    #[default]
    Circuit,
    /// Ascending `alpha`, so the largest weights come last.
    LargestAlphaLast,
}

/// Success-probability bounds `(L, U)`: `L = Π s_i` and
/// `U_i = (s_i − α_i) U_{i−1} + α_i` with `U_0 = 1`.
pub fn payload_bounds(channels: &[ChannelSummary]) -> Result<(f64, f64)> {
    payload_bounds_ordered(channels, BoundOrder::Circuit)
}

pub fn payload_bounds_ordered(channels: &[ChannelSummary], order: BoundOrder) -> Result<(f64, f64)> {
    for (i, c) in channels.iter().enumerate() {
        if c.s < c.alpha {
            return invalid(format!("channel {i} has s = {} below alpha = {}", c.s, c.alpha));
        }
        if c.s < 0.0 || c.alpha < 0.0 || c.s + c.alpha > 1.0 + 1e-12 {
            return invalid(format!("channel {i} summary ({}, {}) is not a channel", c.s, c.alpha));
        }
    }
    let mut seq: Vec<ChannelSummary> = channels.to_vec();
    if order == BoundOrder::LargestAlphaLast {
        seq.sort_by(|a, b| a.alpha.total_cmp(&b.alpha));
    }
    let lower = seq.iter().map(|c| c.s).product();
    let upper = seq.iter().fold(1.0, |u, c| (c.s - c.alpha) * u + c.alpha);
    Ok((lower, upper))
}

/// Upper bound for `k` depolarizing two-qubit channels of strength `eps`.
pub fn depolarizing_upper_bound(eps: f64, k: usize) -> f64 {
    15.0 / 16.0 * (1.0 - 16.0 * eps / 15.0).powi(k as i32) + 1.0 / 16.0
}

/// Options for [`summarize_payload`].
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryOptions {
    /// Largest number of qubits in one group (at most 3).
    pub max_group: usize,
    /// Push every term to the end of the circuit and drop Z-components.
    pub x_only: bool,
    /// Qubits whose readout flips are appended as extra channels (used with
    /// `x_only`).
    pub readout_qubits: Vec<usize>,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions { max_group: 2, x_only: false, readout_qubits: Vec::new() }
    }
}

/// Distribution over Pauli strings on a few local qubits, keyed by index.
type LocalDist = Vec<f64>;

fn push_through(dist: &LocalDist, g: &Gate, nq: usize) -> LocalDist {
    let mut out = vec![0.0; dist.len()];
    for (i, &w) in dist.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut p = PauliString::from_index(nq, i as u64);
        g.conjugate_pauli(&mut p);
        out[p.index() as usize] += w;
    }
    out
}

fn convolve(a: &LocalDist, b: &LocalDist, nq: usize) -> LocalDist {
    let mut out = vec![0.0; a.len()];
    for (i, &wa) in a.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let pa = PauliString::from_index(nq, i as u64);
        for (j, &wb) in b.iter().enumerate() {
            if wb == 0.0 {
                continue;
            }
            let pb = PauliString::from_index(nq, j as u64);
            let prod = pa.mul(&pb).expect("same width").unsigned();
            out[prod.index() as usize] += wa * wb;
        }
    }
    out
}

/// Gate channel (or idle channel for a delay) embedded on the group's local
/// qubits.
fn local_channel(g: &Gate, nm: &NoiseModel, group: &[usize]) -> Result<Option<LocalDist>> {
    let ch = if g.kind == GateKind::DELAY {
        nm.delay_channel(g.q0(), g.duration)?
    } else if g.kind.is_unitary() {
        nm.gate_channel(g)
    } else {
        None
    };
    let Some(ch) = ch else { return Ok(None) };
    let nq = group.len();
    let slots: Vec<usize> = g.qubits().iter().map(|q| group.iter().position(|x| x == q).expect("gate inside group")).collect();
    let mut out = vec![0.0; 1 << (2 * nq)];
    for (label, &w) in ch.probs().iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let lp = crate::noise::PauliChannel::label_pauli(label, ch.arity());
        let mut p = PauliString::identity(nq);
        for (k, &s) in slots.iter().enumerate() {
            p.set_bits(s, lp.x_bit(k), lp.z_bit(k));
        }
        out[p.index() as usize] += w;
    }
    Ok(Some(out))
}

fn summary_of(weights: impl Iterator<Item = (bool, f64)>) -> ChannelSummary {
    let mut s = 0.0;
    let mut alpha = 0.0f64;
    for (is_id, w) in weights {
        if is_id {
            s += w;
        } else {
            alpha = alpha.max(w);
        }
    }
    ChannelSummary { s, alpha }
}

/// Splits `gates` into consecutive groups acting on at most
/// `opts.max_group` qubits, aggregates each group's noise into one channel
/// at the group's end, and summarises it. With `opts.x_only` every term is
/// first pushed to the end of the circuit and its Z-component dropped, and
/// readout flips on `opts.readout_qubits` are appended.
pub fn summarize_payload(gates: &[Gate], noise: &NoiseModel, opts: &SummaryOptions) -> Result<Vec<ChannelSummary>> {
    if opts.max_group == 0 || opts.max_group > 3 {
        return invalid(format!("group size must be 1, 2 or 3, got {}", opts.max_group));
    }
    let nm = noise.scaled()?;
    let width = crate::gate::circuit_width(gates).max(opts.readout_qubits.iter().map(|q| q + 1).max().unwrap_or(0));
    let mut groups: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    for (i, g) in gates.iter().enumerate() {
        if g.kind == GateKind::BARRIER || g.kind == GateKind::MEASURE {
            continue;
        }
        if g.qubits().len() > opts.max_group {
            return invalid(format!("gate {i} acts on more qubits than the group size"));
        }
        let fits = groups.last().is_some_and(|(qs, _)| {
            let mut u = qs.clone();
            for q in g.qubits() {
                if !u.contains(q) {
                    u.push(*q);
                }
            }
            u.len() <= opts.max_group
        });
        if !fits {
            groups.push((Vec::new(), Vec::new()));
        }
        let (qs, idx) = groups.last_mut().expect("group exists");
        for q in g.qubits() {
            if !qs.contains(q) {
                qs.push(*q);
            }
        }
        idx.push(i);
    }
    let mut out = Vec::with_capacity(groups.len() + opts.readout_qubits.len());
    for (qs, idx) in &groups {
        let nq = qs.len();
        let local = |g: &Gate| g.remapped(|q| qs.iter().position(|&x| x == q).expect("gate inside group"));
        let mut dist: LocalDist = vec![0.0; 1 << (2 * nq)];
        dist[0] = 1.0;
        for &i in idx {
            let g = &gates[i];
            if g.kind.is_unitary() {
                dist = push_through(&dist, &local(g), nq);
            }
            if let Some(ch) = local_channel(g, &nm, qs)? {
                dist = convolve(&dist, &ch, nq);
            }
        }
        if !opts.x_only {
            out.push(summary_of(dist.iter().enumerate().map(|(i, &w)| (i == 0, w))));
            continue;
        }
        let end = *idx.last().expect("non-empty group");
        let rest: Vec<&Gate> = gates[end + 1..].iter().filter(|g| g.kind.is_unitary()).collect();
        let mut projected: HashMap<PauliString, f64> = HashMap::new();
        for (i, &w) in dist.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            let lp = PauliString::from_index(nq, i as u64);
            let mut p = PauliString::identity(width);
            for (k, &q) in qs.iter().enumerate() {
                p.set_bits(q, lp.x_bit(k), lp.z_bit(k));
            }
            for g in &rest {
                g.conjugate_pauli(&mut p);
            }
            *projected.entry(p.x_part()).or_insert(0.0) += w;
        }
        out.push(summary_of(projected.iter().map(|(p, &w)| (p.is_identity(), w))));
    }
    if opts.x_only {
        for &q in &opts.readout_qubits {
            let m = nm.readout_flip(q);
            out.push(ChannelSummary { s: 1.0 - m, alpha: m });
        }
    }
    Ok(out)
}

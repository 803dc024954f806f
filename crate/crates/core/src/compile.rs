//! Lowering of check sets to gate lists for all-to-all and linear
//! nearest-neighbour (LNN) connectivity.
//!
//! All-to-all layout: data `j` on qubit `j`, check `i` on `n + i`, flag `i`
//! on `n + m + i`. LNN layout: checks `0..m` then data on a chain, or with
//! flags the interleaved order `F0 C0 F1 C1 … D0 D1 …`. LNN checks travel
//! through the data with controlled-Pauli-plus-SWAP templates, so qubits move
//! during the circuit; [`CheckedCircuit::initial_position`] and
//! [`CheckedCircuit::final_position`] give the bookkeeping.

use std::fmt;

use crate::checks::{Check, CheckKind, CheckSet};
use crate::error::{invalid, Error, Result};
use crate::gate::{Gate, GateKind};
use crate::pauli::Pauli;
use crate::synth::synthesize;
use crate::tableau::apply_circuit;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Connectivity {
    AllToAll,
    Lnn,
}

impl fmt::Display for Connectivity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Connectivity::AllToAll => "all_to_all",
            Connectivity::Lnn => "lnn",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Segment {
    Payload,
    LeftCheck(usize),
    RightCheck(usize),
    FlagLeft(usize),
    FlagRight(usize),
    Readout,
}

impl Segment {
    pub fn check(self) -> Option<usize> {
        match self {
            Segment::LeftCheck(i) | Segment::RightCheck(i) | Segment::FlagLeft(i) | Segment::FlagRight(i) => Some(i),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Role {
    Data(usize),
    Check(usize),
    Flag(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    Left,
    Right,
}

/// What a group of check gates does, as seen by the performance model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementKind {
    /// Controlled `pauli` from the check onto data qubit `data` (for LNN
    /// including the SWAP that moves the check past it).
    Data { data: usize, pauli: Pauli },
    /// Single-qubit gates on the check qubit (basis changes, sign fix).
    Local,
    /// The flag's CX onto its check qubit with the flag's H.
    Flag,
    /// SWAP between check `check` and the flag of check `flag_owner` while
    /// clustering flags and checks on a chain.
    CrossSwap { flag_owner: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Element {
    pub check: usize,
    pub side: Side,
    pub kind: ElementKind,
    /// Indices into [`CheckedCircuit::gates`], in order.
    pub gates: Vec<usize>,
    /// Physical qubits the element acts on.
    pub qubits: Vec<usize>,
    /// Occupant of each of `qubits` before and after the element.
    pub roles_before: Vec<Role>,
    pub roles_after: Vec<Role>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub gate: usize,
    pub role: Role,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckedCircuit {
    pub kind: CheckKind,
    pub connectivity: Connectivity,
    pub n_data: usize,
    pub n_check: usize,
    pub n_flag: usize,
    pub gates: Vec<Gate>,
    /// Segment tag per gate.
    pub segments: Vec<Segment>,
    /// Element index per gate, for gates belonging to a check element.
    pub element_of: Vec<Option<usize>>,
    pub elements: Vec<Element>,
    /// Measurements in gate order; this is the order of measured bits.
    pub measurements: Vec<Measurement>,
    pub checks: Vec<Check>,
    /// Occupant of each physical qubit at the start of the circuit.
    pub roles: Vec<Role>,
    /// Occupant of each physical qubit at the end of the circuit.
    pub final_roles: Vec<Role>,
    /// The payload as a gate list on data indices.
    pub payload: Vec<Gate>,
    /// Set by the scheduler.
    pub scheduled: bool,
}

impl CheckedCircuit {
    pub fn n_qubits(&self) -> usize {
        self.roles.len()
    }

    pub fn n_checks(&self) -> usize {
        self.checks.len()
    }

    pub fn initial_position(&self, role: Role) -> usize {
        self.roles.iter().position(|&r| r == role).expect("role present")
    }

    pub fn final_position(&self, role: Role) -> usize {
        self.final_roles.iter().position(|&r| r == role).expect("role present")
    }

    /// Physical qubit holding data qubit `j` at the end of the circuit.
    pub fn data_out(&self, j: usize) -> usize {
        self.final_position(Role::Data(j))
    }

    /// Physical index of every role in canonical order: data, checks, flags.
    pub fn canonical_order(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n_qubits());
        out.extend((0..self.n_data).map(|j| self.initial_position(Role::Data(j))));
        out.extend((0..self.n_check).map(|i| self.initial_position(Role::Check(i))));
        out.extend((0..self.n_flag).map(|i| self.initial_position(Role::Flag(i))));
        out
    }

    pub fn cx_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind == GateKind::CX).count()
    }

    /// Two-qubit gate count of segments tagged with check `i`, optionally
    /// restricted to one side (flag gates excluded).
    pub fn check_cx_count(&self, i: usize, side: Option<Side>) -> usize {
        self.gates
            .iter()
            .zip(&self.segments)
            .filter(|(g, s)| {
                g.is_two_qubit()
                    && match (s, side) {
                        (Segment::LeftCheck(k), None | Some(Side::Left)) => *k == i,
                        (Segment::RightCheck(k), None | Some(Side::Right)) => *k == i,
                        _ => false,
                    }
            })
            .count()
    }

    pub fn to_text(&self) -> String {
        crate::gate::write_circuit(&self.gates)
    }
}

struct Builder {
    gates: Vec<Gate>,
    segments: Vec<Segment>,
    element_of: Vec<Option<usize>>,
    elements: Vec<Element>,
    measurements: Vec<Measurement>,
    at: Vec<Role>,
    open: Option<usize>,
}

impl Builder {
    fn new(roles: Vec<Role>) -> Self {
        Builder {
            gates: Vec::new(),
            segments: Vec::new(),
            element_of: Vec::new(),
            elements: Vec::new(),
            measurements: Vec::new(),
            at: roles,
            open: None,
        }
    }

    fn pos(&self, r: Role) -> usize {
        self.at.iter().position(|&x| x == r).expect("role present")
    }

    fn push(&mut self, g: Gate, seg: Segment) {
        let idx = self.gates.len();
        if let Some(e) = self.open {
            self.elements[e].gates.push(idx);
        }
        if g.kind == GateKind::MEASURE {
            self.measurements.push(Measurement { gate: idx, role: self.at[g.q0()] });
        }
        self.gates.push(g);
        self.segments.push(seg);
        self.element_of.push(self.open);
    }

    fn begin(&mut self, check: usize, side: Side, kind: ElementKind, qubits: Vec<usize>) {
        debug_assert!(self.open.is_none());
        let roles_before = qubits.iter().map(|&q| self.at[q]).collect();
        self.elements.push(Element {
            check,
            side,
            kind,
            gates: Vec::new(),
            qubits,
            roles_before,
            roles_after: Vec::new(),
        });
        self.open = Some(self.elements.len() - 1);
    }

    fn end(&mut self) {
        let e = self.open.take().expect("open element");
        let after = self.elements[e].qubits.iter().map(|&q| self.at[q]).collect();
        self.elements[e].roles_after = after;
    }

    fn swap_roles(&mut self, a: usize, b: usize) {
        self.at.swap(a, b);
    }

    fn push_all(&mut self, gates: Vec<Gate>, seg: Segment) {
        for g in gates {
            self.push(g, seg);
        }
    }

    /// Basis change and sign fix on a check qubit as its own element.
    fn local(&mut self, check: usize, side: Side, q: usize, negative: bool, seg: Segment) {
        self.begin(check, side, ElementKind::Local, vec![q]);
        if side == Side::Left {
            self.push(Gate::h(q), seg);
        }
        if negative {
            self.push(Gate::one(GateKind::Z, q), seg);
        }
        if side == Side::Right {
            self.push(Gate::h(q), seg);
        }
        self.end();
    }

    fn flag_wrap(&mut self, check: usize, side: Side, f: usize, c: usize) {
        let seg = if side == Side::Left { Segment::FlagLeft(check) } else { Segment::FlagRight(check) };
        self.begin(check, side, ElementKind::Flag, vec![f, c]);
        if side == Side::Left {
            self.push(Gate::h(f), seg);
            self.push(Gate::cx(f, c), seg);
        } else {
            self.push(Gate::cx(f, c), seg);
            self.push(Gate::h(f), seg);
        }
        self.end();
    }

    fn measure(&mut self, q: usize) {
        self.push(Gate::measure(q), Segment::Readout);
    }

    fn finish(self, cs: &CheckSet, connectivity: Connectivity, roles: Vec<Role>, payload: Vec<Gate>) -> CheckedCircuit {
        debug_assert!(self.open.is_none());
        let m = cs.checks.len();
        CheckedCircuit {
            kind: cs.kind,
            connectivity,
            n_data: cs.n(),
            n_check: m,
            n_flag: if cs.flags { m } else { 0 },
            gates: self.gates,
            segments: self.segments,
            element_of: self.element_of,
            elements: self.elements,
            measurements: self.measurements,
            checks: cs.checks.clone(),
            roles,
            final_roles: self.at,
            payload,
            scheduled: false,
        }
    }
}

/// Controlled-`p` from `c` onto `t` with CX and single-qubit dressing.
pub fn controlled_pauli(p: Pauli, c: usize, t: usize) -> Vec<Gate> {
    match p {
        Pauli::I => vec![],
        Pauli::X => vec![Gate::cx(c, t)],
        Pauli::Z => vec![Gate::h(t), Gate::cx(c, t), Gate::h(t)],
        Pauli::Y => vec![Gate::one(GateKind::Sdg, t), Gate::cx(c, t), Gate::one(GateKind::S, t)],
    }
}

/// Controlled-`p` from `c` onto the adjacent `t` followed by SWAP(c, t):
/// two CX for X, Y, Z and three for the identity.
pub fn controlled_pauli_swap(p: Pauli, c: usize, t: usize) -> Vec<Gate> {
    match p {
        Pauli::I => vec![Gate::cx(c, t), Gate::cx(t, c), Gate::cx(c, t)],
        Pauli::X => vec![Gate::cx(t, c), Gate::cx(c, t)],
        Pauli::Z => vec![Gate::h(t), Gate::cx(t, c), Gate::cx(c, t), Gate::h(c)],
        Pauli::Y => vec![Gate::one(GateKind::Sdg, t), Gate::cx(t, c), Gate::cx(c, t), Gate::one(GateKind::S, c)],
    }
}

fn inverse_sequence(gates: Vec<Gate>) -> Vec<Gate> {
    gates.iter().rev().map(Gate::inverse).collect()
}

fn swap_cx(a: usize, b: usize) -> Vec<Gate> {
    vec![Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)]
}

fn resolve_payload(cs: &CheckSet, payload: Option<&[Gate]>) -> Result<Vec<Gate>> {
    cs.validate()?;
    if cs.kind == CheckKind::ReadoutRepetition {
        return invalid("use build_readout_repetition for repetition readout");
    }
    match payload {
        None => Ok(synthesize(&cs.payload)),
        Some(gates) => {
            if let Some(g) = gates.iter().find(|g| !(g.kind.is_unitary() || g.kind == GateKind::BARRIER)) {
                return Err(Error::UnsupportedGate(format!("{} in payload", g.kind)));
            }
            if apply_circuit(cs.n(), gates)? != cs.payload {
                return invalid("payload gates do not implement the check set's payload tableau");
            }
            Ok(gates.to_vec())
        }
    }
}

/// All-to-all compilation with a synthesized payload.
pub fn compile_all_to_all(cs: &CheckSet) -> Result<CheckedCircuit> {
    compile_all_to_all_with(cs, None)
}

/// All-to-all compilation; `payload` must implement `cs.payload`.
pub fn compile_all_to_all_with(cs: &CheckSet, payload: Option<&[Gate]>) -> Result<CheckedCircuit> {
    let payload = resolve_payload(cs, payload)?;
    let n = cs.n();
    let m = cs.checks.len();
    let mut roles: Vec<Role> = (0..n).map(Role::Data).chain((0..m).map(Role::Check)).collect();
    if cs.flags {
        roles.extend((0..m).map(Role::Flag));
    }
    let mut b = Builder::new(roles.clone());
    let check_q = |i: usize| n + i;
    let flag_q = |i: usize| n + m + i;

    match cs.kind {
        CheckKind::TwoSided => {
            for (i, ch) in cs.checks.iter().enumerate() {
                let c = check_q(i);
                if cs.flags {
                    b.flag_wrap(i, Side::Left, flag_q(i), c);
                }
                b.local(i, Side::Left, c, ch.left.phase() == 2, Segment::LeftCheck(i));
                for j in 0..n {
                    let p = ch.left.get(j);
                    if p != Pauli::I {
                        b.begin(i, Side::Left, ElementKind::Data { data: j, pauli: p }, vec![c, j]);
                        b.push_all(controlled_pauli(p, c, j), Segment::LeftCheck(i));
                        b.end();
                    }
                }
            }
            b.push_all(payload.clone(), Segment::Payload);
            for (i, ch) in cs.checks.iter().enumerate().rev() {
                let c = check_q(i);
                for j in 0..n {
                    let p = ch.right.get(j);
                    if p != Pauli::I {
                        b.begin(i, Side::Right, ElementKind::Data { data: j, pauli: p }, vec![c, j]);
                        b.push_all(controlled_pauli(p, c, j), Segment::RightCheck(i));
                        b.end();
                    }
                }
                b.local(i, Side::Right, c, ch.right.phase() == 2, Segment::RightCheck(i));
                if cs.flags {
                    b.flag_wrap(i, Side::Right, flag_q(i), c);
                }
            }
            for i in 0..m {
                b.measure(check_q(i));
                if cs.flags {
                    b.measure(flag_q(i));
                }
            }
        }
        CheckKind::OneSided => {
            for (i, ch) in cs.checks.iter().enumerate() {
                let c = check_q(i);
                b.local(i, Side::Left, c, ch.left.phase() == 2, Segment::LeftCheck(i));
                for j in 0..n {
                    let p = ch.left.get(j);
                    if p != Pauli::I {
                        b.begin(i, Side::Left, ElementKind::Data { data: j, pauli: p }, vec![c, j]);
                        b.push_all(controlled_pauli(p, c, j), Segment::LeftCheck(i));
                        b.end();
                    }
                }
                // The right check's basis change, moved before the payload.
                b.begin(i, Side::Right, ElementKind::Local, vec![c]);
                b.push(Gate::h(c), Segment::RightCheck(i));
                b.end();
                b.measure(c);
            }
            b.push_all(payload.clone(), Segment::Payload);
            for j in 0..n {
                b.measure(j);
            }
        }
        CheckKind::ReadoutRepetition => unreachable!(),
    }
    Ok(b.finish(cs, Connectivity::AllToAll, roles, payload))
}

/// LNN compilation with a synthesized (nearest-neighbour) payload.
pub fn compile_lnn(cs: &CheckSet) -> Result<CheckedCircuit> {
    compile_lnn_with(cs, None)
}

/// LNN compilation; two-qubit payload gates must act on adjacent data
/// qubits.
pub fn compile_lnn_with(cs: &CheckSet, payload: Option<&[Gate]>) -> Result<CheckedCircuit> {
    let payload = resolve_payload(cs, payload)?;
    if let Some(g) = payload.iter().find(|g| g.is_two_qubit() && g.q0().abs_diff(g.q1()) != 1) {
        return invalid(format!("payload gate {g} is not nearest-neighbour"));
    }
    let n = cs.n();
    let m = cs.checks.len();
    let flags = cs.flags;
    let mut roles = Vec::with_capacity(n + m * (1 + flags as usize));
    for i in 0..m {
        if flags {
            roles.push(Role::Flag(i));
        }
        roles.push(Role::Check(i));
    }
    roles.extend((0..n).map(Role::Data));
    let mut b = Builder::new(roles.clone());

    // Cluster the flags to the left of all checks.
    let mut swaps: Vec<(usize, usize, usize)> = Vec::new();
    if flags {
        for i in 0..m {
            let (f, c) = (b.pos(Role::Flag(i)), b.pos(Role::Check(i)));
            b.flag_wrap(i, Side::Left, f, c);
        }
        for k in 1..m {
            let mut p = b.pos(Role::Flag(k));
            while p > k {
                let Role::Check(i) = b.at[p - 1] else { unreachable!("flag passes only checks") };
                b.begin(i, Side::Left, ElementKind::CrossSwap { flag_owner: k }, vec![p - 1, p]);
                b.push_all(swap_cx(p - 1, p), Segment::FlagLeft(k));
                b.swap_roles(p - 1, p);
                b.end();
                swaps.push((p - 1, i, k));
                p -= 1;
            }
        }
    }

    let left_side = |b: &mut Builder, i: usize, ch: &Check| {
        let start = b.pos(Role::Check(i));
        b.local(i, Side::Left, start, ch.left.phase() == 2, Segment::LeftCheck(i));
        for j in 0..n {
            let c = b.pos(Role::Check(i));
            debug_assert_eq!(b.at[c + 1], Role::Data(j));
            let p = ch.left.get(j);
            b.begin(i, Side::Left, ElementKind::Data { data: j, pauli: p }, vec![c, c + 1]);
            b.push_all(controlled_pauli_swap(p, c, c + 1), Segment::LeftCheck(i));
            b.swap_roles(c, c + 1);
            b.end();
        }
    };

    match cs.kind {
        CheckKind::TwoSided => {
            for i in (0..m).rev() {
                left_side(&mut b, i, &cs.checks[i]);
            }
            let base = b.pos(Role::Data(0));
            b.push_all(payload.iter().map(|g| g.remapped(|q| q + base)).collect(), Segment::Payload);
            for i in 0..m {
                let ch = &cs.checks[i];
                for j in (0..n).rev() {
                    let c = b.pos(Role::Check(i));
                    debug_assert_eq!(b.at[c - 1], Role::Data(j));
                    let p = ch.right.get(j);
                    b.begin(i, Side::Right, ElementKind::Data { data: j, pauli: p }, vec![c - 1, c]);
                    b.push_all(inverse_sequence(controlled_pauli_swap(p, c - 1, c)), Segment::RightCheck(i));
                    b.swap_roles(c - 1, c);
                    b.end();
                }
                let c = b.pos(Role::Check(i));
                b.local(i, Side::Right, c, ch.right.phase() == 2, Segment::RightCheck(i));
            }
            for &(p, i, k) in swaps.iter().rev() {
                b.begin(i, Side::Right, ElementKind::CrossSwap { flag_owner: k }, vec![p, p + 1]);
                b.push_all(swap_cx(p, p + 1), Segment::FlagRight(k));
                b.swap_roles(p, p + 1);
                b.end();
            }
            if flags {
                for i in (0..m).rev() {
                    let (f, c) = (b.pos(Role::Flag(i)), b.pos(Role::Check(i)));
                    b.flag_wrap(i, Side::Right, f, c);
                }
            }
            for i in 0..m {
                let c = b.pos(Role::Check(i));
                b.measure(c);
                if flags {
                    let f = b.pos(Role::Flag(i));
                    b.measure(f);
                }
            }
        }
        CheckKind::OneSided => {
            for i in (0..m).rev() {
                left_side(&mut b, i, &cs.checks[i]);
                let c = b.pos(Role::Check(i));
                b.begin(i, Side::Right, ElementKind::Local, vec![c]);
                b.push(Gate::h(c), Segment::RightCheck(i));
                b.end();
                b.measure(c);
            }
            let base = b.pos(Role::Data(0));
            b.push_all(payload.iter().map(|g| g.remapped(|q| q + base)).collect(), Segment::Payload);
            for j in 0..n {
                let q = b.pos(Role::Data(j));
                b.measure(q);
            }
        }
        CheckKind::ReadoutRepetition => unreachable!(),
    }
    Ok(b.finish(cs, Connectivity::Lnn, roles, payload))
}

pub fn compile(cs: &CheckSet, connectivity: Connectivity, payload: Option<&[Gate]>) -> Result<CheckedCircuit> {
    match connectivity {
        Connectivity::AllToAll => compile_all_to_all_with(cs, payload),
        Connectivity::Lnn => compile_lnn_with(cs, payload),
    }
}

/// Repetition-code readout of qubit 0 onto `k` ancillas: CX(0,1), CX(1,2),
/// …, then all `k + 1` qubits measured.
pub fn build_readout_repetition(k: usize) -> CheckedCircuit {
    let roles: Vec<Role> = std::iter::once(Role::Data(0)).chain((0..k).map(Role::Check)).collect();
    let mut b = Builder::new(roles.clone());
    for i in 0..k {
        b.begin(i, Side::Left, ElementKind::Data { data: 0, pauli: Pauli::Z }, vec![i, i + 1]);
        b.push(Gate::cx(i, i + 1), Segment::LeftCheck(i));
        b.end();
    }
    for q in 0..=k {
        b.measure(q);
    }
    let cs = CheckSet {
        kind: CheckKind::ReadoutRepetition,
        checks: Vec::new(),
        flags: false,
        payload: crate::tableau::CliffordTableau::identity(1),
    };
    let mut c = b.finish(&cs, Connectivity::Lnn, roles, Vec::new());
    c.n_check = k;
    c
}

/// Interval `[βn − δ√(2n), βn + δ√(2n)]` for the CX count of one random
/// check and the confidence `1 − 2e^{−δ}` (clamped at 0).
pub fn gate_count_bounds(n: usize, delta: f64, connectivity: Connectivity, kind: CheckKind) -> Result<(f64, f64, f64)> {
    if n == 0 || !(delta >= 0.0) {
        return invalid("gate_count_bounds needs n >= 1 and delta >= 0");
    }
    let beta = match (connectivity, kind) {
        (Connectivity::AllToAll, CheckKind::TwoSided) => 1.5,
        (Connectivity::AllToAll, CheckKind::OneSided) => 0.75,
        (Connectivity::Lnn, CheckKind::TwoSided) => 4.5,
        (Connectivity::Lnn, CheckKind::OneSided) => 2.25,
        (_, CheckKind::ReadoutRepetition) => return invalid("no gate count bound for repetition readout"),
    };
    let nf = n as f64;
    let half = delta * (2.0 * nf).sqrt();
    Ok((beta * nf - half, beta * nf + half, (1.0 - 2.0 * (-delta).exp()).max(0.0)))
}

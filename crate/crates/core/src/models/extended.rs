//! Per-check performance model driven by the full noise model of a compiled
//! circuit.
//!
//! Each check contributes a small distribution over the Pauli on its check
//! qubit, the Pauli on its flag qubit and a "new data error" bit. Left-side
//! noise is referred back to the start of the check (where both ancillas are
//! in `|0⟩` and data errors pass through the check unseen), right-side noise
//! forward to the measurement; in both frames an X component flips the
//! outcome. Checks are then folded from the innermost outwards into a
//! four-state vector over (data error present, check raised). A data error
//! already inside a check flips its syndrome with probability one half.

use crate::checks::CheckKind;
use crate::compile::{CheckedCircuit, Element, ElementKind, Role, Segment, Side};
use crate::error::{invalid, Error, Result};
use crate::gate::{Gate, GateKind};
use crate::models::bounds::{payload_bounds, summarize_payload, SummaryOptions};
use crate::models::markov::CurvePoint;
use crate::noise::{NoiseModel, PauliChannel};
use crate::pauli::PauliString;

/// When a check's own noise counts as a new data error.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DataErrorRule {
    /// Any noise term that touches the check, its flag or its data qubits
    /// is taken to corrupt the data; errors never cancel.
    #[default]
    Pessimistic,
    /// Only the Pauli that actually lands on the data qubits counts.
    Tracked,
}

/// Source of the payload error rate fed into the model.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub enum PayloadError {
    /// `1 − L` from the payload bounds.
    #[default]
    UpperBound,
    /// `1 − U` from the payload bounds.
    LowerBound,
    Value(f64),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedOptions {
    pub rule: DataErrorRule,
    pub payload_error: PayloadError,
    /// Group size for the payload bounds.
    pub group: usize,
}

impl Default for ExtendedOptions {
    fn default() -> Self {
        ExtendedOptions { rule: DataErrorRule::Pessimistic, payload_error: PayloadError::UpperBound, group: 2 }
    }
}

/// Probabilities over (Pauli on check, Pauli on flag, new data error).
/// Paulis are encoded as `x | z << 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentState(pub [[[f64; 2]; 4]; 4]);

impl SegmentState {
    pub fn identity() -> SegmentState {
        let mut s = [[[0.0; 2]; 4]; 4];
        s[0][0][0] = 1.0;
        SegmentState(s)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().flatten().flatten().sum()
    }

    fn combine(&self, other: &SegmentState) -> SegmentState {
        let mut out = [[[0.0; 2]; 4]; 4];
        for (c1, f1, d1, w1) in self.terms() {
            for (c2, f2, d2, w2) in other.terms() {
                out[c1 ^ c2][f1 ^ f2][(d1 | d2) as usize] += w1 * w2;
            }
        }
        SegmentState(out)
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, bool, f64)> + '_ {
        (0..4).flat_map(move |c| {
            (0..4).flat_map(move |f| (0..2).filter_map(move |d| {
                let w = self.0[c][f][d];
                (w != 0.0).then_some((c, f, d == 1, w))
            }))
        })
    }
}

/// Outcome of one check: `probs[e][d][r]` is the probability of a new data
/// error `d` and a raised check `r`, given whether a data error `e` is
/// already inside the check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CheckOutcome {
    pub check: usize,
    pub probs: [[[f64; 2]; 2]; 2],
}

/// Probabilities over (data error, raised), indexed `2e + r`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtendedState(pub [f64; 4]);

impl ExtendedState {
    pub fn initial(eps_pl: f64) -> Result<ExtendedState> {
        if !(0.0..=1.0).contains(&eps_pl) {
            return invalid(format!("payload error must lie in [0, 1], got {eps_pl}"));
        }
        Ok(ExtendedState([1.0 - eps_pl, 0.0, eps_pl, 0.0]))
    }

    pub fn postselect(&self) -> f64 {
        self.0[0] + self.0[2]
    }

    pub fn logical_error(&self) -> Option<f64> {
        let p = self.postselect();
        (p > 0.0).then(|| self.0[2] / p)
    }

    pub fn step(&self, o: &CheckOutcome) -> ExtendedState {
        let mut out = [0.0; 4];
        for e in 0..2 {
            for r in 0..2 {
                let w = self.0[2 * e + r];
                for d in 0..2 {
                    for raised in 0..2 {
                        out[2 * (e | d) + (r | raised)] += w * o.probs[e][d][raised];
                    }
                }
            }
        }
        ExtendedState(out)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtendedModel {
    pub eps_pl: f64,
    /// Payload success bounds `(L, U)` when they were computed.
    pub bounds: Option<(f64, f64)>,
    /// Per-check outcomes from the innermost check outwards.
    pub outcomes: Vec<CheckOutcome>,
    /// Rates after folding in the `j` innermost checks, `j = 0..=m`.
    pub curve: Vec<CurvePoint>,
}

/// Pauli bits on up to two local slots.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Local {
    x: u8,
    z: u8,
}

impl Local {
    const I: Local = Local { x: 0, z: 0 };

    fn from_index(i: usize, nq: usize) -> Local {
        Local { x: (i & ((1 << nq) - 1)) as u8, z: (i >> nq) as u8 }
    }

    fn index(self, nq: usize) -> usize {
        self.x as usize | (self.z as usize) << nq
    }

    fn slot(self, s: usize) -> usize {
        ((self.x >> s) & 1) as usize | (((self.z >> s) & 1) as usize) << 1
    }

    fn with_slot(mut self, s: usize, p: usize) -> Local {
        self.x = (self.x & !(1 << s)) | (((p & 1) as u8) << s);
        self.z = (self.z & !(1 << s)) | ((((p >> 1) & 1) as u8) << s);
        self
    }

    fn mul(self, o: Local) -> Local {
        Local { x: self.x ^ o.x, z: self.z ^ o.z }
    }

    fn conjugate(self, gates: &[Gate], nq: usize) -> Local {
        let mut p = PauliString::identity(nq);
        for s in 0..nq {
            p.set_bits(s, (self.x >> s) & 1 == 1, (self.z >> s) & 1 == 1);
        }
        for g in gates {
            g.conjugate_pauli(&mut p);
        }
        let mut out = Local::I;
        for s in 0..nq {
            out.x |= (p.x_bit(s) as u8) << s;
            out.z |= (p.z_bit(s) as u8) << s;
        }
        out
    }
}

/// What a slot of an element means to the check being modelled.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Check,
    Flag,
    Data(usize),
    Other,
}

fn slot_kind(r: Role, k: usize) -> Slot {
    match r {
        Role::Check(i) if i == k => Slot::Check,
        Role::Flag(i) if i == k => Slot::Flag,
        Role::Data(j) => Slot::Data(j),
        _ => Slot::Other,
    }
}

struct CheckContext<'a> {
    c: &'a CheckedCircuit,
    nm: &'a NoiseModel,
    k: usize,
    rule: DataErrorRule,
    /// For one-sided checks: whether a single-qubit Pauli on data `j` at the
    /// payload input leaves an X component at the output.
    flips_output: Option<Vec<[bool; 4]>>,
}

impl CheckContext<'_> {
    fn data_error(&self, j: usize, p: usize) -> bool {
        match &self.flips_output {
            None => p != 0,
            Some(t) => t[j][p],
        }
    }

    /// Reads a local Pauli in the frame given by `roles`, returning the check
    /// and flag Paulis (`None` when the slot is absent) and whether a data
    /// error results.
    fn read(&self, p: Local, roles: &[Slot]) -> (Option<usize>, Option<usize>, bool, bool) {
        let (mut c, mut f, mut d, mut touched) = (None, None, false, false);
        for (s, kind) in roles.iter().enumerate() {
            let q = p.slot(s);
            match *kind {
                Slot::Check => c = Some(q),
                Slot::Flag => f = Some(q),
                Slot::Data(j) => d |= self.data_error(j, q),
                Slot::Other => continue,
            }
            touched |= q != 0;
        }
        (c, f, d, touched)
    }

    fn channel(&self, g: &Gate) -> Result<Option<PauliChannel>> {
        if g.kind == GateKind::DELAY {
            self.nm.delay_channel(g.q0(), g.duration)
        } else if g.kind.is_unitary() {
            Ok(self.nm.gate_channel(g))
        } else {
            Ok(None)
        }
    }

    /// Applies element `e` to `state`. `backward` refers everything to the
    /// element's start, otherwise to its end.
    fn apply(&self, e: &Element, state: &SegmentState, backward: bool) -> Result<SegmentState> {
        let nq = e.qubits.len();
        if nq > 2 {
            return Err(Error::Runtime(format!("element on {nq} qubits")));
        }
        let slot_of = |q: usize| e.qubits.iter().position(|&x| x == q).expect("gate inside element");
        let gates: Vec<Gate> = e.gates.iter().map(|&i| self.c.gates[i].remapped(slot_of)).collect();
        let inverse: Vec<Gate> = gates.iter().rev().map(Gate::inverse).collect();
        let before: Vec<Slot> = e.roles_before.iter().map(|&r| slot_kind(r, self.k)).collect();
        let after: Vec<Slot> = e.roles_after.iter().map(|&r| slot_kind(r, self.k)).collect();
        let (from, to, whole) = if backward { (&after, &before, &inverse) } else { (&before, &after, &gates) };

        // Move the accumulated state across the element.
        let mut moved = [[[0.0; 2]; 4]; 4];
        for (c, f, d, w) in state.terms() {
            let mut p = Local::I;
            for (s, kind) in from.iter().enumerate() {
                match kind {
                    Slot::Check => p = p.with_slot(s, c),
                    Slot::Flag => p = p.with_slot(s, f),
                    _ => {}
                }
            }
            let (nc, nf, nd, _) = self.read(p.conjugate(whole, nq), to);
            let nc = if from.contains(&Slot::Check) { nc.unwrap_or(0) } else { c };
            let nf = if from.contains(&Slot::Flag) { nf.unwrap_or(0) } else { f };
            moved[nc][nf][(d | nd) as usize] += w;
        }

        // Aggregate the element's own noise in the same frame, remembering
        // whether any relevant term fired.
        let mut agg = vec![[0.0f64; 2]; 1 << (2 * nq)];
        agg[0][0] = 1.0;
        for (t, &gi) in e.gates.iter().enumerate() {
            let g = &self.c.gates[gi];
            let Some(ch) = self.channel(g)? else { continue };
            if ch.is_identity() {
                continue;
            }
            let gs: Vec<usize> = gates[t].qubits().to_vec();
            let path: Vec<Gate> = if backward { gates[..=t].iter().rev().map(Gate::inverse).collect() } else { gates[t + 1..].to_vec() };
            let mut next = vec![[0.0f64; 2]; agg.len()];
            for (label, &w) in ch.probs().iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let lp = PauliChannel::label_pauli(label, ch.arity());
                let mut p = Local::I;
                for (kk, &s) in gs.iter().enumerate() {
                    let idx = lp.x_bit(kk) as usize | (lp.z_bit(kk) as usize) << 1;
                    p = p.with_slot(s, idx);
                }
                let p = p.conjugate(&path, nq);
                let (_, _, _, touched) = self.read(p, to);
                for (i, acc) in agg.iter().enumerate() {
                    for nz in 0..2 {
                        if acc[nz] == 0.0 {
                            continue;
                        }
                        let prod = Local::from_index(i, nq).mul(p).index(nq);
                        next[prod][nz | touched as usize] += acc[nz] * w;
                    }
                }
            }
            agg = next;
        }

        let mut noise = [[[0.0; 2]; 4]; 4];
        for (i, acc) in agg.iter().enumerate() {
            let (c, f, d, _) = self.read(Local::from_index(i, nq), to);
            for nz in 0..2 {
                if acc[nz] == 0.0 {
                    continue;
                }
                let d = match self.rule {
                    DataErrorRule::Pessimistic => d || nz == 1,
                    DataErrorRule::Tracked => d,
                };
                noise[c.unwrap_or(0)][f.unwrap_or(0)][d as usize] += acc[nz];
            }
        }
        Ok(SegmentState(moved).combine(&SegmentState(noise)))
    }

    fn elements(&self, side: Side) -> Vec<&Element> {
        self.c
            .elements
            .iter()
            .filter(|e| {
                e.side == side
                    && (e.check == self.k || matches!(e.kind, ElementKind::CrossSwap { flag_owner } if flag_owner == self.k))
            })
            .collect()
    }

    /// Readout flip of a qubit at the end of the circuit, including idling
    /// between its last gate and its measurement.
    fn readout_flip(&self, q: usize) -> Result<f64> {
        let mut m = self.nm.readout_flip(q);
        for (g, s) in self.c.gates.iter().zip(&self.c.segments) {
            if *s == Segment::Readout && g.kind == GateKind::DELAY && g.q0() == q {
                if let Some(ch) = self.nm.delay_channel(q, g.duration)? {
                    let p = ch.prob(1) + ch.prob(2);
                    m = m * (1.0 - p) + (1.0 - m) * p;
                }
            }
        }
        Ok(m)
    }

    fn outcome(&self) -> Result<CheckOutcome> {
        let seg = match self.c.kind {
            CheckKind::TwoSided => {
                let mut left = SegmentState::identity();
                for e in self.elements(Side::Left).into_iter().rev() {
                    left = self.apply(e, &left, true)?;
                }
                let mut right = SegmentState::identity();
                for e in self.elements(Side::Right) {
                    right = self.apply(e, &right, false)?;
                }
                left.combine(&right)
            }
            CheckKind::OneSided => {
                let mut s = SegmentState::identity();
                for e in self.c.elements.iter().filter(|e| e.check == self.k) {
                    s = self.apply(e, &s, false)?;
                }
                s
            }
            CheckKind::ReadoutRepetition => unreachable!(),
        };
        let mc = self.readout_flip(self.c.final_position(Role::Check(self.k)))?;
        let mf = if self.c.n_flag > 0 { self.readout_flip(self.c.final_position(Role::Flag(self.k)))? } else { 0.0 };
        let mut probs = [[[0.0; 2]; 2]; 2];
        for (c, f, d, w) in seg.terms() {
            for (bc, wc) in [(0, 1.0 - mc), (1, mc)] {
                for (bf, wf) in [(0, 1.0 - mf), (1, mf)] {
                    let xc = (c & 1) ^ bc;
                    let xf = (f & 1) ^ bf;
                    let w = w * wc * wf;
                    probs[0][d as usize][xc | xf] += w;
                    // A data error already inside the check flips it half
                    // the time.
                    probs[1][d as usize][xc | xf] += 0.5 * w;
                    probs[1][d as usize][(xc ^ 1) | xf] += 0.5 * w;
                }
            }
        }
        Ok(CheckOutcome { check: self.k, probs })
    }
}

/// Output X-flip table of every single-qubit Pauli on every data qubit.
fn output_flips(c: &CheckedCircuit) -> Vec<[bool; 4]> {
    let n = c.n_data;
    (0..n)
        .map(|j| {
            let mut row = [false; 4];
            for (p, slot) in row.iter_mut().enumerate() {
                let mut ps = PauliString::identity(n);
                ps.set_bits(j, p & 1 == 1, p & 2 == 2);
                for g in &c.payload {
                    g.conjugate_pauli(&mut ps);
                }
                *slot = !ps.x_part().is_identity();
            }
            row
        })
        .collect()
}

/// Payload gates as they run in the circuit, plus idling of data qubits
/// before their measurement.
fn payload_gates(c: &CheckedCircuit) -> Vec<Gate> {
    c.gates
        .iter()
        .zip(&c.segments)
        .filter(|(g, s)| {
            **s == Segment::Payload
                || (**s == Segment::Readout && g.kind == GateKind::DELAY && matches!(c.final_roles[g.q0()], Role::Data(_)))
        })
        .map(|(g, _)| g.clone())
        .collect()
}

/// Checks ordered from the innermost outwards: the one whose left side
/// starts last comes first.
pub fn nesting_order(c: &CheckedCircuit) -> Result<Vec<usize>> {
    let mut start = vec![None; c.n_check];
    for e in &c.elements {
        if e.side == Side::Left && e.check < c.n_check && !matches!(e.kind, ElementKind::CrossSwap { .. }) {
            let first = *e.gates.first().unwrap_or(&0);
            let s: &mut Option<usize> = &mut start[e.check];
            *s = Some(s.map_or(first, |v: usize| v.min(first)));
        }
    }
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(c.n_check);
    for (k, s) in start.iter().enumerate() {
        match s {
            Some(s) => order.push((*s, k)),
            None => return invalid(format!("check {k} has no tagged elements")),
        }
    }
    order.sort_by(|a, b| b.cmp(a));
    Ok(order.into_iter().map(|(_, k)| k).collect())
}

/// Evaluates the model on a compiled (optionally scheduled) circuit.
pub fn extended_model(c: &CheckedCircuit, noise: &NoiseModel, opts: &ExtendedOptions) -> Result<ExtendedModel> {
    if c.kind == CheckKind::ReadoutRepetition {
        return invalid("repetition readout is covered by the readout model");
    }
    if c.n_check > 0 && c.elements.is_empty() {
        return invalid("circuit carries no check elements");
    }
    if c.element_of.len() != c.gates.len() || c.segments.len() != c.gates.len() {
        return invalid("circuit is missing segment tags");
    }
    let nm = noise.scaled()?;
    let (eps_pl, bounds) = match opts.payload_error {
        PayloadError::Value(v) => (v, None),
        src => {
            let one_sided = c.kind == CheckKind::OneSided;
            let so = SummaryOptions {
                max_group: opts.group,
                x_only: one_sided,
                readout_qubits: if one_sided { (0..c.n_data).map(|j| c.data_out(j)).collect() } else { Vec::new() },
            };
            let (l, u) = payload_bounds(&summarize_payload(&payload_gates(c), &nm, &so)?)?;
            let eps = if src == PayloadError::UpperBound { 1.0 - l } else { 1.0 - u };
            (eps.clamp(0.0, 1.0), Some((l, u)))
        }
    };
    let flips_output = (c.kind == CheckKind::OneSided).then(|| output_flips(c));
    let mut outcomes = Vec::with_capacity(c.n_check);
    for k in nesting_order(c)? {
        let ctx = CheckContext { c, nm: &nm, k, rule: opts.rule, flips_output: flips_output.clone() };
        outcomes.push(ctx.outcome()?);
    }
    let mut s = ExtendedState::initial(eps_pl)?;
    let point = |checks, s: &ExtendedState| CurvePoint { checks, postselect: s.postselect(), logical_error: s.logical_error() };
    let mut curve = vec![point(0, &s)];
    for (j, o) in outcomes.iter().enumerate() {
        s = s.step(o);
        curve.push(point(j + 1, &s));
    }
    Ok(ExtendedModel { eps_pl, bounds, outcomes, curve })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::CheckSet;
    use crate::compile::{compile_all_to_all, compile_lnn};
    use crate::tableau::CliffordTableau;

    fn two_sided(n: usize, lefts: &[&str], flags: bool) -> CheckSet {
        let payload = CliffordTableau::identity(n);
        let lefts = lefts.iter().map(|s| s.parse::<PauliString>().unwrap()).collect();
        CheckSet::two_sided(payload, lefts).unwrap().with_flags(flags).unwrap()
    }

    #[test]
    fn noiseless_checks_keep_payload_error() {
        let c = compile_all_to_all(&two_sided(3, &["XZY", "ZZI"], true)).unwrap();
        let opts = ExtendedOptions { payload_error: PayloadError::Value(0.4), ..Default::default() };
        let m = extended_model(&c, &NoiseModel::noiseless(), &opts).unwrap();
        assert_eq!(m.curve[0].logical_error, Some(0.4));
        assert!((m.curve[1].postselect - 0.8).abs() < 1e-15);
        assert!((m.curve[1].logical_error.unwrap() - 0.25).abs() < 1e-15);
        assert!((m.curve[2].logical_error.unwrap() - 0.2 / 1.4).abs() < 1e-15);
    }

    #[test]
    fn single_gate_flip_fraction() {
        let c = compile_all_to_all(&two_sided(1, &["X"], false)).unwrap();
        let eps = 0.03;
        let opts = ExtendedOptions { payload_error: PayloadError::Value(0.0), ..Default::default() };
        let m = extended_model(&c, &NoiseModel::uniform_depolarizing(eps).unwrap(), &opts).unwrap();
        let r = crate::models::check_rates(2, eps).unwrap();
        let o = m.outcomes[0].probs[0];
        assert!((o[0][1] + o[1][1] - r.t_d).abs() < 1e-12);
        assert!((o[0][0] - r.t_ok).abs() < 1e-12);
    }

    #[test]
    fn segment_states_stay_normalised() {
        for c in [
            compile_all_to_all(&two_sided(3, &["XZY", "ZZI", "YII"], true)).unwrap(),
            compile_lnn(&two_sided(3, &["XZY", "ZZI", "YII"], true)).unwrap(),
        ] {
            let mut nm = NoiseModel::uniform_depolarizing(0.02).unwrap();
            nm.set_readout_default(0.01).unwrap();
            for rule in [DataErrorRule::Pessimistic, DataErrorRule::Tracked] {
                let m = extended_model(&c, &nm, &ExtendedOptions { rule, ..Default::default() }).unwrap();
                for o in &m.outcomes {
                    for e in 0..2 {
                        let t: f64 = o.probs[e].iter().flatten().sum();
                        assert!((t - 1.0).abs() < 1e-9);
                    }
                }
                assert_eq!(m.curve.len(), 4);
                assert!(m.curve.windows(2).all(|w| w[1].postselect <= w[0].postselect + 1e-15));
            }
        }
    }
}

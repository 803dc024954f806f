//! Gate alphabet, Pauli conjugation rules and the circuit text format.
//!
//! Text format, one gate per line: `KIND q0 [q1] [@start_ns] [#duration_ns]`.
//! A `#` that is not immediately followed by a number starts a comment.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::pauli::PauliString;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    Sdg,
    X,
    Y,
    Z,
    CX,
    CZ,
    SWAP,
    DELAY,
    MEASURE,
    BARRIER,
}

impl GateKind {
    pub const ALL: [GateKind; 12] = [
        GateKind::H,
        GateKind::S,
        GateKind::Sdg,
        GateKind::X,
        GateKind::Y,
        GateKind::Z,
        GateKind::CX,
        GateKind::CZ,
        GateKind::SWAP,
        GateKind::DELAY,
        GateKind::MEASURE,
        GateKind::BARRIER,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sdg => "SDG",
            GateKind::X => "X",
            GateKind::Y => "Y",
            GateKind::Z => "Z",
            GateKind::CX => "CX",
            GateKind::CZ => "CZ",
            GateKind::SWAP => "SWAP",
            GateKind::DELAY => "DELAY",
            GateKind::MEASURE => "MEASURE",
            GateKind::BARRIER => "BARRIER",
        }
    }

    /// Number of qubits a gate of this kind acts on; `None` for barriers,
    /// which accept one or two.
    pub fn arity(self) -> Option<usize> {
        match self {
            GateKind::CX | GateKind::CZ | GateKind::SWAP => Some(2),
            GateKind::BARRIER => None,
            _ => Some(1),
        }
    }

    pub fn is_two_qubit(self) -> bool {
        self.arity() == Some(2)
    }

    /// Unitary Clifford gates (everything except delays, barriers and
    /// measurements).
    pub fn is_unitary(self) -> bool {
        !matches!(self, GateKind::DELAY | GateKind::MEASURE | GateKind::BARRIER)
    }

    pub fn inverse(self) -> GateKind {
        match self {
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            k => k,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let k = match s.to_ascii_uppercase().as_str() {
            "H" => GateKind::H,
            "S" => GateKind::S,
            "SDG" | "SDAG" | "SD" => GateKind::Sdg,
            "X" => GateKind::X,
            "Y" => GateKind::Y,
            "Z" => GateKind::Z,
            "CX" | "CNOT" => GateKind::CX,
            "CZ" => GateKind::CZ,
            "SWAP" => GateKind::SWAP,
            "DELAY" => GateKind::DELAY,
            "MEASURE" | "M" => GateKind::MEASURE,
            "BARRIER" => GateKind::BARRIER,
            _ => return invalid(format!("unknown gate kind '{s}'")),
        };
        Ok(k)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    qubits: [usize; 2],
    arity: u8,
    /// Duration in ns.
    pub duration: f64,
    /// Start time in ns, assigned by the scheduler.
    pub start: Option<f64>,
}

impl Gate {
    pub fn new(kind: GateKind, qubits: &[usize]) -> Result<Gate> {
        let ok = match kind.arity() {
            Some(a) => qubits.len() == a,
            None => (1..=2).contains(&qubits.len()),
        };
        if !ok {
            return invalid(format!("{kind} takes {:?} qubits, got {}", kind.arity(), qubits.len()));
        }
        if qubits.len() == 2 && qubits[0] == qubits[1] {
            return invalid(format!("{kind} needs distinct qubits, got {} twice", qubits[0]));
        }
        let mut q = [usize::MAX; 2];
        q[..qubits.len()].copy_from_slice(qubits);
        Ok(Gate { kind, qubits: q, arity: qubits.len() as u8, duration: 0.0, start: None })
    }

    /// Single-qubit gate; panics on a two-qubit kind.
    pub fn one(kind: GateKind, q: usize) -> Gate {
        Gate::new(kind, &[q]).expect("single-qubit gate")
    }

    /// Two-qubit gate; panics on equal qubits or a single-qubit kind.
    pub fn two(kind: GateKind, a: usize, b: usize) -> Gate {
        Gate::new(kind, &[a, b]).expect("two-qubit gate")
    }

    pub fn h(q: usize) -> Gate {
        Gate::one(GateKind::H, q)
    }

    pub fn cx(c: usize, t: usize) -> Gate {
        Gate::two(GateKind::CX, c, t)
    }

    pub fn measure(q: usize) -> Gate {
        Gate::one(GateKind::MEASURE, q)
    }

    pub fn delay(q: usize, duration: f64) -> Result<Gate> {
        if !(duration > 0.0) {
            return invalid(format!("delay on qubit {q} needs a positive duration, got {duration}"));
        }
        let mut g = Gate::one(GateKind::DELAY, q);
        g.duration = duration;
        Ok(g)
    }

    pub fn with_duration(mut self, duration: f64) -> Gate {
        self.duration = duration;
        self
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits[..self.arity as usize]
    }

    pub fn q0(&self) -> usize {
        self.qubits[0]
    }

    pub fn q1(&self) -> usize {
        self.qubits[1]
    }

    pub fn is_two_qubit(&self) -> bool {
        self.arity == 2
    }

    pub fn max_qubit(&self) -> usize {
        self.qubits().iter().copied().max().unwrap_or(0)
    }

    /// The inverse gate (same qubits and timing).
    pub fn inverse(&self) -> Gate {
        Gate { kind: self.kind.inverse(), ..self.clone() }
    }

    /// Same gate with qubit indices passed through `map`.
    pub fn remapped(&self, map: impl Fn(usize) -> usize) -> Gate {
        let mut g = self.clone();
        for i in 0..g.arity as usize {
            g.qubits[i] = map(g.qubits[i]);
        }
        g
    }

    /// Replaces `p` by `G p G†`. Delays, barriers and measurements leave `p`
    /// unchanged.
    pub fn conjugate_pauli(&self, p: &mut PauliString) {
        let q = self.qubits[0];
        match self.kind {
            GateKind::H => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                p.set_bits(q, z, x);
            }
            GateKind::S => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && z {
                    p.add_phase(2);
                }
                p.set_bits(q, x, z ^ x);
            }
            GateKind::Sdg => {
                let (x, z) = (p.x_bit(q), p.z_bit(q));
                if x && !z {
                    p.add_phase(2);
                }
                p.set_bits(q, x, z ^ x);
            }
            GateKind::X => {
                if p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            GateKind::Z => {
                if p.x_bit(q) {
                    p.add_phase(2);
                }
            }
            GateKind::Y => {
                if p.x_bit(q) ^ p.z_bit(q) {
                    p.add_phase(2);
                }
            }
            GateKind::CX => conjugate_cx(p, q, self.qubits[1]),
            GateKind::CZ => {
                let t = self.qubits[1];
                let h = Gate::h(t);
                h.conjugate_pauli(p);
                conjugate_cx(p, q, t);
                h.conjugate_pauli(p);
            }
            GateKind::SWAP => {
                let t = self.qubits[1];
                let (xa, za) = (p.x_bit(q), p.z_bit(q));
                let (xb, zb) = (p.x_bit(t), p.z_bit(t));
                p.set_bits(q, xb, zb);
                p.set_bits(t, xa, za);
            }
            GateKind::DELAY | GateKind::MEASURE | GateKind::BARRIER => {}
        }
    }
}

fn conjugate_cx(p: &mut PauliString, c: usize, t: usize) {
    let (xc, zc) = (p.x_bit(c), p.z_bit(c));
    let (xt, zt) = (p.x_bit(t), p.z_bit(t));
    if xc && zt && !(xt ^ zc) {
        p.add_phase(2);
    }
    p.set_bits(t, xt ^ xc, zt);
    p.set_bits(c, xc, zc ^ zt);
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind)?;
        for q in self.qubits() {
            write!(f, " {q}")?;
        }
        if let Some(s) = self.start {
            write!(f, " @{s}")?;
        }
        if self.duration > 0.0 {
            write!(f, " #{}", self.duration)?;
        }
        Ok(())
    }
}

fn parse_line(line: &str) -> Result<Option<Gate>> {
    let mut tokens = Vec::new();
    for tok in line.split_whitespace() {
        if let Some(rest) = tok.strip_prefix('#') {
            if !rest.starts_with(|c: char| c.is_ascii_digit() || c == '.') {
                break;
            }
        }
        tokens.push(tok);
    }
    let Some((&head, rest)) = tokens.split_first() else {
        return Ok(None);
    };
    let kind: GateKind = head.parse()?;
    let mut qubits = Vec::new();
    let mut start = None;
    let mut duration = None;
    for &tok in rest {
        if let Some(v) = tok.strip_prefix('@') {
            start = Some(parse_time(v, "start time")?);
        } else if let Some(v) = tok.strip_prefix('#') {
            duration = Some(parse_time(v, "duration")?);
        } else {
            if start.is_some() || duration.is_some() {
                return invalid(format!("qubit index '{tok}' after timing fields"));
            }
            let q = tok.parse::<usize>().map_err(|_| Error::InvalidArgument(format!("bad qubit index '{tok}'")))?;
            qubits.push(q);
        }
    }
    let mut g = Gate::new(kind, &qubits)?;
    g.start = start;
    if let Some(d) = duration {
        g.duration = d;
    }
    if kind == GateKind::DELAY && !(g.duration > 0.0) {
        return invalid("DELAY needs a positive duration (#ns)");
    }
    Ok(Some(g))
}

fn parse_time(v: &str, what: &str) -> Result<f64> {
    match v.parse::<f64>() {
        Ok(t) if t.is_finite() && t >= 0.0 => Ok(t),
        _ => invalid(format!("bad {what} '{v}'")),
    }
}

/// Parses the circuit text format; errors carry 1-based line numbers.
pub fn parse_circuit(text: &str) -> Result<Vec<Gate>> {
    let mut gates = Vec::new();
    for (i, line) in text.lines().enumerate() {
        match parse_line(line) {
            Ok(Some(g)) => gates.push(g),
            Ok(None) => {}
            Err(Error::InvalidArgument(msg)) => return Err(Error::Parse { line: i + 1, msg }),
            Err(e) => return Err(e),
        }
    }
    Ok(gates)
}

pub fn write_circuit(gates: &[Gate]) -> String {
    let mut out = String::new();
    for g in gates {
        out.push_str(&g.to_string());
        out.push('\n');
    }
    out
}

/// Number of qubits touched, i.e. one more than the largest index.
pub fn circuit_width(gates: &[Gate]) -> usize {
    gates.iter().map(|g| g.max_qubit() + 1).max().unwrap_or(0)
}

pub fn count_kind(gates: &[Gate], kind: GateKind) -> usize {
    gates.iter().filter(|g| g.kind == kind).count()
}

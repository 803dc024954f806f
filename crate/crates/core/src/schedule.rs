//! As-soon-as-possible scheduling with explicit idle delays.

use crate::compile::CheckedCircuit;
use crate::error::{invalid, Result};
use crate::gate::{Gate, GateKind};

/// Per-kind gate durations in ns.
#[derive(Clone, Debug, PartialEq)]
pub struct Durations {
    ns: [f64; 12],
}

impl Default for Durations {
    /// Typical superconducting-hardware timings.
    fn default() -> Self {
        let mut d = Durations { ns: [0.0; 12] };
        for k in [GateKind::H, GateKind::S, GateKind::Sdg, GateKind::X, GateKind::Y, GateKind::Z] {
            d.set(k, 35.0);
        }
        d.set(GateKind::CX, 300.0);
        d.set(GateKind::CZ, 300.0);
        d.set(GateKind::SWAP, 900.0);
        d.set(GateKind::MEASURE, 1000.0);
        d
    }
}

impl Durations {
    pub fn get(&self, kind: GateKind) -> f64 {
        self.ns[kind as usize]
    }

    pub fn set(&mut self, kind: GateKind, ns: f64) {
        self.ns[kind as usize] = ns;
    }
}

const EPS: f64 = 1e-9;

/// Assigns start times in gate order, each gate starting once all its qubits
/// are free, and inserts a DELAY wherever a qubit idles between two of its
/// operations. Delays inherit the segment and element of the gate that ends
/// the idle period. Existing DELAY gates keep their own duration; barriers
/// synchronise their qubits without taking time.
pub fn schedule(c: &CheckedCircuit, durations: &Durations) -> Result<CheckedCircuit> {
    for k in GateKind::ALL {
        let d = durations.get(k);
        if !(d >= 0.0) || !d.is_finite() {
            return invalid(format!("duration of {k} must be finite and nonnegative, got {d}"));
        }
    }
    let nq = c.n_qubits();
    let mut free = vec![0.0f64; nq];
    let mut busy = vec![false; nq];
    let mut out = c.clone();
    out.gates.clear();
    out.segments.clear();
    out.element_of.clear();
    for e in &mut out.elements {
        e.gates.clear();
    }
    let mut new_index = Vec::with_capacity(c.gates.len());

    let emit = |out: &mut CheckedCircuit, g: Gate, i: usize| {
        let idx = out.gates.len();
        out.gates.push(g);
        out.segments.push(c.segments[i]);
        out.element_of.push(c.element_of[i]);
        if let Some(e) = c.element_of[i] {
            out.elements[e].gates.push(idx);
        }
        idx
    };

    for (i, g) in c.gates.iter().enumerate() {
        let qs = g.qubits();
        let start = qs.iter().map(|&q| free[q]).fold(0.0, f64::max);
        if g.kind == GateKind::BARRIER {
            for &q in qs {
                free[q] = start;
            }
            let mut g = g.clone();
            g.start = Some(start);
            g.duration = 0.0;
            new_index.push(emit(&mut out, g, i));
            continue;
        }
        for &q in qs {
            if busy[q] && start > free[q] + EPS {
                let mut d = Gate::delay(q, start - free[q])?;
                d.start = Some(free[q]);
                emit(&mut out, d, i);
            }
        }
        let mut g = g.clone();
        if g.kind != GateKind::DELAY {
            g.duration = durations.get(g.kind);
        }
        g.start = Some(start);
        for &q in qs {
            free[q] = start + g.duration;
            busy[q] = true;
        }
        new_index.push(emit(&mut out, g, i));
    }
    for m in &mut out.measurements {
        m.gate = new_index[m.gate];
    }
    out.scheduled = true;
    Ok(out)
}

/// End time of the last gate.
pub fn makespan(c: &CheckedCircuit) -> f64 {
    c.gates.iter().map(|g| g.start.unwrap_or(0.0) + g.duration).fold(0.0, f64::max)
}

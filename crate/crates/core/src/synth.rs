//! Gate-level synthesis of Clifford tableaus using nearest-neighbour CX.

use crate::gate::{Gate, GateKind};
use crate::tableau::CliffordTableau;

struct Reducer {
    t: CliffordTableau,
    ops: Vec<Gate>,
}

impl Reducer {
    fn push(&mut self, g: Gate) {
        self.t.apply_gate(&g).expect("gate within range");
        self.ops.push(g);
    }

    fn x_row(&self, i: usize) -> &crate::pauli::PauliString {
        self.t.x_image(i)
    }

    fn z_row(&self, i: usize) -> &crate::pauli::PauliString {
        self.t.z_image(i)
    }

    /// Turns every factor of `row` on qubits `from..` into X or I.
    fn make_x_type(&mut self, row: usize, from: usize) {
        let n = self.t.n();
        for j in from..n {
            let r = &self.t.rows()[row];
            match (r.x_bit(j), r.z_bit(j)) {
                (false, true) => self.push(Gate::h(j)),
                (true, true) => self.push(Gate::one(GateKind::S, j)),
                _ => {}
            }
        }
    }

    /// Folds the X support of `row` on qubits `to..` onto qubit `to` with
    /// nearest-neighbour CX gates.
    fn gather(&mut self, row: usize, to: usize) {
        let n = self.t.n();
        for j in ((to + 1)..n).rev() {
            let r = &self.t.rows()[row];
            if r.x_bit(j) {
                if !r.x_bit(j - 1) {
                    self.push(Gate::cx(j, j - 1));
                }
                self.push(Gate::cx(j - 1, j));
            }
        }
    }
}

/// Gate list whose tableau equals `t`, using H, S, Sdg, X, Z and CX on
/// adjacent qubits only.
pub fn synthesize(t: &CliffordTableau) -> Vec<Gate> {
    let n = t.n();
    let mut r = Reducer { t: t.clone(), ops: Vec::new() };
    // Left-multiply by gates until the tableau is the identity; the circuit
    // is then the reversed list of inverses.
    for i in 0..n {
        r.make_x_type(i, i);
        r.gather(i, i);
        debug_assert!(r.x_row(i).x_bit(i) && r.x_row(i).weight() == 1);

        let zr = n + i;
        r.make_x_type(zr, i + 1);
        if i + 1 < n {
            r.gather(zr, i + 1);
            if r.z_row(i).x_bit(i + 1) {
                r.push(Gate::h(i + 1));
                r.push(Gate::cx(i + 1, i));
            }
        }
        if r.z_row(i).x_bit(i) {
            // Y -> Z while keeping X fixed.
            r.push(Gate::h(i));
            r.push(Gate::one(GateKind::S, i));
            r.push(Gate::h(i));
        }
        if r.x_row(i).phase() == 2 {
            r.push(Gate::one(GateKind::Z, i));
        }
        if r.z_row(i).phase() == 2 {
            r.push(Gate::one(GateKind::X, i));
        }
    }
    debug_assert_eq!(r.t, CliffordTableau::identity(n));
    r.ops.iter().rev().map(Gate::inverse).collect()
}

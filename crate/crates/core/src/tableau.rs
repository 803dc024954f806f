//! Clifford maps as images of the Pauli generators.

use std::fmt;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::gate::Gate;
use crate::pauli::{Pauli, PauliString};

/// Rows `0..n` hold `U X_i U†`, rows `n..2n` hold `U Z_i U†`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CliffordTableau {
    n: usize,
    rows: Vec<PauliString>,
}

impl CliffordTableau {
    pub fn identity(n: usize) -> Self {
        let mut rows = Vec::with_capacity(2 * n);
        for i in 0..n {
            rows.push(PauliString::single(n, i, Pauli::X));
        }
        for i in 0..n {
            rows.push(PauliString::single(n, i, Pauli::Z));
        }
        Self { n, rows }
    }

    /// Builds a tableau from generator images, validating the symplectic
    /// conditions and Hermiticity.
    pub fn from_rows(rows: Vec<PauliString>) -> Result<Self> {
        if !rows.len().is_multiple_of(2) {
            return invalid("tableau needs an even number of rows");
        }
        let n = rows.len() / 2;
        for r in &rows {
            if r.n() != n {
                return Err(Error::Dimension { expected: n, found: r.n() });
            }
        }
        let t = Self { n, rows };
        if !t.is_symplectic() {
            return invalid("rows violate the symplectic conditions");
        }
        if t.rows.iter().any(|r| r.phase() % 2 == 1) {
            return invalid("rows must be Hermitian (phase 0 or 2)");
        }
        Ok(t)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[PauliString] {
        &self.rows
    }

    pub fn x_image(&self, i: usize) -> &PauliString {
        &self.rows[i]
    }

    pub fn z_image(&self, i: usize) -> &PauliString {
        &self.rows[self.n + i]
    }

    /// `U X_i U†` anticommutes with `U Z_i U†` and every other pair commutes.
    pub fn is_symplectic(&self) -> bool {
        let m = 2 * self.n;
        for a in 0..m {
            for b in (a + 1)..m {
                let want = b == a + self.n;
                if self.rows[a].anticommutes_unchecked(&self.rows[b]) != want {
                    return false;
                }
            }
        }
        true
    }

    fn debug_check(&self) {
        debug_assert!(self.n > 24 || self.is_symplectic(), "tableau lost the symplectic invariant");
    }

    /// `U p U†` with exact phase.
    pub fn conjugate(&self, p: &PauliString) -> Result<PauliString> {
        if p.n() != self.n {
            return Err(Error::Dimension { expected: self.n, found: p.n() });
        }
        Ok(self.conjugate_unchecked(p))
    }

    pub(crate) fn conjugate_unchecked(&self, p: &PauliString) -> PauliString {
        // p = i^(phase + #Y) Π_j X_j^x_j Z_j^z_j, so its image is the ordered
        // product of the corresponding row images.
        let mut out = PauliString::identity(self.n);
        let mut ph = p.phase() as u32;
        for j in 0..self.n {
            let (x, z) = (p.x_bit(j), p.z_bit(j));
            if x && z {
                ph += 1;
            }
            if x {
                out.mul_assign_unchecked(&self.rows[j]);
            }
            if z {
                out.mul_assign_unchecked(&self.rows[self.n + j]);
            }
        }
        out.add_phase(ph);
        out
    }

    /// Tableau of `outer ∘ self`, i.e. `self` applied first.
    pub fn then(&self, outer: &CliffordTableau) -> Result<CliffordTableau> {
        if outer.n != self.n {
            return Err(Error::Dimension { expected: self.n, found: outer.n });
        }
        let rows = self.rows.iter().map(|r| outer.conjugate_unchecked(r)).collect();
        let t = CliffordTableau { n: self.n, rows };
        t.debug_check();
        Ok(t)
    }

    /// Inverse map; `conjugate(inverse(t), conjugate(t, p)) == p`.
    pub fn inverse(&self) -> CliffordTableau {
        let n = self.n;
        let mut rows = Vec::with_capacity(2 * n);
        // Binary part is the symplectic inverse: the preimage of X_j has
        // x_i = [Z_i image].z_j and z_i = [X_i image].z_j, and similarly for Z_j.
        for block in 0..2 {
            for j in 0..n {
                let mut p = PauliString::identity(n);
                for i in 0..n {
                    let a = &self.rows[i];
                    let b = &self.rows[n + i];
                    let (x, z) = if block == 0 { (b.z_bit(j), a.z_bit(j)) } else { (b.x_bit(j), a.x_bit(j)) };
                    p.set_bits(i, x, z);
                }
                let target = if block == 0 { Pauli::X } else { Pauli::Z };
                let img = self.conjugate_unchecked(&p);
                debug_assert_eq!(img.unsigned(), PauliString::single(n, j, target));
                p.set_phase((4 - img.phase()) % 4);
                rows.push(p);
            }
        }
        let t = CliffordTableau { n, rows };
        t.debug_check();
        t
    }

    /// Conjugates every row by `g`, i.e. appends `g` to the circuit.
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        if !g.kind.is_unitary() {
            return Ok(());
        }
        if g.max_qubit() >= self.n {
            return invalid(format!("gate {g} exceeds {} qubits", self.n));
        }
        for r in &mut self.rows {
            g.conjugate_pauli(r);
        }
        Ok(())
    }

    /// Relabels qubits: the result acts on qubit `perm[i]` as `self` acts on `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<CliffordTableau> {
        if perm.len() != self.n {
            return Err(Error::Dimension { expected: self.n, found: perm.len() });
        }
        let map = |p: &PauliString| {
            let mut out = PauliString::identity(self.n).with_phase(p.phase());
            for i in 0..self.n {
                out.set_bits(perm[i], p.x_bit(i), p.z_bit(i));
            }
            out
        };
        let mut rows = vec![PauliString::identity(self.n); 2 * self.n];
        for i in 0..self.n {
            rows[perm[i]] = map(&self.rows[i]);
            rows[self.n + perm[i]] = map(&self.rows[self.n + i]);
        }
        CliffordTableau::from_rows(rows)
    }
}

impl fmt::Display for CliffordTableau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            writeln!(f, "X{i} -> {}", self.rows[i])?;
        }
        for i in 0..self.n {
            writeln!(f, "Z{i} -> {}", self.rows[self.n + i])?;
        }
        Ok(())
    }
}

/// `U p U†`.
pub fn conjugate(t: &CliffordTableau, p: &PauliString) -> Result<PauliString> {
    t.conjugate(p)
}

pub fn inverse(t: &CliffordTableau) -> CliffordTableau {
    t.inverse()
}

/// Tableau of `outer ∘ inner`.
pub fn compose(outer: &CliffordTableau, inner: &CliffordTableau) -> Result<CliffordTableau> {
    inner.then(outer)
}

/// Tableau of the circuit on `n` qubits. Delays, barriers and measurements
/// are skipped.
pub fn apply_circuit(n: usize, gates: &[Gate]) -> Result<CliffordTableau> {
    let mut t = CliffordTableau::identity(n);
    for g in gates {
        t.apply_gate(g)?;
    }
    t.debug_check();
    Ok(t)
}

/// Strict variant of [`apply_circuit`] that rejects non-unitary gates.
pub fn apply_unitary_circuit(n: usize, gates: &[Gate]) -> Result<CliffordTableau> {
    if let Some(g) = gates.iter().find(|g| !g.kind.is_unitary()) {
        return Err(Error::UnsupportedGate(g.kind.to_string()));
    }
    apply_circuit(n, gates)
}

type BitVec = (Vec<u64>, Vec<u64>);

fn bv_xor(a: &mut BitVec, b: &BitVec) {
    for i in 0..a.0.len() {
        a.0[i] ^= b.0[i];
        a.1[i] ^= b.1[i];
    }
}

fn bv_form(a: &BitVec, b: &BitVec) -> bool {
    let mut acc = 0u32;
    for i in 0..a.0.len() {
        acc ^= ((a.0[i] & b.1[i]) ^ (a.1[i] & b.0[i])).count_ones();
    }
    acc & 1 == 1
}

fn bv_is_zero(a: &BitVec) -> bool {
    a.0.iter().all(|&w| w == 0) && a.1.iter().all(|&w| w == 0)
}

fn bv_lead(a: &BitVec) -> Option<usize> {
    let w = a.0.len();
    for i in 0..w {
        if a.0[i] != 0 {
            return Some(i * 64 + a.0[i].trailing_zeros() as usize);
        }
    }
    for i in 0..w {
        if a.1[i] != 0 {
            return Some((w + i) * 64 + a.1[i].trailing_zeros() as usize);
        }
    }
    None
}

fn bv_bit(a: &BitVec, pos: usize) -> bool {
    let w = a.0.len();
    let (v, p) = if pos < w * 64 { (&a.0, pos) } else { (&a.1, pos - w * 64) };
    (v[p >> 6] >> (p & 63)) & 1 == 1
}

fn random_combination<R: Rng + ?Sized>(basis: &[BitVec], rng: &mut R) -> BitVec {
    let w = basis[0].0.len();
    let mut v = (vec![0; w], vec![0; w]);
    for b in basis {
        if rng.random::<bool>() {
            bv_xor(&mut v, b);
        }
    }
    v
}

/// Keeps a linearly independent subset spanning the same space.
fn independent_subset(vs: Vec<BitVec>) -> Vec<BitVec> {
    let mut reduced: Vec<(usize, BitVec)> = Vec::new();
    let mut keep = Vec::new();
    for v in vs {
        let mut r = v.clone();
        for (lead, b) in &reduced {
            if bv_bit(&r, *lead) {
                bv_xor(&mut r, b);
            }
        }
        if let Some(lead) = bv_lead(&r) {
            reduced.push((lead, r));
            keep.push(v);
        }
    }
    keep
}

/// Exactly uniform random Clifford (modulo global phase).
///
/// Generator images are drawn one pair at a time: a uniform nonzero vector
/// `v` from the symplectic complement of the pairs chosen so far, then a
/// uniform `w` in that complement with `<v, w> = 1`. Every symplectic matrix
/// arises from exactly one sequence of choices, and independent uniform sign
/// bits complete the Clifford.
pub fn random_clifford<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<CliffordTableau> {
    if n == 0 {
        return invalid("random_clifford needs at least one qubit");
    }
    let w = crate::pauli::words_for(n);
    let mut basis: Vec<BitVec> = Vec::with_capacity(2 * n);
    for block in 0..2 {
        for q in 0..n {
            let mut v = (vec![0u64; w], vec![0u64; w]);
            let target = if block == 0 { &mut v.0 } else { &mut v.1 };
            target[q >> 6] |= 1 << (q & 63);
            basis.push(v);
        }
    }
    let mut xs = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    for _ in 0..n {
        let v = loop {
            let v = random_combination(&basis, rng);
            if !bv_is_zero(&v) {
                break v;
            }
        };
        let u = loop {
            let u = random_combination(&basis, rng);
            if bv_form(&v, &u) {
                break u;
            }
        };
        let projected: Vec<BitVec> = basis
            .iter()
            .map(|b| {
                let mut p = b.clone();
                if bv_form(b, &u) {
                    bv_xor(&mut p, &v);
                }
                if bv_form(b, &v) {
                    bv_xor(&mut p, &u);
                }
                p
            })
            .collect();
        basis = independent_subset(projected);
        xs.push(v);
        zs.push(u);
    }
    let mut rows = Vec::with_capacity(2 * n);
    for (x, z) in xs.into_iter().chain(zs) {
        let sign = if rng.random::<bool>() { 2 } else { 0 };
        rows.push(PauliString::from_words(n, x, z, sign));
    }
    let t = CliffordTableau { n, rows };
    t.debug_check();
    Ok(t)
}

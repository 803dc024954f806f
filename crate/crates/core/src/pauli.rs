//! Pauli operators in binary symplectic form.
//!
//! A [`PauliString`] on `n` qubits stores X-bits, Z-bits and a phase exponent
//! so that the operator is `i^phase * σ(x_0,z_0) ⊗ … ⊗ σ(x_{n-1},z_{n-1})`,
//! where `σ(1,1) = Y`. With this convention a phase of 0 or 2 gives a
//! Hermitian operator. Bits are packed into 64-bit words.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{invalid, Error, Result};

pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

/// Single-qubit Pauli label, ordered as I, X, Y, Z (the label index order
/// used by channels and enumeration).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i & 3]
    }

    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_symbol(c: char) -> Option<Pauli> {
        match c {
            'I' | '_' => Some(Pauli::I),
            'X' | 'x' => Some(Pauli::X),
            'Y' | 'y' => Some(Pauli::Y),
            'Z' | 'z' => Some(Pauli::Z),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliString {
    n: usize,
    x: Vec<u64>,
    z: Vec<u64>,
    phase: u8,
}

/// Phase exponent picked up when multiplying the packed Paulis `(x1, z1)` by
/// `(x2, z2)` position-wise, as a value mod 4.
#[inline]
pub(crate) fn product_phase_word(x1: u64, z1: u64, x2: u64, z2: u64) -> u32 {
    // XY = iZ, YZ = iX, ZX = iY; the reversed orders pick up -i.
    let plus = (x1 & !z1 & x2 & z2) | (x1 & z1 & !x2 & z2) | (!x1 & z1 & x2 & !z2);
    let minus = (x1 & !z1 & !x2 & z2) | (x1 & z1 & x2 & !z2) | (!x1 & z1 & x2 & z2);
    (plus.count_ones() + 3 * minus.count_ones()) & 3
}

impl PauliString {
    pub fn identity(n: usize) -> Self {
        let w = words_for(n);
        Self { n, x: vec![0; w], z: vec![0; w], phase: 0 }
    }

    /// Pauli with a single non-identity factor `p` on qubit `q`.
    pub fn single(n: usize, q: usize, p: Pauli) -> Self {
        let mut out = Self::identity(n);
        out.set(q, p);
        out
    }

    pub fn from_paulis(ps: &[Pauli]) -> Self {
        let mut out = Self::identity(ps.len());
        for (q, &p) in ps.iter().enumerate() {
            out.set(q, p);
        }
        out
    }

    pub fn from_bits(x: &[bool], z: &[bool]) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension { expected: x.len(), found: z.len() });
        }
        let mut out = Self::identity(x.len());
        for q in 0..x.len() {
            out.set_bits(q, x[q], z[q]);
        }
        Ok(out)
    }

    /// Pauli with index `idx` in base 4, qubit 0 most significant, digits
    /// ordered I, X, Y, Z. Enumerating `0..4^n` visits every sign-free Pauli.
    pub fn from_index(n: usize, idx: u64) -> Self {
        let mut out = Self::identity(n);
        for q in 0..n {
            let d = (idx >> (2 * (n - 1 - q))) & 3;
            out.set(q, Pauli::from_index(d as usize));
        }
        out
    }

    /// Inverse of [`PauliString::from_index`]; ignores the phase.
    pub fn index(&self) -> u64 {
        let mut idx = 0u64;
        for q in 0..self.n {
            idx = (idx << 2) | self.get(q).index() as u64;
        }
        idx
    }

    pub(crate) fn from_words(n: usize, x: Vec<u64>, z: Vec<u64>, phase: u8) -> Self {
        debug_assert_eq!(x.len(), words_for(n));
        debug_assert_eq!(z.len(), words_for(n));
        Self { n, x, z, phase: phase & 3 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn set_phase(&mut self, phase: u8) {
        self.phase = phase & 3;
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.set_phase(phase);
        self
    }

    pub(crate) fn add_phase(&mut self, k: u32) {
        self.phase = ((self.phase as u32 + k) & 3) as u8;
    }

    pub fn x_words(&self) -> &[u64] {
        &self.x
    }

    pub fn z_words(&self) -> &[u64] {
        &self.z
    }

    #[inline]
    pub fn x_bit(&self, q: usize) -> bool {
        (self.x[q >> 6] >> (q & 63)) & 1 == 1
    }

    #[inline]
    pub fn z_bit(&self, q: usize) -> bool {
        (self.z[q >> 6] >> (q & 63)) & 1 == 1
    }

    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x_bit(q), self.z_bit(q))
    }

    #[inline]
    pub fn set_bits(&mut self, q: usize, x: bool, z: bool) {
        let (w, b) = (q >> 6, 1u64 << (q & 63));
        if x {
            self.x[w] |= b;
        } else {
            self.x[w] &= !b;
        }
        if z {
            self.z[w] |= b;
        } else {
            self.z[w] &= !b;
        }
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.set_bits(q, x, z);
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&w| w == 0) && self.z.iter().all(|&w| w == 0)
    }

    pub fn weight(&self) -> usize {
        self.x.iter().zip(&self.z).map(|(a, b)| (a | b).count_ones() as usize).sum()
    }

    pub fn support(&self) -> Vec<usize> {
        (0..self.n).filter(|&q| self.x_bit(q) || self.z_bit(q)).collect()
    }

    pub fn is_z_type(&self) -> bool {
        self.x.iter().all(|&w| w == 0)
    }

    /// Copy with the Z-bits cleared and the phase dropped.
    pub fn x_part(&self) -> Self {
        Self { n: self.n, x: self.x.clone(), z: vec![0; self.z.len()], phase: 0 }
    }

    /// Copy with the X-bits cleared and the phase dropped.
    pub fn z_part(&self) -> Self {
        Self { n: self.n, x: vec![0; self.x.len()], z: self.z.clone(), phase: 0 }
    }

    /// Same Pauli factors with phase 0.
    pub fn unsigned(&self) -> Self {
        Self { phase: 0, ..self.clone() }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::Dimension { expected: self.n, found: other.n });
        }
        Ok(())
    }

    /// Symplectic inner product parity; `true` when the operators anticommute.
    pub(crate) fn anticommutes_unchecked(&self, other: &Self) -> bool {
        let mut acc = 0u32;
        for i in 0..self.x.len() {
            acc ^= ((self.x[i] & other.z[i]) ^ (self.z[i] & other.x[i])).count_ones();
        }
        acc & 1 == 1
    }

    pub fn commutes(&self, other: &Self) -> Result<bool> {
        self.check_dim(other)?;
        Ok(!self.anticommutes_unchecked(other))
    }

    /// In-place right multiplication `self = self * other`.
    pub(crate) fn mul_assign_unchecked(&mut self, other: &Self) {
        let mut ph = self.phase as u32 + other.phase as u32;
        for i in 0..self.x.len() {
            ph += product_phase_word(self.x[i], self.z[i], other.x[i], other.z[i]);
            self.x[i] ^= other.x[i];
            self.z[i] ^= other.z[i];
        }
        self.phase = (ph & 3) as u8;
    }

    /// Operator product `self * other` with exact phase.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.clone();
        out.mul_assign_unchecked(other);
        Ok(out)
    }

    /// Restriction to the listed qubits, in the listed order.
    pub fn restrict(&self, qubits: &[usize]) -> Self {
        let mut out = Self::identity(qubits.len());
        for (i, &q) in qubits.iter().enumerate() {
            out.set_bits(i, self.x_bit(q), self.z_bit(q));
        }
        out
    }

    /// Uniformly random non-identity Pauli with phase 0.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        random_pauli(n, rng)
    }
}

/// `true` iff `p` and `q` commute.
pub fn commutes(p: &PauliString, q: &PauliString) -> Result<bool> {
    p.commutes(q)
}

/// Uniform draw from the `4^n - 1` non-identity sign-free Paulis.
pub fn random_pauli<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<PauliString> {
    if n == 0 {
        return invalid("random_pauli needs at least one qubit");
    }
    let w = words_for(n);
    let mask_last = if n.is_multiple_of(64) { u64::MAX } else { (1u64 << (n % 64)) - 1 };
    loop {
        let mut x: Vec<u64> = (0..w).map(|_| rng.random()).collect();
        let mut z: Vec<u64> = (0..w).map(|_| rng.random()).collect();
        x[w - 1] &= mask_last;
        z[w - 1] &= mask_last;
        let p = PauliString::from_words(n, x, z, 0);
        if !p.is_identity() {
            return Ok(p);
        }
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(prefix)?;
        for q in 0..self.n {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    /// Parses literals such as `XIZY`, `-XZ`, `+iYY` or `-iZ`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, rest) = if let Some(r) = s.strip_prefix("-i") {
            (3, r)
        } else if let Some(r) = s.strip_prefix("+i") {
            (1, r)
        } else if let Some(r) = s.strip_prefix('i') {
            (1, r)
        } else if let Some(r) = s.strip_prefix('-') {
            (2, r)
        } else if let Some(r) = s.strip_prefix('+') {
            (0, r)
        } else {
            (0, s)
        };
        if rest.is_empty() {
            return invalid(format!("empty Pauli literal '{s}'"));
        }
        let mut ps = Vec::with_capacity(rest.len());
        for c in rest.chars() {
            match Pauli::from_symbol(c) {
                Some(p) => ps.push(p),
                None => return invalid(format!("bad Pauli symbol '{c}' in '{s}'")),
            }
        }
        Ok(PauliString::from_paulis(&ps).with_phase(phase))
    }
}

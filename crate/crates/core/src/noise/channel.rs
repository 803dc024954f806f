//! Pauli channels on one or two qubits.
//!
//! Labels are ordered I, X, Y, Z; on two qubits label `4a + b` is `P_a ⊗ P_b`
//! with the first qubit most significant.

use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::gate::Gate;
use crate::pauli::{Pauli, PauliString};

#[derive(Clone, Debug, PartialEq)]
pub struct PauliChannel {
    arity: usize,
    probs: Vec<f64>,
}

/// Label index → (x bits, z bits), qubit 0 in the lowest bit.
pub(crate) fn label_bits(label: usize, arity: usize) -> (u8, u8) {
    let (mut x, mut z) = (0u8, 0u8);
    for q in 0..arity {
        let d = (label >> (2 * (arity - 1 - q))) & 3;
        let (bx, bz) = Pauli::from_index(d).bits();
        x |= (bx as u8) << q;
        z |= (bz as u8) << q;
    }
    (x, z)
}

fn bits_label(x: u8, z: u8, arity: usize) -> usize {
    let mut label = 0;
    for q in 0..arity {
        let p = Pauli::from_bits((x >> q) & 1 == 1, (z >> q) & 1 == 1);
        label = (label << 2) | p.index();
    }
    label
}

fn anticommute(a: usize, b: usize, arity: usize) -> bool {
    let (ax, az) = label_bits(a, arity);
    let (bx, bz) = label_bits(b, arity);
    ((ax & bz) ^ (az & bx)).count_ones() % 2 == 1
}

const SUM_TOL: f64 = 1e-9;

impl PauliChannel {
    /// Validates nonnegativity and normalisation (within 1e-9, then
    /// renormalised exactly).
    pub fn new(arity: usize, probs: Vec<f64>) -> Result<Self> {
        if !(arity == 1 || arity == 2) {
            return invalid(format!("channel arity must be 1 or 2, got {arity}"));
        }
        if probs.len() != 1 << (2 * arity) {
            return invalid(format!("{arity}-qubit channel needs {} probabilities, got {}", 1 << (2 * arity), probs.len()));
        }
        if probs.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return invalid(format!("channel probabilities must be finite and nonnegative: {probs:?}"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOL {
            return invalid(format!("channel probabilities sum to {total}, not 1"));
        }
        let probs = probs.into_iter().map(|p| p / total).collect();
        Ok(Self { arity, probs })
    }

    pub fn identity(arity: usize) -> Self {
        let mut probs = vec![0.0; 1 << (2 * arity)];
        probs[0] = 1.0;
        Self { arity, probs }
    }

    /// Weight `1 − ε` on the identity and `ε / (4^arity − 1)` on every other
    /// label.
    pub fn depolarizing(eps: f64, arity: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&eps) {
            return invalid(format!("depolarizing strength must lie in [0, 1], got {eps}"));
        }
        if !(arity == 1 || arity == 2) {
            return invalid(format!("channel arity must be 1 or 2, got {arity}"));
        }
        let k = (1usize << (2 * arity)) - 1;
        let mut probs = vec![eps / k as f64; k + 1];
        probs[0] = 1.0 - eps;
        Ok(Self { arity, probs })
    }

    /// Single-qubit X flip with probability `p`.
    pub fn bit_flip(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return invalid(format!("flip probability must lie in [0, 1], got {p}"));
        }
        Ok(Self { arity: 1, probs: vec![1.0 - p, p, 0.0, 0.0] })
    }

    /// Pauli-twirled amplitude damping plus dephasing for an idle time of
    /// `t_ns` with relaxation times in µs. A negative Z weight (possible when
    /// `T2 > 2 T1`) is clamped to zero with a warning.
    pub fn thermal(t_ns: f64, t1_us: f64, t2_us: f64) -> Result<Self> {
        if !(t_ns >= 0.0) || !(t1_us > 0.0) || !(t2_us > 0.0) {
            return invalid(format!("thermal channel needs t >= 0, T1 > 0, T2 > 0 (got {t_ns}, {t1_us}, {t2_us})"));
        }
        let e1 = (-t_ns / (1000.0 * t1_us)).exp();
        let e2 = (-t_ns / (1000.0 * t2_us)).exp();
        let px = (1.0 - e1) / 4.0;
        let mut pz = (1.0 + e1 - 2.0 * e2) / 4.0;
        if pz < 0.0 {
            if pz < -1e-15 {
                log::warn!("thermal channel with T1={t1_us} T2={t2_us} gives negative Z weight {pz}; clamped to 0");
            }
            pz = 0.0;
        }
        let pi = (1.0 - 2.0 * px - pz).max(0.0);
        Ok(Self { arity: 1, probs: vec![pi, px, px, pz] })
    }

    /// Product channel `a ⊗ b` of two independent single-qubit channels.
    pub fn tensor(a: &PauliChannel, b: &PauliChannel) -> Result<Self> {
        if a.arity != 1 || b.arity != 1 {
            return invalid("tensor needs two single-qubit channels");
        }
        let mut probs = vec![0.0; 16];
        for i in 0..4 {
            for j in 0..4 {
                probs[4 * i + j] = a.probs[i] * b.probs[j];
            }
        }
        Ok(Self { arity: 2, probs })
    }

    /// Single-qubit channel acting on slot `k` of a two-qubit channel.
    pub fn embed(&self, k: usize) -> Result<Self> {
        if self.arity != 1 || k > 1 {
            return invalid("embed needs a single-qubit channel and slot 0 or 1");
        }
        let id = PauliChannel::identity(1);
        if k == 0 {
            PauliChannel::tensor(self, &id)
        } else {
            PauliChannel::tensor(&id, self)
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, label: usize) -> f64 {
        self.probs[label]
    }

    /// Identity weight.
    pub fn success(&self) -> f64 {
        self.probs[0]
    }

    /// Largest non-identity weight.
    pub fn alpha_max(&self) -> f64 {
        self.probs[1..].iter().copied().fold(0.0, f64::max)
    }

    pub fn error_prob(&self) -> f64 {
        self.probs[1..].iter().sum()
    }

    pub fn is_identity(&self) -> bool {
        self.probs[1..].iter().all(|&p| p == 0.0)
    }

    /// Pauli operator for a label, on `arity` qubits.
    pub fn label_pauli(label: usize, arity: usize) -> PauliString {
        PauliString::from_index(arity, label as u64)
    }

    /// Pauli fidelities `f_b = Σ_a p_a (−1)^{<a,b>}`.
    pub fn fidelities(&self) -> Vec<f64> {
        let d = self.probs.len();
        (0..d)
            .map(|b| {
                (0..d).map(|a| if anticommute(a, b, self.arity) { -self.probs[a] } else { self.probs[a] }).sum()
            })
            .collect()
    }

    /// Inverse of [`PauliChannel::fidelities`]. Fails if a probability is
    /// negative beyond rounding.
    pub fn from_fidelities(arity: usize, f: &[f64]) -> Result<Self> {
        let d = 1usize << (2 * arity);
        if f.len() != d {
            return invalid(format!("expected {d} fidelities, got {}", f.len()));
        }
        let mut probs: Vec<f64> = (0..d)
            .map(|a| (0..d).map(|b| if anticommute(a, b, arity) { -f[b] } else { f[b] }).sum::<f64>() / d as f64)
            .collect();
        if let Some(p) = probs.iter().copied().find(|&p| p < -1e-12) {
            return Err(Error::NegativeChannel(format!("probability {p} from fidelities {f:?}")));
        }
        for p in &mut probs {
            *p = p.max(0.0);
        }
        let total: f64 = probs.iter().sum();
        for p in &mut probs {
            *p /= total;
        }
        Ok(Self { arity, probs })
    }

    /// Channel applying `self` then `other` (labels compose by XOR).
    pub fn compose(&self, other: &PauliChannel) -> Result<Self> {
        if self.arity != other.arity {
            return invalid("cannot compose channels of different arity");
        }
        let d = self.probs.len();
        let mut probs = vec![0.0; d];
        for a in 0..d {
            if self.probs[a] == 0.0 {
                continue;
            }
            let (ax, az) = label_bits(a, self.arity);
            for b in 0..d {
                let (bx, bz) = label_bits(b, self.arity);
                probs[bits_label(ax ^ bx, az ^ bz, self.arity)] += self.probs[a] * other.probs[b];
            }
        }
        Ok(Self { arity: self.arity, probs })
    }

    /// Fidelities raised to `alpha`. `alpha = 2` equals composing the
    /// channel with itself, `alpha = 0` gives the identity.
    pub fn power(&self, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return invalid(format!("scale factor must be nonnegative, got {alpha}"));
        }
        if alpha == 1.0 {
            return Ok(self.clone());
        }
        let f: Vec<f64> = self
            .fidelities()
            .into_iter()
            .map(|v| {
                if alpha == 0.0 {
                    1.0
                } else if v >= 0.0 {
                    v.powf(alpha)
                } else {
                    // Negative fidelities only admit integer powers.
                    let r = alpha.round();
                    if (alpha - r).abs() < 1e-12 {
                        v.powi(r as i32)
                    } else {
                        f64::NAN
                    }
                }
            })
            .collect();
        if f.iter().any(|v| v.is_nan()) {
            return Err(Error::NegativeChannel(format!("fractional power {alpha} of a channel with negative fidelity")));
        }
        Self::from_fidelities(self.arity, &f)
    }

    /// Conjugates every label through `gates`, which act on local qubit
    /// indices `0..arity`: the result describes the same error after the
    /// gates.
    pub fn push_through(&self, gates: &[Gate]) -> Result<Self> {
        if let Some(g) = gates.iter().find(|g| g.max_qubit() >= self.arity) {
            return invalid(format!("gate {g} outside the channel's {} qubits", self.arity));
        }
        let d = self.probs.len();
        let mut probs = vec![0.0; d];
        for a in 0..d {
            if self.probs[a] == 0.0 {
                continue;
            }
            let mut p = Self::label_pauli(a, self.arity);
            for g in gates {
                g.conjugate_pauli(&mut p);
            }
            probs[p.index() as usize] += self.probs[a];
        }
        Ok(Self { arity: self.arity, probs })
    }

    /// Relabels through an arbitrary label map.
    pub fn map_labels(&self, f: impl Fn(usize) -> usize) -> Self {
        let mut probs = vec![0.0; self.probs.len()];
        for (a, &p) in self.probs.iter().enumerate() {
            probs[f(a)] += p;
        }
        Self { arity: self.arity, probs }
    }

    /// Marginal on qubit `k` of a two-qubit channel.
    pub fn marginal(&self, k: usize) -> Result<Self> {
        if self.arity != 2 || k > 1 {
            return invalid("marginal needs a two-qubit channel and slot 0 or 1");
        }
        let mut probs = vec![0.0; 4];
        for (a, &p) in self.probs.iter().enumerate() {
            let l = if k == 0 { a >> 2 } else { a & 3 };
            probs[l] += p;
        }
        Ok(Self { arity: 1, probs })
    }

    /// Two-qubit channel with its qubits exchanged.
    pub fn swapped(&self) -> Self {
        if self.arity == 1 {
            return self.clone();
        }
        self.map_labels(|a| ((a & 3) << 2) | (a >> 2))
    }

    /// Drops the Z-components of every label (X and Y become X, Z becomes I).
    pub fn x_projection(&self) -> Self {
        let arity = self.arity;
        self.map_labels(|a| {
            let (x, _) = label_bits(a, arity);
            bits_label(x, 0, arity)
        })
    }
}

impl fmt::Display for PauliChannel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (a, &p) in self.probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{}:{p}", Self::label_pauli(a, self.arity))?;
        }
        Ok(())
    }
}

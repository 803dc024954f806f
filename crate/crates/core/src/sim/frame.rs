//! Bit-sliced Pauli frames: one bit per shot, `WORDS` words per qubit.

use rand::Rng;

use super::program::{Op, Program};
use crate::pauli::PauliString;

pub(crate) const WORDS: usize = 8;
pub(crate) const LANES: usize = 64 * WORDS;

pub(crate) type Block = [u64; WORDS];

#[derive(Clone, Debug)]
pub(crate) struct Frames {
    pub x: Vec<Block>,
    pub z: Vec<Block>,
    pub bits: Vec<Block>,
}

#[inline]
fn xor(a: &mut Block, b: &Block) {
    for (u, v) in a.iter_mut().zip(b) {
        *u ^= v;
    }
}

#[inline]
fn flip(a: &mut Block, lane: usize) {
    a[lane / 64] ^= 1u64 << (lane % 64);
}

impl Frames {
    pub(crate) fn new(n_qubits: usize, n_bits: usize) -> Frames {
        Frames { x: vec![[0; WORDS]; n_qubits], z: vec![[0; WORDS]; n_qubits], bits: vec![[0; WORDS]; n_bits] }
    }

    /// Multiplies `p` (on all physical qubits) into the frame of `lane`.
    pub(crate) fn inject(&mut self, lane: usize, p: &PauliString) {
        for q in 0..p.n() {
            if p.x_bit(q) {
                flip(&mut self.x[q], lane);
            }
            if p.z_bit(q) {
                flip(&mut self.z[q], lane);
            }
        }
    }

    pub(crate) fn lane(b: &Block, lane: usize) -> bool {
        (b[lane / 64] >> (lane % 64)) & 1 == 1
    }

    /// Runs `ops`; noise is sampled only when `rng` is given.
    pub(crate) fn run<R: Rng + ?Sized>(&mut self, prog: &Program, ops: &[Op], mut rng: Option<&mut R>, lanes: usize) {
        for op in ops {
            match *op {
                Op::H(q) => std::mem::swap(&mut self.x[q], &mut self.z[q]),
                Op::S(q) => {
                    let x = self.x[q];
                    xor(&mut self.z[q], &x);
                }
                Op::Cx(c, t) => {
                    let xc = self.x[c];
                    xor(&mut self.x[t], &xc);
                    let zt = self.z[t];
                    xor(&mut self.z[c], &zt);
                }
                Op::Cz(a, b) => {
                    let (xa, xb) = (self.x[a], self.x[b]);
                    xor(&mut self.z[a], &xb);
                    xor(&mut self.z[b], &xa);
                }
                Op::Swap(a, b) => {
                    self.x.swap(a, b);
                    self.z.swap(a, b);
                }
                Op::Noise { q, sampler } => {
                    if let Some(rng) = rng.as_deref_mut() {
                        let s = &prog.samplers[sampler];
                        let arity = s.arity();
                        let (x, z) = (&mut self.x, &mut self.z);
                        s.sample(rng, lanes, |lane, xb, zb| {
                            for (k, &qk) in q.iter().enumerate().take(arity) {
                                if (xb >> k) & 1 == 1 {
                                    flip(&mut x[qk], lane);
                                }
                                if (zb >> k) & 1 == 1 {
                                    flip(&mut z[qk], lane);
                                }
                            }
                        });
                    }
                }
                Op::Measure { q, flip: f, bit } => {
                    if let (Some(s), Some(rng)) = (f, rng.as_deref_mut()) {
                        let x = &mut self.x[q];
                        prog.samplers[s].sample(rng, lanes, |lane, _, _| flip(x, lane));
                    }
                    self.bits[bit] = self.x[q];
                }
            }
        }
    }
}

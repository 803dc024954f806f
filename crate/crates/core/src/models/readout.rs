//! Repetition-code readout: Markov model of the chained CX copies, its
//! asymptote, and majority decoding.
//!
//! States are (current copy value, required value) for the four value pairs,
//! plus an absorbing "mismatch seen" state.

use nalgebra::{DMatrix, Matrix4, Matrix5, Vector4, Vector5};

use crate::error::{invalid, Result};

/// Readout flip `m` and CX control/target flips `g_c`, `g_t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadoutParams {
    pub m: f64,
    pub g_c: f64,
    pub g_t: f64,
}

impl ReadoutParams {
    pub fn new(m: f64, g_c: f64, g_t: f64) -> Result<ReadoutParams> {
        for (name, v) in [("m", m), ("g_c", g_c), ("g_t", g_t)] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{name} must lie in [0, 1], got {v}"));
            }
        }
        Ok(ReadoutParams { m, g_c, g_t })
    }

    /// Combined flip of a qubit that controls a CX and is then measured.
    pub fn m_prime(&self) -> f64 {
        self.g_c * (1.0 - self.m) + (1.0 - self.g_c) * self.m
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReadoutPoint {
    pub checks: usize,
    /// Wrong accepted value among accepted shots; `None` if nothing is
    /// accepted.
    pub error_rate: Option<f64>,
    pub postselect: f64,
}

impl ReadoutPoint {
    pub fn success_rate(&self) -> Option<f64> {
        self.error_rate.map(|e| 1.0 - e)
    }
}

fn init(mp: f64) -> Vector5<f64> {
    Vector5::new(1.0 - mp, 0.0, mp, 0.0, 0.0)
}

/// Copy of the current value onto a fresh qubit followed by a target flip.
fn gate_matrix(g: f64) -> Matrix5<f64> {
    let mut t = Matrix5::zeros();
    for b in [0, 2] {
        t[(b, b)] = 1.0 - g;
        t[(b + 1, b + 1)] = 1.0 - g;
        t[(b, b + 1)] = g;
        t[(b + 1, b)] = g;
    }
    t[(4, 4)] = 1.0;
    t
}

/// Measurement of the copy with flip `a`; a mismatch moves to the absorbing
/// state.
fn measure_matrix(a: f64) -> Matrix5<f64> {
    let mut t = Matrix5::zeros();
    t[(0, 0)] = 1.0 - a;
    t[(1, 1)] = a;
    t[(2, 2)] = a;
    t[(3, 3)] = 1.0 - a;
    t[(4, 0)] = a;
    t[(4, 1)] = 1.0 - a;
    t[(4, 2)] = 1.0 - a;
    t[(4, 3)] = a;
    t[(4, 4)] = 1.0;
    t
}

fn rates(v: &Vector5<f64>) -> (f64, f64) {
    let post = v[0] + v[1] + v[2] + v[3];
    let correct = v[0] + v[1];
    (correct, post)
}

fn point(checks: usize, correct: f64, post: f64) -> ReadoutPoint {
    ReadoutPoint { checks, error_rate: (post > 0.0).then(|| ((post - correct) / post).clamp(0.0, 1.0)), postselect: post }
}

/// Unanimous decoding after `0..=k_max` checks.
pub fn readout_curve(rp: ReadoutParams, k_max: usize) -> Vec<ReadoutPoint> {
    let mut out = vec![point(0, 1.0 - rp.m, 1.0)];
    let g = gate_matrix(rp.g_t);
    let step = measure_matrix(rp.m_prime()) * g;
    let last = measure_matrix(rp.m) * g;
    let mut v = init(rp.m_prime());
    for k in 1..=k_max {
        let (c, p) = rates(&(last * v));
        out.push(point(k, c, p));
        v = step * v;
    }
    out
}

/// Limit of the unanimous-decoding error rate as the number of checks grows,
/// from the dominant eigenmodes of the transient part of one intermediate
/// check. Falls back to iteration if the spectrum is complex or defective.
pub fn readout_asymptote(rp: ReadoutParams) -> f64 {
    spectral_asymptote(rp).unwrap_or_else(|| iterated_asymptote(rp, 1e-12, 10_000_000))
}

/// Iterates the normalised transient state until the error rate changes by
/// less than `tol`.
pub fn iterated_asymptote(rp: ReadoutParams, tol: f64, max_iter: usize) -> f64 {
    let step = measure_matrix(rp.m_prime()) * gate_matrix(rp.g_t);
    let last = measure_matrix(rp.m) * gate_matrix(rp.g_t);
    let mut v = init(rp.m_prime());
    let mut prev = f64::NAN;
    for _ in 0..max_iter {
        let (c, p) = rates(&(last * v));
        if p <= 0.0 {
            return prev;
        }
        let e = (p - c) / p;
        if (e - prev).abs() < tol {
            return e;
        }
        prev = e;
        v = step * v;
        let s = v[0] + v[1] + v[2] + v[3];
        if s <= 0.0 {
            return prev;
        }
        for i in 0..4 {
            v[i] /= s;
        }
        v[4] = 0.0;
    }
    prev
}

fn null_space(a: &DMatrix<f64>, tol: f64) -> Option<DMatrix<f64>> {
    let svd = a.clone().svd(false, true);
    let vt = svd.v_t?;
    let cols: Vec<_> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= tol)
        .map(|(i, _)| vt.row(i).transpose())
        .collect();
    if cols.is_empty() {
        return None;
    }
    Some(DMatrix::from_columns(&cols))
}

fn spectral_asymptote(rp: ReadoutParams) -> Option<f64> {
    // The absorbing state never feeds back and the initial state has no mass
    // on it, so only the 4×4 transient block matters.
    let full = measure_matrix(rp.m_prime()) * gate_matrix(rp.g_t);
    let b: Matrix4<f64> = full.fixed_view::<4, 4>(0, 0).into();
    let last: Matrix4<f64> = (measure_matrix(rp.m) * gate_matrix(rp.g_t)).fixed_view::<4, 4>(0, 0).into();
    let x0: Vector4<f64> = init(rp.m_prime()).fixed_rows::<4>(0).into();
    let eig = b.eigenvalues()?;
    let top = eig.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    if top <= 1e-300 {
        return None;
    }
    let mut lambdas: Vec<f64> = Vec::new();
    for &l in eig.iter() {
        if (l.abs() - top).abs() <= 1e-9 * top && !lambdas.iter().any(|&u| (u - l).abs() <= 1e-9 * top) {
            lambdas.push(l);
        }
    }
    let bd = DMatrix::from_iterator(4, 4, b.iter().copied());
    let mut proj = DMatrix::<f64>::zeros(4, 4);
    for l in lambdas {
        let shifted = &bd - DMatrix::identity(4, 4) * l;
        let v = null_space(&shifted, 1e-8 * top)?;
        let w = null_space(&shifted.transpose(), 1e-8 * top)?;
        if v.ncols() != w.ncols() {
            return None;
        }
        let inner = w.transpose() * &v;
        let inv = inner.try_inverse()?;
        proj += &v * inv * w.transpose();
    }
    let xd = DMatrix::from_iterator(4, 1, x0.iter().copied());
    let ld = DMatrix::from_iterator(4, 4, last.iter().copied());
    let y = ld * proj * xd;
    let post = y[0] + y[1] + y[2] + y[3];
    let correct = y[0] + y[1];
    if post.abs() <= 1e-14 {
        return None;
    }
    Some(((post - correct) / post).clamp(0.0, 1.0))
}

/// Majority decoding of the `k + 1` measured bits after `0..=k_max` checks;
/// ties are rejected.
pub fn majority_curve(rp: ReadoutParams, k_max: usize) -> Vec<ReadoutPoint> {
    let mut out = vec![point(0, 1.0 - rp.m, 1.0)];
    let mp = rp.m_prime();
    // cur[c][v]: c ones among the bits measured so far, current copy value
    // v. The object qubit is measured with the combined flip.
    let mut cur: Vec<[f64; 2]> = vec![[1.0 - mp, 0.0], [mp, 0.0]];
    for k in 1..=k_max {
        // Copy plus target flip on the new qubit.
        let copied: Vec<[f64; 2]> = cur.iter().map(|&[p0, p1]| [p0 * (1.0 - rp.g_t) + p1 * rp.g_t, p0 * rp.g_t + p1 * (1.0 - rp.g_t)]).collect();
        // Final measurement of the new copy with flip m.
        let mut ones = vec![0.0f64; k + 2];
        for (c, &[p0, p1]) in copied.iter().enumerate() {
            ones[c] += p0 * (1.0 - rp.m) + p1 * rp.m;
            ones[c + 1] += p0 * rp.m + p1 * (1.0 - rp.m);
        }
        let bits = k + 1;
        let mut correct = 0.0;
        let mut wrong = 0.0;
        for (c, &p) in ones.iter().enumerate() {
            match (2 * c).cmp(&bits) {
                std::cmp::Ordering::Less => correct += p,
                std::cmp::Ordering::Greater => wrong += p,
                std::cmp::Ordering::Equal => {}
            }
        }
        out.push(point(k, correct, correct + wrong));
        // Intermediate measurement of the new copy with flip m'.
        let mut next = vec![[0.0f64; 2]; k + 2];
        for (c, &[p0, p1]) in copied.iter().enumerate() {
            next[c][0] += p0 * (1.0 - mp);
            next[c + 1][0] += p0 * mp;
            next[c][1] += p1 * mp;
            next[c + 1][1] += p1 * (1.0 - mp);
        }
        cur = next;
    }
    out
}

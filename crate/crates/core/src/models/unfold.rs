//! Two-qubit readout unfolding: the distribution on the simplex whose image
//! under the tensor-product confusion matrix is closest to the observed one.
//!
//! Outcome index is `2·b1 + b2`; `A[(i, j)]` is the probability of reading
//! `i` when the true outcome is `j`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, Vector4};

use crate::error::{invalid, Result};

fn check_stochastic(a: &Matrix2<f64>, name: &str) -> Result<()> {
    for j in 0..2 {
        if a.column(j).iter().any(|&v| !(0.0..=1.0).contains(&v)) || (a.column(j).sum() - 1.0).abs() > 1e-9 {
            return invalid(format!("{name} is not column-stochastic"));
        }
    }
    Ok(())
}

fn objective(a: &Matrix4<f64>, p: &Vector4<f64>, p_hat: &Vector4<f64>) -> f64 {
    0.5 * (a * p - p_hat).norm_squared()
}

/// Largest violation of the optimality conditions of the simplex-constrained
/// least-squares problem at `p`.
pub fn kkt_residual(p: &[f64; 4], p_hat: &[f64; 4], a1: &Matrix2<f64>, a2: &Matrix2<f64>) -> f64 {
    let a = a1.kronecker(a2);
    let p = Vector4::from_row_slice(p);
    let grad = a.transpose() * (a * p - Vector4::from_row_slice(p_hat));
    let mu = grad.min();
    let mut r = (p.sum() - 1.0).abs();
    for i in 0..4 {
        r = r.max(-p[i]).max(p[i].min(grad[i] - mu).abs());
    }
    r
}

/// Solves `min ½‖(A1⊗A2)p − p̂‖²` over the probability simplex.
///
/// Each of the 15 candidate supports is solved exactly through its
/// equality-constrained optimality system; the best candidate that
/// satisfies the full optimality conditions is returned. Projected gradient
/// descent covers degenerate systems where no candidate qualifies.
pub fn unfold_readout(p_hat: &[f64; 4], a1: &Matrix2<f64>, a2: &Matrix2<f64>) -> Result<[f64; 4]> {
    check_stochastic(a1, "A1")?;
    check_stochastic(a2, "A2")?;
    if p_hat.iter().any(|v| !v.is_finite()) {
        return invalid("observed distribution must be finite");
    }
    let a = a1.kronecker(a2);
    let target = Vector4::from_row_slice(p_hat);
    let ata = a.transpose() * a;
    let atb = a.transpose() * target;
    let mut best: Option<(f64, Vector4<f64>)> = None;
    for mask in 1u8..16 {
        let support: Vec<usize> = (0..4).filter(|i| mask >> i & 1 == 1).collect();
        let k = support.len();
        let mut m = DMatrix::zeros(k + 1, k + 1);
        let mut rhs = DVector::zeros(k + 1);
        for (r, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                m[(r, c)] = ata[(i, j)];
            }
            m[(r, k)] = -1.0;
            m[(k, r)] = 1.0;
            rhs[r] = atb[i];
        }
        rhs[k] = 1.0;
        let Some(sol) = m.lu().solve(&rhs) else { continue };
        let mut p = Vector4::zeros();
        for (r, &i) in support.iter().enumerate() {
            p[i] = sol[r];
        }
        if p.iter().any(|&v| v < -1e-12 || !v.is_finite()) {
            continue;
        }
        p.iter_mut().for_each(|v| *v = v.max(0.0));
        let arr: [f64; 4] = p.into();
        if kkt_residual(&arr, p_hat, a1, a2) > 1e-10 {
            continue;
        }
        let f = objective(&a, &p, &target);
        if best.as_ref().is_none_or(|(bf, _)| f < *bf) {
            best = Some((f, p));
        }
    }
    let p = match best {
        Some((_, p)) => p,
        None => projected_gradient(&a, &target),
    };
    Ok(p.into())
}

/// Euclidean projection onto the probability simplex.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cum += ui;
        let t = (cum - 1.0) / (i + 1) as f64;
        if ui - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

fn projected_gradient(a: &Matrix4<f64>, target: &Vector4<f64>) -> Vector4<f64> {
    let ata = a.transpose() * a;
    let step = 1.0 / ata.norm().max(1e-300);
    let mut p = Vector4::repeat(0.25);
    for _ in 0..200_000 {
        let grad = ata * p - a.transpose() * target;
        let next = Vector4::from_vec(project_simplex((p - step * grad).as_slice()));
        let moved = (next - p).amax();
        p = next;
        if moved < 1e-15 {
            break;
        }
    }
    p
}

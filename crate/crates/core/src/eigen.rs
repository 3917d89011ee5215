//! Hermitian eigendecomposition and least squares for small dense matrices.
//!
//! The solver is a cyclic Jacobi iteration with complex rotations. Matrix
//! orders in this crate stay at desk scale (a few hundred at most), where
//! Jacobi is accurate and its fully deterministic sweep order keeps reports
//! reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::matrix::{c64, ComplexMatrix, Ket};

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order and the matching unit eigenvectors
/// as the columns of the returned matrix, so that
/// `m = V * diag(values) * V^dagger` up to floating-point error. The input is
/// symmetrized first; callers are responsible for rejecting inputs that are
/// far from Hermitian.
pub fn hermitian_eigen(m: &ComplexMatrix) -> Result<(Vec<f64>, ComplexMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "eigendecomposition of non-square matrix".into(),
        ));
    }
    let n = m.rows();
    let mut a = m.hermitize();
    let mut v = ComplexMatrix::identity(n);

    if n == 1 {
        return Ok((vec![a.get(0, 0).re], v));
    }

    let frob: f64 = a
        .entries()
        .iter()
        .map(|e| e.norm_sqr())
        .sum::<f64>()
        .sqrt();
    let target = (1e-14 * frob.max(1.0)).powi(2);

    let mut converged = false;
    for _sweep in 0..100 {
        let mut off_sq = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a.get(p, q).norm_sqr();
            }
        }
        if 2.0 * off_sq <= target {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }
    if !converged {
        // One more check after the final sweep before giving up.
        let mut off_sq = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off_sq += a.get(p, q).norm_sqr();
            }
        }
        if 2.0 * off_sq > target {
            return Err(Error::Convergence(format!(
                "jacobi off-diagonal norm {:.3e} above target after 100 sweeps",
                (2.0 * off_sq).sqrt()
            )));
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let values: Vec<f64> = (0..n).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| values[i].partial_cmp(&values[j]).unwrap());

    let mut sorted_values = Vec::with_capacity(n);
    let mut sorted_vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_values.push(values[src]);
        let col = fixed_phase_column(&v, src);
        for r in 0..n {
            sorted_vectors.set(r, dst, col[r]);
        }
    }
    Ok((sorted_values, sorted_vectors))
}

/// One Jacobi rotation zeroing the (p, q) entry.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a.get(p, q);
    let r = apq.norm();
    if r < 1e-300 {
        return;
    }
    let phase = apq / r; // e^{i phi}
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;
    // With the rotation below, the annihilation condition is
    // t^2 - 2*tau*t - 1 = 0; take the smaller-magnitude root.
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        -1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Columns p and q mix through [[c, -s], [s*conj(phase), c*conj(phase)]].
    let sp = phase.conj() * s;
    let cp = phase.conj() * c;

    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        let new_kp = akp * c + akq * sp;
        let new_kq = -akp * s + akq * cp;
        a.set(k, p, new_kp);
        a.set(k, q, new_kq);
        a.set(p, k, new_kp.conj());
        a.set(q, k, new_kq.conj());
    }
    a.set(p, p, c64(app + t * r, 0.0));
    a.set(q, q, c64(aqq - t * r, 0.0));
    a.set(p, q, c64(0.0, 0.0));
    a.set(q, p, c64(0.0, 0.0));

    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * c + vkq * sp);
        v.set(k, q, -vkp * s + vkq * cp);
    }
}

/// Column with a deterministic global phase: the largest-magnitude component
/// is made real and positive.
fn fixed_phase_column(v: &ComplexMatrix, col: usize) -> Vec<Complex64> {
    let n = v.rows();
    let mut best = 0usize;
    let mut best_mag = -1.0f64;
    for r in 0..n {
        let mag = v.get(r, col).norm();
        if mag > best_mag + 1e-15 {
            best_mag = mag;
            best = r;
        }
    }
    let pivot = v.get(best, col);
    let phase = if pivot.norm() > 1e-300 {
        pivot.conj() / pivot.norm()
    } else {
        c64(1.0, 0.0)
    };
    (0..n).map(|r| v.get(r, col) * phase).collect()
}

/// Least-squares solve of `a * x = b` via the normal equations, with rank
/// truncation at `cutoff` on the Gram spectrum. Returns the solution and the
/// residual norm `|a x - b|`.
pub fn least_squares(a: &ComplexMatrix, b: &Ket, cutoff: f64) -> Result<(Ket, f64)> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "least squares: {} rows vs rhs dim {}",
            a.rows(),
            b.dim()
        )));
    }
    let gram = a.dagger().mul(a)?;
    let rhs = a.dagger().mul_ket(b)?;
    let (values, vectors) = hermitian_eigen(&gram)?;
    let scale = values.last().copied().unwrap_or(0.0).max(0.0);
    let cut = cutoff.max(scale * 1e-14);
    let n = gram.rows();
    let mut x = Ket::zeros(n);
    for (i, &lam) in values.iter().enumerate() {
        if lam <= cut {
            continue;
        }
        let v = vectors.column(i);
        let coeff = v.inner(&rhs)? / lam;
        x = x.add(&v.scale(coeff))?;
    }
    let reconstructed = a.mul_ket(&x)?;
    let mut residual_sq = 0.0f64;
    for (r, bb) in reconstructed.amplitudes().iter().zip(b.amplitudes()) {
        residual_sq += (r - bb).norm_sqr();
    }
    Ok((x, residual_sq.sqrt()))
}

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::{is_hermitian, ComplexMatrix};

const HERMITIAN_TOL: f64 = 1e-14;

/// `exp(i · scale · A)`.
///
/// Real-symmetric and Hermitian generators go through an eigendecomposition,
/// which keeps the result unitary (and, for real-symmetric `A`, symmetric) to
/// roundoff. Anything else falls back to scaling-and-squaring over a
/// truncated Taylor series.
pub fn mat_exp(a: &ComplexMatrix, scale: f64) -> ComplexMatrix {
    let tol = HERMITIAN_TOL * a.max_abs().max(1.0);
    if a.is_real() && a.max_abs_diff(&a.transpose()) <= tol {
        exp_real_symmetric(a, scale)
    } else if is_hermitian(a, tol) {
        exp_hermitian(a, scale)
    } else {
        exp_taylor(a, scale)
    }
}

fn exp_real_symmetric(a: &ComplexMatrix, scale: f64) -> ComplexMatrix {
    let n = a.dim();
    let real = DMatrix::from_fn(n, n, |r, c| 0.5 * (a.get(r, c).re + a.get(c, r).re));
    let eig = SymmetricEigen::new(real);
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, scale * l))
        .collect();
    let v = &eig.eigenvectors;
    // Σ_k e^{iλ_k s} v_k v_kᵀ, assembled so that entry (r, c) and (c, r) are
    // the same floating-point sum.
    let out = DMatrix::from_fn(n, n, |r, c| {
        let (lo, hi) = if r <= c { (r, c) } else { (c, r) };
        (0..n)
            .map(|k| phases[k] * (v[(lo, k)] * v[(hi, k)]))
            .sum::<Complex64>()
    });
    ComplexMatrix::from_dmatrix(out).expect("square by construction")
}

fn exp_hermitian(a: &ComplexMatrix, scale: f64) -> ComplexMatrix {
    let h = a.as_dmatrix();
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let n = a.dim();
    let v = &eig.eigenvectors;
    let phases: Vec<Complex64> = eig
        .eigenvalues
        .iter()
        .map(|&l| Complex64::from_polar(1.0, scale * l))
        .collect();
    let out = DMatrix::from_fn(n, n, |r, c| {
        (0..n)
            .map(|k| phases[k] * v[(r, k)] * v[(c, k)].conj())
            .sum::<Complex64>()
    });
    ComplexMatrix::from_dmatrix(out).expect("square by construction")
}

fn exp_taylor(a: &ComplexMatrix, scale: f64) -> ComplexMatrix {
    let n = a.dim();
    let b = a.as_dmatrix() * Complex64::new(0.0, scale);
    let norm1 = (0..n)
        .map(|c| (0..n).map(|r| b[(r, c)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 {
        (norm1 / 0.5).log2().ceil() as i32
    } else {
        0
    };
    let b = b * Complex64::new(0.5f64.powi(squarings), 0.0);

    let mut sum = DMatrix::<Complex64>::identity(n, n);
    let mut term = DMatrix::<Complex64>::identity(n, n);
    for k in 1..=30 {
        term = (&term * &b) * Complex64::new(1.0 / k as f64, 0.0);
        sum += &term;
        let tn: f64 = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if tn < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    ComplexMatrix::from_dmatrix(sum).expect("square by construction")
}

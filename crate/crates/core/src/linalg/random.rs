use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Real symmetric coupling generator `C`.
///
/// Diagonal propagation constants are drawn from `Uniform[-beta_spread,
/// beta_spread]` and off-diagonal couplings `κ_ij = κ_ji` from
/// `Uniform[-kappa_scale, kappa_scale]`. Only relative propagation constants
/// matter for the modal state, so the diagonal is centred on zero.
pub fn random_symmetric_coupling<R: Rng + ?Sized>(
    dim: usize,
    kappa_scale: f64,
    beta_spread: f64,
    rng: &mut R,
) -> Result<ComplexMatrix> {
    if dim == 0 {
        return Err(Error::param("dim", "must be at least 1"));
    }
    if !(kappa_scale > 0.0 && kappa_scale.is_finite()) {
        return Err(Error::param("kappa_scale", format!("must be positive, got {kappa_scale}")));
    }
    if !(beta_spread >= 0.0 && beta_spread.is_finite()) {
        return Err(Error::param("beta_spread", format!("must be non-negative, got {beta_spread}")));
    }
    let mut c = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        let beta = if beta_spread > 0.0 {
            rng.random_range(-beta_spread..=beta_spread)
        } else {
            0.0
        };
        c.set(i, i, Complex64::new(beta, 0.0));
        for j in (i + 1)..dim {
            let k = Complex64::new(rng.random_range(-kappa_scale..=kappa_scale), 0.0);
            c.set(i, j, k);
            c.set(j, i, k);
        }
    }
    Ok(c)
}

/// Random Hermitian matrix with entries of order `scale`, trace removed so
/// that `exp(iH)` is special unitary.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> ComplexMatrix {
    let g = ginibre(dim, rng);
    let mut h = (&g + g.adjoint()) * Complex64::new(0.5 * scale, 0.0);
    let mean = h.trace() / Complex64::new(dim as f64, 0.0);
    for k in 0..dim {
        h[(k, k)] -= mean;
    }
    ComplexMatrix::from_dmatrix(h).expect("square by construction")
}

fn ginibre<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// Haar-distributed special unitary of size `dim`.
///
/// QR of a complex Ginibre matrix, with the phases of `R`'s diagonal pushed
/// back into `Q`, then divided by a `dim`-th root of the determinant.
pub fn haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    assert!(dim >= 1, "matrix dimension must be at least 1");
    if dim == 1 {
        return ComplexMatrix::identity(1);
    }
    let qr = ginibre(dim, rng).qr();
    let r = qr.r();
    let mut q = qr.q();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, k)] *= phase;
        }
    }
    let det = q.clone().determinant();
    let root = Complex64::from_polar(1.0, -det.arg() / dim as f64);
    ComplexMatrix::from_dmatrix(q * root).expect("square by construction")
}

//! Dense complex linear algebra for the mode-coupling model.

mod expm;
mod random;
mod su2;

pub use expm::mat_exp;
pub use random::{haar_unitary, random_hermitian, random_symmetric_coupling};
pub use su2::{factor_su2n, su2_embed, su2_product, Su2Params};

use std::fmt;
use std::ops::Mul;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Square complex matrix of dimension `dim >= 1`.
///
/// Houses coupling generators, segment transfer matrices, reflected matrices
/// and the half-wave-plate matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    inner: DMatrix<Complex64>,
}

impl ComplexMatrix {
    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            inner: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be at least 1");
        Self {
            inner: DMatrix::zeros(dim, dim),
        }
    }

    pub fn from_row_major(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: entries.len(),
            });
        }
        Ok(Self {
            inner: DMatrix::from_row_slice(dim, dim, &entries),
        })
    }

    pub fn from_real_row_major(dim: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(dim, entries.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        assert!(!diag.is_empty(), "matrix dimension must be at least 1");
        let mut inner = DMatrix::zeros(diag.len(), diag.len());
        for (k, &v) in diag.iter().enumerate() {
            inner[(k, k)] = v;
        }
        Self { inner }
    }

    pub fn from_dmatrix(inner: DMatrix<Complex64>) -> Result<Self> {
        if inner.nrows() != inner.ncols() {
            return Err(Error::NotSquare {
                rows: inner.nrows(),
                cols: inner.ncols(),
            });
        }
        if inner.nrows() == 0 {
            return Err(Error::param("dim", "must be at least 1"));
        }
        Ok(Self { inner })
    }

    pub fn dim(&self) -> usize {
        self.inner.nrows()
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.inner[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.inner[(row, col)] = value;
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.inner
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.inner
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let n = self.dim();
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| self.inner[(r, c)])
            .collect()
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            inner: self.inner.map(|z| z.conj()),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            inner: &self.inner * factor,
        }
    }

    pub fn determinant(&self) -> Complex64 {
        self.inner.clone().determinant()
    }

    /// Max-norm of the entrywise difference.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim(), other.dim(), "dimension mismatch in max_abs_diff");
        self.inner
            .iter()
            .zip(other.inner.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_real(&self) -> bool {
        self.inner.iter().all(|z| z.im == 0.0)
    }

    /// Left action on a column vector.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: v.len(),
            });
        }
        Ok((0..n)
            .map(|r| (0..n).map(|c| self.inner[(r, c)] * v[c]).sum())
            .collect())
    }

    pub fn checked_mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: rhs.dim(),
            });
        }
        Ok(self * rhs)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ComplexMatrix{}", self.inner)
    }
}

impl Mul<&ComplexMatrix> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim(), rhs.dim(), "dimension mismatch in product");
        ComplexMatrix {
            inner: &self.inner * &rhs.inner,
        }
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: ComplexMatrix) -> ComplexMatrix {
        &self * &rhs
    }
}

/// `true` iff `‖U†U − I‖_max <= tol`.
pub fn is_unitary(u: &ComplexMatrix, tol: f64) -> bool {
    let gram = &u.adjoint() * u;
    gram.max_abs_diff(&ComplexMatrix::identity(u.dim())) <= tol
}

/// `true` iff `‖U − Uᵀ‖_max <= tol`.
pub fn is_symmetric(u: &ComplexMatrix, tol: f64) -> bool {
    u.max_abs_diff(&u.transpose()) <= tol
}

pub fn is_hermitian(u: &ComplexMatrix, tol: f64) -> bool {
    u.max_abs_diff(&u.adjoint()) <= tol
}

/// Ordered product `A_1 · A_2 · … · A_k`; identity for an empty list.
pub fn ordered_product<'a, I>(dim: usize, factors: I) -> ComplexMatrix
where
    I: IntoIterator<Item = &'a ComplexMatrix>,
{
    factors
        .into_iter()
        .fold(ComplexMatrix::identity(dim), |acc, f| &acc * f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_is_unitary_and_symmetric() {
        let i = ComplexMatrix::identity(5);
        assert!(is_unitary(&i, 1e-14));
        assert!(is_symmetric(&i, 0.0));
    }

    #[test]
    fn non_isometric_diagonal_is_not_unitary() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 0.0), c(2.0, 0.0)]);
        assert!(!is_unitary(&m, 1e-10));
    }

    #[test]
    fn diagonal_is_symmetric() {
        let m = ComplexMatrix::from_diagonal(&[c(1.0, 2.0), c(-3.0, 0.5), c(0.0, 1.0)]);
        assert!(is_symmetric(&m, 0.0));
    }

    #[test]
    fn row_major_layout() {
        let m = ComplexMatrix::from_real_row_major(2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(m.get(0, 1), c(2.0, 0.0));
        assert_eq!(m.get(1, 0), c(3.0, 0.0));
        assert_eq!(m.to_row_major()[1], c(2.0, 0.0));
        let v = m.apply(&[c(1.0, 0.0), c(0.0, 1.0)]).unwrap();
        assert_eq!(v, vec![c(1.0, 2.0), c(3.0, 4.0)]);
    }

    #[test]
    fn bad_shapes_rejected() {
        assert!(ComplexMatrix::from_row_major(2, vec![c(0.0, 0.0); 3]).is_err());
        assert!(ComplexMatrix::from_row_major(0, vec![]).is_err());
        assert!(matches!(
            ComplexMatrix::from_dmatrix(DMatrix::zeros(2, 3)),
            Err(Error::NotSquare { rows: 2, cols: 3 })
        ));
        let m = ComplexMatrix::identity(2);
        assert!(m.apply(&[c(1.0, 0.0)]).is_err());
        assert!(m.checked_mul(&ComplexMatrix::identity(3)).is_err());
    }
}

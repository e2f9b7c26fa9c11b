//! SU(2) blocks on a pair of modes and the factorization of a unitary into
//! an ordered product of them.
//!
//! A block is `Z(α)·Z(δ)·X(θ)·Z(−δ)` with `Z(φ) = diag(1, e^{iφ})` and
//! `X(θ) = [[cos θ, i sin θ], [i sin θ, cos θ]]`, acting on the ordered mode
//! pair `(i, j)`:
//!
//! ```text
//! [[ cos θ,                 i sin θ e^{-iδ}  ],
//!  [ i sin θ e^{i(δ+α)},    cos θ e^{iα}     ]]
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{is_unitary, ComplexMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su2Params {
    pub theta: f64,
    pub delta: f64,
    /// Extra retarder phase on the second mode of the pair.
    pub alpha: f64,
    pub subspace: (usize, usize),
}

impl Su2Params {
    pub fn new(theta: f64, delta: f64, alpha: f64, i: usize, j: usize) -> Result<Self> {
        if i == j {
            return Err(Error::param("subspace", format!("indices must differ, got ({i}, {j})")));
        }
        Ok(Self {
            theta,
            delta,
            alpha,
            subspace: (i, j),
        })
    }

    /// Pure retarder `diag(1, e^{iα})` on `(i, j)`.
    pub fn retarder(alpha: f64, i: usize, j: usize) -> Result<Self> {
        Self::new(0.0, 0.0, alpha, i, j)
    }

    /// The 2×2 block, row-major.
    pub fn block(&self) -> [[Complex64; 2]; 2] {
        let (s, c) = self.theta.sin_cos();
        let i = Complex64::i();
        let ea = Complex64::from_polar(1.0, self.alpha);
        [
            [Complex64::new(c, 0.0), i * s * Complex64::from_polar(1.0, -self.delta)],
            [i * s * Complex64::from_polar(1.0, self.delta + self.alpha), ea * c],
        ]
    }
}

/// Identity on `dim` modes except for the block of `p` on its subspace.
pub fn su2_embed(p: &Su2Params, dim: usize) -> Result<ComplexMatrix> {
    let (i, j) = p.subspace;
    for index in [i, j] {
        if index >= dim {
            return Err(Error::IndexOutOfRange { index, dim });
        }
    }
    if i == j {
        return Err(Error::param("subspace", "indices must differ"));
    }
    let b = p.block();
    let mut m = ComplexMatrix::identity(dim);
    m.set(i, i, b[0][0]);
    m.set(i, j, b[0][1]);
    m.set(j, i, b[1][0]);
    m.set(j, j, b[1][1]);
    Ok(m)
}

/// `S_1 · S_2 · … · S_k` for the listed blocks.
pub fn su2_product(factors: &[Su2Params], dim: usize) -> Result<ComplexMatrix> {
    let mut acc = ComplexMatrix::identity(dim);
    for f in factors {
        acc = &acc * &su2_embed(f, dim)?;
    }
    Ok(acc)
}

const SKIP_EPS: f64 = 1e-15;

fn arg_or_zero(z: Complex64) -> f64 {
    if z.norm() == 0.0 { 0.0 } else { z.arg() }
}

/// Factor a unitary into an ordered list of SU(2) blocks whose
/// [`su2_product`] reproduces it.
///
/// Column-by-column Givens elimination: for each column `c` and each row
/// `r > c` (in increasing order) a block on `(c, r)` nulls entry `(r, c)`.
/// What is left is a diagonal of phases `Λ`, so `U = G_1 ⋯ G_K · Λ`. `Λ` is
/// commuted to the front (conjugating a block by diagonal phases only shifts
/// its `δ`), one of its phases is folded into the leading block's `α`, and
/// the rest become pure retarders. A `dim × dim` unitary needs at most
/// `dim(dim−1)/2` mixing blocks plus `dim − 1` retarders.
pub fn factor_su2n(u: &ComplexMatrix, tol: f64) -> Result<Vec<Su2Params>> {
    let dim = u.dim();
    if !is_unitary(u, tol) {
        return Err(Error::contract("factor_su2n requires a unitary input"));
    }
    if dim == 1 {
        let phase = u.get(0, 0).arg();
        if phase.abs() > tol {
            return Err(Error::contract(
                "a 1x1 phase cannot be written as a product of two-mode blocks",
            ));
        }
        return Ok(Vec::new());
    }

    let mut w = u.as_dmatrix().clone();
    let mut rotations = Vec::new();
    for c in 0..dim {
        for r in (c + 1)..dim {
            let x = w[(c, c)];
            let y = w[(r, c)];
            if y.norm() <= SKIP_EPS {
                continue;
            }
            let theta = y.norm().atan2(x.norm());
            let delta = arg_or_zero(y) - arg_or_zero(x) - std::f64::consts::FRAC_PI_2;
            let g = Su2Params::new(theta, delta, 0.0, c, r)?;
            // w ← G† w on rows c and r
            let b = g.block();
            let (g00, g01, g10, g11) = (b[0][0].conj(), b[1][0].conj(), b[0][1].conj(), b[1][1].conj());
            for col in 0..dim {
                let (a0, a1) = (w[(c, col)], w[(r, col)]);
                w[(c, col)] = g00 * a0 + g01 * a1;
                w[(r, col)] = g10 * a0 + g11 * a1;
            }
            w[(r, c)] = Complex64::new(0.0, 0.0);
            rotations.push(g);
        }
    }

    let mut lambda: Vec<f64> = (0..dim).map(|k| arg_or_zero(w[(k, k)])).collect();
    for g in rotations.iter_mut() {
        let (i, j) = g.subspace;
        g.delta += lambda[i] - lambda[j];
    }
    if let Some(lead) = rotations.first_mut() {
        let j = lead.subspace.1;
        lead.alpha = lambda[j];
        lambda[j] = 0.0;
    }

    let mut out = Vec::with_capacity(rotations.len() + dim);
    for (k, &phase) in lambda.iter().enumerate() {
        if phase.abs() > SKIP_EPS {
            let other = if k == 0 { 1 } else { 0 };
            out.push(Su2Params::retarder(phase, other, k)?);
        }
    }
    out.extend(rotations);
    Ok(out)
}

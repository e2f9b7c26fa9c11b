//! A Fourier-type pair of mutually unbiased bases and phase-only encoding.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::hwp_matrix;
use crate::error::{Error, Result};
use crate::states::QuditState;

#[derive(Debug, Clone, PartialEq)]
pub struct MubSet {
    dim: usize,
    bases: [Vec<QuditState>; 2],
}

impl MubSet {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self, id: usize) -> &[QuditState] {
        &self.bases[id]
    }

    pub fn state(&self, basis_id: usize, symbol: usize) -> &QuditState {
        &self.bases[basis_id][symbol]
    }
}

/// Basis 0: `u_k[j] = ω^{jk}/√d` with `ω = e^{2πi/d}`.
/// Basis 1: basis 0 premultiplied by `diag(e^{iπ j²/d})`.
///
/// For even `d` the chirp is `d`-periodic and every cross overlap reduces to
/// a quadratic Gauss sum of modulus `√d`, giving `|⟨u|v⟩|² = 1/d`. Every
/// state has equal-magnitude coefficients, so each is reachable by phases
/// alone.
pub fn build_mub_pair(d: usize) -> Result<MubSet> {
    if d < 2 || !d.is_power_of_two() {
        return Err(Error::param("d", format!("must be a power of two >= 2, got {d}")));
    }
    let norm = 1.0 / (d as f64).sqrt();
    let make = |chirp: bool| -> Result<Vec<QuditState>> {
        (0..d)
            .map(|k| {
                let coeffs = (0..d)
                    .map(|j| {
                        let mut phase = 2.0 * PI * ((j * k) % d) as f64 / d as f64;
                        if chirp {
                            phase += PI * ((j * j) % (2 * d)) as f64 / d as f64;
                        }
                        Complex64::from_polar(norm, phase)
                    })
                    .collect();
                QuditState::from_unnormalized(coeffs)
            })
            .collect()
    };
    Ok(MubSet {
        dim: d,
        bases: [make(false)?, make(true)?],
    })
}

/// Alice's choice and the phases `θ_j` that realize it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingChoice {
    pub basis_id: usize,
    pub symbol: usize,
    pub theta: Vec<f64>,
}

/// Wrap into `(−π, π]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Template that reaches Bob when Alice applies no phases and Bob launched
/// equal real amplitudes: `−i·D·(1, …, 1)/√d`.
pub fn round_trip_template(n_cores: usize) -> Vec<Complex64> {
    let d = 2 * n_cores;
    let hwp = hwp_matrix(n_cores);
    let a = Complex64::new(0.0, -1.0 / (d as f64).sqrt());
    (0..d).map(|j| a * hwp.get(j, j)).collect()
}

/// Phases `θ_j` with `e^{iθ_j} template_j ∝ target_j` (common factor free,
/// normalized so `θ_0 = 0`).
pub fn phases_onto(template: &[Complex64], target: &QuditState) -> Result<Vec<f64>> {
    if template.len() != target.dim() {
        return Err(Error::DimensionMismatch {
            expected: target.dim(),
            actual: template.len(),
        });
    }
    let ratio: Vec<f64> = template
        .iter()
        .zip(target.coeffs())
        .map(|(t, u)| if t.norm() > 0.0 { u.norm() / t.norm() } else { f64::INFINITY })
        .collect();
    let r0 = ratio[0];
    if !r0.is_finite() || ratio.iter().any(|r| (r - r0).abs() > 1e-9 * r0.max(1.0)) {
        return Err(Error::contract(
            "target is not reachable from the template by phases alone",
        ));
    }
    let raw: Vec<f64> = template
        .iter()
        .zip(target.coeffs())
        .map(|(t, u)| u.arg() - t.arg())
        .collect();
    Ok(raw.iter().map(|x| wrap_phase(x - raw[0])).collect())
}

/// EPS phases for `(basis_id, symbol)` relative to [`round_trip_template`].
pub fn encode(basis_id: usize, symbol: usize, mubs: &MubSet) -> Result<EncodingChoice> {
    if basis_id > 1 {
        return Err(Error::IndexOutOfRange { index: basis_id, dim: 2 });
    }
    if symbol >= mubs.dim() {
        return Err(Error::IndexOutOfRange { index: symbol, dim: mubs.dim() });
    }
    let template = round_trip_template(mubs.dim() / 2);
    let theta = phases_onto(&template, mubs.state(basis_id, symbol))?;
    Ok(EncodingChoice { basis_id, symbol, theta })
}

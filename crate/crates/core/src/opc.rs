//! Four-wave-mixing phase-conjugate mirror.
//!
//! With interaction strength `κl`, the Bogoliubov coefficients are
//! `s = sec(κl)` and `t = tan(κl)`. An incident coherent amplitude `α` leaves
//! `sα` in the transmitted arm and `−i t α*` in the reflected arm; a
//! single-photon superposition `Σ c_j |1_j⟩` leaves the reflected branch
//! `i t Σ c_j |1_j⟩`.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::hwp_matrix;
use crate::error::{Error, Result};
use crate::states::{CoherentVector, QuditState};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpcParams {
    kappa_l: f64,
}

impl OpcParams {
    pub fn new(kappa_l: f64) -> Result<Self> {
        if !kappa_l.is_finite() || kappa_l.abs() >= FRAC_PI_2 {
            return Err(Error::param(
                "kappa_l",
                format!("must lie in (-pi/2, pi/2), got {kappa_l}"),
            ));
        }
        Ok(Self { kappa_l })
    }

    pub fn kappa_l(&self) -> f64 {
        self.kappa_l
    }

    /// `sec(κl)`
    pub fn s(&self) -> f64 {
        1.0 / self.kappa_l.cos()
    }

    /// `tan(κl)`
    pub fn t(&self) -> f64 {
        self.kappa_l.tan()
    }
}

impl Default for OpcParams {
    fn default() -> Self {
        Self { kappa_l: 0.6 }
    }
}

/// Reflected-arm amplitude `−i t α*`.
pub fn opc_reflect_coherent(alpha: Complex64, p: &OpcParams) -> Complex64 {
    Complex64::new(0.0, -p.t()) * alpha.conj()
}

/// Transmitted-arm amplitude `s α`.
pub fn opc_transmit_coherent(alpha: Complex64, p: &OpcParams) -> Complex64 {
    alpha * p.s()
}

pub fn opc_reflect_multimode(v: &CoherentVector, p: &OpcParams) -> CoherentVector {
    let out = v.amplitudes().iter().map(|&a| opc_reflect_coherent(a, p)).collect();
    v.with_amplitudes(out).expect("same shape")
}

/// Single-photon input: returns the relative weight `s²/(s²+t²)` of the
/// transmitted branch and the normalized reflected state `∝ i t Σ c_j |1_j⟩`.
///
/// Unlike the coherent map, the coefficients are not conjugated here.
pub fn opc_reflect_qudit(c: &QuditState, p: &OpcParams) -> Result<(f64, QuditState)> {
    let (s, t) = (p.s(), p.t());
    if t == 0.0 {
        return Err(Error::param("kappa_l", "zero coupling reflects nothing"));
    }
    let weight = s * s / (s * s + t * t);
    let factor = Complex64::new(0.0, t);
    let reflected = QuditState::from_unnormalized(c.coeffs().iter().map(|&x| factor * x).collect())?;
    Ok((weight, reflected))
}

/// Anything laid out over the `2N` modes.
pub trait ModeAmplitudes {
    fn modes(&self) -> &[Complex64];
    fn modes_mut(&mut self) -> &mut [Complex64];
}

impl ModeAmplitudes for CoherentVector {
    fn modes(&self) -> &[Complex64] {
        self.amplitudes()
    }

    fn modes_mut(&mut self) -> &mut [Complex64] {
        self.amplitudes_mut()
    }
}

impl ModeAmplitudes for QuditState {
    fn modes(&self) -> &[Complex64] {
        self.coeffs()
    }

    fn modes_mut(&mut self) -> &mut [Complex64] {
        self.coeffs_mut()
    }
}

/// The conjugator's HWP: multiply by `D = I_N ⊗ σ_z`.
pub fn apply_local_hwp<T: ModeAmplitudes + Clone>(v: &T, n_cores: usize) -> Result<T> {
    if v.modes().len() != 2 * n_cores {
        return Err(Error::DimensionMismatch {
            expected: 2 * n_cores,
            actual: v.modes().len(),
        });
    }
    let d = hwp_matrix(n_cores);
    let mut out = v.clone();
    for (k, a) in out.modes_mut().iter_mut().enumerate() {
        *a *= d.get(k, k);
    }
    Ok(out)
}

/// What sits at Alice's end of the link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mirror {
    PhaseConjugate(OpcParams),
    /// Ordinary mirror, no conjugation. Diagnostic only: perturbations are
    /// not undone.
    Plain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MirrorKind {
    #[default]
    PhaseConjugate,
    Plain,
}

impl Mirror {
    /// Reflected amplitudes, before the local HWP.
    pub fn reflect(&self, v: &CoherentVector) -> CoherentVector {
        match self {
            Mirror::PhaseConjugate(p) => opc_reflect_multimode(v, p),
            Mirror::Plain => v.clone(),
        }
    }

    /// Amplitude reflectivity `|t|` (1 for a plain mirror).
    pub fn reflectivity(&self) -> f64 {
        match self {
            Mirror::PhaseConjugate(p) => p.t().abs(),
            Mirror::Plain => 1.0,
        }
    }
}

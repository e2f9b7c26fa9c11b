//! Multimode coherent pulses, single-photon qudits, weak-pulse statistics
//! and projective measurement.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::channel::ModeLabel;
use crate::error::{Error, Result};
use crate::VERIFY_TOL;

/// Amplitudes `α_j` of a multimode coherent state over the `2N` modes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoherentVector {
    amplitudes: Vec<Complex64>,
    labels: Vec<ModeLabel>,
}

impl CoherentVector {
    pub fn new(n_cores: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        if n_cores == 0 {
            return Err(Error::param("n_cores", "must be at least 1"));
        }
        if amplitudes.len() != 2 * n_cores {
            return Err(Error::DimensionMismatch {
                expected: 2 * n_cores,
                actual: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::param("amplitudes", "must be finite"));
        }
        Ok(Self {
            amplitudes,
            labels: ModeLabel::all(n_cores),
        })
    }

    /// Build from a flat amplitude list of even length.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() || !amplitudes.len().is_multiple_of(2) {
            return Err(Error::param("amplitudes", "need an even, non-zero number of modes"));
        }
        Self::new(amplitudes.len() / 2, amplitudes)
    }

    pub fn vacuum(n_cores: usize) -> Result<Self> {
        Self::new(n_cores, vec![Complex64::new(0.0, 0.0); 2 * n_cores])
    }

    /// Same labels, new amplitudes.
    pub fn with_amplitudes(&self, amplitudes: Vec<Complex64>) -> Result<Self> {
        Self::new(self.n_cores(), amplitudes)
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn labels(&self) -> &[ModeLabel] {
        &self.labels
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_cores(&self) -> usize {
        self.amplitudes.len() / 2
    }

    /// `μ = Σ|α_j|²`.
    pub fn mean_photon_number(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn conj(&self) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect(),
            labels: self.labels.clone(),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            labels: self.labels.clone(),
        }
    }
}

/// Normalized single-photon state `Σ c_j |1_j⟩`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuditState {
    coeffs: Vec<Complex64>,
}

impl QuditState {
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "empty state"));
        }
        let norm: f64 = coeffs.iter().map(|c| c.norm_sqr()).sum();
        if (norm - 1.0).abs() > VERIFY_TOL {
            return Err(Error::contract(format!("qudit norm² is {norm}, expected 1")));
        }
        Ok(Self { coeffs })
    }

    /// Normalize an arbitrary non-zero vector.
    pub fn from_unnormalized(coeffs: Vec<Complex64>) -> Result<Self> {
        let norm = coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::contract("cannot normalize a zero vector"));
        }
        Ok(Self {
            coeffs: coeffs.into_iter().map(|c| c / norm).collect(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::IndexOutOfRange { index: k, dim });
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); dim];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Ok(Self { coeffs })
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &QuditState) -> Complex64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `1 − |⟨self|other⟩|`; zero iff equal up to a global phase.
    pub fn phase_insensitive_distance(&self, other: &QuditState) -> f64 {
        1.0 - self.inner(other).norm()
    }

    /// Max-norm distance after removing the best global phase.
    pub fn distance_up_to_phase(&self, other: &QuditState) -> f64 {
        let ov = self.inner(other);
        let phase = if ov.norm() > 0.0 { ov / ov.norm() } else { Complex64::new(1.0, 0.0) };
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a * phase - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntensityRole {
    Signal,
    Decoy,
    Vacuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseIntensity {
    pub mu: f64,
    pub role: IntensityRole,
}

impl PulseIntensity {
    pub fn new(mu: f64, role: IntensityRole) -> Result<Self> {
        if !(mu >= 0.0 && mu.is_finite()) {
            return Err(Error::param("mu", format!("must be a finite non-negative number, got {mu}")));
        }
        Ok(Self { mu, role })
    }

    /// Signal 0.5, decoy 0.1, vacuum 0.
    pub fn standard_set() -> Vec<PulseIntensity> {
        vec![
            PulseIntensity { mu: 0.5, role: IntensityRole::Signal },
            PulseIntensity { mu: 0.1, role: IntensityRole::Decoy },
            PulseIntensity { mu: 0.0, role: IntensityRole::Vacuum },
        ]
    }
}

/// Scale factor that takes mean photon number `current` to `target`.
pub fn attenuation_factor(current: f64, target: f64) -> Result<f64> {
    if !(target >= 0.0 && target.is_finite()) {
        return Err(Error::param("target_mu", format!("must be non-negative, got {target}")));
    }
    if target == 0.0 {
        return Ok(0.0);
    }
    if current <= 0.0 {
        return Err(Error::contract("cannot attenuate a vacuum pulse to a non-zero intensity"));
    }
    Ok((target / current).sqrt())
}

/// Uniformly rescale so that `Σ|α_j|² = target_mu`.
pub fn attenuate(v: &CoherentVector, target_mu: f64) -> Result<CoherentVector> {
    let f = attenuation_factor(v.mean_photon_number(), target_mu)?;
    Ok(v.scaled(Complex64::new(f, 0.0)))
}

/// Poisson(μ) photon count of a coherent pulse.
pub fn sample_photon_number<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> Result<u64> {
    if !(mu >= 0.0 && mu.is_finite()) {
        return Err(Error::param("mu", format!("must be non-negative, got {mu}")));
    }
    if mu == 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mu).map_err(|e| Error::param("mu", e.to_string()))?;
    Ok(dist.sample(rng) as u64)
}

/// Single-photon wavefunction of a multimode coherent pulse.
pub fn to_qudit(v: &CoherentVector) -> Result<QuditState> {
    QuditState::from_unnormalized(v.amplitudes().to_vec())
}

const ORTHONORMAL_TOL: f64 = 1e-8;

pub fn check_orthonormal(basis: &[QuditState], dim: usize) -> Result<()> {
    if basis.len() != dim {
        return Err(Error::contract(format!(
            "basis has {} vectors for dimension {dim}",
            basis.len()
        )));
    }
    for (a, u) in basis.iter().enumerate() {
        if u.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: u.dim() });
        }
        for v in &basis[a..] {
            let ov = u.inner(v).norm();
            let expected = if std::ptr::eq(u, v) { 1.0 } else { 0.0 };
            if (ov - expected).abs() > ORTHONORMAL_TOL {
                return Err(Error::contract("measurement basis is not orthonormal"));
            }
        }
    }
    Ok(())
}

/// Born probabilities `|⟨b_k|q⟩|²` for every basis vector.
pub fn born_probabilities(q: &QuditState, basis: &[QuditState]) -> Result<Vec<f64>> {
    check_orthonormal(basis, q.dim())?;
    let probs: Vec<f64> = basis.iter().map(|b| b.inner(q).norm_sqr()).collect();
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::contract(format!("outcome probabilities sum to {total}")));
    }
    Ok(probs)
}

/// Projective measurement; returns the outcome index.
pub fn measure_in_basis<R: Rng + ?Sized>(
    q: &QuditState,
    basis: &[QuditState],
    rng: &mut R,
) -> Result<usize> {
    let probs = born_probabilities(q, basis)?;
    let total: f64 = probs.iter().sum();
    let u: f64 = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, p) in probs.iter().enumerate() {
        if *p > 0.0 {
            last_nonzero = k;
        }
        acc += p;
        if u < acc {
            return Ok(k);
        }
    }
    Ok(last_nonzero)
}

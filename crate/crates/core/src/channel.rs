//! The perturbed bidirectional link.
//!
//! A link is an ordered list of segments `S_1, …, S_q` with forward matrix
//! `M = S_1 ⋯ S_q` (so `S_q` is the first segment a field launched by Bob
//! meets). On the way back each segment acts through its reflected matrix
//! `R_k = D·S_kᵀ·D`, where `D = I_N ⊗ σ_z` flips the sign of every
//! V-polarized mode, and the return path is `R_q ⋯ R_1`.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    haar_unitary, is_symmetric, is_unitary, mat_exp, random_hermitian, random_symmetric_coupling,
    ComplexMatrix,
};
use crate::states::CoherentVector;
use crate::VERIFY_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// A (core, polarization) mode. Cores are numbered from 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModeLabel {
    pub core: usize,
    pub polarization: Polarization,
}

impl ModeLabel {
    pub fn new(core: usize, polarization: Polarization) -> Result<Self> {
        if core == 0 {
            return Err(Error::param("core", "cores are numbered from 1"));
        }
        Ok(Self { core, polarization })
    }

    /// Flattened index `2(core − 1) + {0 for H, 1 for V}`.
    pub fn index(&self) -> usize {
        2 * (self.core - 1)
            + match self.polarization {
                Polarization::H => 0,
                Polarization::V => 1,
            }
    }

    pub fn from_index(index: usize) -> Self {
        Self {
            core: index / 2 + 1,
            polarization: if index.is_multiple_of(2) { Polarization::H } else { Polarization::V },
        }
    }

    /// All `2N` labels in flattened order.
    pub fn all(n_cores: usize) -> Vec<ModeLabel> {
        (0..2 * n_cores).map(Self::from_index).collect()
    }
}

/// `D = I_N ⊗ σ_z`: +1 on H slots, −1 on V slots.
pub fn hwp_matrix(n_cores: usize) -> ComplexMatrix {
    assert!(n_cores >= 1, "at least one core is required");
    let diag: Vec<Complex64> = (0..2 * n_cores)
        .map(|k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0))
        .collect();
    ComplexMatrix::from_diagonal(&diag)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// `exp(iCz)` of a real symmetric coupling matrix; symmetric itself.
    SymmetricCoupling,
    /// An arbitrary SU(2N) element.
    GeneralSu2n,
}

/// Parameters for drawing random symmetric couplings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingSpec {
    pub kappa_scale: f64,
    pub beta_spread: f64,
    pub z_length: f64,
}

impl Default for CouplingSpec {
    fn default() -> Self {
        Self {
            kappa_scale: 1.0,
            beta_spread: 1.0,
            z_length: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSegment {
    forward: ComplexMatrix,
    kind: SegmentKind,
    /// Metadata only; the matrix already includes the length.
    z_length: f64,
    generator: Option<ComplexMatrix>,
}

impl ChannelSegment {
    pub fn new(forward: ComplexMatrix, kind: SegmentKind, z_length: f64) -> Result<Self> {
        if !is_unitary(&forward, VERIFY_TOL) {
            return Err(Error::contract("segment matrix is not unitary"));
        }
        if kind == SegmentKind::SymmetricCoupling && !is_symmetric(&forward, VERIFY_TOL) {
            return Err(Error::contract("symmetric-coupling segment is not symmetric"));
        }
        Ok(Self {
            forward,
            kind,
            z_length,
            generator: None,
        })
    }

    /// `S = exp(iCz)` for a real symmetric coupling matrix `C`.
    pub fn from_coupling(coupling: ComplexMatrix, z_length: f64) -> Result<Self> {
        if !coupling.is_real() || !is_symmetric(&coupling, 0.0) {
            return Err(Error::contract("coupling matrix must be real symmetric"));
        }
        let forward = mat_exp(&coupling, z_length);
        let mut seg = Self::new(forward, SegmentKind::SymmetricCoupling, z_length)?;
        seg.generator = Some(coupling);
        Ok(seg)
    }

    pub fn general(forward: ComplexMatrix) -> Result<Self> {
        Self::new(forward, SegmentKind::GeneralSu2n, 1.0)
    }

    pub fn forward(&self) -> &ComplexMatrix {
        &self.forward
    }

    pub fn kind(&self) -> SegmentKind {
        self.kind
    }

    pub fn z_length(&self) -> f64 {
        self.z_length
    }

    pub fn dim(&self) -> usize {
        self.forward.dim()
    }

    /// The coupling generator, when the segment was built from one.
    pub fn coupling(&self) -> Option<&ComplexMatrix> {
        self.generator.as_ref()
    }
}

/// `R = D·Sᵀ·D`, the matrix a segment applies to counter-propagating light.
pub fn reflect(seg: &ChannelSegment) -> ComplexMatrix {
    reflect_matrix(seg.forward())
}

pub fn reflect_matrix(s: &ComplexMatrix) -> ComplexMatrix {
    assert!(s.dim().is_multiple_of(2), "reflection needs an even number of modes");
    let d = hwp_matrix(s.dim() / 2);
    &(&d * &s.transpose()) * &d
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationSequence {
    n_cores: usize,
    segments: Vec<ChannelSegment>,
}

impl PerturbationSequence {
    pub fn new(n_cores: usize) -> Result<Self> {
        if n_cores == 0 {
            return Err(Error::param("n_cores", "must be at least 1"));
        }
        Ok(Self {
            n_cores,
            segments: Vec::new(),
        })
    }

    pub fn from_segments(n_cores: usize, segments: Vec<ChannelSegment>) -> Result<Self> {
        let mut seq = Self::new(n_cores)?;
        for s in segments {
            seq.push(s)?;
        }
        Ok(seq)
    }

    pub fn push(&mut self, seg: ChannelSegment) -> Result<()> {
        if seg.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: seg.dim(),
            });
        }
        self.segments.push(seg);
        Ok(())
    }

    /// `q` segments `exp(iC_k z)` with independent random symmetric `C_k`.
    pub fn random_symmetric<R: Rng + ?Sized>(
        n_cores: usize,
        q: usize,
        spec: &CouplingSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut seq = Self::new(n_cores)?;
        for _ in 0..q {
            let c = random_symmetric_coupling(2 * n_cores, spec.kappa_scale, spec.beta_spread, rng)?;
            seq.push(ChannelSegment::from_coupling(c, spec.z_length)?)?;
        }
        Ok(seq)
    }

    /// Like [`random_symmetric`](Self::random_symmetric) but with every H↔V
    /// coupling removed, so each segment keeps polarization.
    pub fn random_polarization_preserving<R: Rng + ?Sized>(
        n_cores: usize,
        q: usize,
        spec: &CouplingSpec,
        rng: &mut R,
    ) -> Result<Self> {
        let mut seq = Self::new(n_cores)?;
        let dim = 2 * n_cores;
        for _ in 0..q {
            let mut c = random_symmetric_coupling(dim, spec.kappa_scale, spec.beta_spread, rng)?;
            for i in 0..dim {
                for j in 0..dim {
                    if (i + j) % 2 == 1 {
                        c.set(i, j, Complex64::new(0.0, 0.0));
                    }
                }
            }
            seq.push(ChannelSegment::from_coupling(c, spec.z_length)?)?;
        }
        Ok(seq)
    }

    /// `q` Haar-random special-unitary segments.
    pub fn random_general<R: Rng + ?Sized>(n_cores: usize, q: usize, rng: &mut R) -> Result<Self> {
        let mut seq = Self::new(n_cores)?;
        for _ in 0..q {
            seq.push(ChannelSegment::general(haar_unitary(2 * n_cores, rng))?)?;
        }
        Ok(seq)
    }

    /// Small random step of every segment, for slowly drifting channels.
    ///
    /// Symmetric segments move their generator `C ← C + ΔC` with `ΔC` uniform
    /// in `[−step, step]`; general segments are multiplied by `exp(iεH)` with
    /// `H` a traceless random Hermitian matrix of scale `step`. Both keep the
    /// segment class.
    pub fn drift<R: Rng + ?Sized>(&mut self, step: f64, rng: &mut R) -> Result<()> {
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::param("drift step", format!("must be positive, got {step}")));
        }
        let dim = self.dim();
        for seg in self.segments.iter_mut() {
            let next = match (&seg.kind, &seg.generator) {
                (SegmentKind::SymmetricCoupling, Some(c)) => {
                    let dc = random_symmetric_coupling(dim, step, step, rng)?;
                    let moved = ComplexMatrix::from_dmatrix(c.as_dmatrix() + dc.as_dmatrix())?;
                    ChannelSegment::from_coupling(moved, seg.z_length)?
                }
                (kind, _) => {
                    let h = random_hermitian(dim, step, rng);
                    let f = &seg.forward * &mat_exp(&h, 1.0);
                    let kind = if *kind == SegmentKind::SymmetricCoupling {
                        SegmentKind::GeneralSu2n
                    } else {
                        *kind
                    };
                    ChannelSegment::new(f, kind, seg.z_length)?
                }
            };
            *seg = next;
        }
        Ok(())
    }

    pub fn n_cores(&self) -> usize {
        self.n_cores
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cores
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn segments(&self) -> &[ChannelSegment] {
        &self.segments
    }
}

/// `M = S_1 ⋯ S_q`; identity for an empty sequence.
pub fn forward_matrix(seq: &PerturbationSequence) -> ComplexMatrix {
    seq.segments
        .iter()
        .fold(ComplexMatrix::identity(seq.dim()), |acc, s| &acc * s.forward())
}

/// `R_q ⋯ R_1`, the return path.
pub fn backward_matrix(seq: &PerturbationSequence) -> ComplexMatrix {
    seq.segments
        .iter()
        .rev()
        .fold(ComplexMatrix::identity(seq.dim()), |acc, s| &acc * &reflect(s))
}

/// `M_T = R_q ⋯ R_1 · D · S_1* ⋯ S_q*`.
pub fn round_trip_matrix(seq: &PerturbationSequence) -> ComplexMatrix {
    let d = hwp_matrix(seq.n_cores);
    let conj_forward = forward_matrix(seq).conj();
    &(&backward_matrix(seq) * &d) * &conj_forward
}

/// `M · α`.
pub fn propagate(v: &CoherentVector, m: &ComplexMatrix) -> Result<CoherentVector> {
    let out = m.apply(v.amplitudes())?;
    v.with_amplitudes(out)
}

/// Per-mode delays introduced before launch and removed after the return
/// trip. The only physics is bookkeeping: every time bin must come back with
/// zero net delay so the bins recombine into one qudit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalDelays {
    taus: Vec<f64>,
}

impl ModalDelays {
    /// `τ_j = j · step`.
    pub fn staggered(dim: usize, step: f64) -> Self {
        Self {
            taus: (0..dim).map(|j| j as f64 * step).collect(),
        }
    }

    pub fn tau(&self, mode: usize) -> f64 {
        self.taus[mode]
    }

    pub fn len(&self) -> usize {
        self.taus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taus.is_empty()
    }

    /// Remove the delay of `mode` from an accumulated delay; errors if
    /// anything is left over.
    pub fn compensate(&self, mode: usize, accumulated: f64) -> Result<f64> {
        let residual = accumulated - self.taus[mode];
        if residual.abs() > 1e-12 * (1.0 + self.taus[mode].abs()) {
            return Err(Error::contract(format!(
                "time bin {mode} returned with residual delay {residual}"
            )));
        }
        Ok(0.0)
    }
}

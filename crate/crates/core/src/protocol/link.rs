//! Bob → Alice → Bob field propagation, tracked per time bin.
//!
//! Bob's delay line gives every launched mode `j` its own time bin, so on
//! the way out each bin is an independent multimode pulse `a_j M e_j`. The
//! conjugator, Alice's phase shifter and attenuator act bin by bin; on the
//! return trip Bob's second delay line removes the delays and the bins add
//! up coherently into a single multimode pulse.

use num_complex::Complex64;

use crate::channel::{backward_matrix, forward_matrix, ModalDelays, PerturbationSequence};
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::opc::{apply_local_hwp, Mirror};
use crate::states::{attenuation_factor, CoherentVector};

#[derive(Debug, Clone, PartialEq)]
pub struct TimeBin {
    /// Launch mode this bin came from.
    pub mode: usize,
    /// Accumulated delay.
    pub delay: f64,
    pub field: CoherentVector,
}

/// Alice's active settings for one pulse.
#[derive(Debug, Clone, PartialEq)]
pub struct AliceSettings {
    /// EPS phase per time bin.
    pub eps_phases: Vec<f64>,
    /// EOA output mean photon number.
    pub target_mu: f64,
}

#[derive(Debug, Clone)]
pub struct Link {
    n_cores: usize,
    mirror: Mirror,
    delays: ModalDelays,
    forward: ComplexMatrix,
    backward: ComplexMatrix,
}

impl Link {
    pub fn new(seq: &PerturbationSequence, mirror: Mirror, delays: ModalDelays) -> Result<Self> {
        if delays.len() != seq.dim() {
            return Err(Error::DimensionMismatch {
                expected: seq.dim(),
                actual: delays.len(),
            });
        }
        Ok(Self {
            n_cores: seq.n_cores(),
            mirror,
            delays,
            forward: forward_matrix(seq),
            backward: backward_matrix(seq),
        })
    }

    pub fn n_cores(&self) -> usize {
        self.n_cores
    }

    /// First delay line: one bin per launched mode.
    pub fn launch(&self, bob: &CoherentVector) -> Result<Vec<TimeBin>> {
        if bob.n_cores() != self.n_cores {
            return Err(Error::DimensionMismatch {
                expected: 2 * self.n_cores,
                actual: bob.dim(),
            });
        }
        (0..bob.dim())
            .map(|j| {
                let mut amps = vec![Complex64::new(0.0, 0.0); bob.dim()];
                amps[j] = bob.amplitudes()[j];
                Ok(TimeBin {
                    mode: j,
                    delay: self.delays.tau(j),
                    field: bob.with_amplitudes(amps)?,
                })
            })
            .collect()
    }

    fn apply_all(&self, m: &ComplexMatrix, bins: Vec<TimeBin>) -> Result<Vec<TimeBin>> {
        bins.into_iter()
            .map(|b| {
                let amps = m.apply(b.field.amplitudes())?;
                Ok(TimeBin {
                    field: b.field.with_amplitudes(amps)?,
                    ..b
                })
            })
            .collect()
    }

    /// Through `M = S_1 ⋯ S_q`.
    pub fn to_alice(&self, bins: Vec<TimeBin>) -> Result<Vec<TimeBin>> {
        self.apply_all(&self.forward, bins)
    }

    /// Mirror, local HWP, then Alice's EPS phases and EOA.
    pub fn reflect_at_alice(&self, bins: Vec<TimeBin>, alice: &AliceSettings) -> Result<Vec<TimeBin>> {
        if alice.eps_phases.len() != bins.len() {
            return Err(Error::DimensionMismatch {
                expected: bins.len(),
                actual: alice.eps_phases.len(),
            });
        }
        let reflected: Vec<TimeBin> = bins
            .into_iter()
            .map(|b| {
                let r = apply_local_hwp(&self.mirror.reflect(&b.field), self.n_cores)?;
                let phase = Complex64::from_polar(1.0, alice.eps_phases[b.mode]);
                Ok(TimeBin {
                    field: r.scaled(phase),
                    ..b
                })
            })
            .collect::<Result<_>>()?;
        let current: f64 = reflected.iter().map(|b| b.field.mean_photon_number()).sum();
        let f = Complex64::new(attenuation_factor(current, alice.target_mu)?, 0.0);
        Ok(reflected
            .into_iter()
            .map(|b| TimeBin {
                field: b.field.scaled(f),
                ..b
            })
            .collect())
    }

    /// Through `R_q ⋯ R_1`.
    pub fn to_bob(&self, bins: Vec<TimeBin>) -> Result<Vec<TimeBin>> {
        self.apply_all(&self.backward, bins)
    }

    /// Second delay line: cancel every delay and add the bins.
    pub fn recombine(&self, bins: Vec<TimeBin>) -> Result<CoherentVector> {
        let dim = 2 * self.n_cores;
        let mut sum = vec![Complex64::new(0.0, 0.0); dim];
        for b in &bins {
            self.delays.compensate(b.mode, b.delay)?;
            for (s, a) in sum.iter_mut().zip(b.field.amplitudes()) {
                *s += a;
            }
        }
        CoherentVector::new(self.n_cores, sum)
    }

    /// The whole round trip; returns the pulse entering Bob's measurer.
    pub fn transmit(&self, bob: &CoherentVector, alice: &AliceSettings) -> Result<CoherentVector> {
        let bins = self.launch(bob)?;
        let bins = self.to_alice(bins)?;
        let bins = self.reflect_at_alice(bins, alice)?;
        let bins = self.to_bob(bins)?;
        self.recombine(bins)
    }
}

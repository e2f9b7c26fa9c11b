//! High-dimensional BB84 over the autocompensated link.

mod csg;
mod eve;
mod link;
mod mub;

pub use csg::{csg_tree, equalize_phases};
pub use eve::{eve_intercept_resend, EveModel};
pub use link::{AliceSettings, Link, TimeBin};
pub use mub::{
    build_mub_pair, encode, phases_onto, round_trip_template, wrap_phase, EncodingChoice, MubSet,
};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{CouplingSpec, ModalDelays, PerturbationSequence};
use crate::error::{Error, Result};
use crate::opc::{Mirror, MirrorKind, OpcParams};
use crate::rng::{RngSeed, StreamRole, StreamRng};
use crate::states::{
    measure_in_basis, sample_photon_number, to_qudit, CoherentVector, IntensityRole, PulseIntensity,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationModel {
    /// `exp(iCz)` with random real symmetric `C`.
    #[default]
    Symmetric,
    /// Haar-random SU(2N).
    General,
}

fn default_kappa_scale() -> f64 {
    1.0
}
fn default_beta_spread() -> f64 {
    1.0
}
fn default_segment_length() -> f64 {
    1.0
}
fn default_kappa_l() -> f64 {
    0.6
}
fn default_intensities() -> Vec<PulseIntensity> {
    PulseIntensity::standard_set()
}
fn default_delay_step() -> f64 {
    1.0
}

/// Everything a session needs. Deserializes from a flat JSON object; every
/// key but `n_cores`, `q_perturbations` and `n_rounds` has a default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub n_cores: usize,
    pub q_perturbations: usize,
    #[serde(default)]
    pub perturbation: PerturbationModel,
    #[serde(default = "default_kappa_scale")]
    pub kappa_scale: f64,
    #[serde(default = "default_beta_spread")]
    pub beta_spread: f64,
    #[serde(default = "default_segment_length")]
    pub segment_length: f64,
    #[serde(default = "default_kappa_l")]
    pub kappa_l: f64,
    #[serde(default)]
    pub mirror: MirrorKind,
    #[serde(default = "default_intensities")]
    pub intensities: Vec<PulseIntensity>,
    pub n_rounds: u64,
    #[serde(default)]
    pub eve: EveModel,
    /// Per-round drift step. `None` draws a fresh channel every round.
    #[serde(default)]
    pub drift_step: Option<f64>,
    /// Spacing of the staggered modal delays.
    #[serde(default = "default_delay_step")]
    pub delay_step: f64,
    #[serde(default)]
    pub seed: Option<u64>,
}

impl SessionConfig {
    pub fn new(n_cores: usize, q_perturbations: usize, n_rounds: u64) -> Self {
        Self {
            n_cores,
            q_perturbations,
            perturbation: PerturbationModel::default(),
            kappa_scale: default_kappa_scale(),
            beta_spread: default_beta_spread(),
            segment_length: default_segment_length(),
            kappa_l: default_kappa_l(),
            mirror: MirrorKind::default(),
            intensities: default_intensities(),
            n_rounds,
            eve: EveModel::None,
            drift_step: None,
            delay_step: default_delay_step(),
            seed: None,
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.n_cores
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rounds < 1 {
            return Err(Error::param("n_rounds", "must be at least 1"));
        }
        if self.n_cores < 1 || !self.dim().is_power_of_two() {
            return Err(Error::param(
                "n_cores",
                format!("2 * n_cores must be a power of two, got n_cores = {}", self.n_cores),
            ));
        }
        if self.intensities.is_empty() {
            return Err(Error::param("intensities", "at least one pulse intensity is required"));
        }
        for p in &self.intensities {
            PulseIntensity::new(p.mu, p.role)?;
        }
        OpcParams::new(self.kappa_l)?;
        if !(self.kappa_scale > 0.0 && self.kappa_scale.is_finite()) {
            return Err(Error::param("kappa_scale", "must be positive"));
        }
        if !(self.beta_spread >= 0.0 && self.beta_spread.is_finite()) {
            return Err(Error::param("beta_spread", "must be non-negative"));
        }
        if !self.segment_length.is_finite() {
            return Err(Error::param("segment_length", "must be finite"));
        }
        if !self.delay_step.is_finite() {
            return Err(Error::param("delay_step", "must be finite"));
        }
        if let Some(step) = self.drift_step {
            if !(step > 0.0 && step.is_finite()) {
                return Err(Error::param("drift_step", "must be positive when set"));
            }
        }
        Ok(())
    }

    pub fn mirror(&self) -> Result<Mirror> {
        Ok(match self.mirror {
            MirrorKind::PhaseConjugate => Mirror::PhaseConjugate(OpcParams::new(self.kappa_l)?),
            MirrorKind::Plain => Mirror::Plain,
        })
    }

    pub fn coupling_spec(&self) -> CouplingSpec {
        CouplingSpec {
            kappa_scale: self.kappa_scale,
            beta_spread: self.beta_spread,
            z_length: self.segment_length,
        }
    }

    /// Seed used when none is configured.
    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn draw_sequence<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PerturbationSequence> {
        match self.perturbation {
            PerturbationModel::Symmetric => PerturbationSequence::random_symmetric(
                self.n_cores,
                self.q_perturbations,
                &self.coupling_spec(),
                rng,
            ),
            PerturbationModel::General => {
                PerturbationSequence::random_general(self.n_cores, self.q_perturbations, rng)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisStats {
    pub basis: usize,
    pub sifted: u64,
    pub errors: u64,
    pub qber: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityStats {
    pub role: IntensityRole,
    pub mu: f64,
    pub sent: u64,
    pub detected: u64,
    /// `detected / sent`.
    pub gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionStats {
    pub sent: u64,
    pub detected: u64,
    pub sifted: u64,
    pub errors: u64,
    /// `errors / sifted`, absent when nothing was sifted.
    pub qber: Option<f64>,
    pub sifted_fraction: f64,
    pub per_basis: Vec<BasisStats>,
    pub per_intensity: Vec<IntensityStats>,
    /// Detections from pulses carrying two or more photons.
    pub multi_photon_detected: u64,
    /// Sifted rounds and errors restricted to single-photon pulses.
    pub sifted_single_photon: u64,
    pub errors_single_photon: u64,
    pub eve_interceptions: u64,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl SessionStats {
    fn empty(intensities: &[PulseIntensity]) -> Self {
        Self {
            sent: 0,
            detected: 0,
            sifted: 0,
            errors: 0,
            qber: None,
            sifted_fraction: 0.0,
            per_basis: (0..2)
                .map(|basis| BasisStats { basis, sifted: 0, errors: 0, qber: None })
                .collect(),
            per_intensity: intensities
                .iter()
                .map(|p| IntensityStats { role: p.role, mu: p.mu, sent: 0, detected: 0, gain: None })
                .collect(),
            multi_photon_detected: 0,
            sifted_single_photon: 0,
            errors_single_photon: 0,
            eve_interceptions: 0,
        }
    }

    fn record(&mut self, r: &RoundRecord) {
        self.sent += 1;
        self.per_intensity[r.intensity_index].sent += 1;
        let Some(m) = &r.measurement else { return };
        self.detected += 1;
        self.per_intensity[r.intensity_index].detected += 1;
        if r.photons > 1 {
            self.multi_photon_detected += 1;
        }
        if m.eve_intercepted {
            self.eve_interceptions += 1;
        }
        if m.bob_basis == r.encoding.basis_id {
            let err = (m.outcome != r.encoding.symbol) as u64;
            self.sifted += 1;
            self.errors += err;
            self.per_basis[m.bob_basis].sifted += 1;
            self.per_basis[m.bob_basis].errors += err;
            if r.photons == 1 {
                self.sifted_single_photon += 1;
                self.errors_single_photon += err;
            }
        }
    }

    fn finish(&mut self) {
        self.qber = ratio(self.errors, self.sifted);
        self.sifted_fraction = ratio(self.sifted, self.sent).unwrap_or(0.0);
        for b in &mut self.per_basis {
            b.qber = ratio(b.errors, b.sifted);
        }
        for i in &mut self.per_intensity {
            i.gain = ratio(i.detected, i.sent);
        }
    }

    /// Gain of the first intensity with the given role.
    pub fn gain(&self, role: IntensityRole) -> Option<f64> {
        self.per_intensity.iter().find(|i| i.role == role).and_then(|i| i.gain)
    }
}

/// Bob's side of a round with at least one photon.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub bob_basis: usize,
    pub outcome: usize,
    pub eve_intercepted: bool,
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub round: u64,
    pub encoding: EncodingChoice,
    /// Alice's full EPS phases: source equalization plus encoding.
    pub eps_phases: Vec<f64>,
    pub intensity_index: usize,
    /// Pulse entering Bob's measurer.
    pub bob_field: CoherentVector,
    pub photons: u64,
    pub measurement: Option<Measurement>,
}

/// A configured session, stepped one round at a time.
pub struct Session {
    cfg: SessionConfig,
    seed: RngSeed,
    mubs: MubSet,
    mirror: Mirror,
    launch: CoherentVector,
    equalization: Vec<f64>,
    delays: ModalDelays,
    drifting: Option<(PerturbationSequence, StreamRng)>,
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Result<Self> {
        cfg.validate()?;
        let d = cfg.dim();
        let seed = RngSeed(cfg.effective_seed());
        let launch = csg_tree(Complex64::new(1.0, 0.0), d.trailing_zeros())?;
        // The conjugator flips the sign of every source phase, so Alice
        // equalizes the conjugate pattern.
        let (_, equalization) = equalize_phases(&launch.conj())?;
        let drifting = match cfg.drift_step {
            Some(_) => {
                let mut rng = seed.stream(u64::MAX, StreamRole::Channel);
                Some((cfg.draw_sequence(&mut rng)?, rng))
            }
            None => None,
        };
        Ok(Self {
            mubs: build_mub_pair(d)?,
            mirror: cfg.mirror()?,
            delays: ModalDelays::staggered(d, cfg.delay_step),
            seed,
            launch,
            equalization,
            drifting,
            cfg,
        })
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    pub fn mubs(&self) -> &MubSet {
        &self.mubs
    }

    /// Bob's source output.
    pub fn launch(&self) -> &CoherentVector {
        &self.launch
    }

    /// Channel for round `r`. Drifting channels must be asked for in order.
    fn channel(&mut self, r: u64) -> Result<PerturbationSequence> {
        match (&mut self.drifting, self.cfg.drift_step) {
            (Some((seq, rng)), Some(step)) => {
                if r > 0 {
                    seq.drift(step, rng)?;
                }
                Ok(seq.clone())
            }
            _ => self.cfg.draw_sequence(&mut self.seed.stream(r, StreamRole::Channel)),
        }
    }

    pub fn round(&mut self, r: u64) -> Result<RoundRecord> {
        let d = self.cfg.dim();
        let seq = self.channel(r)?;

        let mut alice = self.seed.stream(r, StreamRole::Alice);
        let basis = alice.random_range(0..2usize);
        let symbol = alice.random_range(0..d);
        let intensity_index = alice.random_range(0..self.cfg.intensities.len());
        let encoding = encode(basis, symbol, &self.mubs)?;
        let eps_phases: Vec<f64> = self
            .equalization
            .iter()
            .zip(&encoding.theta)
            .map(|(a, b)| wrap_phase(a + b))
            .collect();
        let settings = AliceSettings {
            eps_phases: eps_phases.clone(),
            target_mu: self.cfg.intensities[intensity_index].mu,
        };

        let link = Link::new(&seq, self.mirror, self.delays.clone())?;
        let bob_field = link.transmit(&self.launch, &settings)?;

        let photons = sample_photon_number(
            bob_field.mean_photon_number(),
            &mut self.seed.stream(r, StreamRole::Photon),
        )?;
        let measurement = if photons == 0 {
            None
        } else {
            let mut q = to_qudit(&bob_field)?;
            let eve_intercepted = self.cfg.eve == EveModel::InterceptResend;
            if eve_intercepted {
                q = eve_intercept_resend(&q, &self.mubs, &mut self.seed.stream(r, StreamRole::Eve))?;
            }
            let mut bob = self.seed.stream(r, StreamRole::Bob);
            let bob_basis = bob.random_range(0..2usize);
            let outcome = measure_in_basis(&q, self.mubs.basis(bob_basis), &mut bob)?;
            Some(Measurement {
                bob_basis,
                outcome,
                eve_intercepted,
            })
        };

        Ok(RoundRecord {
            round: r,
            encoding,
            eps_phases,
            intensity_index,
            bob_field,
            photons,
            measurement,
        })
    }
}

/// Run every round of `cfg` and tally the results.
pub fn run_session(cfg: &SessionConfig) -> Result<SessionStats> {
    let mut session = Session::new(cfg.clone())?;
    let mut stats = SessionStats::empty(&cfg.intensities);
    for r in 0..cfg.n_rounds {
        stats.record(&session.round(r)?);
    }
    stats.finish();
    Ok(stats)
}

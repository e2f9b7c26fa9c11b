//! Simulation of a bidirectional multimode quantum link whose random modal
//! crosstalk is undone by a phase-conjugate mirror, together with the
//! high-dimensional BB84 session that runs over it.
//!
//! Modules, bottom-up:
//! - [`linalg`]: dense complex matrices, the matrix exponential, random
//!   unitary generators and the factorization of SU(2N) into SU(2) blocks.
//! - [`channel`]: perturbation sequences, the reflection rule and the
//!   round-trip matrix.
//! - [`opc`]: the four-wave-mixing conjugator and its local half-wave plate.
//! - [`states`]: coherent vectors, qudits, attenuation and measurement.
//! - [`protocol`]: coupler-tree source, MUBs, encoding and full sessions.
//!
//! Matrices act on column vectors from the left throughout.

pub mod channel;
pub mod error;
pub mod linalg;
pub mod opc;
pub mod protocol;
pub mod rng;
pub mod states;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// Construction tolerance used when a value is built to be exact.
pub const CONSTRUCTION_TOL: f64 = 1e-12;
/// Tolerance used when verifying a computed invariant.
pub const VERIFY_TOL: f64 = 1e-10;

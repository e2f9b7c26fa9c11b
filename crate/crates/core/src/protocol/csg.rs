//! Coherent-state generator: a binary tree of X(π/4) couplers with vacuum on
//! every idle port.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::states::CoherentVector;

/// Feed `β` through `depth` stages of 50/50 couplers.
///
/// Each stage sends amplitude `x` to the adjacent pair `(x/√2, i x/√2)`, so
/// depth 2 gives `(β/2)(1, i, i, −1)`. All `2^depth` outputs have magnitude
/// `|β| 2^{−depth/2}`.
pub fn csg_tree(beta: Complex64, depth: u32) -> Result<CoherentVector> {
    if depth == 0 {
        return Err(Error::param("depth", "at least one coupler stage is needed"));
    }
    if depth > 20 {
        return Err(Error::param("depth", format!("{depth} stages is too many")));
    }
    let split = [
        Complex64::new(FRAC_1_SQRT_2, 0.0),
        Complex64::new(0.0, FRAC_1_SQRT_2),
    ];
    let mut amps = vec![beta];
    for _ in 0..depth {
        amps = amps
            .iter()
            .flat_map(|&x| split.iter().map(move |&k| k * x))
            .collect();
    }
    CoherentVector::from_amplitudes(amps)
}

/// Per-mode phases `θ_j = −arg α_j` that rotate every component onto the
/// positive real axis, and the rotated vector.
pub fn equalize_phases(v: &CoherentVector) -> Result<(CoherentVector, Vec<f64>)> {
    if let Some(j) = v.amplitudes().iter().position(|a| a.norm() == 0.0) {
        return Err(Error::contract(format!("mode {j} carries no amplitude")));
    }
    let theta: Vec<f64> = v.amplitudes().iter().map(|a| -a.arg()).collect();
    let out = v
        .amplitudes()
        .iter()
        .map(|a| Complex64::new(a.norm(), 0.0))
        .collect();
    Ok((v.with_amplitudes(out)?, theta))
}

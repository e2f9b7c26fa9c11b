use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mub::MubSet;
use crate::error::Result;
use crate::states::{measure_in_basis, QuditState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveModel {
    #[default]
    None,
    InterceptResend,
}

/// Intercept-resend: measure in a uniformly chosen basis of the pair and
/// send on the basis state that was observed.
pub fn eve_intercept_resend<R: Rng + ?Sized>(
    state: &QuditState,
    mubs: &MubSet,
    rng: &mut R,
) -> Result<QuditState> {
    let basis = rng.random_range(0..2usize);
    let outcome = measure_in_basis(state, mubs.basis(basis), rng)?;
    Ok(mubs.state(basis, outcome).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::build_mub_pair;
    use crate::rng::RngSeed;

    #[test]
    fn resent_state_is_a_basis_state() {
        let m = build_mub_pair(4).unwrap();
        let mut rng = RngSeed(5).rng();
        let sent = m.state(1, 2);
        let mut same = 0;
        for _ in 0..2000 {
            let r = eve_intercept_resend(sent, &m, &mut rng).unwrap();
            let in_pair = (0..2).any(|b| (0..4).any(|k| m.state(b, k) == &r));
            assert!(in_pair);
            if &r == sent {
                same += 1;
            }
        }
        // Right basis (1/2) always resends the sent state; wrong basis does
        // so never, since the resent state is then from the other basis.
        assert!((same as f64 / 2000.0 - 0.5).abs() < 0.05);
    }

    #[test]
    fn reproducible() {
        let m = build_mub_pair(8).unwrap();
        let s = m.state(0, 3);
        let a: Vec<_> = {
            let mut r = RngSeed(9).rng();
            (0..50).map(|_| eve_intercept_resend(s, &m, &mut r).unwrap()).collect()
        };
        let b: Vec<_> = {
            let mut r = RngSeed(9).rng();
            (0..50).map(|_| eve_intercept_resend(s, &m, &mut r).unwrap()).collect()
        };
        assert_eq!(a, b);
    }
}

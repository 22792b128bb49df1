//! Closed-form classical counterparts: interferometer visibility and the
//! binary erasure channel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fringe visibility of a Mach-Zehnder interferometer whose arms transmit
/// intensity `exp(-gamma_a)` and `exp(-gamma_b)`.
///
/// Extremizing the output intensity over the relative phase gives
/// `V = 2 e^{-(ga+gb)/2} / (e^{-ga} + e^{-gb})`, which is 1 exactly when the
/// losses are balanced.
pub fn classical_visibility(gamma_a: f64, gamma_b: f64) -> Result<f64> {
    for (name, g) in [("gamma_a", gamma_a), ("gamma_b", gamma_b)] {
        if !(g >= 0.0 && g.is_finite()) {
            return Err(Error::domain(name, g, "must be finite and >= 0"));
        }
    }
    // Written relative to the smaller loss so large gammas do not underflow.
    let delta = (gamma_a - gamma_b).abs();
    Ok(2.0 * (-delta / 2.0).exp() / (1.0 + (-delta).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErasureCapacity {
    /// Classical binary erasure channel capacity, bits per use.
    pub classical_bits: f64,
    /// Dual-rail lower bound, qubits per mode pair use.
    pub quantum_lower_bound_qubits: f64,
}

/// Capacities for an erasure channel that delivers with probability `alpha`.
pub fn erasure_capacity(alpha: f64) -> Result<ErasureCapacity> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain("alpha", alpha, "must lie in [0, 1]"));
    }
    Ok(ErasureCapacity {
        classical_bits: alpha,
        quantum_lower_bound_qubits: alpha / 2.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_loss_gives_unit_visibility() {
        assert_eq!(classical_visibility(0.7, 0.7).unwrap(), 1.0);
        assert_eq!(classical_visibility(0.0, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn unbalanced_example() {
        let v = classical_visibility(0.0, 4f64.ln()).unwrap();
        assert!((v - 0.8).abs() < 1e-15);
        assert_eq!(v, classical_visibility(4f64.ln(), 0.0).unwrap());
    }

    #[test]
    fn visibility_rejects_negative_loss() {
        assert!(classical_visibility(-0.1, 0.0).is_err());
        assert!(classical_visibility(0.0, f64::NAN).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(
            erasure_capacity(1.0).unwrap(),
            ErasureCapacity {
                classical_bits: 1.0,
                quantum_lower_bound_qubits: 0.5
            }
        );
        let c = erasure_capacity((-0.5f64).exp()).unwrap();
        assert!((c.classical_bits - 0.6065306597126334).abs() < 1e-15);
        assert!((c.quantum_lower_bound_qubits - 0.3032653298563167).abs() < 1e-15);
        assert_eq!(erasure_capacity(0.0).unwrap().classical_bits, 0.0);
        assert!(erasure_capacity(1.5).is_err());
    }
}

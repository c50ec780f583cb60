//! Parameter-shift differentiation of [`ReuploadCircuit`].
//!
//! Every trainable or data-dependent angle enters through a Pauli rotation,
//! so `d<Z_q>/dtheta = (f(theta + pi/2) - f(theta - pi/2)) / 2` exactly.

use std::f64::consts::FRAC_PI_2;

use super::circuit::{AngleShift, BlockShift, ReuploadCircuit};
use super::state::StateVector;
use crate::error::{ensure_len, Result};

/// Loss gradients with respect to the circuit's angles and (optionally) its inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitGradient {
    /// One `n_qubits x 3` row-major block per entangling layer.
    pub angles: Vec<Vec<f64>>,
    /// `None` when only the parameter gradient was requested.
    pub features: Option<Vec<f64>>,
    /// Number of shifted circuit evaluations performed.
    pub evaluations: usize,
}

/// Gradient of `sum_q upstream[q] * <Z_q>` with respect to every entangling
/// angle and every input feature.
pub fn circuit_gradient(
    circuit: &ReuploadCircuit,
    features: &[f64],
    upstream: &[f64],
) -> Result<CircuitGradient> {
    gradient(circuit, features, upstream, true)
}

/// As [`circuit_gradient`] but skips the feature shifts; used when the
/// inputs come from a frozen stage.
pub fn circuit_gradient_params(
    circuit: &ReuploadCircuit,
    features: &[f64],
    upstream: &[f64],
) -> Result<CircuitGradient> {
    gradient(circuit, features, upstream, false)
}

fn gradient(
    circuit: &ReuploadCircuit,
    features: &[f64],
    upstream: &[f64],
    with_features: bool,
) -> Result<CircuitGradient> {
    let n = circuit.n_qubits();
    ensure_len("circuit features", features.len(), n)?;
    ensure_len("upstream gradient", upstream.len(), n)?;

    let mut angles: Vec<Vec<f64>> = circuit.layers().iter().map(|l| vec![0.0; l.angles().len()]).collect();
    let mut d_features = with_features.then(|| vec![0.0; n]);

    if upstream.iter().all(|&u| u == 0.0) {
        return Ok(CircuitGradient { angles, features: d_features, evaluations: 0 });
    }

    // State entering each block; the shifted runs restart from there.
    let mut prefix = Vec::with_capacity(circuit.n_blocks());
    let mut state = StateVector::zero(n)?;
    for r in 0..circuit.n_blocks() {
        prefix.push(state.clone());
        circuit.apply_block(&mut state, r, features, None);
    }

    let mut evaluations = 0;
    let mut shifted = |r: usize, make: &dyn Fn(f64) -> BlockShift| -> f64 {
        let side = |delta: f64| {
            let mut s = prefix[r].clone();
            circuit.apply_block(&mut s, r, features, Some(make(delta)));
            for later in r + 1..circuit.n_blocks() {
                circuit.apply_block(&mut s, later, features, None);
            }
            s.expect_z_all().dot(upstream)
        };
        evaluations += 2;
        (side(FRAC_PI_2) - side(-FRAC_PI_2)) / 2.0
    };

    let per_block = circuit.layers_per_block();
    for r in 0..circuit.n_blocks() {
        if let Some(df) = d_features.as_mut() {
            for (q, slot) in df.iter_mut().enumerate() {
                let d = shifted(r, &|delta| BlockShift::Embedding { qubit: q, delta });
                *slot += circuit.angle_scale() * d;
            }
        }
        for layer in 0..per_block {
            let grad = &mut angles[r * per_block + layer];
            for q in 0..n {
                for component in 0..3 {
                    grad[3 * q + component] = shifted(r, &|delta| BlockShift::Angle {
                        layer,
                        shift: AngleShift { qubit: q, component, delta },
                    });
                }
            }
        }
    }

    Ok(CircuitGradient { angles, features: d_features, evaluations })
}

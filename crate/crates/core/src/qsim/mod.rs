//! Dense statevector simulation of angle-embedded, data re-uploading
//! variational circuits.

mod circuit;
mod gradient;
mod state;

pub use circuit::{angle_embed, entangling_layer, EntanglingParams, ReuploadCircuit};
pub use gradient::{circuit_gradient, circuit_gradient_params, CircuitGradient};
pub use state::{Expectations, GateOp, StateVector, MAX_QUBITS};

use std::f64::consts::PI;

use rand::Rng;

use super::state::{Expectations, GateOp, StateVector};
use crate::error::{config, ensure_len, usage, Result};

/// Trainable `(alpha, beta, gamma)` triple for every qubit of one entangling layer.
#[derive(Clone, Debug, PartialEq)]
pub struct EntanglingParams {
    n_qubits: usize,
    /// Row-major `n_qubits x 3`.
    angles: Vec<f64>,
}

impl EntanglingParams {
    pub fn zeros(n_qubits: usize) -> Self {
        Self { n_qubits, angles: vec![0.0; 3 * n_qubits] }
    }

    pub fn from_angles(n_qubits: usize, angles: Vec<f64>) -> Result<Self> {
        ensure_len("entangling angles", angles.len(), 3 * n_qubits)?;
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(usage("entangling angles must be finite"));
        }
        Ok(Self { n_qubits, angles })
    }

    /// Draws every angle uniformly from `[0, 2*pi)`.
    pub fn random<R: Rng + ?Sized>(n_qubits: usize, rng: &mut R) -> Self {
        let angles = (0..3 * n_qubits).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
        Self { n_qubits, angles }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    pub fn qubit(&self, q: usize) -> [f64; 3] {
        [self.angles[3 * q], self.angles[3 * q + 1], self.angles[3 * q + 2]]
    }
}

/// Applies `RY(angle_scale * features[q])` to every qubit `q`.
pub fn angle_embed(state: &mut StateVector, features: &[f64], angle_scale: f64) -> Result<()> {
    ensure_len("embedded features", features.len(), state.n_qubits())?;
    for (q, x) in features.iter().enumerate() {
        state.apply_ry(q, angle_scale * x);
    }
    Ok(())
}

/// One `Rot` per qubit followed by the CNOT ring `(q, q+1 mod n)`.
///
/// The ring is skipped for a single qubit.
pub fn entangling_layer(state: &mut StateVector, params: &EntanglingParams) -> Result<()> {
    if params.n_qubits != state.n_qubits() {
        return Err(usage(format!(
            "entangling parameters for {} qubits applied to {} qubits",
            params.n_qubits,
            state.n_qubits()
        )));
    }
    entangle_with(state, params, None);
    Ok(())
}

/// Shift of a single Rot angle, used by the parameter-shift gradient.
#[derive(Clone, Copy)]
pub(crate) struct AngleShift {
    pub qubit: usize,
    pub component: usize,
    pub delta: f64,
}

pub(crate) fn entangle_with(state: &mut StateVector, params: &EntanglingParams, shift: Option<AngleShift>) {
    let n = state.n_qubits();
    for q in 0..n {
        let mut a = params.qubit(q);
        if let Some(s) = shift {
            if s.qubit == q {
                a[s.component] += s.delta;
            }
        }
        state.apply_unchecked(&GateOp::Rot { target: q, alpha: a[0], beta: a[1], gamma: a[2] });
    }
    if n > 1 {
        for q in 0..n {
            state.apply_cnot(q, (q + 1) % n);
        }
    }
}

/// Data re-uploading circuit: `n_blocks` repetitions of an angle embedding
/// of the same features followed by `layers_per_block` entangling layers,
/// read out as Pauli-Z expectations.
#[derive(Clone, Debug, PartialEq)]
pub struct ReuploadCircuit {
    n_qubits: usize,
    n_blocks: usize,
    layers_per_block: usize,
    angle_scale: f64,
    /// `n_blocks * layers_per_block` layers in execution order.
    layers: Vec<EntanglingParams>,
}

impl ReuploadCircuit {
    pub fn new(
        n_qubits: usize,
        n_blocks: usize,
        layers_per_block: usize,
        angle_scale: f64,
        layers: Vec<EntanglingParams>,
    ) -> Result<Self> {
        if !(1..=super::MAX_QUBITS).contains(&n_qubits) {
            return Err(config(format!("qubit count {n_qubits} outside 1..={}", super::MAX_QUBITS)));
        }
        if n_blocks == 0 {
            return Err(config("a re-upload circuit needs at least one block"));
        }
        if layers_per_block == 0 {
            return Err(config("a block needs at least one entangling layer"));
        }
        if !angle_scale.is_finite() {
            return Err(config("angle scale must be finite"));
        }
        ensure_len("entangling layers", layers.len(), n_blocks * layers_per_block)?;
        if let Some(bad) = layers.iter().find(|l| l.n_qubits != n_qubits) {
            return Err(usage(format!(
                "layer shaped for {} qubits in a {n_qubits}-qubit circuit",
                bad.n_qubits
            )));
        }
        Ok(Self { n_qubits, n_blocks, layers_per_block, angle_scale, layers })
    }

    /// All entangling angles zero.
    pub fn zeros(n_qubits: usize, n_blocks: usize, angle_scale: f64) -> Result<Self> {
        let layers = vec![EntanglingParams::zeros(n_qubits); n_blocks];
        Self::new(n_qubits, n_blocks, 1, angle_scale, layers)
    }

    pub fn random<R: Rng + ?Sized>(
        n_qubits: usize,
        n_blocks: usize,
        layers_per_block: usize,
        angle_scale: f64,
        rng: &mut R,
    ) -> Result<Self> {
        let layers = (0..n_blocks * layers_per_block)
            .map(|_| EntanglingParams::random(n_qubits, rng))
            .collect();
        Self::new(n_qubits, n_blocks, layers_per_block, angle_scale, layers)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn layers_per_block(&self) -> usize {
        self.layers_per_block
    }

    pub fn angle_scale(&self) -> f64 {
        self.angle_scale
    }

    pub fn layers(&self) -> &[EntanglingParams] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [EntanglingParams] {
        &mut self.layers
    }

    /// Layers belonging to block `r`.
    pub fn block(&self, r: usize) -> &[EntanglingParams] {
        &self.layers[r * self.layers_per_block..(r + 1) * self.layers_per_block]
    }

    pub fn n_angles(&self) -> usize {
        self.layers.len() * 3 * self.n_qubits
    }

    /// Evaluates the circuit from `|0...0>`.
    pub fn run(&self, features: &[f64]) -> Result<Expectations> {
        ensure_len("circuit features", features.len(), self.n_qubits)?;
        let mut state = StateVector::zero(self.n_qubits)?;
        for r in 0..self.n_blocks {
            self.apply_block(&mut state, r, features, None);
        }
        Ok(state.expect_z_all())
    }

    pub(crate) fn apply_block(
        &self,
        state: &mut StateVector,
        r: usize,
        features: &[f64],
        shift: Option<BlockShift>,
    ) {
        for (q, x) in features.iter().enumerate() {
            let mut theta = self.angle_scale * x;
            if let Some(BlockShift::Embedding { qubit, delta }) = shift {
                if qubit == q {
                    theta += delta;
                }
            }
            state.apply_ry(q, theta);
        }
        for (l, params) in self.block(r).iter().enumerate() {
            let s = match shift {
                Some(BlockShift::Angle { layer, shift }) if layer == l => Some(shift),
                _ => None,
            };
            entangle_with(state, params, s);
        }
    }
}

/// A single shifted parameter inside one block.
#[derive(Clone, Copy)]
pub(crate) enum BlockShift {
    Embedding { qubit: usize, delta: f64 },
    Angle { layer: usize, shift: AngleShift },
}

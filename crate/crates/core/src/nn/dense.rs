use rand::Rng;
use serde::{Deserialize, Serialize};

use super::init::glorot_uniform;
use super::params::Parameterized;
use crate::error::{ensure_len, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Linear,
    Tanh,
    Sigmoid,
    Relu,
}

impl Activation {
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Linear => z,
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
        }
    }

    /// Derivative expressed through the activated output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Linear => 1.0,
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Fully connected layer `activation(W x + b)`, `W` row-major `out x in`.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseLayer {
    in_dim: usize,
    out_dim: usize,
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub activation: Activation,
}

/// What the backward pass needs from a forward call.
#[derive(Clone, Debug)]
pub struct DenseCache {
    pub input: Vec<f64>,
    pub output: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct DenseGrads {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    pub input: Vec<f64>,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: vec![0.0; in_dim * out_dim],
            biases: vec![0.0; out_dim],
            activation,
        }
    }

    /// Glorot-uniform weights, zero biases.
    pub fn random<R: Rng + ?Sized>(in_dim: usize, out_dim: usize, activation: Activation, rng: &mut R) -> Self {
        Self {
            in_dim,
            out_dim,
            weights: glorot_uniform(rng, in_dim * out_dim, in_dim, out_dim),
            biases: vec![0.0; out_dim],
            activation,
        }
    }

    pub fn from_parts(
        in_dim: usize,
        out_dim: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        activation: Activation,
    ) -> Result<Self> {
        ensure_len("dense weights", weights.len(), in_dim * out_dim)?;
        ensure_len("dense biases", biases.len(), out_dim)?;
        Ok(Self { in_dim, out_dim, weights, biases, activation })
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>> {
        ensure_len("dense input", input.len(), self.in_dim)?;
        Ok(self.forward_unchecked(input))
    }

    fn forward_unchecked(&self, input: &[f64]) -> Vec<f64> {
        self.weights
            .chunks_exact(self.in_dim)
            .zip(&self.biases)
            .map(|(row, b)| {
                let z = row.iter().zip(input).map(|(w, x)| w * x).sum::<f64>() + b;
                self.activation.apply(z)
            })
            .collect()
    }

    pub fn forward_cached(&self, input: &[f64]) -> Result<(Vec<f64>, DenseCache)> {
        let output = self.forward(input)?;
        Ok((output.clone(), DenseCache { input: input.to_vec(), output }))
    }

    /// Gradients given `upstream = dLoss/dOutput`.
    pub fn backward(&self, cache: &DenseCache, upstream: &[f64]) -> Result<DenseGrads> {
        ensure_len("dense upstream", upstream.len(), self.out_dim)?;
        ensure_len("dense cached input", cache.input.len(), self.in_dim)?;
        let mut grads = DenseGrads {
            weights: vec![0.0; self.weights.len()],
            biases: vec![0.0; self.out_dim],
            input: vec![0.0; self.in_dim],
        };
        self.backward_into(cache, upstream, &mut grads);
        Ok(grads)
    }

    /// Accumulates into existing gradient buffers; `grads.input` is overwritten.
    pub(crate) fn backward_into(&self, cache: &DenseCache, upstream: &[f64], grads: &mut DenseGrads) {
        grads.input.iter_mut().for_each(|v| *v = 0.0);
        for (o, (&u, &y)) in upstream.iter().zip(&cache.output).enumerate() {
            let dz = u * self.activation.derivative_from_output(y);
            if dz == 0.0 {
                continue;
            }
            grads.biases[o] += dz;
            let row = &self.weights[o * self.in_dim..(o + 1) * self.in_dim];
            let grow = &mut grads.weights[o * self.in_dim..(o + 1) * self.in_dim];
            for i in 0..self.in_dim {
                grow[i] += dz * cache.input[i];
                grads.input[i] += dz * row[i];
            }
        }
    }
}

impl Parameterized for DenseLayer {
    fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        f(&format!("{prefix}weights"), &[self.out_dim, self.in_dim], &self.weights);
        f(&format!("{prefix}biases"), &[self.out_dim], &self.biases);
    }

    fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&format!("{prefix}weights"), &mut self.weights);
        f(&format!("{prefix}biases"), &mut self.biases);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_bias() {
        let id = DenseLayer::from_parts(2, 2, vec![1.0, 0.0, 0.0, 1.0], vec![0.0; 2], Activation::Linear).unwrap();
        assert_eq!(id.forward(&[3.0, -4.0]).unwrap(), vec![3.0, -4.0]);
        let mut z = DenseLayer::zeros(3, 2, Activation::Linear);
        z.biases = vec![0.5, -1.5];
        assert_eq!(z.forward(&[1.0, 2.0, 3.0]).unwrap(), vec![0.5, -1.5]);
    }

    #[test]
    fn tanh_scalar() {
        let l = DenseLayer::from_parts(1, 1, vec![2.0], vec![0.0], Activation::Tanh).unwrap();
        assert_eq!(l.forward(&[3.0]).unwrap(), vec![6.0f64.tanh()]);
    }

    #[test]
    fn shape_errors() {
        let l = DenseLayer::zeros(3, 2, Activation::Relu);
        assert!(matches!(l.forward(&[1.0]), Err(crate::Error::Usage(_))));
        assert!(DenseLayer::from_parts(2, 2, vec![0.0; 3], vec![0.0; 2], Activation::Linear).is_err());
    }

    #[test]
    fn activations() {
        assert_eq!(Activation::Relu.apply(-2.0), 0.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
    }
}

//! Mini-batch training loop shared by the autoencoder and the regressors.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};
use crate::nn::{Adam, ParameterBundle, Parameterized, DEFAULT_LEARNING_RATE, GRAD_CLIP_NORM};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub clip_norm: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 20, batch_size: 32, learning_rate: DEFAULT_LEARNING_RATE, clip_norm: GRAD_CLIP_NORM, seed: 0 }
    }
}

/// Per-sample loss and gradient for the current parameters.
pub trait SampleGradient<M>: Sync {
    fn loss_and_grad(&self, model: &M, sample: usize) -> Result<(f64, ParameterBundle)>;
}

impl<M, F> SampleGradient<M> for F
where
    F: Fn(&M, usize) -> Result<(f64, ParameterBundle)> + Sync,
{
    fn loss_and_grad(&self, model: &M, sample: usize) -> Result<(f64, ParameterBundle)> {
        self(model, sample)
    }
}

#[cfg(feature = "parallel")]
fn per_sample<M: Sync, G: SampleGradient<M>>(
    model: &M,
    batch: &[usize],
    grad: &G,
) -> Vec<Result<(f64, ParameterBundle)>> {
    use rayon::prelude::*;
    batch.par_iter().map(|&i| grad.loss_and_grad(model, i)).collect()
}

#[cfg(not(feature = "parallel"))]
fn per_sample<M: Sync, G: SampleGradient<M>>(
    model: &M,
    batch: &[usize],
    grad: &G,
) -> Vec<Result<(f64, ParameterBundle)>> {
    batch.iter().map(|&i| grad.loss_and_grad(model, i)).collect()
}

/// Trains `model` with Adam on batch-averaged, norm-clipped gradients.
///
/// Samples are reshuffled every epoch from a generator seeded with
/// `cfg.seed`; per-sample gradients may be computed concurrently but are
/// always summed in batch order. `after_epoch` receives the model and the
/// epoch's mean training loss. Returns the per-epoch training losses.
pub fn fit<M, G>(
    model: &mut M,
    n_samples: usize,
    cfg: &TrainConfig,
    grad: &G,
    mut after_epoch: impl FnMut(&M, usize, f64) -> Result<()>,
) -> Result<Vec<f64>>
where
    M: Parameterized + Sync,
    G: SampleGradient<M>,
{
    if n_samples == 0 {
        return Err(usage("no training samples"));
    }
    if cfg.batch_size == 0 {
        return Err(usage("batch size must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut adam = Adam::new(cfg.learning_rate);
    let mut order: Vec<usize> = (0..n_samples).collect();
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let mut total = ParameterBundle::zeros_like(model);
            for result in per_sample(model, batch, grad) {
                let (loss, g) = result?;
                epoch_loss += loss;
                total.add_assign(&g)?;
            }
            total.scale(1.0 / batch.len() as f64);
            total.clip_global_norm(cfg.clip_norm);
            adam.step(model, &total)?;
        }
        let mean = epoch_loss / n_samples as f64;
        history.push(mean);
        after_epoch(model, epoch, mean)?;
    }
    Ok(history)
}

//! LSTM sequence autoencoder used as a frozen window encoder.
//!
//! The encoder reads a window one scalar per step through an LSTM with
//! [`AE_HIDDEN`] units and projects the final hidden state through a tanh
//! layer to `n_latent` features. The decoder expands the latent back to
//! [`AE_HIDDEN`] features, feeds that vector at every step of a second LSTM
//! and reads one value per step through a linear neuron.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::WindowSet;
use crate::error::{ensure_len, usage, Result};
use crate::nn::{
    mse_loss_and_grad, Activation, DenseCache, DenseGrads, DenseLayer, LstmCell, ParameterBundle, Parameterized,
};
use crate::train::{fit, TrainConfig};

pub const AE_HIDDEN: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct Encoder {
    pub lstm: LstmCell,
    pub projection: DenseLayer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decoder {
    pub expansion: DenseLayer,
    pub lstm: LstmCell,
    pub readout: DenseLayer,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Autoencoder {
    window: usize,
    pub encoder: Encoder,
    pub decoder: Decoder,
    pub epochs_run: usize,
    /// Mean training reconstruction MSE of the last epoch.
    pub final_loss: Option<f64>,
}

impl Encoder {
    pub fn n_latent(&self) -> usize {
        self.projection.out_dim()
    }

    /// Latent features of one window, each strictly inside `(-1, 1)`.
    pub fn encode(&self, window: &[f64]) -> Result<Vec<f64>> {
        let seq: Vec<Vec<f64>> = window.iter().map(|&x| vec![x]).collect();
        let out = self.lstm.forward(&seq)?;
        self.projection.forward(&out.final_hidden)
    }

    /// Encodes every window of a set, concurrently when enabled.
    pub fn encode_all(&self, windows: &WindowSet) -> Result<Vec<Vec<f64>>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            windows.inputs.par_iter().map(|w| self.encode(w)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            windows.inputs.iter().map(|w| self.encode(w)).collect()
        }
    }
}

impl Autoencoder {
    /// Freshly initialized weights for windows of length `window`.
    pub fn new(window: usize, n_latent: usize, seed: u64) -> Result<Self> {
        if window == 0 || n_latent == 0 {
            return Err(usage("window and latent sizes must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(Self {
            window,
            encoder: Encoder {
                lstm: LstmCell::random(1, AE_HIDDEN, &mut rng),
                projection: DenseLayer::random(AE_HIDDEN, n_latent, Activation::Tanh, &mut rng),
            },
            decoder: Decoder {
                expansion: DenseLayer::random(n_latent, AE_HIDDEN, Activation::Tanh, &mut rng),
                lstm: LstmCell::random(AE_HIDDEN, AE_HIDDEN, &mut rng),
                readout: DenseLayer::random(AE_HIDDEN, 1, Activation::Linear, &mut rng),
            },
            epochs_run: 0,
            final_loss: None,
        })
    }

    /// All weights and biases zero.
    pub fn zeros(window: usize, n_latent: usize) -> Self {
        Self {
            window,
            encoder: Encoder {
                lstm: LstmCell::zeros(1, AE_HIDDEN),
                projection: DenseLayer::zeros(AE_HIDDEN, n_latent, Activation::Tanh),
            },
            decoder: Decoder {
                expansion: DenseLayer::zeros(n_latent, AE_HIDDEN, Activation::Tanh),
                lstm: LstmCell::zeros(AE_HIDDEN, AE_HIDDEN),
                readout: DenseLayer::zeros(AE_HIDDEN, 1, Activation::Linear),
            },
            epochs_run: 0,
            final_loss: None,
        }
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn n_latent(&self) -> usize {
        self.encoder.n_latent()
    }

    pub fn encode(&self, window: &[f64]) -> Result<Vec<f64>> {
        ensure_len("encoder window", window.len(), self.window)?;
        self.encoder.encode(window)
    }

    pub fn decode(&self, latent: &[f64]) -> Result<Vec<f64>> {
        ensure_len("decoder latent", latent.len(), self.n_latent())?;
        let expanded = self.decoder.expansion.forward(latent)?;
        let seq = vec![expanded; self.window];
        let out = self.decoder.lstm.forward(&seq)?;
        out.hidden.iter().map(|h| Ok(self.decoder.readout.forward(h)?[0])).collect()
    }

    pub fn reconstruction_mse(&self, window: &[f64]) -> Result<f64> {
        let recon = self.decode(&self.encode(window)?)?;
        Ok(mse_loss_and_grad(&recon, window)?.0)
    }

    pub fn mean_reconstruction_mse(&self, windows: &WindowSet) -> Result<f64> {
        if windows.is_empty() {
            return Err(usage("no windows"));
        }
        let mut total = 0.0;
        for w in &windows.inputs {
            total += self.reconstruction_mse(w)?;
        }
        Ok(total / windows.len() as f64)
    }

    /// Reconstruction MSE of one window and its gradient for every parameter.
    pub fn loss_and_grad(&self, window: &[f64]) -> Result<(f64, ParameterBundle)> {
        ensure_len("encoder window", window.len(), self.window)?;
        let enc_seq: Vec<Vec<f64>> = window.iter().map(|&x| vec![x]).collect();
        let (enc_out, enc_cache) = self.encoder.lstm.forward_cached(&enc_seq)?;
        let (latent, proj_cache) = self.encoder.projection.forward_cached(&enc_out.final_hidden)?;
        let (expanded, exp_cache) = self.decoder.expansion.forward_cached(&latent)?;
        let dec_seq = vec![expanded; self.window];
        let (dec_out, dec_cache) = self.decoder.lstm.forward_cached(&dec_seq)?;

        let readout = &self.decoder.readout;
        let mut recon = Vec::with_capacity(self.window);
        let mut readout_caches = Vec::with_capacity(self.window);
        for h in &dec_out.hidden {
            let (y, cache) = readout.forward_cached(h)?;
            recon.push(y[0]);
            readout_caches.push(cache);
        }
        let (loss, d_recon) = mse_loss_and_grad(&recon, window)?;

        let mut grads = ParameterBundle::zeros_like(self);
        let mut readout_grads = DenseGrads {
            weights: vec![0.0; readout.weights.len()],
            biases: vec![0.0; 1],
            input: vec![0.0; AE_HIDDEN],
        };
        let mut dh_dec = Vec::with_capacity(self.window);
        for (cache, &d) in readout_caches.iter().zip(&d_recon) {
            readout.backward_into(cache, &[d], &mut readout_grads);
            dh_dec.push(readout_grads.input.clone());
        }
        grads.accumulate("decoder.readout.weights", &readout_grads.weights)?;
        grads.accumulate("decoder.readout.biases", &readout_grads.biases)?;

        let dec_grads = self.decoder.lstm.backward(&dec_cache, &dh_dec, None)?;
        grads.accumulate("decoder.lstm.w", &dec_grads.w)?;
        grads.accumulate("decoder.lstm.u", &dec_grads.u)?;
        grads.accumulate("decoder.lstm.b", &dec_grads.b)?;
        let mut d_expanded = vec![0.0; AE_HIDDEN];
        for dx in &dec_grads.inputs {
            for (a, b) in d_expanded.iter_mut().zip(dx) {
                *a += b;
            }
        }

        let exp_grads = dense_backward(&self.decoder.expansion, &exp_cache, &d_expanded, "decoder.expansion.", &mut grads)?;
        let proj_grads =
            dense_backward(&self.encoder.projection, &proj_cache, &exp_grads.input, "encoder.projection.", &mut grads)?;

        let mut dh_enc = vec![Vec::new(); self.window];
        dh_enc[self.window - 1] = proj_grads.input;
        let enc_grads = self.encoder.lstm.backward(&enc_cache, &dh_enc, None)?;
        grads.accumulate("encoder.lstm.w", &enc_grads.w)?;
        grads.accumulate("encoder.lstm.u", &enc_grads.u)?;
        grads.accumulate("encoder.lstm.b", &enc_grads.b)?;
        Ok((loss, grads))
    }
}

fn dense_backward(
    layer: &DenseLayer,
    cache: &DenseCache,
    upstream: &[f64],
    prefix: &str,
    grads: &mut ParameterBundle,
) -> Result<DenseGrads> {
    let g = layer.backward(cache, upstream)?;
    grads.accumulate(&format!("{prefix}weights"), &g.weights)?;
    grads.accumulate(&format!("{prefix}biases"), &g.biases)?;
    Ok(g)
}

impl Parameterized for Autoencoder {
    fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        self.encoder.lstm.visit_params(&format!("{prefix}encoder.lstm."), f);
        self.encoder.projection.visit_params(&format!("{prefix}encoder.projection."), f);
        self.decoder.expansion.visit_params(&format!("{prefix}decoder.expansion."), f);
        self.decoder.lstm.visit_params(&format!("{prefix}decoder.lstm."), f);
        self.decoder.readout.visit_params(&format!("{prefix}decoder.readout."), f);
    }

    fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        self.encoder.lstm.visit_params_mut(&format!("{prefix}encoder.lstm."), f);
        self.encoder.projection.visit_params_mut(&format!("{prefix}encoder.projection."), f);
        self.decoder.expansion.visit_params_mut(&format!("{prefix}decoder.expansion."), f);
        self.decoder.lstm.visit_params_mut(&format!("{prefix}decoder.lstm."), f);
        self.decoder.readout.visit_params_mut(&format!("{prefix}decoder.readout."), f);
    }
}

/// Trains a fresh autoencoder on the input windows of `windows`.
///
/// Returns the trained weights and the per-epoch mean reconstruction MSE.
pub fn train_autoencoder(windows: &WindowSet, n_latent: usize, cfg: &TrainConfig) -> Result<(Autoencoder, Vec<f64>)> {
    if windows.is_empty() {
        return Err(usage("autoencoder needs at least one window"));
    }
    let mut ae = Autoencoder::new(windows.window, n_latent, cfg.seed)?;
    let grad = |m: &Autoencoder, i: usize| m.loss_and_grad(&windows.inputs[i]);
    let history = fit(&mut ae, windows.len(), cfg, &grad, |_, _, _| Ok(()))?;
    ae.epochs_run = history.len();
    ae.final_loss = history.last().copied();
    Ok((ae, history))
}

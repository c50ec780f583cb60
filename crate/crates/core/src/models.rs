//! The four regressors compared in the experiments.
//!
//! * Scenario A replaces a dense layer of `2^Nq` tanh neurons with a single
//!   embedding + entangling block on `Nq` qubits.
//! * Scenario B replaces an LSTM with `Nq` units, which reads the latent as
//!   `Nq` scalar steps, with an `Nq`-qubit circuit re-uploading the latent
//!   `Nq` times.
//!
//! Every variant ends in one linear output neuron.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autoencoder::Encoder;
use crate::data::WindowSet;
use crate::error::{config, ensure_len, usage, Error, Result};
use crate::nn::{mse_loss_and_grad, Activation, DenseCache, DenseLayer, LstmCache, LstmCell, ParameterBundle, Parameterized};
use crate::qsim::{circuit_gradient_params, ReuploadCircuit};
use crate::train::{fit, TrainConfig};

pub const MIN_QUBITS: usize = 2;
pub const MAX_QUBITS: usize = 14;
/// Default experiment grid.
pub const QUBIT_GRID: [usize; 7] = [2, 4, 6, 8, 10, 12, 14];
pub const DEFAULT_ANGLE_SCALE: f64 = PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Scenario {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Classic,
    Hybrid,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::A => "A",
            Scenario::B => "B",
        })
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Classic => "classic",
            Variant::Hybrid => "hybrid",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "A" => Ok(Scenario::A),
            "B" => Ok(Scenario::B),
            _ => Err(usage(format!("unknown scenario `{s}`; valid: A, B"))),
        }
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "classic" => Ok(Variant::Classic),
            "hybrid" => Ok(Variant::Hybrid),
            _ => Err(usage(format!("unknown variant `{s}`; valid: classic, hybrid"))),
        }
    }
}

/// Scenario, variant and qubit count; displayed as e.g. `A-hybrid-Q4`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ModelLabel {
    pub scenario: Scenario,
    pub variant: Variant,
    pub n_q: usize,
}

impl ModelLabel {
    pub fn new(scenario: Scenario, variant: Variant, n_q: usize) -> Result<Self> {
        if !(MIN_QUBITS..=MAX_QUBITS).contains(&n_q) {
            return Err(config(format!("N_q = {n_q} outside {MIN_QUBITS}..={MAX_QUBITS}")));
        }
        Ok(Self { scenario, variant, n_q })
    }

    /// Short family name, `Q<n_q>`.
    pub fn q_name(&self) -> String {
        format!("Q{}", self.n_q)
    }
}

impl fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-Q{}", self.scenario, self.variant, self.n_q)
    }
}

impl FromStr for ModelLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('-').collect();
        let [sc, va, q] = parts.as_slice() else {
            return Err(usage(format!("model label `{s}` is not of the form A-classic-Q4")));
        };
        let n_q = q
            .strip_prefix('Q')
            .and_then(|n| n.parse().ok())
            .ok_or_else(|| usage(format!("bad qubit token `{q}`")))?;
        ModelLabel::new(sc.parse()?, va.parse()?, n_q)
    }
}

/// First stage of a regressor.
#[derive(Clone, Debug, PartialEq)]
pub enum Stage {
    /// `Nq -> 2^Nq` tanh layer.
    Dense(DenseLayer),
    /// LSTM reading the latent as `Nq` one-dimensional steps.
    Lstm(LstmCell),
    /// Angle-embedded circuit read out as `Nq` Pauli-Z expectations.
    Circuit(ReuploadCircuit),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Regressor {
    label: ModelLabel,
    pub stage: Stage,
    pub output: DenseLayer,
}

/// Activations kept from [`Regressor::forward_cached`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    latent: Vec<f64>,
    stage: StageCache,
    output: DenseCache,
}

#[derive(Clone, Debug)]
enum StageCache {
    Dense(DenseCache),
    Lstm(LstmCache),
    Circuit,
}

/// Size facts that define the classic/hybrid equivalences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Architecture {
    pub dense_width: Option<usize>,
    pub recursions: Option<usize>,
    pub qubits: Option<usize>,
    pub reupload_blocks: Option<usize>,
    pub trainable_params: usize,
}

/// Builds a seeded regressor; the angle scale only affects hybrid variants.
pub fn build_model(label: ModelLabel, seed: u64, angle_scale: f64) -> Result<Regressor> {
    let label = ModelLabel::new(label.scenario, label.variant, label.n_q)?;
    let n = label.n_q;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (stage, output_in) = match (label.scenario, label.variant) {
        (Scenario::A, Variant::Classic) => {
            let width = 1usize << n;
            (Stage::Dense(DenseLayer::random(n, width, Activation::Tanh, &mut rng)), width)
        }
        (Scenario::A, Variant::Hybrid) => (Stage::Circuit(ReuploadCircuit::random(n, 1, 1, angle_scale, &mut rng)?), n),
        (Scenario::B, Variant::Classic) => (Stage::Lstm(LstmCell::random(1, n, &mut rng)), n),
        (Scenario::B, Variant::Hybrid) => (Stage::Circuit(ReuploadCircuit::random(n, n, 1, angle_scale, &mut rng)?), n),
    };
    let output = DenseLayer::random(output_in, 1, Activation::Linear, &mut rng);
    Ok(Regressor { label, stage, output })
}

impl Regressor {
    pub fn from_parts(label: ModelLabel, stage: Stage, output: DenseLayer) -> Result<Self> {
        let n = label.n_q;
        let width = match (&stage, label.scenario, label.variant) {
            (Stage::Dense(d), Scenario::A, Variant::Classic) if d.in_dim() == n && d.out_dim() == 1 << n => d.out_dim(),
            (Stage::Lstm(l), Scenario::B, Variant::Classic) if l.input_dim() == 1 && l.hidden_dim() == n => n,
            (Stage::Circuit(c), Scenario::A, Variant::Hybrid) if c.n_qubits() == n && c.n_blocks() == 1 => n,
            (Stage::Circuit(c), Scenario::B, Variant::Hybrid) if c.n_qubits() == n && c.n_blocks() == n => n,
            _ => return Err(usage(format!("stage does not match model {label}"))),
        };
        if output.in_dim() != width || output.out_dim() != 1 || output.activation != Activation::Linear {
            return Err(usage("output must be a single linear neuron over the stage"));
        }
        Ok(Self { label, stage, output })
    }

    pub fn label(&self) -> ModelLabel {
        self.label
    }

    pub fn architecture(&self) -> Architecture {
        let mut a = Architecture {
            dense_width: None,
            recursions: None,
            qubits: None,
            reupload_blocks: None,
            trainable_params: self.n_params(),
        };
        match &self.stage {
            Stage::Dense(d) => a.dense_width = Some(d.out_dim()),
            Stage::Lstm(_) => a.recursions = Some(self.label.n_q),
            Stage::Circuit(c) => {
                a.qubits = Some(c.n_qubits());
                a.reupload_blocks = Some(c.n_blocks());
            }
        }
        a
    }

    /// Next-step prediction in normalized units.
    pub fn predict(&self, latent: &[f64]) -> Result<f64> {
        Ok(self.forward_cached(latent)?.0)
    }

    pub fn forward_cached(&self, latent: &[f64]) -> Result<(f64, ForwardCache)> {
        ensure_len("regressor latent", latent.len(), self.label.n_q)?;
        let (features, stage) = match &self.stage {
            Stage::Dense(d) => {
                let (h, c) = d.forward_cached(latent)?;
                (h, StageCache::Dense(c))
            }
            Stage::Lstm(l) => {
                let seq: Vec<Vec<f64>> = latent.iter().map(|&x| vec![x]).collect();
                let (out, cache) = l.forward_cached(&seq)?;
                (out.final_hidden, StageCache::Lstm(cache))
            }
            Stage::Circuit(c) => (c.run(latent)?.values, StageCache::Circuit),
        };
        let (y, output) = self.output.forward_cached(&features)?;
        Ok((y[0], ForwardCache { latent: latent.to_vec(), stage, output }))
    }

    /// Gradients of every trainable parameter for `upstream = dLoss/dPrediction`.
    /// The latent is treated as a constant.
    pub fn backward(&self, cache: &ForwardCache, upstream: f64) -> Result<ParameterBundle> {
        let mut grads = ParameterBundle::zeros_like(self);
        let out = self.output.backward(&cache.output, &[upstream])?;
        grads.accumulate("output.weights", &out.weights)?;
        grads.accumulate("output.biases", &out.biases)?;
        match (&self.stage, &cache.stage) {
            (Stage::Dense(d), StageCache::Dense(c)) => {
                let g = d.backward(c, &out.input)?;
                grads.accumulate("hidden.weights", &g.weights)?;
                grads.accumulate("hidden.biases", &g.biases)?;
            }
            (Stage::Lstm(l), StageCache::Lstm(c)) => {
                let mut dh = vec![Vec::new(); c.steps.len()];
                *dh.last_mut().ok_or_else(|| Error::Internal("empty lstm cache".into()))? = out.input.clone();
                let g = l.backward(c, &dh, None)?;
                grads.accumulate("lstm.w", &g.w)?;
                grads.accumulate("lstm.u", &g.u)?;
                grads.accumulate("lstm.b", &g.b)?;
            }
            (Stage::Circuit(circuit), StageCache::Circuit) => {
                let g = circuit_gradient_params(circuit, &cache.latent, &out.input)?;
                for (i, layer) in g.angles.iter().enumerate() {
                    grads.accumulate(&format!("circuit.layer{i}"), layer)?;
                }
            }
            _ => return Err(Error::Internal("forward cache from a different model".into())),
        }
        Ok(grads)
    }

    /// Squared error of one sample and its parameter gradient.
    pub fn loss_and_grad(&self, latent: &[f64], target: f64) -> Result<(f64, ParameterBundle)> {
        let (pred, cache) = self.forward_cached(latent)?;
        let (loss, d) = mse_loss_and_grad(&[pred], &[target])?;
        Ok((loss, self.backward(&cache, d[0])?))
    }

    pub fn mse(&self, latents: &[Vec<f64>], targets: &[f64]) -> Result<f64> {
        let preds = self.predict_all(latents)?;
        Ok(mse_loss_and_grad(&preds, targets)?.0)
    }

    pub fn predict_all(&self, latents: &[Vec<f64>]) -> Result<Vec<f64>> {
        #[cfg(feature = "parallel")]
        {
            use rayon::prelude::*;
            latents.par_iter().map(|l| self.predict(l)).collect()
        }
        #[cfg(not(feature = "parallel"))]
        {
            latents.iter().map(|l| self.predict(l)).collect()
        }
    }
}

impl Parameterized for Regressor {
    fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        match &self.stage {
            Stage::Dense(d) => d.visit_params(&format!("{prefix}hidden."), f),
            Stage::Lstm(l) => l.visit_params(&format!("{prefix}lstm."), f),
            Stage::Circuit(c) => {
                for (i, layer) in c.layers().iter().enumerate() {
                    f(&format!("{prefix}circuit.layer{i}"), &[layer.n_qubits(), 3], layer.angles());
                }
            }
        }
        self.output.visit_params(&format!("{prefix}output."), f);
    }

    fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        match &mut self.stage {
            Stage::Dense(d) => d.visit_params_mut(&format!("{prefix}hidden."), f),
            Stage::Lstm(l) => l.visit_params_mut(&format!("{prefix}lstm."), f),
            Stage::Circuit(c) => {
                for (i, layer) in c.layers_mut().iter_mut().enumerate() {
                    f(&format!("{prefix}circuit.layer{i}"), layer.angles_mut());
                }
            }
        }
        self.output.visit_params_mut(&format!("{prefix}output."), f);
    }
}

/// Per-epoch training and validation MSE.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LossHistory {
    pub train: Vec<f64>,
    pub validation: Vec<f64>,
}

/// Trains on pre-encoded latents. `validation` may be empty, in which case
/// no validation loss is recorded.
pub fn train_on_latents(
    model: &mut Regressor,
    train: (&[Vec<f64>], &[f64]),
    validation: (&[Vec<f64>], &[f64]),
    cfg: &TrainConfig,
) -> Result<LossHistory> {
    let (xs, ys) = train;
    ensure_len("training targets", ys.len(), xs.len())?;
    ensure_len("validation targets", validation.1.len(), validation.0.len())?;
    if xs.is_empty() {
        return Err(usage("no training windows"));
    }
    let mut val_history = Vec::with_capacity(cfg.epochs);
    let grad = |m: &Regressor, i: usize| m.loss_and_grad(&xs[i], ys[i]);
    let train_history = fit(model, xs.len(), cfg, &grad, |m, _, _| {
        if !validation.0.is_empty() {
            val_history.push(m.mse(validation.0, validation.1)?);
        }
        Ok(())
    })?;
    Ok(LossHistory { train: train_history, validation: val_history })
}

/// Encodes windows with the frozen encoder, then trains the regressor.
pub fn train_regressor(
    model: &mut Regressor,
    encoder: &Encoder,
    train: &WindowSet,
    validation: &WindowSet,
    cfg: &TrainConfig,
) -> Result<LossHistory> {
    if encoder.n_latent() != model.label.n_q {
        return Err(usage(format!(
            "encoder emits {} features, model {} expects {}",
            encoder.n_latent(),
            model.label,
            model.label.n_q
        )));
    }
    let xs = encoder.encode_all(train)?;
    let vx = encoder.encode_all(validation)?;
    train_on_latents(model, (&xs, &train.targets), (&vx, &validation.targets), cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn label(s: Scenario, v: Variant, n: usize) -> ModelLabel {
        ModelLabel::new(s, v, n).unwrap()
    }

    #[test]
    fn classic_a_width() {
        let m = build_model(label(Scenario::A, Variant::Classic, 3), 0, PI).unwrap();
        assert_eq!(m.architecture().dense_width, Some(8));
    }

    #[test]
    fn hybrid_b_parameter_count() {
        let m = build_model(label(Scenario::B, Variant::Hybrid, 6), 0, PI).unwrap();
        let a = m.architecture();
        assert_eq!(a.qubits, Some(6));
        assert_eq!(a.reupload_blocks, Some(6));
        assert_eq!(a.trainable_params, 6 * 6 * 3 + 7);
    }

    #[test]
    fn grid_bounds() {
        assert!(matches!(ModelLabel::new(Scenario::A, Variant::Hybrid, 1), Err(Error::Config(_))));
        assert!(ModelLabel::new(Scenario::A, Variant::Hybrid, 15).is_err());
    }

    #[test]
    fn label_round_trip() {
        for s in [Scenario::A, Scenario::B] {
            for v in [Variant::Classic, Variant::Hybrid] {
                let l = label(s, v, 10);
                assert_eq!(l.to_string().parse::<ModelLabel>().unwrap(), l);
            }
        }
        assert!("C-classic-Q4".parse::<ModelLabel>().is_err());
        assert_eq!(label(Scenario::B, Variant::Hybrid, 4).q_name(), "Q4");
    }

    #[test]
    fn hybrid_a_zero_output_gives_bias() {
        let mut m = build_model(label(Scenario::A, Variant::Hybrid, 3), 5, PI).unwrap();
        if let Stage::Circuit(c) = &mut m.stage {
            for l in c.layers_mut() {
                l.angles_mut().iter_mut().for_each(|a| *a = 0.0);
            }
        }
        m.output.weights.iter_mut().for_each(|w| *w = 0.0);
        m.output.biases = vec![0.42];
        assert_eq!(m.predict(&[0.1, -0.3, 0.8]).unwrap(), 0.42);
    }

    #[test]
    fn classic_b_zero_weights_gives_bias() {
        let l = label(Scenario::B, Variant::Classic, 4);
        let mut out = DenseLayer::zeros(4, 1, Activation::Linear);
        out.biases = vec![-0.7];
        let m = Regressor::from_parts(l, Stage::Lstm(LstmCell::zeros(1, 4)), out).unwrap();
        assert_eq!(m.predict(&[0.5, 0.1, -0.2, 0.9]).unwrap(), -0.7);
    }

    #[test]
    fn zero_upstream() {
        for s in [Scenario::A, Scenario::B] {
            for v in [Variant::Classic, Variant::Hybrid] {
                let m = build_model(label(s, v, 2), 1, PI).unwrap();
                let (_, cache) = m.forward_cached(&[0.3, -0.6]).unwrap();
                let g = m.backward(&cache, 0.0).unwrap();
                assert!(g.blocks.iter().flat_map(|b| &b.values).all(|&x| x == 0.0), "{}", m.label());
            }
        }
    }

    #[test]
    fn mismatched_parts() {
        let l = label(Scenario::A, Variant::Classic, 3);
        let bad = DenseLayer::zeros(3, 4, Activation::Tanh);
        assert!(Regressor::from_parts(l, Stage::Dense(bad), DenseLayer::zeros(4, 1, Activation::Linear)).is_err());
    }

    #[test]
    fn latent_length_checked() {
        let m = build_model(label(Scenario::B, Variant::Hybrid, 3), 0, PI).unwrap();
        assert!(m.predict(&[0.0, 0.0]).is_err());
    }
}

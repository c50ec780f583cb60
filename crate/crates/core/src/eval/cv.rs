//! Per-fold pipeline: normalize on train, window each split separately,
//! pre-train the encoder, fit a regressor, score on the held-out block.

use serde::{Deserialize, Serialize};

use super::folds::{Fold, FoldPlan};
use super::metrics::{box_stats, compute_metrics, mean_std, BoxStats, MeanStd, Metrics};
use crate::autoencoder::{train_autoencoder, Autoencoder};
use crate::data::{windows_over_runs, MinMaxScaler, WindowSet, DEFAULT_WINDOW};
use crate::error::{usage, Result};
use crate::models::{build_model, train_on_latents, LossHistory, ModelLabel, DEFAULT_ANGLE_SCALE};
use crate::train::TrainConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub window: usize,
    pub autoencoder: TrainConfig,
    pub regressor: TrainConfig,
    pub angle_scale: f64,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            window: DEFAULT_WINDOW,
            autoencoder: TrainConfig::default(),
            regressor: TrainConfig::default(),
            angle_scale: DEFAULT_ANGLE_SCALE,
        }
    }
}

/// Seed for fold `fold` of stream `stream`, so folds and stages draw
/// independent but reproducible initializations.
pub fn derive_seed(seed: u64, fold: usize, stream: u64) -> u64 {
    let mut z = seed ^ (fold as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ stream.wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

const AE_STREAM: u64 = 1;
const MODEL_STREAM: u64 = 2;

/// Windows of one fold's three splits, in normalized units.
#[derive(Clone, Debug)]
pub struct FoldWindows {
    pub scaler: MinMaxScaler,
    pub train: WindowSet,
    pub validation: WindowSet,
    pub test: WindowSet,
}

/// Normalizes with train-only statistics and windows every contiguous run
/// of each split on its own, so no window reads across split boundaries.
pub fn window_fold(values: &[f64], fold: &Fold, window: usize) -> Result<FoldWindows> {
    let scaler = MinMaxScaler::fit_indices(values, &fold.train)?;
    let normalized = scaler.apply_all(values);
    let build = |runs: Vec<std::ops::Range<usize>>| windows_over_runs(&normalized, &runs, window);
    let fw = FoldWindows {
        scaler,
        train: build(fold.train_runs()),
        validation: build(fold.validation_runs()),
        test: build(fold.test_runs()),
    };
    if fw.train.is_empty() || fw.test.is_empty() {
        return Err(usage(format!("fold {} has no complete training or test window", fold.index)));
    }
    Ok(fw)
}

/// A fold with its trained encoder and encoded latents.
#[derive(Clone, Debug)]
pub struct PreparedFold {
    pub index: usize,
    pub windows: FoldWindows,
    pub autoencoder: Autoencoder,
    pub ae_history: Vec<f64>,
    pub train_latents: Vec<Vec<f64>>,
    pub validation_latents: Vec<Vec<f64>>,
    pub test_latents: Vec<Vec<f64>>,
}

/// Identity of a trained encoder, used to reuse it across model variants.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EncoderKey {
    pub n_latent: usize,
    pub seed: u64,
    pub data_hash: u64,
    pub fold: usize,
}

impl EncoderKey {
    pub fn file_stem(&self) -> String {
        format!("ae_q{}_s{}_{:016x}_f{}", self.n_latent, self.seed, self.data_hash, self.fold)
    }
}

/// Where pre-trained encoders are looked up and stored.
pub trait EncoderStore {
    fn load(&mut self, key: &EncoderKey) -> Result<Option<(Autoencoder, Vec<f64>)>>;
    fn store(&mut self, key: &EncoderKey, ae: &Autoencoder, history: &[f64]) -> Result<()>;
}

/// Keeps nothing; every fold trains its encoder from scratch.
pub struct NoStore;

impl EncoderStore for NoStore {
    fn load(&mut self, _: &EncoderKey) -> Result<Option<(Autoencoder, Vec<f64>)>> {
        Ok(None)
    }

    fn store(&mut self, _: &EncoderKey, _: &Autoencoder, _: &[f64]) -> Result<()> {
        Ok(())
    }
}

/// FNV-1a hash over everything that determines a fold's encoder.
fn encoder_data_hash(values: &[f64], plan: &FoldPlan, cfg: &CvConfig) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |x: u64| {
        for b in x.to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
    };
    for v in values {
        eat(v.to_bits());
    }
    for x in [plan.n, plan.k, plan.gap_size, cfg.window, cfg.autoencoder.epochs, cfg.autoencoder.batch_size] {
        eat(x as u64);
    }
    eat(plan.val_fraction.to_bits());
    eat(cfg.autoencoder.learning_rate.to_bits());
    eat(cfg.autoencoder.clip_norm.to_bits());
    h
}

pub fn prepare_folds(
    values: &[f64],
    plan: &FoldPlan,
    n_latent: usize,
    cfg: &CvConfig,
    store: &mut dyn EncoderStore,
) -> Result<Vec<PreparedFold>> {
    if values.len() != plan.n {
        return Err(usage(format!("plan is for {} samples, series has {}", plan.n, values.len())));
    }
    let data_hash = encoder_data_hash(values, plan, cfg);
    plan.folds
        .iter()
        .map(|fold| {
            let windows = window_fold(values, fold, cfg.window)?;
            let key = EncoderKey { n_latent, seed: cfg.autoencoder.seed, data_hash, fold: fold.index };
            let (autoencoder, ae_history) = match store.load(&key)? {
                Some(found) => found,
                None => {
                    let ae_cfg = TrainConfig {
                        seed: derive_seed(cfg.autoencoder.seed, fold.index, AE_STREAM),
                        ..cfg.autoencoder.clone()
                    };
                    let trained = train_autoencoder(&windows.train, n_latent, &ae_cfg)?;
                    store.store(&key, &trained.0, &trained.1)?;
                    trained
                }
            };
            let enc = &autoencoder.encoder;
            Ok(PreparedFold {
                index: fold.index,
                train_latents: enc.encode_all(&windows.train)?,
                validation_latents: enc.encode_all(&windows.validation)?,
                test_latents: enc.encode_all(&windows.test)?,
                windows,
                autoencoder,
                ae_history,
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldMetrics {
    pub fold: usize,
    /// On min-max normalized values.
    pub normalized: Metrics,
    /// On vehicles/hour.
    pub raw: Metrics,
    pub n_test: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mse: MeanStd,
    pub mae: MeanStd,
    /// Over folds with a defined R².
    pub r2: MeanStd,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricBoxes {
    pub mse: Option<BoxStats>,
    pub mae: Option<BoxStats>,
    pub r2: Option<BoxStats>,
}

/// Per-fold scores and their cross-fold aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub label: ModelLabel,
    pub folds: Vec<FoldMetrics>,
    pub normalized: MetricSummary,
    pub raw: MetricSummary,
    pub boxes: MetricBoxes,
}

impl MetricsReport {
    pub fn from_folds(label: ModelLabel, folds: Vec<FoldMetrics>) -> Self {
        let pick = |f: &dyn Fn(&FoldMetrics) -> Option<f64>| -> Vec<f64> { folds.iter().filter_map(f).collect() };
        let summary = |raw: bool| {
            let m = |fm: &FoldMetrics| if raw { fm.raw } else { fm.normalized };
            MetricSummary {
                mse: mean_std(&pick(&|fm| Some(m(fm).mse))),
                mae: mean_std(&pick(&|fm| Some(m(fm).mae))),
                r2: mean_std(&pick(&|fm| m(fm).r2)),
            }
        };
        let boxes = MetricBoxes {
            mse: box_stats(&pick(&|fm| Some(fm.normalized.mse))),
            mae: box_stats(&pick(&|fm| Some(fm.normalized.mae))),
            r2: box_stats(&pick(&|fm| fm.normalized.r2)),
        };
        Self { label, normalized: summary(false), raw: summary(true), boxes, folds }
    }

    pub fn per_fold(&self, metric: MetricKind) -> Vec<Option<f64>> {
        self.folds.iter().map(|f| metric.of(&f.normalized)).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Mse,
    Mae,
    R2,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Mse, MetricKind::Mae, MetricKind::R2];

    pub fn of(self, m: &Metrics) -> Option<f64> {
        match self {
            MetricKind::Mse => Some(m.mse),
            MetricKind::Mae => Some(m.mae),
            MetricKind::R2 => m.r2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Mse => "mse",
            MetricKind::Mae => "mae",
            MetricKind::R2 => "r2",
        }
    }
}

/// Training (and validation) loss per epoch for every fold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceHistory {
    pub train: Vec<Vec<f64>>,
    pub validation: Vec<Vec<f64>>,
    pub mean: Vec<f64>,
    /// Population standard deviation across folds, per epoch.
    pub std: Vec<f64>,
}

impl ConvergenceHistory {
    pub fn from_histories(histories: &[LossHistory]) -> Self {
        let train: Vec<Vec<f64>> = histories.iter().map(|h| h.train.clone()).collect();
        let epochs = train.iter().map(Vec::len).min().unwrap_or(0);
        let (mean, std) = (0..epochs)
            .map(|e| {
                let ms = mean_std(&train.iter().map(|t| t[e]).collect::<Vec<_>>());
                (ms.mean, ms.std)
            })
            .unzip();
        Self { validation: histories.iter().map(|h| h.validation.clone()).collect(), train, mean, std }
    }

    /// First epoch (1-based) whose mean loss is within `tolerance` (relative)
    /// of the final mean loss.
    pub fn epochs_to_converge(&self, tolerance: f64) -> Option<usize> {
        let last = *self.mean.last()?;
        self.mean.iter().position(|&l| (l - last).abs() <= tolerance * last.abs()).map(|p| p + 1)
    }
}

/// Outputs of one fold for one model.
#[derive(Clone, Debug)]
pub struct FoldRun {
    pub metrics: FoldMetrics,
    pub history: LossHistory,
    /// Normalized predictions and targets over the test windows.
    pub predictions: Vec<f64>,
    pub targets: Vec<f64>,
    /// Series index of each test target.
    pub target_index: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct CvOutcome {
    pub label: ModelLabel,
    pub report: MetricsReport,
    pub convergence: ConvergenceHistory,
    pub runs: Vec<FoldRun>,
}

/// Trains and scores `label` on already prepared folds.
pub fn evaluate_model(label: ModelLabel, folds: &[PreparedFold], cfg: &CvConfig) -> Result<CvOutcome> {
    let mut runs = Vec::with_capacity(folds.len());
    for pf in folds {
        if pf.autoencoder.n_latent() != label.n_q {
            return Err(usage(format!("fold {} was prepared for N_q = {}", pf.index, pf.autoencoder.n_latent())));
        }
        let mut model = build_model(label, derive_seed(cfg.regressor.seed, pf.index, MODEL_STREAM), cfg.angle_scale)?;
        let reg_cfg = TrainConfig { seed: derive_seed(cfg.regressor.seed, pf.index, MODEL_STREAM + 1), ..cfg.regressor.clone() };
        let w = &pf.windows;
        let history = train_on_latents(
            &mut model,
            (&pf.train_latents, &w.train.targets),
            (&pf.validation_latents, &w.validation.targets),
            &reg_cfg,
        )?;
        let predictions = model.predict_all(&pf.test_latents)?;
        let targets = w.test.targets.clone();
        let normalized = compute_metrics(&predictions, &targets)?;
        let raw = compute_metrics(&w.scaler.invert_all(&predictions), &w.scaler.invert_all(&targets))?;
        runs.push(FoldRun {
            metrics: FoldMetrics { fold: pf.index, normalized, raw, n_test: targets.len() },
            history,
            predictions,
            targets,
            target_index: w.test.starts.iter().map(|s| s + w.test.window).collect(),
        });
    }
    let report = MetricsReport::from_folds(label, runs.iter().map(|r| r.metrics.clone()).collect());
    let histories: Vec<LossHistory> = runs.iter().map(|r| r.history.clone()).collect();
    Ok(CvOutcome { label, report, convergence: ConvergenceHistory::from_histories(&histories), runs })
}

/// Full pipeline for one model without encoder caching.
pub fn run_cross_validation(label: ModelLabel, values: &[f64], plan: &FoldPlan, cfg: &CvConfig) -> Result<CvOutcome> {
    let folds = prepare_folds(values, plan, label.n_q, cfg, &mut NoStore)?;
    evaluate_model(label, &folds, cfg)
}

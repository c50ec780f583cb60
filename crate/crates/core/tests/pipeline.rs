mod common;

use common::*;
use qtraffic::autoencoder::{train_autoencoder, Autoencoder};
use qtraffic::data::{generate_synthetic, make_windows, SyntheticConfig};
use qtraffic::eval::{gap_kfold_split, run_cross_validation, CvConfig};
use qtraffic::models::{ModelLabel, Scenario, Variant};
use qtraffic::train::TrainConfig;

#[test]
fn random_fold_plans_hold_their_invariants() {
    let (checked, failures) = random_plan_check(200, 99);
    assert_eq!(checked, 200);
    assert!(failures.is_empty(), "{failures:#?}");
}

#[test]
fn no_index_is_shared_between_splits() {
    let values: Vec<f64> = (0..2000).map(|i| 100.0 + 40.0 * (i as f64 * 0.05).sin()).collect();
    for (gap, vf, w) in [(50, 0.1, 20), (0, 0.2, 5), (200, 0.05, 20)] {
        assert_eq!(leakage_count(&values, 5, gap, vf, w), 0, "gap {gap} vf {vf} w {w}");
    }
}

fn tiny_cv() -> CvConfig {
    let t = TrainConfig { epochs: 2, batch_size: 16, ..TrainConfig::default() };
    CvConfig { window: 8, autoencoder: t.clone(), regressor: t, angle_scale: std::f64::consts::PI }
}

#[test]
fn cross_validation_is_deterministic() {
    let series = generate_synthetic(&SyntheticConfig { n_days: 1, ..Default::default() }).unwrap();
    let plan = gap_kfold_split(series.len(), 3, 20, 0.1).unwrap();
    let label = ModelLabel::new(Scenario::B, Variant::Hybrid, 2).unwrap();
    let a = run_cross_validation(label, &series.values, &plan, &tiny_cv()).unwrap();
    let b = run_cross_validation(label, &series.values, &plan, &tiny_cv()).unwrap();
    assert_eq!(a.report, b.report);
    assert_eq!(a.convergence, b.convergence);
    assert_eq!(a.report.folds.len(), 3);
}

#[test]
fn trained_autoencoder_halves_reconstruction_error() {
    let series = generate_synthetic(&SyntheticConfig { n_days: 2, ..Default::default() }).unwrap();
    let max = series.values.iter().cloned().fold(0.0, f64::max);
    let norm: Vec<f64> = series.values.iter().map(|v| v / max).collect();
    let windows = make_windows(&norm, 0, 20).unwrap();
    let cfg = TrainConfig { epochs: 5, batch_size: 32, ..TrainConfig::default() };
    let untrained = Autoencoder::new(20, 4, cfg.seed).unwrap().mean_reconstruction_mse(&windows).unwrap();
    let (ae, hist) = train_autoencoder(&windows, 4, &cfg).unwrap();
    let trained = ae.mean_reconstruction_mse(&windows).unwrap();
    assert!(trained <= 0.5 * untrained, "untrained {untrained}, trained {trained}, history {hist:?}");
}

//! WebAssembly bindings for the browser demo.

use qtraffic::data::{generate_synthetic, SyntheticConfig};
use qtraffic::eval::gap_kfold_split;
use qtraffic::qsim::ReuploadCircuit;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wasm_bindgen::prelude::*;

pub const ROLE_TRAIN: u8 = 0;
pub const ROLE_VALIDATION: u8 = 1;
pub const ROLE_TEST: u8 = 2;
pub const ROLE_GAP: u8 = 3;

/// ⟨Z⟩ of qubit 0 for `samples` feature values evenly spaced on [-1, 1],
/// every qubit receiving the same value.
pub fn reupload_curve_impl(
    n_qubits: usize,
    n_blocks: usize,
    angle_scale: f64,
    seed: Option<u64>,
    samples: usize,
) -> Result<Vec<f64>, String> {
    let circuit = match seed {
        Some(s) => ReuploadCircuit::random(n_qubits, n_blocks, 1, angle_scale, &mut ChaCha8Rng::seed_from_u64(s)),
        None => ReuploadCircuit::zeros(n_qubits, n_blocks, angle_scale),
    }
    .map_err(|e| e.to_string())?;
    if samples < 2 {
        return Err("need at least two samples".into());
    }
    (0..samples)
        .map(|i| {
            let x = -1.0 + 2.0 * i as f64 / (samples - 1) as f64;
            circuit.run(&vec![x; n_qubits]).map(|e| e.values[0]).map_err(|e| e.to_string())
        })
        .collect()
}

/// Row-major `k × n` role codes, one row per fold.
pub fn fold_plan_impl(n: usize, k: usize, gap: usize, val_fraction: f64) -> Result<Vec<u8>, String> {
    let plan = gap_kfold_split(n, k, gap, val_fraction).map_err(|e| e.to_string())?;
    let mut roles = vec![ROLE_GAP; n * k];
    for (f, fold) in plan.folds.iter().enumerate() {
        let row = &mut roles[f * n..(f + 1) * n];
        for &i in &fold.train {
            row[i] = ROLE_TRAIN;
        }
        for &i in &fold.validation {
            row[i] = ROLE_VALIDATION;
        }
        for i in fold.test.clone() {
            row[i] = ROLE_TEST;
        }
    }
    Ok(roles)
}

pub fn synthetic_series_impl(n_days: usize, noise_std: f64, seed: u64) -> Result<Vec<f64>, String> {
    let cfg = SyntheticConfig { n_days, noise_std, seed, ..SyntheticConfig::default() };
    generate_synthetic(&cfg).map(|s| s.values).map_err(|e| e.to_string())
}

/// Negative `seed` selects zero entangling angles.
#[wasm_bindgen]
pub fn reupload_curve(n_qubits: usize, n_blocks: usize, angle_scale: f64, seed: f64, samples: usize) -> Result<Vec<f64>, JsValue> {
    let seed = (seed >= 0.0).then_some(seed as u64);
    reupload_curve_impl(n_qubits, n_blocks, angle_scale, seed, samples).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn fold_plan(n: usize, k: usize, gap: usize, val_fraction: f64) -> Result<Vec<u8>, JsValue> {
    fold_plan_impl(n, k, gap, val_fraction).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn synthetic_series(n_days: usize, noise_std: f64, seed: u32) -> Result<Vec<f64>, JsValue> {
    synthetic_series_impl(n_days, noise_std, seed as u64).map_err(|e| JsValue::from_str(&e))
}

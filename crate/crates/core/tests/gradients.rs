mod common;

use common::*;
use qtraffic::nn::{Activation, DenseLayer, LstmCell, ParameterBundle};
use qtraffic::train::{fit, TrainConfig};
use rand::Rng;

#[test]
fn classical_gradients_match_finite_differences() {
    for (what, err) in classical_gradient_errors(21) {
        assert!(err < 1e-4, "{what}: relative error {err:e}");
    }
}

fn sig(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

/// Textbook LSTM step on the stacked `[i, f, g, o]` layout.
fn reference_step(cell: &LstmCell, x: &[f64], h: &[f64], c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (cell.hidden_dim(), cell.input_dim());
    let z: Vec<f64> = (0..4 * n)
        .map(|r| {
            let wx: f64 = (0..m).map(|j| cell.w[r * m + j] * x[j]).sum();
            let uh: f64 = (0..n).map(|j| cell.u[r * n + j] * h[j]).sum();
            wx + uh + cell.b[r]
        })
        .collect();
    let mut h2 = vec![0.0; n];
    let mut c2 = vec![0.0; n];
    for k in 0..n {
        let (i, f, g, o) = (sig(z[k]), sig(z[n + k]), z[2 * n + k].tanh(), sig(z[3 * n + k]));
        c2[k] = f * c[k] + i * g;
        h2[k] = o * c2[k].tanh();
    }
    (h2, c2)
}

#[test]
fn lstm_step_matches_reference_formula() {
    let mut r = rng(4);
    for _ in 0..50 {
        let cell = LstmCell::random(3, 5, &mut r);
        let x: Vec<f64> = (0..3).map(|_| r.random_range(-2.0..2.0)).collect();
        let h: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let c: Vec<f64> = (0..5).map(|_| r.random_range(-1.0..1.0)).collect();
        let (h1, c1) = cell.step(&x, &h, &c).unwrap();
        let (h2, c2) = reference_step(&cell, &x, &h, &c);
        for (a, b) in h1.iter().chain(&c1).zip(h2.iter().chain(&c2)) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

#[test]
fn lstm_forward_is_chained_steps() {
    let mut r = rng(8);
    let cell = LstmCell::random(1, 6, &mut r);
    let seq: Vec<Vec<f64>> = (0..20).map(|_| vec![r.random_range(0.0..1.0)]).collect();
    let out = cell.forward(&seq).unwrap();
    let (mut h, mut c) = (vec![0.0; 6], vec![0.0; 6]);
    for (t, x) in seq.iter().enumerate() {
        (h, c) = cell.step(x, &h, &c).unwrap();
        assert_eq!(out.hidden[t], h);
    }
    assert_eq!(out.final_hidden, h);
    assert_eq!(out.final_cell, c);
}

#[test]
fn single_linear_neuron_loss_decreases_monotonically() {
    let mut r = rng(1);
    let xs: Vec<f64> = (0..64).map(|_| r.random_range(-1.0..1.0)).collect();
    let ys: Vec<f64> = xs.iter().map(|x| 0.7 * x - 0.2).collect();
    let mut neuron = DenseLayer::zeros(1, 1, Activation::Linear);
    // Far from the optimum, where Adam's fixed step cannot overshoot.
    let cfg = TrainConfig { epochs: 100, batch_size: xs.len(), learning_rate: 0.005, clip_norm: 5.0, seed: 3 };
    let grad = |m: &DenseLayer, i: usize| {
        let (out, cache) = m.forward_cached(&[xs[i]])?;
        let d = 2.0 * (out[0] - ys[i]);
        let g = m.backward(&cache, &[d])?;
        let mut b = ParameterBundle::zeros_like(m);
        b.accumulate("weights", &g.weights)?;
        b.accumulate("biases", &g.biases)?;
        Ok(((out[0] - ys[i]).powi(2), b))
    };
    let hist = fit(&mut neuron, xs.len(), &cfg, &grad, |_, _, _| Ok(())).unwrap();
    for w in hist.windows(2) {
        assert!(w[1] <= w[0] + 1e-15, "{} then {}", w[0], w[1]);
    }
    assert!(hist.last().unwrap() < &(hist[0] * 0.5));
}

#[test]
fn output_layer_is_affine_in_its_weights() {
    use qtraffic::models::{build_model, ModelLabel, Scenario, Variant};
    let mut r = rng(6);
    for variant in [Variant::Classic, Variant::Hybrid] {
        let label = ModelLabel::new(Scenario::A, variant, 3).unwrap();
        let a = build_model(label, 1, 3.0).unwrap();
        let mut b = a.clone();
        for w in b.output.weights.iter_mut().chain(b.output.biases.iter_mut()) {
            *w = r.random_range(-1.0..1.0);
        }
        let t = 0.3;
        let mut mix = a.clone();
        for (m, (x, y)) in mix.output.weights.iter_mut().zip(a.output.weights.iter().zip(&b.output.weights)) {
            *m = (1.0 - t) * x + t * y;
        }
        for (m, (x, y)) in mix.output.biases.iter_mut().zip(a.output.biases.iter().zip(&b.output.biases)) {
            *m = (1.0 - t) * x + t * y;
        }
        let latent = [0.2, -0.5, 0.9];
        let want = (1.0 - t) * a.predict(&latent).unwrap() + t * b.predict(&latent).unwrap();
        assert!((mix.predict(&latent).unwrap() - want).abs() < 1e-12);
    }
}

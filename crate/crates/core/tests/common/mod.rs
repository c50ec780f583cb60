//! Independent oracles and checkers shared by the integration and
//! acceptance suites. Each returns the worst observed error so callers can
//! both assert and report it.
#![allow(dead_code)]

use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use qtraffic::autoencoder::Autoencoder;
use qtraffic::eval::{gap_kfold_split, window_fold, FoldPlan};
use qtraffic::models::{build_model, ModelLabel, Scenario, Variant};
use qtraffic::nn::{Activation, DenseLayer, LstmCell, ParameterBundle, Parameterized};
use qtraffic::qsim::{circuit_gradient, EntanglingParams, GateOp, ReuploadCircuit, StateVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ---------- dense-matrix circuit oracle ----------

type Mat = Vec<Vec<Complex64>>;

fn identity(d: usize) -> Mat {
    (0..d).map(|i| (0..d).map(|j| if i == j { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) }).collect()).collect()
}

fn matmul(a: &Mat, b: &Mat) -> Mat {
    let d = a.len();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for i in 0..d {
        for k in 0..d {
            let aik = a[i][k];
            if aik == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..d {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn kron(a: &Mat, b: &Mat) -> Mat {
    let (da, db) = (a.len(), b.len());
    let mut out = vec![vec![Complex64::new(0.0, 0.0); da * db]; da * db];
    for i in 0..da {
        for j in 0..da {
            for k in 0..db {
                for l in 0..db {
                    out[i * db + k][j * db + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

fn ry(t: f64) -> Mat {
    let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
    vec![vec![Complex64::new(c, 0.0), Complex64::new(-s, 0.0)], vec![Complex64::new(s, 0.0), Complex64::new(c, 0.0)]]
}

fn rz(t: f64) -> Mat {
    vec![
        vec![Complex64::from_polar(1.0, -t / 2.0), Complex64::new(0.0, 0.0)],
        vec![Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, t / 2.0)],
    ]
}

/// Single-qubit `m` on `target` of `n`, qubit 0 the most significant.
fn lift(m: &Mat, target: usize, n: usize) -> Mat {
    let id = identity(2);
    let mut out = identity(1);
    for q in 0..n {
        out = kron(&out, if q == target { m } else { &id });
    }
    out
}

fn cnot(control: usize, target: usize, n: usize) -> Mat {
    let d = 1 << n;
    let mut out = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for col in 0..d {
        let cbit = (col >> (n - 1 - control)) & 1;
        let row = if cbit == 1 { col ^ (1 << (n - 1 - target)) } else { col };
        out[row][col] = Complex64::new(1.0, 0.0);
    }
    out
}

/// Full unitary of the re-upload circuit, then `<Z_q>` on `|0...0>`.
pub fn oracle_expectations(circuit: &ReuploadCircuit, features: &[f64]) -> Vec<f64> {
    let n = circuit.n_qubits();
    let mut u = identity(1 << n);
    let mut push = |g: Mat| u = matmul(&g, &u);
    for r in 0..circuit.n_blocks() {
        for (q, x) in features.iter().enumerate() {
            push(lift(&ry(circuit.angle_scale() * x), q, n));
        }
        for layer in circuit.block(r) {
            for q in 0..n {
                let [a, b, g] = layer.qubit(q);
                let rot = matmul(&rz(g), &matmul(&ry(b), &rz(a)));
                push(lift(&rot, q, n));
            }
            if n > 1 {
                for q in 0..n {
                    push(cnot(q, (q + 1) % n, n));
                }
            }
        }
    }
    let psi: Vec<Complex64> = u.iter().map(|row| row[0]).collect();
    (0..n)
        .map(|q| {
            psi.iter()
                .enumerate()
                .map(|(i, a)| if (i >> (n - 1 - q)) & 1 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
                .sum()
        })
        .collect()
}

pub fn random_circuit(r: &mut ChaCha8Rng, n: usize, blocks: usize, lpb: usize) -> ReuploadCircuit {
    let scale = r.random_range(0.5..4.0);
    ReuploadCircuit::random(n, blocks, lpb, scale, r).unwrap()
}

pub fn random_features(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// Worst |simulator - oracle| over `instances` random circuits with
/// `n <= 3`, `blocks <= 3`.
pub fn oracle_max_error(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = r.random_range(1..=3);
        let blocks = r.random_range(1..=3);
        let lpb = r.random_range(1..=2);
        let c = random_circuit(&mut r, n, blocks, lpb);
        let x = random_features(&mut r, n);
        let sim = c.run(&x).unwrap().values;
        for (a, b) in sim.iter().zip(oracle_expectations(&c, &x)) {
            worst = worst.max((a - b).abs());
        }
    }
    worst
}

// ---------- finite differences ----------

/// `|a - b| / max(|a|, |b|)` over whole vectors, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, at: &[f64], h: f64) -> Vec<f64> {
    let mut x = at.to_vec();
    (0..at.len())
        .map(|i| {
            x[i] = at[i] + h;
            let up = f(&x);
            x[i] = at[i] - h;
            let down = f(&x);
            x[i] = at[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

fn flatten(bundle: &ParameterBundle) -> Vec<f64> {
    bundle.blocks.iter().flat_map(|b| b.values.iter().copied()).collect()
}

fn with_flat<M: Parameterized + Clone>(model: &M, flat: &[f64]) -> M {
    let mut m = model.clone();
    let mut i = 0;
    m.visit_params_mut("", &mut |_, v| {
        v.copy_from_slice(&flat[i..i + v.len()]);
        i += v.len();
    });
    m
}

/// Relative error of an analytic parameter gradient against central
/// differences of `loss`.
pub fn param_gradient_error<M: Parameterized + Clone>(
    model: &M,
    analytic: &ParameterBundle,
    loss: &dyn Fn(&M) -> f64,
    h: f64,
) -> f64 {
    let flat = flatten(&ParameterBundle::snapshot(model));
    let fd = central_difference(&mut |p| loss(&with_flat(model, p)), &flat, h);
    relative_error(&flatten(analytic), &fd)
}

/// Worst relative error of parameter-shift gradients (angles and features)
/// over random circuits up to 6 qubits by 6 blocks.
pub fn circuit_gradient_max_error(instances: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for i in 0..instances {
        let n = 1 + i % 6;
        let blocks = 1 + (i / 6) % 6;
        let c = random_circuit(&mut r, n, blocks, 1);
        let x = random_features(&mut r, n);
        let up: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        let g = circuit_gradient(&c, &x, &up).unwrap();
        let loss = |c: &ReuploadCircuit, x: &[f64]| c.run(x).unwrap().dot(&up);

        let flat: Vec<f64> = c.layers().iter().flat_map(|l| l.angles().iter().copied()).collect();
        let rebuild = |p: &[f64]| {
            let layers = p.chunks(n * 3).map(|a| EntanglingParams::from_angles(n, a.to_vec()).unwrap()).collect();
            ReuploadCircuit::new(n, blocks, 1, c.angle_scale(), layers).unwrap()
        };
        let fd = central_difference(&mut |p| loss(&rebuild(p), &x), &flat, 1e-6);
        let analytic: Vec<f64> = g.angles.concat();
        worst = worst.max(relative_error(&analytic, &fd));

        let fdx = central_difference(&mut |xs| loss(&c, xs), &x, 1e-6);
        worst = worst.max(relative_error(g.features.as_ref().unwrap(), &fdx));
    }
    worst
}

fn random_vec(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-1.0..1.0)).collect()
}

/// Worst relative error over dense, LSTM, autoencoder, and all four
/// regressors at Q2 and Q4.
pub fn classical_gradient_errors(seed: u64) -> Vec<(String, f64)> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let h = 1e-6;

    for act in [Activation::Linear, Activation::Tanh, Activation::Sigmoid] {
        let layer = DenseLayer::random(5, 3, act, &mut r);
        let x = random_vec(&mut r, 5);
        let up = random_vec(&mut r, 3);
        let (_, cache) = layer.forward_cached(&x).unwrap();
        let g = layer.backward(&cache, &up).unwrap();
        let loss = |l: &DenseLayer| l.forward(&x).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum::<f64>();
        let analytic = ParameterBundle {
            blocks: vec![
                qtraffic::nn::ParamBlock { name: "weights".into(), shape: vec![3, 5], values: g.weights.clone() },
                qtraffic::nn::ParamBlock { name: "biases".into(), shape: vec![3], values: g.biases.clone() },
            ],
        };
        let mut e = param_gradient_error(&layer, &analytic, &loss, h);
        let fdx = central_difference(&mut |xs| layer.forward(xs).unwrap().iter().zip(&up).map(|(a, b)| a * b).sum(), &x, h);
        e = e.max(relative_error(&g.input, &fdx));
        out.push((format!("dense/{act:?}"), e));
    }

    {
        let cell = LstmCell::random(2, 4, &mut r);
        let seq: Vec<Vec<f64>> = (0..6).map(|_| random_vec(&mut r, 2)).collect();
        let dh: Vec<Vec<f64>> = (0..6).map(|_| random_vec(&mut r, 4)).collect();
        let dc = random_vec(&mut r, 4);
        let lstm_loss = |c: &LstmCell, s: &[Vec<f64>]| {
            let o = c.forward(s).unwrap();
            let hs: f64 = o.hidden.iter().zip(&dh).map(|(h, d)| h.iter().zip(d).map(|(a, b)| a * b).sum::<f64>()).sum();
            hs + o.final_cell.iter().zip(&dc).map(|(a, b)| a * b).sum::<f64>()
        };
        let (_, cache) = cell.forward_cached(&seq).unwrap();
        let g = cell.backward(&cache, &dh, Some(&dc)).unwrap();
        let analytic = ParameterBundle {
            blocks: ["w", "u", "b"]
                .iter()
                .zip([&g.w, &g.u, &g.b])
                .map(|(n, v)| qtraffic::nn::ParamBlock { name: n.to_string(), shape: vec![v.len()], values: v.clone() })
                .collect(),
        };
        let mut e = param_gradient_error(&cell, &analytic, &|c| lstm_loss(c, &seq), h);
        let flat_x: Vec<f64> = seq.concat();
        let fdx = central_difference(
            &mut |xs| lstm_loss(&cell, &xs.chunks(2).map(<[f64]>::to_vec).collect::<Vec<_>>()),
            &flat_x,
            h,
        );
        e = e.max(relative_error(&g.inputs.concat(), &fdx));
        out.push(("lstm".into(), e));
    }

    for n_latent in [2, 4] {
        let ae = Autoencoder::new(8, n_latent, r.random()).unwrap();
        let window: Vec<f64> = (0..8).map(|_| r.random_range(0.0..1.0)).collect();
        let (_, g) = ae.loss_and_grad(&window).unwrap();
        let e = param_gradient_error(&ae, &g, &|m: &Autoencoder| m.reconstruction_mse(&window).unwrap(), h);
        out.push((format!("autoencoder/Q{n_latent}"), e));
    }

    for n_q in [2, 4] {
        for scenario in [Scenario::A, Scenario::B] {
            for variant in [Variant::Classic, Variant::Hybrid] {
                let label = ModelLabel::new(scenario, variant, n_q).unwrap();
                let model = build_model(label, r.random(), PI).unwrap();
                let latent = random_vec(&mut r, n_q);
                let target = r.random_range(0.0..1.0);
                let (_, g) = model.loss_and_grad(&latent, target).unwrap();
                let e = param_gradient_error(&model, &g, &|m| (m.predict(&latent).unwrap() - target).powi(2), h);
                out.push((label.to_string(), e));
            }
        }
    }
    out
}

// ---------- closed form and norm ----------

/// Worst |<Z> - cos(N * scale * x)| for one qubit, zero angles, N = 1..=14.
pub fn closed_form_max_error(samples: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for blocks in 1..=14 {
        let scale = r.random_range(0.5..4.0);
        let c = ReuploadCircuit::zeros(1, blocks, scale).unwrap();
        for _ in 0..samples {
            let x: f64 = r.random_range(-1.0..1.0);
            let z = c.run(&[x]).unwrap().values[0];
            worst = worst.max((z - (blocks as f64 * scale * x).cos()).abs());
        }
    }
    worst
}

pub fn random_gate(r: &mut ChaCha8Rng, n: usize) -> GateOp {
    let target = r.random_range(0..n);
    let theta = r.random_range(-PI..PI);
    match r.random_range(0..5) {
        0 => GateOp::Rx { target, theta },
        1 => GateOp::Ry { target, theta },
        2 => GateOp::Rz { target, theta },
        3 => GateOp::Rot { target, alpha: theta, beta: r.random_range(-PI..PI), gamma: r.random_range(-PI..PI) },
        _ if n > 1 => {
            let control = (target + r.random_range(1..n)) % n;
            GateOp::Cnot { control, target }
        }
        _ => GateOp::Ry { target, theta },
    }
}

/// Worst | ||psi||^2 - 1 | after `gates` random gates, for n = 1..=10.
pub fn norm_drift(gates: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst: f64 = 0.0;
    for n in 1..=10 {
        let mut s = StateVector::zero(n).unwrap();
        for _ in 0..gates {
            s.apply(&random_gate(&mut r, n)).unwrap();
        }
        worst = worst.max((s.norm_sqr() - 1.0).abs());
    }
    worst
}

// ---------- fold plans and leakage ----------

/// Violations of the fold-plan invariants for one plan, empty if none.
pub fn plan_violations(plan: &FoldPlan) -> Vec<String> {
    let n = plan.n;
    let mut bad = Vec::new();
    let mut covered = vec![0usize; n];
    let val_len = (plan.val_fraction * n as f64).ceil() as usize;
    for (fi, f) in plan.folds.iter().enumerate() {
        for i in f.test.clone() {
            covered[i] += 1;
        }
        let mut seen = vec![0u8; n];
        for i in f.test.clone().chain(f.gap_before.clone()).chain(f.gap_after.clone()) {
            seen[i] += 1;
        }
        for &i in f.validation.iter().chain(&f.train) {
            seen[i] += 1;
        }
        if seen.iter().any(|&s| s != 1) {
            bad.push(format!("fold {fi}: roles overlap or miss indices"));
        }
        let first = fi == 0;
        let last = fi + 1 == plan.folds.len();
        let want_before = if first { 0 } else { plan.gap_size.min(f.test.start) };
        let want_after = if last { 0 } else { plan.gap_size.min(n - f.test.end) };
        if f.gap_before.len() != want_before || f.gap_after.len() != want_after {
            bad.push(format!("fold {fi}: gap sizes {} / {}", f.gap_before.len(), f.gap_after.len()));
        }
        if first && f.test.start != 0 || last && f.test.end != n {
            bad.push(format!("fold {fi}: edge fold does not touch the edge"));
        }
        let lead = f.gap_before.start;
        let expected: HashSet<usize> = (1..=val_len).map(|j| (lead + n - j) % n).collect();
        if f.validation.iter().copied().collect::<HashSet<_>>() != expected || f.validation.len() != val_len {
            bad.push(format!("fold {fi}: validation does not immediately precede the test block"));
        }
    }
    if covered.iter().any(|&c| c != 1) {
        bad.push("test blocks do not partition the series".into());
    }
    bad
}

/// Checks `count` random feasible configurations; returns (checked, failures).
pub fn random_plan_check(count: usize, seed: u64) -> (usize, Vec<String>) {
    let mut r = rng(seed);
    let mut checked = 0;
    let mut failures = Vec::new();
    while checked < count {
        let n = r.random_range(10..5000);
        let k = r.random_range(2..=8);
        let gap = r.random_range(0..=n / k);
        let vf = r.random_range(0.01..0.45);
        let Ok(plan) = gap_kfold_split(n, k, gap, vf) else { continue };
        checked += 1;
        for v in plan_violations(&plan) {
            failures.push(format!("n={n} k={k} gap={gap} vf={vf:.3}: {v}"));
        }
    }
    (checked, failures)
}

/// Series indices read by windows of more than one split, over every fold.
pub fn leakage_count(values: &[f64], k: usize, gap: usize, vf: f64, window: usize) -> usize {
    let plan = gap_kfold_split(values.len(), k, gap, vf).unwrap();
    let mut leaks = 0;
    for fold in &plan.folds {
        let fw = window_fold(values, fold, window).unwrap();
        let mut owner = vec![u8::MAX; values.len()];
        for (role, set) in [&fw.train, &fw.validation, &fw.test].into_iter().enumerate() {
            for j in 0..set.len() {
                for i in set.span(j) {
                    if owner[i] != u8::MAX && owner[i] != role as u8 {
                        leaks += 1;
                    }
                    owner[i] = role as u8;
                }
            }
        }
        let allowed: [HashSet<usize>; 3] = [
            fold.train.iter().copied().collect(),
            fold.validation.iter().copied().collect(),
            fold.test.clone().collect(),
        ];
        for (i, &o) in owner.iter().enumerate() {
            if o != u8::MAX && !allowed[o as usize].contains(&i) {
                leaks += 1;
            }
        }
    }
    leaks
}

use super::params::{ParameterBundle, Parameterized};
use crate::error::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 0.0005;

/// Adam with bias correction. Moments are allocated lazily on the first step
/// to match whatever model is being optimized.
#[derive(Clone, Debug, PartialEq)]
pub struct Adam {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    t: u64,
    m: Vec<Vec<f64>>,
    v: Vec<Vec<f64>>,
}

impl Default for Adam {
    fn default() -> Self {
        Self::new(DEFAULT_LEARNING_RATE)
    }
}

impl Adam {
    pub fn new(learning_rate: f64) -> Self {
        Self { learning_rate, beta1: 0.9, beta2: 0.999, epsilon: 1e-8, t: 0, m: Vec::new(), v: Vec::new() }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moments(&self) -> &[Vec<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Vec<f64>] {
        &self.v
    }

    /// One update of `model` from `grads`, whose blocks must follow the
    /// model's parameter order.
    pub fn step<P: Parameterized + ?Sized>(&mut self, model: &mut P, grads: &ParameterBundle) -> Result<()> {
        if self.m.is_empty() {
            self.m = grads.blocks.iter().map(|b| vec![0.0; b.values.len()]).collect();
            self.v = self.m.clone();
        }
        if self.m.len() != grads.blocks.len() {
            return Err(Error::Internal("optimizer state does not match gradient blocks".into()));
        }
        self.t += 1;
        let t = self.t as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.learning_rate, self.epsilon);

        let mut block = 0;
        let mut failure = None;
        let (ms, vs) = (&mut self.m, &mut self.v);
        model.visit_params_mut("", &mut |name, params| {
            if failure.is_some() {
                return;
            }
            let Some(g) = grads.blocks.get(block) else {
                failure = Some(format!("no gradient for {name}"));
                return;
            };
            if g.name != name || g.values.len() != params.len() {
                failure = Some(format!("gradient block {} does not match parameter {name}", g.name));
                return;
            }
            let (m, v) = (&mut ms[block], &mut vs[block]);
            for k in 0..params.len() {
                let gk = g.values[k];
                m[k] = b1 * m[k] + (1.0 - b1) * gk;
                v[k] = b2 * v[k] + (1.0 - b2) * gk * gk;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                params[k] -= lr * m_hat / (v_hat.sqrt() + eps);
            }
            block += 1;
        });
        match failure {
            Some(msg) => Err(Error::Internal(msg)),
            None if block != grads.blocks.len() => Err(Error::Internal("unused gradient blocks".into())),
            None => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::params::ParamBlock;

    struct Scalar(Vec<f64>);

    impl Parameterized for Scalar {
        fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
            f(&format!("{prefix}x"), &[self.0.len()], &self.0);
        }
        fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
            f(&format!("{prefix}x"), &mut self.0);
        }
    }

    fn grad(values: Vec<f64>) -> ParameterBundle {
        ParameterBundle { blocks: vec![ParamBlock { name: "x".into(), shape: vec![values.len()], values }] }
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        // m_hat = 1, v_hat = 1 at t = 1, so the step is lr / (1 + eps).
        let mut p = Scalar(vec![0.0]);
        let mut adam = Adam::default();
        adam.step(&mut p, &grad(vec![1.0])).unwrap();
        let expected = -0.0005 / (1.0 + 1e-8);
        assert!((p.0[0] - expected).abs() < 1e-15);
        assert!((p.0[0] + 0.0005).abs() < 1e-7);
        assert_eq!(adam.steps(), 1);
    }

    #[test]
    fn zero_gradient_still_counts() {
        let mut p = Scalar(vec![1.5, -2.0]);
        let mut adam = Adam::default();
        adam.step(&mut p, &grad(vec![0.0, 0.0])).unwrap();
        adam.step(&mut p, &grad(vec![0.0, 0.0])).unwrap();
        assert_eq!(p.0, vec![1.5, -2.0]);
        assert_eq!(adam.steps(), 2);
    }

    #[test]
    fn two_steps_match_reference() {
        // Reference evaluation of the textbook update for g = 0.3 twice.
        let (lr, b1, b2, eps) = (0.0005, 0.9, 0.999, 1e-8);
        let g: f64 = 0.3;
        let (mut x, mut m, mut v) = (0.25f64, 0.0f64, 0.0f64);
        for t in 1..=2 {
            m = b1 * m + (1.0 - b1) * g;
            v = b2 * v + (1.0 - b2) * g * g;
            let mh = m / (1.0 - b1.powi(t));
            let vh = v / (1.0 - b2.powi(t));
            x -= lr * mh / (vh.sqrt() + eps);
        }
        let mut p = Scalar(vec![0.25]);
        let mut adam = Adam::default();
        adam.step(&mut p, &grad(vec![g])).unwrap();
        adam.step(&mut p, &grad(vec![g])).unwrap();
        assert!((p.0[0] - x).abs() < 1e-15);
        assert!(adam.second_moments()[0][0] >= 0.0);
    }

    #[test]
    fn mismatched_bundle() {
        let mut p = Scalar(vec![0.0, 0.0]);
        let mut adam = Adam::default();
        assert!(adam.step(&mut p, &grad(vec![1.0])).is_err());
    }
}

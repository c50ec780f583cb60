use num_complex::Complex64;

use crate::error::{config, usage, Result};

/// Largest register the dense simulator accepts.
pub const MAX_QUBITS: usize = 14;

/// A single gate acting on a register.
///
/// Qubit 0 is the most significant bit of the basis index, so the basis
/// label `|q0 q1 ... q(n-1)>` reads left to right as a binary number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GateOp {
    Rx { target: usize, theta: f64 },
    Ry { target: usize, theta: f64 },
    Rz { target: usize, theta: f64 },
    /// `Rz(gamma) * Ry(beta) * Rz(alpha)`: `alpha` acts first.
    Rot { target: usize, alpha: f64, beta: f64, gamma: f64 },
    Cnot { control: usize, target: usize },
}

type Mat2 = [[Complex64; 2]; 2];

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn matmul2(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[c(0.0, 0.0); 2]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

pub(crate) fn rx_matrix(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(0.0, -s)], [c(0.0, -s), c(co, 0.0)]]
}

pub(crate) fn ry_matrix(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, 0.0), c(-s, 0.0)], [c(s, 0.0), c(co, 0.0)]]
}

pub(crate) fn rz_matrix(theta: f64) -> Mat2 {
    let (s, co) = (theta / 2.0).sin_cos();
    [[c(co, -s), c(0.0, 0.0)], [c(0.0, 0.0), c(co, s)]]
}

pub(crate) fn rot_matrix(alpha: f64, beta: f64, gamma: f64) -> Mat2 {
    matmul2(&rz_matrix(gamma), &matmul2(&ry_matrix(beta), &rz_matrix(alpha)))
}

impl GateOp {
    /// The 2x2 unitary of a single-qubit gate; `None` for CNOT.
    pub fn matrix(&self) -> Option<[[Complex64; 2]; 2]> {
        match *self {
            GateOp::Rx { theta, .. } => Some(rx_matrix(theta)),
            GateOp::Ry { theta, .. } => Some(ry_matrix(theta)),
            GateOp::Rz { theta, .. } => Some(rz_matrix(theta)),
            GateOp::Rot { alpha, beta, gamma, .. } => Some(rot_matrix(alpha, beta, gamma)),
            GateOp::Cnot { .. } => None,
        }
    }

    fn check(&self, n_qubits: usize) -> Result<()> {
        let bad = |q: usize| q >= n_qubits;
        match *self {
            GateOp::Rx { target, .. }
            | GateOp::Ry { target, .. }
            | GateOp::Rz { target, .. }
            | GateOp::Rot { target, .. } => {
                if bad(target) {
                    return Err(usage(format!("target qubit {target} out of range for {n_qubits} qubits")));
                }
            }
            GateOp::Cnot { control, target } => {
                if bad(control) || bad(target) {
                    return Err(usage(format!(
                        "CNOT({control}, {target}) out of range for {n_qubits} qubits"
                    )));
                }
                if control == target {
                    return Err(usage("CNOT control and target must differ"));
                }
            }
        }
        Ok(())
    }
}

/// Dense amplitude vector of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// The all-zeros basis state `|0...0>`.
    pub fn zero(n_qubits: usize) -> Result<Self> {
        Self::basis(n_qubits, 0)
    }

    /// The computational basis state with the given index.
    pub fn basis(n_qubits: usize, index: usize) -> Result<Self> {
        check_qubits(n_qubits)?;
        let dim = 1usize << n_qubits;
        if index >= dim {
            return Err(usage(format!("basis index {index} out of range for {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); dim];
        amplitudes[index] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    /// Wraps explicit amplitudes, which must have length `2^n` and unit norm.
    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_qubits(n_qubits)?;
        if amplitudes.len() != 1usize << n_qubits {
            return Err(usage(format!(
                "{} amplitudes given for {n_qubits} qubits",
                amplitudes.len()
            )));
        }
        let state = Self { n_qubits, amplitudes };
        if (state.norm_sqr() - 1.0).abs() > 1e-10 {
            return Err(usage("amplitudes are not normalized"));
        }
        Ok(state)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    #[inline]
    fn mask(&self, qubit: usize) -> usize {
        1usize << (self.n_qubits - 1 - qubit)
    }

    /// Applies `gate` in place.
    pub fn apply(&mut self, gate: &GateOp) -> Result<()> {
        gate.check(self.n_qubits)?;
        self.apply_unchecked(gate);
        Ok(())
    }

    pub(crate) fn apply_unchecked(&mut self, gate: &GateOp) {
        match *gate {
            GateOp::Ry { target, theta } => self.apply_ry(target, theta),
            GateOp::Rz { target, theta } => self.apply_rz(target, theta),
            GateOp::Cnot { control, target } => self.apply_cnot(control, target),
            GateOp::Rx { target, .. } | GateOp::Rot { target, .. } => {
                let m = gate.matrix().expect("single-qubit gate");
                self.apply_matrix(target, &m);
            }
        }
    }

    pub(crate) fn apply_matrix(&mut self, target: usize, m: &Mat2) {
        let mask = self.mask(target);
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i0 in base..base + mask {
                let i1 = i0 | mask;
                let a0 = self.amplitudes[i0];
                let a1 = self.amplitudes[i1];
                self.amplitudes[i0] = m[0][0] * a0 + m[0][1] * a1;
                self.amplitudes[i1] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += mask << 1;
        }
    }

    pub(crate) fn apply_ry(&mut self, target: usize, theta: f64) {
        let (s, co) = (theta / 2.0).sin_cos();
        let mask = self.mask(target);
        let dim = self.amplitudes.len();
        let mut base = 0;
        while base < dim {
            for i0 in base..base + mask {
                let i1 = i0 | mask;
                let a0 = self.amplitudes[i0];
                let a1 = self.amplitudes[i1];
                self.amplitudes[i0] = a0 * co - a1 * s;
                self.amplitudes[i1] = a0 * s + a1 * co;
            }
            base += mask << 1;
        }
    }

    fn apply_rz(&mut self, target: usize, theta: f64) {
        let (s, co) = (theta / 2.0).sin_cos();
        let lo = Complex64::new(co, -s);
        let hi = Complex64::new(co, s);
        let mask = self.mask(target);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a *= if i & mask == 0 { lo } else { hi };
        }
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = self.mask(control);
        let tmask = self.mask(target);
        for i in 0..self.amplitudes.len() {
            if i & cmask != 0 && i & tmask == 0 {
                self.amplitudes.swap(i, i | tmask);
            }
        }
    }

    /// Exact Pauli-Z expectation on every qubit; the state is not collapsed.
    pub fn expect_z_all(&self) -> Expectations {
        let n = self.n_qubits;
        let mut values = vec![0.0; n];
        for (i, a) in self.amplitudes.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            for (q, v) in values.iter_mut().enumerate() {
                if i & (1 << (n - 1 - q)) == 0 {
                    *v += p;
                } else {
                    *v -= p;
                }
            }
        }
        Expectations { values }
    }
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n_qubits) {
        Ok(())
    } else {
        Err(config(format!("qubit count {n_qubits} outside 1..={MAX_QUBITS}")))
    }
}

/// Pauli-Z expectation per qubit, each in `[-1, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectations {
    pub values: Vec<f64>,
}

impl Expectations {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dot(&self, weights: &[f64]) -> f64 {
        self.values.iter().zip(weights).map(|(a, b)| a * b).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn close(a: &StateVector, b: &[Complex64]) {
        for (x, y) in a.amplitudes().iter().zip(b) {
            assert_abs_diff_eq!(x.re, y.re, epsilon = 1e-12);
            assert_abs_diff_eq!(x.im, y.im, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_state() {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(StateVector::zero(1).unwrap().amplitudes(), &[one, zero]);
        assert_eq!(StateVector::zero(2).unwrap().amplitudes(), &[one, zero, zero, zero]);
        assert!(matches!(StateVector::zero(15), Err(crate::Error::Config(_))));
        assert!(matches!(StateVector::zero(0), Err(crate::Error::Config(_))));
    }

    #[test]
    fn ry_half_turn() {
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&GateOp::Ry { target: 0, theta: PI }).unwrap();
        close(&s, &[c(0.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn cnot_truth_table() {
        // |10> has index 2 with qubit 0 as the high bit.
        let mut s = StateVector::basis(2, 0b10).unwrap();
        s.apply(&GateOp::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b11).unwrap());
        let mut s = StateVector::basis(2, 0b01).unwrap();
        s.apply(&GateOp::Cnot { control: 0, target: 1 }).unwrap();
        assert_eq!(s, StateVector::basis(2, 0b01).unwrap());
    }

    #[test]
    fn identity_rot() {
        let mut s = StateVector::zero(2).unwrap();
        s.apply(&GateOp::Ry { target: 1, theta: 0.7 }).unwrap();
        s.apply(&GateOp::Rx { target: 0, theta: -1.3 }).unwrap();
        let before = s.clone();
        s.apply(&GateOp::Rot { target: 0, alpha: 0.0, beta: 0.0, gamma: 0.0 }).unwrap();
        close(&s, before.amplitudes());
    }

    #[test]
    fn specialized_kernels_match_matrices() {
        let gates = [
            GateOp::Ry { target: 1, theta: 0.37 },
            GateOp::Rz { target: 2, theta: -1.1 },
        ];
        for g in gates {
            let mut a = StateVector::zero(3).unwrap();
            for q in 0..3 {
                a.apply(&GateOp::Rot { target: q, alpha: 0.3 * q as f64, beta: 1.0, gamma: -0.4 }).unwrap();
            }
            let mut b = a.clone();
            a.apply(&g).unwrap();
            let target = match g {
                GateOp::Ry { target, .. } | GateOp::Rz { target, .. } => target,
                _ => unreachable!(),
            };
            b.apply_matrix(target, &g.matrix().unwrap());
            close(&a, b.amplitudes());
        }
    }

    #[test]
    fn bad_indices() {
        let mut s = StateVector::zero(2).unwrap();
        assert!(matches!(s.apply(&GateOp::Rx { target: 2, theta: 0.1 }), Err(crate::Error::Usage(_))));
        assert!(s.apply(&GateOp::Cnot { control: 1, target: 1 }).is_err());
        assert!(s.apply(&GateOp::Cnot { control: 0, target: 5 }).is_err());
    }

    #[test]
    fn expectations() {
        assert_eq!(StateVector::zero(1).unwrap().expect_z_all().values, vec![1.0]);
        assert_eq!(StateVector::basis(2, 3).unwrap().expect_z_all().values, vec![-1.0, -1.0]);
        let mut s = StateVector::zero(1).unwrap();
        s.apply(&GateOp::Ry { target: 0, theta: PI / 2.0 }).unwrap();
        assert_abs_diff_eq!(s.expect_z_all().values[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn from_amplitudes_validates() {
        assert!(StateVector::from_amplitudes(1, vec![c(1.0, 0.0)]).is_err());
        assert!(StateVector::from_amplitudes(1, vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(StateVector::from_amplitudes(1, vec![c(h, 0.0), c(0.0, h)]).is_ok());
    }
}

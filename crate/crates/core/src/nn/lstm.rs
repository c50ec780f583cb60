use rand::Rng;

use super::dense::sigmoid;
use super::init::glorot_uniform;
use super::params::Parameterized;
use crate::error::{ensure_len, usage, Result};

/// Standard LSTM cell.
///
/// Gate pre-activations are stacked in the order input, forget, candidate,
/// output: `w` is `4h x input_dim`, `u` is `4h x h` and `b` has length `4h`,
/// all row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct LstmCell {
    input_dim: usize,
    hidden_dim: usize,
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
}

/// Activations of one step, kept for backpropagation through time.
#[derive(Clone, Debug)]
pub struct LstmStepCache {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
    /// Activated gates `[i | f | g | o]`.
    pub gates: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

#[derive(Clone, Debug, Default)]
pub struct LstmCache {
    pub steps: Vec<LstmStepCache>,
}

/// Result of running a whole sequence from zero initial state.
#[derive(Clone, Debug)]
pub struct LstmOutput {
    pub hidden: Vec<Vec<f64>>,
    pub final_hidden: Vec<f64>,
    pub final_cell: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LstmGrads {
    pub w: Vec<f64>,
    pub u: Vec<f64>,
    pub b: Vec<f64>,
    /// `dLoss/dx_t` for every step.
    pub inputs: Vec<Vec<f64>>,
}

impl LstmCell {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            w: vec![0.0; 4 * hidden_dim * input_dim],
            u: vec![0.0; 4 * hidden_dim * hidden_dim],
            b: vec![0.0; 4 * hidden_dim],
        }
    }

    /// Glorot-uniform input and recurrent matrices (per gate), zero biases
    /// except the forget gate, which starts at 1.
    pub fn random<R: Rng + ?Sized>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let h = hidden_dim;
        let w = glorot_uniform(rng, 4 * h * input_dim, input_dim, h);
        let u = glorot_uniform(rng, 4 * h * h, h, h);
        let mut b = vec![0.0; 4 * h];
        b[h..2 * h].iter_mut().for_each(|v| *v = 1.0);
        Self { input_dim, hidden_dim, w, u, b }
    }

    pub fn from_parts(input_dim: usize, hidden_dim: usize, w: Vec<f64>, u: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        ensure_len("lstm input weights", w.len(), 4 * hidden_dim * input_dim)?;
        ensure_len("lstm recurrent weights", u.len(), 4 * hidden_dim * hidden_dim)?;
        ensure_len("lstm biases", b.len(), 4 * hidden_dim)?;
        Ok(Self { input_dim, hidden_dim, w, u, b })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    /// One recurrence: returns `(h, c)`.
    pub fn step(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        ensure_len("lstm input", x.len(), self.input_dim)?;
        ensure_len("lstm hidden state", h_prev.len(), self.hidden_dim)?;
        ensure_len("lstm cell state", c_prev.len(), self.hidden_dim)?;
        let s = self.step_cached(x, h_prev, c_prev);
        let h = s.gates[3 * self.hidden_dim..].iter().zip(&s.tanh_c).map(|(o, t)| o * t).collect();
        Ok((h, s.c))
    }

    fn step_cached(&self, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> LstmStepCache {
        let hd = self.hidden_dim;
        let id = self.input_dim;
        let mut z = self.b.clone();
        for (r, zr) in z.iter_mut().enumerate() {
            let wr = &self.w[r * id..(r + 1) * id];
            let ur = &self.u[r * hd..(r + 1) * hd];
            let mut acc = 0.0;
            for k in 0..id {
                acc += wr[k] * x[k];
            }
            for k in 0..hd {
                acc += ur[k] * h_prev[k];
            }
            *zr += acc;
        }
        for (r, v) in z.iter_mut().enumerate() {
            *v = if (2 * hd..3 * hd).contains(&r) { v.tanh() } else { sigmoid(*v) };
        }
        let mut c = vec![0.0; hd];
        let mut tanh_c = vec![0.0; hd];
        for j in 0..hd {
            c[j] = z[hd + j] * c_prev[j] + z[j] * z[2 * hd + j];
            tanh_c[j] = c[j].tanh();
        }
        LstmStepCache { x: x.to_vec(), h_prev: h_prev.to_vec(), c_prev: c_prev.to_vec(), gates: z, c, tanh_c }
    }

    /// Runs `sequence` from zero hidden and cell states.
    pub fn forward(&self, sequence: &[Vec<f64>]) -> Result<LstmOutput> {
        self.forward_cached(sequence).map(|(out, _)| out)
    }

    pub fn forward_cached(&self, sequence: &[Vec<f64>]) -> Result<(LstmOutput, LstmCache)> {
        if sequence.is_empty() {
            return Err(usage("lstm sequence is empty"));
        }
        let hd = self.hidden_dim;
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        let mut hidden = Vec::with_capacity(sequence.len());
        let mut cache = LstmCache { steps: Vec::with_capacity(sequence.len()) };
        for x in sequence {
            ensure_len("lstm input", x.len(), self.input_dim)?;
            let s = self.step_cached(x, &h, &c);
            h = s.gates[3 * hd..].iter().zip(&s.tanh_c).map(|(o, t)| o * t).collect();
            c.clone_from(&s.c);
            hidden.push(h.clone());
            cache.steps.push(s);
        }
        Ok((LstmOutput { hidden, final_hidden: h, final_cell: c }, cache))
    }

    /// Backpropagation through time.
    ///
    /// `dh` holds `dLoss/dh_t` contributed directly at each step (empty
    /// vectors count as zero); `dc_final` is the gradient on the last cell state.
    pub fn backward(&self, cache: &LstmCache, dh: &[Vec<f64>], dc_final: Option<&[f64]>) -> Result<LstmGrads> {
        let t_len = cache.steps.len();
        ensure_len("lstm step gradients", dh.len(), t_len)?;
        let hd = self.hidden_dim;
        let id = self.input_dim;
        let mut grads = LstmGrads {
            w: vec![0.0; self.w.len()],
            u: vec![0.0; self.u.len()],
            b: vec![0.0; self.b.len()],
            inputs: vec![Vec::new(); t_len],
        };
        let mut dh_next = vec![0.0; hd];
        let mut dc_next = match dc_final {
            Some(dc) => {
                ensure_len("lstm final cell gradient", dc.len(), hd)?;
                dc.to_vec()
            }
            None => vec![0.0; hd],
        };
        let mut dz = vec![0.0; 4 * hd];
        for t in (0..t_len).rev() {
            let s = &cache.steps[t];
            if !dh[t].is_empty() {
                ensure_len("lstm step gradient", dh[t].len(), hd)?;
                for (a, b) in dh_next.iter_mut().zip(&dh[t]) {
                    *a += b;
                }
            }
            let g = &s.gates;
            for j in 0..hd {
                let (i, f, cand, o) = (g[j], g[hd + j], g[2 * hd + j], g[3 * hd + j]);
                let th = s.tanh_c[j];
                let dhj = dh_next[j];
                let dc = dc_next[j] + dhj * o * (1.0 - th * th);
                dz[j] = dc * cand * i * (1.0 - i);
                dz[hd + j] = dc * s.c_prev[j] * f * (1.0 - f);
                dz[2 * hd + j] = dc * i * (1.0 - cand * cand);
                dz[3 * hd + j] = dhj * th * o * (1.0 - o);
                dc_next[j] = dc * f;
            }
            let mut dx = vec![0.0; id];
            dh_next.iter_mut().for_each(|v| *v = 0.0);
            for (r, &d) in dz.iter().enumerate() {
                grads.b[r] += d;
                if d == 0.0 {
                    continue;
                }
                let wr = &self.w[r * id..(r + 1) * id];
                let gw = &mut grads.w[r * id..(r + 1) * id];
                for k in 0..id {
                    gw[k] += d * s.x[k];
                    dx[k] += d * wr[k];
                }
                let ur = &self.u[r * hd..(r + 1) * hd];
                let gu = &mut grads.u[r * hd..(r + 1) * hd];
                for k in 0..hd {
                    gu[k] += d * s.h_prev[k];
                    dh_next[k] += d * ur[k];
                }
            }
            grads.inputs[t] = dx;
        }
        Ok(grads)
    }
}

impl Parameterized for LstmCell {
    fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64])) {
        let h4 = 4 * self.hidden_dim;
        f(&format!("{prefix}w"), &[h4, self.input_dim], &self.w);
        f(&format!("{prefix}u"), &[h4, self.hidden_dim], &self.u);
        f(&format!("{prefix}b"), &[h4], &self.b);
    }

    fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64])) {
        f(&format!("{prefix}w"), &mut self.w);
        f(&format!("{prefix}u"), &mut self.u);
        f(&format!("{prefix}b"), &mut self.b);
    }
}

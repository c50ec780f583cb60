use serde::{Deserialize, Serialize};

use crate::error::{usage, Result};

/// Min-max scaling fitted on training values; maps the training range to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: f64,
    pub max: f64,
}

impl MinMaxScaler {
    pub fn fit(values: &[f64]) -> Result<Self> {
        if values.is_empty() {
            return Err(usage("cannot fit a normalizer on no values"));
        }
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !(max > min) {
            return Err(usage("training segment is constant; normalization undefined"));
        }
        Ok(Self { min, max })
    }

    /// Fits on `values[i]` for the given indices only.
    pub fn fit_indices(values: &[f64], indices: &[usize]) -> Result<Self> {
        let picked: Vec<f64> = indices.iter().map(|&i| values[i]).collect();
        Self::fit(&picked)
    }

    pub fn apply(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    pub fn invert(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }

    pub fn apply_all(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.apply(x)).collect()
    }

    pub fn invert_all(&self, ys: &[f64]) -> Vec<f64> {
        ys.iter().map(|&y| self.invert(y)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint() {
        let s = MinMaxScaler::fit(&[0.0, 2000.0]).unwrap();
        assert_eq!(s.apply(1000.0), 0.5);
        assert_eq!(s.apply(3000.0), 1.5);
    }

    #[test]
    fn constant_rejected() {
        assert!(MinMaxScaler::fit(&[3.0, 3.0]).is_err());
        assert!(MinMaxScaler::fit(&[]).is_err());
    }

    #[test]
    fn train_only() {
        let mut series = vec![1.0, 5.0, 3.0, 100.0, -40.0];
        let train = [0, 1, 2];
        let a = MinMaxScaler::fit_indices(&series, &train).unwrap();
        series[3] = 1e9;
        series[4] = -1e9;
        assert_eq!(a, MinMaxScaler::fit_indices(&series, &train).unwrap());
    }

    proptest! {
        #[test]
        fn invert_is_inverse(lo in -1e4f64..1e4, span in 1e-3f64..1e4, x in -1e5f64..1e5) {
            let s = MinMaxScaler { min: lo, max: lo + span };
            prop_assert!((s.invert(s.apply(x)) - x).abs() <= 1e-12 * (1.0 + x.abs()).max(span));
        }

        #[test]
        fn strictly_monotone(a in -1e4f64..1e4, d in 1e-6f64..1e3) {
            let s = MinMaxScaler { min: -5.0, max: 7.0 };
            prop_assert!(s.apply(a + d) > s.apply(a));
        }
    }
}

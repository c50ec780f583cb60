use crate::error::{usage, Error, Result};

/// A named, shaped block of `f64` values.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamBlock {
    pub name: String,
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

/// Ordered list of named blocks. Used both for gradients (one slot per
/// parameter block, same shapes) and for checkpoints.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParameterBundle {
    pub blocks: Vec<ParamBlock>,
}

/// Anything with trainable parameters exposed as named blocks in a fixed order.
pub trait Parameterized {
    fn visit_params(&self, prefix: &str, f: &mut dyn FnMut(&str, &[usize], &[f64]));

    fn visit_params_mut(&mut self, prefix: &str, f: &mut dyn FnMut(&str, &mut [f64]));

    fn n_params(&self) -> usize {
        let mut n = 0;
        self.visit_params("", &mut |_, _, v| n += v.len());
        n
    }

    /// Copies values from `bundle`, which must match names and shapes exactly.
    fn load_params(&mut self, bundle: &ParameterBundle) -> Result<()> {
        let mut expected = Vec::new();
        self.visit_params("", &mut |name, shape, _| expected.push((name.to_string(), shape.to_vec())));
        if expected.len() != bundle.blocks.len() {
            return Err(usage(format!(
                "checkpoint has {} blocks, model has {}",
                bundle.blocks.len(),
                expected.len()
            )));
        }
        for ((name, shape), block) in expected.iter().zip(&bundle.blocks) {
            if *name != block.name || *shape != block.shape {
                return Err(usage(format!(
                    "checkpoint block {} {:?} does not match model block {name} {shape:?}",
                    block.name, block.shape
                )));
            }
        }
        let mut i = 0;
        self.visit_params_mut("", &mut |_, v| {
            v.copy_from_slice(&bundle.blocks[i].values);
            i += 1;
        });
        Ok(())
    }
}

impl ParameterBundle {
    /// Zero-filled slots shaped like `model`'s parameters.
    pub fn zeros_like<P: Parameterized + ?Sized>(model: &P) -> Self {
        let mut blocks = Vec::new();
        model.visit_params("", &mut |name, shape, v| {
            blocks.push(ParamBlock { name: name.to_string(), shape: shape.to_vec(), values: vec![0.0; v.len()] })
        });
        Self { blocks }
    }

    /// Copy of `model`'s current parameter values.
    pub fn snapshot<P: Parameterized + ?Sized>(model: &P) -> Self {
        let mut blocks = Vec::new();
        model.visit_params("", &mut |name, shape, v| {
            blocks.push(ParamBlock { name: name.to_string(), shape: shape.to_vec(), values: v.to_vec() })
        });
        Self { blocks }
    }

    pub fn get(&self, name: &str) -> Option<&ParamBlock> {
        self.blocks.iter().find(|b| b.name == name)
    }

    pub fn slot_mut(&mut self, name: &str) -> Result<&mut [f64]> {
        self.blocks
            .iter_mut()
            .find(|b| b.name == name)
            .map(|b| b.values.as_mut_slice())
            .ok_or_else(|| Error::Internal(format!("no gradient slot named {name}")))
    }

    /// Adds `src` element-wise into the slot `name`.
    pub fn accumulate(&mut self, name: &str, src: &[f64]) -> Result<()> {
        let slot = self.slot_mut(name)?;
        if slot.len() != src.len() {
            return Err(Error::Internal(format!(
                "gradient for {name} has length {}, slot has {}",
                src.len(),
                slot.len()
            )));
        }
        for (s, g) in slot.iter_mut().zip(src) {
            *s += g;
        }
        Ok(())
    }

    pub fn add_assign(&mut self, other: &ParameterBundle) -> Result<()> {
        if self.blocks.len() != other.blocks.len() {
            return Err(Error::Internal("bundle block counts differ".into()));
        }
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            if a.name != b.name || a.values.len() != b.values.len() {
                return Err(Error::Internal(format!("bundle blocks {} and {} differ", a.name, b.name)));
            }
            for (x, y) in a.values.iter_mut().zip(&b.values) {
                *x += y;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, factor: f64) {
        for v in self.blocks.iter_mut().flat_map(|b| b.values.iter_mut()) {
            *v *= factor;
        }
    }

    pub fn global_norm(&self) -> f64 {
        self.blocks.iter().flat_map(|b| &b.values).map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Rescales so that the global L2 norm is at most `max_norm`; returns the
    /// norm before clipping.
    pub fn clip_global_norm(&mut self, max_norm: f64) -> f64 {
        let norm = self.global_norm();
        if norm > max_norm && norm > 0.0 {
            self.scale(max_norm / norm);
        }
        norm
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.values.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clipping() {
        let mut b = ParameterBundle {
            blocks: vec![ParamBlock { name: "a".into(), shape: vec![2], values: vec![3.0, 4.0] }],
        };
        assert_eq!(b.clip_global_norm(10.0), 5.0);
        assert_eq!(b.blocks[0].values, vec![3.0, 4.0]);
        b.clip_global_norm(1.0);
        assert!((b.global_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn accumulate_checks_lengths() {
        let mut b = ParameterBundle {
            blocks: vec![ParamBlock { name: "a".into(), shape: vec![2], values: vec![0.0; 2] }],
        };
        b.accumulate("a", &[1.0, 2.0]).unwrap();
        b.accumulate("a", &[1.0, 2.0]).unwrap();
        assert_eq!(b.blocks[0].values, vec![2.0, 4.0]);
        assert!(b.accumulate("a", &[1.0]).is_err());
        assert!(b.accumulate("b", &[1.0, 1.0]).is_err());
    }
}

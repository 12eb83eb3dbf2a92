//! Dense row-major f64 tensor, the engine's sole value type.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::NnError;

#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(shape: &[usize]) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Self, NnError> {
        let len: usize = shape.iter().product();
        if len != data.len() {
            return Err(NnError::shape(format!(
                "shape {shape:?} needs {len} values, got {}",
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn scalar_filled(shape: &[usize], value: f64) -> Self {
        let len = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![value; len],
        }
    }

    /// He-uniform initialization for layers feeding ReLU:
    /// `U(-sqrt(6/fan_in), sqrt(6/fan_in))`.
    pub fn he_uniform(shape: &[usize], fan_in: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / fan_in as f64).sqrt();
        let len: usize = shape.iter().product();
        let data = (0..len)
            .map(|_| (rng.gen::<f64>() * 2.0 - 1.0) * limit)
            .collect();
        Tensor {
            shape: shape.to_vec(),
            data,
        }
    }

    #[inline]
    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn ndim(&self) -> usize {
        self.shape.len()
    }

    /// Reinterprets the buffer under a new shape of identical length.
    pub fn reshaped(mut self, shape: &[usize]) -> Result<Self, NnError> {
        let len: usize = shape.iter().product();
        if len != self.data.len() {
            return Err(NnError::shape(format!(
                "cannot reshape {:?} ({} values) to {shape:?} ({len} values)",
                self.shape,
                self.data.len()
            )));
        }
        self.shape = shape.to_vec();
        Ok(self)
    }

    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|v| *v = value);
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Checked-failure guard used in debug builds after every layer op.
    pub fn debug_assert_finite(&self, context: &str) {
        debug_assert!(self.all_finite(), "non-finite tensor after {context}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn shape_and_length_agree() {
        let t = Tensor::zeros(&[2, 3, 4]);
        assert_eq!(t.len(), 24);
        assert_eq!(t.shape(), &[2, 3, 4]);
        assert!(Tensor::from_vec(&[2, 2], vec![1.0; 3]).is_err());
    }

    #[test]
    fn he_uniform_respects_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = Tensor::he_uniform(&[100], 8, &mut rng);
        let limit = (6.0f64 / 8.0).sqrt();
        assert!(t.data().iter().all(|v| v.abs() <= limit));
        // seeded draws are reproducible
        let mut rng2 = ChaCha8Rng::seed_from_u64(3);
        let t2 = Tensor::he_uniform(&[100], 8, &mut rng2);
        assert_eq!(t, t2);
    }

    #[test]
    fn reshape_checks_length() {
        let t = Tensor::zeros(&[4, 2]);
        assert!(t.clone().reshaped(&[8]).is_ok());
        assert!(t.reshaped(&[3, 3]).is_err());
    }
}

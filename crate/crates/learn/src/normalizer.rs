//! Per-column affine normalization of flattened factor targets.

use thzbeam_nn::Tensor;

use crate::error::LearnError;

/// Zero-mean unit-variance mapping per factor column, fitted on the
/// training split only. Zero-variance columns keep scale 1 (with a
/// warning) so the transform stays invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct FactorNormalizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl FactorNormalizer {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self, LearnError> {
        let first = rows
            .first()
            .ok_or_else(|| LearnError::invalid("cannot fit a normalizer on an empty set"))?;
        let cols = first.len();
        let n = rows.len() as f64;
        let mut mean = vec![0.0; cols];
        for row in rows {
            debug_assert_eq!(row.len(), cols);
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut scale = vec![0.0; cols];
        for row in rows {
            for ((s, v), m) in scale.iter_mut().zip(row).zip(&mean) {
                let d = v - m;
                *s += d * d;
            }
        }
        let mut warned = false;
        for s in scale.iter_mut() {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                if !warned {
                    eprintln!("warning: zero-variance factor column, scale clamped to 1");
                    warned = true;
                }
                *s = 1.0;
            }
        }
        Ok(FactorNormalizer { mean, scale })
    }

    pub fn columns(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn scale(&self) -> &[f64] {
        &self.scale
    }

    pub fn apply(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| v * s + m)
            .collect()
    }

    pub fn to_tensors(&self) -> (Tensor, Tensor) {
        let n = self.mean.len();
        (
            Tensor::from_vec(&[n], self.mean.clone()).expect("mean tensor"),
            Tensor::from_vec(&[n], self.scale.clone()).expect("scale tensor"),
        )
    }

    pub fn from_tensors(mean: &Tensor, scale: &Tensor) -> Result<Self, LearnError> {
        if mean.shape() != scale.shape() || mean.ndim() != 1 {
            return Err(LearnError::invalid("normalizer tensors must be matching vectors"));
        }
        Ok(FactorNormalizer {
            mean: mean.data().to_vec(),
            scale: scale.data().to_vec(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_column_gets_unit_scale() {
        let rows = vec![vec![5.0, 1.0], vec![5.0, 3.0]];
        let norm = FactorNormalizer::fit(&rows).unwrap();
        assert_eq!(norm.mean()[0], 5.0);
        assert_eq!(norm.scale()[0], 1.0);
    }

    #[test]
    fn two_point_column_stats() {
        // column {0, 2}: mean 1, population std 1
        let rows = vec![vec![0.0], vec![2.0]];
        let norm = FactorNormalizer::fit(&rows).unwrap();
        assert_eq!(norm.mean()[0], 1.0);
        assert_eq!(norm.scale()[0], 1.0);
    }

    #[test]
    fn invert_undoes_apply() {
        let rows = vec![
            vec![1.0, -3.0, 0.5],
            vec![2.0, 9.0, 0.5],
            vec![4.0, 2.0, 0.7],
        ];
        let norm = FactorNormalizer::fit(&rows).unwrap();
        for row in &rows {
            let back = norm.invert(&norm.apply(row));
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }
        }
    }

    #[test]
    fn empty_fit_is_an_error() {
        assert!(FactorNormalizer::fit(&[]).is_err());
    }
}

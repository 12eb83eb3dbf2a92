//! Losses and the softmax function.

use crate::error::NnError;
use crate::tensor::Tensor;

/// Numerically stabilized softmax (max subtraction).
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Mean squared error over all elements and its gradient w.r.t. `pred`.
pub fn mse_loss(pred: &Tensor, target: &Tensor) -> Result<(f64, Tensor), NnError> {
    if pred.shape() != target.shape() {
        return Err(NnError::shape(format!(
            "mse shapes differ: {:?} vs {:?}",
            pred.shape(),
            target.shape()
        )));
    }
    let n = pred.len() as f64;
    let mut loss = 0.0;
    let mut grad = Tensor::zeros(pred.shape());
    {
        let gd = grad.data_mut();
        for (i, (p, t)) in pred.data().iter().zip(target.data()).enumerate() {
            let d = p - t;
            loss += d * d;
            gd[i] = 2.0 * d / n;
        }
    }
    Ok((loss / n, grad))
}

/// Cross-entropy of integer-labelled logits: `-log softmax(logits)[label]`,
/// with gradient `softmax(logits) - onehot(label)`.
pub fn cross_entropy_loss(logits: &Tensor, label: usize) -> Result<(f64, Tensor), NnError> {
    if logits.ndim() != 1 {
        return Err(NnError::shape(format!(
            "cross entropy expects a logit vector, got {:?}",
            logits.shape()
        )));
    }
    let classes = logits.len();
    if label >= classes {
        return Err(NnError::InvalidLabel { label, classes });
    }
    let z = logits.data();
    let max = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let log_sum_exp = max + z.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
    let loss = log_sum_exp - z[label];
    let mut grad = Tensor::zeros(logits.shape());
    {
        let gd = grad.data_mut();
        for (i, &v) in z.iter().enumerate() {
            gd[i] = (v - log_sum_exp).exp();
        }
        gd[label] -= 1.0;
    }
    Ok((loss, grad))
}

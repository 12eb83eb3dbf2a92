//! Instance normalization: per-sample, per-channel statistics over the
//! spatial dimensions, with learned per-channel scale and shift.

use rand_chacha::ChaCha8Rng;

use super::{Layer, LayerKind, Mode};
use crate::error::NnError;
use crate::tensor::Tensor;

const EPS: f64 = 1e-5;

#[derive(Clone)]
pub struct InstanceNorm {
    gamma: Tensor,
    beta: Tensor,
    grad_gamma: Tensor,
    grad_beta: Tensor,
    cache: Option<NormCache>,
}

#[derive(Clone)]
struct NormCache {
    /// Normalized activations (x - mu) / sqrt(var + eps).
    xhat: Tensor,
    /// Per-channel 1 / sqrt(var + eps).
    inv_std: Vec<f64>,
}

impl InstanceNorm {
    pub fn new(channels: usize) -> Self {
        InstanceNorm {
            gamma: Tensor::scalar_filled(&[channels], 1.0),
            beta: Tensor::zeros(&[channels]),
            grad_gamma: Tensor::zeros(&[channels]),
            grad_beta: Tensor::zeros(&[channels]),
            cache: None,
        }
    }

    pub fn from_parameters(gamma: Tensor, beta: Tensor) -> Result<Self, NnError> {
        if gamma.ndim() != 1 || gamma.shape() != beta.shape() {
            return Err(NnError::shape(format!(
                "instance norm parameters must be matching vectors, got {:?} and {:?}",
                gamma.shape(),
                beta.shape()
            )));
        }
        let grad_gamma = Tensor::zeros(gamma.shape());
        let grad_beta = Tensor::zeros(beta.shape());
        Ok(InstanceNorm {
            gamma,
            beta,
            grad_gamma,
            grad_beta,
            cache: None,
        })
    }

    pub fn epsilon(&self) -> f64 {
        EPS
    }
}

impl Layer for InstanceNorm {
    fn kind(&self) -> LayerKind {
        LayerKind::InstanceNorm
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let [h, w, c] = match x.shape() {
            [h, w, c] => [*h, *w, *c],
            other => {
                return Err(NnError::shape(format!(
                    "instance norm input must be 3-D, got {other:?}"
                )))
            }
        };
        if c != self.gamma.len() {
            return Err(NnError::shape(format!(
                "instance norm has {} channels, input has {c}",
                self.gamma.len()
            )));
        }
        let m = (h * w) as f64;
        let mut y = Tensor::zeros(x.shape());
        let mut xhat = Tensor::zeros(x.shape());
        let mut inv_std = vec![0.0; c];
        {
            let xd = x.data();
            let yd = y.data_mut();
            let xh = xhat.data_mut();
            let gd = self.gamma.data();
            let bd = self.beta.data();
            for cc in 0..c {
                let mut mean = 0.0;
                for s in 0..h * w {
                    mean += xd[s * c + cc];
                }
                mean /= m;
                let mut var = 0.0;
                for s in 0..h * w {
                    let d = xd[s * c + cc] - mean;
                    var += d * d;
                }
                var /= m;
                let istd = 1.0 / (var + EPS).sqrt();
                inv_std[cc] = istd;
                for s in 0..h * w {
                    let xn = (xd[s * c + cc] - mean) * istd;
                    xh[s * c + cc] = xn;
                    yd[s * c + cc] = gd[cc] * xn + bd[cc];
                }
            }
        }
        y.debug_assert_finite("instance norm forward");
        self.cache = Some(NormCache { xhat, inv_std });
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| NnError::shape("instance norm backward without forward"))?;
        if grad_out.shape() != cache.xhat.shape() {
            return Err(NnError::shape(format!(
                "instance norm backward expects {:?}, got {:?}",
                cache.xhat.shape(),
                grad_out.shape()
            )));
        }
        let [h, w, c] = [
            cache.xhat.shape()[0],
            cache.xhat.shape()[1],
            cache.xhat.shape()[2],
        ];
        let m = (h * w) as f64;
        let mut grad_in = Tensor::zeros(grad_out.shape());
        {
            let gd = grad_out.data();
            let xh = cache.xhat.data();
            let gid = grad_in.data_mut();
            let gg = self.grad_gamma.data_mut();
            let gb = self.grad_beta.data_mut();
            let gamma = self.gamma.data();
            for cc in 0..c {
                let mut sum_g = 0.0;
                let mut sum_gx = 0.0;
                for s in 0..h * w {
                    let g = gd[s * c + cc];
                    sum_g += g;
                    sum_gx += g * xh[s * c + cc];
                }
                gb[cc] += sum_g;
                gg[cc] += sum_gx;
                let scale = gamma[cc] * cache.inv_std[cc];
                let mean_g = sum_g / m;
                let mean_gx = sum_gx / m;
                for s in 0..h * w {
                    let g = gd[s * c + cc];
                    gid[s * c + cc] = scale * (g - mean_g - xh[s * c + cc] * mean_gx);
                }
            }
        }
        Ok(grad_in)
    }

    fn params(&self) -> Vec<&Tensor> {
        vec![&self.gamma, &self.beta]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.gamma, &mut self.beta]
    }

    fn grads(&self) -> Vec<&Tensor> {
        vec![&self.grad_gamma, &self.grad_beta]
    }

    fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        vec![
            (&mut self.gamma, &self.grad_gamma),
            (&mut self.beta, &self.grad_beta),
        ]
    }

    fn zero_grads(&mut self) {
        self.grad_gamma.fill(0.0);
        self.grad_beta.fill(0.0);
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

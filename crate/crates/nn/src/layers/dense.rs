//! Fully connected layer, `y = W x + b`.

use rand_chacha::ChaCha8Rng;

use super::{Layer, LayerKind, Mode};
use crate::error::NnError;
use crate::tensor::Tensor;

#[derive(Clone)]
pub struct Dense {
    /// Row-major `[out, in]` weight matrix.
    weight: Tensor,
    bias: Tensor,
    grad_weight: Tensor,
    grad_bias: Tensor,
    cache_input: Option<Tensor>,
}

impl Dense {
    pub fn new(dim_in: usize, dim_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let weight = Tensor::he_uniform(&[dim_out, dim_in], dim_in, rng);
        let bias = Tensor::zeros(&[dim_out]);
        let grad_weight = Tensor::zeros(weight.shape());
        let grad_bias = Tensor::zeros(bias.shape());
        Dense {
            weight,
            bias,
            grad_weight,
            grad_bias,
            cache_input: None,
        }
    }

    pub fn from_parameters(weight: Tensor, bias: Tensor) -> Result<Self, NnError> {
        if weight.ndim() != 2 {
            return Err(NnError::shape(format!(
                "dense weight must be 2-D, got {:?}",
                weight.shape()
            )));
        }
        if bias.shape() != [weight.shape()[0]] {
            return Err(NnError::shape(format!(
                "dense bias {:?} does not match weight {:?}",
                bias.shape(),
                weight.shape()
            )));
        }
        let grad_weight = Tensor::zeros(weight.shape());
        let grad_bias = Tensor::zeros(bias.shape());
        Ok(Dense {
            weight,
            bias,
            grad_weight,
            grad_bias,
            cache_input: None,
        })
    }
}

impl Layer for Dense {
    fn kind(&self) -> LayerKind {
        LayerKind::Dense
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let dim_out = self.weight.shape()[0];
        let dim_in = self.weight.shape()[1];
        if x.ndim() != 1 || x.len() != dim_in {
            return Err(NnError::shape(format!(
                "dense expects a [{dim_in}] vector, got {:?}",
                x.shape()
            )));
        }
        let mut y = Tensor::zeros(&[dim_out]);
        {
            let xd = x.data();
            let wd = self.weight.data();
            let bd = self.bias.data();
            let yd = y.data_mut();
            for o in 0..dim_out {
                let row = &wd[o * dim_in..(o + 1) * dim_in];
                let mut acc = bd[o];
                for (w, xv) in row.iter().zip(xd) {
                    acc += w * xv;
                }
                yd[o] = acc;
            }
        }
        y.debug_assert_finite("dense forward");
        self.cache_input = Some(x.clone());
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let x = self
            .cache_input
            .take()
            .ok_or_else(|| NnError::shape("dense backward without forward"))?;
        let dim_out = self.weight.shape()[0];
        let dim_in = self.weight.shape()[1];
        if grad_out.len() != dim_out {
            return Err(NnError::shape(format!(
                "dense backward expects [{dim_out}], got {:?}",
                grad_out.shape()
            )));
        }
        let mut grad_in = Tensor::zeros(&[dim_in]);
        {
            let xd = x.data();
            let gd = grad_out.data();
            let wd = self.weight.data();
            let gwd = self.grad_weight.data_mut();
            let gbd = self.grad_bias.data_mut();
            let gid = grad_in.data_mut();
            for o in 0..dim_out {
                let g = gd[o];
                gbd[o] += g;
                let wrow = &wd[o * dim_in..(o + 1) * dim_in];
                let gwrow = &mut gwd[o * dim_in..(o + 1) * dim_in];
                for i in 0..dim_in {
                    gwrow[i] += g * xd[i];
                    gid[i] += g * wrow[i];
                }
            }
        }
        Ok(grad_in)
    }

    fn params(&self) -> Vec<&Tensor> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.weight, &mut self.bias]
    }

    fn grads(&self) -> Vec<&Tensor> {
        vec![&self.grad_weight, &self.grad_bias]
    }

    fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        vec![
            (&mut self.weight, &self.grad_weight),
            (&mut self.bias, &self.grad_bias),
        ]
    }

    fn zero_grads(&mut self) {
        self.grad_weight.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

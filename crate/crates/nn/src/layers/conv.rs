//! 2-D convolution (cross-correlation), valid padding, stride 1.

use rand_chacha::ChaCha8Rng;

use super::{Layer, LayerKind, Mode};
use crate::error::NnError;
use crate::tensor::Tensor;

/// Convolution over `[H, W, C_in]` inputs with a `[kh, kw, C_in, C_out]`
/// kernel and per-output-channel bias. Output is `[H-kh+1, W-kw+1, C_out]`.
#[derive(Clone)]
pub struct Conv2d {
    kernel: Tensor,
    bias: Tensor,
    grad_kernel: Tensor,
    grad_bias: Tensor,
    cache_input: Option<Tensor>,
}

impl Conv2d {
    pub fn new(
        kh: usize,
        kw: usize,
        c_in: usize,
        c_out: usize,
        rng: &mut ChaCha8Rng,
    ) -> Self {
        let fan_in = kh * kw * c_in;
        let kernel = Tensor::he_uniform(&[kh, kw, c_in, c_out], fan_in, rng);
        let bias = Tensor::zeros(&[c_out]);
        let grad_kernel = Tensor::zeros(kernel.shape());
        let grad_bias = Tensor::zeros(bias.shape());
        Conv2d {
            kernel,
            bias,
            grad_kernel,
            grad_bias,
            cache_input: None,
        }
    }

    pub fn from_parameters(kernel: Tensor, bias: Tensor) -> Result<Self, NnError> {
        if kernel.ndim() != 4 {
            return Err(NnError::shape(format!(
                "conv kernel must be 4-D, got {:?}",
                kernel.shape()
            )));
        }
        if bias.shape() != [kernel.shape()[3]] {
            return Err(NnError::shape(format!(
                "conv bias {:?} does not match kernel {:?}",
                bias.shape(),
                kernel.shape()
            )));
        }
        let grad_kernel = Tensor::zeros(kernel.shape());
        let grad_bias = Tensor::zeros(bias.shape());
        Ok(Conv2d {
            kernel,
            bias,
            grad_kernel,
            grad_bias,
            cache_input: None,
        })
    }

    fn dims(&self) -> (usize, usize, usize, usize) {
        let s = self.kernel.shape();
        (s[0], s[1], s[2], s[3])
    }
}

impl Layer for Conv2d {
    fn kind(&self) -> LayerKind {
        LayerKind::Conv2d
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let (kh, kw, c_in, c_out) = self.dims();
        let [h, w, c] = match x.shape() {
            [h, w, c] => [*h, *w, *c],
            other => return Err(NnError::shape(format!("conv input must be 3-D, got {other:?}"))),
        };
        if c != c_in {
            return Err(NnError::shape(format!(
                "conv expects {c_in} input channels, got {c}"
            )));
        }
        if h < kh || w < kw {
            return Err(NnError::shape(format!(
                "kernel ({kh},{kw}) larger than input ({h},{w})"
            )));
        }
        let (ho, wo) = (h - kh + 1, w - kw + 1);
        let mut y = Tensor::zeros(&[ho, wo, c_out]);
        {
            let xd = x.data();
            let kd = self.kernel.data();
            let bd = self.bias.data();
            let yd = y.data_mut();
            for i in 0..ho {
                for j in 0..wo {
                    let out_base = (i * wo + j) * c_out;
                    yd[out_base..out_base + c_out].copy_from_slice(bd);
                    for p in 0..kh {
                        for q in 0..kw {
                            let in_base = ((i + p) * w + (j + q)) * c_in;
                            let k_base = (p * kw + q) * c_in * c_out;
                            for cc in 0..c_in {
                                let xv = xd[in_base + cc];
                                if xv == 0.0 {
                                    continue;
                                }
                                let krow = &kd[k_base + cc * c_out..k_base + (cc + 1) * c_out];
                                for (o, kv) in krow.iter().enumerate() {
                                    yd[out_base + o] += xv * kv;
                                }
                            }
                        }
                    }
                }
            }
        }
        y.debug_assert_finite("conv2d forward");
        self.cache_input = Some(x.clone());
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let x = self
            .cache_input
            .take()
            .ok_or_else(|| NnError::shape("conv backward without forward"))?;
        let (kh, kw, c_in, c_out) = self.dims();
        let (h, w) = (x.shape()[0], x.shape()[1]);
        let (ho, wo) = (h - kh + 1, w - kw + 1);
        if grad_out.shape() != [ho, wo, c_out] {
            return Err(NnError::shape(format!(
                "conv backward expects grad {:?}, got {:?}",
                [ho, wo, c_out],
                grad_out.shape()
            )));
        }
        let mut grad_in = Tensor::zeros(x.shape());
        {
            let xd = x.data();
            let gd = grad_out.data();
            let kd = self.kernel.data();
            let gkd = self.grad_kernel.data_mut();
            let gbd = self.grad_bias.data_mut();
            let gid = grad_in.data_mut();
            for i in 0..ho {
                for j in 0..wo {
                    let out_base = (i * wo + j) * c_out;
                    let grow = &gd[out_base..out_base + c_out];
                    for (o, gv) in grow.iter().enumerate() {
                        gbd[o] += gv;
                    }
                    for p in 0..kh {
                        for q in 0..kw {
                            let in_base = ((i + p) * w + (j + q)) * c_in;
                            let k_base = (p * kw + q) * c_in * c_out;
                            for cc in 0..c_in {
                                let xv = xd[in_base + cc];
                                let krow = &kd[k_base + cc * c_out..k_base + (cc + 1) * c_out];
                                let gkrow =
                                    &mut gkd[k_base + cc * c_out..k_base + (cc + 1) * c_out];
                                let mut acc = 0.0;
                                for (o, gv) in grow.iter().enumerate() {
                                    gkrow[o] += xv * gv;
                                    acc += gv * krow[o];
                                }
                                gid[in_base + cc] += acc;
                            }
                        }
                    }
                }
            }
        }
        Ok(grad_in)
    }

    fn params(&self) -> Vec<&Tensor> {
        vec![&self.kernel, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.kernel, &mut self.bias]
    }

    fn grads(&self) -> Vec<&Tensor> {
        vec![&self.grad_kernel, &self.grad_bias]
    }

    fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        vec![
            (&mut self.kernel, &self.grad_kernel),
            (&mut self.bias, &self.grad_bias),
        ]
    }

    fn zero_grads(&mut self) {
        self.grad_kernel.fill(0.0);
        self.grad_bias.fill(0.0);
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(1)
    }

    #[test]
    fn identity_1x1_kernel() {
        let kernel = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let bias = Tensor::zeros(&[1]);
        let mut conv = Conv2d::from_parameters(kernel, bias).unwrap();
        let x = Tensor::from_vec(&[2, 2, 1], vec![1.0, -2.0, 3.0, 0.5]).unwrap();
        let y = conv.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.shape(), &[2, 2, 1]);
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn all_ones_2x2_on_ones_input_sums_to_four() {
        let kernel = Tensor::from_vec(&[2, 2, 1, 1], vec![1.0; 4]).unwrap();
        let bias = Tensor::zeros(&[1]);
        let mut conv = Conv2d::from_parameters(kernel, bias).unwrap();
        let x = Tensor::from_vec(&[2, 2, 1], vec![1.0; 4]).unwrap();
        let y = conv.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.shape(), &[1, 1, 1]);
        assert_eq!(y.data(), &[4.0]);
    }

    #[test]
    fn kernel_larger_than_input_is_shape_error() {
        let mut conv = Conv2d::new(3, 3, 1, 1, &mut rng());
        let x = Tensor::zeros(&[2, 2, 1]);
        assert!(conv.forward(&x, Mode::Eval, &mut rng()).is_err());
    }
}

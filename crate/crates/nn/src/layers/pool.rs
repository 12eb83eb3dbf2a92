//! Max pooling (stride = kernel) and global average pooling.

use rand_chacha::ChaCha8Rng;

use super::{Layer, LayerKind, Mode};
use crate::error::NnError;
use crate::tensor::Tensor;

/// Per-window max over non-overlapping `(kh, kw)` windows. The backward
/// pass routes the gradient to the argmax; on exact ties the first element
/// in row-major scan order wins.
#[derive(Clone)]
pub struct MaxPool2d {
    kh: usize,
    kw: usize,
    cache: Option<PoolCache>,
}

#[derive(Clone)]
struct PoolCache {
    in_shape: Vec<usize>,
    /// Flat input index of the max of each output element.
    argmax: Vec<usize>,
}

impl MaxPool2d {
    pub fn new(kh: usize, kw: usize) -> Self {
        MaxPool2d {
            kh,
            kw,
            cache: None,
        }
    }

    pub fn kernel(&self) -> (usize, usize) {
        (self.kh, self.kw)
    }
}

impl Layer for MaxPool2d {
    fn kind(&self) -> LayerKind {
        LayerKind::MaxPool2d
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
                    "maxpool input must be 3-D, got {other:?}"
                )))
            }
        };
        if self.kh == 0 || self.kw == 0 || h % self.kh != 0 || w % self.kw != 0 {
            return Err(NnError::shape(format!(
                "maxpool ({},{}) does not divide input ({h},{w})",
                self.kh, self.kw
            )));
        }
        let (ho, wo) = (h / self.kh, w / self.kw);
        let mut y = Tensor::zeros(&[ho, wo, c]);
        let mut argmax = vec![0usize; ho * wo * c];
        {
            let xd = x.data();
            let yd = y.data_mut();
            for i in 0..ho {
                for j in 0..wo {
                    for cc in 0..c {
                        let mut best_idx = ((i * self.kh) * w + j * self.kw) * c + cc;
                        let mut best = xd[best_idx];
                        for p in 0..self.kh {
                            for q in 0..self.kw {
                                let idx = ((i * self.kh + p) * w + (j * self.kw + q)) * c + cc;
                                if xd[idx] > best {
                                    best = xd[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        let out_idx = (i * wo + j) * c + cc;
                        yd[out_idx] = best;
                        argmax[out_idx] = best_idx;
                    }
                }
            }
        }
        self.cache = Some(PoolCache {
            in_shape: x.shape().to_vec(),
            argmax,
        });
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let cache = self
            .cache
            .take()
            .ok_or_else(|| NnError::shape("maxpool backward without forward"))?;
        if grad_out.len() != cache.argmax.len() {
            return Err(NnError::shape(format!(
                "maxpool backward got {} gradients for {} outputs",
                grad_out.len(),
                cache.argmax.len()
            )));
        }
        let mut grad_in = Tensor::zeros(&cache.in_shape);
        let gid = grad_in.data_mut();
        for (g, &idx) in grad_out.data().iter().zip(&cache.argmax) {
            gid[idx] += g;
        }
        Ok(grad_in)
    }

    fn state(&self) -> Vec<f64> {
        vec![self.kh as f64, self.kw as f64]
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

/// Mean over all but the last (channel) dimension: `[H, W, C] -> [C]`.
#[derive(Clone)]
pub struct GlobalAvgPool {
    cache_shape: Option<Vec<usize>>,
}

impl GlobalAvgPool {
    pub fn new() -> Self {
        GlobalAvgPool { cache_shape: None }
    }
}

impl Default for GlobalAvgPool {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for GlobalAvgPool {
    fn kind(&self) -> LayerKind {
        LayerKind::GlobalAvgPool
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        if x.ndim() < 2 {
            return Err(NnError::shape(format!(
                "global average pool needs >= 2 dims, got {:?}",
                x.shape()
            )));
        }
        let c = *x.shape().last().unwrap();
        let spatial = x.len() / c;
        let mut y = Tensor::zeros(&[c]);
        {
            let xd = x.data();
            let yd = y.data_mut();
            for s in 0..spatial {
                for cc in 0..c {
                    yd[cc] += xd[s * c + cc];
                }
            }
            for v in yd.iter_mut() {
                *v /= spatial as f64;
            }
        }
        self.cache_shape = Some(x.shape().to_vec());
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let shape = self
            .cache_shape
            .take()
            .ok_or_else(|| NnError::shape("global average pool backward without forward"))?;
        let c = *shape.last().unwrap();
        if grad_out.len() != c {
            return Err(NnError::shape(format!(
                "global average pool backward expects [{c}], got {:?}",
                grad_out.shape()
            )));
        }
        let spatial: usize = shape.iter().take(shape.len() - 1).product();
        let mut grad_in = Tensor::zeros(&shape);
        let gid = grad_in.data_mut();
        let gd = grad_out.data();
        for s in 0..spatial {
            for cc in 0..c {
                gid[s * c + cc] = gd[cc] / spatial as f64;
            }
        }
        Ok(grad_in)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

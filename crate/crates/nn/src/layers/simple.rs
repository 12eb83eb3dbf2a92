//! Stateless and fixed-parameter layers: ReLU, dropout, zero padding,
//! per-channel input scaling and flattening.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Layer, LayerKind, Mode};
use crate::error::NnError;
use crate::tensor::Tensor;

#[derive(Clone)]
pub struct Relu {
    cache_input: Option<Tensor>,
}

impl Relu {
    pub fn new() -> Self {
        Relu { cache_input: None }
    }
}

impl Default for Relu {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for Relu {
    fn kind(&self) -> LayerKind {
        LayerKind::Relu
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let mut y = x.clone();
        for v in y.data_mut() {
            if *v < 0.0 {
                *v = 0.0;
            }
        }
        self.cache_input = Some(x.clone());
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let x = self
            .cache_input
            .take()
            .ok_or_else(|| NnError::shape("relu backward without forward"))?;
        if grad_out.len() != x.len() {
            return Err(NnError::shape("relu gradient length mismatch"));
        }
        let mut grad_in = grad_out.clone();
        for (g, xv) in grad_in.data_mut().iter_mut().zip(x.data()) {
            if *xv <= 0.0 {
                *g = 0.0;
            }
        }
        Ok(grad_in)
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

/// Inverted dropout: keeps a unit with probability `1 - rate` and scales it
/// by `1/(1 - rate)` at train time; identity at evaluation time, so
/// `E[dropout(x)] = x`.
#[derive(Clone)]
pub struct Dropout {
    rate: f64,
    cache_mask: Option<Vec<f64>>,
}

impl Dropout {
    pub fn new(rate: f64) -> Self {
        assert!((0.0..1.0).contains(&rate), "dropout rate must be in [0,1)");
        Dropout {
            rate,
            cache_mask: None,
        }
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

impl Layer for Dropout {
    fn kind(&self) -> LayerKind {
        LayerKind::Dropout
    }

    fn forward(
        &mut self,
        x: &Tensor,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        if mode == Mode::Eval || self.rate == 0.0 {
            self.cache_mask = None;
            return Ok(x.clone());
        }
        let keep = 1.0 - self.rate;
        let scale = 1.0 / keep;
        let mask: Vec<f64> = (0..x.len())
            .map(|_| if rng.gen::<f64>() < keep { scale } else { 0.0 })
            .collect();
        let mut y = x.clone();
        for (v, m) in y.data_mut().iter_mut().zip(&mask) {
            *v *= m;
        }
        self.cache_mask = Some(mask);
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        match self.cache_mask.take() {
            None => Ok(grad_out.clone()),
            Some(mask) => {
                if mask.len() != grad_out.len() {
                    return Err(NnError::shape("dropout gradient length mismatch"));
                }
                let mut grad_in = grad_out.clone();
                for (g, m) in grad_in.data_mut().iter_mut().zip(&mask) {
                    *g *= m;
                }
                Ok(grad_in)
            }
        }
    }

    fn state(&self) -> Vec<f64> {
        vec![self.rate]
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

/// Pads the bottom and right of the two spatial dims with zeros.
#[derive(Clone)]
pub struct ZeroPad2d {
    pad_h: usize,
    pad_w: usize,
    cache_shape: Option<Vec<usize>>,
}

impl ZeroPad2d {
    pub fn new(pad_h: usize, pad_w: usize) -> Self {
        ZeroPad2d {
            pad_h,
            pad_w,
            cache_shape: None,
        }
    }
}

impl Layer for ZeroPad2d {
    fn kind(&self) -> LayerKind {
        LayerKind::ZeroPad2d
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
                    "zero pad input must be 3-D, got {other:?}"
                )))
            }
        };
        let (ho, wo) = (h + self.pad_h, w + self.pad_w);
        let mut y = Tensor::zeros(&[ho, wo, c]);
        {
            let xd = x.data();
            let yd = y.data_mut();
            for i in 0..h {
                let src = &xd[i * w * c..(i + 1) * w * c];
                let dst = &mut yd[i * wo * c..i * wo * c + w * c];
                dst.copy_from_slice(src);
            }
        }
        self.cache_shape = Some(x.shape().to_vec());
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let shape = self
            .cache_shape
            .take()
            .ok_or_else(|| NnError::shape("zero pad backward without forward"))?;
        let (h, w, c) = (shape[0], shape[1], shape[2]);
        let wo = w + self.pad_w;
        if grad_out.shape() != [h + self.pad_h, wo, c] {
            return Err(NnError::shape("zero pad gradient shape mismatch"));
        }
        let mut grad_in = Tensor::zeros(&shape);
        {
            let gd = grad_out.data();
            let gid = grad_in.data_mut();
            for i in 0..h {
                let src = &gd[i * wo * c..i * wo * c + w * c];
                let dst = &mut gid[i * w * c..(i + 1) * w * c];
                dst.copy_from_slice(src);
            }
        }
        Ok(grad_in)
    }

    fn state(&self) -> Vec<f64> {
        vec![self.pad_h as f64, self.pad_w as f64]
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

/// Multiplies each channel (last dimension) by a fixed, non-trained scale.
/// Used to bring raw physical magnitudes into a trainable range; the scale
/// is fitted once from training data and stored with the model.
#[derive(Clone)]
pub struct ChannelScale {
    scale: Tensor,
}

impl ChannelScale {
    pub fn new(scale: Vec<f64>) -> Self {
        let len = scale.len();
        ChannelScale {
            scale: Tensor::from_vec(&[len], scale).expect("scale vector"),
        }
    }

    pub fn from_tensor(scale: Tensor) -> Self {
        ChannelScale { scale }
    }

    pub fn scale(&self) -> &[f64] {
        self.scale.data()
    }
}

impl Layer for ChannelScale {
    fn kind(&self) -> LayerKind {
        LayerKind::ChannelScale
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let c = self.scale.len();
        if x.len() % c != 0 || *x.shape().last().unwrap_or(&0) != c {
            return Err(NnError::shape(format!(
                "channel scale of {c} channels does not match input {:?}",
                x.shape()
            )));
        }
        let mut y = x.clone();
        let sd = self.scale.data();
        for (i, v) in y.data_mut().iter_mut().enumerate() {
            *v *= sd[i % c];
        }
        Ok(y)
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let c = self.scale.len();
        let mut grad_in = grad_out.clone();
        let sd = self.scale.data();
        for (i, g) in grad_in.data_mut().iter_mut().enumerate() {
            *g *= sd[i % c];
        }
        Ok(grad_in)
    }

    fn tensors(&self) -> Vec<&Tensor> {
        vec![&self.scale]
    }

    fn clone_box(&self) -> Box<dyn Layer> {
        Box::new(self.clone())
    }
}

/// Reshapes any input to a flat vector.
#[derive(Clone)]
pub struct Flatten {
    cache_shape: Option<Vec<usize>>,
}

impl Flatten {
    pub fn new() -> Self {
        Flatten { cache_shape: None }
    }
}

impl Default for Flatten {
    fn default() -> Self {
        Self::new()
    }
}

impl Layer for Flatten {
    fn kind(&self) -> LayerKind {
        LayerKind::Flatten
    }

    fn forward(
        &mut self,
        x: &Tensor,
        _mode: Mode,
        _rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        self.cache_shape = Some(x.shape().to_vec());
        x.clone().reshaped(&[x.len()])
    }

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError> {
        let shape = self
            .cache_shape
            .take()
            .ok_or_else(|| NnError::shape("flatten backward without forward"))?;
        grad_out.clone().reshaped(&shape)
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
        ChaCha8Rng::seed_from_u64(9)
    }

    #[test]
    fn relu_clamps_negatives() {
        let mut relu = Relu::new();
        let x = Tensor::from_vec(&[3], vec![-1.0, 0.0, 2.0]).unwrap();
        let y = relu.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn dropout_is_identity_at_eval() {
        let mut d = Dropout::new(0.5);
        let x = Tensor::from_vec(&[4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = d.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.data(), x.data());
    }

    #[test]
    fn dropout_expectation_preserves_input() {
        // Monte-Carlo mean within 1% over 1e5 draws
        let mut d = Dropout::new(0.2);
        let x = Tensor::from_vec(&[1], vec![3.0]).unwrap();
        let mut rng = rng();
        let n = 100_000;
        let mut acc = 0.0;
        for _ in 0..n {
            acc += d.forward(&x, Mode::Train, &mut rng).unwrap().data()[0];
        }
        let mean = acc / n as f64;
        assert!(
            (mean / 3.0 - 1.0).abs() < 0.01,
            "dropout expectation {mean} should be close to 3"
        );
    }

    #[test]
    fn zero_pad_extends_bottom_right() {
        let mut pad = ZeroPad2d::new(1, 1);
        let x = Tensor::from_vec(&[1, 2, 1], vec![5.0, 6.0]).unwrap();
        let y = pad.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.shape(), &[2, 3, 1]);
        assert_eq!(y.data(), &[5.0, 6.0, 0.0, 0.0, 0.0, 0.0]);
        let g = pad
            .backward(&Tensor::from_vec(&[2, 3, 1], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap())
            .unwrap();
        assert_eq!(g.data(), &[1.0, 2.0]);
    }

    #[test]
    fn channel_scale_multiplies_last_dim() {
        let mut scale = ChannelScale::new(vec![2.0, 0.5]);
        let x = Tensor::from_vec(&[1, 2, 2], vec![1.0, 4.0, 3.0, 8.0]).unwrap();
        let y = scale.forward(&x, Mode::Eval, &mut rng()).unwrap();
        assert_eq!(y.data(), &[2.0, 2.0, 6.0, 4.0]);
    }
}

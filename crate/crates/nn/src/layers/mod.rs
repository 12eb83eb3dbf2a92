//! Layer contract and the sequential network container.

use rand_chacha::ChaCha8Rng;

use crate::error::NnError;
use crate::tensor::Tensor;

mod conv;
mod dense;
mod norm;
mod pool;
mod simple;

pub use conv::Conv2d;
pub use dense::Dense;
pub use norm::InstanceNorm;
pub use pool::{GlobalAvgPool, MaxPool2d};
pub use simple::{ChannelScale, Dropout, Flatten, Relu, ZeroPad2d};

/// Forward mode: training enables dropout masks, evaluation is deterministic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Train,
    Eval,
}

/// Stable layer identifiers used in the model file format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum LayerKind {
    Conv2d = 1,
    MaxPool2d = 2,
    InstanceNorm = 3,
    Relu = 4,
    Dense = 5,
    GlobalAvgPool = 6,
    Dropout = 7,
    ZeroPad2d = 8,
    ChannelScale = 9,
    Flatten = 10,
}

impl LayerKind {
    pub fn from_code(code: u16) -> Result<Self, NnError> {
        Ok(match code {
            1 => LayerKind::Conv2d,
            2 => LayerKind::MaxPool2d,
            3 => LayerKind::InstanceNorm,
            4 => LayerKind::Relu,
            5 => LayerKind::Dense,
            6 => LayerKind::GlobalAvgPool,
            7 => LayerKind::Dropout,
            8 => LayerKind::ZeroPad2d,
            9 => LayerKind::ChannelScale,
            10 => LayerKind::Flatten,
            other => return Err(NnError::format(format!("unknown layer kind {other}"))),
        })
    }
}

/// A differentiable layer.
///
/// `forward` caches whatever `backward` needs; `backward` consumes the cache
/// of the most recent forward and accumulates parameter gradients (they are
/// summed across calls until `zero_grads`).
pub trait Layer: Send {
    fn kind(&self) -> LayerKind;

    fn forward(&mut self, x: &Tensor, mode: Mode, rng: &mut ChaCha8Rng)
        -> Result<Tensor, NnError>;

    fn backward(&mut self, grad_out: &Tensor) -> Result<Tensor, NnError>;

    /// Trainable parameters.
    fn params(&self) -> Vec<&Tensor> {
        Vec::new()
    }

    fn params_mut(&mut self) -> Vec<&mut Tensor> {
        Vec::new()
    }

    /// Accumulated parameter gradients, aligned with `params`.
    fn grads(&self) -> Vec<&Tensor> {
        Vec::new()
    }

    /// Paired mutable parameters and their gradients, for optimizer updates.
    fn params_and_grads(&mut self) -> Vec<(&mut Tensor, &Tensor)> {
        Vec::new()
    }

    fn zero_grads(&mut self) {}

    /// Scalar state persisted in the model file (kernel sizes, rates, ...).
    fn state(&self) -> Vec<f64> {
        Vec::new()
    }

    /// All tensors persisted in the model file; defaults to the trainable
    /// parameters but may include fixed tensors (e.g. channel scales).
    fn tensors(&self) -> Vec<&Tensor> {
        self.params()
    }

    fn clone_box(&self) -> Box<dyn Layer>;
}

impl Clone for Box<dyn Layer> {
    fn clone(&self) -> Self {
        self.clone_box()
    }
}

/// A fixed sequence of layers.
#[derive(Clone)]
pub struct Network {
    pub layers: Vec<Box<dyn Layer>>,
}

impl Network {
    pub fn new(layers: Vec<Box<dyn Layer>>) -> Self {
        Network { layers }
    }

    pub fn forward(
        &mut self,
        x: &Tensor,
        mode: Mode,
        rng: &mut ChaCha8Rng,
    ) -> Result<Tensor, NnError> {
        let mut cur = x.clone();
        for layer in self.layers.iter_mut() {
            cur = layer.forward(&cur, mode, rng)?;
        }
        Ok(cur)
    }

    /// Deterministic evaluation-mode forward pass.
    pub fn infer(&mut self, x: &Tensor) -> Result<Tensor, NnError> {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.forward(x, Mode::Eval, &mut rng)
    }

    pub fn backward(&mut self, grad: &Tensor) -> Result<Tensor, NnError> {
        let mut cur = grad.clone();
        for layer in self.layers.iter_mut().rev() {
            cur = layer.backward(&cur)?;
        }
        Ok(cur)
    }

    pub fn zero_grads(&mut self) {
        for layer in self.layers.iter_mut() {
            layer.zero_grads();
        }
    }

    pub fn num_params(&self) -> usize {
        self.layers
            .iter()
            .flat_map(|l| l.params())
            .map(|t| t.len())
            .sum()
    }
}

/// Rebuilds a layer from its serialized record.
pub fn layer_from_record(
    kind: LayerKind,
    state: &[f64],
    mut tensors: Vec<Tensor>,
) -> Result<Box<dyn Layer>, NnError> {
    let mut take = |n: usize| -> Result<Vec<Tensor>, NnError> {
        if tensors.len() != n {
            return Err(NnError::format(format!(
                "layer {kind:?} expects {n} tensors, found {}",
                tensors.len()
            )));
        }
        Ok(std::mem::take(&mut tensors))
    };
    let state_at = |i: usize| -> Result<f64, NnError> {
        state
            .get(i)
            .copied()
            .ok_or_else(|| NnError::format(format!("layer {kind:?} missing state value {i}")))
    };
    Ok(match kind {
        LayerKind::Conv2d => {
            let mut t = take(2)?;
            let bias = t.pop().unwrap();
            let kernel = t.pop().unwrap();
            Box::new(Conv2d::from_parameters(kernel, bias)?)
        }
        LayerKind::Dense => {
            let mut t = take(2)?;
            let bias = t.pop().unwrap();
            let weight = t.pop().unwrap();
            Box::new(Dense::from_parameters(weight, bias)?)
        }
        LayerKind::InstanceNorm => {
            let mut t = take(2)?;
            let beta = t.pop().unwrap();
            let gamma = t.pop().unwrap();
            Box::new(InstanceNorm::from_parameters(gamma, beta)?)
        }
        LayerKind::MaxPool2d => {
            take(0)?;
            Box::new(MaxPool2d::new(state_at(0)? as usize, state_at(1)? as usize))
        }
        LayerKind::Relu => {
            take(0)?;
            Box::new(Relu::new())
        }
        LayerKind::GlobalAvgPool => {
            take(0)?;
            Box::new(GlobalAvgPool::new())
        }
        LayerKind::Dropout => {
            take(0)?;
            Box::new(Dropout::new(state_at(0)?))
        }
        LayerKind::ZeroPad2d => {
            take(0)?;
            Box::new(ZeroPad2d::new(state_at(0)? as usize, state_at(1)? as usize))
        }
        LayerKind::ChannelScale => {
            let mut t = take(1)?;
            Box::new(ChannelScale::from_tensor(t.pop().unwrap()))
        }
        LayerKind::Flatten => {
            take(0)?;
            Box::new(Flatten::new())
        }
    })
}

//! A minimal, deterministic, reverse-mode-differentiable neural network
//! engine: exactly the layers, losses and optimizers the estimation and
//! beam-prediction networks need, in double precision.

pub mod error;
pub mod gradcheck;
pub mod io;
pub mod layers;
pub mod loss;
pub mod optim;
pub mod tensor;

pub use error::NnError;
pub use gradcheck::gradient_check;
pub use io::{load_model, save_model, ModelFile};
pub use layers::{
    layer_from_record, ChannelScale, Conv2d, Dense, Dropout, Flatten, GlobalAvgPool, InstanceNorm,
    Layer, LayerKind, MaxPool2d, Mode, Network, Relu, ZeroPad2d,
};
pub use loss::{cross_entropy_loss, mse_loss, softmax};
pub use optim::{Optimizer, OptimizerConfig};
pub use tensor::Tensor;

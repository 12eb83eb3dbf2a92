//! Shared minibatch training loop.

use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;

use thzbeam_nn::{Mode, Network, NnError, Optimizer, Tensor};

use crate::error::LearnError;
use crate::split::{stream_rng, streams};

/// Per-epoch loss trace entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochLoss {
    pub epoch: usize,
    pub train_loss: f64,
    pub test_loss: f64,
}

/// Shared training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainHyper {
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: thzbeam_nn::OptimizerConfig,
    pub seed: u64,
}

/// Runs seeded minibatch training of `net` on precomputed inputs.
///
/// `loss` maps (network output, sample index) to a loss value and output
/// gradient. Single-threaded and fully deterministic: shuffling and dropout
/// draw from fixed streams of `(seed, stream_base)`.
pub fn train_network<F>(
    net: &mut Network,
    inputs: &[Tensor],
    loss: F,
    train_idx: &[usize],
    test_idx: &[usize],
    hyper: &TrainHyper,
    stream_base: u64,
) -> Result<Vec<EpochLoss>, LearnError>
where
    F: Fn(&Tensor, usize) -> Result<(f64, Tensor), NnError>,
{
    if train_idx.is_empty() {
        return Err(LearnError::invalid("training split is empty"));
    }
    let batch_size = hyper.batch_size.max(1);
    let mut opt = Optimizer::new(hyper.optimizer.clone())?;
    let mut shuffle_rng = stream_rng(hyper.seed, stream_base + streams::OFF_SHUFFLE);
    let mut dropout_rng = stream_rng(hyper.seed, stream_base + streams::OFF_DROPOUT);
    let mut order: Vec<usize> = train_idx.to_vec();
    let mut trace = Vec::with_capacity(hyper.epochs);
    for epoch in 0..hyper.epochs {
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(batch_size) {
            net.zero_grads();
            for &idx in batch {
                let out = net.forward(&inputs[idx], Mode::Train, &mut dropout_rng)?;
                let (l, grad) = loss(&out, idx)?;
                loss_sum += l;
                net.backward(&grad)?;
            }
            opt.step(net, epoch, 1.0 / batch.len() as f64);
        }
        let train_loss = loss_sum / order.len() as f64;
        let test_loss = evaluate_loss(net, inputs, &loss, test_idx)?;
        trace.push(EpochLoss {
            epoch,
            train_loss,
            test_loss,
        });
    }
    net.zero_grads();
    Ok(trace)
}

/// Mean evaluation-mode loss over an index set; 0 when the set is empty.
pub fn evaluate_loss<F>(
    net: &mut Network,
    inputs: &[Tensor],
    loss: &F,
    idx: &[usize],
) -> Result<f64, LearnError>
where
    F: Fn(&Tensor, usize) -> Result<(f64, Tensor), NnError>,
{
    if idx.is_empty() {
        return Ok(0.0);
    }
    let mut rng = dummy_rng();
    let mut total = 0.0;
    for &i in idx {
        let out = net.forward(&inputs[i], Mode::Eval, &mut rng)?;
        let (l, _) = loss(&out, i)?;
        total += l;
    }
    Ok(total / idx.len() as f64)
}

pub fn dummy_rng() -> ChaCha8Rng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(0)
}

//! Central-difference verification of analytic gradients.

use crate::error::NnError;
use crate::layers::{Mode, Network};
use crate::tensor::Tensor;

/// Compares every parameter's analytic gradient against central finite
/// differences and returns the worst relative error.
///
/// The network runs in evaluation mode (dropout disabled). The step is
/// `1e-6` scaled by the parameter magnitude; the relative error denominator
/// is `max(|analytic|, |numeric|, 1)`.
pub fn gradient_check<L>(
    net: &mut Network,
    input: &Tensor,
    loss: L,
) -> Result<f64, NnError>
where
    L: Fn(&Tensor) -> Result<(f64, Tensor), NnError>,
{
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);

    // analytic gradients
    net.zero_grads();
    let out = net.forward(input, Mode::Eval, &mut rng)?;
    let (_, grad_out) = loss(&out)?;
    net.backward(&grad_out)?;
    let analytic: Vec<Vec<f64>> = net
        .layers
        .iter()
        .flat_map(|l| l.grads())
        .map(|g| g.data().to_vec())
        .collect();

    // numeric gradients, one parameter element at a time
    let mut worst = 0.0f64;
    let mut tensor_idx = 0;
    let num_layers = net.layers.len();
    for layer_idx in 0..num_layers {
        let num_tensors = net.layers[layer_idx].params().len();
        for t in 0..num_tensors {
            let len = net.layers[layer_idx].params()[t].len();
            for e in 0..len {
                let original = net.layers[layer_idx].params()[t].data()[e];
                let h = 1e-6 * original.abs().max(1.0);

                net.layers[layer_idx].params_mut()[t].data_mut()[e] = original + h;
                let out = net.forward(input, Mode::Eval, &mut rng)?;
                let (loss_plus, _) = loss(&out)?;

                net.layers[layer_idx].params_mut()[t].data_mut()[e] = original - h;
                let out = net.forward(input, Mode::Eval, &mut rng)?;
                let (loss_minus, _) = loss(&out)?;

                net.layers[layer_idx].params_mut()[t].data_mut()[e] = original;

                let numeric = (loss_plus - loss_minus) / (2.0 * h);
                let a = analytic[tensor_idx][e];
                let denom = a.abs().max(numeric.abs()).max(1.0);
                let rel = (a - numeric).abs() / denom;
                if rel > worst {
                    worst = rel;
                }
            }
            tensor_idx += 1;
        }
    }
    net.zero_grads();
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layers::Dense;
    use crate::loss::mse_loss;

    #[test]
    fn linear_single_layer_is_exact_to_1e9() {
        let weight = Tensor::from_vec(&[2, 3], vec![0.3, -0.2, 0.5, 0.1, 0.9, -0.7]).unwrap();
        let bias = Tensor::from_vec(&[2], vec![0.05, -0.02]).unwrap();
        let mut net = Network::new(vec![Box::new(Dense::from_parameters(weight, bias).unwrap())]);
        let x = Tensor::from_vec(&[3], vec![0.4, -0.6, 0.2]).unwrap();
        let target = Tensor::from_vec(&[2], vec![0.1, 0.3]).unwrap();
        let err = gradient_check(&mut net, &x, |out| mse_loss(out, &target)).unwrap();
        assert!(err < 1e-9, "relative error {err}");
    }
}

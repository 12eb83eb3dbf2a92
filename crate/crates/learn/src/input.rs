//! Channel matrix formatting for network input.

use thzbeam_core::{wrap_angle, FrequencyChannel};
use thzbeam_nn::Tensor;

/// Splits a complex K x N channel into a `[K, N, 2]` image: channel 0 is
/// the entry magnitude, channel 1 its phase angle in [-pi, pi).
pub fn format_input(h: &FrequencyChannel) -> Tensor {
    let (k, n) = (h.subcarriers, h.antennas);
    let mut data = Vec::with_capacity(k * n * 2);
    for kk in 0..k {
        for nn in 0..n {
            let z = h.at(kk, nn);
            data.push(z.norm());
            data.push(if z.norm() == 0.0 {
                0.0
            } else {
                wrap_angle(z.arg())
            });
        }
    }
    Tensor::from_vec(&[k, n, 2], data).expect("format_input shape")
}

//! Frequency-domain channel matrices: synthesis from path factors and
//! least-squares pilot estimation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::CoreError;
use crate::factors::ChannelFactorSet;
use crate::steering::{steering_vector, ArrayGeometry};

/// Frequency band tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Band {
    Sub6,
    Thz,
}

/// A complex K (subcarriers) x N (antennas) frequency-domain channel for one
/// user and band. Entries are stored row-major, subcarrier-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyChannel {
    pub band: Band,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub subcarriers: usize,
    pub antennas: usize,
    entries: Vec<Complex64>,
}

impl FrequencyChannel {
    pub fn zeros(
        band: Band,
        carrier_hz: f64,
        bandwidth_hz: f64,
        subcarriers: usize,
        antennas: usize,
    ) -> Self {
        FrequencyChannel {
            band,
            carrier_hz,
            bandwidth_hz,
            subcarriers,
            antennas,
            entries: vec![Complex64::new(0.0, 0.0); subcarriers * antennas],
        }
    }

    pub fn from_entries(
        band: Band,
        carrier_hz: f64,
        bandwidth_hz: f64,
        subcarriers: usize,
        antennas: usize,
        entries: Vec<Complex64>,
    ) -> Result<Self, CoreError> {
        if entries.len() != subcarriers * antennas {
            return Err(CoreError::Shape {
                expected: format!("{} entries", subcarriers * antennas),
                found: format!("{}", entries.len()),
            });
        }
        Ok(FrequencyChannel {
            band,
            carrier_hz,
            bandwidth_hz,
            subcarriers,
            antennas,
            entries,
        })
    }

    #[inline]
    pub fn at(&self, k: usize, n: usize) -> Complex64 {
        self.entries[k * self.antennas + n]
    }

    #[inline]
    pub fn at_mut(&mut self, k: usize, n: usize) -> &mut Complex64 {
        &mut self.entries[k * self.antennas + n]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Row (per-subcarrier channel vector) view.
    pub fn row(&self, k: usize) -> &[Complex64] {
        &self.entries[k * self.antennas..(k + 1) * self.antennas]
    }

    pub fn is_finite(&self) -> bool {
        self.entries
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Synthesizes the K x N frequency-domain channel from path factors.
///
/// `h[k] = sum_l pathloss_l * exp(j phase_l) * exp(-j 2 pi (k/K) toa_l B) * a(aoa_l)`
/// for `k = 0..K-1`. The user side is single-antenna, so there is no
/// transmit steering factor. Padding paths contribute nothing. An active
/// path with `toa * bandwidth >= K` lies outside the cyclic-prefix window
/// and is rejected.
pub fn synthesize_channel(
    factors: &ChannelFactorSet,
    geometry: &ArrayGeometry,
    subcarriers: usize,
    bandwidth_hz: f64,
    band: Band,
    carrier_hz: f64,
) -> Result<FrequencyChannel, CoreError> {
    if subcarriers == 0 {
        return Err(CoreError::domain("synthesize_channel requires K >= 1"));
    }
    let n = geometry.num_elements();
    let k_count = subcarriers;
    let mut h = FrequencyChannel::zeros(band, carrier_hz, bandwidth_hz, k_count, n);
    for (l, p) in factors.active_paths().iter().enumerate() {
        let delay_taps = p.toa * bandwidth_hz;
        if delay_taps >= k_count as f64 {
            return Err(CoreError::OutOfWindow {
                path: l,
                delay_taps,
                subcarriers: k_count,
            });
        }
        let steer = steering_vector(geometry, p.aoa_az, p.aoa_el);
        let gain = Complex64::from_polar(p.pathloss, p.phase);
        for k in 0..k_count {
            let ramp_phase = -2.0 * PI * (k as f64 / k_count as f64) * delay_taps;
            let coeff = gain * Complex64::from_polar(1.0, ramp_phase);
            let row = &mut h.entries[k * n..(k + 1) * n];
            for (dst, a) in row.iter_mut().zip(&steer) {
                *dst += coeff * a;
            }
        }
    }
    debug_assert!(h.is_finite());
    Ok(h)
}

/// Least-squares pilot estimate of a channel.
///
/// Per subcarrier the receiver observes `y[k] = h[k] x + n[k]` with `n[k]`
/// circular complex Gaussian of the given variance per antenna, and returns
/// `y[k] / x`. Noise draws consume the RNG in (k, n, re, im) order.
pub fn pilot_estimate(
    h_true: &FrequencyChannel,
    noise_variance: f64,
    pilot_symbol: Complex64,
    rng: &mut ChaCha8Rng,
) -> Result<FrequencyChannel, CoreError> {
    if pilot_symbol.norm_sqr() == 0.0 {
        return Err(CoreError::domain("pilot symbol must be nonzero"));
    }
    if noise_variance < 0.0 {
        return Err(CoreError::domain(format!(
            "noise variance must be >= 0, got {noise_variance}"
        )));
    }
    let mut est = h_true.clone();
    if noise_variance == 0.0 {
        // y / x = h exactly; skip the draw so the noiseless case is bit-exact
        return Ok(est);
    }
    let sigma = (noise_variance / 2.0).sqrt();
    for z in est.entries.iter_mut() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let y = *z * pilot_symbol + Complex64::new(sigma * re, sigma * im);
        *z = y / pilot_symbol;
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factors::PathFactors;
    use rand::SeedableRng;

    fn single_path_set(budget: usize) -> ChannelFactorSet {
        ChannelFactorSet::from_paths(
            vec![PathFactors {
                pathloss: 1.0,
                ..PathFactors::default()
            }],
            budget,
        )
    }

    #[test]
    fn empty_factor_set_gives_zero_matrix() {
        let set = ChannelFactorSet::from_paths(vec![], 4);
        let geom = ArrayGeometry::linear_y(3, 0.5);
        let h = synthesize_channel(&set, &geom, 5, 20e6, Band::Sub6, 2.4e9).unwrap();
        assert_eq!(h.subcarriers, 5);
        assert_eq!(h.antennas, 3);
        assert!(h.entries().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn flat_single_path_is_all_ones() {
        // unit gain, zero phase, zero delay, broadside on a linear y array
        let geom = ArrayGeometry::linear_y(4, 0.5);
        let h = synthesize_channel(&single_path_set(2), &geom, 8, 20e6, Band::Sub6, 2.4e9).unwrap();
        for k in 0..8 {
            for n in 0..4 {
                assert!((h.at(k, n) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_delay_path_is_frequency_flat() {
        let geom = ArrayGeometry::new(2, 2, 1, 0.5);
        let set = ChannelFactorSet::from_paths(
            vec![PathFactors {
                pathloss: 0.3,
                phase: 1.1,
                aoa_az: 0.4,
                aoa_el: -0.2,
                ..PathFactors::default()
            }],
            1,
        );
        let h = synthesize_channel(&set, &geom, 16, 500e6, Band::Thz, 100e9).unwrap();
        for n in 0..h.antennas {
            let m0 = h.at(0, n).norm();
            for k in 1..h.subcarriers {
                assert!((h.at(k, n).norm() - m0).abs() <= 1e-12 * m0);
            }
        }
    }

    #[test]
    fn delay_beyond_window_rejected() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let set = ChannelFactorSet::from_paths(
            vec![PathFactors {
                pathloss: 1.0,
                toa: 1e-3, // 1 ms * 20 MHz = 20000 taps >> K
                ..PathFactors::default()
            }],
            1,
        );
        let err = synthesize_channel(&set, &geom, 8, 20e6, Band::Sub6, 2.4e9).unwrap_err();
        assert!(matches!(err, CoreError::OutOfWindow { .. }));
    }

    #[test]
    fn noiseless_pilot_estimate_is_identity() {
        let geom = ArrayGeometry::linear_y(3, 0.5);
        let h = synthesize_channel(&single_path_set(1), &geom, 4, 20e6, Band::Sub6, 2.4e9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let est = pilot_estimate(&h, 0.0, Complex64::new(1.0, 0.0), &mut rng).unwrap();
        assert_eq!(est, h);
        // pilot scaling cancels exactly in the noiseless case
        let est2 = pilot_estimate(&h, 0.0, Complex64::new(2.0, 0.0), &mut rng).unwrap();
        assert_eq!(est2, h);
    }

    #[test]
    fn zero_pilot_rejected() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let h = synthesize_channel(&single_path_set(1), &geom, 2, 20e6, Band::Sub6, 2.4e9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!(matches!(
            pilot_estimate(&h, 0.1, Complex64::new(0.0, 0.0), &mut rng),
            Err(CoreError::Domain(_))
        ));
    }
}

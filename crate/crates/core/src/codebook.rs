//! Quantized analog beamforming codebook, spectral efficiency and the
//! exhaustive-search oracle that defines labels and the upper bound.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::channel::FrequencyChannel;
use crate::error::CoreError;
use crate::steering::ArrayGeometry;

/// An ordered list of constant-modulus, unit-norm candidate beamformers.
#[derive(Debug, Clone)]
pub struct Codebook {
    pub beams: Vec<Vec<Complex64>>,
    pub quantization: (usize, usize, usize),
    pub geometry: ArrayGeometry,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }
}

/// Result of a beam search over a codebook.
#[derive(Debug, Clone)]
pub struct BeamSearchResult {
    pub best_index: usize,
    /// Rate of the best beam, bits/s/Hz summed over subcarriers.
    pub best_rate: f64,
    /// Per-beam rates, retained only when requested (evaluation paths).
    pub rates: Option<Vec<f64>>,
}

/// Builds the per-axis DFT phase-gradient codebook on the array lattice.
///
/// Beam `(a, b, c)` has element-`(px, py, pz)` entry
/// `(1/sqrt(N)) * exp(j 2 pi (a px / Qx + b py / Qy + c pz / Qz))`,
/// enumerated with `a` varying fastest, then `b`, then `c`. Axes with a
/// single element contribute nothing to the exponent, so quantizing them
/// produces exact duplicates; duplicates are removed with a warning.
pub fn generate_codebook(
    geometry: &ArrayGeometry,
    quantization: (usize, usize, usize),
) -> Result<Codebook, CoreError> {
    let (qx, qy, qz) = quantization;
    if qx == 0 || qy == 0 || qz == 0 {
        return Err(CoreError::Config(vec![format!(
            "codebook quantization axes must be >= 1, got ({qx},{qy},{qz})"
        )]));
    }
    let count = qx
        .checked_mul(qy)
        .and_then(|v| v.checked_mul(qz))
        .filter(|&v| v <= 1 << 22)
        .ok_or_else(|| {
            CoreError::Config(vec![format!(
                "codebook size ({qx}*{qy}*{qz}) overflows the supported range"
            )])
        })?;
    let n = geometry.num_elements();
    if n == 0 {
        return Err(CoreError::Config(vec![
            "codebook geometry has zero elements".into(),
        ]));
    }
    let norm = 1.0 / (n as f64).sqrt();
    let mut beams: Vec<Vec<Complex64>> = Vec::with_capacity(count);
    let mut duplicates = 0usize;
    for c in 0..qz {
        for b in 0..qy {
            for a in 0..qx {
                let mut beam = Vec::with_capacity(n);
                for i in 0..n {
                    let (px, py, pz) = geometry.lattice_position(i);
                    let frac = a as f64 * px as f64 / qx as f64
                        + b as f64 * py as f64 / qy as f64
                        + c as f64 * pz as f64 / qz as f64;
                    beam.push(Complex64::from_polar(norm, 2.0 * PI * frac));
                }
                if beams.iter().any(|existing| bitwise_equal(existing, &beam)) {
                    duplicates += 1;
                } else {
                    beams.push(beam);
                }
            }
        }
    }
    if duplicates > 0 {
        eprintln!(
            "warning: codebook quantization ({qx},{qy},{qz}) on a ({},{},{}) lattice \
             produced {duplicates} duplicate beams; deduplicated to {}",
            geometry.nx,
            geometry.ny,
            geometry.nz,
            beams.len()
        );
    }
    Ok(Codebook {
        beams,
        quantization,
        geometry: *geometry,
    })
}

fn bitwise_equal(a: &[Complex64], b: &[Complex64]) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()
        })
}

/// Spectral efficiency of a beam on a channel at a linear per-subcarrier
/// transmit SNR: `sum_k log2(1 + snr |h[k]^H p|^2)`.
pub fn spectral_efficiency(
    h: &FrequencyChannel,
    beam: &[Complex64],
    snr: f64,
) -> Result<f64, CoreError> {
    if beam.len() != h.antennas {
        return Err(CoreError::Shape {
            expected: format!("beam of length {}", h.antennas),
            found: format!("{}", beam.len()),
        });
    }
    if snr < 0.0 {
        return Err(CoreError::domain(format!("snr must be >= 0, got {snr}")));
    }
    let mut rate = 0.0;
    for k in 0..h.subcarriers {
        let gain = beam_gain(h.row(k), beam);
        rate += (1.0 + snr * gain).log2();
    }
    Ok(rate)
}

/// `|h[k]^H p|^2` for one subcarrier row.
#[inline]
fn beam_gain(row: &[Complex64], beam: &[Complex64]) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (h, p) in row.iter().zip(beam) {
        acc += h.conj() * p;
    }
    acc.norm_sqr()
}

/// Per-beam, per-subcarrier gains `|h[k]^H p|^2` cached for repeated rate
/// evaluation across SNR points. Rates computed from the cache are
/// bit-identical to [`spectral_efficiency`].
#[derive(Debug, Clone)]
pub struct BeamGains {
    gains: Vec<Vec<f64>>,
}

impl BeamGains {
    pub fn compute(h: &FrequencyChannel, codebook: &Codebook) -> Result<Self, CoreError> {
        if codebook.is_empty() {
            return Err(CoreError::Config(vec!["empty codebook".into()]));
        }
        if codebook.beams[0].len() != h.antennas {
            return Err(CoreError::Shape {
                expected: format!("beams of length {}", h.antennas),
                found: format!("{}", codebook.beams[0].len()),
            });
        }
        let gains = codebook
            .beams
            .iter()
            .map(|beam| {
                (0..h.subcarriers)
                    .map(|k| beam_gain(h.row(k), beam))
                    .collect()
            })
            .collect();
        Ok(BeamGains { gains })
    }

    pub fn num_beams(&self) -> usize {
        self.gains.len()
    }

    /// Rate of one beam at a linear SNR, same summation order as
    /// [`spectral_efficiency`].
    pub fn rate(&self, beam_index: usize, snr: f64) -> f64 {
        self.gains[beam_index]
            .iter()
            .fold(0.0, |acc, &g| acc + (1.0 + snr * g).log2())
    }

    /// Argmax over beams (lowest index on exact ties) and the rates vector.
    pub fn search(&self, snr: f64) -> BeamSearchResult {
        let rates: Vec<f64> = (0..self.gains.len()).map(|i| self.rate(i, snr)).collect();
        let (best_index, best_rate) = argmax_lowest_index(&rates);
        BeamSearchResult {
            best_index,
            best_rate,
            rates: Some(rates),
        }
    }
}

fn argmax_lowest_index(rates: &[f64]) -> (usize, f64) {
    let mut best = 0usize;
    for (i, &r) in rates.iter().enumerate().skip(1) {
        if r > rates[best] {
            best = i;
        }
    }
    (best, rates[best])
}

/// Exhaustive search for the rate-maximizing beam; ties break to the lowest
/// index. This is both the label generator and the performance upper bound.
pub fn exhaustive_search(
    h: &FrequencyChannel,
    codebook: &Codebook,
    snr: f64,
) -> Result<BeamSearchResult, CoreError> {
    let mut result = exhaustive_search_full(h, codebook, snr)?;
    result.rates = None;
    Ok(result)
}

/// As [`exhaustive_search`], retaining the full per-beam rate vector.
///
/// Beams are evaluated in parallel; the reduction is an index-ordered max,
/// so the result does not depend on the thread count.
pub fn exhaustive_search_full(
    h: &FrequencyChannel,
    codebook: &Codebook,
    snr: f64,
) -> Result<BeamSearchResult, CoreError> {
    if codebook.is_empty() {
        return Err(CoreError::Config(vec!["empty codebook".into()]));
    }
    let rates: Vec<f64> = codebook
        .beams
        .par_iter()
        .map(|beam| spectral_efficiency(h, beam, snr))
        .collect::<Result<_, _>>()?;
    let (best_index, best_rate) = argmax_lowest_index(&rates);
    Ok(BeamSearchResult {
        best_index,
        best_rate,
        rates: Some(rates),
    })
}

/// Rates achieved by the `k` highest-probability beams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TopKRates {
    /// Rate of the single highest-probability beam.
    pub top1_rate: f64,
    /// Mean rate over the k selected beams.
    pub topk_mean_rate: f64,
    /// Best rate among the k selected beams.
    pub topk_best_rate: f64,
}

/// Indices of the `k` largest probabilities, ties broken by lower index.
pub fn select_top_k(prob: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..prob.len()).collect();
    idx.sort_by(|&a, &b| {
        prob[b]
            .partial_cmp(&prob[a])
            .unwrap()
            .then_with(|| a.cmp(&b))
    });
    idx.truncate(k);
    idx
}

/// Evaluates the rates of the `k` most probable beams under `prob`.
pub fn top_k_evaluate(
    prob: &[f64],
    k: usize,
    h: &FrequencyChannel,
    codebook: &Codebook,
    snr: f64,
) -> Result<TopKRates, CoreError> {
    if prob.len() != codebook.len() {
        return Err(CoreError::Shape {
            expected: format!("probability vector of length {}", codebook.len()),
            found: format!("{}", prob.len()),
        });
    }
    let total: f64 = prob.iter().sum();
    if (total - 1.0).abs() > 1e-6 {
        return Err(CoreError::domain(format!(
            "probabilities must sum to 1 +- 1e-6, got {total}"
        )));
    }
    if k == 0 || k > codebook.len() {
        return Err(CoreError::domain(format!(
            "top-k requires 1 <= k <= {}, got {k}",
            codebook.len()
        )));
    }
    let selected = select_top_k(prob, k);
    let rates: Vec<f64> = selected
        .iter()
        .map(|&i| spectral_efficiency(h, &codebook.beams[i], snr))
        .collect::<Result<_, _>>()?;
    let top1_rate = rates[0];
    let topk_mean_rate = rates.iter().sum::<f64>() / k as f64;
    let topk_best_rate = rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(TopKRates {
        top1_rate,
        topk_mean_rate,
        topk_best_rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Band;

    fn unit_channel(entries: Vec<Complex64>, k: usize, n: usize) -> FrequencyChannel {
        FrequencyChannel::from_entries(Band::Thz, 100e9, 500e6, k, n, entries).unwrap()
    }

    #[test]
    fn single_element_codebook_is_one() {
        let geom = ArrayGeometry::new(1, 1, 1, 0.5);
        let cb = generate_codebook(&geom, (1, 1, 1)).unwrap();
        assert_eq!(cb.len(), 1);
        assert!((cb.beams[0][0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn beams_are_unit_norm_constant_modulus() {
        let geom = ArrayGeometry::new(2, 4, 2, 0.5);
        let cb = generate_codebook(&geom, (2, 8, 2)).unwrap();
        assert_eq!(cb.len(), 32);
        let expected_mod = 1.0 / (geom.num_elements() as f64).sqrt();
        for beam in &cb.beams {
            let norm: f64 = beam.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            for z in beam {
                assert!((z.norm() - expected_mod).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn singleton_axis_quantization_deduplicates() {
        let geom = ArrayGeometry::linear_y(4, 0.5);
        let cb = generate_codebook(&geom, (2, 4, 2)).unwrap();
        // only the y axis carries phase gradients; 2*4*2 collapses to 4
        assert_eq!(cb.len(), 4);
    }

    #[test]
    fn zero_channel_rate_is_zero() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let cb = generate_codebook(&geom, (1, 2, 1)).unwrap();
        let h = unit_channel(vec![Complex64::new(0.0, 0.0); 6], 3, 2);
        for beam in &cb.beams {
            assert_eq!(spectral_efficiency(&h, beam, 10.0).unwrap(), 0.0);
        }
        // snr = 0 also gives zero for any channel
        let h2 = unit_channel(vec![Complex64::new(1.0, 0.5); 6], 3, 2);
        assert_eq!(spectral_efficiency(&h2, &cb.beams[0], 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dimension_mismatch_is_shape_error() {
        let h = unit_channel(vec![Complex64::new(1.0, 0.0); 4], 2, 2);
        let beam = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            spectral_efficiency(&h, &beam, 1.0),
            Err(CoreError::Shape { .. })
        ));
    }

    #[test]
    fn single_beam_search_returns_index_zero() {
        let geom = ArrayGeometry::new(1, 1, 1, 0.5);
        let cb = generate_codebook(&geom, (1, 1, 1)).unwrap();
        let h = unit_channel(vec![Complex64::new(0.3, -0.7)], 1, 1);
        let res = exhaustive_search(&h, &cb, 5.0).unwrap();
        assert_eq!(res.best_index, 0);
        assert!(res.rates.is_none());
    }

    #[test]
    fn matched_beam_wins_on_orthogonal_codebook() {
        // channel equal (up to scale) to one beam of the orthogonal 4-DFT
        // codebook, replicated across subcarriers
        let geom = ArrayGeometry::linear_y(4, 0.5);
        let cb = generate_codebook(&geom, (1, 4, 1)).unwrap();
        for target in 0..cb.len() {
            let mut entries = Vec::new();
            for _k in 0..3 {
                entries.extend(cb.beams[target].iter().map(|z| z * 2.5));
            }
            let h = unit_channel(entries, 3, 4);
            let res = exhaustive_search(&h, &cb, 1.0).unwrap();
            assert_eq!(res.best_index, target);
        }
    }

    #[test]
    fn empty_codebook_rejected() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let cb = Codebook {
            beams: vec![],
            quantization: (0, 0, 0),
            geometry: geom,
        };
        let h = unit_channel(vec![Complex64::new(1.0, 0.0); 2], 1, 2);
        assert!(matches!(
            exhaustive_search(&h, &cb, 1.0),
            Err(CoreError::Config(_))
        ));
    }

    #[test]
    fn top_k_validates_inputs() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let cb = generate_codebook(&geom, (1, 2, 1)).unwrap();
        let h = unit_channel(vec![Complex64::new(1.0, 0.0); 2], 1, 2);
        // not a probability vector
        assert!(top_k_evaluate(&[0.9, 0.3], 1, &h, &cb, 1.0).is_err());
        // k larger than the codebook
        assert!(top_k_evaluate(&[0.5, 0.5], 3, &h, &cb, 1.0).is_err());
    }

    #[test]
    fn one_hot_top1_equals_oracle_rate() {
        let geom = ArrayGeometry::linear_y(4, 0.5);
        let cb = generate_codebook(&geom, (1, 4, 1)).unwrap();
        let mut entries = Vec::new();
        for _ in 0..2 {
            entries.extend(cb.beams[2].iter().map(|z| z * 1.7));
        }
        let h = unit_channel(entries, 2, 4);
        let ub = exhaustive_search(&h, &cb, 2.0).unwrap();
        let mut prob = vec![0.0; 4];
        prob[ub.best_index] = 1.0;
        let rates = top_k_evaluate(&prob, 1, &h, &cb, 2.0).unwrap();
        assert_eq!(rates.top1_rate, ub.best_rate);
        assert_eq!(rates.topk_best_rate, ub.best_rate);
    }

    #[test]
    fn uniform_prob_full_k_recovers_upper_bound() {
        let geom = ArrayGeometry::linear_y(4, 0.5);
        let cb = generate_codebook(&geom, (1, 4, 1)).unwrap();
        let entries = vec![Complex64::new(0.4, -0.9); 8];
        let h = unit_channel(entries, 2, 4);
        let ub = exhaustive_search(&h, &cb, 3.0).unwrap();
        let prob = vec![0.25; 4];
        let rates = top_k_evaluate(&prob, 4, &h, &cb, 3.0).unwrap();
        assert_eq!(rates.topk_best_rate, ub.best_rate);
    }
}

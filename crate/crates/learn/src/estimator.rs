//! The convolutional estimator mapping formatted sub-6GHz channels to THz
//! per-path channel factors.

use std::collections::BTreeMap;

use thzbeam_core::{DatasetSample, FACTOR_COUNT};
use thzbeam_nn::{
    mse_loss, ChannelScale, Conv2d, Dense, Dropout, GlobalAvgPool, InstanceNorm, Layer, MaxPool2d,
    ModelFile, Network, Relu, Tensor, ZeroPad2d,
};

use crate::error::LearnError;
use crate::input::format_input;
use crate::normalizer::FactorNormalizer;
use crate::split::{stream_rng, streams};
use crate::train::{dummy_rng, train_network, EpochLoss, TrainHyper};

pub const ARCH_ESTIMATOR: u16 = 1;

/// Architecture and training knobs of the estimator.
#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    /// Filter counts of the two conv blocks.
    pub conv_channels: (usize, usize),
    pub dropout: f64,
    pub hyper: TrainHyper,
}

/// A trained estimator: the network plus the target normalizer it was
/// fitted with and the input dims it expects.
pub struct EstimatorModel {
    pub net: Network,
    pub normalizer: FactorNormalizer,
    pub subcarriers: usize,
    pub antennas: usize,
    pub num_paths: usize,
}

/// Pooling kernel for one spatial dim: halve while even, hold at odd or
/// exhausted dims.
fn pool_len(dim: usize) -> usize {
    if dim >= 2 && dim % 2 == 0 {
        2
    } else {
        1
    }
}

/// Builds the two-block conv network. Each block pads the spatial dims by
/// one so the 2x2 valid conv preserves them, then pools. `input_scale` is
/// the fixed per-channel scaling of the (magnitude, phase) input image.
pub fn build_estimator_network(
    subcarriers: usize,
    antennas: usize,
    num_paths: usize,
    conv_channels: (usize, usize),
    dropout: f64,
    input_scale: [f64; 2],
    seed: u64,
) -> Result<Network, LearnError> {
    let (c1, c2) = conv_channels;
    if c1 == 0 || c2 == 0 {
        return Err(LearnError::invalid("conv channel counts must be >= 1"));
    }
    let mut rng = stream_rng(seed, streams::ESTIMATOR_BASE + streams::OFF_INIT);
    let mut layers: Vec<Box<dyn Layer>> = vec![Box::new(ChannelScale::new(input_scale.to_vec()))];
    let mut h = subcarriers;
    let mut w = antennas;
    let mut c_in = 2;
    for &c_out in &[c1, c2] {
        layers.push(Box::new(ZeroPad2d::new(1, 1)));
        layers.push(Box::new(Conv2d::new(2, 2, c_in, c_out, &mut rng)));
        let (ph, pw) = (pool_len(h), pool_len(w));
        layers.push(Box::new(MaxPool2d::new(ph, pw)));
        h /= ph;
        w /= pw;
        layers.push(Box::new(InstanceNorm::new(c_out)));
        layers.push(Box::new(Relu::new()));
        layers.push(Box::new(Dropout::new(dropout)));
        c_in = c_out;
    }
    if h == 0 || w == 0 {
        return Err(LearnError::invalid(format!(
            "input {subcarriers}x{antennas} collapses to zero spatial size"
        )));
    }
    layers.push(Box::new(GlobalAvgPool::new()));
    layers.push(Box::new(Dense::new(c2, num_paths * FACTOR_COUNT, &mut rng)));
    Ok(Network::new(layers))
}

/// RMS of the magnitude channel over a training set; the fitted input
/// scale makes magnitudes roughly unit sized while leaving phases alone.
fn fit_input_scale(inputs: &[Tensor], train_idx: &[usize]) -> [f64; 2] {
    let mut acc = 0.0;
    let mut count = 0usize;
    for &i in train_idx {
        let d = inputs[i].data();
        for pair in d.chunks(2) {
            acc += pair[0] * pair[0];
            count += 1;
        }
    }
    let rms = (acc / count.max(1) as f64).sqrt();
    if rms > 0.0 {
        [1.0 / rms, 1.0]
    } else {
        [1.0, 1.0]
    }
}

/// Trains the estimator on the dataset's sub-6GHz pilot estimates against
/// normalized THz factor targets.
pub fn train_estimator(
    samples: &[DatasetSample],
    train_idx: &[usize],
    test_idx: &[usize],
    settings: &EstimatorSettings,
) -> Result<(EstimatorModel, Vec<EpochLoss>), LearnError> {
    let first = samples
        .first()
        .ok_or_else(|| LearnError::invalid("cannot train on an empty dataset"))?;
    let subcarriers = first.h_sub6.subcarriers;
    let antennas = first.h_sub6.antennas;
    let num_paths = first.thz_factors.budget();

    let inputs: Vec<Tensor> = samples.iter().map(|s| format_input(&s.h_sub6)).collect();
    let train_rows: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| samples[i].thz_factors.flatten())
        .collect();
    let normalizer = FactorNormalizer::fit(&train_rows)?;
    let targets: Vec<Tensor> = samples
        .iter()
        .map(|s| {
            let normed = normalizer.apply(&s.thz_factors.flatten());
            let len = normed.len();
            Tensor::from_vec(&[len], normed).expect("target tensor")
        })
        .collect();

    let input_scale = fit_input_scale(&inputs, train_idx);
    let mut net = build_estimator_network(
        subcarriers,
        antennas,
        num_paths,
        settings.conv_channels,
        settings.dropout,
        input_scale,
        settings.hyper.seed,
    )?;
    let trace = train_network(
        &mut net,
        &inputs,
        |out, idx| mse_loss(out, &targets[idx]),
        train_idx,
        test_idx,
        &settings.hyper,
        streams::ESTIMATOR_BASE,
    )?;
    Ok((
        EstimatorModel {
            net,
            normalizer,
            subcarriers,
            antennas,
            num_paths,
        },
        trace,
    ))
}

impl EstimatorModel {
    /// Predicts the L x 7 factor rows in physical units.
    pub fn predict(&mut self, sample: &DatasetSample) -> Result<Vec<f64>, LearnError> {
        let input = format_input(&sample.h_sub6);
        let out = self.net.forward(&input, thzbeam_nn::Mode::Eval, &mut dummy_rng())?;
        Ok(self.normalizer.invert(out.data()))
    }

    pub fn to_model_file(&self) -> ModelFile {
        let (mean, scale) = self.normalizer.to_tensors();
        let mut extras = BTreeMap::new();
        extras.insert("norm_mean".to_string(), mean);
        extras.insert("norm_scale".to_string(), scale);
        ModelFile {
            arch_kind: ARCH_ESTIMATOR,
            meta: vec![
                self.subcarriers as u32,
                self.antennas as u32,
                self.num_paths as u32,
            ],
            network: self.net.clone(),
            extras,
        }
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, LearnError> {
        if file.arch_kind != ARCH_ESTIMATOR {
            return Err(LearnError::invalid(format!(
                "model file is not an estimator (arch kind {})",
                file.arch_kind
            )));
        }
        if file.meta.len() != 3 {
            return Err(LearnError::invalid("estimator meta must be [K, N, L]"));
        }
        let mean = file
            .extras
            .get("norm_mean")
            .ok_or_else(|| LearnError::invalid("estimator file missing norm_mean"))?;
        let scale = file
            .extras
            .get("norm_scale")
            .ok_or_else(|| LearnError::invalid("estimator file missing norm_scale"))?;
        let normalizer = FactorNormalizer::from_tensors(mean, scale)?;
        Ok(EstimatorModel {
            subcarriers: file.meta[0] as usize,
            antennas: file.meta[1] as usize,
            num_paths: file.meta[2] as usize,
            net: file.network,
            normalizer,
        })
    }
}

//! The comparison classifier operating directly on (noisy) THz channel
//! matrices instead of estimated factors.

use num_complex::Complex64;

use thzbeam_core::{pilot_estimate, DatasetSample};
use thzbeam_nn::{
    cross_entropy_loss, softmax, ChannelScale, Conv2d, Dense, Dropout, GlobalAvgPool, Layer,
    ModelFile, Network, Relu, Tensor,
};

use crate::error::LearnError;
use crate::input::format_input;
use crate::split::{stream_rng, streams};
use crate::train::{dummy_rng, train_network, EpochLoss, TrainHyper};

pub const ARCH_BASELINE: u16 = 3;

#[derive(Debug, Clone)]
pub struct BaselineSettings {
    pub conv_filters: usize,
    pub hidden: [usize; 4],
    pub dropout: f64,
    pub hyper: TrainHyper,
}

pub struct BaselineModel {
    pub net: Network,
    pub num_classes: usize,
    pub subcarriers: usize,
    pub antennas: usize,
}

/// The noisy THz pilot estimate a deployment would see, formatted as a
/// `[K, N, 2]` image. Each sample draws from its own stream of the
/// scenario seed, so training and evaluation see identical noise.
pub fn baseline_input(
    sample: &DatasetSample,
    scenario_seed: u64,
    sample_index: usize,
    noise_variance: f64,
) -> Result<Tensor, LearnError> {
    let mut rng = stream_rng(
        scenario_seed,
        streams::THZ_PILOT_BASE + sample_index as u64,
    );
    let noisy = pilot_estimate(
        &sample.h_thz_true,
        noise_variance,
        Complex64::new(1.0, 0.0),
        &mut rng,
    )?;
    Ok(format_input(&noisy))
}

/// conv -> GAP -> relu front end, then the four dense blocks and the
/// logit head.
pub fn build_baseline_network(
    conv_filters: usize,
    hidden: [usize; 4],
    num_classes: usize,
    dropout: f64,
    input_scale: [f64; 2],
    seed: u64,
) -> Result<Network, LearnError> {
    if conv_filters == 0 || hidden.iter().any(|&h| h == 0) || num_classes == 0 {
        return Err(LearnError::invalid("baseline dims must all be >= 1"));
    }
    let mut rng = stream_rng(seed, streams::BASELINE_BASE + streams::OFF_INIT);
    let mut layers: Vec<Box<dyn Layer>> = vec![
        Box::new(ChannelScale::new(input_scale.to_vec())),
        Box::new(Conv2d::new(2, 2, 2, conv_filters, &mut rng)),
        Box::new(GlobalAvgPool::new()),
        Box::new(Relu::new()),
    ];
    let mut dim = conv_filters;
    for &width in &hidden {
        layers.push(Box::new(Dense::new(dim, width, &mut rng)));
        layers.push(Box::new(Relu::new()));
        layers.push(Box::new(Dropout::new(dropout)));
        dim = width;
    }
    layers.push(Box::new(Dense::new(dim, num_classes, &mut rng)));
    Ok(Network::new(layers))
}

fn fit_input_scale(inputs: &[Tensor], train_idx: &[usize]) -> [f64; 2] {
    let mut acc = 0.0;
    let mut count = 0usize;
    for &i in train_idx {
        for pair in inputs[i].data().chunks(2) {
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

pub fn train_baseline(
    samples: &[DatasetSample],
    train_idx: &[usize],
    test_idx: &[usize],
    settings: &BaselineSettings,
    num_classes: usize,
    scenario_seed: u64,
    thz_noise_variance: f64,
) -> Result<(BaselineModel, Vec<EpochLoss>), LearnError> {
    let first = samples
        .first()
        .ok_or_else(|| LearnError::invalid("cannot train on an empty dataset"))?;
    let subcarriers = first.h_thz_true.subcarriers;
    let antennas = first.h_thz_true.antennas;
    let labels: Vec<usize> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            s.beam_label
                .map(|l| l as usize)
                .ok_or_else(|| LearnError::invalid(format!("sample {i} has no beam label")))
        })
        .collect::<Result<_, _>>()?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= num_classes) {
        return Err(LearnError::invalid(format!(
            "label {bad} >= codebook size {num_classes}"
        )));
    }
    let inputs: Vec<Tensor> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| baseline_input(s, scenario_seed, i, thz_noise_variance))
        .collect::<Result<_, _>>()?;
    let input_scale = fit_input_scale(&inputs, train_idx);
    let mut net = build_baseline_network(
        settings.conv_filters,
        settings.hidden,
        num_classes,
        settings.dropout,
        input_scale,
        settings.hyper.seed,
    )?;
    let trace = train_network(
        &mut net,
        &inputs,
        |out, idx| cross_entropy_loss(out, labels[idx]),
        train_idx,
        test_idx,
        &settings.hyper,
        streams::BASELINE_BASE,
    )?;
    Ok((
        BaselineModel {
            net,
            num_classes,
            subcarriers,
            antennas,
        },
        trace,
    ))
}

impl BaselineModel {
    pub fn predict_proba(&mut self, input: &Tensor) -> Result<Vec<f64>, LearnError> {
        let logits = self
            .net
            .forward(input, thzbeam_nn::Mode::Eval, &mut dummy_rng())?;
        Ok(softmax(logits.data()))
    }

    pub fn to_model_file(&self) -> ModelFile {
        ModelFile {
            arch_kind: ARCH_BASELINE,
            meta: vec![
                self.subcarriers as u32,
                self.antennas as u32,
                self.num_classes as u32,
            ],
            network: self.net.clone(),
            extras: Default::default(),
        }
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, LearnError> {
        if file.arch_kind != ARCH_BASELINE {
            return Err(LearnError::invalid(format!(
                "model file is not a baseline classifier (arch kind {})",
                file.arch_kind
            )));
        }
        if file.meta.len() != 3 {
            return Err(LearnError::invalid("baseline meta must be [K, N, classes]"));
        }
        Ok(BaselineModel {
            subcarriers: file.meta[0] as usize,
            antennas: file.meta[1] as usize,
            num_classes: file.meta[2] as usize,
            net: file.network,
        })
    }
}

//! Dense classifier from THz factors to the optimal codebook index, plus
//! exhaustive-search label generation.

use std::collections::BTreeMap;

use rayon::prelude::*;

use thzbeam_core::{exhaustive_search, Codebook, DatasetSample};
use thzbeam_nn::{
    cross_entropy_loss, softmax, Dense, Dropout,Flatten, Layer, ModelFile, Network, Relu, Tensor,
};

use crate::error::LearnError;
use crate::normalizer::FactorNormalizer;
use crate::split::{stream_rng, streams};
use crate::train::{dummy_rng, train_network, EpochLoss, TrainHyper};

pub const ARCH_PREDICTOR: u16 = 2;

#[derive(Debug, Clone)]
pub struct PredictorSettings {
    /// Widths of the four hidden dense layers.
    pub hidden: [usize; 4],
    pub dropout: f64,
    pub hyper: TrainHyper,
}

pub struct PredictorModel {
    pub net: Network,
    /// Input normalizer fitted on the training factors.
    pub normalizer: FactorNormalizer,
    pub num_classes: usize,
    pub input_dim: usize,
}

/// Sets `beam_label` on every sample: the exhaustive-search argmax on the
/// true THz channel at the label SNR. Parallel across samples with an
/// order-preserving collect.
pub fn make_labels(
    samples: &mut [DatasetSample],
    codebook: &Codebook,
    snr: f64,
) -> Result<(), LearnError> {
    let labels: Vec<u32> = samples
        .par_iter()
        .map(|s| {
            exhaustive_search(&s.h_thz_true, codebook, snr).map(|r| r.best_index as u32)
        })
        .collect::<Result<_, _>>()?;
    for (s, label) in samples.iter_mut().zip(labels) {
        s.beam_label = Some(label);
    }
    Ok(())
}

/// Builds the 4-hidden-layer dense classifier with a logit head.
pub fn build_predictor_network(
    input_dim: usize,
    hidden: [usize; 4],
    num_classes: usize,
    dropout: f64,
    seed: u64,
    stream_base: u64,
) -> Result<Network, LearnError> {
    if hidden.iter().any(|&h| h == 0) || num_classes == 0 || input_dim == 0 {
        return Err(LearnError::invalid("predictor dims must all be >= 1"));
    }
    let mut rng = stream_rng(seed, stream_base + streams::OFF_INIT);
    let mut layers: Vec<Box<dyn Layer>> = vec![Box::new(Flatten::new())];
    let mut dim = input_dim;
    for &width in &hidden {
        layers.push(Box::new(Dense::new(dim, width, &mut rng)));
        layers.push(Box::new(Relu::new()));
        layers.push(Box::new(Dropout::new(dropout)));
        dim = width;
    }
    layers.push(Box::new(Dense::new(dim, num_classes, &mut rng)));
    Ok(Network::new(layers))
}

fn labels_of(samples: &[DatasetSample], num_classes: usize) -> Result<Vec<usize>, LearnError> {
    samples
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let label = s
                .beam_label
                .ok_or_else(|| LearnError::invalid(format!("sample {i} has no beam label")))?
                as usize;
            if label >= num_classes {
                return Err(LearnError::invalid(format!(
                    "sample {i} label {label} >= codebook size {num_classes}"
                )));
            }
            Ok(label)
        })
        .collect()
}

/// Trains the classifier on ground-truth factors against exhaustive-search
/// labels.
pub fn train_predictor(
    samples: &[DatasetSample],
    train_idx: &[usize],
    test_idx: &[usize],
    settings: &PredictorSettings,
    num_classes: usize,
) -> Result<(PredictorModel, Vec<EpochLoss>), LearnError> {
    let first = samples
        .first()
        .ok_or_else(|| LearnError::invalid("cannot train on an empty dataset"))?;
    let input_dim = first.thz_factors.flatten().len();
    let labels = labels_of(samples, num_classes)?;
    let train_rows: Vec<Vec<f64>> = train_idx
        .iter()
        .map(|&i| samples[i].thz_factors.flatten())
        .collect();
    let normalizer = FactorNormalizer::fit(&train_rows)?;
    let inputs: Vec<Tensor> = samples
        .iter()
        .map(|s| {
            let normed = normalizer.apply(&s.thz_factors.flatten());
            let len = normed.len();
            Tensor::from_vec(&[len], normed).expect("factor tensor")
        })
        .collect();
    let mut net = build_predictor_network(
        input_dim,
        settings.hidden,
        num_classes,
        settings.dropout,
        settings.hyper.seed,
        streams::PREDICTOR_BASE,
    )?;
    let trace = train_network(
        &mut net,
        &inputs,
        |out, idx| cross_entropy_loss(out, labels[idx]),
        train_idx,
        test_idx,
        &settings.hyper,
        streams::PREDICTOR_BASE,
    )?;
    Ok((
        PredictorModel {
            net,
            normalizer,
            num_classes,
            input_dim,
        },
        trace,
    ))
}

impl PredictorModel {
    /// Softmax probabilities over beams for factor rows in physical units.
    pub fn predict_proba(&mut self, factors: &[f64]) -> Result<Vec<f64>, LearnError> {
        if factors.len() != self.input_dim {
            return Err(LearnError::invalid(format!(
                "predictor expects {} factor values, got {}",
                self.input_dim,
                factors.len()
            )));
        }
        let normed = self.normalizer.apply(factors);
        let input = Tensor::from_vec(&[self.input_dim], normed).expect("factor tensor");
        let logits = self
            .net
            .forward(&input, thzbeam_nn::Mode::Eval, &mut dummy_rng())?;
        Ok(softmax(logits.data()))
    }

    pub fn to_model_file(&self) -> ModelFile {
        let (mean, scale) = self.normalizer.to_tensors();
        let mut extras = BTreeMap::new();
        extras.insert("norm_mean".to_string(), mean);
        extras.insert("norm_scale".to_string(), scale);
        ModelFile {
            arch_kind: ARCH_PREDICTOR,
            meta: vec![self.input_dim as u32, self.num_classes as u32],
            network: self.net.clone(),
            extras,
        }
    }

    pub fn from_model_file(file: ModelFile) -> Result<Self, LearnError> {
        if file.arch_kind != ARCH_PREDICTOR {
            return Err(LearnError::invalid(format!(
                "model file is not a beam predictor (arch kind {})",
                file.arch_kind
            )));
        }
        if file.meta.len() != 2 {
            return Err(LearnError::invalid("predictor meta must be [input_dim, classes]"));
        }
        let mean = file
            .extras
            .get("norm_mean")
            .ok_or_else(|| LearnError::invalid("predictor file missing norm_mean"))?;
        let scale = file
            .extras
            .get("norm_scale")
            .ok_or_else(|| LearnError::invalid("predictor file missing norm_scale"))?;
        let normalizer = FactorNormalizer::from_tensors(mean, scale)?;
        Ok(PredictorModel {
            input_dim: file.meta[0] as usize,
            num_classes: file.meta[1] as usize,
            net: file.network,
            normalizer,
        })
    }

    /// Fraction of samples whose argmax probability hits the stored label.
    pub fn top1_accuracy(
        &mut self,
        samples: &[DatasetSample],
        idx: &[usize],
    ) -> Result<f64, LearnError> {
        if idx.is_empty() {
            return Ok(0.0);
        }
        let mut hits = 0usize;
        for &i in idx {
            let probs = self.predict_proba(&samples[i].thz_factors.flatten())?;
            let argmax = probs
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(j, _)| j)
                .unwrap();
            if Some(argmax as u32) == samples[i].beam_label {
                hits += 1;
            }
        }
        Ok(hits as f64 / idx.len() as f64)
    }
}

//! Beamforming evaluation across an SNR grid: upper bound, proposed
//! predictor (cascade and ground-truth-factor variants) and the baseline.

use rayon::prelude::*;

use thzbeam_core::{select_top_k, BeamGains, Codebook, DatasetSample};

use crate::baseline::{baseline_input, BaselineModel};
use crate::error::LearnError;
use crate::estimator::EstimatorModel;
use crate::predictor::PredictorModel;

/// One row of the per-SNR evaluation table; rates are averaged over the
/// test set, accuracies are SNR-independent.
#[derive(Debug, Clone, Copy)]
pub struct EvalRow {
    pub snr_db: f64,
    pub ub_rate: f64,
    pub proposed_top1: f64,
    pub proposed_top3_mean: f64,
    pub baseline_top1: f64,
    pub baseline_top3_mean: f64,
    pub proposed_top1_acc: f64,
    pub baseline_top1_acc: f64,
}

/// Rates of one test sample at one SNR point.
#[derive(Debug, Clone, Copy)]
pub struct PerSampleRates {
    pub ub: f64,
    pub top1: f64,
    pub topk_mean: f64,
    pub topk_best: f64,
}

/// Per-SNR per-sample rate detail, retained for exact ordering checks.
#[derive(Debug, Clone)]
pub struct SnrDetail {
    pub snr_db: f64,
    pub proposed: Vec<PerSampleRates>,
}

pub struct BeamformingEval {
    /// Cascade (estimated factors feed the classifier).
    pub rows: Vec<EvalRow>,
    /// Ground-truth factors feed the classifier.
    pub gt_rows: Vec<EvalRow>,
    pub cascade_detail: Vec<SnrDetail>,
    pub gt_detail: Vec<SnrDetail>,
    pub cascade_acc: f64,
    pub gt_acc: f64,
    pub baseline_acc: f64,
}

/// Per-test-sample beam probabilities from each model.
pub struct EvalProbs {
    pub cascade: Vec<Vec<f64>>,
    pub gt: Vec<Vec<f64>>,
    pub baseline: Vec<Vec<f64>>,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Probabilities of the full cascade: estimator output feeds the
/// classifier.
pub fn cascade_probs(
    estimator: &mut EstimatorModel,
    predictor: &mut PredictorModel,
    samples: &[DatasetSample],
    idx: &[usize],
) -> Result<Vec<Vec<f64>>, LearnError> {
    idx.iter()
        .map(|&i| {
            let factors = estimator.predict(&samples[i])?;
            predictor.predict_proba(&factors)
        })
        .collect()
}

/// Probabilities with ground-truth factors as classifier input.
pub fn gt_probs(
    predictor: &mut PredictorModel,
    samples: &[DatasetSample],
    idx: &[usize],
) -> Result<Vec<Vec<f64>>, LearnError> {
    idx.iter()
        .map(|&i| predictor.predict_proba(&samples[i].thz_factors.flatten()))
        .collect()
}

/// Probabilities of the direct THz-matrix baseline.
pub fn baseline_probs(
    baseline: &mut BaselineModel,
    samples: &[DatasetSample],
    idx: &[usize],
    scenario_seed: u64,
    thz_noise_variance: f64,
) -> Result<Vec<Vec<f64>>, LearnError> {
    idx.iter()
        .map(|&i| {
            let input = baseline_input(&samples[i], scenario_seed, i, thz_noise_variance)?;
            baseline.predict_proba(&input)
        })
        .collect()
}

fn argmax(probs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &p) in probs.iter().enumerate().skip(1) {
        if p > probs[best] {
            best = i;
        }
    }
    best
}

fn accuracy(probs: &[Vec<f64>], labels: &[Option<u32>]) -> f64 {
    if probs.is_empty() {
        return 0.0;
    }
    let hits = probs
        .iter()
        .zip(labels)
        .filter(|(p, label)| Some(argmax(p) as u32) == **label)
        .count();
    hits as f64 / probs.len() as f64
}

fn rates_for(
    gains: &BeamGains,
    probs: &[f64],
    top_k: usize,
    snr: f64,
    ub: f64,
) -> PerSampleRates {
    let selected = select_top_k(probs, top_k);
    let rates: Vec<f64> = selected.iter().map(|&b| gains.rate(b, snr)).collect();
    PerSampleRates {
        ub,
        top1: rates[0],
        topk_mean: rates.iter().sum::<f64>() / rates.len() as f64,
        topk_best: rates.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Evaluates all models over the SNR grid.
///
/// When `oracle` is set, the cascade columns are replaced by a one-hot
/// predictor at the per-SNR exhaustive-search index (the perfect
/// predictor), which reproduces the upper bound in the top-1 column.
pub fn evaluate_beamforming(
    samples: &[DatasetSample],
    test_idx: &[usize],
    codebook: &Codebook,
    snr_grid_db: &[f64],
    top_k: usize,
    probs: &EvalProbs,
    oracle: bool,
) -> Result<BeamformingEval, LearnError> {
    if snr_grid_db.is_empty() {
        return Err(LearnError::invalid("empty SNR grid"));
    }
    if top_k == 0 || top_k > codebook.len() {
        return Err(LearnError::invalid(format!(
            "top_k must be in 1..={}, got {top_k}",
            codebook.len()
        )));
    }
    let gains: Vec<BeamGains> = test_idx
        .par_iter()
        .map(|&i| BeamGains::compute(&samples[i].h_thz_true, codebook))
        .collect::<Result<_, _>>()?;
    let labels: Vec<Option<u32>> = test_idx.iter().map(|&i| samples[i].beam_label).collect();

    let cascade_acc = accuracy(&probs.cascade, &labels);
    let gt_acc = accuracy(&probs.gt, &labels);
    let baseline_acc = accuracy(&probs.baseline, &labels);

    let n = test_idx.len() as f64;
    let mut rows = Vec::with_capacity(snr_grid_db.len());
    let mut gt_rows = Vec::with_capacity(snr_grid_db.len());
    let mut cascade_detail = Vec::with_capacity(snr_grid_db.len());
    let mut gt_detail = Vec::with_capacity(snr_grid_db.len());
    for &snr_db in snr_grid_db {
        let snr = db_to_linear(snr_db);
        let mut ub_sum = 0.0;
        let mut cascade = Vec::with_capacity(gains.len());
        let mut gt = Vec::with_capacity(gains.len());
        let mut base = Vec::with_capacity(gains.len());
        for (s, g) in gains.iter().enumerate() {
            let search = g.search(snr);
            let ub = search.best_rate;
            ub_sum += ub;
            let cascade_probs: &[f64] = if oracle {
                &one_hot(codebook.len(), search.best_index)
            } else {
                &probs.cascade[s]
            };
            cascade.push(rates_for(g, cascade_probs, top_k, snr, ub));
            gt.push(rates_for(g, &probs.gt[s], top_k, snr, ub));
            base.push(rates_for(g, &probs.baseline[s], top_k, snr, ub));
        }
        let mean =
            |f: &dyn Fn(&PerSampleRates) -> f64, v: &[PerSampleRates]| -> f64 {
                v.iter().map(|r| f(r)).sum::<f64>() / n
            };
        let ub_rate = ub_sum / n;
        rows.push(EvalRow {
            snr_db,
            ub_rate,
            proposed_top1: mean(&|r| r.top1, &cascade),
            proposed_top3_mean: mean(&|r| r.topk_mean, &cascade),
            baseline_top1: mean(&|r| r.top1, &base),
            baseline_top3_mean: mean(&|r| r.topk_mean, &base),
            proposed_top1_acc: cascade_acc,
            baseline_top1_acc: baseline_acc,
        });
        gt_rows.push(EvalRow {
            snr_db,
            ub_rate,
            proposed_top1: mean(&|r| r.top1, &gt),
            proposed_top3_mean: mean(&|r| r.topk_mean, &gt),
            baseline_top1: mean(&|r| r.top1, &base),
            baseline_top3_mean: mean(&|r| r.topk_mean, &base),
            proposed_top1_acc: gt_acc,
            baseline_top1_acc: baseline_acc,
        });
        cascade_detail.push(SnrDetail {
            snr_db,
            proposed: cascade,
        });
        gt_detail.push(SnrDetail {
            snr_db,
            proposed: gt,
        });
    }
    Ok(BeamformingEval {
        rows,
        gt_rows,
        cascade_detail,
        gt_detail,
        cascade_acc,
        gt_acc,
        baseline_acc,
    })
}

fn one_hot(len: usize, index: usize) -> Vec<f64> {
    let mut v = vec![0.0; len];
    v[index] = 1.0;
    v
}

/// The inclusive dB grid `start, start+step, ..., stop`.
pub fn snr_grid(start_db: f64, stop_db: f64, step_db: f64) -> Result<Vec<f64>, LearnError> {
    if step_db <= 0.0 || stop_db < start_db {
        return Err(LearnError::invalid(format!(
            "bad SNR grid: start {start_db}, stop {stop_db}, step {step_db}"
        )));
    }
    let mut grid = Vec::new();
    let mut v = start_db;
    while v <= stop_db + 1e-9 {
        grid.push(v);
        v += step_db;
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_covers_the_evaluation_range() {
        let grid = snr_grid(-17.0, 25.0, 3.0).unwrap();
        assert_eq!(grid.len(), 15);
        assert_eq!(grid[0], -17.0);
        assert!((grid[14] - 25.0).abs() < 1e-9);
    }

    #[test]
    fn db_conversion() {
        assert!((db_to_linear(0.0) - 1.0).abs() < 1e-15);
        assert!((db_to_linear(10.0) - 10.0).abs() < 1e-12);
        assert!((db_to_linear(-10.0) - 0.1).abs() < 1e-15);
    }
}

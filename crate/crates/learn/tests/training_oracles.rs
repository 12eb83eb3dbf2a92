//! Overfit sanity oracles, seed determinism and evaluation invariants.

mod common;

use thzbeam_core::generate_codebook;
use thzbeam_learn::{
    evaluate_beamforming, evaluate_estimator, make_labels, snr_grid, train_estimator,
    train_predictor, EstimatorSettings, EvalProbs, PredictorSettings, TrainHyper,
};
use thzbeam_nn::OptimizerConfig;

use common::micro_dataset;

fn overfit_estimator_settings(epochs: usize) -> EstimatorSettings {
    EstimatorSettings {
        conv_channels: (16, 32),
        // capacity probe: regularization off, decay off, large step
        dropout: 0.0,
        hyper: TrainHyper {
            epochs,
            batch_size: 10,
            optimizer: OptimizerConfig::SgdMomentum {
                learning_rate: 0.1,
                momentum: 0.8,
                lr_decay_factor: 1.0,
                lr_decay_epoch: 80,
            },
            seed: 11,
        },
    }
}

fn predictor_settings(epochs: usize, seed: u64) -> PredictorSettings {
    PredictorSettings {
        hidden: [256, 256, 128, 128],
        dropout: 0.2,
        hyper: TrainHyper {
            epochs,
            batch_size: 10,
            optimizer: OptimizerConfig::Adam {
                learning_rate: 1e-2,
                beta1: 0.9,
                beta2: 0.999,
                epsilon: 1e-8,
            },
            seed,
        },
    }
}

#[test]
fn estimator_overfits_ten_samples() {
    let samples = micro_dataset(4001, 10);
    let train_idx: Vec<usize> = (0..10).collect();
    let settings = overfit_estimator_settings(2000);
    let (_, trace) = train_estimator(&samples, &train_idx, &[], &settings).unwrap();
    let final_loss = trace.last().unwrap().train_loss;
    assert!(
        final_loss < 1e-3,
        "train MSE after 2000 epochs: {final_loss}"
    );
}

#[test]
fn predictor_overfits_ten_samples() {
    let mut samples = micro_dataset(4002, 10);
    let codebook = generate_codebook(
        &thzbeam_core::ArrayGeometry::new(2, 4, 2, 0.5),
        (2, 8, 2),
    )
    .unwrap();
    make_labels(&mut samples, &codebook, 1.0).unwrap();
    let train_idx: Vec<usize> = (0..10).collect();
    let settings = predictor_settings(300, 21);
    let (mut model, _) =
        train_predictor(&samples, &train_idx, &[], &settings, codebook.len()).unwrap();
    let acc = model.top1_accuracy(&samples, &train_idx).unwrap();
    assert_eq!(acc, 1.0, "train top-1 accuracy {acc}");
}

#[test]
fn training_is_deterministic_under_a_fixed_seed() {
    let samples = micro_dataset(4003, 12);
    let train_idx: Vec<usize> = (0..10).collect();
    let test_idx: Vec<usize> = (10..12).collect();
    let settings = EstimatorSettings {
        conv_channels: (8, 8),
        dropout: 0.2,
        hyper: TrainHyper {
            epochs: 5,
            batch_size: 4,
            optimizer: OptimizerConfig::SgdMomentum {
                learning_rate: 1e-3,
                momentum: 0.8,
                lr_decay_factor: 0.1,
                lr_decay_epoch: 80,
            },
            seed: 77,
        },
    };
    let (model_a, trace_a) = train_estimator(&samples, &train_idx, &test_idx, &settings).unwrap();
    let (model_b, trace_b) = train_estimator(&samples, &train_idx, &test_idx, &settings).unwrap();
    // bit-for-bit identical loss traces and parameters
    assert_eq!(trace_a.len(), trace_b.len());
    for (a, b) in trace_a.iter().zip(&trace_b) {
        assert_eq!(a.train_loss.to_bits(), b.train_loss.to_bits());
        assert_eq!(a.test_loss.to_bits(), b.test_loss.to_bits());
    }
    for (la, lb) in model_a.net.layers.iter().zip(&model_b.net.layers) {
        for (pa, pb) in la.params().iter().zip(lb.params()) {
            assert_eq!(pa.data(), pb.data());
        }
    }
}

#[test]
fn estimator_evaluation_is_order_invariant_and_zero_for_perfect_model() {
    let samples = micro_dataset(4004, 20);
    let train_idx: Vec<usize> = (0..14).collect();
    let test_idx: Vec<usize> = (14..20).collect();
    let settings = EstimatorSettings {
        conv_channels: (4, 4),
        dropout: 0.0,
        hyper: TrainHyper {
            epochs: 2,
            batch_size: 8,
            optimizer: OptimizerConfig::SgdMomentum {
                learning_rate: 1e-3,
                momentum: 0.8,
                lr_decay_factor: 1.0,
                lr_decay_epoch: 80,
            },
            seed: 5,
        },
    };
    let (mut model, _) = train_estimator(&samples, &train_idx, &test_idx, &settings).unwrap();
    let eval_fwd = evaluate_estimator(&mut model, &samples, &train_idx, &test_idx).unwrap();
    let reversed: Vec<usize> = test_idx.iter().rev().cloned().collect();
    let eval_rev = evaluate_estimator(&mut model, &samples, &train_idx, &reversed).unwrap();
    for (a, b) in eval_fwd.report.rows.iter().zip(&eval_rev.report.rows) {
        assert!((a.mean - b.mean).abs() < 1e-12);
        assert!((a.std - b.std).abs() < 1e-12);
    }
    assert_eq!(eval_fwd.scatter_aoa.len(), test_idx.len());
}

#[test]
fn one_hot_oracle_reproduces_the_upper_bound() {
    let mut samples = micro_dataset(4005, 12);
    let codebook = generate_codebook(
        &thzbeam_core::ArrayGeometry::new(2, 4, 2, 0.5),
        (2, 8, 2),
    )
    .unwrap();
    make_labels(&mut samples, &codebook, 1.0).unwrap();
    let test_idx: Vec<usize> = (0..12).collect();
    let grid = snr_grid(-17.0, 25.0, 3.0).unwrap();
    let uniform = vec![vec![1.0 / codebook.len() as f64; codebook.len()]; test_idx.len()];
    let probs = EvalProbs {
        cascade: uniform.clone(),
        gt: uniform.clone(),
        baseline: uniform,
    };
    let eval = evaluate_beamforming(&samples, &test_idx, &codebook, &grid, 3, &probs, true)
        .unwrap();
    for row in &eval.rows {
        // oracle-as-model: the top-1 column equals the upper bound exactly
        assert_eq!(row.proposed_top1.to_bits(), row.ub_rate.to_bits());
    }
    // pointwise ordering: ub >= top-k best >= top-1
    for detail in eval.cascade_detail.iter().chain(&eval.gt_detail) {
        for r in &detail.proposed {
            assert!(r.ub >= r.topk_best);
            assert!(r.topk_best >= r.top1);
            assert!(r.top1 >= 0.0);
        }
    }
}

#[test]
fn averaging_over_all_one_hot_models_matches_direct_mean() {
    let mut samples = micro_dataset(4006, 4);
    let codebook = generate_codebook(
        &thzbeam_core::ArrayGeometry::new(2, 4, 2, 0.5),
        (2, 8, 2),
    )
    .unwrap();
    make_labels(&mut samples, &codebook, 1.0).unwrap();
    let grid = [0.0];
    let b = codebook.len();
    for target in 0..4usize {
        // direct averaging oracle over the full per-beam rate vector
        let full = thzbeam_core::exhaustive_search_full(
            &samples[target].h_thz_true,
            &codebook,
            1.0,
        )
        .unwrap();
        let direct_mean: f64 =
            full.rates.as_ref().unwrap().iter().sum::<f64>() / b as f64;
        let mut acc = 0.0;
        for beam in 0..b {
            let mut probs = vec![0.0; b];
            probs[beam] = 1.0;
            let eval_probs = EvalProbs {
                cascade: vec![probs.clone()],
                gt: vec![probs.clone()],
                baseline: vec![probs],
            };
            let eval = evaluate_beamforming(
                &samples,
                &[target],
                &codebook,
                &grid,
                1,
                &eval_probs,
                false,
            )
            .unwrap();
            acc += eval.rows[0].proposed_top1;
        }
        let model_mean = acc / b as f64;
        assert!(
            (model_mean - direct_mean).abs() <= 1e-9 * direct_mean.abs().max(1.0),
            "sample {target}: {model_mean} vs {direct_mean}"
        );
    }
}


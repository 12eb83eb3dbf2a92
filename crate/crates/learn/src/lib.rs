//! Learning stage: the convolutional THz-factor estimator, the dense beam
//! predictor with its exhaustive-search labels, the direct-THz baseline,
//! and beamforming evaluation across SNR.

pub mod baseline;
pub mod beameval;
pub mod error;
pub mod estimator;
pub mod input;
pub mod normalizer;
pub mod predictor;
pub mod report;
pub mod split;
pub mod train;

pub use baseline::{
    baseline_input, build_baseline_network, train_baseline, BaselineModel, BaselineSettings,
    ARCH_BASELINE,
};
pub use beameval::{
    baseline_probs, cascade_probs, db_to_linear, evaluate_beamforming, gt_probs, snr_grid,
    BeamformingEval, EvalProbs, EvalRow, PerSampleRates, SnrDetail,
};
pub use error::LearnError;
pub use estimator::{
    build_estimator_network, train_estimator, EstimatorModel, EstimatorSettings, ARCH_ESTIMATOR,
};
pub use input::format_input;
pub use normalizer::FactorNormalizer;
pub use predictor::{
    build_predictor_network, make_labels, train_predictor, PredictorModel, PredictorSettings,
    ARCH_PREDICTOR,
};
pub use report::{
    evaluate_estimator, factor_error_report, EstimatorEvaluation, FactorErrorReport,
    FactorErrorRow,
};
pub use split::{train_test_split, streams};
pub use train::{EpochLoss, TrainHyper};

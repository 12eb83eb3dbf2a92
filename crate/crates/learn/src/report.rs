//! Per-factor error reports for the estimator.

use thzbeam_core::{wrap_angle, DatasetSample, FACTOR_COUNT};

use crate::error::LearnError;
use crate::estimator::EstimatorModel;

const RAD_TO_DEG: f64 = 180.0 / std::f64::consts::PI;

/// Report rows, ordered as in the error table: angles first, in degrees,
/// then ToA in seconds and pathloss as a linear gain.
/// Each entry is (row name, factor column in storage order, is_angle).
const REPORT_ROWS: [(&str, usize, bool); FACTOR_COUNT] = [
    ("AoD phi (deg)", 5, true),
    ("AoD theta (deg)", 6, true),
    ("AoA phi (deg)", 3, true),
    ("AoA theta (deg)", 4, true),
    ("Phase (deg)", 2, true),
    ("ToA (s)", 1, false),
    ("Pathloss (linear)", 0, false),
];

#[derive(Debug, Clone)]
pub struct FactorErrorRow {
    pub name: String,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct FactorErrorReport {
    pub rows: Vec<FactorErrorRow>,
}

impl FactorErrorReport {
    pub fn row(&self, name: &str) -> Option<&FactorErrorRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Mean absolute error per row name, for threshold checks.
    pub fn mean_of(&self, name: &str) -> f64 {
        self.row(name).map(|r| r.mean).unwrap_or(f64::NAN)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("factor,mean,std\n");
        for r in &self.rows {
            out.push_str(&format!("{},{:.12e},{:.12e}\n", r.name, r.mean, r.std));
        }
        out
    }

    /// Pretty text table mirroring the error-table layout.
    pub fn to_text(&self, title: &str) -> String {
        let mut out = format!("{title}\n");
        out.push_str(&format!(
            "{:<22} {:>14} {:>14}\n",
            "Average Absolute Error", "Mean", "Std Dev"
        ));
        for r in &self.rows {
            out.push_str(&format!("{:<22} {:>14.6e} {:>14.6e}\n", r.name, r.mean, r.std));
        }
        out
    }
}

/// Absolute error for one factor value; angle differences are wrapped so
/// that e.g. error(-179 deg, +179 deg) is 2 degrees.
fn abs_error(pred: f64, truth: f64, is_angle: bool) -> f64 {
    if is_angle {
        wrap_angle(pred - truth).abs()
    } else {
        (pred - truth).abs()
    }
}

/// Builds the 7-row report from flattened L x 7 predictions and targets,
/// pooling absolute errors across all paths and samples.
pub fn factor_error_report(
    predictions: &[Vec<f64>],
    targets: &[Vec<f64>],
    num_paths: usize,
) -> FactorErrorReport {
    let mut rows = Vec::with_capacity(REPORT_ROWS.len());
    for (name, col, is_angle) in REPORT_ROWS {
        let mut errors = Vec::with_capacity(predictions.len() * num_paths);
        for (pred, target) in predictions.iter().zip(targets) {
            for l in 0..num_paths {
                let idx = l * FACTOR_COUNT + col;
                let mut e = abs_error(pred[idx], target[idx], is_angle);
                if is_angle {
                    e *= RAD_TO_DEG;
                }
                errors.push(e);
            }
        }
        let n = errors.len().max(1) as f64;
        let mean = errors.iter().sum::<f64>() / n;
        let var = errors.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / n;
        rows.push(FactorErrorRow {
            name: name.to_string(),
            mean,
            std: var.sqrt(),
        });
    }
    FactorErrorReport { rows }
}

/// Evaluation output: the model report, the blind mean-predictor baseline
/// computed on the same test set, and first-path scatter data for plots.
pub struct EstimatorEvaluation {
    pub report: FactorErrorReport,
    pub blind_report: FactorErrorReport,
    /// (true, predicted) azimuth AoA of the strongest path, radians.
    pub scatter_aoa: Vec<(f64, f64)>,
    /// (true, predicted) ToA of the strongest path, seconds.
    pub scatter_toa: Vec<(f64, f64)>,
}

/// Evaluates a trained model against the blind mean-predictor (the
/// column-mean of the training targets). Evaluation order does not affect
/// the pooled statistics.
pub fn evaluate_estimator(
    model: &mut EstimatorModel,
    samples: &[DatasetSample],
    train_idx: &[usize],
    test_idx: &[usize],
) -> Result<EstimatorEvaluation, LearnError> {
    if test_idx.is_empty() {
        return Err(LearnError::invalid("evaluation needs a nonempty test set"));
    }
    let num_paths = model.num_paths;
    // blind predictor: column means of the training targets
    let cols = num_paths * FACTOR_COUNT;
    let mut blind = vec![0.0; cols];
    for &i in train_idx {
        for (b, v) in blind.iter_mut().zip(samples[i].thz_factors.flatten()) {
            *b += v;
        }
    }
    for b in blind.iter_mut() {
        *b /= train_idx.len().max(1) as f64;
    }

    let mut predictions = Vec::with_capacity(test_idx.len());
    let mut targets = Vec::with_capacity(test_idx.len());
    let mut scatter_aoa = Vec::with_capacity(test_idx.len());
    let mut scatter_toa = Vec::with_capacity(test_idx.len());
    for &i in test_idx {
        let pred = model.predict(&samples[i])?;
        let target = samples[i].thz_factors.flatten();
        scatter_aoa.push((target[3], pred[3]));
        scatter_toa.push((target[1], pred[1]));
        predictions.push(pred);
        targets.push(target);
    }
    let report = factor_error_report(&predictions, &targets, num_paths);
    let blind_predictions: Vec<Vec<f64>> = (0..test_idx.len()).map(|_| blind.clone()).collect();
    let blind_report = factor_error_report(&blind_predictions, &targets, num_paths);
    Ok(EstimatorEvaluation {
        report,
        blind_report,
        scatter_aoa,
        scatter_toa,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions_give_zero_errors() {
        let rows = vec![vec![0.5, 1e-8, 0.1, 0.2, 0.3, -0.4, 0.0]; 3];
        let report = factor_error_report(&rows, &rows, 1);
        for r in &report.rows {
            assert_eq!(r.mean, 0.0);
            assert_eq!(r.std, 0.0);
        }
    }

    #[test]
    fn angle_errors_wrap() {
        use std::f64::consts::PI;
        // prediction -179 deg, truth +179 deg: error must be 2 deg, not 358
        let pred = vec![vec![0.0, 0.0, 0.0, -179.0 * PI / 180.0, 0.0, 0.0, 0.0]];
        let truth = vec![vec![0.0, 0.0, 0.0, 179.0 * PI / 180.0, 0.0, 0.0, 0.0]];
        let report = factor_error_report(&pred, &truth, 1);
        let aoa = report.mean_of("AoA phi (deg)");
        assert!((aoa - 2.0).abs() < 1e-9, "wrapped error {aoa}");
    }

    #[test]
    fn report_rows_match_expected_names_in_order() {
        let rows = vec![vec![0.0; 7]];
        let report = factor_error_report(&rows, &rows, 1);
        let names: Vec<&str> = report.rows.iter().map(|r| r.name.as_str()).collect();
        assert_eq!(
            names,
            vec![
                "AoD phi (deg)",
                "AoD theta (deg)",
                "AoA phi (deg)",
                "AoA theta (deg)",
                "Phase (deg)",
                "ToA (s)",
                "Pathloss (linear)",
            ]
        );
    }
}

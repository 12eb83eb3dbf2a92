//! The pipeline run configuration: scenario, codebooks, architectures,
//! optimizers, SNR grids and file paths, loaded from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use thzbeam_core::{ArrayGeometry, BandConfig, RegionConfig, ScenarioConfig};
use thzbeam_learn::{
    BaselineSettings, EstimatorSettings, PredictorSettings, TrainHyper,
};
use thzbeam_nn::OptimizerConfig;

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub conv_channels: [usize; 2],
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictorConfig {
    pub hidden: [usize; 4],
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub conv_filters: usize,
    pub hidden: [usize; 4],
    pub dropout: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub optimizer: OptimizerConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CodebookConfig {
    /// Phase quantization (Qx, Qy, Qz) of the THz beamformer codebook.
    pub thz: [usize; 3],
    /// Sub-6GHz codebook quantization; parsed for completeness, the
    /// downlink beamforming stage only uses the THz codebook.
    #[serde(default)]
    pub sub6: Option<[usize; 3]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BeamformingConfig {
    /// SNR (dB) at which training labels are generated.
    pub label_snr_db: f64,
    pub eval_snr_db_start: f64,
    pub eval_snr_db_stop: f64,
    pub eval_snr_db_step: f64,
    pub top_k: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SplitConfig {
    pub train_fraction: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathsConfig {
    pub dataset: PathBuf,
    pub labeled_dataset: PathBuf,
    pub estimator_model: PathBuf,
    pub predictor_model: PathBuf,
    pub baseline_model: PathBuf,
    pub eval_dir: PathBuf,
    pub plots_dir: PathBuf,
}

impl Default for PathsConfig {
    fn default() -> Self {
        PathsConfig {
            dataset: "dataset.thzds".into(),
            labeled_dataset: "dataset_labeled.thzds".into(),
            estimator_model: "estimator.thznn".into(),
            predictor_model: "predictor.thznn".into(),
            baseline_model: "baseline.thznn".into(),
            eval_dir: "eval".into(),
            plots_dir: "plots".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub scenario: ScenarioConfig,
    pub codebook: CodebookConfig,
    pub estimator: EstimatorConfig,
    pub predictor: PredictorConfig,
    pub baseline: BaselineConfig,
    pub beamforming: BeamformingConfig,
    pub split: SplitConfig,
    #[serde(default)]
    pub paths: PathsConfig,
}

impl RunConfig {
    /// Desk-scale defaults: a scenario small enough to generate, train and
    /// evaluate on one CPU in minutes. Larger setups (more users, antennas
    /// and beams) are plain config edits.
    pub fn desk_default() -> Self {
        RunConfig {
            seed: 7,
            scenario: ScenarioConfig {
                seed: 7,
                num_users: 5000,
                num_scatterers: 3,
                absorption_coeff: 0.005,
                pathloss_exponent: 2.0,
                region: RegionConfig {
                    width_m: 12.0,
                    depth_m: 10.0,
                    user_height_m: 1.5,
                    bs_position_m: [0.0, 5.0, 4.0],
                    scatterer_height_range_m: [0.5, 3.5],
                },
                sub6: BandConfig {
                    carrier_hz: 2.5e9,
                    bandwidth_hz: 2e7,
                    subcarriers: 32,
                    array: ArrayGeometry::linear_y(4, 0.5),
                    max_paths: 8,
                    noise_variance: None,
                },
                thz: BandConfig {
                    carrier_hz: 1e11,
                    bandwidth_hz: 2e8,
                    subcarriers: 32,
                    array: ArrayGeometry::new(2, 8, 2, 0.5),
                    max_paths: 4,
                    noise_variance: None,
                },
            },
            codebook: CodebookConfig {
                thz: [2, 32, 2],
                sub6: Some([1, 4, 1]),
            },
            estimator: EstimatorConfig {
                conv_channels: [16, 32],
                dropout: 0.2,
                epochs: 100,
                batch_size: 128,
                optimizer: OptimizerConfig::SgdMomentum {
                    learning_rate: 3e-2,
                    momentum: 0.8,
                    lr_decay_factor: 0.1,
                    lr_decay_epoch: 80,
                },
            },
            predictor: PredictorConfig {
                hidden: [256, 256, 128, 128],
                dropout: 0.2,
                epochs: 100,
                batch_size: 128,
                optimizer: OptimizerConfig::Adam {
                    learning_rate: 1e-2,
                    beta1: 0.9,
                    beta2: 0.999,
                    epsilon: 1e-8,
                },
            },
            baseline: BaselineConfig {
                conv_filters: 16,
                hidden: [256, 256, 128, 128],
                dropout: 0.2,
                epochs: 100,
                batch_size: 128,
                optimizer: OptimizerConfig::Adam {
                    learning_rate: 1e-2,
                    beta1: 0.9,
                    beta2: 0.999,
                    epsilon: 1e-8,
                },
            },
            beamforming: BeamformingConfig {
                label_snr_db: 0.0,
                eval_snr_db_start: -17.0,
                eval_snr_db_stop: 25.0,
                eval_snr_db_step: 3.0,
                top_k: 3,
            },
            split: SplitConfig {
                train_fraction: 0.8,
            },
            paths: PathsConfig::default(),
        }
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: RunConfig = toml::from_str(&text)
            .map_err(|e| CliError::config(vec![format!("config parse error: {e}")]))?;
        // the scenario inherits the run seed unless given its own
        if config.scenario.seed == 0 {
            config.scenario.seed = config.seed;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        self.scenario.seed = seed;
    }

    /// Validates every cross-field constraint, reporting all violations.
    pub fn validate(&self) -> Result<(), CliError> {
        let mut problems = Vec::new();
        if let Err(thzbeam_core::CoreError::Config(p)) = self.scenario.validate() {
            problems.extend(p);
        }
        if self.codebook.thz.iter().any(|&q| q == 0) {
            problems.push("codebook.thz axes must all be >= 1".into());
        }
        let codebook_size: usize = self.codebook.thz.iter().product();
        if self.beamforming.top_k == 0 || self.beamforming.top_k > codebook_size {
            problems.push(format!(
                "beamforming.top_k must be in 1..={codebook_size}, got {}",
                self.beamforming.top_k
            ));
        }
        if self.beamforming.eval_snr_db_step <= 0.0
            || self.beamforming.eval_snr_db_stop < self.beamforming.eval_snr_db_start
        {
            problems.push("beamforming eval SNR grid is empty or inverted".into());
        }
        if !(0.0 < self.split.train_fraction && self.split.train_fraction < 1.0) {
            problems.push(format!(
                "split.train_fraction must be in (0,1), got {}",
                self.split.train_fraction
            ));
        }
        // estimator input must survive two conv blocks: the subcarrier axis
        // halves twice when even
        let k = self.scenario.sub6.subcarriers;
        if k < 4 {
            problems.push(format!(
                "sub6.subcarriers must be >= 4 for the two-block estimator, got {k}"
            ));
        }
        if self.estimator.conv_channels.iter().any(|&c| c == 0) {
            problems.push("estimator.conv_channels must be >= 1".into());
        }
        if self.predictor.hidden.iter().any(|&h| h == 0) {
            problems.push("predictor.hidden widths must be >= 1".into());
        }
        if self.baseline.conv_filters == 0 || self.baseline.hidden.iter().any(|&h| h == 0) {
            problems.push("baseline dims must be >= 1".into());
        }
        for (name, epochs, batch) in [
            ("estimator", self.estimator.epochs, self.estimator.batch_size),
            ("predictor", self.predictor.epochs, self.predictor.batch_size),
            ("baseline", self.baseline.epochs, self.baseline.batch_size),
        ] {
            if epochs == 0 {
                problems.push(format!("{name}.epochs must be >= 1"));
            }
            if batch == 0 {
                problems.push(format!("{name}.batch_size must be >= 1"));
            }
        }
        for (name, opt) in [
            ("estimator", &self.estimator.optimizer),
            ("predictor", &self.predictor.optimizer),
            ("baseline", &self.baseline.optimizer),
        ] {
            if let Err(e) = opt.validate() {
                problems.push(format!("{name}.optimizer: {e}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CliError::config(problems))
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn estimator_settings(&self) -> EstimatorSettings {
        EstimatorSettings {
            conv_channels: (self.estimator.conv_channels[0], self.estimator.conv_channels[1]),
            dropout: self.estimator.dropout,
            hyper: TrainHyper {
                epochs: self.estimator.epochs,
                batch_size: self.estimator.batch_size,
                optimizer: self.estimator.optimizer.clone(),
                seed: self.seed,
            },
        }
    }

    pub fn predictor_settings(&self) -> PredictorSettings {
        PredictorSettings {
            hidden: self.predictor.hidden,
            dropout: self.predictor.dropout,
            hyper: TrainHyper {
                epochs: self.predictor.epochs,
                batch_size: self.predictor.batch_size,
                optimizer: self.predictor.optimizer.clone(),
                seed: self.seed,
            },
        }
    }

    pub fn baseline_settings(&self) -> BaselineSettings {
        BaselineSettings {
            conv_filters: self.baseline.conv_filters,
            hidden: self.baseline.hidden,
            dropout: self.baseline.dropout,
            hyper: TrainHyper {
                epochs: self.baseline.epochs,
                batch_size: self.baseline.batch_size,
                optimizer: self.baseline.optimizer.clone(),
                seed: self.seed,
            },
        }
    }

    pub fn thz_quantization(&self) -> (usize, usize, usize) {
        (
            self.codebook.thz[0],
            self.codebook.thz[1],
            self.codebook.thz[2],
        )
    }
}

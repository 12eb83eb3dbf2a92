//! Dual-band (sub-6GHz / THz) multipath channel simulation: geometric path
//! factors, channel synthesis, pilot estimation, analog beamforming
//! codebooks with exhaustive search, and the binary dataset format.

pub mod channel;
pub mod codebook;
pub mod dataset;
pub mod error;
pub mod factors;
pub mod geom;
pub mod pathloss;
pub mod scenario;
pub mod steering;

pub use channel::{pilot_estimate, synthesize_channel, Band, FrequencyChannel};
pub use codebook::{
    exhaustive_search, exhaustive_search_full, generate_codebook, select_top_k,
    spectral_efficiency, top_k_evaluate, BeamGains, BeamSearchResult, Codebook, TopKRates,
};
pub use dataset::{read_dataset, write_dataset, DatasetHeader, DatasetSample, LABEL_UNSET};
pub use error::CoreError;
pub use factors::{ChannelFactorSet, PathFactors, FACTOR_COUNT, FACTOR_NAMES};
pub use geom::{wrap_angle, Point3, SPEED_OF_LIGHT};
pub use pathloss::pathloss;
pub use scenario::{
    sample_scenario, scatterer_positions, BandConfig, DualBandSample, RegionConfig, ScenarioConfig,
};
pub use steering::{steering_vector, ArrayGeometry};

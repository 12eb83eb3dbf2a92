//! Shared micro-scenario fixtures for learn tests.

use thzbeam_core::{
    sample_scenario, ArrayGeometry, BandConfig, DatasetSample, RegionConfig, ScenarioConfig,
};

pub fn micro_scenario(seed: u64, num_users: usize) -> ScenarioConfig {
    ScenarioConfig {
        seed,
        num_users,
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
            subcarriers: 16,
            array: ArrayGeometry::linear_y(4, 0.5),
            max_paths: 8,
            noise_variance: None,
        },
        thz: BandConfig {
            carrier_hz: 1e11,
            bandwidth_hz: 1e8,
            subcarriers: 16,
            array: ArrayGeometry::new(2, 4, 2, 0.5),
            max_paths: 4,
            noise_variance: None,
        },
    }
}

pub fn micro_dataset(seed: u64, num_users: usize) -> Vec<DatasetSample> {
    sample_scenario(&micro_scenario(seed, num_users))
        .unwrap()
        .into_iter()
        .map(DatasetSample::from_dual_band)
        .collect()
}

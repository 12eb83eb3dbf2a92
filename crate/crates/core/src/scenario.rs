//! Seeded stochastic scenario generation: shared scatterer geometry, per-user
//! positions, and dual-band channel/factor samples derived from it.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{pilot_estimate, synthesize_channel, Band, FrequencyChannel};
use crate::error::CoreError;
use crate::factors::{ChannelFactorSet, PathFactors};
use crate::geom::{direction_angles, wrap_angle, Point3, SPEED_OF_LIGHT};
use crate::pathloss::pathloss;
use crate::steering::ArrayGeometry;

/// RNG stream reserved for scatterer placement; user streams are the user
/// index itself, so parallel and serial generation are bit-identical.
const SCATTERER_STREAM: u64 = u64::MAX;

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-band radio parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BandConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Number of OFDM subcarriers, K.
    pub subcarriers: usize,
    pub array: ArrayGeometry,
    /// Path budget of the per-band factor set.
    pub max_paths: usize,
    /// Pilot noise variance per antenna element. When absent the sub-6GHz
    /// band defaults to noiseless and the THz band to 10x the sub-6GHz
    /// variance (10 dB worse pilot SNR).
    #[serde(default)]
    pub noise_variance: Option<f64>,
}

impl BandConfig {
    pub fn wavelength_m(&self) -> f64 {
        SPEED_OF_LIGHT / self.carrier_hz
    }
}

/// Placement of the served region, base station and scatterers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Extent of the user rectangle along x, meters.
    pub width_m: f64,
    /// Extent of the user rectangle along y, meters.
    pub depth_m: f64,
    /// Height of every user antenna.
    pub user_height_m: f64,
    pub bs_position_m: [f64; 3],
    /// Scatterer heights are drawn uniformly from this range.
    pub scatterer_height_range_m: [f64; 2],
}

impl RegionConfig {
    pub fn bs_position(&self) -> Point3 {
        Point3::from(self.bs_position_m)
    }

    /// Diameter of the bounding box containing the region, the BS and all
    /// scatterer heights.
    pub fn scene_diameter_m(&self) -> f64 {
        let bs = self.bs_position();
        let xs = [0.0, self.width_m, bs.x];
        let ys = [0.0, self.depth_m, bs.y];
        let zs = [
            0.0,
            self.user_height_m,
            self.scatterer_height_range_m[0],
            self.scatterer_height_range_m[1],
            bs.z,
        ];
        let span = |vals: &[f64]| {
            let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo
        };
        let (dx, dy, dz) = (span(&xs), span(&ys), span(&zs));
        (dx * dx + dy * dy + dz * dz).sqrt()
    }
}

/// Full scenario description; `sample_scenario` is a pure function of it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub seed: u64,
    pub num_users: usize,
    /// Shared single-bounce scatterers, placed once per scenario.
    pub num_scatterers: usize,
    /// Molecular absorption coefficient, 1/m, applied in both bands.
    pub absorption_coeff: f64,
    pub pathloss_exponent: f64,
    pub region: RegionConfig,
    pub sub6: BandConfig,
    pub thz: BandConfig,
}

impl ScenarioConfig {
    pub fn sub6_noise_variance(&self) -> f64 {
        self.sub6.noise_variance.unwrap_or(0.0)
    }

    pub fn thz_noise_variance(&self) -> f64 {
        self.thz
            .noise_variance
            .unwrap_or(10.0 * self.sub6_noise_variance())
    }

    pub fn from_toml_str(text: &str) -> Result<Self, CoreError> {
        let cfg: ScenarioConfig =
            toml::from_str(text).map_err(|e| CoreError::Config(vec![e.to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Validates every constraint and reports all violations at once.
    pub fn validate(&self) -> Result<(), CoreError> {
        let mut problems = Vec::new();
        if self.region.width_m <= 0.0 || self.region.depth_m <= 0.0 {
            problems.push(format!(
                "region is degenerate: width {} m x depth {} m",
                self.region.width_m, self.region.depth_m
            ));
        }
        let [hlo, hhi] = self.region.scatterer_height_range_m;
        if hlo > hhi {
            problems.push(format!("scatterer height range [{hlo}, {hhi}] is inverted"));
        }
        if self.pathloss_exponent < 2.0 {
            problems.push(format!(
                "pathloss_exponent must be >= 2, got {}",
                self.pathloss_exponent
            ));
        }
        if self.absorption_coeff < 0.0 {
            problems.push(format!(
                "absorption_coeff must be >= 0, got {}",
                self.absorption_coeff
            ));
        }
        if self.sub6.max_paths < self.thz.max_paths {
            problems.push(format!(
                "sub-6GHz max_paths ({}) must be >= THz max_paths ({})",
                self.sub6.max_paths, self.thz.max_paths
            ));
        }
        for (name, band) in [("sub6", &self.sub6), ("thz", &self.thz)] {
            if band.carrier_hz <= 0.0 {
                problems.push(format!("{name}.carrier_hz must be > 0"));
            }
            if band.bandwidth_hz <= 0.0 {
                problems.push(format!("{name}.bandwidth_hz must be > 0"));
            }
            if band.subcarriers == 0 {
                problems.push(format!("{name}.subcarriers must be >= 1"));
            }
            if band.array.num_elements() == 0 {
                problems.push(format!("{name}.array has zero elements"));
            }
            if band.array.spacing_wavelengths <= 0.0 {
                problems.push(format!("{name}.array spacing must be > 0"));
            }
            if band.max_paths == 0 {
                problems.push(format!("{name}.max_paths must be >= 1"));
            }
            if let Some(v) = band.noise_variance {
                if v < 0.0 {
                    problems.push(format!("{name}.noise_variance must be >= 0, got {v}"));
                }
            }
            // Delay-window guard: the longest single-bounce path is bounded
            // by twice the scene diameter; its delay must fit inside the
            // cyclic-prefix window toa * B < K.
            let max_path_m = 2.0 * self.region.scene_diameter_m();
            let max_delay_taps = max_path_m / SPEED_OF_LIGHT * band.bandwidth_hz;
            if max_delay_taps >= band.subcarriers as f64 {
                problems.push(format!(
                    "{name}: worst-case path delay spans {max_delay_taps:.2} taps but K = {}; \
                     shrink the region or the bandwidth, or raise K",
                    band.subcarriers
                ));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(CoreError::Config(problems))
        }
    }
}

/// One user's generated record: noisy and true sub-6GHz channels, the THz
/// factor set and the THz channel synthesized from it.
#[derive(Debug, Clone)]
pub struct DualBandSample {
    /// Pilot-estimated (noisy) sub-6GHz channel.
    pub h_sub6: FrequencyChannel,
    pub h_sub6_true: FrequencyChannel,
    pub thz_factors: ChannelFactorSet,
    /// Derived from `thz_factors` by channel synthesis, never sampled.
    pub h_thz_true: FrequencyChannel,
    pub user_position: Point3,
}

/// One propagation path of the shared geometry.
struct GeometricPath {
    length_m: f64,
    /// Direction of arrival at the BS (towards the last bounce or the user).
    aoa: (f64, f64),
    /// Direction of departure at the user (towards the bounce or the BS).
    aod: (f64, f64),
    bounces: u32,
}

fn band_factors(
    paths: &[GeometricPath],
    band: &BandConfig,
    exponent: f64,
    absorption: f64,
) -> Result<ChannelFactorSet, CoreError> {
    let mut out = Vec::with_capacity(paths.len());
    for p in paths {
        let gain = pathloss(p.length_m, exponent, absorption, band.carrier_hz)?;
        let toa = p.length_m / SPEED_OF_LIGHT;
        let phase = wrap_angle(2.0 * PI * band.carrier_hz * toa + p.bounces as f64 * PI);
        out.push(PathFactors {
            pathloss: gain,
            toa,
            phase,
            aoa_az: p.aoa.0,
            aoa_el: p.aoa.1,
            aod_az: p.aod.0,
            aod_el: p.aod.1,
        });
    }
    Ok(ChannelFactorSet::from_paths(out, band.max_paths))
}

/// Scatterer positions for a scenario, drawn from the dedicated stream.
pub fn scatterer_positions(config: &ScenarioConfig) -> Vec<Point3> {
    let mut rng = stream_rng(config.seed, SCATTERER_STREAM);
    let [hlo, hhi] = config.region.scatterer_height_range_m;
    (0..config.num_scatterers)
        .map(|_| {
            let x = rng.gen::<f64>() * config.region.width_m;
            let y = rng.gen::<f64>() * config.region.depth_m;
            let z = if hhi > hlo {
                hlo + rng.gen::<f64>() * (hhi - hlo)
            } else {
                hlo
            };
            Point3::new(x, y, z)
        })
        .collect()
}

fn generate_user(
    config: &ScenarioConfig,
    scatterers: &[Point3],
    user_index: usize,
) -> Result<DualBandSample, CoreError> {
    let mut rng = stream_rng(config.seed, user_index as u64);
    let bs = config.region.bs_position();
    let pos = Point3::new(
        rng.gen::<f64>() * config.region.width_m,
        rng.gen::<f64>() * config.region.depth_m,
        config.region.user_height_m,
    );

    let mut paths = Vec::with_capacity(1 + scatterers.len());
    // line-of-sight
    paths.push(GeometricPath {
        length_m: bs.distance(pos),
        aoa: direction_angles(pos - bs),
        aod: direction_angles(bs - pos),
        bounces: 0,
    });
    // one path per scatterer, single bounce
    for s in scatterers {
        paths.push(GeometricPath {
            length_m: bs.distance(*s) + s.distance(pos),
            aoa: direction_angles(*s - bs),
            aod: direction_angles(*s - pos),
            bounces: 1,
        });
    }

    let sub6_set = band_factors(
        &paths,
        &config.sub6,
        config.pathloss_exponent,
        config.absorption_coeff,
    )?;
    let thz_factors = band_factors(
        &paths,
        &config.thz,
        config.pathloss_exponent,
        config.absorption_coeff,
    )?;

    let h_sub6_true = synthesize_channel(
        &sub6_set,
        &config.sub6.array,
        config.sub6.subcarriers,
        config.sub6.bandwidth_hz,
        Band::Sub6,
        config.sub6.carrier_hz,
    )?;
    let h_sub6 = pilot_estimate(
        &h_sub6_true,
        config.sub6_noise_variance(),
        Complex64::new(1.0, 0.0),
        &mut rng,
    )?;
    let h_thz_true = synthesize_channel(
        &thz_factors,
        &config.thz.array,
        config.thz.subcarriers,
        config.thz.bandwidth_hz,
        Band::Thz,
        config.thz.carrier_hz,
    )?;

    Ok(DualBandSample {
        h_sub6,
        h_sub6_true,
        thz_factors,
        h_thz_true,
        user_position: pos,
    })
}

/// Generates every user's dual-band sample.
///
/// A pure function of the config (including its seed): scatterers come from
/// a dedicated stream and each user from the stream of its index, so the
/// parallel and serial results are identical.
pub fn sample_scenario(config: &ScenarioConfig) -> Result<Vec<DualBandSample>, CoreError> {
    config.validate()?;
    let scatterers = scatterer_positions(config);
    (0..config.num_users)
        .into_par_iter()
        .map(|i| generate_user(config, &scatterers, i))
        .collect()
}

//! THZDS1 dataset files: little-endian binary storage of dual-band samples.
//!
//! Layout: magic `"THZDS1\0"`, header `{version u32, num_samples u64,
//! K_s, N_s, K_t, N_t, L: u32 each}`, then per sample: `h_sub6` (f32
//! interleaved re/im, subcarrier-major), `h_sub6_true` (same),
//! `thz_factors` (f32, L x 7 rows in storage order), `h_thz_true` (f32
//! interleaved), `beam_label` u32 (`0xFFFF_FFFF` if unset) and the user
//! position as 3 x f32.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use crate::channel::{Band, FrequencyChannel};
use crate::error::CoreError;
use crate::factors::{ChannelFactorSet, PathFactors, FACTOR_COUNT};
use crate::geom::Point3;
use crate::scenario::{DualBandSample, ScenarioConfig};

pub const DATASET_MAGIC: &[u8; 7] = b"THZDS1\0";
pub const DATASET_VERSION: u32 = 1;
pub const LABEL_UNSET: u32 = 0xFFFF_FFFF;

/// Dimensions stored in a dataset header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetHeader {
    pub version: u32,
    pub num_samples: u64,
    pub sub6_subcarriers: u32,
    pub sub6_antennas: u32,
    pub thz_subcarriers: u32,
    pub thz_antennas: u32,
    pub max_paths: u32,
}

impl DatasetHeader {
    pub fn from_config(config: &ScenarioConfig, num_samples: u64) -> Self {
        DatasetHeader {
            version: DATASET_VERSION,
            num_samples,
            sub6_subcarriers: config.sub6.subcarriers as u32,
            sub6_antennas: config.sub6.array.num_elements() as u32,
            thz_subcarriers: config.thz.subcarriers as u32,
            thz_antennas: config.thz.array.num_elements() as u32,
            max_paths: config.thz.max_paths as u32,
        }
    }

    /// Confirms the header matches the dims a config implies; the error
    /// spells out every differing field.
    pub fn check_against_config(&self, config: &ScenarioConfig) -> Result<(), CoreError> {
        let expect = DatasetHeader::from_config(config, self.num_samples);
        let mut diffs = Vec::new();
        let pairs = [
            ("K_s", self.sub6_subcarriers, expect.sub6_subcarriers),
            ("N_s", self.sub6_antennas, expect.sub6_antennas),
            ("K_t", self.thz_subcarriers, expect.thz_subcarriers),
            ("N_t", self.thz_antennas, expect.thz_antennas),
            ("L", self.max_paths, expect.max_paths),
        ];
        for (name, found, expected) in pairs {
            if found != expected {
                diffs.push(format!("{name}: expected {expected}, found {found}"));
            }
        }
        if diffs.is_empty() {
            Ok(())
        } else {
            Err(CoreError::format(format!(
                "dataset header does not match the configuration: {}",
                diffs.join(", ")
            )))
        }
    }
}

/// One stored record: a generated sample plus its (optional) beam label.
#[derive(Debug, Clone)]
pub struct DatasetSample {
    pub h_sub6: FrequencyChannel,
    pub h_sub6_true: FrequencyChannel,
    pub thz_factors: ChannelFactorSet,
    pub h_thz_true: FrequencyChannel,
    pub user_position: Point3,
    pub beam_label: Option<u32>,
}

impl DatasetSample {
    pub fn from_dual_band(sample: DualBandSample) -> Self {
        DatasetSample {
            h_sub6: sample.h_sub6,
            h_sub6_true: sample.h_sub6_true,
            thz_factors: sample.thz_factors,
            h_thz_true: sample.h_thz_true,
            user_position: sample.user_position,
            beam_label: None,
        }
    }
}

fn write_channel<W: Write>(w: &mut W, h: &FrequencyChannel) -> Result<(), CoreError> {
    for z in h.entries() {
        w.write_f32::<LittleEndian>(z.re as f32)?;
        w.write_f32::<LittleEndian>(z.im as f32)?;
    }
    Ok(())
}

fn read_channel<R: Read>(
    r: &mut R,
    band: Band,
    carrier_hz: f64,
    bandwidth_hz: f64,
    subcarriers: usize,
    antennas: usize,
) -> Result<FrequencyChannel, CoreError> {
    let mut entries = Vec::with_capacity(subcarriers * antennas);
    for _ in 0..subcarriers * antennas {
        let re = r.read_f32::<LittleEndian>()? as f64;
        let im = r.read_f32::<LittleEndian>()? as f64;
        entries.push(Complex64::new(re, im));
    }
    FrequencyChannel::from_entries(band, carrier_hz, bandwidth_hz, subcarriers, antennas, entries)
}

/// Writes a dataset file; the header dims come from the config.
pub fn write_dataset(
    path: &Path,
    config: &ScenarioConfig,
    samples: &[DatasetSample],
) -> Result<(), CoreError> {
    let header = DatasetHeader::from_config(config, samples.len() as u64);
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(DATASET_MAGIC)?;
    w.write_u32::<LittleEndian>(header.version)?;
    w.write_u64::<LittleEndian>(header.num_samples)?;
    w.write_u32::<LittleEndian>(header.sub6_subcarriers)?;
    w.write_u32::<LittleEndian>(header.sub6_antennas)?;
    w.write_u32::<LittleEndian>(header.thz_subcarriers)?;
    w.write_u32::<LittleEndian>(header.thz_antennas)?;
    w.write_u32::<LittleEndian>(header.max_paths)?;
    for s in samples {
        write_channel(&mut w, &s.h_sub6)?;
        write_channel(&mut w, &s.h_sub6_true)?;
        let flat = s.thz_factors.flatten();
        debug_assert_eq!(flat.len(), header.max_paths as usize * FACTOR_COUNT);
        for v in flat {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
        write_channel(&mut w, &s.h_thz_true)?;
        w.write_u32::<LittleEndian>(s.beam_label.unwrap_or(LABEL_UNSET))?;
        w.write_f32::<LittleEndian>(s.user_position.x as f32)?;
        w.write_f32::<LittleEndian>(s.user_position.y as f32)?;
        w.write_f32::<LittleEndian>(s.user_position.z as f32)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dataset file. Band metadata (carriers/bandwidths) is not stored
/// in the file and is taken from the config; the header dims must match it.
pub fn read_dataset(
    path: &Path,
    config: &ScenarioConfig,
) -> Result<(DatasetHeader, Vec<DatasetSample>), CoreError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut magic = [0u8; 7];
    r.read_exact(&mut magic)?;
    if &magic != DATASET_MAGIC {
        return Err(CoreError::format(format!(
            "bad dataset magic {magic:?}, expected {DATASET_MAGIC:?}"
        )));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != DATASET_VERSION {
        return Err(CoreError::format(format!(
            "unsupported dataset version {version}, expected {DATASET_VERSION}"
        )));
    }
    let header = DatasetHeader {
        version,
        num_samples: r.read_u64::<LittleEndian>()?,
        sub6_subcarriers: r.read_u32::<LittleEndian>()?,
        sub6_antennas: r.read_u32::<LittleEndian>()?,
        thz_subcarriers: r.read_u32::<LittleEndian>()?,
        thz_antennas: r.read_u32::<LittleEndian>()?,
        max_paths: r.read_u32::<LittleEndian>()?,
    };
    header.check_against_config(config)?;
    let (ks, ns) = (header.sub6_subcarriers as usize, header.sub6_antennas as usize);
    let (kt, nt) = (header.thz_subcarriers as usize, header.thz_antennas as usize);
    let l = header.max_paths as usize;
    let mut samples = Vec::with_capacity(header.num_samples as usize);
    for _ in 0..header.num_samples {
        let h_sub6 = read_channel(
            &mut r,
            Band::Sub6,
            config.sub6.carrier_hz,
            config.sub6.bandwidth_hz,
            ks,
            ns,
        )?;
        let h_sub6_true = read_channel(
            &mut r,
            Band::Sub6,
            config.sub6.carrier_hz,
            config.sub6.bandwidth_hz,
            ks,
            ns,
        )?;
        let mut rows = Vec::with_capacity(l);
        for _ in 0..l {
            let mut row = [0.0f64; FACTOR_COUNT];
            for v in row.iter_mut() {
                *v = r.read_f32::<LittleEndian>()? as f64;
            }
            rows.push(PathFactors::from_row(&row));
        }
        let h_thz_true = read_channel(
            &mut r,
            Band::Thz,
            config.thz.carrier_hz,
            config.thz.bandwidth_hz,
            kt,
            nt,
        )?;
        let label = r.read_u32::<LittleEndian>()?;
        let x = r.read_f32::<LittleEndian>()? as f64;
        let y = r.read_f32::<LittleEndian>()? as f64;
        let z = r.read_f32::<LittleEndian>()? as f64;
        samples.push(DatasetSample {
            h_sub6,
            h_sub6_true,
            thz_factors: ChannelFactorSet::from_rows(rows),
            h_thz_true,
            user_position: Point3::new(x, y, z),
            beam_label: if label == LABEL_UNSET { None } else { Some(label) },
        });
    }
    Ok((header, samples))
}

//! Per-path channel factors, the unit of supervision for the estimator.

use std::f64::consts::PI;

/// Number of scalar factors carried per path.
pub const FACTOR_COUNT: usize = 7;

/// The 7 per-path channel factors.
///
/// `pathloss` is a linear amplitude gain, `toa` is in seconds and all angles
/// are in radians. Azimuths and phase live in [-pi, pi), elevations in
/// [-pi/2, pi/2].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PathFactors {
    pub pathloss: f64,
    pub toa: f64,
    pub phase: f64,
    pub aoa_az: f64,
    pub aoa_el: f64,
    pub aod_az: f64,
    pub aod_el: f64,
}

impl PathFactors {
    /// All-zero factors, used as padding rows.
    pub fn zero() -> Self {
        PathFactors::default()
    }

    pub fn is_zero(&self) -> bool {
        *self == PathFactors::default()
    }

    /// Factors in their canonical storage order.
    pub fn to_row(&self) -> [f64; FACTOR_COUNT] {
        [
            self.pathloss,
            self.toa,
            self.phase,
            self.aoa_az,
            self.aoa_el,
            self.aod_az,
            self.aod_el,
        ]
    }

    pub fn from_row(row: &[f64]) -> Self {
        assert_eq!(row.len(), FACTOR_COUNT);
        PathFactors {
            pathloss: row[0],
            toa: row[1],
            phase: row[2],
            aoa_az: row[3],
            aoa_el: row[4],
            aod_az: row[5],
            aod_el: row[6],
        }
    }

    /// Checks the per-field range invariants.
    pub fn check_ranges(&self) -> Result<(), String> {
        let mut problems = Vec::new();
        if !(self.pathloss >= 0.0) {
            problems.push(format!("pathloss {} < 0", self.pathloss));
        }
        if !(self.toa >= 0.0) {
            problems.push(format!("toa {} < 0", self.toa));
        }
        for (name, v) in [
            ("phase", self.phase),
            ("aoa_az", self.aoa_az),
            ("aod_az", self.aod_az),
        ] {
            if !(-PI..PI).contains(&v) {
                problems.push(format!("{name} {v} outside [-pi, pi)"));
            }
        }
        for (name, v) in [("aoa_el", self.aoa_el), ("aod_el", self.aod_el)] {
            if !(-PI / 2.0..=PI / 2.0).contains(&v) {
                problems.push(format!("{name} {v} outside [-pi/2, pi/2]"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(problems.join("; "))
        }
    }
}

/// Human-readable names of the 7 factor columns, in storage order.
pub const FACTOR_NAMES: [&str; FACTOR_COUNT] = [
    "pathloss", "toa", "phase", "aoa_az", "aoa_el", "aod_az", "aod_el",
];

/// A fixed-length, pathloss-sorted list of path factors.
///
/// Rows are sorted by descending pathloss; rows at index `>= active_count`
/// are all-zero padding up to the configured path budget.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelFactorSet {
    paths: Vec<PathFactors>,
    active_count: usize,
}

impl ChannelFactorSet {
    /// Builds a set from raw paths: sorts by descending pathloss, keeps the
    /// strongest `budget` paths and pads with zero rows.
    pub fn from_paths(mut paths: Vec<PathFactors>, budget: usize) -> Self {
        paths.sort_by(|a, b| b.pathloss.partial_cmp(&a.pathloss).unwrap());
        paths.truncate(budget);
        let active_count = paths.len();
        paths.resize(budget, PathFactors::zero());
        ChannelFactorSet {
            paths,
            active_count,
        }
    }

    /// Rebuilds a set from stored rows; rows that are all-zero at the tail
    /// are treated as padding.
    pub fn from_rows(rows: Vec<PathFactors>) -> Self {
        let mut active_count = rows.len();
        while active_count > 0 && rows[active_count - 1].is_zero() {
            active_count -= 1;
        }
        ChannelFactorSet {
            paths: rows,
            active_count,
        }
    }

    pub fn budget(&self) -> usize {
        self.paths.len()
    }

    pub fn active_count(&self) -> usize {
        self.active_count
    }

    pub fn paths(&self) -> &[PathFactors] {
        &self.paths
    }

    pub fn active_paths(&self) -> &[PathFactors] {
        &self.paths[..self.active_count]
    }

    /// Flattens to a row-major `budget * 7` vector (path-major).
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.paths.len() * FACTOR_COUNT);
        for p in &self.paths {
            out.extend_from_slice(&p.to_row());
        }
        out
    }

    /// Verifies the ordering and padding invariants.
    pub fn check_invariants(&self) -> Result<(), String> {
        for w in self.paths[..self.active_count].windows(2) {
            if w[0].pathloss < w[1].pathloss {
                return Err(format!(
                    "paths not sorted by descending pathloss: {} < {}",
                    w[0].pathloss, w[1].pathloss
                ));
            }
        }
        for (i, p) in self.paths.iter().enumerate().skip(self.active_count) {
            if !p.is_zero() {
                return Err(format!("padding row {i} is not all-zero"));
            }
        }
        for (i, p) in self.active_paths().iter().enumerate() {
            p.check_ranges().map_err(|e| format!("path {i}: {e}"))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(pathloss: f64) -> PathFactors {
        PathFactors {
            pathloss,
            toa: 1e-8,
            ..PathFactors::default()
        }
    }

    #[test]
    fn sorts_truncates_and_pads() {
        let set = ChannelFactorSet::from_paths(vec![path(0.1), path(0.7), path(0.3)], 4);
        assert_eq!(set.active_count(), 3);
        assert_eq!(set.budget(), 4);
        assert_eq!(set.paths()[0].pathloss, 0.7);
        assert_eq!(set.paths()[1].pathloss, 0.3);
        assert_eq!(set.paths()[2].pathloss, 0.1);
        assert!(set.paths()[3].is_zero());
        set.check_invariants().unwrap();

        let strongest_two = ChannelFactorSet::from_paths(vec![path(0.1), path(0.7), path(0.3)], 2);
        assert_eq!(strongest_two.active_count(), 2);
        assert_eq!(strongest_two.paths()[1].pathloss, 0.3);
    }

    #[test]
    fn flatten_round_trips_through_rows() {
        let set = ChannelFactorSet::from_paths(vec![path(0.5), path(0.2)], 3);
        let flat = set.flatten();
        assert_eq!(flat.len(), 21);
        let rows: Vec<PathFactors> = flat.chunks(FACTOR_COUNT).map(PathFactors::from_row).collect();
        let back = ChannelFactorSet::from_rows(rows);
        assert_eq!(back, set);
    }
}

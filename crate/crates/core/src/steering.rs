//! Antenna lattice geometry and plane-wave steering vectors.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A rectangular antenna lattice with `nx * ny * nz` elements.
///
/// Element index varies fastest along x, then y, then z; spacing is given in
/// carrier wavelengths and applies to all three axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayGeometry {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    /// Element spacing in carrier wavelengths.
    pub spacing_wavelengths: f64,
}

impl ArrayGeometry {
    pub fn new(nx: usize, ny: usize, nz: usize, spacing_wavelengths: f64) -> Self {
        ArrayGeometry {
            nx,
            ny,
            nz,
            spacing_wavelengths,
        }
    }

    /// A 1-D array along the y axis, the conventional uniform linear array.
    pub fn linear_y(n: usize, spacing_wavelengths: f64) -> Self {
        ArrayGeometry::new(1, n, 1, spacing_wavelengths)
    }

    /// Total element count.
    pub fn num_elements(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    /// Lattice position of a flat element index.
    pub fn lattice_position(&self, index: usize) -> (usize, usize, usize) {
        debug_assert!(index < self.num_elements());
        let px = index % self.nx;
        let py = (index / self.nx) % self.ny;
        let pz = index / (self.nx * self.ny);
        (px, py, pz)
    }
}

/// Plane-wave steering vector for a wave from azimuth `az`, elevation `el`.
///
/// The entry of the element at lattice position `(px, py, pz)` is
/// `exp(j * 2 pi * spacing * (px cos(el) cos(az) + py cos(el) sin(az) + pz sin(el)))`.
/// Entries are unnormalized (all of modulus 1).
pub fn steering_vector(geometry: &ArrayGeometry, az: f64, el: f64) -> Vec<Complex64> {
    let n = geometry.num_elements();
    let kx = geometry.spacing_wavelengths * el.cos() * az.cos();
    let ky = geometry.spacing_wavelengths * el.cos() * az.sin();
    let kz = geometry.spacing_wavelengths * el.sin();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (px, py, pz) = geometry.lattice_position(i);
        let phase = 2.0 * PI * (px as f64 * kx + py as f64 * ky + pz as f64 * kz);
        out.push(Complex64::from_polar(1.0, phase));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadside_linear_y_is_all_ones() {
        let geom = ArrayGeometry::linear_y(5, 0.5);
        let v = steering_vector(&geom, 0.0, 0.0);
        for z in v {
            assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn broadside_x_axis_alternates() {
        // az = 0, el = 0, spacing 0.5 gives exp(j pi px) along x
        let geom = ArrayGeometry::new(4, 1, 1, 0.5);
        let v = steering_vector(&geom, 0.0, 0.0);
        for (i, z) in v.iter().enumerate() {
            let expect = Complex64::from_polar(1.0, PI * i as f64);
            assert!((z - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn endfire_half_wavelength_pair() {
        let geom = ArrayGeometry::linear_y(2, 0.5);
        let v = steering_vector(&geom, PI / 2.0, 0.0);
        assert!((v[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((v[1] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn planar_matches_per_element_loop_oracle() {
        let geom = ArrayGeometry::new(2, 2, 1, 0.5);
        let (az, el) = (0.3, 0.2);
        let got = steering_vector(&geom, az, el);
        // independent loop over lattice positions, assembling the flat index
        // the other way around
        let mut idx = 0;
        for pz in 0..geom.nz {
            for py in 0..geom.ny {
                for px in 0..geom.nx {
                    let phase = 2.0
                        * PI
                        * geom.spacing_wavelengths
                        * (px as f64 * el.cos() * az.cos()
                            + py as f64 * el.cos() * az.sin()
                            + pz as f64 * el.sin());
                    let expect = Complex64::new(phase.cos(), phase.sin());
                    assert!(
                        (got[idx] - expect).norm() < 1e-12,
                        "element ({px},{py},{pz})"
                    );
                    assert!((got[idx].norm() - 1.0).abs() < 1e-14);
                    idx += 1;
                }
            }
        }
    }
}

//! Per-path amplitude gain: a power-law term referenced to the free-space
//! amplitude at 1 m, times an exponential molecular-absorption term.

use std::f64::consts::PI;

use crate::error::CoreError;
use crate::geom::SPEED_OF_LIGHT;

/// Linear amplitude gain of a path of the given length.
///
/// The power-law term is `(c / (4 pi f)) * r^(-n/2)` — the free-space
/// amplitude at 1 m scaled by the configured exponent `n` — and the
/// absorption term is `exp(-kappa * r / 2)`; absorption acts on power as
/// `exp(-kappa * r)`, hence the half factor in amplitude.
pub fn pathloss(
    distance_m: f64,
    pathloss_exponent: f64,
    absorption_coeff: f64,
    carrier_hz: f64,
) -> Result<f64, CoreError> {
    if !(distance_m > 0.0) {
        return Err(CoreError::domain(format!(
            "pathloss requires distance > 0, got {distance_m}"
        )));
    }
    if !(carrier_hz > 0.0) {
        return Err(CoreError::domain(format!(
            "pathloss requires carrier > 0 Hz, got {carrier_hz}"
        )));
    }
    if absorption_coeff < 0.0 {
        return Err(CoreError::domain(format!(
            "pathloss requires absorption_coeff >= 0, got {absorption_coeff}"
        )));
    }
    let reference_1m = SPEED_OF_LIGHT / (4.0 * PI * carrier_hz);
    let power_law = reference_1m * distance_m.powf(-pathloss_exponent / 2.0);
    let absorption = (-absorption_coeff * distance_m / 2.0).exp();
    Ok(power_law * absorption)
}

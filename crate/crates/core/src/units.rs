// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Unit conventions.
//!
//! Time is in microseconds and every rate or coupling is an angular frequency
//! in rad/us. Configuration values are written as `frequency / 2pi` in MHz, so
//! `5.0` means gamma = 2pi * 5 rad/us.

use std::f64::consts::TAU;

/// Reduced Planck constant in ueV * us.
pub const HBAR_UEV_US: f64 = 6.582_119_569e-4;

/// Bohr magneton in ueV / T.
pub const BOHR_MAGNETON_UEV_PER_T: f64 = 57.883_818_060;

/// `f / 2pi` in MHz to angular frequency in rad/us.
#[inline]
pub fn mhz_2pi(value: f64) -> f64 {
    TAU * value
}

/// Angular frequency in rad/us to `f / 2pi` in MHz.
#[inline]
pub fn to_mhz_2pi(omega: f64) -> f64 {
    omega / TAU
}

/// `f / 2pi` in kHz to rad/us.
#[inline]
pub fn khz_2pi(value: f64) -> f64 {
    TAU * value * 1e-3
}

/// Energy in ueV to angular frequency in rad/us.
#[inline]
pub fn uev_to_rad_per_us(energy_uev: f64) -> f64 {
    energy_uev / HBAR_UEV_US
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn round_trip() {
        assert_relative_eq!(to_mhz_2pi(mhz_2pi(1.3)), 1.3, max_relative = 1e-15);
        assert_relative_eq!(khz_2pi(2.6), mhz_2pi(0.0026), max_relative = 1e-15);
    }

    #[test]
    fn microelectronvolt_is_about_1519_rad_per_us() {
        assert_relative_eq!(uev_to_rad_per_us(1.0), 1_519.267_447, max_relative = 1e-8);
    }
}

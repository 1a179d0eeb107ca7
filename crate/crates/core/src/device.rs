// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Node parameters from physical nanotube quantities.
//!
//! Lengths are in nm, the zero-point amplitude in pm, energies in µeV and
//! frequencies in rad/µs.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::units::{uev_to_rad_per_us, BOHR_MAGNETON_UEV_PER_T};

/// Mode shape `f(z)` of the flexural resonance on `[0, L]`, scaled so `max |f| = 1`.
pub trait PhononWaveform: Send + Sync + fmt::Debug {
    fn name(&self) -> String;
    fn value(&self, z_nm: f64) -> f64;
    /// `df/dz` in nm^-1.
    fn derivative(&self, z_nm: f64) -> f64;
}

/// `sin(n pi z / L)`, the clamped-string stand-in for the flexural mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineMode {
    pub harmonic: u32,
    pub length_nm: f64,
}

impl SineMode {
    pub fn fundamental(length_nm: f64) -> Self {
        Self {
            harmonic: 1,
            length_nm,
        }
    }

    fn k(&self) -> f64 {
        self.harmonic as f64 * PI / self.length_nm
    }
}

impl PhononWaveform for SineMode {
    fn name(&self) -> String {
        format!("sin({} pi z / L)", self.harmonic)
    }

    fn value(&self, z_nm: f64) -> f64 {
        (self.k() * z_nm).sin()
    }

    fn derivative(&self, z_nm: f64) -> f64 {
        self.k() * (self.k() * z_nm).cos()
    }
}

#[derive(Debug, Clone)]
pub struct DeviceSpec {
    pub delta_so_uev: f64,
    pub g_s: f64,
    pub mu0_pm: f64,
    /// Inverse squared width of `n(z) = exp(-A (z - z_c)^2)`, nm^-2.
    pub a_nm2: f64,
    pub z_c_nm: f64,
    pub length_nm: f64,
    pub waveform: Arc<dyn PhononWaveform>,
    pub omega_p: f64,
    pub q_m: f64,
}

impl DeviceSpec {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("A", self.a_nm2),
            ("tube_length", self.length_nm),
            ("Q_m", self.q_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be positive and finite, got {v}"),
                });
            }
        }
        let finite = [
            ("Delta_so", self.delta_so_uev),
            ("g_s", self.g_s),
            ("mu0", self.mu0_pm),
            ("omega_p", self.omega_p),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if !(0.0..=self.length_nm).contains(&self.z_c_nm) {
            return Err(Error::CenterOutOfRange {
                z_c_nm: self.z_c_nm,
                length_nm: self.length_nm,
            });
        }
        Ok(())
    }
}

/// Panels used by the first composite Simpson pass.
pub const INITIAL_PANELS: usize = 64;
/// Panel count at which refinement gives up.
pub const MAX_PANELS: usize = 1 << 22;
/// Relative change between successive refinements accepted as converged.
pub const QUADRATURE_RTOL: f64 = 1e-8;

/// Gaussian profile cut off beyond this many `1/sqrt(A)` from the center.
const PROFILE_WIDTHS: f64 = 12.0;

fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Support of the density profile clipped to the tube.
fn profile_support(spec: &DeviceSpec) -> (f64, f64) {
    let half = PROFILE_WIDTHS / spec.a_nm2.sqrt();
    (
        (spec.z_c_nm - half).max(0.0),
        (spec.z_c_nm + half).min(spec.length_nm),
    )
}

/// `<f'>` with a fixed number of Simpson panels.
pub fn averaged_waveform_derivative_with_panels(spec: &DeviceSpec, panels: usize) -> Result<f64> {
    spec.validate()?;
    let (a, b) = profile_support(spec);
    let n = |z: f64| (-spec.a_nm2 * (z - spec.z_c_nm).powi(2)).exp();
    let num = simpson(|z| spec.waveform.derivative(z) * n(z), a, b, panels);
    let den = simpson(n, a, b, panels);
    Ok(num / den)
}

/// `<f'> = int f'(z) n(z) dz / int n(z) dz` by composite Simpson with panel
/// doubling until two passes agree to [`QUADRATURE_RTOL`].
///
/// Agreement is judged against `int |f'| n / int n`, so a vanishing average
/// (dot at an antinode) still converges.
pub fn averaged_waveform_derivative(spec: &DeviceSpec) -> Result<f64> {
    spec.validate()?;
    let (a, b) = profile_support(spec);
    let n = |z: f64| (-spec.a_nm2 * (z - spec.z_c_nm).powi(2)).exp();
    let mut panels = INITIAL_PANELS;
    let pass = |p: usize| {
        let num = simpson(|z| spec.waveform.derivative(z) * n(z), a, b, p);
        let abs = simpson(|z| spec.waveform.derivative(z).abs() * n(z), a, b, p);
        let den = simpson(n, a, b, p);
        (num / den, abs / den)
    };
    let (mut prev, _) = pass(panels);
    while panels < MAX_PANELS {
        panels *= 2;
        let (cur, scale) = pass(panels);
        if (cur - prev).abs() <= QUADRATURE_RTOL * cur.abs().max(scale) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(Error::Quadrature { panels })
}

/// `lambda = Delta_so <f'> mu0 / (2 sqrt 2)` in rad/µs, from `<f'>` in nm^-1.
pub fn coupling_from_average(delta_so_uev: f64, avg_derivative_nm: f64, mu0_pm: f64) -> f64 {
    uev_to_rad_per_us(delta_so_uev) * avg_derivative_nm * (mu0_pm * 1e-3) / (2.0 * SQRT_2)
}

pub fn spin_phonon_coupling(spec: &DeviceSpec) -> Result<f64> {
    let avg = averaged_waveform_derivative(spec)?;
    Ok(coupling_from_average(spec.delta_so_uev, avg, spec.mu0_pm))
}

/// Dot center moved by a longitudinal field, `z_c0 + chi E_z`.
pub fn tuned_center(
    z_c0_nm: f64,
    chi_nm_per_v_um: f64,
    e_z_v_um: f64,
    length_nm: f64,
) -> Result<f64> {
    let z = z_c0_nm + chi_nm_per_v_um * e_z_v_um;
    if !z.is_finite() || !(0.0..=length_nm).contains(&z) {
        return Err(Error::CenterOutOfRange {
            z_c_nm: z,
            length_nm,
        });
    }
    Ok(z)
}

/// `gamma_r = omega_p / Q_m`.
pub fn mechanical_damping(omega_p: f64, q_m: f64) -> Result<f64> {
    if !(q_m > 0.0) {
        return Err(Error::InvalidParameter {
            name: "Q_m",
            reason: format!("must be positive, got {q_m}"),
        });
    }
    Ok(omega_p / q_m)
}

/// Field at which Zeeman and spin-orbit splittings match, in tesla.
pub fn b_star(delta_so_uev: f64, g_s: f64) -> f64 {
    delta_so_uev / (g_s * BOHR_MAGNETON_UEV_PER_T)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{khz_2pi, mhz_2pi, to_mhz_2pi};
    use approx::assert_relative_eq;

    fn spec(z_c: f64, a: f64) -> DeviceSpec {
        let l = 800.0;
        DeviceSpec {
            delta_so_uev: 370.0,
            g_s: 2.0,
            mu0_pm: 2.0,
            a_nm2: a,
            z_c_nm: z_c,
            length_nm: l,
            waveform: Arc::new(SineMode::fundamental(l)),
            omega_p: mhz_2pi(360.0),
            q_m: 140_000.0,
        }
    }

    /// Midpoint sums over the whole tube, 10^6 points.
    fn riemann(spec: &DeviceSpec) -> f64 {
        let n = 1_000_000;
        let h = spec.length_nm / n as f64;
        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..n {
            let z = (i as f64 + 0.5) * h;
            let w = (-spec.a_nm2 * (z - spec.z_c_nm).powi(2)).exp();
            num += spec.waveform.derivative(z) * w;
            den += w;
        }
        num / den
    }

    #[test]
    fn matches_brute_force_sum() {
        let s = spec(200.0, (10.0f64 / 800.0).powi(2));
        let got = averaged_waveform_derivative(&s).unwrap();
        assert_relative_eq!(got, riemann(&s), max_relative = 1e-6);
    }

    #[test]
    fn antinode_average_vanishes() {
        let s = spec(400.0, 1e-2);
        let got = averaged_waveform_derivative(&s).unwrap();
        assert!(got.abs() < 1e-12, "{got}");
        assert_eq!(coupling_from_average(370.0, 0.0, 2.0), 0.0);
    }

    #[test]
    fn narrow_profile_samples_the_derivative() {
        let s = spec(123.0, 1e3);
        let f = SineMode::fundamental(800.0);
        assert_relative_eq!(
            averaged_waveform_derivative(&s).unwrap(),
            f.derivative(123.0),
            max_relative = 1e-6
        );
    }

    #[test]
    fn panel_doubling_is_stable_at_default() {
        let s = spec(200.0, (10.0f64 / 800.0).powi(2));
        let a = averaged_waveform_derivative_with_panels(&s, 1024).unwrap();
        let b = averaged_waveform_derivative_with_panels(&s, 2048).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-6);
    }

    #[test]
    fn coupling_is_the_hand_product() {
        let s = spec(200.0, (10.0f64 / 800.0).powi(2));
        let avg = averaged_waveform_derivative(&s).unwrap();
        let hand = 370.0 / 6.582119569e-4 * avg * 2.0e-3 / (2.0 * 2f64.sqrt());
        assert_relative_eq!(
            spin_phonon_coupling(&s).unwrap(),
            hand,
            max_relative = 1e-12
        );
        let mut s2 = s.clone();
        s2.mu0_pm *= 2.0;
        assert_relative_eq!(
            spin_phonon_coupling(&s2).unwrap(),
            2.0 * hand,
            max_relative = 1e-12
        );
    }

    #[test]
    fn coupling_monotone_along_field_sweep() {
        // f' = (pi/L) cos(pi z/L) decreases on the left half of the tube.
        let mut last = f64::INFINITY;
        for k in 0..=20 {
            let z = tuned_center(100.0, 1.5, k as f64 * 5.0, 800.0).unwrap();
            let lam = spin_phonon_coupling(&spec(z, 1e-3)).unwrap();
            assert!(lam < last);
            last = lam;
        }
    }

    #[test]
    fn center_shift_is_linear_and_checked() {
        assert_eq!(tuned_center(100.0, 1.0, 0.0, 800.0).unwrap(), 100.0);
        assert_eq!(tuned_center(100.0, 1.0, 5.0, 800.0).unwrap(), 105.0);
        assert!(matches!(
            tuned_center(790.0, 1.0, 20.0, 800.0),
            Err(Error::CenterOutOfRange { .. })
        ));
    }

    #[test]
    fn damping_of_the_reference_resonator() {
        let g = mechanical_damping(mhz_2pi(360.0), 140_000.0).unwrap();
        assert_relative_eq!(to_mhz_2pi(g) * 1e3, 2.5714, epsilon = 1e-4);
        assert!((g - khz_2pi(2.6)).abs() / khz_2pi(2.6) < 0.02);
        assert!(mechanical_damping(1.0, 0.0).is_err());
        assert!(mechanical_damping(1.0, 1e300).unwrap() < 1e-299);
    }

    #[test]
    fn b_star_scale() {
        // 370 µeV at g = 2 is a few tesla.
        assert_relative_eq!(b_star(370.0, 2.0), 3.196, epsilon = 1e-3);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(averaged_waveform_derivative(&spec(900.0, 1.0)).is_err());
        assert!(averaged_waveform_derivative(&spec(100.0, 0.0)).is_err());
    }
}

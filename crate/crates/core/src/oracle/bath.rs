// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! The fiber continuum replaced by `N` discrete modes, evolved exactly in the
//! single-excitation sector together with the node.
//!
//! Bath modes are written in the frame of the cavity frequency, so mode `j`
//! rotates at its detuning `Delta_j`:
//! `d b_j/dt = -i Delta_j b_j - i kappa_j beta_c` and the cavity gains
//! `-i sum_j kappa_j b_j`. No `gamma/2` term is put in by hand.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::{run_substepped, SubstepClock};
use crate::dynamics::Trajectory;
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{Interpolation, TimeGrid};
use crate::model::{rhs_unchecked, NodeParams, NodeState};
use crate::scheme::OdeSystem;

const I: C64 = C64::new(0.0, 1.0);

/// Refuse baths with more modes than this.
pub const MAX_BATH_MODES: usize = 250_000;

/// Bandwidths below this multiple of `gamma` get a warning.
pub const MIN_BANDWIDTH_RATIO: f64 = 50.0;

/// Default bound on `max |Delta_j| * h` for the inner steps.
pub const DEFAULT_PHASE_STEP: f64 = 0.05;

/// Flat band of `N` equally spaced modes centred on the cavity frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteBath {
    pub detunings: Vec<f64>,
    pub kappas: Vec<f64>,
    pub spacing: f64,
    pub bandwidth: f64,
}

impl DiscreteBath {
    /// `kappa_j = sqrt(gamma * d_omega / 2 pi)` with `d_omega = B / (N - 1)`.
    ///
    /// The two edge modes carry half that weight (`kappa^2 / 2`), so the modes
    /// sample the band like the trapezoid rule and its width is exactly `B`
    /// for every `N`. With full edge weights the band would be `B + d_omega`
    /// wide and shrink as `N` grows.
    pub fn flat(gamma: f64, bandwidth: f64, modes: usize) -> Result<Self> {
        if modes < 2 {
            return Err(Error::InvalidParameter {
                name: "modes",
                reason: format!("need at least 2 bath modes, got {modes}"),
            });
        }
        if modes > MAX_BATH_MODES {
            return Err(Error::BathTooLarge {
                modes,
                limit: MAX_BATH_MODES,
            });
        }
        if !(bandwidth > 0.0) || !bandwidth.is_finite() || !(gamma >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "bandwidth",
                reason: format!("need B > 0 and gamma >= 0, got B = {bandwidth}, gamma = {gamma}"),
            });
        }
        let spacing = bandwidth / (modes - 1) as f64;
        let kappa = (gamma * spacing / (2.0 * PI)).sqrt();
        let mut kappas = vec![kappa; modes];
        kappas[0] *= std::f64::consts::FRAC_1_SQRT_2;
        kappas[modes - 1] *= std::f64::consts::FRAC_1_SQRT_2;
        Ok(Self {
            detunings: (0..modes)
                .map(|j| -0.5 * bandwidth + j as f64 * spacing)
                .collect(),
            kappas,
            spacing,
            bandwidth,
        })
    }

    pub fn modes(&self) -> usize {
        self.detunings.len()
    }

    /// `2 pi sum_j kappa_j^2 / B`; equals `gamma` for a flat band.
    pub fn spectral_density(&self) -> f64 {
        let s: f64 = self.kappas.iter().map(|k| k * k).sum();
        2.0 * PI * s / self.bandwidth
    }

    /// Time after which the discrete spectrum revives, `2 pi / d_omega`.
    pub fn recurrence_time(&self) -> f64 {
        2.0 * PI / self.spacing
    }

    fn max_detuning(&self) -> f64 {
        self.detunings.iter().map(|d| d.abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathOptions {
    pub phase_step: f64,
}

impl Default for BathOptions {
    fn default() -> Self {
        Self {
            phase_step: DEFAULT_PHASE_STEP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BathRun {
    /// Node amplitudes on the outer grid, `alpha_out` rebuilt from the bath.
    pub trajectory: Trajectory,
    pub modes_final: Vec<C64>,
    /// Largest change of the total norm, node plus bath.
    pub norm_drift: f64,
    pub substeps: usize,
    pub warnings: Vec<String>,
}

struct BathSystem<'a> {
    inner: NodeParams,
    bath: &'a DiscreteBath,
    control: &'a Envelope,
    clock: SubstepClock,
}

impl OdeSystem for BathSystem<'_> {
    fn dim(&self) -> usize {
        3 + self.bath.modes()
    }

    fn eval(&self, step: usize, frac: f64, y: &[C64], dy: &mut [C64]) {
        let (k, f) = self.clock.locate(step, frac);
        let lambda = self.control.at_stage(k, f, Interpolation::Cubic);
        let node = NodeState::from_slice(&y[..3]);
        let d = rhs_unchecked(&node, &self.inner, lambda, C64::default());
        let bc = node.beta_c;
        let mut feed = C64::default();
        for (j, (b, db)) in y[3..].iter().zip(&mut dy[3..]).enumerate() {
            let kappa = self.bath.kappas[j];
            *db = -I * (*b * self.bath.detunings[j] + bc * kappa);
            feed += *b * kappa;
        }
        dy[0] = d.beta_q;
        dy[1] = d.beta_r;
        dy[2] = d.beta_c - I * feed;
    }
}

pub fn evolve_discrete_bath(
    initial: NodeState,
    params: &NodeParams,
    control: &Envelope,
    bath: &DiscreteBath,
    grid: &TimeGrid,
) -> Result<BathRun> {
    evolve_discrete_bath_with(
        initial,
        params,
        control,
        bath,
        grid,
        &BathOptions::default(),
    )
}

/// Exact evolution of node plus bath, starting from the bath vacuum.
///
/// `params.gamma` only labels the run; the coupling comes from `bath`.
pub fn evolve_discrete_bath_with(
    initial: NodeState,
    params: &NodeParams,
    control: &Envelope,
    bath: &DiscreteBath,
    grid: &TimeGrid,
    options: &BathOptions,
) -> Result<BathRun> {
    params.check_resonance()?;
    control.grid().ensure_matches(grid, "control")?;
    let mut warnings = Vec::new();
    if bath.bandwidth < MIN_BANDWIDTH_RATIO * params.gamma {
        warnings.push(format!(
            "bandwidth {:.4} rad/us is below {MIN_BANDWIDTH_RATIO} gamma",
            bath.bandwidth
        ));
    }
    if bath.recurrence_time() < grid.duration() {
        warnings.push(format!(
            "bath revives after {:.4} us, inside the {:.4} us window",
            bath.recurrence_time(),
            grid.duration()
        ));
    }

    let rate = bath.max_detuning().max(params.fastest_rate());
    let substeps = ((grid.dt() * rate / options.phase_step).ceil() as usize).max(1);
    let sys = BathSystem {
        inner: NodeParams {
            gamma: 0.0,
            ..*params
        },
        bath,
        control,
        clock: SubstepClock { substeps },
    };
    let mut y = vec![C64::default(); sys.dim()];
    y[..3].copy_from_slice(&initial.to_array());
    let norm0: f64 = y.iter().map(|z| z.norm_sqr()).sum();
    let mut states = Vec::with_capacity(grid.len());
    let mut norm_drift: f64 = 0.0;
    run_substepped(&sys, &mut y, grid, substeps, |_, y| {
        states.push(NodeState::from_slice(&y[..3]));
        let norm: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        norm_drift = norm_drift.max((norm - norm0).abs());
    })?;
    let modes_final = y[3..].to_vec();

    let alpha_out = reconstruct_output(bath, &modes_final, grid);
    Ok(BathRun {
        trajectory: Trajectory {
            grid: *grid,
            params: *params,
            states,
            control: control.clone(),
            alpha_in: Envelope::zeros(*grid),
            alpha_out: Envelope::new(*grid, alpha_out)?,
        },
        modes_final,
        norm_drift,
        substeps,
        warnings,
    })
}

/// Field that left the node before `t_end`:
/// `alpha_out(t) = i sqrt(d_omega / 2 pi) sum_j b_j(t_end) exp(-i Delta_j (t - t_end))`.
fn reconstruct_output(bath: &DiscreteBath, modes: &[C64], grid: &TimeGrid) -> Vec<C64> {
    let n = grid.len();
    let dt = grid.dt();
    let mut out = vec![C64::default(); n];
    let scale = I * (bath.spacing / (2.0 * PI)).sqrt();
    for (j, &b) in modes.iter().enumerate() {
        let det = bath.detunings[j];
        let step = C64::from_polar(1.0, det * dt);
        let mut phasor = C64::default();
        for k in (0..n).rev() {
            // re-anchor now and then so rounding does not pile up
            if (n - 1 - k).is_multiple_of(1024) {
                phasor = b * scale * C64::from_polar(1.0, -det * (grid.time(k) - grid.t_end()));
            }
            out[k] += phasor;
            phasor *= step;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::integrate_node;
    use approx::assert_relative_eq;

    #[test]
    fn flat_band_has_the_markov_density() {
        let b = DiscreteBath::flat(3.0, 600.0, 101).unwrap();
        assert_relative_eq!(b.spectral_density(), 3.0, epsilon = 1e-12);
        assert_relative_eq!(
            2.0 * PI * b.kappas[1].powi(2) / b.spacing,
            3.0,
            epsilon = 1e-12
        );
        assert_relative_eq!(
            b.kappas[0].powi(2),
            0.5 * b.kappas[1].powi(2),
            epsilon = 1e-15
        );
        assert_relative_eq!(b.detunings[0], -300.0);
        assert_relative_eq!(b.detunings[100], 300.0, epsilon = 1e-9);
    }

    #[test]
    fn bath_size_is_checked() {
        assert!(DiscreteBath::flat(1.0, 10.0, 1).is_err());
        assert!(matches!(
            DiscreteBath::flat(1.0, 10.0, MAX_BATH_MODES + 1),
            Err(Error::BathTooLarge { .. })
        ));
    }

    #[test]
    fn silent_bath_is_a_closed_cavity() {
        let grid = TimeGrid::new(0.0, 2.0, 4000).unwrap();
        let p = NodeParams::from_mhz(1.0, 0.7);
        let bath = DiscreteBath::flat(0.0, 200.0, 16).unwrap();
        let lam = Envelope::constant(grid, C64::new(2.0, 0.0));
        let run = evolve_discrete_bath(NodeState::excited(), &p, &lam, &bath, &grid).unwrap();
        let closed = NodeParams { gamma: 0.0, ..p };
        let markov = integrate_node(
            NodeState::excited(),
            &closed,
            &lam,
            &Envelope::zeros(grid),
            &grid,
        )
        .unwrap();
        for (a, b) in run.trajectory.states.iter().zip(&markov.states) {
            assert!(a.max_deviation(b) < 1e-9, "{}", a.max_deviation(b));
        }
        assert!(run.modes_final.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn lossless_bath_run_is_unitary() {
        let gamma = crate::units::mhz_2pi(1.0);
        let grid = TimeGrid::new(0.0, 5.0 / gamma, 200).unwrap();
        let p = NodeParams::resonant(gamma, 0.0);
        let bath = DiscreteBath::flat(gamma, 200.0 * gamma, 1000).unwrap();
        let mut init = NodeState::ZERO;
        init.beta_c = C64::new(1.0, 0.0);
        let run = evolve_discrete_bath(init, &p, &Envelope::zeros(grid), &bath, &grid).unwrap();
        assert!(run.norm_drift < 1e-8, "drift {}", run.norm_drift);
        assert!(run.warnings.is_empty());
    }

    #[test]
    fn narrow_bath_warns() {
        let grid = TimeGrid::new(0.0, 1.0, 10).unwrap();
        let p = NodeParams::from_mhz(5.0, 1.0);
        let bath = DiscreteBath::flat(p.gamma, 10.0 * p.gamma, 8).unwrap();
        let run = evolve_discrete_bath(NodeState::ZERO, &p, &Envelope::zeros(grid), &bath, &grid)
            .unwrap();
        assert_eq!(run.warnings.len(), 2);
    }
}

// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Brute-force reference solvers for the two approximations behind the node
//! equations: Markov elimination of the fiber (discrete bath) and the
//! rotating-wave approximation (truncated Fock space).

pub mod bath;
pub mod compare;
pub mod nonrwa;

use std::fmt::Write as _;

use num_complex::Complex64 as C64;

pub use bath::{evolve_discrete_bath, BathRun, DiscreteBath};
pub use compare::{compare_envelopes, compare_trajectories, Deviation, TrajectoryDeviation};
pub use nonrwa::{evolve_nonrwa, FockTruncation, NonRwaRun};

use crate::dynamics::integrate_node;
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{NodeParams, NodeState};
use crate::scheme::{ButcherScheme, OdeSystem, Scheme, Workspace};
use crate::units::mhz_2pi;

/// Maps inner step indices onto the outer grid.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SubstepClock {
    pub substeps: usize,
}

impl SubstepClock {
    /// Outer step and fraction of the inner stage `(step, frac)`.
    pub fn locate(&self, step: usize, frac: f64) -> (usize, f64) {
        let k = step / self.substeps;
        let f = ((step % self.substeps) as f64 + frac) / self.substeps as f64;
        (k, f)
    }
}

/// RK4 with `substeps` inner steps per outer step; `record` sees every outer sample.
pub(crate) fn run_substepped(
    sys: &dyn OdeSystem,
    y: &mut [C64],
    grid: &TimeGrid,
    substeps: usize,
    mut record: impl FnMut(usize, &[C64]),
) -> Result<()> {
    let scheme = ButcherScheme::rk4();
    let h = grid.dt() / substeps as f64;
    let mut work = Workspace::default();
    record(0, y);
    for k in 0..grid.n_steps() {
        for s in 0..substeps {
            scheme.step(sys, k * substeps + s, h, y, &mut work);
        }
        if y.iter().any(|z| !z.is_finite()) {
            return Err(Error::Divergence {
                time_us: grid.time(k + 1),
            });
        }
        record(k + 1, y);
    }
    Ok(())
}

/// Knobs of the calibration suite; rates given as `/2 pi` in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSettings {
    pub gamma_mhz: f64,
    pub bath_modes: usize,
    /// Bath bandwidth in units of `gamma`.
    pub bandwidth_ratio: f64,
    /// Length of the decay run in units of `1/gamma`.
    pub decay_span: f64,
    pub markov_tol: f64,
    pub doubling_modes: Vec<usize>,
    pub omega_p_mhz: f64,
    pub coupling_mhz: f64,
    pub rwa_tol: f64,
    /// `omega_p / 2 pi` values for the scaling fit, spanning a decade.
    pub scaling_omega_mhz: Vec<f64>,
    pub slope_tol: f64,
    pub truncation: FockTruncation,
}

impl Default for CalibrationSettings {
    fn default() -> Self {
        Self {
            gamma_mhz: 1.0,
            bath_modes: 4000,
            bandwidth_ratio: 200.0,
            decay_span: 5.0,
            markov_tol: 1e-2,
            doubling_modes: vec![500, 1000, 2000, 4000],
            omega_p_mhz: 360.0,
            coupling_mhz: 1.0,
            rwa_tol: 1e-2,
            scaling_omega_mhz: vec![360.0, 720.0, 1440.0, 3600.0],
            slope_tol: 0.2,
            truncation: FockTruncation::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: String,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OracleReport {
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(
        &mut self,
        name: impl Into<String>,
        value: f64,
        limit: impl Into<String>,
        passed: bool,
    ) {
        self.checks.push(Check {
            name: name.into(),
            value,
            limit: limit.into(),
            passed,
        });
    }

    /// Plain-text table, one check per line.
    pub fn to_table(&self) -> String {
        let mut s = String::from("check\tvalue\tlimit\tstatus\n");
        for c in &self.checks {
            let _ = writeln!(
                s,
                "{}\t{:.6e}\t{}\t{}",
                c.name,
                c.value,
                c.limit,
                if c.passed { "pass" } else { "FAIL" }
            );
        }
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        s
    }

    /// `Err(OracleBreach)` naming every failed check.
    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            return Ok(self);
        }
        let failed: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{} = {:.3e} (limit {})", c.name, c.value, c.limit))
            .collect();
        Err(Error::OracleBreach(failed.join("; ")))
    }
}

/// Largest `|beta_c(t) - exp(-gamma t / 2)|` for a bare cavity decaying into
/// a flat bath of `modes` modes.
pub fn bare_decay_deviation(
    gamma: f64,
    bandwidth: f64,
    modes: usize,
    span: f64,
) -> Result<(f64, BathRun)> {
    let grid = TimeGrid::new(0.0, span / gamma, 500)?;
    let params = NodeParams::resonant(gamma, 0.0);
    let bath = DiscreteBath::flat(gamma, bandwidth, modes)?;
    let mut init = NodeState::ZERO;
    init.beta_c = C64::new(1.0, 0.0);
    let run = evolve_discrete_bath(init, &params, &Envelope::zeros(grid), &bath, &grid)?;
    let dev = grid
        .times()
        .zip(&run.trajectory.states)
        .map(|(t, s)| (s.beta_c - C64::new((-0.5 * gamma * t).exp(), 0.0)).norm())
        .fold(0.0, f64::max);
    Ok((dev, run))
}

/// Largest amplitude deviation between the full and the rotating-wave model
/// for a node driven by a constant `lambda = G`, starting excited.
pub fn rwa_deviation(
    gamma: f64,
    coupling: f64,
    omega_p: f64,
    trunc: FockTruncation,
) -> Result<(f64, NonRwaRun)> {
    let mut params = NodeParams::resonant(gamma, coupling);
    params.omega_p = omega_p;
    params.omega_q = omega_p;
    params.delta_c = omega_p;
    let grid = TimeGrid::new(0.0, 2.0 * std::f64::consts::PI / coupling, 400)?;
    let control = Envelope::constant(grid, C64::new(coupling, 0.0));
    let run = evolve_nonrwa(NodeState::excited(), &params, &control, trunc, &grid)?;
    let reference = integrate_node(
        NodeState::excited(),
        &params,
        &control,
        &Envelope::zeros(grid),
        &grid,
    )?;
    let [q, r, c] = compare::compare_states(&run.states, &reference.states, &grid)?;
    Ok((q.max.max(r.max).max(c.max), run))
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

/// Runs the Markov and rotating-wave calibrations.
pub fn run_calibration(settings: &CalibrationSettings) -> Result<OracleReport> {
    let mut report = OracleReport::default();
    let gamma = mhz_2pi(settings.gamma_mhz);
    let bandwidth = settings.bandwidth_ratio * gamma;

    let (dev, run) =
        bare_decay_deviation(gamma, bandwidth, settings.bath_modes, settings.decay_span)?;
    report.push(
        format!("markov_decay_linf[N={}]", settings.bath_modes),
        dev,
        format!("< {:e}", settings.markov_tol),
        dev < settings.markov_tol,
    );
    report.notes.extend(run.warnings);
    report.notes.push(format!(
        "bath norm drift {:.3e} over {} inner steps per sample",
        run.norm_drift, run.substeps
    ));

    let mut devs = Vec::new();
    for &n in &settings.doubling_modes {
        devs.push(bare_decay_deviation(gamma, bandwidth, n, settings.decay_span)?.0);
    }
    for (w, n) in devs.windows(2).zip(settings.doubling_modes.windows(2)) {
        report.push(
            format!("markov_doubling[{}->{}]", n[0], n[1]),
            w[1] - w[0],
            "<= 0",
            w[1] <= w[0],
        );
    }
    report.notes.push(format!(
        "decay deviation vs modes: {}",
        settings
            .doubling_modes
            .iter()
            .zip(&devs)
            .map(|(n, d)| format!("{n}:{d:.6e}"))
            .collect::<Vec<_>>()
            .join(" ")
    ));

    let silent = DiscreteBath {
        kappas: vec![0.0; 4],
        ..DiscreteBath::flat(gamma, bandwidth, 4)?
    };
    let grid = TimeGrid::new(0.0, 1.0, 10)?;
    let mut init = NodeState::ZERO;
    init.beta_c = C64::new(1.0, 0.0);
    let quiet = evolve_discrete_bath(
        init,
        &NodeParams::resonant(gamma, 0.0),
        &Envelope::zeros(grid),
        &silent,
        &grid,
    )?;
    let drift = quiet
        .trajectory
        .states
        .iter()
        .map(|s| (s.beta_c - init.beta_c).norm())
        .fold(0.0, f64::max);
    report.push("silent_bath_drift", drift, "< 1e-12", drift < 1e-12);

    let coupling = mhz_2pi(settings.coupling_mhz);
    let (dev, run) = rwa_deviation(
        gamma,
        coupling,
        mhz_2pi(settings.omega_p_mhz),
        settings.truncation,
    )?;
    report.push(
        format!("rwa_max_deviation[{} MHz]", settings.omega_p_mhz),
        dev,
        format!("< {:e}", settings.rwa_tol),
        dev < settings.rwa_tol,
    );
    report.notes.extend(run.warnings);
    report.notes.push(format!(
        "max population at the Fock cutoff {:.3e}",
        run.max_cutoff_population
    ));

    let mut errs = Vec::new();
    for &w in &settings.scaling_omega_mhz {
        errs.push(rwa_deviation(gamma, coupling, mhz_2pi(w), settings.truncation)?.0);
    }
    let slope = log_log_slope(&settings.scaling_omega_mhz, &errs);
    report.push(
        "rwa_error_slope",
        slope,
        format!("-1 +/- {}", settings.slope_tol),
        (slope + 1.0).abs() <= settings.slope_tol,
    );
    report.notes.push(format!(
        "rwa deviation vs omega_p/2pi: {}",
        settings
            .scaling_omega_mhz
            .iter()
            .zip(&errs)
            .map(|(w, d)| format!("{w}:{d:.6e}"))
            .collect::<Vec<_>>()
            .join(" ")
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_maps_inner_stages() {
        let c = SubstepClock { substeps: 4 };
        assert_eq!(c.locate(0, 0.0), (0, 0.0));
        assert_eq!(c.locate(5, 0.5), (1, 0.375));
        assert_eq!(c.locate(7, 1.0), (1, 1.0));
    }

    #[test]
    fn slope_of_a_power_law() {
        let x = [1.0, 2.0, 4.0, 10.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 / v).collect();
        assert!((log_log_slope(&x, &y) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_bath_breaches_the_tolerance() {
        let s = CalibrationSettings {
            bath_modes: 2,
            doubling_modes: vec![],
            scaling_omega_mhz: vec![360.0, 3600.0],
            ..Default::default()
        };
        let report = run_calibration(&s).unwrap();
        assert!(!report.passed());
        let err = report.into_result().unwrap_err();
        assert!(err.to_string().contains("markov_decay_linf[N=2]"));
    }
}

// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Control-pulse synthesis by inverting the lossless amplitude equations.
//!
//! Emission: the outgoing field is prescribed as `sin(theta) * target`, which
//! fixes `beta_c`, then `beta_r` from the cavity equation, `|beta_q|` from the
//! excitation budget and finally `lambda` from the phonon equation.
//! Absorption: the reflected field is forced to zero (impedance matching) and
//! the same chain is solved for the incoming packet.
//!
//! The pulse is always derived for the lossless node; the caller then drives
//! the lossy node with it.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;

use crate::dynamics::Trajectory;
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{self, TimeGrid};
use crate::model::{NodeParams, NodeState};

const I: C64 = C64::new(0.0, 1.0);

/// Below this `|beta_q|` the division is skipped and `lambda` set to zero.
pub const EPS_Q: f64 = 1e-6;

/// Absorption control stays off until this much energy has arrived.
pub const EPS_START: f64 = 1e-6;

/// Most negative radicand tolerated before a target is declared infeasible.
pub const RADICAND_TOL: f64 = 1e-9;

/// Fraction of the peak `|lambda|` that delimits the active part of a pulse.
pub const ACTIVE_FRACTION: f64 = 0.05;

/// Default bound on `|lambda|` in regularized mode, in units of `max(gamma, |G|)`.
pub const REGULARIZED_CAP: f64 = 4.0;

/// What to do when the requested envelope cannot be followed exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Feasibility {
    /// Fail with [`Error::Infeasible`].
    #[default]
    Strict,
    /// Clip the radicand at zero, bound `|lambda|`, and record the violation.
    Regularized,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthesisOptions {
    /// Phase convention: the pulse carries `exp(i phi)`.
    pub phi: f64,
    pub feasibility: Feasibility,
}

/// Time intervals where a control hit its bound.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClampReport {
    pub bound: f64,
    pub intervals: Vec<(f64, f64)>,
    pub clamped_samples: usize,
}

impl ClampReport {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SynthesisDiagnostics {
    pub min_abs_beta_q: f64,
    pub clamp: ClampReport,
    /// First and last time with `|lambda| >= ACTIVE_FRACTION * peak`.
    pub active_start: Option<f64>,
    pub active_stop: Option<f64>,
    pub peak_lambda: f64,
    /// Most negative radicand met while building the reference, with its time.
    pub worst_radicand: Option<(f64, f64)>,
    /// The envelope could not be followed exactly (regularized mode only).
    pub infeasible: bool,
    /// Time after which the control is held at zero.
    pub freeze_time: Option<f64>,
    /// The node has `G = 0` or `gamma = 0`; no pulse can move the excitation.
    pub uncoupled: bool,
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub control: Envelope,
    /// Ideal lossless amplitudes the control was derived from.
    pub reference: Trajectory,
    pub diagnostics: SynthesisDiagnostics,
}

impl SynthesisResult {
    /// Length of the active support of the pulse in us.
    pub fn active_duration(&self) -> Option<f64> {
        Some(self.diagnostics.active_stop? - self.diagnostics.active_start?)
    }
}

/// True when no control can exchange the excitation with the fiber.
pub fn is_uncoupled(params: &NodeParams) -> bool {
    params.g.norm() == 0.0 || params.gamma == 0.0
}

/// Zero control with the free lossless evolution as its reference, for nodes
/// that [`is_uncoupled`].
pub fn idle_control(
    initial: NodeState,
    params: &NodeParams,
    alpha_in: &Envelope,
    grid: &TimeGrid,
) -> Result<SynthesisResult> {
    let control = Envelope::zeros(*grid);
    let reference =
        crate::dynamics::integrate_node(initial, &params.lossless(), &control, alpha_in, grid)?;
    Ok(SynthesisResult {
        control,
        reference,
        diagnostics: SynthesisDiagnostics {
            min_abs_beta_q: initial.beta_q.norm(),
            uncoupled: true,
            ..Default::default()
        },
    })
}

fn check_node(params: &NodeParams) -> Result<()> {
    params.check_resonance()?;
    if params.g.norm() == 0.0 {
        return Err(Error::InvalidParameter {
            name: "G",
            reason: "synthesis needs a non-zero optomechanical coupling".into(),
        });
    }
    if !(params.gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "synthesis needs a positive extraction rate".into(),
        });
    }
    Ok(())
}

/// Ideal cavity and phonon amplitudes with their derivatives.
struct Chain {
    beta_r: Vec<C64>,
    beta_c: Vec<C64>,
    /// `w = i d(beta_r)/dt - conj(G) beta_c`, so that `conj(lambda) beta_q = 2 w`.
    w: Vec<C64>,
}

/// Solves the lossless cavity equation for `beta_r` given `beta_c` and `alpha_in`.
fn solve_chain(
    params: &NodeParams,
    beta_c: Vec<C64>,
    d_beta_c: &[C64],
    dd_beta_c: &[C64],
    alpha_in: &[C64],
    d_alpha_in: &[C64],
) -> Chain {
    let sg = params.gamma.sqrt();
    let half = 0.5 * params.gamma;
    let g = params.g;
    let n = beta_c.len();
    let mut beta_r = Vec::with_capacity(n);
    let mut w = Vec::with_capacity(n);
    for k in 0..n {
        let br = I * (d_beta_c[k] + alpha_in[k] * sg + beta_c[k] * half) / g;
        let dbr = I * (dd_beta_c[k] + d_alpha_in[k] * sg + d_beta_c[k] * half) / g;
        beta_r.push(br);
        w.push(I * dbr - g.conj() * beta_c[k]);
    }
    Chain { beta_r, beta_c, w }
}

/// Phase of `beta_q` implied by the qubit equation when `|beta_q| = rho`:
/// `d(arg beta_q)/dt = -Re(conj(w) beta_r) / rho^2`.
fn qubit_phase(chain: &Chain, rho: &[f64], from: usize, dt: f64) -> Vec<f64> {
    let rate: Vec<f64> = (0..rho.len())
        .map(|k| {
            if k < from || rho[k] < EPS_Q {
                0.0
            } else {
                -(chain.w[k].conj() * chain.beta_r[k]).re / (rho[k] * rho[k])
            }
        })
        .collect();
    grid::cumulative(&rate, dt, 0.0)
}

struct Radicand {
    rho: Vec<f64>,
    worst: Option<(f64, f64)>,
    infeasible: bool,
}

fn radicand_to_modulus(
    radicand: &[f64],
    checked_from: usize,
    grid: &TimeGrid,
    feasibility: Feasibility,
) -> Result<Radicand> {
    let mut worst: Option<(f64, f64)> = None;
    let mut rho = Vec::with_capacity(radicand.len());
    for (k, &r) in radicand.iter().enumerate() {
        if k >= checked_from && r < 0.0 && worst.is_none_or(|(w, _)| r < w) {
            worst = Some((r, grid.time(k)));
        }
        rho.push(r.max(0.0).sqrt());
    }
    let infeasible = matches!(worst, Some((r, _)) if r < -RADICAND_TOL);
    if infeasible && feasibility == Feasibility::Strict {
        let (radicand, time_us) = worst.unwrap();
        return Err(Error::Infeasible { time_us, radicand });
    }
    Ok(Radicand {
        rho,
        worst,
        infeasible,
    })
}

fn regularized_cap(params: &NodeParams) -> f64 {
    params
        .lambda_max
        .unwrap_or(REGULARIZED_CAP * params.gamma.max(params.g.norm()))
}

fn cap_magnitude(z: C64, bound: f64) -> C64 {
    let m = z.norm();
    if m > bound {
        z * (bound / m)
    } else {
        z
    }
}

#[allow(clippy::too_many_arguments)]
fn finish(
    params: &NodeParams,
    grid: &TimeGrid,
    mut lambda: Vec<C64>,
    beta_q: Vec<C64>,
    chain: Chain,
    alpha_in: Envelope,
    alpha_out: Vec<C64>,
    mut diagnostics: SynthesisDiagnostics,
    options: &SynthesisOptions,
    emitting: bool,
) -> Result<SynthesisResult> {
    let rot = C64::from_polar(1.0, options.phi);
    let back = rot.conj();
    if options.phi != 0.0 {
        lambda.iter_mut().for_each(|z| *z *= rot);
    }
    if options.feasibility == Feasibility::Regularized {
        let cap = regularized_cap(params);
        lambda.iter_mut().for_each(|z| *z = cap_magnitude(*z, cap));
    }
    let mut control = Envelope::new(*grid, lambda)?;
    if let Some(bound) = params.lambda_max {
        let (clamped, report) = clamp_control(&control, bound);
        control = clamped;
        diagnostics.clamp = report;
    }

    let peak = control.peak();
    diagnostics.peak_lambda = peak;
    if peak > 0.0 {
        let active = |k: &usize| control.value(*k).norm() >= ACTIVE_FRACTION * peak;
        diagnostics.active_start = (0..grid.len()).find(active).map(|k| grid.time(k));
        diagnostics.active_stop = (0..grid.len()).rev().find(active).map(|k| grid.time(k));
    }

    // A constant phase on lambda is carried by the field-side amplitudes when
    // the node starts excited, and by beta_q when it starts empty.
    let (q_rot, field_rot) = if emitting {
        (C64::new(1.0, 0.0), back)
    } else {
        (rot, C64::new(1.0, 0.0))
    };
    let states = (0..grid.len())
        .map(|k| {
            NodeState::new(
                beta_q[k] * q_rot,
                chain.beta_r[k] * field_rot,
                chain.beta_c[k] * field_rot,
            )
        })
        .collect();
    let alpha_out = Envelope::new(
        *grid,
        alpha_out.into_iter().map(|z| z * field_rot).collect(),
    )?;
    let alpha_in = alpha_in.scaled(field_rot);
    let reference = Trajectory {
        grid: *grid,
        params: params.lossless(),
        states,
        control: control.clone(),
        alpha_in,
        alpha_out,
    };
    Ok(SynthesisResult {
        control,
        reference,
        diagnostics,
    })
}

/// Control that makes a node initially in |up,0,0> emit `sin(theta) * target`.
pub fn synthesize_emission(
    target: &Envelope,
    theta: f64,
    params: &NodeParams,
    grid: &TimeGrid,
) -> Result<SynthesisResult> {
    synthesize_emission_with(target, theta, params, grid, &SynthesisOptions::default())
}

pub fn synthesize_emission_with(
    target: &Envelope,
    theta: f64,
    params: &NodeParams,
    grid: &TimeGrid,
    options: &SynthesisOptions,
) -> Result<SynthesisResult> {
    check_node(params)?;
    target.grid().ensure_matches(grid, "target")?;
    if !(-1e-12..=FRAC_PI_2 + 1e-12).contains(&theta) {
        return Err(Error::InvalidParameter {
            name: "theta",
            reason: format!("must lie in [0, pi/2], got {theta}"),
        });
    }
    if !target.is_normalized() {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!("wavepacket energy {} is not 1", target.energy()),
        });
    }
    let target = target.normalized()?;
    let n = grid.len();
    let dt = grid.dt();
    let s = theta.sin();
    let (cos2, sin2) = (theta.cos().powi(2), s * s);
    let scale = s / params.gamma.sqrt();

    let alpha_out: Vec<C64> = target.samples().iter().map(|z| z * s).collect();
    let beta_c: Vec<C64> = target.samples().iter().map(|z| z * scale).collect();
    let d1: Vec<C64> = target
        .first_derivative()
        .iter()
        .map(|z| z * scale)
        .collect();
    let d2: Vec<C64> = target
        .second_derivative()
        .iter()
        .map(|z| z * scale)
        .collect();
    let zeros = vec![C64::default(); n];
    let chain = solve_chain(params, beta_c, &d1, &d2, &zeros, &zeros);

    // |beta_q|^2 = cos^2 + sin^2 * (energy still to come) - |beta_r|^2 - |beta_c|^2
    let tail = target.tail_energy();
    let radicand: Vec<f64> = (0..n)
        .map(|k| {
            if s == 0.0 {
                1.0
            } else {
                cos2 + sin2 * tail[k] - chain.beta_r[k].norm_sqr() - chain.beta_c[k].norm_sqr()
            }
        })
        .collect();
    let Radicand {
        rho,
        worst,
        infeasible,
    } = radicand_to_modulus(&radicand, 0, grid, options.feasibility)?;
    let phase = qubit_phase(&chain, &rho, 0, dt);

    let freeze = rho.iter().position(|&r| r < EPS_Q);
    let beta_q: Vec<C64> = (0..n).map(|k| C64::from_polar(rho[k], phase[k])).collect();
    let lambda: Vec<C64> = (0..n)
        .map(|k| {
            if s == 0.0 || freeze.is_some_and(|f| k >= f) {
                C64::default()
            } else {
                (chain.w[k] * 2.0).conj() / beta_q[k].conj()
            }
        })
        .collect();

    let diagnostics = SynthesisDiagnostics {
        min_abs_beta_q: rho.iter().copied().fold(f64::INFINITY, f64::min),
        worst_radicand: worst,
        infeasible,
        freeze_time: freeze.map(|k| grid.time(k)),
        ..Default::default()
    };
    finish(
        params,
        grid,
        lambda,
        beta_q,
        chain,
        Envelope::zeros(*grid),
        alpha_out,
        diagnostics,
        options,
        true,
    )
}

/// Control that absorbs `incoming` without reflection into a node starting in
/// its ground state.
pub fn synthesize_absorption(
    incoming: &Envelope,
    params: &NodeParams,
    grid: &TimeGrid,
) -> Result<SynthesisResult> {
    synthesize_absorption_with(incoming, params, grid, &SynthesisOptions::default())
}

pub fn synthesize_absorption_with(
    incoming: &Envelope,
    params: &NodeParams,
    grid: &TimeGrid,
    options: &SynthesisOptions,
) -> Result<SynthesisResult> {
    check_node(params)?;
    incoming.grid().ensure_matches(grid, "incoming")?;
    let energy = incoming.energy();
    if energy > 1.0 + crate::envelope::NORMALIZATION_TOL {
        return Err(Error::InvalidParameter {
            name: "incoming",
            reason: format!("wavepacket energy {energy} exceeds one excitation"),
        });
    }
    let n = grid.len();
    let dt = grid.dt();
    let sg = params.gamma.sqrt();

    let a = incoming.samples();
    let da = incoming.first_derivative();
    let dda = incoming.second_derivative();
    let beta_c: Vec<C64> = a.iter().map(|z| -z / sg).collect();
    let d1: Vec<C64> = da.iter().map(|z| -z / sg).collect();
    let d2: Vec<C64> = dda.iter().map(|z| -z / sg).collect();
    let chain = solve_chain(params, beta_c, &d1, &d2, a, &da);

    let arrived = incoming.cumulative_energy();
    let start = arrived.iter().position(|&e| e > EPS_START);
    let radicand: Vec<f64> = (0..n)
        .map(|k| arrived[k] - chain.beta_r[k].norm_sqr() - chain.beta_c[k].norm_sqr())
        .collect();
    let from = start.unwrap_or(n);
    let Radicand {
        rho,
        worst,
        infeasible,
    } = radicand_to_modulus(&radicand, from, grid, options.feasibility)?;
    let phase = qubit_phase(&chain, &rho, from, dt);

    let beta_q: Vec<C64> = (0..n).map(|k| C64::from_polar(rho[k], phase[k])).collect();
    let lambda: Vec<C64> = (0..n)
        .map(|k| {
            if k < from || rho[k] < EPS_Q {
                C64::default()
            } else {
                (chain.w[k] * 2.0).conj() / beta_q[k].conj()
            }
        })
        .collect();
    let alpha_out = vec![C64::default(); n];
    let diagnostics = SynthesisDiagnostics {
        min_abs_beta_q: rho[from.min(n - 1)..]
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min),
        worst_radicand: worst,
        infeasible,
        ..Default::default()
    };
    finish(
        params,
        grid,
        lambda,
        beta_q,
        chain,
        incoming.clone(),
        alpha_out,
        diagnostics,
        options,
        false,
    )
}

/// Caps `|lambda|` at `lambda_max`, keeping the phase.
pub fn clamp_control(control: &Envelope, lambda_max: f64) -> (Envelope, ClampReport) {
    let grid = *control.grid();
    let mut report = ClampReport {
        bound: lambda_max,
        ..Default::default()
    };
    let mut open: Option<f64> = None;
    let mut out = Vec::with_capacity(control.len());
    for (k, &z) in control.samples().iter().enumerate() {
        let t = grid.time(k);
        if z.norm() > lambda_max {
            out.push(cap_magnitude(z, lambda_max));
            report.clamped_samples += 1;
            open.get_or_insert(t);
        } else {
            out.push(z);
            if let Some(s) = open.take() {
                report.intervals.push((s, grid.time(k - 1)));
            }
        }
    }
    if let Some(s) = open {
        report.intervals.push((s, grid.t_end()));
    }
    (
        Envelope::new(grid, out).expect("clamping keeps samples finite"),
        report,
    )
}

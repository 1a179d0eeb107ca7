// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! State-transfer primitives built on synthesis and integration: photon
//! emission from a qubit superposition, two-node entanglement distribution and
//! qubit transfer, plus the overlap fidelities used to score them.
//!
//! Only the excited branch is integrated. The ground branch `|down,0,0,vac>` is
//! invariant, so its amplitude `C0` is carried through untouched and the
//! excited-branch amplitudes are scaled by `C1` at the end.
//!
//! Phase convention: a nonzero `phi` puts `exp(i phi)` on the emitting control,
//! which leaves the photon with `exp(-i phi)` relative to the qubit. All targets
//! below are written in that convention.

use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64 as C64;

use crate::dynamics::{default_dt, Integrator, Trajectory};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::{NodeParams, NodeState};
use crate::packet::Wavepacket;
use crate::synthesis::{
    idle_control, is_uncoupled, synthesize_absorption_with, synthesize_emission_with, Feasibility,
    SynthesisOptions, SynthesisResult,
};

/// Tolerance on `|C0|^2 + |C1|^2 = 1`.
pub const QUBIT_NORM_TOL: f64 = 1e-12;

/// Spin qubit `C0 |down> + C1 |up>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitAmplitudes {
    c0: C64,
    c1: C64,
}

impl QubitAmplitudes {
    pub fn new(c0: C64, c1: C64) -> Result<Self> {
        let n = c0.norm_sqr() + c1.norm_sqr();
        if !n.is_finite() || (n - 1.0).abs() > QUBIT_NORM_TOL {
            return Err(Error::InvalidParameter {
                name: "qubit",
                reason: format!("|C0|^2 + |C1|^2 = {n}, expected 1"),
            });
        }
        Ok(Self { c0, c1 })
    }

    /// `cos(a/2) |down> + exp(i b) sin(a/2) |up>`.
    pub fn bloch(polar: f64, azimuth: f64) -> Self {
        Self {
            c0: C64::new((0.5 * polar).cos(), 0.0),
            c1: C64::from_polar((0.5 * polar).sin(), azimuth),
        }
    }

    pub fn ground() -> Self {
        Self::bloch(0.0, 0.0)
    }

    pub fn excited() -> Self {
        Self {
            c0: C64::default(),
            c1: C64::new(1.0, 0.0),
        }
    }

    pub fn c0(&self) -> C64 {
        self.c0
    }

    pub fn c1(&self) -> C64 {
        self.c1
    }

    pub fn with_global_phase(&self, phase: f64) -> Self {
        let u = C64::from_polar(1.0, phase);
        Self {
            c0: self.c0 * u,
            c1: self.c1 * u,
        }
    }
}

/// Knobs shared by all protocols.
#[derive(Debug, Clone, Default)]
pub struct ProtocolOptions {
    pub phi: f64,
    pub feasibility: Feasibility,
    pub integrator: Integrator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProtocolKind {
    Emit,
    Entangle,
    Transfer,
}

impl ProtocolKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Emit => "emit",
            Self::Entangle => "entangle",
            Self::Transfer => "transfer",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolReport {
    pub kind: ProtocolKind,
    /// Excited-branch trajectories (node 1, then node 2 if present).
    pub nodes: Vec<Trajectory>,
    /// Pulses and their ideal references, one per node.
    pub synthesis: Vec<SynthesisResult>,
    /// Normalized target wavepacket on the protocol grid.
    pub target: Envelope,
    /// Named components of the final state in the tracked sector.
    pub final_amplitudes: Vec<(&'static str, C64)>,
    /// Overlap fidelity with the protocol's target state.
    pub fidelity: f64,
    /// Fidelity to `(|up,down> + |down,up>)/sqrt 2` (entanglement only).
    pub bell_fidelity: Option<f64>,
    /// `|int conj(target) alpha_out,1|^2` for the excited branch.
    pub wavepacket_fidelity: f64,
    /// Largest excitation-budget residual of the excited branch.
    pub budget_residual: f64,
    /// Excitation lost to decoherence in the excited branch.
    pub lost: f64,
    pub delay: f64,
    /// Field energy between the nodes at each sample (two-node protocols).
    pub in_flight: Option<Vec<f64>>,
}

impl ProtocolReport {
    pub fn grid(&self) -> &TimeGrid {
        &self.nodes[0].grid
    }

    pub fn amplitude(&self, name: &str) -> Option<C64> {
        self.final_amplitudes
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, z)| *z)
    }

    pub fn controls(&self) -> Vec<&Envelope> {
        self.nodes.iter().map(|t| &t.control).collect()
    }
}

/// `|<target|final>|^2` over the tracked sector; amplitudes outside it count as
/// orthogonal.
pub fn fidelity_state(final_amplitudes: &[C64], target: &[C64]) -> Result<f64> {
    if final_amplitudes.len() != target.len() {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!(
                "{} target amplitudes for {} final ones",
                target.len(),
                final_amplitudes.len()
            ),
        });
    }
    let norm: f64 = target.iter().map(|z| z.norm_sqr()).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!("target norm {norm}, expected 1"),
        });
    }
    let overlap: C64 = target
        .iter()
        .zip(final_amplitudes)
        .map(|(t, f)| t.conj() * f)
        .sum();
    Ok(overlap.norm_sqr().clamp(0.0, 1.0))
}

/// `|int conj(target) emitted dt|^2`; the emitted packet is not renormalized.
pub fn fidelity_wavepacket(emitted: &Envelope, target: &Envelope) -> Result<f64> {
    if !target.is_normalized() {
        return Err(Error::InvalidParameter {
            name: "target",
            reason: format!("wavepacket energy {} is not 1", target.energy()),
        });
    }
    Ok(target.overlap(emitted)?.norm_sqr().clamp(0.0, 1.0))
}

/// Default protocol grid: the packet window extended by `delay`, with a step
/// that divides `delay` and obeys the rate rule for every node.
pub fn default_grid(
    packet: &Wavepacket,
    delay: f64,
    params: &[&NodeParams],
    lambda_sup: f64,
    dt_override: Option<f64>,
) -> Result<TimeGrid> {
    let (a, b) = packet.default_window();
    let dt_max = dt_override.unwrap_or_else(|| default_dt(params, lambda_sup));
    grid_with_delay(a, b + delay, delay, dt_max)
}

/// Grid on `[t_start, >= t_end]` whose step is at most `dt_max` and divides `delay`.
pub fn grid_with_delay(t_start: f64, t_end: f64, delay: f64, dt_max: f64) -> Result<TimeGrid> {
    if !(dt_max > 0.0) || !dt_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "dt",
            reason: format!("must be positive, got {dt_max}"),
        });
    }
    let dt = if delay > 0.0 {
        delay / (delay / dt_max).ceil()
    } else {
        dt_max
    };
    let n = ((t_end - t_start) / dt - 1e-9).ceil().max(2.0) as usize;
    TimeGrid::new(t_start, t_start + n as f64 * dt, n)
}

fn emission(
    target: &Envelope,
    theta: f64,
    params: &NodeParams,
    grid: &TimeGrid,
    options: &ProtocolOptions,
) -> Result<SynthesisResult> {
    if is_uncoupled(params) {
        return idle_control(NodeState::excited(), params, &Envelope::zeros(*grid), grid);
    }
    synthesize_emission_with(
        target,
        theta,
        params,
        grid,
        &SynthesisOptions {
            phi: options.phi,
            feasibility: options.feasibility,
        },
    )
}

/// Emits `sin(theta) * target` from the excited branch of `qubit`.
///
/// Target state: `C0 |down,vac> + C1 (cos(theta) |up,vac> + exp(-i phi) sin(theta) |down,target>)`.
pub fn emit_photon(
    qubit: QubitAmplitudes,
    theta: f64,
    params: &NodeParams,
    target: &Envelope,
    grid: &TimeGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolReport> {
    let synth = emission(target, theta, params, grid, options)?;
    let node = options.integrator.integrate_node(
        NodeState::excited(),
        params,
        &synth.control,
        &Envelope::zeros(*grid),
        grid,
    )?;
    let ledger = node.ledger()?;
    let end = node.final_state();
    let photon = target.overlap(&node.alpha_out)?;
    let (c0, c1) = (qubit.c0, qubit.c1);
    let fidelity = (c0.norm_sqr()
        + c1.norm_sqr()
            * (theta.cos() * end.beta_q + C64::from_polar(theta.sin(), options.phi) * photon))
        .norm_sqr()
        .clamp(0.0, 1.0);
    Ok(ProtocolReport {
        kind: ProtocolKind::Emit,
        final_amplitudes: vec![
            ("down_vac", c0),
            ("up_vac", c1 * end.beta_q),
            ("phonon", c1 * end.beta_r),
            ("cavity", c1 * end.beta_c),
            ("photon_in_target", c1 * photon),
        ],
        fidelity,
        bell_fidelity: None,
        wavepacket_fidelity: fidelity_wavepacket(&node.alpha_out, target)?,
        budget_residual: ledger.max_residual,
        lost: ledger.final_loss(),
        delay: 0.0,
        in_flight: None,
        nodes: vec![node],
        synthesis: vec![synth],
        target: target.clone(),
    })
}

/// Node 1 emits at `theta`, node 2 absorbs the ideal in-flight packet.
#[allow(clippy::too_many_arguments)]
fn two_node(
    kind: ProtocolKind,
    params1: &NodeParams,
    params2: &NodeParams,
    target: &Envelope,
    theta: f64,
    receiver_phi: f64,
    delay: f64,
    grid: &TimeGrid,
    options: &ProtocolOptions,
) -> Result<(ProtocolReport, NodeState, NodeState)> {
    let d = crate::dynamics::delay_steps(delay, grid.dt())?;
    let emit = emission(target, theta, params1, grid, options)?;
    let incoming = target
        .scaled(C64::from_polar(theta.sin(), -options.phi))
        .delayed(d);
    let absorb = if is_uncoupled(params2) {
        idle_control(NodeState::ZERO, params2, &incoming, grid)?
    } else {
        synthesize_absorption_with(
            &incoming,
            params2,
            grid,
            &SynthesisOptions {
                phi: receiver_phi,
                feasibility: options.feasibility,
            },
        )?
    };
    let cascade = options.integrator.integrate_cascade(
        [NodeState::excited(), NodeState::ZERO],
        params1,
        params2,
        [&emit.control, &absorb.control],
        delay,
        grid,
    )?;
    let residual = cascade.joint_residual()?;
    let lost = cascade.node1.ledger()?.final_loss() + cascade.node2.ledger()?.final_loss();
    let s1 = cascade.node1.final_state();
    let s2 = cascade.node2.final_state();
    let report = ProtocolReport {
        kind,
        final_amplitudes: Vec::new(),
        fidelity: 0.0,
        bell_fidelity: None,
        wavepacket_fidelity: fidelity_wavepacket(&cascade.node1.alpha_out, target)?,
        budget_residual: residual,
        lost,
        delay,
        in_flight: Some(cascade.in_flight),
        nodes: vec![cascade.node1, cascade.node2],
        synthesis: vec![emit, absorb],
        target: target.clone(),
    };
    Ok((report, s1, s2))
}

/// Splits node 1's excitation at `theta` and sends the photonic half to node 2.
///
/// Target state: `exp(i phi) cos(theta) |up,down> + sin(theta) |down,up>`;
/// `theta = pi/4`, `phi = 0` is the Bell state.
pub fn distribute_entanglement(
    params1: &NodeParams,
    params2: &NodeParams,
    target: &Envelope,
    theta: f64,
    delay: f64,
    grid: &TimeGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolReport> {
    let (mut report, s1, s2) = two_node(
        ProtocolKind::Entangle,
        params1,
        params2,
        target,
        theta,
        -options.phi,
        delay,
        grid,
        options,
    )?;
    let joint = [s1.beta_q, s2.beta_q];
    let wanted = [
        C64::from_polar(theta.cos(), options.phi),
        C64::new(theta.sin(), 0.0),
    ];
    let bell = [C64::new(FRAC_1_SQRT_2, 0.0); 2];
    report.fidelity = fidelity_state(&joint, &wanted)?;
    report.bell_fidelity = Some(fidelity_state(&joint, &bell)?);
    report.final_amplitudes = vec![
        ("up_down", s1.beta_q),
        ("down_up", s2.beta_q),
        ("phonon_1", s1.beta_r),
        ("cavity_1", s1.beta_c),
        ("phonon_2", s2.beta_r),
        ("cavity_2", s2.beta_c),
    ];
    Ok(report)
}

/// Maps `C0 |down> + C1 |up>` from node 1 onto node 2.
pub fn transfer_qubit(
    qubit: QubitAmplitudes,
    params1: &NodeParams,
    params2: &NodeParams,
    target: &Envelope,
    delay: f64,
    grid: &TimeGrid,
    options: &ProtocolOptions,
) -> Result<ProtocolReport> {
    let (mut report, s1, s2) = two_node(
        ProtocolKind::Transfer,
        params1,
        params2,
        target,
        std::f64::consts::FRAC_PI_2,
        0.0,
        delay,
        grid,
        options,
    )?;
    let (c0, c1) = (qubit.c0, qubit.c1);
    report.final_amplitudes = vec![
        ("down_down", c0),
        ("up_down", c1 * s1.beta_q),
        ("down_up", c1 * s2.beta_q),
        ("phonon_1", c1 * s1.beta_r),
        ("cavity_1", c1 * s1.beta_c),
        ("phonon_2", c1 * s2.beta_r),
        ("cavity_2", c1 * s2.beta_c),
    ];
    report.fidelity = (c0.norm_sqr() + c1.norm_sqr() * s2.beta_q)
        .norm_sqr()
        .clamp(0.0, 1.0);
    Ok(report)
}

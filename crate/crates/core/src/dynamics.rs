// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-step integration of one node or a unidirectional two-node cascade.

use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{Interpolation, TimeGrid};
use crate::model::{output_field, rhs_unchecked, NodeParams, NodeState};
use crate::scheme::{ButcherScheme, OdeSystem, Scheme, Workspace};

/// Largest `rate * dt` accepted by the default step-size rule.
pub const MAX_RATE_DT: f64 = 0.01;

/// Time series of one node driven by `control` and `alpha_in`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub params: NodeParams,
    pub states: Vec<NodeState>,
    pub control: Envelope,
    pub alpha_in: Envelope,
    pub alpha_out: Envelope,
}

impl Trajectory {
    pub fn final_state(&self) -> NodeState {
        *self.states.last().expect("trajectory is never empty")
    }

    /// `int |alpha_out|^2 dt` over the whole run.
    pub fn emitted_energy(&self) -> f64 {
        self.alpha_out.energy()
    }
}

/// Two nodes linked by a lossless, dispersionless fiber.
#[derive(Debug, Clone)]
pub struct CascadeTrajectory {
    pub node1: Trajectory,
    pub node2: Trajectory,
    pub delay: f64,
    pub delay_steps: usize,
    /// Field energy travelling between the nodes at each sample.
    pub in_flight: Vec<f64>,
}

/// Step size satisfying `max(gamma, |G|, sup|lambda|, gamma_q) * dt <= MAX_RATE_DT`.
pub fn default_dt(params: &[&NodeParams], lambda_sup: f64) -> f64 {
    let rate = params
        .iter()
        .map(|p| p.fastest_rate())
        .fold(lambda_sup.abs(), f64::max);
    if rate > 0.0 {
        MAX_RATE_DT / rate
    } else {
        1e-3
    }
}

struct NodeSystem<'a> {
    params: &'a NodeParams,
    control: &'a Envelope,
    input: &'a Envelope,
    interp: Interpolation,
}

impl OdeSystem for NodeSystem<'_> {
    fn dim(&self) -> usize {
        3
    }

    fn eval(&self, step: usize, frac: f64, y: &[C64], dy: &mut [C64]) {
        let lambda = self.control.at_stage(step, frac, self.interp);
        let ain = self.input.at_stage(step, frac, self.interp);
        let d = rhs_unchecked(&NodeState::from_slice(y), self.params, lambda, ain);
        dy[0] = d.beta_q;
        dy[1] = d.beta_r;
        dy[2] = d.beta_c;
    }
}

/// Scheme plus interpolation rule for sampled controls.
#[derive(Debug, Clone)]
pub struct Integrator {
    scheme: Arc<dyn Scheme>,
    interp: Interpolation,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            scheme: Arc::new(ButcherScheme::rk4()),
            interp: Interpolation::Cubic,
        }
    }
}

impl Integrator {
    pub fn new(scheme: Arc<dyn Scheme>, interp: Interpolation) -> Self {
        Self { scheme, interp }
    }

    pub fn scheme(&self) -> &dyn Scheme {
        self.scheme.as_ref()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn integrate_node(
        &self,
        initial: NodeState,
        params: &NodeParams,
        control: &Envelope,
        input: &Envelope,
        grid: &TimeGrid,
    ) -> Result<Trajectory> {
        params.check_resonance()?;
        control.grid().ensure_matches(grid, "control")?;
        input.grid().ensure_matches(grid, "input")?;
        if !initial.is_finite() {
            return Err(Error::NonFinite(format!("initial state {initial:?}")));
        }

        let sys = NodeSystem {
            params,
            control,
            input,
            interp: self.interp,
        };
        let dt = grid.dt();
        let bound = 1e6 * (1.0 + initial.population() + input.energy());
        let mut states = Vec::with_capacity(grid.len());
        let mut y = initial.to_array();
        let mut work = Workspace::default();
        states.push(initial);
        for k in 0..grid.n_steps() {
            self.scheme.step(&sys, k, dt, &mut y, &mut work);
            let s = NodeState::from_slice(&y);
            if !s.is_finite() || s.population() > bound {
                return Err(Error::Divergence {
                    time_us: grid.time(k + 1),
                });
            }
            states.push(s);
        }

        let alpha_out = states
            .iter()
            .zip(input.samples())
            .map(|(s, &ain)| output_field(s, params, ain))
            .collect();
        Ok(Trajectory {
            grid: *grid,
            params: *params,
            states,
            control: control.clone(),
            alpha_in: input.clone(),
            alpha_out: Envelope::new(*grid, alpha_out)?,
        })
    }

    /// Node 1 emits into the fiber; node 2 receives `alpha_out_1(t - delay)`.
    pub fn integrate_cascade(
        &self,
        initials: [NodeState; 2],
        params1: &NodeParams,
        params2: &NodeParams,
        controls: [&Envelope; 2],
        delay: f64,
        grid: &TimeGrid,
    ) -> Result<CascadeTrajectory> {
        let delay_steps = delay_steps(delay, grid.dt())?;
        let node1 = self.integrate_node(
            initials[0],
            params1,
            controls[0],
            &Envelope::zeros(*grid),
            grid,
        )?;
        let input2 = node1.alpha_out.delayed(delay_steps);
        let node2 = self.integrate_node(initials[1], params2, controls[1], &input2, grid)?;

        let cum = node1.alpha_out.cumulative_energy();
        let in_flight = (0..grid.len())
            .map(|k| {
                let behind = k.saturating_sub(delay_steps);
                if delay_steps == 0 {
                    0.0
                } else {
                    cum[k] - cum[behind]
                }
            })
            .collect();
        Ok(CascadeTrajectory {
            node1,
            node2,
            delay,
            delay_steps,
            in_flight,
        })
    }
}

/// Number of grid steps spanned by `delay`; must be a non-negative integer.
pub fn delay_steps(delay: f64, dt: f64) -> Result<usize> {
    if !(delay >= 0.0) || !delay.is_finite() {
        return Err(Error::InvalidParameter {
            name: "delay",
            reason: format!("must be finite and non-negative, got {delay}"),
        });
    }
    let x = delay / dt;
    let k = x.round();
    if (x - k).abs() > 1e-6 {
        return Err(Error::DelayNotAligned {
            delay_us: delay,
            dt_us: dt,
        });
    }
    Ok(k as usize)
}

pub fn integrate_node(
    initial: NodeState,
    params: &NodeParams,
    control: &Envelope,
    input: &Envelope,
    grid: &TimeGrid,
) -> Result<Trajectory> {
    Integrator::default().integrate_node(initial, params, control, input, grid)
}

pub fn integrate_cascade(
    initials: [NodeState; 2],
    params1: &NodeParams,
    params2: &NodeParams,
    controls: [&Envelope; 2],
    delay: f64,
    grid: &TimeGrid,
) -> Result<CascadeTrajectory> {
    Integrator::default().integrate_cascade(initials, params1, params2, controls, delay, grid)
}

/// Outcome of a step-halving study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderEstimate {
    Estimated {
        order: f64,
        err_coarse: f64,
        err_fine: f64,
    },
    /// Both errors vanish, e.g. for frozen dynamics.
    Degenerate,
}

impl OrderEstimate {
    pub fn order(&self) -> Option<f64> {
        match self {
            Self::Estimated { order, .. } => Some(*order),
            Self::Degenerate => None,
        }
    }
}

/// Observed order `log2(err(dt) / err(dt/2))`, both errors measured against a
/// `dt/8` reference on the samples of `grid`.
///
/// `run` integrates the scenario on the grid it is given and returns every sample.
pub fn convergence_order<F>(grid: &TimeGrid, run: F) -> Result<OrderEstimate>
where
    F: Fn(&TimeGrid) -> Result<Vec<NodeState>>,
{
    let coarse = run(grid)?;
    let fine = run(&grid.refined(2))?;
    let reference = run(&grid.refined(8))?;
    let mut err_coarse: f64 = 0.0;
    let mut err_fine: f64 = 0.0;
    for k in 0..grid.len() {
        err_coarse = err_coarse.max(coarse[k].max_deviation(&reference[8 * k]));
        err_fine = err_fine.max(fine[2 * k].max_deviation(&reference[8 * k]));
    }
    if err_coarse == 0.0 && err_fine == 0.0 {
        return Ok(OrderEstimate::Degenerate);
    }
    Ok(OrderEstimate::Estimated {
        order: (err_coarse / err_fine).log2(),
        err_coarse,
        err_fine,
    })
}

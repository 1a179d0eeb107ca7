// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Excitation bookkeeping: where the single excitation sits at every sample.

use crate::dynamics::{CascadeTrajectory, Trajectory};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{self, TimeGrid};
use crate::model::{NodeParams, NodeState};

#[derive(Debug, Clone)]
pub struct NormLedger {
    pub grid: TimeGrid,
    pub qubit: Vec<f64>,
    pub phonon: Vec<f64>,
    pub cavity: Vec<f64>,
    /// Running `int |alpha_out|^2 dt`.
    pub emitted: Vec<f64>,
    /// Running `int |alpha_in|^2 dt`.
    pub injected: Vec<f64>,
    /// Running `gamma_q int |beta_q|^2 dt`.
    pub loss_q: Vec<f64>,
    pub loss_r: Vec<f64>,
    pub loss_c: Vec<f64>,
    pub initial_total: f64,
    /// Largest `|populations + emitted - injected + losses - initial_total|`.
    pub max_residual: f64,
}

impl NormLedger {
    pub fn residual(&self, k: usize) -> f64 {
        self.qubit[k] + self.phonon[k] + self.cavity[k] + self.emitted[k] - self.injected[k]
            + self.total_loss(k)
            - self.initial_total
    }

    pub fn total_loss(&self, k: usize) -> f64 {
        self.loss_q[k] + self.loss_r[k] + self.loss_c[k]
    }

    pub fn final_loss(&self) -> f64 {
        self.total_loss(self.grid.n_steps())
    }

    pub fn final_emitted(&self) -> f64 {
        self.emitted[self.grid.n_steps()]
    }
}

/// Ledger of a node run; fails if the records live on different grids.
pub fn norm_ledger(
    states: &[NodeState],
    grid: &TimeGrid,
    params: &NodeParams,
    alpha_in: &Envelope,
    alpha_out: &Envelope,
) -> Result<NormLedger> {
    if states.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} states on a grid of {} samples",
            states.len(),
            grid.len()
        )));
    }
    alpha_in.grid().ensure_matches(grid, "alpha_in")?;
    alpha_out.grid().ensure_matches(grid, "alpha_out")?;

    let dt = grid.dt();
    let qubit: Vec<f64> = states.iter().map(|s| s.beta_q.norm_sqr()).collect();
    let phonon: Vec<f64> = states.iter().map(|s| s.beta_r.norm_sqr()).collect();
    let cavity: Vec<f64> = states.iter().map(|s| s.beta_c.norm_sqr()).collect();
    let scaled = |v: &[f64], rate: f64| -> Vec<f64> {
        if rate == 0.0 {
            vec![0.0; v.len()]
        } else {
            grid::cumulative(v, dt, 0.0)
                .into_iter()
                .map(|x| x * rate)
                .collect()
        }
    };
    let loss_q = scaled(&qubit, params.gamma_q);
    let loss_r = scaled(&phonon, params.gamma_r);
    let loss_c = scaled(&cavity, params.gamma_c);
    let emitted = alpha_out.cumulative_energy();
    let injected = alpha_in.cumulative_energy();
    let initial_total = qubit[0] + phonon[0] + cavity[0];

    let mut ledger = NormLedger {
        grid: *grid,
        qubit,
        phonon,
        cavity,
        emitted,
        injected,
        loss_q,
        loss_r,
        loss_c,
        initial_total,
        max_residual: 0.0,
    };
    ledger.max_residual = (0..grid.len())
        .map(|k| ledger.residual(k).abs())
        .fold(0.0, f64::max);
    Ok(ledger)
}

impl Trajectory {
    pub fn ledger(&self) -> Result<NormLedger> {
        norm_ledger(
            &self.states,
            &self.grid,
            &self.params,
            &self.alpha_in,
            &self.alpha_out,
        )
    }
}

impl CascadeTrajectory {
    /// Largest violation of the joint budget
    /// `pop1 + pop2 + in_flight + emitted2 + losses1 + losses2 = initial`.
    pub fn joint_residual(&self) -> Result<f64> {
        let l1 = self.node1.ledger()?;
        let l2 = self.node2.ledger()?;
        let initial = l1.initial_total + l2.initial_total;
        let n = self.node1.grid.len();
        Ok((0..n)
            .map(|k| {
                let held = l1.qubit[k]
                    + l1.phonon[k]
                    + l1.cavity[k]
                    + l2.qubit[k]
                    + l2.phonon[k]
                    + l2.cavity[k];
                (held + self.in_flight[k] + l2.emitted[k] + l1.total_loss(k) + l2.total_loss(k)
                    - initial)
                    .abs()
            })
            .fold(0.0, f64::max))
    }
}

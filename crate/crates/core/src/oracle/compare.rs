// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64 as C64;

use crate::dynamics::Trajectory;
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{self, TimeGrid};
use crate::model::NodeState;

/// Largest pointwise difference and `sqrt(int |a - b|^2 dt)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Deviation {
    pub max: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryDeviation {
    pub beta_q: Deviation,
    pub beta_r: Deviation,
    pub beta_c: Deviation,
    pub alpha_out: Deviation,
}

impl TrajectoryDeviation {
    /// Worst pointwise deviation over the three node amplitudes.
    pub fn max_amplitude(&self) -> f64 {
        self.beta_q.max.max(self.beta_r.max).max(self.beta_c.max)
    }
}

pub fn compare_series(a: &[C64], b: &[C64], grid: &TimeGrid) -> Result<Deviation> {
    if a.len() != grid.len() || b.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "series of {} and {} samples on a grid of {}",
            a.len(),
            b.len(),
            grid.len()
        )));
    }
    let sq: Vec<f64> = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).collect();
    Ok(Deviation {
        max: sq.iter().copied().fold(0.0, f64::max).sqrt(),
        l2: grid::integrate(&sq, grid.dt(), 0.0).max(0.0).sqrt(),
    })
}

pub fn compare_envelopes(a: &Envelope, b: &Envelope) -> Result<Deviation> {
    a.grid().ensure_matches(b.grid(), "comparison")?;
    compare_series(a.samples(), b.samples(), a.grid())
}

pub fn compare_states(a: &[NodeState], b: &[NodeState], grid: &TimeGrid) -> Result<[Deviation; 3]> {
    let pick = |v: &[NodeState], f: fn(&NodeState) -> C64| v.iter().map(f).collect::<Vec<_>>();
    Ok([
        compare_series(&pick(a, |s| s.beta_q), &pick(b, |s| s.beta_q), grid)?,
        compare_series(&pick(a, |s| s.beta_r), &pick(b, |s| s.beta_r), grid)?,
        compare_series(&pick(a, |s| s.beta_c), &pick(b, |s| s.beta_c), grid)?,
    ])
}

pub fn compare_trajectories(a: &Trajectory, b: &Trajectory) -> Result<TrajectoryDeviation> {
    a.grid.ensure_matches(&b.grid, "comparison")?;
    let [beta_q, beta_r, beta_c] = compare_states(&a.states, &b.states, &a.grid)?;
    Ok(TrajectoryDeviation {
        beta_q,
        beta_r,
        beta_c,
        alpha_out: compare_envelopes(&a.alpha_out, &b.alpha_out)?,
    })
}

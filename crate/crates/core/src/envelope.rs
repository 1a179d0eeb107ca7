// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Complex amplitudes sampled on a [`TimeGrid`]: photon wavepackets (us^-1/2)
//! and control pulses (rad/us).

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::grid::{self, Interpolation, TimeGrid};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Tolerance on `int |a|^2 dt = 1` for a normalized wavepacket.
pub const NORMALIZATION_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Envelope {
    grid: TimeGrid,
    samples: Vec<C64>,
    first: Option<Vec<C64>>,
    second: Option<Vec<C64>>,
}

impl Envelope {
    pub fn new(grid: TimeGrid, samples: Vec<C64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "envelope has {} samples, grid needs {}",
                samples.len(),
                grid.len()
            )));
        }
        if let Some(k) = samples
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite(format!(
                "envelope sample {k} at t = {} us",
                grid.time(k)
            )));
        }
        Ok(Self {
            grid,
            samples,
            first: None,
            second: None,
        })
    }

    pub fn zeros(grid: TimeGrid) -> Self {
        Self {
            grid,
            samples: vec![ZERO; grid.len()],
            first: None,
            second: None,
        }
    }

    pub fn constant(grid: TimeGrid, value: C64) -> Self {
        Self {
            grid,
            samples: vec![value; grid.len()],
            first: Some(vec![ZERO; grid.len()]),
            second: Some(vec![ZERO; grid.len()]),
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> C64) -> Result<Self> {
        Self::new(grid, grid.times().map(f).collect())
    }

    /// Attach analytic first and second time derivatives.
    pub fn with_derivatives(mut self, first: Vec<C64>, second: Vec<C64>) -> Result<Self> {
        if first.len() != self.samples.len() || second.len() != self.samples.len() {
            return Err(Error::GridMismatch("derivative length".into()));
        }
        self.first = Some(first);
        self.second = Some(second);
        Ok(self)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<C64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.first.is_some() && self.second.is_some()
    }

    pub fn value(&self, k: usize) -> C64 {
        self.samples[k]
    }

    /// Value inside step `k` at `t_k + frac * dt`.
    pub fn at_stage(&self, k: usize, frac: f64, interp: Interpolation) -> C64 {
        grid::interpolate(&self.samples, k, frac, interp)
    }

    /// Value at an arbitrary time; zero outside the grid.
    pub fn at_time(&self, t: f64, interp: Interpolation) -> C64 {
        let x = (t - self.grid.t_start()) / self.grid.dt();
        if x < 0.0 || x > self.grid.n_steps() as f64 {
            return ZERO;
        }
        let k = (x.floor() as usize).min(self.grid.n_steps() - 1);
        self.at_stage(k, x - k as f64, interp)
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.samples.iter().map(|z| z.norm_sqr()).collect()
    }

    /// `int |a|^2 dt` over the grid.
    pub fn energy(&self) -> f64 {
        grid::integrate(&self.intensity(), self.grid.dt(), 0.0)
    }

    /// `int_{t_start}^{t_k} |a|^2 dt` for every sample.
    pub fn cumulative_energy(&self) -> Vec<f64> {
        grid::cumulative(&self.intensity(), self.grid.dt(), 0.0)
    }

    /// `int_{t_k}^{t_end} |a|^2 dt` for every sample.
    pub fn tail_energy(&self) -> Vec<f64> {
        grid::tail_integral(&self.intensity(), self.grid.dt())
    }

    pub fn is_normalized(&self) -> bool {
        (self.energy() - 1.0).abs() <= NORMALIZATION_TOL
    }

    pub fn peak(&self) -> f64 {
        self.samples.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * factor).collect(),
            first: self
                .first
                .as_ref()
                .map(|v| v.iter().map(|z| z * factor).collect()),
            second: self
                .second
                .as_ref()
                .map(|v| v.iter().map(|z| z * factor).collect()),
        }
    }

    /// Rescaled to unit energy. Fails for an all-zero envelope.
    pub fn normalized(&self) -> Result<Self> {
        let e = self.energy();
        if !(e > 0.0) {
            return Err(Error::InvalidParameter {
                name: "envelope",
                reason: "cannot normalize a zero envelope".into(),
            });
        }
        Ok(self.scaled(C64::new(1.0 / e.sqrt(), 0.0)))
    }

    /// Delayed by `k` samples: `out[i] = self[i - k]`, zero before arrival.
    pub fn delayed(&self, k: usize) -> Self {
        let shift = |v: &Vec<C64>| -> Vec<C64> {
            let n = v.len();
            let mut out = vec![ZERO; n];
            if k < n {
                out[k..].copy_from_slice(&v[..n - k]);
            }
            out
        };
        Self {
            grid: self.grid,
            samples: shift(&self.samples),
            first: self.first.as_ref().map(shift),
            second: self.second.as_ref().map(shift),
        }
    }

    /// First time derivative: analytic when attached, else second-order
    /// central differences (one-sided at the ends).
    pub fn first_derivative(&self) -> Vec<C64> {
        match &self.first {
            Some(d) => d.clone(),
            None => finite_difference(&self.samples, self.grid.dt()),
        }
    }

    pub fn second_derivative(&self) -> Vec<C64> {
        match &self.second {
            Some(d) => d.clone(),
            None => second_difference(&self.samples, self.grid.dt()),
        }
    }

    /// `int conj(self) * other dt`.
    pub fn overlap(&self, other: &Envelope) -> Result<C64> {
        self.grid.ensure_matches(&other.grid, "overlap")?;
        let prod: Vec<C64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(grid::integrate(&prod, self.grid.dt(), ZERO))
    }

    /// `sqrt(int |self - other|^2 dt)`.
    pub fn l2_distance(&self, other: &Envelope) -> Result<f64> {
        self.grid.ensure_matches(&other.grid, "l2 distance")?;
        let diff: Vec<f64> = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).norm_sqr())
            .collect();
        Ok(grid::integrate(&diff, self.grid.dt(), 0.0).max(0.0).sqrt())
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|&z| f(z)).collect(),
            first: None,
            second: None,
        }
    }
}

fn finite_difference(f: &[C64], dt: f64) -> Vec<C64> {
    let n = f.len();
    let mut d = vec![ZERO; n];
    if n < 3 {
        if n == 2 {
            let s = (f[1] - f[0]) / dt;
            d[0] = s;
            d[1] = s;
        }
        return d;
    }
    d[0] = (f[0] * -3.0 + f[1] * 4.0 - f[2]) / (2.0 * dt);
    d[n - 1] = (f[n - 1] * 3.0 - f[n - 2] * 4.0 + f[n - 3]) / (2.0 * dt);
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k - 1]) / (2.0 * dt);
    }
    d
}

fn second_difference(f: &[C64], dt: f64) -> Vec<C64> {
    let n = f.len();
    let mut d = vec![ZERO; n];
    if n < 4 {
        return d;
    }
    let h2 = dt * dt;
    d[0] = (f[0] * 2.0 - f[1] * 5.0 + f[2] * 4.0 - f[3]) / h2;
    d[n - 1] = (f[n - 1] * 2.0 - f[n - 2] * 5.0 + f[n - 3] * 4.0 - f[n - 4]) / h2;
    for k in 1..n - 1 {
        d[k] = (f[k + 1] - f[k] * 2.0 + f[k - 1]) / h2;
    }
    d
}

// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Uniform time grids and the fixed-stencil quadrature/interpolation used on them.

use crate::error::{Error, Result};

/// Uniform sampling of `[t_start, t_end]` with `n_steps` intervals (times in us).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    n_steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, n_steps: usize) -> Result<Self> {
        if !t_start.is_finite() || !t_end.is_finite() {
            return Err(Error::InvalidGrid("non-finite bounds".into()));
        }
        if t_end <= t_start {
            return Err(Error::InvalidGrid(format!(
                "t_end ({t_end}) must exceed t_start ({t_start})"
            )));
        }
        if n_steps < 2 {
            return Err(Error::InvalidGrid(format!("n_steps = {n_steps} < 2")));
        }
        Ok(Self {
            t_start,
            t_end,
            n_steps,
        })
    }

    /// Smallest grid on `[t_start, t_end]` whose step does not exceed `dt_max`.
    pub fn with_max_step(t_start: f64, t_end: f64, dt_max: f64) -> Result<Self> {
        if !(dt_max > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "dt_max = {dt_max} must be positive"
            )));
        }
        let n = ((t_end - t_start) / dt_max).ceil().max(2.0) as usize;
        Self::new(t_start, t_end, n)
    }

    /// Grid starting at `t_start` with exactly step `dt`, long enough to reach `t_end`.
    pub fn with_step(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::InvalidGrid(format!("dt = {dt} must be positive")));
        }
        let n = ((t_end - t_start) / dt - 1e-9).ceil().max(2.0) as usize;
        Self::new(t_start, t_start + n as f64 * dt, n)
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    /// Number of samples, `n_steps + 1`.
    pub fn len(&self) -> usize {
        self.n_steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dt(&self) -> f64 {
        (self.t_end - self.t_start) / self.n_steps as f64
    }

    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.n_steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |k| self.time(k))
    }

    /// Same interval, `factor` times as many steps.
    pub fn refined(&self, factor: usize) -> Self {
        Self {
            n_steps: self.n_steps * factor.max(1),
            ..*self
        }
    }

    /// Index of the sample nearest to `t`, clamped to the grid.
    pub fn nearest_index(&self, t: f64) -> usize {
        let x = ((t - self.t_start) / self.dt()).round();
        x.clamp(0.0, self.n_steps as f64) as usize
    }

    pub fn matches(&self, other: &TimeGrid) -> bool {
        let scale = self.duration().abs().max(1.0);
        self.n_steps == other.n_steps
            && (self.t_start - other.t_start).abs() <= 1e-12 * scale
            && (self.t_end - other.t_end).abs() <= 1e-12 * scale
    }

    pub fn ensure_matches(&self, other: &TimeGrid, what: &str) -> Result<()> {
        if self.matches(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "{what}: [{}, {}]/{} vs [{}, {}]/{}",
                self.t_start, self.t_end, self.n_steps, other.t_start, other.t_end, other.n_steps
            )))
        }
    }
}

/// How envelope values between grid samples are reconstructed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Interpolation {
    Linear,
    /// Four-point Lagrange; keeps fourth-order accuracy of the one-step schemes.
    #[default]
    Cubic,
}

impl Interpolation {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "linear" => Ok(Self::Linear),
            "cubic" => Ok(Self::Cubic),
            other => Err(Error::UnknownName {
                kind: "interpolation",
                name: other.to_string(),
                known: "cubic, linear".into(),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::Cubic => "cubic",
        }
    }
}

/// Lagrange weights for nodes at 0, 1, 2, 3 evaluated at `x`.
#[inline]
pub(crate) fn lagrange4(x: f64) -> [f64; 4] {
    let a = x;
    let b = x - 1.0;
    let c = x - 2.0;
    let d = x - 3.0;
    [
        -b * c * d / 6.0,
        a * c * d / 2.0,
        -a * b * d / 2.0,
        a * b * c / 6.0,
    ]
}

/// Value of a sampled function inside interval `k` at fraction `frac` in [0, 1].
pub(crate) fn interpolate<T>(samples: &[T], k: usize, frac: f64, interp: Interpolation) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let last = samples.len() - 1;
    if frac == 0.0 || k >= last {
        return samples[k.min(last)];
    }
    if frac == 1.0 {
        return samples[k + 1];
    }
    if interp == Interpolation::Linear || samples.len() < 4 {
        return samples[k] * (1.0 - frac) + samples[k + 1] * frac;
    }
    let first = k.saturating_sub(1).min(last - 3);
    let w = lagrange4(k as f64 + frac - first as f64);
    samples[first] * w[0]
        + samples[first + 1] * w[1]
        + samples[first + 2] * w[2]
        + samples[first + 3] * w[3]
}

/// Running integral of uniformly sampled data, exact for cubics on every interval.
///
/// Interior intervals use the symmetric stencil (-1, 13, 13, -1)/24; the two end
/// intervals use the one-sided (9, 19, -5, 1)/24. Fewer than four samples fall
/// back to the trapezoid rule.
pub fn cumulative<T>(samples: &[T], dt: f64, zero: T) -> Vec<T>
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    out.push(zero);
    if n < 2 {
        return out;
    }
    let mut acc = zero;
    for k in 0..n - 1 {
        let piece = interval_integral(samples, k, dt);
        acc = acc + piece;
        out.push(acc);
    }
    out
}

/// Integral over `[t_k, t_k+1]`.
#[inline]
pub(crate) fn interval_integral<T>(f: &[T], k: usize, dt: f64) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let n = f.len();
    if n < 4 {
        return (f[k] + f[k + 1]) * (0.5 * dt);
    }
    let h = dt / 24.0;
    if k == 0 {
        f[0] * (9.0 * h) + f[1] * (19.0 * h) + f[2] * (-5.0 * h) + f[3] * h
    } else if k == n - 2 {
        f[n - 1] * (9.0 * h) + f[n - 2] * (19.0 * h) + f[n - 3] * (-5.0 * h) + f[n - 4] * h
    } else {
        f[k - 1] * (-h) + f[k] * (13.0 * h) + f[k + 1] * (13.0 * h) + f[k + 2] * (-h)
    }
}

/// Integral over the whole grid with the same stencils as [`cumulative`].
pub fn integrate<T>(samples: &[T], dt: f64, zero: T) -> T
where
    T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
{
    let mut acc = zero;
    for k in 0..samples.len().saturating_sub(1) {
        acc = acc + interval_integral(samples, k, dt);
    }
    acc
}

/// Integral from each sample to the end of the grid, accumulated backwards so
/// small tails keep full relative precision.
pub fn tail_integral(samples: &[f64], dt: f64) -> Vec<f64> {
    let n = samples.len();
    let mut out = vec![0.0; n];
    let mut acc = 0.0;
    for k in (0..n.saturating_sub(1)).rev() {
        acc += interval_integral(samples, k, dt);
        out[k] = acc;
    }
    out
}

// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Target photon wavepackets.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{Interpolation, TimeGrid};

/// Half-width of the default window in units of `1/sqrt(Gamma)`.
pub const GAUSSIAN_WINDOW_WIDTHS: f64 = 5.0;

/// Normalized `exp(-Gamma (t - t0)^2)`; `gamma_us2` in us^-2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub gamma_us2: f64,
    pub t0_us: f64,
}

impl Gaussian {
    pub fn new(gamma_us2: f64, t0_us: f64) -> Result<Self> {
        if !(gamma_us2 > 0.0) || !gamma_us2.is_finite() {
            return Err(Error::InvalidParameter {
                name: "Gamma_us2",
                reason: format!("must be positive, got {gamma_us2}"),
            });
        }
        if !t0_us.is_finite() {
            return Err(Error::NonFinite(format!("t0_us = {t0_us}")));
        }
        Ok(Self { gamma_us2, t0_us })
    }

    fn norm(&self) -> f64 {
        (2.0 * self.gamma_us2 / PI).powf(0.25)
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = t - self.t0_us;
        self.norm() * (-self.gamma_us2 * x * x).exp()
    }

    /// `t0 -/+ 5 / sqrt(Gamma)`.
    pub fn default_window(&self) -> (f64, f64) {
        let half = GAUSSIAN_WINDOW_WIDTHS / self.gamma_us2.sqrt();
        (self.t0_us - half, self.t0_us + half)
    }

    /// Samples with analytic first and second derivatives attached.
    pub fn sample(&self, grid: &TimeGrid) -> Envelope {
        let g = self.gamma_us2;
        let mut v = Vec::with_capacity(grid.len());
        let mut d1 = Vec::with_capacity(grid.len());
        let mut d2 = Vec::with_capacity(grid.len());
        for t in grid.times() {
            let x = t - self.t0_us;
            let a = self.value(t);
            v.push(C64::new(a, 0.0));
            d1.push(C64::new(-2.0 * g * x * a, 0.0));
            d2.push(C64::new((4.0 * g * g * x * x - 2.0 * g) * a, 0.0));
        }
        Envelope::new(*grid, v)
            .and_then(|e| e.with_derivatives(d1, d2))
            .expect("gaussian samples are finite")
    }
}

/// Wavepacket read from a CSV file with columns `t_us, re, im`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledPacket {
    pub times: Vec<f64>,
    pub values: Vec<C64>,
}

impl SampledPacket {
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)?;
        let mut times = Vec::new();
        let mut values = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| {
                        Error::Config(format!("{}: missing column {i}", path.display()))
                    })?
                    .parse::<f64>()
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            };
            times.push(field(0)?);
            values.push(C64::new(field(1)?, field(2).unwrap_or(0.0)));
        }
        if times.len() < 4 {
            return Err(Error::Config(format!(
                "{}: need at least 4 samples",
                path.display()
            )));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config(format!(
                "{}: times must be strictly increasing",
                path.display()
            )));
        }
        Ok(Self { times, values })
    }

    pub fn window(&self) -> (f64, f64) {
        (self.times[0], *self.times.last().unwrap())
    }

    /// Resampled onto `grid` by cubic interpolation, zero outside the file's span.
    pub fn sample(&self, grid: &TimeGrid) -> Result<Envelope> {
        let n = self.times.len();
        let samples = grid
            .times()
            .map(|t| {
                if t < self.times[0] || t > self.times[n - 1] {
                    return C64::default();
                }
                let k = match self.times.partition_point(|&x| x <= t) {
                    0 => 0,
                    p => (p - 1).min(n - 2),
                };
                let first = k.saturating_sub(1).min(n - 4);
                let nodes = &self.times[first..first + 4];
                let mut acc = C64::default();
                for i in 0..4 {
                    let mut w = 1.0;
                    for j in 0..4 {
                        if i != j {
                            w *= (t - nodes[j]) / (nodes[i] - nodes[j]);
                        }
                    }
                    acc += self.values[first + i] * w;
                }
                acc
            })
            .collect();
        Envelope::new(*grid, samples)
    }
}

/// A target wavepacket of either kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Wavepacket {
    Gaussian(Gaussian),
    Sampled(SampledPacket),
}

impl Wavepacket {
    pub fn default_window(&self) -> (f64, f64) {
        match self {
            Self::Gaussian(g) => g.default_window(),
            Self::Sampled(s) => s.window(),
        }
    }

    /// Normalized samples on `grid`.
    pub fn sample(&self, grid: &TimeGrid) -> Result<Envelope> {
        match self {
            Self::Gaussian(g) => g.sample(grid).normalized(),
            Self::Sampled(s) => s.sample(grid)?.normalized(),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Self::Gaussian(g) => format!(
                "gaussian Gamma = {} us^-2, t0 = {} us",
                g.gamma_us2, g.t0_us
            ),
            Self::Sampled(s) => format!("sampled ({} points)", s.times.len()),
        }
    }
}

/// Time reverse of `env` on its own grid (mirror about the grid center), conjugated.
pub fn time_reversed(env: &Envelope) -> Envelope {
    let mut v: Vec<C64> = env.samples().iter().map(|z| z.conj()).collect();
    v.reverse();
    Envelope::new(*env.grid(), v).expect("reversal keeps samples finite")
}

/// Evaluate `env` on another grid.
pub fn resample(env: &Envelope, grid: &TimeGrid) -> Envelope {
    Envelope::new(
        *grid,
        grid.times()
            .map(|t| env.at_time(t, Interpolation::Cubic))
            .collect(),
    )
    .expect("interpolated samples are finite")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::io::Write;

    #[test]
    fn quoted_width_gives_six_us_window_half_width() {
        let g = Gaussian::new(0.15 * PI * 2f64.sqrt(), 0.0).unwrap();
        assert_relative_eq!(g.gamma_us2, 0.6664, epsilon = 1e-4);
        let (a, b) = g.default_window();
        assert_relative_eq!(b, -a);
        assert_relative_eq!(b, 6.125, epsilon = 1e-3);
    }

    #[test]
    fn gaussian_is_normalized_on_default_window() {
        let g = Gaussian::new(0.6664, 1.0).unwrap();
        let (a, b) = g.default_window();
        let grid = TimeGrid::new(a, b, 3000).unwrap();
        assert_relative_eq!(g.sample(&grid).energy(), 1.0, epsilon = 1e-10);
    }

    #[test]
    fn rejects_bad_width() {
        assert!(Gaussian::new(0.0, 0.0).is_err());
        assert!(Gaussian::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn sampled_packet_round_trip() {
        let g = Gaussian::new(1.0, 0.0).unwrap();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "t_us,re,im").unwrap();
        for k in 0..=400 {
            let t = -5.0 + k as f64 * 0.025;
            writeln!(f, "{t},{},0", g.value(t)).unwrap();
        }
        f.flush().unwrap();
        let p = SampledPacket::from_csv(f.path()).unwrap();
        let grid = TimeGrid::new(-5.0, 5.0, 1000).unwrap();
        let env = p.sample(&grid).unwrap();
        for k in (0..=1000).step_by(50) {
            assert_relative_eq!(env.value(k).re, g.value(grid.time(k)), epsilon = 1e-6);
        }
    }

    #[test]
    fn time_reversal_is_an_involution() {
        let g = Gaussian::new(1.0, 0.7).unwrap();
        let grid = TimeGrid::new(-5.0, 5.0, 100).unwrap();
        let e = g.sample(&grid);
        let r = time_reversed(&e);
        assert_relative_eq!(r.value(0).re, e.value(100).re);
        assert_eq!(time_reversed(&r).samples(), e.samples());
    }
}

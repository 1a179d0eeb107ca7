// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin, phonon and cavity in a truncated Fock space with the counter-rotating
//! couplings kept.
//!
//! The state is written in the interaction picture of
//! `omega (sigma_z / 2 + b^dag b + c^dag c)`, where the rotating-wave terms are
//! static and the counter-rotating ones carry `exp(+-2 i omega t)`:
//!
//! `H = lambda/2 sigma+ (b + e^{2iwt} b^dag) + G c^dag (b + e^{2iwt} b^dag) + h.c.`
//!
//! The fiber is replaced by the Markovian decay `-i (gamma + gamma_c)/2 c^dag c`,
//! and `gamma_r`, `gamma_q` enter as `-i gamma_r/2 b^dag b`, `-i gamma_q/2 |up><up|`.

use num_complex::Complex64 as C64;

use super::{run_substepped, SubstepClock};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::{Interpolation, TimeGrid};
use crate::model::{NodeParams, NodeState};
use crate::scheme::OdeSystem;

const I: C64 = C64::new(0.0, 1.0);

/// Population tolerated in the highest kept Fock level.
pub const OVERFLOW_TOL: f64 = 1e-6;

/// Default bound on `2 omega h` for the inner steps.
pub const DEFAULT_PHASE_STEP: f64 = 0.05;

/// Warn when `omega_p` is not at least this many times the couplings.
pub const MIN_FREQUENCY_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FockTruncation {
    pub n_phonon_max: usize,
    pub n_cavity_max: usize,
}

impl FockTruncation {
    pub fn new(n_phonon_max: usize, n_cavity_max: usize) -> Result<Self> {
        if n_phonon_max < 2 || n_cavity_max < 2 {
            return Err(Error::InvalidParameter {
                name: "truncation",
                reason: format!(
                    "cutoffs must be at least 2, got phonon {n_phonon_max}, cavity {n_cavity_max}"
                ),
            });
        }
        Ok(Self {
            n_phonon_max,
            n_cavity_max,
        })
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_phonon_max + 1) * (self.n_cavity_max + 1)
    }

    /// Index of `|spin, n_phonon, n_cavity>`; spin 1 is up.
    pub fn index(&self, spin: usize, n: usize, m: usize) -> usize {
        (spin * (self.n_phonon_max + 1) + n) * (self.n_cavity_max + 1) + m
    }
}

impl Default for FockTruncation {
    fn default() -> Self {
        Self {
            n_phonon_max: 3,
            n_cavity_max: 3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NonRwaRun {
    pub grid: TimeGrid,
    /// Amplitudes of `|up,0,0>`, `|down,1,0>`, `|down,0,1>`.
    pub states: Vec<NodeState>,
    /// Population outside those three states at each sample.
    pub leakage: Vec<f64>,
    pub max_cutoff_population: f64,
    pub substeps: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
enum Coupling {
    /// `lambda/2 sigma+ b` and its counter-rotating partner `sigma+ b^dag`.
    SpinUp { counter: bool },
    /// `conj(lambda)/2 sigma- b^dag` and `sigma- b`.
    SpinDown { counter: bool },
    /// `G c^dag b` and `G c^dag b^dag`.
    CavityUp { counter: bool },
    /// `conj(G) c b^dag` and `conj(G) c b`.
    CavityDown { counter: bool },
}

#[derive(Debug, Clone, Copy)]
struct Transition {
    from: usize,
    to: usize,
    amplitude: f64,
    kind: Coupling,
}

fn transitions(tr: &FockTruncation) -> Vec<Transition> {
    let (np, nc) = (tr.n_phonon_max, tr.n_cavity_max);
    let mut out = Vec::new();
    let mut push = |from, to, amplitude: f64, kind| {
        if amplitude != 0.0 {
            out.push(Transition {
                from,
                to,
                amplitude,
                kind,
            })
        }
    };
    for s in 0..2 {
        for n in 0..=np {
            for m in 0..=nc {
                let from = tr.index(s, n, m);
                let up_n = (n < np).then(|| ((n + 1) as f64).sqrt());
                let down_n = (n > 0).then(|| (n as f64).sqrt());
                if s == 0 {
                    if let Some(a) = down_n {
                        push(
                            from,
                            tr.index(1, n - 1, m),
                            a,
                            Coupling::SpinUp { counter: false },
                        );
                    }
                    if let Some(a) = up_n {
                        push(
                            from,
                            tr.index(1, n + 1, m),
                            a,
                            Coupling::SpinUp { counter: true },
                        );
                    }
                } else {
                    if let Some(a) = up_n {
                        push(
                            from,
                            tr.index(0, n + 1, m),
                            a,
                            Coupling::SpinDown { counter: false },
                        );
                    }
                    if let Some(a) = down_n {
                        push(
                            from,
                            tr.index(0, n - 1, m),
                            a,
                            Coupling::SpinDown { counter: true },
                        );
                    }
                }
                if m < nc {
                    let c = ((m + 1) as f64).sqrt();
                    if let Some(a) = down_n {
                        push(
                            from,
                            tr.index(s, n - 1, m + 1),
                            a * c,
                            Coupling::CavityUp { counter: false },
                        );
                    }
                    if let Some(a) = up_n {
                        push(
                            from,
                            tr.index(s, n + 1, m + 1),
                            a * c,
                            Coupling::CavityUp { counter: true },
                        );
                    }
                }
                if m > 0 {
                    let c = (m as f64).sqrt();
                    if let Some(a) = up_n {
                        push(
                            from,
                            tr.index(s, n + 1, m - 1),
                            a * c,
                            Coupling::CavityDown { counter: false },
                        );
                    }
                    if let Some(a) = down_n {
                        push(
                            from,
                            tr.index(s, n - 1, m - 1),
                            a * c,
                            Coupling::CavityDown { counter: true },
                        );
                    }
                }
            }
        }
    }
    out
}

struct FullSystem<'a> {
    params: &'a NodeParams,
    control: &'a Envelope,
    grid: &'a TimeGrid,
    clock: SubstepClock,
    trunc: FockTruncation,
    links: Vec<Transition>,
    /// Decay rate of each basis state, half the summed loss rates.
    decay: Vec<f64>,
}

impl OdeSystem for FullSystem<'_> {
    fn dim(&self) -> usize {
        self.trunc.dim()
    }

    fn eval(&self, step: usize, frac: f64, y: &[C64], dy: &mut [C64]) {
        let (k, f) = self.clock.locate(step, frac);
        let t = self.grid.time(k) + f * self.grid.dt();
        let lambda = self.control.at_stage(k, f, Interpolation::Cubic);
        let rot = C64::from_polar(1.0, 2.0 * self.params.omega_p * t);
        let g = self.params.g;
        for (d, (yi, rate)) in dy.iter_mut().zip(y.iter().zip(&self.decay)) {
            *d = -*yi * *rate;
        }
        for l in &self.links {
            let coeff = match l.kind {
                Coupling::SpinUp { counter } => {
                    0.5 * lambda * if counter { rot } else { C64::new(1.0, 0.0) }
                }
                Coupling::SpinDown { counter } => {
                    0.5 * lambda.conj()
                        * if counter {
                            rot.conj()
                        } else {
                            C64::new(1.0, 0.0)
                        }
                }
                Coupling::CavityUp { counter } => {
                    g * if counter { rot } else { C64::new(1.0, 0.0) }
                }
                Coupling::CavityDown { counter } => {
                    g.conj()
                        * if counter {
                            rot.conj()
                        } else {
                            C64::new(1.0, 0.0)
                        }
                }
            };
            dy[l.to] += -I * coeff * l.amplitude * y[l.from];
        }
    }
}

/// Evolves `initial` (embedded in the truncated space) under the full
/// Hamiltonian and records the three tracked amplitudes on `grid`.
pub fn evolve_nonrwa(
    initial: NodeState,
    params: &NodeParams,
    control: &Envelope,
    trunc: FockTruncation,
    grid: &TimeGrid,
) -> Result<NonRwaRun> {
    evolve_nonrwa_with(initial, params, control, trunc, grid, DEFAULT_PHASE_STEP)
}

pub fn evolve_nonrwa_with(
    initial: NodeState,
    params: &NodeParams,
    control: &Envelope,
    trunc: FockTruncation,
    grid: &TimeGrid,
    phase_step: f64,
) -> Result<NonRwaRun> {
    params.check_resonance()?;
    control.grid().ensure_matches(grid, "control")?;
    let trunc = FockTruncation::new(trunc.n_phonon_max, trunc.n_cavity_max)?;
    let mut warnings = Vec::new();
    let coupling = control.peak().max(params.g.norm());
    if params.omega_p < MIN_FREQUENCY_RATIO * coupling {
        warnings.push(format!(
            "omega_p = {:.4} rad/us is not well above the couplings ({coupling:.4} rad/us)",
            params.omega_p
        ));
    }

    let rate = (2.0 * params.omega_p)
        .max(params.fastest_rate())
        .max(control.peak());
    let substeps = ((grid.dt() * rate / phase_step).ceil() as usize).max(1);
    let dim = trunc.dim();
    let mut decay = vec![0.0; dim];
    for s in 0..2 {
        for n in 0..=trunc.n_phonon_max {
            for m in 0..=trunc.n_cavity_max {
                let r = 0.5
                    * ((params.gamma + params.gamma_c) * m as f64
                        + params.gamma_r * n as f64
                        + params.gamma_q * s as f64);
                decay[trunc.index(s, n, m)] = r;
            }
        }
    }
    let sys = FullSystem {
        params,
        control,
        grid,
        clock: SubstepClock { substeps },
        trunc,
        links: transitions(&trunc),
        decay,
    };

    let tracked = [
        trunc.index(1, 0, 0),
        trunc.index(0, 1, 0),
        trunc.index(0, 0, 1),
    ];
    let at_cutoff: Vec<usize> = (0..2)
        .flat_map(|s| {
            (0..=trunc.n_phonon_max).flat_map(move |n| {
                (0..=trunc.n_cavity_max)
                    .filter(move |&m| n == trunc.n_phonon_max || m == trunc.n_cavity_max)
                    .map(move |m| trunc.index(s, n, m))
            })
        })
        .collect();

    let mut y = vec![C64::default(); dim];
    let init = initial.to_array();
    for (i, &idx) in tracked.iter().enumerate() {
        y[idx] = init[i];
    }
    let mut states = Vec::with_capacity(grid.len());
    let mut leakage = Vec::with_capacity(grid.len());
    let mut max_cutoff: f64 = 0.0;
    run_substepped(&sys, &mut y, grid, substeps, |_, y| {
        let s = NodeState::new(y[tracked[0]], y[tracked[1]], y[tracked[2]]);
        let total: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        leakage.push((total - s.population()).max(0.0));
        let edge: f64 = at_cutoff.iter().map(|&i| y[i].norm_sqr()).sum();
        max_cutoff = max_cutoff.max(edge);
        states.push(s);
    })?;
    if max_cutoff > OVERFLOW_TOL {
        return Err(Error::TruncationOverflow {
            population: max_cutoff,
        });
    }
    Ok(NonRwaRun {
        grid: *grid,
        states,
        leakage,
        max_cutoff_population: max_cutoff,
        substeps,
        warnings,
    })
}

// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Explicit one-step integration schemes, registered by name.
//!
//! Every scheme advances a linear complex ODE `dy/dt = f(t, y)` by one grid
//! step. Stage times are passed to the system as `(step index, fraction)` so
//! sampled controls can be interpolated consistently.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Right-hand side of a complex ODE sampled on a uniform grid.
pub trait OdeSystem {
    fn dim(&self) -> usize;

    /// Writes `dy/dt` at time `t_step + frac * dt` into `dy`.
    fn eval(&self, step: usize, frac: f64, y: &[C64], dy: &mut [C64]);
}

pub trait Scheme: Send + Sync + fmt::Debug {
    fn name(&self) -> &'static str;

    /// Nominal convergence order.
    fn order(&self) -> u32;

    fn step(&self, sys: &dyn OdeSystem, step: usize, dt: f64, y: &mut [C64], work: &mut Workspace);
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default)]
pub struct Workspace {
    stages: Vec<Vec<C64>>,
    tmp: Vec<C64>,
}

impl Workspace {
    fn prepare(&mut self, n_stages: usize, dim: usize) {
        if self.stages.len() != n_stages || self.tmp.len() != dim {
            self.stages = vec![vec![C64::default(); dim]; n_stages];
            self.tmp = vec![C64::default(); dim];
        }
    }
}

/// Explicit Runge-Kutta method given by its Butcher tableau.
#[derive(Debug, Clone)]
pub struct ButcherScheme {
    name: &'static str,
    order: u32,
    a: Vec<Vec<f64>>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl ButcherScheme {
    pub fn new(name: &'static str, order: u32, a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len());
        assert_eq!(b.len(), c.len());
        Self {
            name,
            order,
            a,
            b,
            c,
        }
    }

    /// Classical fourth-order Runge-Kutta.
    pub fn rk4() -> Self {
        Self::new(
            "rk4",
            4,
            vec![vec![], vec![0.5], vec![0.0, 0.5], vec![0.0, 0.0, 1.0]],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
        )
    }

    /// Kutta's 3/8 rule.
    pub fn rk38() -> Self {
        Self::new(
            "rk38",
            4,
            vec![
                vec![],
                vec![1.0 / 3.0],
                vec![-1.0 / 3.0, 1.0],
                vec![1.0, -1.0, 1.0],
            ],
            vec![1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
            vec![0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0],
        )
    }

    /// Forward Euler; only useful as a low-order reference.
    pub fn euler() -> Self {
        Self::new("euler", 1, vec![vec![]], vec![1.0], vec![0.0])
    }
}

impl Scheme for ButcherScheme {
    fn name(&self) -> &'static str {
        self.name
    }

    fn order(&self) -> u32 {
        self.order
    }

    fn step(&self, sys: &dyn OdeSystem, step: usize, dt: f64, y: &mut [C64], work: &mut Workspace) {
        let dim = y.len();
        let s = self.b.len();
        work.prepare(s, dim);
        for i in 0..s {
            work.tmp.copy_from_slice(y);
            for (j, &aij) in self.a[i].iter().enumerate() {
                if aij != 0.0 {
                    let kj = &work.stages[j];
                    for (t, k) in work.tmp.iter_mut().zip(kj) {
                        *t += k * (aij * dt);
                    }
                }
            }
            sys.eval(step, self.c[i], &work.tmp, &mut work.stages[i]);
        }
        for (i, &bi) in self.b.iter().enumerate() {
            for (yv, k) in y.iter_mut().zip(&work.stages[i]) {
                *yv += k * (bi * dt);
            }
        }
    }
}

/// Named collection of schemes; `rk4` is the default.
#[derive(Clone)]
pub struct SchemeRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Scheme>>,
}

impl fmt::Debug for SchemeRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.entries.keys()).finish()
    }
}

pub const DEFAULT_SCHEME: &str = "rk4";

impl SchemeRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    /// The fourth-order schemes shipped with the crate.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Arc::new(ButcherScheme::rk4()));
        r.register(Arc::new(ButcherScheme::rk38()));
        r
    }

    /// Adds or replaces a scheme under its own name.
    pub fn register(&mut self, scheme: Arc<dyn Scheme>) {
        self.entries.insert(scheme.name(), scheme);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Scheme>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "integration scheme",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

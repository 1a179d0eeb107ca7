// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation amplitude model of one interface node.
//!
//! The excited invariant subspace is spanned by |up,0,0>, |down,1,0> and
//! |down,0,1> (spin, phonon number, cavity photon number) plus one photon in
//! the fiber continuum. After eliminating the continuum the node amplitudes
//! obey, at resonance and in the interaction picture,
//!
//! ```text
//! d(beta_q)/dt = -i (lambda/2) beta_r                           - (gamma_q/2) beta_q
//! d(beta_r)/dt = -i (conj(lambda)/2 beta_q + conj(G) beta_c)    - (gamma_r/2) beta_r
//! d(beta_c)/dt = -i G beta_r - sqrt(gamma) alpha_in - ((gamma + gamma_c)/2) beta_c
//! alpha_out    = alpha_in + sqrt(gamma) beta_c
//! ```

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::units;

const I: C64 = C64::new(0.0, 1.0);

/// Rates and couplings of one node, all in rad/us.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeParams {
    /// Cavity-to-fiber extraction rate; the fiber coupling constant is `sqrt(gamma / 2pi)`.
    pub gamma: f64,
    /// Linearized optomechanical coupling.
    pub g: C64,
    /// Largest spin-phonon coupling reachable by the gate field; `None` is unbounded.
    pub lambda_max: Option<f64>,
    pub delta_c: f64,
    pub omega_p: f64,
    pub omega_q: f64,
    /// Spin dephasing.
    pub gamma_q: f64,
    /// Mechanical damping.
    pub gamma_r: f64,
    /// Intrinsic cavity loss.
    pub gamma_c: f64,
}

/// Flexural mode frequency used when none is given: 2pi * 360 MHz.
pub const DEFAULT_OMEGA_P: f64 = TAU * 360.0;

impl NodeParams {
    /// Lossless node at resonance with the default mechanical frequency.
    pub fn resonant(gamma: f64, g: f64) -> Self {
        Self {
            gamma,
            g: C64::new(g, 0.0),
            lambda_max: None,
            delta_c: DEFAULT_OMEGA_P,
            omega_p: DEFAULT_OMEGA_P,
            omega_q: DEFAULT_OMEGA_P,
            gamma_q: 0.0,
            gamma_r: 0.0,
            gamma_c: 0.0,
        }
    }

    /// Lossless node from `gamma/2pi` and `G/2pi` in MHz.
    pub fn from_mhz(gamma_mhz: f64, g_mhz: f64) -> Self {
        Self::resonant(units::mhz_2pi(gamma_mhz), units::mhz_2pi(g_mhz))
    }

    pub fn with_decoherence(mut self, gamma_q: f64, gamma_r: f64, gamma_c: f64) -> Self {
        self.gamma_q = gamma_q;
        self.gamma_r = gamma_r;
        self.gamma_c = gamma_c;
        self
    }

    pub fn with_lambda_max(mut self, lambda_max: Option<f64>) -> Self {
        self.lambda_max = lambda_max;
        self
    }

    pub fn lossless(mut self) -> Self {
        self.gamma_q = 0.0;
        self.gamma_r = 0.0;
        self.gamma_c = 0.0;
        self
    }

    /// Fiber coupling constant `kappa = sqrt(gamma / 2pi)`.
    pub fn kappa(&self) -> f64 {
        (self.gamma / TAU).sqrt()
    }

    pub fn is_lossless(&self) -> bool {
        self.gamma_q == 0.0 && self.gamma_r == 0.0 && self.gamma_c == 0.0
    }

    /// Largest rate entering the amplitude equations (excluding the control).
    pub fn fastest_rate(&self) -> f64 {
        [
            self.gamma,
            self.g.norm(),
            self.gamma_q,
            self.gamma_r,
            self.gamma_c,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Finiteness and sign checks.
    pub fn validate(&self) -> Result<()> {
        let rates = [
            ("gamma", self.gamma),
            ("gamma_q", self.gamma_q),
            ("gamma_r", self.gamma_r),
            ("gamma_c", self.gamma_c),
        ];
        for (name, v) in rates {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
            if v < 0.0 {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("rate must be non-negative, got {v}"),
                });
            }
        }
        if !self.g.re.is_finite() || !self.g.im.is_finite() {
            return Err(Error::NonFinite(format!("G = {}", self.g)));
        }
        for (name, v) in [
            ("Delta_c", self.delta_c),
            ("omega_p", self.omega_p),
            ("omega_q", self.omega_q),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(format!("{name} = {v}")));
            }
        }
        if let Some(m) = self.lambda_max {
            if !(m >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "lambda_max",
                    reason: format!("must be non-negative, got {m}"),
                });
            }
        }
        Ok(())
    }

    /// Validation plus the resonance condition `Delta_c = omega_p = omega_q`.
    pub fn check_resonance(&self) -> Result<()> {
        self.validate()?;
        let scale = self
            .delta_c
            .abs()
            .max(self.omega_p.abs())
            .max(self.omega_q.abs())
            .max(1.0);
        let tol = 1e-9 * scale;
        if (self.delta_c - self.omega_p).abs() > tol || (self.omega_p - self.omega_q).abs() > tol {
            return Err(Error::OffResonance {
                delta_c: self.delta_c,
                omega_p: self.omega_p,
                omega_q: self.omega_q,
            });
        }
        Ok(())
    }
}

/// Amplitudes of |up,0,0>, |down,1,0>, |down,0,1>.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NodeState {
    pub beta_q: C64,
    pub beta_r: C64,
    pub beta_c: C64,
}

impl NodeState {
    pub const ZERO: NodeState = NodeState {
        beta_q: C64::new(0.0, 0.0),
        beta_r: C64::new(0.0, 0.0),
        beta_c: C64::new(0.0, 0.0),
    };

    pub fn new(beta_q: C64, beta_r: C64, beta_c: C64) -> Self {
        Self {
            beta_q,
            beta_r,
            beta_c,
        }
    }

    /// Spin excited, phonon and cavity empty.
    pub fn excited() -> Self {
        Self::new(C64::new(1.0, 0.0), C64::default(), C64::default())
    }

    /// `|beta_q|^2 + |beta_r|^2 + |beta_c|^2`.
    pub fn population(&self) -> f64 {
        self.beta_q.norm_sqr() + self.beta_r.norm_sqr() + self.beta_c.norm_sqr()
    }

    pub fn to_array(self) -> [C64; 3] {
        [self.beta_q, self.beta_r, self.beta_c]
    }

    pub fn from_slice(v: &[C64]) -> Self {
        Self::new(v[0], v[1], v[2])
    }

    pub fn is_finite(&self) -> bool {
        self.to_array()
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_deviation(&self, other: &NodeState) -> f64 {
        let d = *self - *other;
        d.to_array().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

impl Add for NodeState {
    type Output = NodeState;
    fn add(self, o: NodeState) -> NodeState {
        NodeState::new(
            self.beta_q + o.beta_q,
            self.beta_r + o.beta_r,
            self.beta_c + o.beta_c,
        )
    }
}

impl Sub for NodeState {
    type Output = NodeState;
    fn sub(self, o: NodeState) -> NodeState {
        NodeState::new(
            self.beta_q - o.beta_q,
            self.beta_r - o.beta_r,
            self.beta_c - o.beta_c,
        )
    }
}

impl Mul<C64> for NodeState {
    type Output = NodeState;
    fn mul(self, s: C64) -> NodeState {
        NodeState::new(self.beta_q * s, self.beta_r * s, self.beta_c * s)
    }
}

impl Mul<f64> for NodeState {
    type Output = NodeState;
    fn mul(self, s: f64) -> NodeState {
        NodeState::new(self.beta_q * s, self.beta_r * s, self.beta_c * s)
    }
}

/// Time derivative of the node amplitudes. Rejects non-finite input and
/// parameter sets off resonance.
pub fn rhs(
    state: &NodeState,
    params: &NodeParams,
    lambda_t: C64,
    alpha_in_t: C64,
) -> Result<NodeState> {
    params.check_resonance()?;
    if !state.is_finite() {
        return Err(Error::NonFinite(format!("state {state:?}")));
    }
    for (name, z) in [("lambda", lambda_t), ("alpha_in", alpha_in_t)] {
        if !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NonFinite(format!("{name} = {z}")));
        }
    }
    Ok(rhs_unchecked(state, params, lambda_t, alpha_in_t))
}

#[inline]
pub(crate) fn rhs_unchecked(
    s: &NodeState,
    p: &NodeParams,
    lambda: C64,
    alpha_in: C64,
) -> NodeState {
    let half_lambda = lambda * 0.5;
    NodeState {
        beta_q: -I * half_lambda * s.beta_r - s.beta_q * (0.5 * p.gamma_q),
        beta_r: -I * (half_lambda.conj() * s.beta_q + p.g.conj() * s.beta_c)
            - s.beta_r * (0.5 * p.gamma_r),
        beta_c: -I * p.g * s.beta_r
            - alpha_in * p.gamma.sqrt()
            - s.beta_c * (0.5 * (p.gamma + p.gamma_c)),
    }
}

/// Input-output relation `alpha_out = alpha_in + sqrt(gamma) beta_c`.
#[inline]
pub fn output_field(state: &NodeState, params: &NodeParams, alpha_in_t: C64) -> C64 {
    alpha_in_t + state.beta_c * params.gamma.sqrt()
}

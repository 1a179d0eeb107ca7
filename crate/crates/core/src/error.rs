// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("resonance condition violated: Delta_c = {delta_c}, omega_p = {omega_p}, omega_q = {omega_q} (rad/us)")]
    OffResonance {
        delta_c: f64,
        omega_p: f64,
        omega_q: f64,
    },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("integration diverged at t = {time_us} us (step too large?)")]
    Divergence { time_us: f64 },

    #[error(
        "infeasible pulse: radicand {radicand:.3e} at t = {time_us} us for the given gamma, G"
    )]
    Infeasible { time_us: f64, radicand: f64 },

    #[error("delay {delay_us} us is not an integer multiple of dt = {dt_us} us")]
    DelayNotAligned { delay_us: f64, dt_us: f64 },

    #[error("quadrature did not converge after {panels} panels")]
    Quadrature { panels: usize },

    #[error("dot center {z_c_nm} nm outside tube [0, {length_nm}] nm")]
    CenterOutOfRange { z_c_nm: f64, length_nm: f64 },

    #[error("Fock truncation overflow: population {population:.3e} at the cutoff")]
    TruncationOverflow { population: f64 },

    #[error("discrete bath with {modes} modes exceeds the memory limit of {limit} modes")]
    BathTooLarge { modes: usize, limit: usize },

    #[error("unknown {kind} `{name}` (known: {known})")]
    UnknownName {
        kind: &'static str,
        name: String,
        known: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("oracle tolerance exceeded: {0}")]
    OracleBreach(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_)
            | Error::UnknownName { .. }
            | Error::InvalidGrid(_)
            | Error::InvalidParameter { .. }
            | Error::OffResonance { .. }
            | Error::DelayNotAligned { .. }
            | Error::CenterOutOfRange { .. }
            | Error::GridMismatch(_) => 1,
            Error::OracleBreach(_) => 3,
            _ => 2,
        }
    }
}

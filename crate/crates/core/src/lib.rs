// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-excitation dynamics of carbon-nanotube spin-phonon-photon network
//! nodes: pulse synthesis, cascaded simulation, device estimates and
//! independent reference solvers.
//!
//! Times are in microseconds and rates in rad/us throughout.

// `!(x > 0.0)` also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod device;
pub mod dynamics;
pub mod envelope;
pub mod error;
pub mod grid;
pub mod ledger;
pub mod model;
pub mod oracle;
pub mod packet;
pub mod protocols;
pub mod scenario;
pub mod scheme;
pub mod synthesis;
pub mod units;

pub use dynamics::{CascadeTrajectory, Integrator, Trajectory};
pub use envelope::Envelope;
pub use error::{Error, Result};
pub use grid::{Interpolation, TimeGrid};
pub use ledger::NormLedger;
pub use model::{NodeParams, NodeState};
pub use packet::{Gaussian, Wavepacket};
pub use synthesis::{Feasibility, SynthesisOptions, SynthesisResult};

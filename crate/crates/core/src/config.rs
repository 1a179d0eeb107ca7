// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Scenario configuration files (TOML).
//!
//! Every frequency-like entry is written as `value / 2pi` in MHz and is
//! multiplied by `2pi` on load. Times are in microseconds. Unknown keys are rejected.
//!
//! ```toml
//! kind = "emit"
//! theta = 1.5707963267948966
//! out_dir = "out/emit_gaussian"
//!
//! [node1]
//! gamma = 5.0
//! G = 1.3
//! gamma_q = 0.01
//! gamma_r = 0.0026
//! gamma_c = 0.0025
//!
//! [target]
//! kind = "gaussian"
//! Gamma_us2 = 0.6664
//! t0_us = 0.0
//! ```

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::Deserialize;

use crate::device::{self, DeviceSpec, SineMode};
use crate::dynamics::Integrator;
use crate::error::{Error, Result};
use crate::grid::Interpolation;
use crate::model::{NodeParams, DEFAULT_OMEGA_P};
use crate::oracle::nonrwa::FockTruncation;
use crate::oracle::CalibrationSettings;
use crate::packet::{Gaussian, SampledPacket, Wavepacket};
use crate::protocols::QubitAmplitudes;
use crate::scheme::{SchemeRegistry, DEFAULT_SCHEME};
use crate::synthesis::Feasibility;
use crate::units::mhz_2pi;

/// Points per axis of the default sweep grids.
pub const DEFAULT_SWEEP_POINTS: usize = 25;
/// Default `gamma/2pi` and `G/2pi` span of the sweep grids, MHz.
pub const DEFAULT_SWEEP_RANGE: (f64, f64) = (0.2, 5.0);
/// Default `gamma_q/2pi` span of the dephasing sweep, MHz.
pub const DEFAULT_DEPHASING_RANGE: (f64, f64) = (0.0, 0.1);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Emit,
    Entangle,
    Transfer,
    SweepEmit,
    SweepTransfer,
    SweepDephasing,
    Oracle,
    Synth,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 8] = [
        Self::Emit,
        Self::Entangle,
        Self::Transfer,
        Self::SweepEmit,
        Self::SweepTransfer,
        Self::SweepDephasing,
        Self::Oracle,
        Self::Synth,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Emit => "emit",
            Self::Entangle => "entangle",
            Self::Transfer => "transfer",
            Self::SweepEmit => "sweep-emit",
            Self::SweepTransfer => "sweep-transfer",
            Self::SweepDephasing => "sweep-dephasing",
            Self::Oracle => "oracle",
            Self::Synth => "synth",
        }
    }

    pub fn is_sweep(&self) -> bool {
        matches!(
            self,
            Self::SweepEmit | Self::SweepTransfer | Self::SweepDephasing
        )
    }

    /// Emission angle used when the file gives none.
    pub fn default_theta(&self) -> f64 {
        match self {
            Self::Entangle | Self::SweepTransfer | Self::SweepDephasing => FRAC_PI_4,
            _ => FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeasibilityMode {
    #[default]
    Strict,
    Regularized,
}

impl From<FeasibilityMode> for Feasibility {
    fn from(m: FeasibilityMode) -> Self {
        match m {
            FeasibilityMode::Strict => Feasibility::Strict,
            FeasibilityMode::Regularized => Feasibility::Regularized,
        }
    }
}

/// One node, `/2pi` in MHz.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeBlock {
    pub gamma: Option<f64>,
    #[serde(rename = "G")]
    pub g: Option<f64>,
    pub lambda_max: Option<f64>,
    #[serde(rename = "Delta_c")]
    pub delta_c: Option<f64>,
    pub omega_p: Option<f64>,
    pub omega_q: Option<f64>,
    #[serde(default)]
    pub gamma_q: f64,
    #[serde(default)]
    pub gamma_r: f64,
    #[serde(default)]
    pub gamma_c: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum TargetBlock {
    Gaussian {
        #[serde(rename = "Gamma_us2")]
        gamma_us2: f64,
        #[serde(default)]
        t0_us: f64,
    },
    Sampled {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub dt_us: Option<f64>,
    pub t_start_us: Option<f64>,
    pub t_end_us: Option<f64>,
    pub scheme: Option<String>,
    pub interpolation: Option<String>,
    #[serde(default)]
    pub delay_us: f64,
}

/// Initial spin state `cos(polar/2) |down> + exp(i azimuth) sin(polar/2) |up>`.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitBlock {
    pub polar: f64,
    #[serde(default)]
    pub azimuth: f64,
}

/// Explicit list or evenly spaced `points` values from `from` to `to`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AxisSpec {
    List(Vec<f64>),
    Range(RangeSpec),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSpec {
    pub from: f64,
    pub to: f64,
    pub points: usize,
}

impl AxisSpec {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::List(v) => v.clone(),
            Self::Range(r) => linspace(r.from, r.to, r.points),
        }
    }
}

pub fn linspace(from: f64, to: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![from],
        n => (0..n)
            .map(|i| from + (to - from) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Sweep axes, `/2pi` in MHz.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub gamma: Option<AxisSpec>,
    #[serde(rename = "G")]
    pub g: Option<AxisSpec>,
    pub gamma_q: Option<AxisSpec>,
}

/// Physical device; when present, `G`, `gamma_r` and `omega_p` of the nodes
/// are derived from it.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBlock {
    #[serde(rename = "Delta_so_ueV")]
    pub delta_so_uev: f64,
    #[serde(default = "default_g_s")]
    pub g_s: f64,
    pub mu0_pm: f64,
    #[serde(rename = "A_nm2")]
    pub a_nm2: f64,
    pub z_c_nm: f64,
    pub tube_length_nm: f64,
    #[serde(default = "default_harmonic")]
    pub harmonic: u32,
    /// `/2pi` in MHz.
    pub omega_p: f64,
    #[serde(rename = "Q_m")]
    pub q_m: f64,
    #[serde(rename = "E_z_V_per_um")]
    pub e_z: Option<f64>,
    #[serde(rename = "chi_nm_per_V_um")]
    pub chi: Option<f64>,
}

fn default_g_s() -> f64 {
    2.0
}

fn default_harmonic() -> u32 {
    1
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleBlock {
    pub gamma: Option<f64>,
    pub bath_modes: Option<usize>,
    pub bandwidth_ratio: Option<f64>,
    pub decay_span: Option<f64>,
    pub markov_tol: Option<f64>,
    pub doubling_modes: Option<Vec<usize>>,
    pub omega_p: Option<f64>,
    pub coupling: Option<f64>,
    pub rwa_tol: Option<f64>,
    pub scaling_omega_p: Option<Vec<f64>>,
    pub slope_tol: Option<f64>,
    pub n_phonon_max: Option<usize>,
    pub n_cavity_max: Option<usize>,
}

/// Raw file contents.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub theta: Option<f64>,
    #[serde(default)]
    pub phi: f64,
    pub feasibility: Option<FeasibilityMode>,
    pub out_dir: Option<PathBuf>,
    pub qubit: Option<QubitBlock>,
    pub node1: Option<NodeBlock>,
    pub node2: Option<NodeBlock>,
    pub target: Option<TargetBlock>,
    #[serde(default)]
    pub grid: GridBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    pub device: Option<DeviceBlock>,
    #[serde(default)]
    pub oracle: OracleBlock,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads `path`; a relative sampled-target path is taken relative to the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        if let Some(TargetBlock::Sampled { path: p }) = &mut cfg.target {
            if p.is_relative() {
                if let Some(dir) = path.parent() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn resolve(&self) -> Result<Resolved> {
        Resolved::new(self)
    }
}

/// Validated configuration with every rate in rad/us.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub kind: ScenarioKind,
    pub theta: f64,
    pub phi: f64,
    pub feasibility: Feasibility,
    pub qubit: QubitAmplitudes,
    pub node1: NodeParams,
    pub node2: NodeParams,
    pub packet: Wavepacket,
    pub dt: Option<f64>,
    pub window: Option<(f64, f64)>,
    pub delay: f64,
    pub integrator: Integrator,
    pub sweep: SweepAxes,
    pub out_dir: Option<PathBuf>,
    pub device: Option<DeviceSummary>,
    pub oracle: CalibrationSettings,
}

/// Sweep axes as written, `/2pi` in MHz.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxes {
    pub gamma: Vec<f64>,
    pub g: Vec<f64>,
    pub gamma_q: Vec<f64>,
}

/// Quantities derived from a device block, in rad/us.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceSummary {
    pub z_c_nm: f64,
    pub coupling: f64,
    pub gamma_r: f64,
    pub omega_p: f64,
    pub b_star_t: f64,
}

fn finite(name: &'static str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Config(format!("`{name}` must be finite, got {v}")))
    }
}

fn non_negative(name: &'static str, v: f64) -> Result<f64> {
    if finite(name, v)? < 0.0 {
        return Err(Error::Config(format!(
            "`{name}` must be non-negative, got {v}"
        )));
    }
    Ok(v)
}

fn rate(name: &'static str, v: f64) -> Result<f64> {
    Ok(mhz_2pi(non_negative(name, v)?))
}

fn node_params(
    block: &NodeBlock,
    which: &str,
    derived: Option<&DeviceSummary>,
) -> Result<NodeParams> {
    let gamma = block
        .gamma
        .ok_or_else(|| Error::Config(format!("[{which}] needs `gamma`")))?;
    let g = match (block.g, derived) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(format!(
                "[{which}] sets `G` but a [device] block derives it"
            )))
        }
        (Some(g), None) => mhz_2pi(finite("G", g)?),
        (None, Some(d)) => d.coupling,
        (None, None) => return Err(Error::Config(format!("[{which}] needs `G`"))),
    };
    let omega_p = match derived {
        Some(d) => d.omega_p,
        None => block
            .omega_p
            .map(|v| rate("omega_p", v))
            .transpose()?
            .unwrap_or(DEFAULT_OMEGA_P),
    };
    let gamma_r = match derived {
        Some(d) if block.gamma_r == 0.0 => d.gamma_r,
        Some(_) => {
            return Err(Error::Config(format!(
                "[{which}] sets `gamma_r` but a [device] block derives it"
            )))
        }
        None => rate("gamma_r", block.gamma_r)?,
    };
    let p = NodeParams {
        gamma: rate("gamma", gamma)?,
        g: C64::new(g, 0.0),
        lambda_max: block
            .lambda_max
            .map(|v| rate("lambda_max", v))
            .transpose()?,
        delta_c: block
            .delta_c
            .map(|v| rate("Delta_c", v))
            .transpose()?
            .unwrap_or(omega_p),
        omega_p,
        omega_q: block
            .omega_q
            .map(|v| rate("omega_q", v))
            .transpose()?
            .unwrap_or(omega_p),
        gamma_q: rate("gamma_q", block.gamma_q)?,
        gamma_r,
        gamma_c: rate("gamma_c", block.gamma_c)?,
    };
    p.check_resonance()?;
    Ok(p)
}

fn device_summary(block: &DeviceBlock) -> Result<DeviceSummary> {
    let z_c_nm = match (block.e_z, block.chi) {
        (Some(e), Some(chi)) => device::tuned_center(block.z_c_nm, chi, e, block.tube_length_nm)?,
        (None, None) => block.z_c_nm,
        _ => {
            return Err(Error::Config(
                "[device] needs both `E_z_V_per_um` and `chi_nm_per_V_um` or neither".into(),
            ))
        }
    };
    let omega_p = rate("omega_p", block.omega_p)?;
    let spec = DeviceSpec {
        delta_so_uev: block.delta_so_uev,
        g_s: block.g_s,
        mu0_pm: block.mu0_pm,
        a_nm2: block.a_nm2,
        z_c_nm,
        length_nm: block.tube_length_nm,
        waveform: Arc::new(SineMode {
            harmonic: block.harmonic,
            length_nm: block.tube_length_nm,
        }),
        omega_p,
        q_m: block.q_m,
    };
    spec.validate()?;
    Ok(DeviceSummary {
        z_c_nm,
        coupling: device::spin_phonon_coupling(&spec)?,
        gamma_r: device::mechanical_damping(omega_p, block.q_m)?,
        omega_p,
        b_star_t: device::b_star(block.delta_so_uev, block.g_s),
    })
}

fn axis(spec: &Option<AxisSpec>, name: &'static str, default: (f64, f64)) -> Result<Vec<f64>> {
    let values = match spec {
        Some(s) => s.values(),
        None => linspace(default.0, default.1, DEFAULT_SWEEP_POINTS),
    };
    if values.is_empty() {
        return Err(Error::Config(format!("sweep axis `{name}` is empty")));
    }
    values.into_iter().map(|v| non_negative(name, v)).collect()
}

fn oracle_settings(b: &OracleBlock) -> Result<CalibrationSettings> {
    let mut s = CalibrationSettings::default();
    let positive = |name: &'static str, v: f64| -> Result<f64> {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::Config(format!(
                "[oracle] `{name}` must be positive, got {v}"
            )));
        }
        Ok(v)
    };
    if let Some(v) = b.gamma {
        s.gamma_mhz = positive("gamma", v)?;
    }
    if let Some(v) = b.bath_modes {
        s.bath_modes = v;
    }
    if let Some(v) = b.bandwidth_ratio {
        s.bandwidth_ratio = positive("bandwidth_ratio", v)?;
    }
    if let Some(v) = b.decay_span {
        s.decay_span = positive("decay_span", v)?;
    }
    if let Some(v) = b.markov_tol {
        s.markov_tol = positive("markov_tol", v)?;
    }
    if let Some(v) = &b.doubling_modes {
        s.doubling_modes = v.clone();
    }
    if let Some(v) = b.omega_p {
        s.omega_p_mhz = positive("omega_p", v)?;
    }
    if let Some(v) = b.coupling {
        s.coupling_mhz = non_negative("coupling", v)?;
    }
    if let Some(v) = b.rwa_tol {
        s.rwa_tol = positive("rwa_tol", v)?;
    }
    if let Some(v) = &b.scaling_omega_p {
        for &w in v {
            positive("scaling_omega_p", w)?;
        }
        s.scaling_omega_mhz = v.clone();
    }
    if let Some(v) = b.slope_tol {
        s.slope_tol = positive("slope_tol", v)?;
    }
    if b.n_phonon_max.is_some() || b.n_cavity_max.is_some() {
        let d = FockTruncation::default();
        s.truncation = FockTruncation::new(
            b.n_phonon_max.unwrap_or(d.n_phonon_max),
            b.n_cavity_max.unwrap_or(d.n_cavity_max),
        )?;
    }
    Ok(s)
}

impl Resolved {
    fn new(cfg: &ScenarioConfig) -> Result<Self> {
        let kind = cfg.kind;
        let theta = finite("theta", cfg.theta.unwrap_or(kind.default_theta()))?;
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&theta) {
            return Err(Error::Config(format!(
                "`theta` must lie in [0, pi/2], got {theta}"
            )));
        }
        let phi = finite("phi", cfg.phi)?;
        let device = cfg.device.as_ref().map(device_summary).transpose()?;

        let needs_nodes = !matches!(kind, ScenarioKind::Oracle);
        let (node1, node2) = match (&cfg.node1, needs_nodes) {
            (Some(b1), _) => {
                let n1 = node_params(b1, "node1", device.as_ref())?;
                let n2 = match &cfg.node2 {
                    Some(b2) => node_params(b2, "node2", device.as_ref())?,
                    None => n1,
                };
                (n1, n2)
            }
            (None, false) => {
                let n = NodeParams::from_mhz(1.0, 1.0);
                (n, n)
            }
            (None, true) => {
                return Err(Error::Config(format!(
                    "kind `{}` needs [node1]",
                    kind.name()
                )))
            }
        };

        let packet = match &cfg.target {
            Some(TargetBlock::Gaussian { gamma_us2, t0_us }) => {
                Wavepacket::Gaussian(Gaussian::new(*gamma_us2, *t0_us)?)
            }
            Some(TargetBlock::Sampled { path }) => {
                Wavepacket::Sampled(SampledPacket::from_csv(path)?)
            }
            None if !needs_nodes => Wavepacket::Gaussian(Gaussian::new(1.0, 0.0)?),
            None => {
                return Err(Error::Config(format!(
                    "kind `{}` needs [target]",
                    kind.name()
                )))
            }
        };

        let qubit = match cfg.qubit {
            Some(q) => {
                QubitAmplitudes::bloch(finite("polar", q.polar)?, finite("azimuth", q.azimuth)?)
            }
            None => QubitAmplitudes::excited(),
        };

        let g = &cfg.grid;
        let dt = g.dt_us.map(|v| {
            if !(v > 0.0) || !v.is_finite() {
                Err(Error::Config(format!("`dt_us` must be positive, got {v}")))
            } else {
                Ok(v)
            }
        });
        let dt = dt.transpose()?;
        let window = match (g.t_start_us, g.t_end_us) {
            (Some(a), Some(b)) if finite("t_start_us", a)? < finite("t_end_us", b)? => Some((a, b)),
            (Some(a), Some(b)) => {
                return Err(Error::Config(format!("grid window [{a}, {b}] is empty")))
            }
            (None, None) => None,
            _ => {
                return Err(Error::Config(
                    "give both `t_start_us` and `t_end_us` or neither".into(),
                ))
            }
        };
        let delay = non_negative("delay_us", g.delay_us)?;
        let scheme =
            SchemeRegistry::builtin().get(g.scheme.as_deref().unwrap_or(DEFAULT_SCHEME))?;
        let interp = match &g.interpolation {
            Some(name) => Interpolation::parse(name)?,
            None => Interpolation::Cubic,
        };

        let s = &cfg.sweep;
        let sweep = SweepAxes {
            gamma: axis(&s.gamma, "gamma", DEFAULT_SWEEP_RANGE)?,
            g: axis(&s.g, "G", DEFAULT_SWEEP_RANGE)?,
            gamma_q: axis(&s.gamma_q, "gamma_q", DEFAULT_DEPHASING_RANGE)?,
        };

        let feasibility = match cfg.feasibility {
            Some(m) => m.into(),
            None if kind.is_sweep() => Feasibility::Regularized,
            None => Feasibility::Strict,
        };

        Ok(Self {
            kind,
            theta,
            phi,
            feasibility,
            qubit,
            node1,
            node2,
            packet,
            dt,
            window,
            delay,
            integrator: Integrator::new(scheme, interp),
            sweep,
            out_dir: cfg.out_dir.clone(),
            device,
            oracle: oracle_settings(&cfg.oracle)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::TAU;

    const FIG2: &str = r#"
kind = "emit"
out_dir = "out"

[node1]
gamma = 5.0
G = 1.3
gamma_q = 0.01
gamma_r = 0.0026
gamma_c = 0.0025

[target]
kind = "gaussian"
Gamma_us2 = 0.6664
"#;

    #[test]
    fn caption_values_are_scaled_by_two_pi() {
        let r = ScenarioConfig::from_toml(FIG2).unwrap().resolve().unwrap();
        assert_relative_eq!(r.node1.gamma, TAU * 5.0);
        assert_relative_eq!(r.node1.g.re, TAU * 1.3);
        assert_relative_eq!(r.node1.gamma_r, TAU * 0.0026);
        assert_eq!(r.node1, r.node2);
        assert_eq!(r.theta, FRAC_PI_2);
        assert_eq!(r.feasibility, Feasibility::Strict);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let bad = FIG2.replace("gamma_c = 0.0025", "gamma_x = 0.0025");
        let err = ScenarioConfig::from_toml(&bad).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("gamma_x"), "{err}");
        let top = format!("colour = 1\n{FIG2}");
        assert!(ScenarioConfig::from_toml(&top).is_err());
    }

    #[test]
    fn negative_rates_are_rejected() {
        let bad = FIG2.replace("gamma_q = 0.01", "gamma_q = -0.01");
        let err = ScenarioConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("gamma_q"), "{err}");
    }

    #[test]
    fn missing_target_is_a_config_error() {
        let bad = FIG2.replace("[target]\nkind = \"gaussian\"\nGamma_us2 = 0.6664\n", "");
        let err = ScenarioConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn sweep_axes_accept_lists_and_ranges() {
        let text = format!(
            "{}\n[sweep]\ngamma = [1.0, 2.0]\nG = {{ from = 1.0, to = 3.0, points = 3 }}\n",
            FIG2.replace("kind = \"emit\"", "kind = \"sweep-emit\"")
        );
        let r = ScenarioConfig::from_toml(&text).unwrap().resolve().unwrap();
        assert_eq!(r.sweep.gamma.len(), 2);
        assert_relative_eq!(r.sweep.g[1], 2.0);
        assert_eq!(r.sweep.gamma_q.len(), DEFAULT_SWEEP_POINTS);
        assert_eq!(r.feasibility, Feasibility::Regularized);
        assert_eq!(r.theta, FRAC_PI_2);
    }

    #[test]
    fn default_sweep_grid_spans_the_artifact_range() {
        let v = linspace(
            DEFAULT_SWEEP_RANGE.0,
            DEFAULT_SWEEP_RANGE.1,
            DEFAULT_SWEEP_POINTS,
        );
        assert_eq!(v.len(), 25);
        assert_relative_eq!(v[0], 0.2);
        assert_relative_eq!(v[24], 5.0);
        assert_relative_eq!(v[1] - v[0], 0.2, epsilon = 1e-12);
    }

    #[test]
    fn off_resonant_node_is_rejected() {
        let bad = FIG2.replace("G = 1.3", "G = 1.3\nomega_q = 100.0");
        let err = ScenarioConfig::from_toml(&bad)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(matches!(err, Error::OffResonance { .. }));
    }

    #[test]
    fn device_block_derives_coupling_and_damping() {
        let text = FIG2
            .replace("G = 1.3\n", "")
            .replace("gamma_r = 0.0026\n", "")
            + r#"
[device]
Delta_so_ueV = 370.0
mu0_pm = 2.26
A_nm2 = 0.01
z_c_nm = 100.0
tube_length_nm = 400.0
omega_p = 360.0
Q_m = 140000.0
"#;
        let r = ScenarioConfig::from_toml(&text).unwrap().resolve().unwrap();
        let d = r.device.unwrap();
        assert!(d.coupling > 0.0);
        assert_relative_eq!(r.node1.g.re, d.coupling);
        assert_relative_eq!(d.gamma_r, TAU * 360.0 / 140000.0, max_relative = 1e-12);
        assert_relative_eq!(r.node1.gamma_r, d.gamma_r);
    }

    #[test]
    fn device_and_explicit_coupling_conflict() {
        let text = FIG2.to_string()
            + "[device]\nDelta_so_ueV = 370.0\nmu0_pm = 2.26\nA_nm2 = 0.01\nz_c_nm = 100.0\ntube_length_nm = 400.0\nomega_p = 360.0\nQ_m = 140000.0\n";
        let err = ScenarioConfig::from_toml(&text)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert!(err.to_string().contains("derives"), "{err}");
    }

    #[test]
    fn oracle_kind_needs_no_nodes() {
        let r = ScenarioConfig::from_toml("kind = \"oracle\"\n[oracle]\nbath_modes = 2\n")
            .unwrap()
            .resolve()
            .unwrap();
        assert_eq!(r.oracle.bath_modes, 2);
    }

    #[test]
    fn unknown_scheme_is_a_config_error() {
        let text = FIG2.to_string() + "[grid]\nscheme = \"rk7\"\n";
        let err = ScenarioConfig::from_toml(&text)
            .unwrap()
            .resolve()
            .unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }
}

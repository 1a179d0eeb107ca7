// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! Batch scenarios selected by name, and the flat-file artifacts they write.
//!
//! Trajectory CSV columns, one row per grid sample:
//!
//! `t_us, bq_re, bq_im, br_re, br_im, bc_re, bc_im, ain_re, ain_im, aout_re,
//! aout_im, lambda_re, lambda_im`
//!
//! Two-node runs append the same columns for node 2 with a `2` suffix on the
//! amplitude name (`bq2_re`, ..., `lambda2_im`). Amplitudes are those of the
//! excited branch.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::config::{Resolved, ScenarioKind};
use crate::dynamics::{default_dt, Trajectory, MAX_RATE_DT};
use crate::envelope::Envelope;
use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::model::NodeParams;
use crate::oracle::run_calibration;
use crate::protocols::{
    default_grid, distribute_entanglement, emit_photon, grid_with_delay, transfer_qubit,
    ProtocolKind, ProtocolOptions, ProtocolReport,
};
use crate::synthesis::{
    idle_control, is_uncoupled, synthesize_emission_with, SynthesisOptions, SynthesisResult,
};
use crate::units::{mhz_2pi, to_mhz_2pi};

/// Fidelity differences below this are ties when judging sweep trends.
pub const TREND_TIE_TOL: f64 = 1e-9;
/// Largest fraction of grid points allowed to break a sweep trend.
pub const TREND_MAX_FRACTION: f64 = 0.02;
/// Slack on the step-size rule before a run is refined.
const DT_RULE_SLACK: f64 = 1e-9;
/// Regridding passes before giving up on the step-size rule.
const MAX_REGRID: usize = 3;

pub const TRAJECTORY_COLUMNS: [&str; 13] = [
    "t_us",
    "bq_re",
    "bq_im",
    "br_re",
    "br_im",
    "bc_re",
    "bc_im",
    "ain_re",
    "ain_im",
    "aout_re",
    "aout_im",
    "lambda_re",
    "lambda_im",
];

/// Where and how a scenario runs.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub out_dir: PathBuf,
    pub workers: Option<usize>,
    /// Step override in us; still subject to the step-size rule.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

pub trait Scenario: Send + Sync {
    fn kind(&self) -> ScenarioKind;
    fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome>;

    fn name(&self) -> &'static str {
        self.kind().name()
    }
}

/// Scenarios by name.
#[derive(Clone)]
pub struct ScenarioRegistry {
    entries: BTreeMap<&'static str, Arc<dyn Scenario>>,
}

impl ScenarioRegistry {
    pub fn empty() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        for kind in [
            ProtocolKind::Emit,
            ProtocolKind::Entangle,
            ProtocolKind::Transfer,
        ] {
            r.register(Arc::new(ProtocolScenario(kind)));
        }
        for kind in [
            ScenarioKind::SweepEmit,
            ScenarioKind::SweepTransfer,
            ScenarioKind::SweepDephasing,
        ] {
            r.register(Arc::new(SweepScenario(kind)));
        }
        r.register(Arc::new(OracleScenario));
        r.register(Arc::new(SynthScenario));
        r
    }

    pub fn register(&mut self, scenario: Arc<dyn Scenario>) {
        self.entries.insert(scenario.name(), scenario);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn Scenario>> {
        self.entries
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownName {
                kind: "scenario",
                name: name.to_string(),
                known: self.names().join(", "),
            })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.keys().copied().collect()
    }

    /// Runs the scenario named by the config.
    pub fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome> {
        self.get(cfg.kind.name())?.run(cfg, ctx)
    }
}

impl Default for ScenarioRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

fn scenario_kind(kind: ProtocolKind) -> ScenarioKind {
    match kind {
        ProtocolKind::Emit => ScenarioKind::Emit,
        ProtocolKind::Entangle => ScenarioKind::Entangle,
        ProtocolKind::Transfer => ScenarioKind::Transfer,
    }
}

fn nodes_of(cfg: &Resolved, kind: ProtocolKind) -> Vec<NodeParams> {
    match kind {
        ProtocolKind::Emit => vec![cfg.node1],
        _ => vec![cfg.node1, cfg.node2],
    }
}

/// `max(rates, sup|lambda|) * dt` for a finished run.
pub fn rate_dt_product(nodes: &[NodeParams], controls: &[&Envelope], dt: f64) -> f64 {
    let sup = controls.iter().map(|c| c.peak()).fold(0.0, f64::max);
    nodes.iter().map(|p| p.fastest_rate()).fold(sup, f64::max) * dt
}

fn build_grid(
    cfg: &Resolved,
    nodes: &[NodeParams],
    lambda_sup: f64,
    dt: Option<f64>,
    notes: &mut Vec<String>,
) -> Result<TimeGrid> {
    let refs: Vec<&NodeParams> = nodes.iter().collect();
    let allowed = default_dt(&refs, lambda_sup);
    let dt_max = match dt {
        Some(d) if d <= allowed * (1.0 + DT_RULE_SLACK) => d,
        Some(d) => {
            notes.push(format!(
                "requested dt = {d:.6e} us breaks max rate * dt <= {MAX_RATE_DT}; using {allowed:.6e} us"
            ));
            allowed
        }
        None => allowed,
    };
    match cfg.window {
        Some((a, b)) => grid_with_delay(a, b, cfg.delay, dt_max),
        None => default_grid(&cfg.packet, cfg.delay, &refs, lambda_sup, Some(dt_max)),
    }
}

/// Runs `body` on a grid that satisfies the step-size rule once the pulses are
/// known, regridding with the observed `sup|lambda|` when needed.
fn with_enforced_dt<T>(
    cfg: &Resolved,
    nodes: &[NodeParams],
    dt: Option<f64>,
    notes: &mut Vec<String>,
    mut body: impl FnMut(&TimeGrid) -> Result<(T, Vec<Envelope>)>,
) -> Result<(T, TimeGrid, f64)> {
    let mut lambda_sup = 0.0;
    let mut last = None;
    for _ in 0..MAX_REGRID {
        let grid = build_grid(cfg, nodes, lambda_sup, dt, notes)?;
        let (value, controls) = body(&grid)?;
        let refs: Vec<&Envelope> = controls.iter().collect();
        let product = rate_dt_product(nodes, &refs, grid.dt());
        if product <= MAX_RATE_DT * (1.0 + DT_RULE_SLACK) {
            return Ok((value, grid, product));
        }
        notes.push(format!(
            "dt = {:.6e} us gave max rate * dt = {product:.4e} > {MAX_RATE_DT}; refined",
            grid.dt()
        ));
        lambda_sup = controls.iter().map(|c| c.peak()).fold(0.0, f64::max);
        last = Some((value, grid, product));
    }
    let (value, grid, product) = last.expect("at least one pass");
    notes.push(format!(
        "step-size rule still violated after {MAX_REGRID} passes (max rate * dt = {product:.4e})"
    ));
    Ok((value, grid, product))
}

/// A protocol run with the grid it used.
#[derive(Debug, Clone)]
pub struct ProtocolRun {
    pub report: ProtocolReport,
    /// `max(rates, sup|lambda|) * dt`.
    pub rate_dt: f64,
    pub notes: Vec<String>,
}

fn options(cfg: &Resolved) -> ProtocolOptions {
    ProtocolOptions {
        phi: cfg.phi,
        feasibility: cfg.feasibility,
        integrator: cfg.integrator.clone(),
    }
}

pub fn run_protocol(cfg: &Resolved, kind: ProtocolKind, dt: Option<f64>) -> Result<ProtocolRun> {
    let nodes = nodes_of(cfg, kind);
    let opts = options(cfg);
    let mut notes = Vec::new();
    let (report, _, rate_dt) = with_enforced_dt(cfg, &nodes, dt.or(cfg.dt), &mut notes, |grid| {
        let target = cfg.packet.sample(grid)?;
        let r = match kind {
            ProtocolKind::Emit => {
                emit_photon(cfg.qubit, cfg.theta, &cfg.node1, &target, grid, &opts)?
            }
            ProtocolKind::Entangle => distribute_entanglement(
                &cfg.node1, &cfg.node2, &target, cfg.theta, cfg.delay, grid, &opts,
            )?,
            ProtocolKind::Transfer => transfer_qubit(
                cfg.qubit, &cfg.node1, &cfg.node2, &target, cfg.delay, grid, &opts,
            )?,
        };
        let controls = r.controls().into_iter().cloned().collect();
        Ok((r, controls))
    })?;
    Ok(ProtocolRun {
        report,
        rate_dt,
        notes,
    })
}

/// Emission pulse alone, on a grid obeying the step-size rule.
pub fn run_synthesis(
    cfg: &Resolved,
    dt: Option<f64>,
) -> Result<(SynthesisResult, f64, Vec<String>)> {
    let mut notes = Vec::new();
    let (synth, _, rate_dt) =
        with_enforced_dt(cfg, &[cfg.node1], dt.or(cfg.dt), &mut notes, |grid| {
            let s = if is_uncoupled(&cfg.node1) {
                idle_control(
                    crate::model::NodeState::excited(),
                    &cfg.node1,
                    &Envelope::zeros(*grid),
                    grid,
                )?
            } else {
                let target = cfg.packet.sample(grid)?;
                synthesize_emission_with(
                    &target,
                    cfg.theta,
                    &cfg.node1,
                    grid,
                    &SynthesisOptions {
                        phi: cfg.phi,
                        feasibility: cfg.feasibility,
                    },
                )?
            };
            let c = vec![s.control.clone()];
            Ok((s, c))
        })?;
    Ok((synth, rate_dt, notes))
}

fn num(v: f64) -> String {
    format!("{v:.12e}")
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn trajectory_fields(t: &Trajectory, k: usize, row: &mut Vec<String>) {
    let s = t.states[k];
    for z in [
        s.beta_q,
        s.beta_r,
        s.beta_c,
        t.alpha_in.value(k),
        t.alpha_out.value(k),
        t.control.value(k),
    ] {
        row.push(num(z.re));
        row.push(num(z.im));
    }
}

fn trajectory_header(nodes: usize) -> Vec<String> {
    let mut h: Vec<String> = TRAJECTORY_COLUMNS.iter().map(|s| s.to_string()).collect();
    for n in 2..=nodes {
        for c in &TRAJECTORY_COLUMNS[1..] {
            let (stem, part) = c.rsplit_once('_').expect("column has a part suffix");
            h.push(format!("{stem}{n}_{part}"));
        }
    }
    h
}

/// Trajectory CSV for one or more nodes sharing a grid.
pub fn write_trajectory(path: &Path, nodes: &[&Trajectory]) -> Result<()> {
    let grid = nodes[0].grid;
    for t in &nodes[1..] {
        t.grid.ensure_matches(&grid, "trajectory")?;
    }
    let mut w = csv_writer(path)?;
    w.write_record(trajectory_header(nodes.len()))?;
    let mut row = Vec::with_capacity(1 + 12 * nodes.len());
    for k in 0..grid.len() {
        row.clear();
        row.push(num(grid.time(k)));
        for t in nodes {
            trajectory_fields(t, k, &mut row);
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Control CSV: `t_us, lambda_re, lambda_im` (then `lambda2_re, lambda2_im`).
pub fn write_controls(path: &Path, controls: &[&Envelope]) -> Result<()> {
    let grid = *controls[0].grid();
    let mut w = csv_writer(path)?;
    let mut header = vec!["t_us".to_string()];
    for n in 1..=controls.len() {
        let tag = if n == 1 { String::new() } else { n.to_string() };
        header.push(format!("lambda{tag}_re"));
        header.push(format!("lambda{tag}_im"));
    }
    w.write_record(&header)?;
    for k in 0..grid.len() {
        let mut row = vec![num(grid.time(k))];
        for c in controls {
            let z = c.value(k);
            row.push(num(z.re));
            row.push(num(z.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Target against the emitted field of node 1 (and the field leaving node 2).
pub fn write_wavepacket(path: &Path, report: &ProtocolReport) -> Result<()> {
    let grid = report.grid();
    let mut w = csv_writer(path)?;
    let mut header = vec!["t_us", "target_re", "target_im", "emitted_re", "emitted_im"];
    if report.nodes.len() > 1 {
        header.extend(["reflected_re", "reflected_im"]);
    }
    w.write_record(&header)?;
    for k in 0..grid.len() {
        let mut row = vec![num(grid.time(k))];
        let mut fields = vec![report.target.value(k), report.nodes[0].alpha_out.value(k)];
        if let Some(n2) = report.nodes.get(1) {
            fields.push(n2.alpha_out.value(k));
        }
        for z in fields {
            row.push(num(z.re));
            row.push(num(z.im));
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn describe_node(out: &mut String, label: &str, p: &NodeParams) {
    let _ = writeln!(
        out,
        "  {label}: gamma = {:.9e}, G = {:.9e}, lambda_max = {}, Delta_c = {:.9e}, omega_p = {:.9e}, omega_q = {:.9e}, gamma_q = {:.9e}, gamma_r = {:.9e}, gamma_c = {:.9e}",
        p.gamma,
        p.g.re,
        p.lambda_max.map_or("none".to_string(), |v| format!("{v:.9e}")),
        p.delta_c,
        p.omega_p,
        p.omega_q,
        p.gamma_q,
        p.gamma_r,
        p.gamma_c,
    );
}

fn describe_setup(out: &mut String, cfg: &Resolved, nodes: &[NodeParams]) {
    let _ = writeln!(out, "scenario: {}", cfg.kind.name());
    let _ = writeln!(out, "effective parameters (rad/us):");
    for (i, p) in nodes.iter().enumerate() {
        describe_node(out, &format!("node{}", i + 1), p);
    }
    if let Some(d) = &cfg.device {
        let _ = writeln!(
            out,
            "device: z_c = {:.6} nm, G = {:.9e} rad/us, gamma_r = {:.9e} rad/us, omega_p = {:.9e} rad/us, B* = {:.6} T",
            d.z_c_nm, d.coupling, d.gamma_r, d.omega_p, d.b_star_t
        );
    }
    let _ = writeln!(out, "target: {}", cfg.packet.describe());
    let _ = writeln!(
        out,
        "theta = {:.12}, phi = {:.12}, delay = {} us, feasibility = {:?}",
        cfg.theta, cfg.phi, cfg.delay, cfg.feasibility
    );
    let c0 = cfg.qubit.c0();
    let c1 = cfg.qubit.c1();
    let _ = writeln!(
        out,
        "qubit: C0 = {:.9} {:+.9}i, C1 = {:.9} {:+.9}i",
        c0.re, c0.im, c1.re, c1.im
    );
}

fn describe_grid(out: &mut String, cfg: &Resolved, grid: &TimeGrid, rate_dt: f64) {
    let _ = writeln!(
        out,
        "grid: [{:.6}, {:.6}] us, dt = {:.6e} us, {} steps, scheme = {}, interpolation = {}",
        grid.t_start(),
        grid.t_end(),
        grid.dt(),
        grid.n_steps(),
        cfg.integrator.scheme().name(),
        cfg.integrator.interpolation().name()
    );
    let _ = writeln!(out, "max rate * dt = {rate_dt:.6e} (limit {MAX_RATE_DT})");
}

fn describe_pulse(out: &mut String, label: &str, s: &SynthesisResult) {
    let d = &s.diagnostics;
    let duration = s
        .active_duration()
        .map_or("none".to_string(), |v| format!("{v:.6} us"));
    let _ = writeln!(
        out,
        "pulse {label}: active duration = {duration}, peak |lambda| = {:.6e} rad/us",
        d.peak_lambda
    );
    if let (Some(a), Some(b)) = (d.active_start, d.active_stop) {
        let _ = writeln!(out, "  active from {a:.6} us to {b:.6} us");
    }
    if d.uncoupled {
        let _ = writeln!(out, "  node is uncoupled; control held at zero");
    }
    if d.infeasible {
        let _ = writeln!(out, "  INFEASIBLE target (regularized)");
    }
    if let Some((r, t)) = d.worst_radicand {
        let _ = writeln!(out, "  most negative radicand {r:.3e} at t = {t:.6} us");
    }
    if let Some(t) = d.freeze_time {
        let _ = writeln!(out, "  control frozen from t = {t:.6} us");
    }
    if !d.clamp.is_empty() {
        let _ = writeln!(
            out,
            "  clamped at {:.6e} rad/us on {} samples: {:?}",
            d.clamp.bound, d.clamp.clamped_samples, d.clamp.intervals
        );
    }
}

fn notes_section(out: &mut String, notes: &[String]) {
    if !notes.is_empty() {
        let _ = writeln!(out, "notes:");
        for n in notes {
            let _ = writeln!(out, "  {n}");
        }
    }
}

/// Plain-text report of a protocol run.
pub fn protocol_report_text(cfg: &Resolved, run: &ProtocolRun) -> String {
    let r = &run.report;
    let mut out = String::new();
    let nodes: Vec<NodeParams> = r.nodes.iter().map(|t| t.params).collect();
    describe_setup(&mut out, cfg, &nodes);
    describe_grid(&mut out, cfg, r.grid(), run.rate_dt);
    for (i, s) in r.synthesis.iter().enumerate() {
        describe_pulse(&mut out, &format!("node{}", i + 1), s);
    }
    let _ = writeln!(out, "fidelity = {:.12}", r.fidelity);
    if let Some(b) = r.bell_fidelity {
        let _ = writeln!(out, "bell fidelity = {b:.12}");
    }
    let _ = writeln!(out, "wavepacket fidelity = {:.12}", r.wavepacket_fidelity);
    let _ = writeln!(
        out,
        "emitted energy (node1) = {:.12}",
        r.nodes[0].emitted_energy()
    );
    let _ = writeln!(out, "lost to decoherence = {:.12}", r.lost);
    let _ = writeln!(out, "ledger residual = {:.6e}", r.budget_residual);
    let _ = writeln!(out, "final amplitudes:");
    for (name, z) in &r.final_amplitudes {
        let _ = writeln!(
            out,
            "  {name} = {:.12} {:+.12}i (population {:.12})",
            z.re,
            z.im,
            z.norm_sqr()
        );
    }
    notes_section(&mut out, &run.notes);
    out
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    Ok(())
}

struct ProtocolScenario(ProtocolKind);

impl Scenario for ProtocolScenario {
    fn kind(&self) -> ScenarioKind {
        scenario_kind(self.0)
    }

    fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome> {
        let run = run_protocol(cfg, self.0, ctx.dt)?;
        prepare_dir(&ctx.out_dir)?;
        let dir = &ctx.out_dir;
        let files = [
            dir.join("trajectory.csv"),
            dir.join("control.csv"),
            dir.join("wavepacket.csv"),
            dir.join("report.txt"),
        ];
        let r = &run.report;
        let nodes: Vec<&Trajectory> = r.nodes.iter().collect();
        write_trajectory(&files[0], &nodes)?;
        write_controls(&files[1], &r.controls())?;
        write_wavepacket(&files[2], r)?;
        fs::write(&files[3], protocol_report_text(cfg, &run))?;
        let mut summary = format!("{}: fidelity {:.6}", self.name(), r.fidelity);
        if let Some(b) = r.bell_fidelity {
            let _ = write!(summary, ", bell fidelity {b:.6}");
        }
        if let Some(d) = r.synthesis[0].active_duration() {
            let _ = write!(summary, ", pulse {d:.3} us");
        }
        let _ = write!(summary, ", ledger residual {:.2e}", r.budget_residual);
        Ok(Outcome {
            files: files.to_vec(),
            summary,
        })
    }
}

struct SynthScenario;

impl Scenario for SynthScenario {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::Synth
    }

    fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome> {
        let (synth, rate_dt, notes) = run_synthesis(cfg, ctx.dt)?;
        prepare_dir(&ctx.out_dir)?;
        let dir = &ctx.out_dir;
        let files = [
            dir.join("control.csv"),
            dir.join("reference.csv"),
            dir.join("report.txt"),
        ];
        write_controls(&files[0], &[&synth.control])?;
        write_trajectory(&files[1], &[&synth.reference])?;
        let mut out = String::new();
        describe_setup(&mut out, cfg, &[cfg.node1]);
        describe_grid(&mut out, cfg, &synth.reference.grid, rate_dt);
        describe_pulse(&mut out, "node1", &synth);
        let _ = writeln!(
            out,
            "reference emitted energy = {:.12}",
            synth.reference.emitted_energy()
        );
        notes_section(&mut out, &notes);
        fs::write(&files[2], out)?;
        Ok(Outcome {
            files: files.to_vec(),
            summary: format!(
                "synth: peak |lambda| {:.4} rad/us, active duration {}",
                synth.diagnostics.peak_lambda,
                synth
                    .active_duration()
                    .map_or("none".to_string(), |d| format!("{d:.3} us"))
            ),
        })
    }
}

struct OracleScenario;

impl Scenario for OracleScenario {
    fn kind(&self) -> ScenarioKind {
        ScenarioKind::Oracle
    }

    fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome> {
        let report = run_calibration(&cfg.oracle)?;
        prepare_dir(&ctx.out_dir)?;
        let path = ctx.out_dir.join("oracle_report.txt");
        fs::write(&path, report.to_table())?;
        let failed = report.checks.iter().filter(|c| !c.passed).count();
        let total = report.checks.len();
        report.into_result()?;
        Ok(Outcome {
            files: vec![path],
            summary: format!("oracle: {}/{total} checks passed", total - failed),
        })
    }
}

/// Outcome of one sweep point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointStatus {
    Ok,
    /// The target could not be followed exactly; the fidelity is that of the
    /// regularized pulse, or missing in strict mode.
    Infeasible,
    Failed,
}

impl PointStatus {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Infeasible => "infeasible",
            Self::Failed => "failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma_mhz: f64,
    pub g_mhz: f64,
    pub gamma_q_mhz: f64,
    pub fidelity: f64,
    pub wavepacket_fidelity: f64,
    pub status: PointStatus,
    pub detail: String,
}

/// Monotonic direction expected along a sweep axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    NonDecreasing,
    /// Each step must drop by more than [`TREND_TIE_TOL`].
    Decreasing,
}

/// Adjacent pairs of `values` breaking `trend`; missing values count as breaks.
pub fn trend_violations(values: &[f64], trend: Trend) -> usize {
    values
        .windows(2)
        .filter(|w| {
            let ok = match trend {
                Trend::NonDecreasing => w[1] >= w[0] - TREND_TIE_TOL,
                Trend::Decreasing => w[1] < w[0] - TREND_TIE_TOL,
            };
            !ok
        })
        .count()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrendSummary {
    pub trend: Trend,
    /// Axis the trend runs along.
    pub axis: &'static str,
    pub violations: usize,
    pub comparisons: usize,
    pub points: usize,
    pub infeasible: usize,
    pub failed: usize,
}

impl TrendSummary {
    pub fn fraction(&self) -> f64 {
        self.violations as f64 / self.points.max(1) as f64
    }

    pub fn passed(&self) -> bool {
        self.fraction() <= TREND_MAX_FRACTION
    }

    pub fn describe(&self) -> String {
        format!(
            "{:?} along {}: {} of {} comparisons break it ({:.2}% of {} points, limit {:.0}%); {} infeasible, {} failed points",
            self.trend,
            self.axis,
            self.violations,
            self.comparisons,
            100.0 * self.fraction(),
            self.points,
            100.0 * TREND_MAX_FRACTION,
            self.infeasible,
            self.failed
        )
    }
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: ScenarioKind,
    /// Lexicographic over the grid: outer axis first.
    pub rows: Vec<SweepRow>,
    /// (outer, inner) axis lengths.
    pub shape: (usize, usize),
}

fn sorted_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

impl SweepResult {
    pub fn fidelity(&self, outer: usize, inner: usize) -> f64 {
        self.rows[outer * self.shape.1 + inner].fidelity
    }

    /// Expected trend for the sweep kind, counted over the whole grid.
    pub fn trend_summary(&self) -> TrendSummary {
        let (n_outer, n_inner) = self.shape;
        let (trend, axis, along_inner) = match self.kind {
            ScenarioKind::SweepEmit => (Trend::NonDecreasing, "G", true),
            ScenarioKind::SweepTransfer => (Trend::Decreasing, "gamma", false),
            _ => (Trend::Decreasing, "gamma_q", true),
        };
        let mut violations = 0;
        let mut comparisons = 0;
        if along_inner {
            let key: Vec<f64> = self.rows[..n_inner]
                .iter()
                .map(|r| self.axis_value(r))
                .collect();
            let order = sorted_order(&key);
            for i in 0..n_outer {
                let series: Vec<f64> = order.iter().map(|&j| self.fidelity(i, j)).collect();
                violations += trend_violations(&series, trend);
                comparisons += series.len().saturating_sub(1);
            }
        } else {
            let key: Vec<f64> = (0..n_outer)
                .map(|i| self.rows[i * n_inner].gamma_mhz)
                .collect();
            let order = sorted_order(&key);
            for j in 0..n_inner {
                let series: Vec<f64> = order.iter().map(|&i| self.fidelity(i, j)).collect();
                violations += trend_violations(&series, trend);
                comparisons += series.len().saturating_sub(1);
            }
        }
        TrendSummary {
            trend,
            axis,
            violations,
            comparisons,
            points: self.rows.len(),
            infeasible: self.count(PointStatus::Infeasible),
            failed: self.count(PointStatus::Failed),
        }
    }

    fn axis_value(&self, r: &SweepRow) -> f64 {
        match self.kind {
            ScenarioKind::SweepDephasing => r.gamma_q_mhz,
            _ => r.g_mhz,
        }
    }

    pub fn count(&self, status: PointStatus) -> usize {
        self.rows.iter().filter(|r| r.status == status).count()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        w.write_record([
            "gamma_mhz",
            "G_mhz",
            "gamma_q_mhz",
            "fidelity",
            "wavepacket_fidelity",
            "status",
            "detail",
        ])?;
        for r in &self.rows {
            w.write_record([
                num(r.gamma_mhz),
                num(r.g_mhz),
                num(r.gamma_q_mhz),
                num(r.fidelity),
                num(r.wavepacket_fidelity),
                r.status.name().to_string(),
                r.detail.clone(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn sweep_point(
    cfg: &Resolved,
    nodes: (NodeParams, NodeParams),
    dt: Option<f64>,
) -> (f64, f64, PointStatus, String) {
    let mut point = cfg.clone();
    point.node1 = nodes.0;
    point.node2 = nodes.1;
    let kind = match cfg.kind {
        ScenarioKind::SweepEmit => ProtocolKind::Emit,
        _ => ProtocolKind::Entangle,
    };
    match run_protocol(&point, kind, dt) {
        Ok(run) => {
            let worst = run
                .report
                .synthesis
                .iter()
                .filter(|s| s.diagnostics.infeasible)
                .filter_map(|s| s.diagnostics.worst_radicand)
                .min_by(|a, b| a.0.total_cmp(&b.0));
            let status = if worst.is_some() {
                PointStatus::Infeasible
            } else {
                PointStatus::Ok
            };
            let detail = worst.map_or(String::new(), |(r, t)| {
                format!("radicand {r:.3e} at t = {t:.4} us")
            });
            (
                run.report.fidelity,
                run.report.wavepacket_fidelity,
                status,
                detail,
            )
        }
        Err(e) => {
            let status = match e {
                Error::Infeasible { .. } => PointStatus::Infeasible,
                _ => PointStatus::Failed,
            };
            (f64::NAN, f64::NAN, status, e.to_string())
        }
    }
}

/// Runs every grid point of a sweep config: emission for `sweep-emit`,
/// entanglement distribution between two nodes sharing the swept values for
/// `sweep-transfer` and `sweep-dephasing`. Points run on `workers` threads
/// (all cores when `None`); the row order does not depend on scheduling.
pub fn run_sweep(cfg: &Resolved, workers: Option<usize>, dt: Option<f64>) -> Result<SweepResult> {
    let (base, base2) = (cfg.node1, cfg.node2);
    let points: Vec<(f64, f64, f64)> = match cfg.kind {
        ScenarioKind::SweepEmit | ScenarioKind::SweepTransfer => cfg
            .sweep
            .gamma
            .iter()
            .flat_map(|&g| {
                cfg.sweep
                    .g
                    .iter()
                    .map(move |&gg| (g, gg, to_mhz_2pi(base.gamma_q)))
            })
            .collect(),
        ScenarioKind::SweepDephasing => cfg
            .sweep
            .gamma_q
            .iter()
            .map(|&q| (to_mhz_2pi(base.gamma), to_mhz_2pi(base.g.re), q))
            .collect(),
        other => {
            return Err(Error::Config(format!("`{}` is not a sweep", other.name())));
        }
    };
    let shape = match cfg.kind {
        ScenarioKind::SweepDephasing => (1, points.len()),
        _ => (cfg.sweep.gamma.len(), cfg.sweep.g.len()),
    };
    let node_at = |&(g, gg, q): &(f64, f64, f64)| -> (NodeParams, NodeParams) {
        let (mut p1, mut p2) = (base, base2);
        for p in [&mut p1, &mut p2] {
            match cfg.kind {
                ScenarioKind::SweepDephasing => p.gamma_q = mhz_2pi(q),
                _ => {
                    p.gamma = mhz_2pi(g);
                    p.g = C64::new(mhz_2pi(gg), 0.0);
                }
            }
        }
        (p1, p2)
    };
    let eval = || -> Vec<SweepRow> {
        points
            .par_iter()
            .map(|pt| {
                let (fidelity, wavepacket_fidelity, status, detail) =
                    sweep_point(cfg, node_at(pt), dt);
                SweepRow {
                    gamma_mhz: pt.0,
                    g_mhz: pt.1,
                    gamma_q_mhz: pt.2,
                    fidelity,
                    wavepacket_fidelity,
                    status,
                    detail,
                }
            })
            .collect()
    };
    let rows = match workers {
        Some(0) => return Err(Error::Config("`workers` must be at least 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?
            .install(eval),
        None => eval(),
    };
    Ok(SweepResult {
        kind: cfg.kind,
        rows,
        shape,
    })
}

struct SweepScenario(ScenarioKind);

impl Scenario for SweepScenario {
    fn kind(&self) -> ScenarioKind {
        self.0
    }

    fn run(&self, cfg: &Resolved, ctx: &RunContext) -> Result<Outcome> {
        let mut cfg = cfg.clone();
        cfg.kind = self.0;
        let result = run_sweep(&cfg, ctx.workers, ctx.dt)?;
        prepare_dir(&ctx.out_dir)?;
        let csv_path = ctx.out_dir.join("sweep.csv");
        let report_path = ctx.out_dir.join("report.txt");
        result.write_csv(&csv_path)?;
        let trend = result.trend_summary();
        let mut out = String::new();
        describe_setup(&mut out, &cfg, &[cfg.node1]);
        let _ = writeln!(
            out,
            "points: {} ({} x {})",
            result.rows.len(),
            result.shape.0,
            result.shape.1
        );
        let _ = writeln!(out, "trend: {}", trend.describe());
        let _ = writeln!(out, "trend within tolerance: {}", trend.passed());
        fs::write(&report_path, out)?;
        Ok(Outcome {
            files: vec![csv_path, report_path],
            summary: format!(
                "{}: {} points; {}",
                self.name(),
                result.rows.len(),
                trend.describe()
            ),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trend_counting_treats_ties_as_level() {
        assert_eq!(
            trend_violations(&[0.1, 0.2, 0.2, 0.3], Trend::NonDecreasing),
            0
        );
        assert_eq!(
            trend_violations(&[0.3, 0.3 - 1e-12, 0.2], Trend::NonDecreasing),
            1
        );
        assert_eq!(
            trend_violations(&[0.3, 0.3 - 1e-13], Trend::NonDecreasing),
            0
        );
        assert_eq!(trend_violations(&[0.3, 0.2, 0.2], Trend::Decreasing), 1);
        assert_eq!(
            trend_violations(&[0.3, f64::NAN, 0.2], Trend::Decreasing),
            2
        );
    }

    #[test]
    fn two_node_header_appends_suffixed_columns() {
        let h = trajectory_header(2);
        assert_eq!(h.len(), 25);
        assert_eq!(h[..13], TRAJECTORY_COLUMNS.map(String::from));
        assert_eq!(h[13], "bq2_re");
        assert_eq!(h[24], "lambda2_im");
    }

    #[test]
    fn registry_knows_every_kind() {
        let r = ScenarioRegistry::builtin();
        for k in ScenarioKind::ALL {
            assert_eq!(r.get(k.name()).unwrap().kind(), k);
        }
        let err = r.get("nope").err().unwrap();
        assert_eq!(err.exit_code(), 1);
    }
}

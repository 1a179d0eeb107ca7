// Copyright 2026 The cntqi Authors
// SPDX-License-Identifier: Apache-2.0

//! `cntqi`: batch runs of the spin-photon interface scenarios.
//!
//! Exit codes: 0 success, 1 config error, 2 numerical failure, 3 oracle
//! tolerance breach.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cntqi::config::{ScenarioConfig, ScenarioKind};
use cntqi::scenario::{RunContext, ScenarioRegistry};
use cntqi::Error;

#[derive(Parser)]
#[command(
    name = "cntqi",
    version,
    about = "Spin-photon interface pulse synthesis and state transfer"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Emit a shaped photon from one node.
    Emit(Common),
    /// Distribute spin-spin entanglement between two nodes.
    Entangle(Common),
    /// Transfer a spin qubit from node 1 to node 2.
    Transfer(Common),
    /// Fidelity over a parameter grid (sweep-emit, sweep-transfer, sweep-dephasing).
    Sweep(Common),
    /// Bath and rotating-wave calibration suite.
    Oracle(Common),
    /// Synthesize the emission control only.
    Synth(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `out_dir` from the file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Step size in us; refined if it breaks the step-size rule.
    #[arg(long)]
    dt: Option<f64>,
    /// Worker threads for sweeps.
    #[arg(long)]
    workers: Option<usize>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Self::Emit(c) => ("emit", c),
            Self::Entangle(c) => ("entangle", c),
            Self::Transfer(c) => ("transfer", c),
            Self::Sweep(c) => ("sweep", c),
            Self::Oracle(c) => ("oracle", c),
            Self::Synth(c) => ("synth", c),
        }
    }
}

fn accepts(command: &str, kind: ScenarioKind) -> bool {
    match command {
        "sweep" => kind.is_sweep(),
        name => kind.name() == name,
    }
}

fn run(cli: &Cli) -> Result<String, Error> {
    let (command, args) = cli.command.parts();
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path)?,
        None if command == "oracle" => ScenarioConfig::from_toml("kind = \"oracle\"")?,
        None => return Err(Error::Config(format!("`{command}` needs --config <path>"))),
    };
    if !accepts(command, cfg.kind) {
        return Err(Error::Config(format!(
            "config describes a `{}` scenario, not `{command}`",
            cfg.kind.name()
        )));
    }
    if let Some(dt) = args.dt {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(Error::Config(format!("--dt must be positive, got {dt}")));
        }
    }
    if args.workers == Some(0) {
        return Err(Error::Config("--workers must be at least 1".into()));
    }
    let resolved = cfg.resolve()?;
    let out_dir = args
        .out
        .clone()
        .or_else(|| resolved.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    let ctx = RunContext {
        out_dir,
        workers: args.workers,
        dt: args.dt,
    };
    let outcome = ScenarioRegistry::builtin().run(&resolved, &ctx)?;
    let mut text = outcome.summary;
    for f in &outcome.files {
        text.push_str(&format!("\nwrote {}", f.display()));
    }
    Ok(text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(text) => {
            // A closed pipe (`cntqi ... | head`) is not a failure.
            let _ = writeln!(std::io::stdout(), "{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

// Copyright 2026 spinctrl contributors
// SPDX-License-Identifier: Apache-2.0

//! The `spinctrl` command line: experiment configuration, result files and
//! exit codes.
//!
//! Configuration is layered: per-target defaults, then an optional JSON file
//! given with `--config`, then command-line flags.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::channels::{robustness_experiment, RobustnessReport};
use crate::error::{Error, Result};
use crate::model::{
    bloch_trajectories, BasisState, BlochTrajectories, ChainSpec, ControlSequence, TargetGate,
};
use crate::objective::{Evaluation, ObjectiveConfig, Surrogate};
use crate::optimizer::{optimize_controls, OptimizationResult, OptimizerConfig, Termination};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INVALID_CONFIG: u8 = 2;
pub const EXIT_BELOW_MIN_FIDELITY: u8 = 3;
pub const EXIT_IO: u8 = 1;

/// Default pulse amplitude bound, in units of J.
pub const DEFAULT_BOUND: f64 = 40.0;

#[derive(Debug, Parser)]
#[command(
    name = "spinctrl",
    version,
    about = "Sparse control pulses for Heisenberg spin chains"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize pulses for one target and write result.json, pulses.csv and trajectories.csv.
    Run(ConfigOverrides),
    /// Compare μ = 1 and μ < 1 pulses against an environment qubit; writes robustness.json.
    Robustness(ConfigOverrides),
}

/// Every experiment setting as an optional override. Used both for the
/// command-line flags and for the `--config` JSON file.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    /// JSON file with settings; flags take precedence over it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Target gate: not3, not4, swap3, swap4 (any notN / swapN is accepted).
    #[arg(long)]
    pub target: Option<String>,
    #[arg(long)]
    pub n_pulses: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    /// Weight of the fidelity term.
    #[arg(long)]
    pub mu: Option<f64>,
    /// Maximum pulse amplitude b.
    #[arg(long)]
    pub bound: Option<f64>,
    /// signum, fractional or fermi_dirac.
    #[arg(long)]
    pub surrogate: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub kt: Option<f64>,
    /// Environment coupling strength.
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub init_amplitude: Option<f64>,
    /// Basis state for trajectories.csv, qubit 1 first (e.g. 000).
    #[arg(long)]
    pub initial_state: Option<String>,
    /// Exit with status 3 when the optimized fidelity falls below this.
    #[arg(long)]
    pub min_fidelity: Option<f64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Store the measured wall time in result.json (otherwise null, keeping
    /// output byte-identical across runs).
    #[arg(long)]
    #[serde(default)]
    pub record_wall_time: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub target: String,
    pub n_pulses: usize,
    pub dt: f64,
    pub mu: f64,
    pub bound: f64,
    pub surrogate: Surrogate,
    pub alpha: f64,
    pub kt: f64,
    pub gamma: f64,
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub init_amplitude: f64,
    pub initial_state: String,
    pub min_fidelity: Option<f64>,
    pub output_dir: PathBuf,
    #[serde(skip)]
    pub record_wall_time: bool,
}

impl ExperimentConfig {
    /// Defaults for a target: 64 slices and μ = 0.2 for chains of up to three
    /// qubits, 256 slices and μ = 0.4 beyond.
    pub fn for_target(target: &TargetGate) -> Self {
        let obj = ObjectiveConfig::default();
        let opt = OptimizerConfig::default();
        let large = target.n_qubits >= 4;
        let initial_state = match target.n_qubits {
            4 => "0010".to_string(),
            n => "0".repeat(n),
        };
        Self {
            target: target.to_string(),
            n_pulses: if large { 256 } else { 64 },
            dt: 0.2,
            mu: if large { 0.4 } else { 0.2 },
            bound: DEFAULT_BOUND,
            surrogate: obj.surrogate,
            alpha: obj.alpha,
            kt: obj.kt,
            gamma: crate::model::DEFAULT_GAMMA,
            seed: 1,
            restarts: opt.restarts,
            max_iters: opt.max_iters,
            init_amplitude: opt.init_amplitude,
            initial_state,
            min_fidelity: None,
            output_dir: PathBuf::from("."),
            record_wall_time: false,
        }
    }

    /// Layers file settings (if `--config` is given) and then flags over the
    /// target defaults.
    pub fn resolve(flags: &ConfigOverrides) -> Result<Self> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| {
                    Error::InvalidConfig(format!("cannot read {}: {e}", path.display()))
                })?;
                serde_json::from_str::<ConfigOverrides>(&text).map_err(|e| {
                    Error::InvalidConfig(format!("bad config file {}: {e}", path.display()))
                })?
            }
            None => ConfigOverrides::default(),
        };
        let target_name = flags
            .target
            .clone()
            .or_else(|| file.target.clone())
            .ok_or_else(|| Error::InvalidConfig("a target is required (--target)".into()))?;
        let target: TargetGate = target_name.parse()?;
        let mut cfg = Self::for_target(&target);
        cfg.apply(&file)?;
        cfg.apply(flags)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply(&mut self, o: &ConfigOverrides) -> Result<()> {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &o.$field { self.$field = v.clone(); })*
            };
        }
        set!(
            n_pulses,
            dt,
            mu,
            bound,
            alpha,
            kt,
            gamma,
            seed,
            restarts,
            max_iters,
            init_amplitude,
            initial_state,
            output_dir
        );
        if let Some(t) = &o.target {
            self.target = t.parse::<TargetGate>()?.to_string();
        }
        if let Some(s) = &o.surrogate {
            self.surrogate = s.parse()?;
        }
        if o.min_fidelity.is_some() {
            self.min_fidelity = o.min_fidelity;
        }
        self.record_wall_time |= o.record_wall_time;
        Ok(())
    }

    pub fn target_gate(&self) -> Result<TargetGate> {
        self.target.parse()
    }

    pub fn chain_spec(&self) -> Result<ChainSpec> {
        Ok(ChainSpec::new(self.target_gate()?.n_qubits).with_environment(self.gamma))
    }

    pub fn template(&self) -> Result<ControlSequence> {
        ControlSequence::zeros(self.n_pulses, self.dt, self.bound)
    }

    pub fn objective(&self) -> ObjectiveConfig {
        ObjectiveConfig {
            mu: self.mu,
            surrogate: self.surrogate,
            alpha: self.alpha,
            kt: self.kt,
            ..ObjectiveConfig::default()
        }
    }

    pub fn optimizer(&self) -> OptimizerConfig {
        OptimizerConfig {
            max_iters: self.max_iters,
            restarts: self.restarts,
            init_amplitude: self.init_amplitude,
            seed: self.seed,
            ..OptimizerConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let target = self.target_gate()?;
        self.chain_spec()?.validate()?;
        self.template()?;
        self.objective().validate()?;
        self.optimizer().validate()?;
        if self.init_amplitude > self.bound {
            return Err(Error::InvalidConfig(format!(
                "init_amplitude {} exceeds bound {}",
                self.init_amplitude, self.bound
            )));
        }
        BasisState::parse(&self.initial_state, target.n_qubits)?;
        if let Some(f) = self.min_fidelity {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "min_fidelity must lie in [0, 1], got {f}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Pulses {
    pub hx: Vec<f64>,
    pub hy: Vec<f64>,
}

/// Layout of `result.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResultFile {
    pub config: ExperimentConfig,
    pub fidelity: f64,
    pub penalty: f64,
    #[serde(rename = "G")]
    pub g: f64,
    pub iterations_used: usize,
    pub restart_index: usize,
    pub seed: u64,
    pub termination: Termination,
    pub wall_seconds: Option<f64>,
    pub pulses: Pulses,
    pub trace: Vec<Evaluation>,
}

/// Layout of `robustness.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RobustnessFile {
    pub config: ExperimentConfig,
    pub report: RobustnessReport,
    pub restart_index_mu1: usize,
    #[serde(rename = "restart_index_muL")]
    pub restart_index_mu_l: usize,
    pub wall_seconds: Option<f64>,
}

pub const RESULT_FILE: &str = "result.json";
pub const PULSES_FILE: &str = "pulses.csv";
pub const TRAJECTORIES_FILE: &str = "trajectories.csv";
pub const ROBUSTNESS_FILE: &str = "robustness.json";

/// What a finished command produced.
#[derive(Debug)]
pub enum Outcome {
    Optimized(Box<OptimizationResult>),
    Robustness(Box<RobustnessReport>),
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("fidelity {fidelity} is below the required minimum {min}")]
    BelowMinFidelity { fidelity: f64, min: f64 },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_INVALID_CONFIG,
            CliError::BelowMinFidelity { .. } => EXIT_BELOW_MIN_FIDELITY,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

pub fn execute(cli: &Cli) -> std::result::Result<Outcome, CliError> {
    match &cli.command {
        Command::Run(flags) => run_optimize(&ExperimentConfig::resolve(flags)?),
        Command::Robustness(flags) => run_robustness(&ExperimentConfig::resolve(flags)?),
    }
}

/// Serializes with every float written as 17 significant digits.
pub fn to_json_string<T: Serialize>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Sci17::default());
    value.serialize(&mut ser).expect("serializable value");
    out.push(b'\n');
    String::from_utf8(out).expect("JSON is UTF-8")
}

/// Pretty JSON formatter that prints floats as `{:.16e}`.
#[derive(Default)]
struct Sci17(serde_json::ser::PrettyFormatter<'static>);

impl serde_json::ser::Formatter for Sci17 {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_pulses_csv(path: &Path, seq: &ControlSequence) -> std::result::Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["index", "t_start", "hx", "hy"])?;
    for (i, (hx, hy)) in seq.pulses().enumerate() {
        w.write_record([
            i.to_string(),
            format_float(i as f64 * seq.dt),
            format_float(hx),
            format_float(hy),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectories_csv(
    path: &Path,
    traj: &BlochTrajectories,
) -> std::result::Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "qubit", "bx", "by", "bz"])?;
    for (t, sample) in traj.times.iter().zip(&traj.bloch) {
        for (q, b) in sample.iter().enumerate() {
            w.write_record([
                format_float(*t),
                (q + 1).to_string(),
                format_float(b[0]),
                format_float(b[1]),
                format_float(b[2]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `pulses.csv` back into `(hx, hy)`.
pub fn read_pulses_csv(path: &Path) -> std::result::Result<(Vec<f64>, Vec<f64>), CliError> {
    let mut r = csv::Reader::from_path(path)?;
    let (mut hx, mut hy) = (Vec::new(), Vec::new());
    for record in r.records() {
        let record = record?;
        let parse = |i: usize| -> std::result::Result<f64, CliError> {
            record.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| {
                CliError::Config(Error::InvalidConfig(format!("bad pulses row {record:?}")))
            })
        };
        hx.push(parse(2)?);
        hy.push(parse(3)?);
    }
    Ok((hx, hy))
}

pub fn run_optimize(cfg: &ExperimentConfig) -> std::result::Result<Outcome, CliError> {
    cfg.validate()?;
    let target = cfg.target_gate()?;
    let spec = ChainSpec::new(target.n_qubits);
    let initial = BasisState::parse(&cfg.initial_state, target.n_qubits)?;

    let started = Instant::now();
    let result = optimize_controls(
        &spec,
        &target,
        &cfg.template()?,
        &cfg.objective(),
        &cfg.optimizer(),
    )?;
    let traj = bloch_trajectories(&spec, &result.best_seq, &initial)?;
    let wall = started.elapsed().as_secs_f64();
    eprintln!(
        "{}: F = {:.6}, P = {:.6}, G = {:.6} (restart {}, {} iterations, {:.1} s)",
        cfg.target,
        result.fidelity,
        result.penalty,
        result.g,
        result.restart_index,
        result.iterations_used,
        wall
    );

    fs::create_dir_all(&cfg.output_dir)?;
    let file = ResultFile {
        config: cfg.clone(),
        fidelity: result.fidelity,
        penalty: result.penalty,
        g: result.g,
        iterations_used: result.iterations_used,
        restart_index: result.restart_index,
        seed: result.seed,
        termination: result.termination,
        wall_seconds: cfg.record_wall_time.then_some(wall),
        pulses: Pulses {
            hx: result.best_seq.hx.clone(),
            hy: result.best_seq.hy.clone(),
        },
        trace: result.trace.clone(),
    };
    fs::write(cfg.output_dir.join(RESULT_FILE), to_json_string(&file))?;
    write_pulses_csv(&cfg.output_dir.join(PULSES_FILE), &result.best_seq)?;
    write_trajectories_csv(&cfg.output_dir.join(TRAJECTORIES_FILE), &traj)?;

    if let Some(min) = cfg.min_fidelity {
        if result.fidelity < min {
            return Err(CliError::BelowMinFidelity {
                fidelity: result.fidelity,
                min,
            });
        }
    }
    Ok(Outcome::Optimized(Box::new(result)))
}

pub fn run_robustness(cfg: &ExperimentConfig) -> std::result::Result<Outcome, CliError> {
    cfg.validate()?;
    let target = cfg.target_gate()?;
    let started = Instant::now();
    let run = robustness_experiment(
        &cfg.chain_spec()?,
        &target,
        &cfg.template()?,
        cfg.mu,
        &cfg.objective(),
        &cfg.optimizer(),
    )?;
    let wall = started.elapsed().as_secs_f64();
    let r = &run.report;
    eprintln!(
        "{}: no env (mu=1, mu={}) = ({:.6}, {:.6}); with env = ({:.6}, {:.6}) ({:.1} s)",
        r.target,
        r.mu_used,
        r.dist_no_env_mu1,
        r.dist_no_env_mu_l,
        r.dist_env_mu1,
        r.dist_env_mu_l,
        wall
    );
    fs::create_dir_all(&cfg.output_dir)?;
    let file = RobustnessFile {
        config: cfg.clone(),
        report: run.report.clone(),
        restart_index_mu1: run.unconstrained.restart_index,
        restart_index_mu_l: run.constrained.restart_index,
        wall_seconds: cfg.record_wall_time.then_some(wall),
    };
    fs::write(cfg.output_dir.join(ROBUSTNESS_FILE), to_json_string(&file))?;
    if let Some(min) = cfg.min_fidelity {
        let worst = r.fidelity_mu1.min(r.fidelity_mu_l);
        if worst < min {
            return Err(CliError::BelowMinFidelity {
                fidelity: worst,
                min,
            });
        }
    }
    Ok(Outcome::Robustness(Box::new(run.report)))
}

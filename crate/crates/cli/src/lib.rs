//! `curvant` command implementations.
//!
//! Exit codes: 0 on success, 1 on a runtime failure, 2 on a configuration
//! or usage error. Configuration problems are detected before any output
//! file is created.

pub mod config;
pub mod output;

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use curvant_core::em::Evaluator;
use curvant_core::geometry::{assemble_model_with, export_nec_deck, PatternRequest, MAX_SEGMENT_WAVELENGTHS};
use curvant_core::harness::{
    build_evaluator, load_checkpoint, save_checkpoint, train_with, transfer_run_with, write_metrics_csv, HarnessError,
    RunMetrics, SuccessRecord,
};
use curvant_core::{Checkpoint, DesignVariables, EMReport, RunConfig};
use thiserror::Error;

use config::{CliConfig, Stage, SweepSection};
use output::*;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Geometry(_) => CliError::Config(e.to_string()),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn runtime<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Runtime(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "curvant", version, about = "Reinforcement-learning design of dipole arrays on conductive tubes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// TOML run configuration; built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an agent from scratch; writes metrics, checkpoint and summary.
    Train {
        #[command(flatten)]
        common: Common,
    },
    /// Analyse one design; writes report JSON, pattern CSV, NEC deck and an
    /// optional frequency sweep.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// D1 (m), theta1 (deg), L3,0 L3,1 L3,2 (m), comma separated.
        #[arg(long, value_delimiter = ',', value_name = "D1,THETA1,L0,L1,L2", allow_negative_numbers = true)]
        design: Option<Vec<f64>>,
        /// Start and stop frequency in Hz, then the point count.
        #[arg(long, num_args = 3, value_names = ["F_LO", "F_HI", "N"])]
        sweep: Option<Vec<f64>>,
    },
    /// Run on a new tube, warm-started from a checkpoint or cold.
    Transfer {
        #[command(flatten)]
        common: Common,
        #[arg(long, conflicts_with = "cold")]
        checkpoint: Option<PathBuf>,
        /// Start from freshly initialized weights.
        #[arg(long)]
        cold: bool,
        /// Run both cold and warm with the same seed and compare.
        #[arg(long, conflicts_with = "cold")]
        paired: bool,
    },
}

fn load_config(common: &Common) -> Result<CliConfig, CliError> {
    let mut config = match &common.config {
        Some(path) => CliConfig::load(path)?,
        None => CliConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    if let Some(out) = &common.out {
        config.out_dir.clone_from(out);
    }
    Ok(config)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train { common } => cmd_train(&load_config(&common)?),
        Command::Evaluate { common, design, sweep } => {
            let config = load_config(&common)?;
            let design = match design {
                Some(v) if v.len() == 5 => DesignVariables { d1: v[0], theta1: v[1], l3: [v[2], v[3], v[4]] },
                Some(v) => return Err(CliError::Config(format!("--design takes 5 values, got {}", v.len()))),
                None => config
                    .design
                    .ok_or_else(|| CliError::Config("no design given: pass --design or add a [design] section".into()))?
                    .to_design(),
            };
            let sweep = match sweep {
                Some(v) => Some(parse_sweep(&v)?),
                None => config.sweep,
            };
            cmd_evaluate(&config, &design, sweep.as_ref())
        }
        Command::Transfer { common, checkpoint, cold, paired } => {
            let config = load_config(&common)?;
            let checkpoint = if cold { None } else { checkpoint.or_else(|| config.checkpoint.clone()) };
            if checkpoint.is_none() && !cold {
                return Err(CliError::Config("transfer needs --checkpoint (or `checkpoint` in the config) or --cold".into()));
            }
            cmd_transfer(&config, checkpoint.as_deref(), paired)
        }
    }
}

fn parse_sweep(v: &[f64]) -> Result<SweepSection, CliError> {
    let n = v[2];
    if !(n >= 1.0 && n.fract() == 0.0) {
        return Err(CliError::Config(format!("sweep point count must be a positive integer, got {n}")));
    }
    Ok(SweepSection { start_hz: v[0], stop_hz: v[1], points: n as usize })
}

fn prepare(config: &CliConfig, stage: Stage) -> Result<(RunConfig, Arc<Evaluator>), CliError> {
    let run = config.run_config(stage)?;
    let evaluator = build_evaluator(&run)?;
    Ok((run, evaluator))
}

fn create_out_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn metrics_bytes(metrics: &RunMetrics) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_metrics_csv(metrics, &mut buf)?;
    Ok(buf)
}

fn best_report(evaluator: &Evaluator, best: Option<&SuccessRecord>) -> Result<Option<(SuccessRecord, EMReport)>, CliError> {
    best.map(|record| Ok((*record, evaluator.report(&record.design).map_err(runtime)?))).transpose()
}

fn write_run_outputs(
    config: &CliConfig,
    dir: &Path,
    metrics_name: &str,
    metrics: &RunMetrics,
    checkpoint: Option<&Checkpoint>,
) -> Result<(), CliError> {
    if config.export.metrics {
        write_file(&dir.join(metrics_name), &metrics_bytes(metrics)?)?;
    }
    if let (true, Some(ckpt)) = (config.export.checkpoint, checkpoint) {
        save_checkpoint(ckpt, &dir.join(CHECKPOINT_FILE))?;
    }
    Ok(())
}

fn log_run(label: &str, metrics: &RunMetrics) {
    eprintln!(
        "{label}: {} successes in {} simulations, {:.1} s",
        metrics.successes.len(),
        metrics.total_simulations,
        metrics.wall_clock_s
    );
}

pub fn cmd_train(config: &CliConfig) -> Result<(), CliError> {
    let (run, evaluator) = prepare(config, Stage::Train)?;
    create_out_dir(&config.out_dir)?;
    let (metrics, ckpt) = train_with(&run, evaluator.clone())?;
    log_run("train", &metrics);
    write_run_outputs(config, &config.out_dir, METRICS_FILE, &metrics, Some(&ckpt))?;
    if config.export.summary {
        let best = best_report(&evaluator, metrics.best())?;
        let text = run_summary("curvant train", &run.tube, run.frequency, run.seed, &metrics, best.as_ref().map(|(r, e)| (r, e)));
        write_file(&config.out_dir.join(SUMMARY_FILE), text.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_transfer(config: &CliConfig, checkpoint: Option<&Path>, paired: bool) -> Result<(), CliError> {
    let (run, evaluator) = prepare(config, Stage::Transfer)?;
    let warm = match checkpoint {
        Some(path) => {
            if !path.is_file() {
                return Err(CliError::Config(format!("checkpoint {} does not exist", path.display())));
            }
            Some(load_checkpoint(path)?)
        }
        None => None,
    };
    create_out_dir(&config.out_dir)?;
    let dir = &config.out_dir;
    if paired {
        let (cold_m, cold_best, _) = transfer_run_with(None, &run, evaluator.clone())?;
        log_run("cold", &cold_m);
        let (warm_m, warm_best, ckpt) = transfer_run_with(warm.as_ref(), &run, evaluator.clone())?;
        log_run("warm", &warm_m);
        write_run_outputs(config, dir, "metrics_cold.csv", &cold_m, None)?;
        write_run_outputs(config, dir, "metrics_warm.csv", &warm_m, Some(&ckpt))?;
        if config.export.summary {
            let cold_r = best_report(&evaluator, cold_best.as_ref())?;
            let warm_r = best_report(&evaluator, warm_best.as_ref())?;
            let mut text =
                run_summary("curvant transfer (cold)", &run.tube, run.frequency, run.seed, &cold_m, cold_r.as_ref().map(|(r, e)| (r, e)));
            text.push('\n');
            text.push_str(&run_summary(
                "curvant transfer (warm)",
                &run.tube,
                run.frequency,
                run.seed,
                &warm_m,
                warm_r.as_ref().map(|(r, e)| (r, e)),
            ));
            text.push('\n');
            text.push_str(&comparison(&cold_m, cold_r.as_ref(), &warm_m, warm_r.as_ref()));
            write_file(&dir.join(SUMMARY_FILE), text.as_bytes())?;
        }
        return Ok(());
    }
    let (metrics, best, ckpt) = transfer_run_with(warm.as_ref(), &run, evaluator.clone())?;
    let title = if warm.is_some() { "curvant transfer (warm)" } else { "curvant transfer (cold)" };
    log_run(title, &metrics);
    write_run_outputs(config, dir, METRICS_FILE, &metrics, Some(&ckpt))?;
    if config.export.summary {
        let best = best_report(&evaluator, best.as_ref())?;
        let text = run_summary(title, &run.tube, run.frequency, run.seed, &metrics, best.as_ref().map(|(r, e)| (r, e)));
        write_file(&dir.join(SUMMARY_FILE), text.as_bytes())?;
    }
    Ok(())
}

fn comparison(
    cold: &RunMetrics,
    cold_best: Option<&(SuccessRecord, EMReport)>,
    warm: &RunMetrics,
    warm_best: Option<&(SuccessRecord, EMReport)>,
) -> String {
    let first = |m: &RunMetrics| m.first_success().map_or("none".to_string(), |i| i.to_string());
    let vswr = |b: Option<&(SuccessRecord, EMReport)>| b.map_or("none".to_string(), |(_, r)| format!("{:.3}", r.vswr));
    let winner = match (cold.first_success(), warm.first_success()) {
        (Some(c), Some(w)) if w < c => "warm",
        (Some(c), Some(w)) if c < w => "cold",
        (None, Some(_)) => "warm",
        (Some(_), None) => "cold",
        _ => "tie",
    };
    format!(
        "comparison\n  first success: cold {}, warm {}\n  successes: cold {}, warm {}\n  best VSWR: cold {}, warm {}\n  earlier first success: {winner}\n",
        first(cold),
        first(warm),
        cold.successes.len(),
        warm.successes.len(),
        vswr(cold_best),
        vswr(warm_best),
    )
}

pub fn cmd_evaluate(config: &CliConfig, design: &DesignVariables, sweep: Option<&SweepSection>) -> Result<(), CliError> {
    let tube = config.tube_spec()?;
    let options = config.solver_options()?;
    config.bounds.to_bounds().check(design).map_err(|e| CliError::Config(format!("design out of bounds: {e}")))?;
    if let Some(s) = sweep {
        s.validate()?;
    }
    let f = config.frequency_hz;
    if !(f > 0.0 && f.is_finite()) {
        return Err(CliError::Config(format!("frequency must be positive, got {f}")));
    }
    let evaluator = Evaluator::new(&tube, f, options).map_err(|e| CliError::Config(e.to_string()))?;
    // The deck always meets the λ/10 segment limit, even when the solver runs on a coarser tube grid.
    let mut deck_options = options.model;
    deck_options.mesh.max_pitch_wavelengths = deck_options.mesh.max_pitch_wavelengths.min(MAX_SEGMENT_WAVELENGTHS);
    let model = assemble_model_with(design, &tube, f, &deck_options).map_err(|e| CliError::Config(e.to_string()))?;
    let report = evaluator.report(design).map_err(runtime)?;
    let sweep_rows = match sweep {
        Some(s) => Some(
            s.frequencies()
                .into_iter()
                .map(|fs| {
                    let summary = Evaluator::new(&tube, fs, options).and_then(|ev| ev.summary(design)).map_err(runtime)?;
                    Ok(SweepRow::new(fs, &summary))
                })
                .collect::<Result<Vec<_>, CliError>>()?,
        ),
        None => None,
    };

    let dir = &config.out_dir;
    create_out_dir(dir)?;
    if config.export.report {
        let json = serde_json::to_string_pretty(&report).map_err(runtime)?;
        write_file(&dir.join(REPORT_FILE), json.as_bytes())?;
    }
    if config.export.pattern {
        let mut buf = Vec::new();
        write_pattern_csv(&report.pattern, &mut buf).map_err(runtime)?;
        write_file(&dir.join(PATTERN_FILE), &buf)?;
    }
    if config.export.nec {
        let deck = export_nec_deck(&model, f, &PatternRequest::full_sphere(options.pattern.step_deg));
        write_file(&dir.join(NEC_FILE), deck.as_bytes())?;
    }
    if let Some(rows) = sweep_rows {
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).map_err(runtime)?;
        write_file(&dir.join(SWEEP_FILE), &buf)?;
    }
    eprintln!("{}", format_report(&report));
    Ok(())
}

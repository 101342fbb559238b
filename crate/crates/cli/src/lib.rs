//! Command-line harness around the `modadc` simulator.

pub mod config;
pub mod output;
pub mod plot;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use modadc::experiment::{
    run_experiment1, run_experiment2, run_pipeline, run_table1, ExperimentConfig, ExperimentRow, FoldMode,
};
use modadc::{compare, correct_reset_samples, dr_ratio, quantize, rescale, unfold, QuantizerConfig};

use config::{echo_lines, resolve, Overrides};
use output::{read_traces, trace_rows, write_report, write_traces, ReportRow, TraceRow};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error(transparent)]
    Pipeline(#[from] modadc::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: plot failed: {message}")]
    Plot { path: PathBuf, message: String },
}

impl CliError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn csv(path: &Path, source: csv::Error) -> Self {
        Self::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    /// 2 for configuration problems, 3 for pipeline failures, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Pipeline(_) => 3,
            _ => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "modadc", version, about = "Integrator-based modulo ADC simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// key=value configuration file; flags override it
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV (stdout if omitted)
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the whole pipeline and write every trace
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Overlay of input, folded and recovered traces (.svg, .png or .bmp)
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Correct and unfold the quantized column of a trace CSV
    Recover {
        /// Trace CSV to read
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// SINAD and ENOB of a trace CSV against a conventional ADC with the same bits
    Metrics {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Amplitude sweep: rho in {4, 8}, bits in {6, 8, 10, 12}
    Exp1 {
        #[command(flatten)]
        common: Common,
    },
    /// Modulo-gain sweep: alpha in {1, 2, 4, 8, 16, 32} at rho = 1
    Exp2 {
        #[command(flatten)]
        common: Common,
    },
    /// The eight (rho, alpha) settings of the performance table
    Table1 {
        #[command(flatten)]
        common: Common,
    },
}

fn emit(
    out: Option<&Path>,
    stdout: &mut dyn Write,
    write: impl FnOnce(&mut dyn Write) -> Result<(), csv::Error>,
) -> Result<(), CliError> {
    match out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            write(&mut f).map_err(|e| CliError::csv(path, e))
        }
        None => write(stdout).map_err(|e| CliError::csv(Path::new("<stdout>"), e)),
    }
}

fn emit_rows(common: &Common, preamble: &str, rows: &[ExperimentRow], stdout: &mut dyn Write) -> Result<(), CliError> {
    let rows: Vec<ReportRow> = rows.iter().map(ReportRow::from).collect();
    emit(common.out.as_deref(), stdout, |mut w| write_report(&mut w, preamble, &rows))
}

fn emit_trace(
    common: &Common,
    plot: Option<&Path>,
    preamble: &str,
    rows: &[TraceRow],
    stdout: &mut dyn Write,
) -> Result<(), CliError> {
    emit(common.out.as_deref(), stdout, |mut w| write_traces(&mut w, preamble, rows))?;
    match plot {
        Some(p) => plot::emit_plot(rows, p),
        None => Ok(()),
    }
}

fn resolve_common(common: &Common, mode: FoldMode) -> Result<ExperimentConfig, CliError> {
    resolve(mode, common.config.as_deref(), &common.overrides)
}

/// Conventional ADC result for a recorded input, rated by the measured range.
pub fn metrics_row(cfg: &ExperimentConfig, rows: &[TraceRow]) -> Result<ExperimentRow, CliError> {
    let input = output::column(rows, cfg.sample_rate_hz, |r| r.input_v)?;
    let recovered = output::column(rows, cfg.sample_rate_hz, |r| r.recovered_v)?;
    let rho = dr_ratio(&input, cfg.lambda_v)?;
    let qc = QuantizerConfig::new(cfg.bits, cfg.lambda_v * rho * cfg.alpha)?;
    let conventional = rescale(&quantize(&input.map(|g| cfg.alpha * g), &qc)?, cfg.alpha)?;
    let m = compare(&conventional, &recovered, cfg.freq_hz, cfg.lambda_v)?;
    Ok(ExperimentRow {
        label: cfg.label(),
        rho,
        alpha: cfg.alpha,
        bits: cfg.bits,
        sinad_conv_db: m.sinad_conv_db,
        sinad_usf_db: m.sinad_usf_db,
        sinad_gain_db: m.sinad_gain_db,
        enob_conv: m.enob_conv_bits,
        enob_usf: m.enob_usf_bits,
    })
}

/// Redoes correction and unfolding from the `quantized_v` column.
pub fn recover_rows(cfg: &ExperimentConfig, rows: &[TraceRow]) -> Result<Vec<TraceRow>, CliError> {
    let quantized = output::column(rows, cfg.sample_rate_hz, |r| r.quantized_v)?;
    let rc = cfg.recovery_config();
    let corrected = match cfg.mode {
        FoldMode::Ideal => quantized,
        FoldMode::Circuit => correct_reset_samples(&quantized, cfg.lambda_v, &rc)?.0,
    };
    let recovered = rescale(&unfold(&corrected, cfg.lambda_v, &rc)?.signal, cfg.alpha)?;
    Ok(rows
        .iter()
        .enumerate()
        .map(|(k, r)| TraceRow {
            corrected_v: corrected.values[k],
            recovered_v: recovered.values[k],
            ..*r
        })
        .collect())
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { common, plot } => {
            let cfg = resolve_common(&common, FoldMode::Circuit)?;
            let run = run_pipeline(&cfg)?;
            emit_trace(&common, plot.as_deref(), &echo_lines(&cfg), &trace_rows(&run.traces), stdout)
        }
        Command::Recover { input, common, plot } => {
            let cfg = resolve_common(&common, FoldMode::Circuit)?;
            let rows = recover_rows(&cfg, &read_traces(&input)?)?;
            emit_trace(&common, plot.as_deref(), &echo_lines(&cfg), &rows, stdout)
        }
        Command::Metrics { input, common } => {
            let cfg = resolve_common(&common, FoldMode::Circuit)?;
            let row = metrics_row(&cfg, &read_traces(&input)?)?;
            emit_rows(&common, &echo_lines(&cfg), &[row], stdout)
        }
        Command::Exp1 { common } => {
            let cfg = resolve_common(&common, FoldMode::Ideal)?;
            let report = run_experiment1(&cfg)?;
            emit_rows(&common, &echo_lines(&cfg), &report.rows, stdout)
        }
        Command::Exp2 { common } => {
            let cfg = resolve_common(&common, FoldMode::Ideal)?;
            let report = run_experiment2(&cfg)?;
            let preamble = format!("{}# enob_gain_slope={:?}\n", echo_lines(&cfg), report.enob_gain_slope);
            emit_rows(&common, &preamble, &report.rows, stdout)
        }
        Command::Table1 { common } => {
            let cfg = resolve_common(&common, FoldMode::Ideal)?;
            let rows = run_table1(&cfg)?;
            emit_rows(&common, &echo_lines(&cfg), &rows, stdout)
        }
    }
}

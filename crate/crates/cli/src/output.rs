//! CSV traces and reports.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::Path;

use modadc::experiment::{ExperimentRow, PipelineTraces};
use modadc::SampledSignal;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t_s: f64,
    pub input_v: f64,
    pub folded_v: f64,
    pub quantized_v: f64,
    pub corrected_v: f64,
    pub recovered_v: f64,
}

pub const TRACE_HEADER: [&str; 6] = ["t_s", "input_v", "folded_v", "quantized_v", "corrected_v", "recovered_v"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    pub rho: f64,
    pub alpha: f64,
    pub bits: u32,
    pub sinad_conv_db: f64,
    pub sinad_usf_db: f64,
    pub sinad_gain_db: f64,
    pub enob_conv: f64,
    pub enob_usf: f64,
}

pub const REPORT_HEADER: [&str; 9] = [
    "label",
    "rho",
    "alpha",
    "bits",
    "sinad_conv_db",
    "sinad_usf_db",
    "sinad_gain_db",
    "enob_conv",
    "enob_usf",
];

impl From<&ExperimentRow> for ReportRow {
    fn from(r: &ExperimentRow) -> Self {
        Self {
            label: r.label.clone(),
            rho: r.rho,
            alpha: r.alpha,
            bits: r.bits,
            sinad_conv_db: r.sinad_conv_db,
            sinad_usf_db: r.sinad_usf_db,
            sinad_gain_db: r.sinad_gain_db,
            enob_conv: r.enob_conv,
            enob_usf: r.enob_usf,
        }
    }
}

pub fn trace_rows(t: &PipelineTraces) -> Vec<TraceRow> {
    (0..t.input.len())
        .map(|k| TraceRow {
            t_s: t.input.time(k),
            input_v: t.input.values[k],
            folded_v: t.folded.values[k],
            quantized_v: t.quantized.values[k],
            corrected_v: t.corrected.values[k],
            recovered_v: t.recovered.values[k],
        })
        .collect()
}

/// Pulls one column back out as a signal on the config's sample grid.
pub fn column(rows: &[TraceRow], sample_rate_hz: f64, f: impl Fn(&TraceRow) -> f64) -> Result<SampledSignal, CliError> {
    let t0 = rows.first().map_or(0.0, |r| r.t_s);
    SampledSignal::new(sample_rate_hz, t0, rows.iter().map(f).collect()).map_err(|e| CliError::Config(e.to_string()))
}

fn write_csv<T: Serialize>(
    out: &mut impl Write,
    preamble: &str,
    header: &[&str],
    rows: &[T],
) -> Result<(), csv::Error> {
    out.write_all(preamble.as_bytes())?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn to_file<T: Serialize>(path: &Path, preamble: &str, header: &[&str], rows: &[T]) -> Result<(), CliError> {
    let mut f = File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(&mut f, preamble, header, rows).map_err(|e| CliError::csv(path, e))
}

pub fn write_traces(out: &mut impl Write, preamble: &str, rows: &[TraceRow]) -> Result<(), csv::Error> {
    write_csv(out, preamble, &TRACE_HEADER, rows)
}

pub fn write_report(out: &mut impl Write, preamble: &str, rows: &[ReportRow]) -> Result<(), csv::Error> {
    write_csv(out, preamble, &REPORT_HEADER, rows)
}

pub fn emit_traces(path: &Path, preamble: &str, rows: &[TraceRow]) -> Result<(), CliError> {
    to_file(path, preamble, &TRACE_HEADER, rows)
}

pub fn emit_report(path: &Path, preamble: &str, rows: &[ReportRow]) -> Result<(), CliError> {
    to_file(path, preamble, &REPORT_HEADER, rows)
}

fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, CliError> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(BufReader::new(f))
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| CliError::csv(path, e))
}

pub fn read_traces(path: &Path) -> Result<Vec<TraceRow>, CliError> {
    read_csv(path)
}

pub fn read_report(path: &Path) -> Result<Vec<ReportRow>, CliError> {
    read_csv(path)
}

//! End-to-end acquisition pipeline and the parameter sweeps built on it.
//!
//! Each run synthesises a tone of amplitude `λρ` (so its swing is `2λρ`), then
//! digitises it twice with the same bit budget:
//!
//! * conventional: `α·g` quantized over `±λρα`, just wide enough not to clip;
//! * modulo: `α·g` folded into `[−λ, λ)`, quantized over `±λ`, corrected
//!   (circuit mode), unfolded and divided by `α`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::circuit::{sample_trace, simulate, CircuitParams};
use crate::error::{ensure, invalid, Error, Result};
use crate::metrics::compare;
use crate::modulo::{fold_signal, ModuloParams};
use crate::quant::{quantize, QuantizerConfig};
use crate::recovery::{correct_reset_samples, rescale, unfold, CorrectionReport, RecoveryConfig};
use crate::signal::{add_noise, make_sine, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoldMode {
    /// Folding by the exact modulo map.
    Ideal,
    /// Folding by the behavioural circuit, sampled by a sample-and-hold.
    Circuit,
}

impl FoldMode {
    pub fn as_str(self) -> &'static str {
        match self {
            FoldMode::Ideal => "ideal_fold",
            FoldMode::Circuit => "circuit_fold",
        }
    }
}

impl fmt::Display for FoldMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FoldMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal_fold" => Ok(FoldMode::Ideal),
            "circuit_fold" => Ok(FoldMode::Circuit),
            other => Err(invalid(format!(
                "unknown mode `{other}` (expected ideal_fold or circuit_fold)"
            ))),
        }
    }
}

/// Everything one pipeline run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub rho: f64,
    pub alpha: f64,
    pub bits: u32,
    pub lambda_v: f64,
    pub freq_hz: f64,
    pub sample_rate_hz: f64,
    pub duration_s: f64,
    pub noise_sigma_v: f64,
    pub seed: u64,
    pub mode: FoldMode,
    pub hysteresis_v: f64,
    pub sim_step_s: f64,
    pub rc_s: f64,
    pub st_level_v: f64,
    pub rail_v: f64,
    pub window_len: usize,
    pub jump_threshold_v: f64,
    pub difference_order: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let mp = ModuloParams::default();
        let cp = CircuitParams::default();
        let rc = RecoveryConfig::for_lambda(mp.lambda_v);
        Self {
            rho: 1.0,
            alpha: 1.0,
            bits: 8,
            lambda_v: mp.lambda_v,
            freq_hz: 10.0,
            sample_rate_hz: 10_000.0,
            duration_s: 1.0,
            noise_sigma_v: 0.0,
            seed: 0,
            mode: FoldMode::Ideal,
            hysteresis_v: mp.hysteresis_v,
            sim_step_s: cp.sim_step_s,
            rc_s: cp.rc_s,
            st_level_v: cp.st_level_v,
            rail_v: cp.rail_v,
            window_len: rc.window_len,
            jump_threshold_v: rc.jump_threshold_v,
            difference_order: rc.difference_order,
        }
    }
}

/// Keys accepted by [`ExperimentConfig::set`], in echo order.
pub const CONFIG_KEYS: [&str; 18] = [
    "rho",
    "alpha",
    "bits",
    "lambda_v",
    "freq_hz",
    "sample_rate_hz",
    "duration_s",
    "noise_sigma_v",
    "seed",
    "mode",
    "hysteresis_v",
    "sim_step_s",
    "rc_s",
    "st_level_v",
    "rail_v",
    "window_len",
    "jump_threshold_v",
    "difference_order",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| invalid(format!("cannot parse `{value}` for key `{key}`")))
}

impl ExperimentConfig {
    pub fn modulo_params(&self) -> ModuloParams {
        ModuloParams {
            lambda_v: self.lambda_v,
            alpha: self.alpha,
            hysteresis_v: self.hysteresis_v,
        }
    }

    pub fn circuit_params(&self) -> CircuitParams {
        CircuitParams {
            rc_s: self.rc_s,
            st_level_v: self.st_level_v,
            sim_step_s: self.sim_step_s,
            rail_v: self.rail_v,
        }
    }

    pub fn recovery_config(&self) -> RecoveryConfig {
        RecoveryConfig {
            window_len: self.window_len,
            jump_threshold_v: self.jump_threshold_v,
            difference_order: self.difference_order,
        }
    }

    pub fn label(&self) -> String {
        format!("rho{}_alpha{}_b{}", self.rho, self.alpha, self.bits)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.rho.is_finite() && self.rho > 0.0, || {
            format!("rho must be positive, got {}", self.rho)
        })?;
        ensure(self.duration_s.is_finite() && self.duration_s > 0.0, || {
            format!("duration_s must be positive, got {}", self.duration_s)
        })?;
        ensure(self.noise_sigma_v.is_finite() && self.noise_sigma_v >= 0.0, || {
            format!("noise_sigma_v must be non-negative, got {}", self.noise_sigma_v)
        })?;
        ensure(self.freq_hz.is_finite() && self.freq_hz > 0.0, || {
            format!("freq_hz must be positive, got {}", self.freq_hz)
        })?;
        ensure(self.sample_rate_hz > 2.0 * self.freq_hz, || {
            format!(
                "sample_rate_hz {} must exceed twice freq_hz {}",
                self.sample_rate_hz, self.freq_hz
            )
        })?;
        self.modulo_params().validate()?;
        QuantizerConfig::new(self.bits, self.lambda_v)?;
        self.recovery_config().validate(self.lambda_v)?;
        if self.mode == FoldMode::Circuit {
            self.circuit_params().validate()?;
            ensure(self.sample_rate_hz * self.sim_step_s <= 1.0, || {
                "sample_rate_hz exceeds the simulation rate 1/sim_step_s".into()
            })?;
        }
        Ok(())
    }

    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "rho" => self.rho = parse(key, value)?,
            "alpha" => self.alpha = parse(key, value)?,
            "bits" => self.bits = parse(key, value)?,
            "lambda_v" => self.lambda_v = parse(key, value)?,
            "freq_hz" => self.freq_hz = parse(key, value)?,
            "sample_rate_hz" => self.sample_rate_hz = parse(key, value)?,
            "duration_s" => self.duration_s = parse(key, value)?,
            "noise_sigma_v" => self.noise_sigma_v = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "mode" => self.mode = value.trim().parse()?,
            "hysteresis_v" => self.hysteresis_v = parse(key, value)?,
            "sim_step_s" => self.sim_step_s = parse(key, value)?,
            "rc_s" => self.rc_s = parse(key, value)?,
            "st_level_v" => self.st_level_v = parse(key, value)?,
            "rail_v" => self.rail_v = parse(key, value)?,
            "window_len" => self.window_len = parse(key, value)?,
            "jump_threshold_v" => self.jump_threshold_v = parse(key, value)?,
            "difference_order" => self.difference_order = parse(key, value)?,
            other => return Err(invalid(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// `(key, value)` pairs in [`CONFIG_KEYS`] order; feeding them back through
    /// [`set`](Self::set) reproduces the config.
    pub fn entries(&self) -> Vec<(&'static str, String)> {
        let v = |x: f64| format!("{x:?}");
        vec![
            ("rho", v(self.rho)),
            ("alpha", v(self.alpha)),
            ("bits", self.bits.to_string()),
            ("lambda_v", v(self.lambda_v)),
            ("freq_hz", v(self.freq_hz)),
            ("sample_rate_hz", v(self.sample_rate_hz)),
            ("duration_s", v(self.duration_s)),
            ("noise_sigma_v", v(self.noise_sigma_v)),
            ("seed", self.seed.to_string()),
            ("mode", self.mode.to_string()),
            ("hysteresis_v", v(self.hysteresis_v)),
            ("sim_step_s", v(self.sim_step_s)),
            ("rc_s", v(self.rc_s)),
            ("st_level_v", v(self.st_level_v)),
            ("rail_v", v(self.rail_v)),
            ("window_len", self.window_len.to_string()),
            ("jump_threshold_v", v(self.jump_threshold_v)),
            ("difference_order", self.difference_order.to_string()),
        ]
    }
}

impl fmt::Display for ExperimentConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// One line of the performance table.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
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

/// Every intermediate waveform of a run, on the acquisition grid.
#[derive(Debug, Clone)]
pub struct PipelineTraces {
    /// `g`, including any added noise.
    pub input: SampledSignal,
    pub folded: SampledSignal,
    pub quantized: SampledSignal,
    pub corrected: SampledSignal,
    /// Modulo-branch output in input units.
    pub recovered: SampledSignal,
    /// Conventional-branch output in input units.
    pub conventional: SampledSignal,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub row: ExperimentRow,
    pub traces: PipelineTraces,
    pub correction: CorrectionReport,
}

fn stage<T>(name: &'static str, cfg: &ExperimentConfig, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::Stage {
        stage: name,
        config: cfg.to_string(),
        source: Box::new(e),
    })
}

pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineRun> {
    stage("config", cfg, cfg.validate())?;
    let mp = cfg.modulo_params();
    let lambda = cfg.lambda_v;

    let clean = stage(
        "signal",
        cfg,
        make_sine(lambda * cfg.rho, cfg.freq_hz, 0.0, cfg.duration_s, cfg.sample_rate_hz),
    )?;
    let input = stage("noise", cfg, add_noise(&clean, cfg.noise_sigma_v, cfg.seed))?;

    let conventional = stage("conventional", cfg, {
        QuantizerConfig::new(cfg.bits, lambda * cfg.rho * cfg.alpha)
            .and_then(|qc| quantize(&input.map(|g| cfg.alpha * g), &qc))
            .and_then(|q| rescale(&q, cfg.alpha))
    })?;

    let folded = stage("fold", cfg, match cfg.mode {
        FoldMode::Ideal => fold_signal(&input, &mp),
        FoldMode::Circuit => simulate(&input, &mp, &cfg.circuit_params()).and_then(|trace| {
            trace.check_rails()?;
            sample_trace(&trace, cfg.sample_rate_hz)
        }),
    })?;
    let quantized = stage(
        "quantize",
        cfg,
        QuantizerConfig::new(cfg.bits, lambda).and_then(|qc| quantize(&folded, &qc)),
    )?;

    let rc = cfg.recovery_config();
    let (corrected, correction) = match cfg.mode {
        FoldMode::Ideal => (quantized.clone(), CorrectionReport::default()),
        FoldMode::Circuit => stage("correct", cfg, correct_reset_samples(&quantized, lambda, &rc))?,
    };
    let unfolded = stage("unfold", cfg, unfold(&corrected, lambda, &rc))?;
    let recovered = stage("rescale", cfg, rescale(&unfolded.signal, cfg.alpha))?;

    let report = stage("metrics", cfg, compare(&conventional, &recovered, cfg.freq_hz, lambda))?;
    let row = ExperimentRow {
        label: cfg.label(),
        rho: cfg.rho,
        alpha: cfg.alpha,
        bits: cfg.bits,
        sinad_conv_db: report.sinad_conv_db,
        sinad_usf_db: report.sinad_usf_db,
        sinad_gain_db: report.sinad_gain_db,
        enob_conv: report.enob_conv_bits,
        enob_usf: report.enob_usf_bits,
    };
    Ok(PipelineRun {
        row,
        traces: PipelineTraces {
            input,
            folded,
            quantized,
            corrected,
            recovered,
            conventional,
        },
        correction,
    })
}

/// Runs independent configurations in parallel; rows come back in input order.
pub fn run_sweep(configs: &[ExperimentConfig]) -> Result<Vec<ExperimentRow>> {
    configs
        .par_iter()
        .map(|c| run_pipeline(c).map(|r| r.row))
        .collect()
}

pub const EXPERIMENT1_RHOS: [f64; 2] = [4.0, 8.0];
pub const EXPERIMENT1_BITS: [u32; 4] = [6, 8, 10, 12];
pub const EXPERIMENT2_ALPHAS: [f64; 6] = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
/// `(ρ, α)` of the eight rows of the performance table.
pub const TABLE1_SETTINGS: [(f64, f64); 8] = [
    (8.0, 8.0),
    (4.0, 1.0),
    (8.0, 1.0),
    (1.0, 1.0),
    (1.0, 4.0),
    (1.0, 8.0),
    (1.0, 16.0),
    (1.0, 32.0),
];

fn with(base: &ExperimentConfig, rho: f64, alpha: f64, bits: u32) -> ExperimentConfig {
    ExperimentConfig {
        rho,
        alpha,
        bits,
        ..base.clone()
    }
}

/// Amplitude sweep at unit modulo gain.
#[derive(Debug, Clone)]
pub struct Experiment1Report {
    pub rows: Vec<ExperimentRow>,
}

impl Experiment1Report {
    pub fn row(&self, rho: f64, bits: u32) -> Option<&ExperimentRow> {
        self.rows.iter().find(|r| r.rho == rho && r.bits == bits)
    }
}

/// Sweeps ρ over {4, 8} and B over {6, 8, 10, 12} at α = 1; other settings from `base`.
pub fn run_experiment1(base: &ExperimentConfig) -> Result<Experiment1Report> {
    let configs: Vec<_> = EXPERIMENT1_RHOS
        .iter()
        .flat_map(|&rho| EXPERIMENT1_BITS.iter().map(move |&b| (rho, b)))
        .map(|(rho, b)| with(base, rho, 1.0, b))
        .collect();
    Ok(Experiment1Report {
        rows: run_sweep(&configs)?,
    })
}

/// Modulo-gain sweep at ρ = 1.
#[derive(Debug, Clone)]
pub struct Experiment2Report {
    pub rows: Vec<ExperimentRow>,
    /// Least-squares slope of ENOB gain against log₂α.
    pub enob_gain_slope: f64,
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Sweeps α over {1, 2, 4, 8, 16, 32} at ρ = 1 with `base.bits`.
pub fn run_experiment2(base: &ExperimentConfig) -> Result<Experiment2Report> {
    let configs: Vec<_> = EXPERIMENT2_ALPHAS
        .iter()
        .map(|&a| with(base, 1.0, a, base.bits))
        .collect();
    let rows = run_sweep(&configs)?;
    let x: Vec<f64> = rows.iter().map(|r| r.alpha.log2()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.enob_usf - r.enob_conv).collect();
    Ok(Experiment2Report {
        enob_gain_slope: least_squares_slope(&x, &y),
        rows,
    })
}

/// The eight `(ρ, α)` settings of the performance table at `base.bits`.
pub fn run_table1(base: &ExperimentConfig) -> Result<Vec<ExperimentRow>> {
    let configs: Vec<_> = TABLE1_SETTINGS
        .iter()
        .map(|&(rho, alpha)| with(base, rho, alpha, base.bits))
        .collect();
    run_sweep(&configs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trips_through_entries() {
        let mut c = ExperimentConfig {
            rho: 3.5,
            alpha: 16.0,
            seed: 99,
            mode: FoldMode::Circuit,
            noise_sigma_v: 1e-3,
            ..Default::default()
        };
        c.sim_step_s = 2.5e-7;
        let mut d = ExperimentConfig::default();
        for (k, v) in c.entries() {
            d.set(k, &v).unwrap();
        }
        assert_eq!(c, d);
        assert_eq!(
            c.entries().iter().map(|e| e.0).collect::<Vec<_>>(),
            CONFIG_KEYS.to_vec()
        );
    }

    #[test]
    fn bad_keys_and_values() {
        let mut c = ExperimentConfig::default();
        assert!(c.set("nope", "1").is_err());
        assert!(c.set("bits", "eight").is_err());
        assert!(c.set("mode", "folded").is_err());
        c.rho = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let cfg = ExperimentConfig {
            mode: FoldMode::Circuit,
            rho: 8.0,
            alpha: 8.0,
            duration_s: 0.05,
            freq_hz: 200.0,
            ..Default::default()
        };
        match run_pipeline(&cfg) {
            Err(Error::Stage { stage, config, source }) => {
                assert_eq!(stage, "fold");
                assert!(config.contains("mode=circuit_fold"));
                assert!(matches!(*source, Error::RailSaturation { .. }));
            }
            other => panic!("expected a fold-stage failure, got {other:?}"),
        }
    }

    #[test]
    fn unit_gain_unit_range_is_break_even() {
        let r = run_pipeline(&ExperimentConfig::default()).unwrap();
        assert!(r.row.sinad_gain_db.abs() <= 1.5, "{:?}", r.row);
        assert_eq!(r.row.sinad_gain_db, r.row.sinad_usf_db - r.row.sinad_conv_db);
    }

    #[test]
    fn deterministic_with_noise() {
        let cfg = ExperimentConfig {
            rho: 4.0,
            noise_sigma_v: 0.01,
            seed: 3,
            ..Default::default()
        };
        let a = run_pipeline(&cfg).unwrap();
        let b = run_pipeline(&cfg).unwrap();
        assert_eq!(a.row, b.row);
        assert_eq!(a.traces.recovered, b.traces.recovered);
    }

    #[test]
    fn slope_of_exact_line() {
        assert!((least_squares_slope(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]) - 2.0).abs() < 1e-12);
    }
}

//! Simulation of an integrator-based modulo ADC: folding, a behavioural model of
//! the self-reset loop, quantization, HDR recovery, and SINAD/ENOB measurement.

pub mod circuit;
pub mod error;
pub mod experiment;
pub mod metrics;
pub mod modulo;
pub mod quant;
pub mod recovery;
pub mod signal;

pub use circuit::{sample_trace, simulate, st_update, CircuitParams, CircuitTrace, Polarity, StState};
pub use error::{Error, Result};
pub use experiment::{
    run_experiment1, run_experiment2, run_pipeline, run_table1, ExperimentConfig, ExperimentRow, FoldMode,
};
pub use metrics::{compare, dr_ratio, enob, sinad, MetricsReport};
pub use modulo::{fold_signal, modulo_map, residue_of, ModuloParams, ResidueSignal};
pub use quant::{quantization_step, quantize, QuantizerConfig};
pub use recovery::{
    correct_reset_samples, lattice_round, rescale, unfold, CorrectionReport, RecoveryConfig, Unfolded,
};
pub use signal::{add_noise, make_sinc, make_sine, SampledSignal};

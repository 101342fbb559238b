//! Uniform mid-rise quantizer with symmetric clipping.
//!
//! The conventional ADC and the back end of the modulo ADC use the same model;
//! only the full-scale range differs.

use crate::error::{ensure, Result};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerConfig {
    pub bits: u32,
    /// Input range is `[−full_scale_v, +full_scale_v]`.
    pub full_scale_v: f64,
}

impl QuantizerConfig {
    pub fn new(bits: u32, full_scale_v: f64) -> Result<Self> {
        let cfg = Self { bits, full_scale_v };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        ensure((1..=32).contains(&self.bits), || {
            format!("bit depth must be in [1, 32], got {}", self.bits)
        })?;
        ensure(self.full_scale_v.is_finite() && self.full_scale_v > 0.0, || {
            format!("full scale must be positive, got {}", self.full_scale_v)
        })
    }

    fn half_codes(&self) -> f64 {
        (1u64 << (self.bits - 1)) as f64
    }
}

/// LSB size `2·full_scale / 2^B`.
pub fn quantization_step(cfg: &QuantizerConfig) -> f64 {
    2.0 * cfg.full_scale_v / (1u64 << cfg.bits) as f64
}

#[inline]
fn quantize_value(v: f64, q: f64, half: f64) -> f64 {
    let code = ((v / q).floor() + 0.5).clamp(-half + 0.5, half - 0.5);
    code * q
}

/// Mid-rise quantization; inputs beyond full scale saturate at the extreme codes.
pub fn quantize(signal: &SampledSignal, cfg: &QuantizerConfig) -> Result<SampledSignal> {
    cfg.validate()?;
    let q = quantization_step(cfg);
    let half = cfg.half_codes();
    Ok(signal.map(|v| quantize_value(v, q, half)))
}

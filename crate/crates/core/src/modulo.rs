//! The centred modulo nonlinearity, its residue, and the modulo-gain identity
//! `α·M_{λ/α}(g) = M_λ(α·g)`.
//!
//! Output values live in the half-open interval `[−λ, λ)`: the fractional-part
//! form of the map sends `λ` itself to `−λ`.

use crate::error::{ensure, Result};
use crate::signal::SampledSignal;

/// Folding threshold, modulo gain and comparator hysteresis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModuloParams {
    /// λ, volts.
    pub lambda_v: f64,
    /// α ≥ 1, applied by the instrumentation amplifier before folding.
    pub alpha: f64,
    /// h, volts, in `[0, 2λ)`.
    pub hysteresis_v: f64,
}

impl ModuloParams {
    pub fn new(lambda_v: f64, alpha: f64, hysteresis_v: f64) -> Result<Self> {
        let p = Self {
            lambda_v,
            alpha,
            hysteresis_v,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_lambda(self.lambda_v)?;
        ensure(self.alpha.is_finite() && self.alpha >= 1.0, || {
            format!("modulo gain must be >= 1, got {}", self.alpha)
        })?;
        ensure(
            self.hysteresis_v.is_finite()
                && self.hysteresis_v >= 0.0
                && self.hysteresis_v < 2.0 * self.lambda_v,
            || {
                format!(
                    "hysteresis must lie in [0, 2λ) = [0, {}), got {}",
                    2.0 * self.lambda_v,
                    self.hysteresis_v
                )
            },
        )
    }
}

impl Default for ModuloParams {
    fn default() -> Self {
        Self {
            lambda_v: 1.0,
            alpha: 1.0,
            hysteresis_v: 0.02,
        }
    }
}

pub(crate) fn check_lambda(lambda_v: f64) -> Result<()> {
    ensure(lambda_v.is_finite() && lambda_v > 0.0, || {
        format!("folding threshold must be positive, got {lambda_v}")
    })
}

/// Per-sample fold counts `e_k` so that `α·g[k] = z[k] + 2λ·e_k`.
///
/// The intervals on which the residue is constant are the runs of equal counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidueSignal {
    pub fold_counts: Vec<i64>,
    pub lambda_v: f64,
}

impl ResidueSignal {
    pub fn value(&self, k: usize) -> f64 {
        2.0 * self.lambda_v * self.fold_counts[k] as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.fold_counts.len()).map(|k| self.value(k)).collect()
    }

    /// Sample indices at which the count changes (first index of each new run).
    pub fn fold_events(&self) -> Vec<usize> {
        self.fold_counts
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[0] != w[1])
            .map(|(k, _)| k + 1)
            .collect()
    }

    pub fn max_abs_count(&self) -> i64 {
        self.fold_counts.iter().map(|c| c.abs()).max().unwrap_or(0)
    }
}

/// Centred modulo, `2λ·(frac(v/2λ + 1/2) − 1/2)`.
///
/// Evaluated as `v − 2λ·⌊v/2λ + 1/2⌋` (algebraically the same) so that the
/// subtracted part is a lattice point, and values already in `[−λ, λ)` are
/// returned untouched.
pub fn modulo_map(value_v: f64, lambda_v: f64) -> Result<f64> {
    ensure(value_v.is_finite(), || format!("cannot fold non-finite value {value_v}"))?;
    check_lambda(lambda_v)?;
    Ok(fold_unchecked(value_v, lambda_v))
}

#[inline]
pub(crate) fn fold_unchecked(v: f64, lambda: f64) -> f64 {
    if v >= -lambda && v < lambda {
        return v;
    }
    let period = 2.0 * lambda;
    let k = (v / period + 0.5).floor();
    let mut r = v - period * k;
    // Round-off near the discontinuities can land one period off.
    if r >= lambda {
        r -= period;
    } else if r < -lambda {
        r += period;
    }
    r
}

/// `z[k] = M_λ(α·g[k])`.
pub fn fold_signal(signal: &SampledSignal, params: &ModuloParams) -> Result<SampledSignal> {
    params.validate()?;
    ensure(signal.values.iter().all(|v| v.is_finite()), || {
        "signal contains non-finite samples".into()
    })?;
    Ok(signal.map(|g| fold_unchecked(params.alpha * g, params.lambda_v)))
}

/// Residue of the folding decomposition `α·g = z + ε`.
pub fn residue_of(signal: &SampledSignal, params: &ModuloParams) -> Result<ResidueSignal> {
    let folded = fold_signal(signal, params)?;
    let period = 2.0 * params.lambda_v;
    let fold_counts = signal
        .values
        .iter()
        .zip(&folded.values)
        .map(|(&g, &z)| ((params.alpha * g - z) / period).round() as i64)
        .collect();
    Ok(ResidueSignal {
        fold_counts,
        lambda_v: params.lambda_v,
    })
}

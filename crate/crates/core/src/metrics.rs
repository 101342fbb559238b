//! SINAD by known-frequency sine fit, ENOB, and the dynamic-range ratio ρ.

use std::f64::consts::PI;

use crate::error::{ensure, Result};
use crate::modulo::check_lambda;
use crate::signal::SampledSignal;

/// SINAD values at or above this are reported as `+∞`; the residual is then at
/// floating-point round-off level.
pub const SINAD_CEILING_DB: f64 = 240.0;

/// `a·sin(2πft) + b·cos(2πft) + c` fitted in the least-squares sense.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineFit {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    /// `(a² + b²)/2`
    pub fit_power: f64,
    /// Mean squared residual.
    pub residual_power: f64,
}

impl SineFit {
    pub fn amplitude(&self) -> f64 {
        self.a.hypot(self.b)
    }
}

fn solve3(mut m: [[f64; 4]; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, pivot);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            for k in col..4 {
                m[row][k] -= f * m[col][k];
            }
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (m[row][3] - tail) / m[row][row];
    }
    x
}

/// Three-parameter sine fit at a known frequency.
pub fn fit_sine(measured: &SampledSignal, freq_hz: f64) -> Result<SineFit> {
    ensure(freq_hz.is_finite() && freq_hz > 0.0, || {
        format!("frequency must be positive, got {freq_hz}")
    })?;
    let periods = measured.len() as f64 * freq_hz / measured.sample_rate_hz;
    ensure(periods >= 10.0 - 1e-9, || {
        format!("record holds {periods:.3} periods of {freq_hz} Hz; at least 10 are needed")
    })?;
    ensure(measured.values.iter().all(|v| v.is_finite()), || {
        "measured signal contains non-finite samples".into()
    })?;

    let w = 2.0 * PI * freq_hz;
    let basis: Vec<[f64; 3]> = measured
        .times()
        .map(|t| {
            let (s, c) = (w * t).sin_cos();
            [s, c, 1.0]
        })
        .collect();

    let mut normal = [[0.0f64; 4]; 3];
    for (row, &y) in basis.iter().zip(&measured.values) {
        for i in 0..3 {
            for j in 0..3 {
                normal[i][j] += row[i] * row[j];
            }
            normal[i][3] += row[i] * y;
        }
    }
    let [a, b, c] = solve3(normal);

    let n = measured.len() as f64;
    let residual_power = basis
        .iter()
        .zip(&measured.values)
        .map(|(r, &y)| {
            let e = y - (a * r[0] + b * r[1] + c);
            e * e
        })
        .sum::<f64>()
        / n;
    Ok(SineFit {
        a,
        b,
        c,
        fit_power: 0.5 * (a * a + b * b),
        residual_power,
    })
}

/// Signal-to-noise-and-distortion ratio in dB against the fitted sine.
pub fn sinad(measured: &SampledSignal, freq_hz: f64) -> Result<f64> {
    let fit = fit_sine(measured, freq_hz)?;
    if fit.residual_power <= fit.fit_power * 10f64.powf(-SINAD_CEILING_DB / 10.0) {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (fit.fit_power / fit.residual_power).log10())
}

/// Effective number of bits, `(SINAD − 1.76)/6.02`.
pub fn enob(sinad_db: f64) -> f64 {
    (sinad_db - 1.76) / 6.02
}

/// ρ = (max − min) / 2λ.
pub fn dr_ratio(signal: &SampledSignal, lambda_v: f64) -> Result<f64> {
    check_lambda(lambda_v)?;
    signal.ensure_non_empty("signal")?;
    let (lo, hi) = signal
        .values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok((hi - lo) / (2.0 * lambda_v))
}

/// Conventional-versus-modulo comparison, one row of the performance table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsReport {
    pub sinad_conv_db: f64,
    pub sinad_usf_db: f64,
    pub enob_conv_bits: f64,
    pub enob_usf_bits: f64,
    /// ρ of the recovered HDR signal.
    pub rho: f64,
    /// `sinad_usf_db − sinad_conv_db`
    pub sinad_gain_db: f64,
}

pub fn sinad_gain(sinad_conv_db: f64, sinad_usf_db: f64) -> f64 {
    if sinad_conv_db == sinad_usf_db {
        0.0
    } else {
        sinad_usf_db - sinad_conv_db
    }
}

pub fn compare(
    conventional: &SampledSignal,
    usf_recovered: &SampledSignal,
    freq_hz: f64,
    lambda_v: f64,
) -> Result<MetricsReport> {
    let sinad_conv_db = sinad(conventional, freq_hz)?;
    let sinad_usf_db = sinad(usf_recovered, freq_hz)?;
    Ok(MetricsReport {
        sinad_conv_db,
        sinad_usf_db,
        enob_conv_bits: enob(sinad_conv_db),
        enob_usf_bits: enob(sinad_usf_db),
        rho: dr_ratio(usf_recovered, lambda_v)?,
        sinad_gain_db: sinad_gain(sinad_conv_db, sinad_usf_db),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quant::{quantize, QuantizerConfig};
    use crate::signal::{add_noise, make_sine};
    use approx::assert_abs_diff_eq;

    #[test]
    fn pure_sine_is_infinite() {
        let s = make_sine(1.0, 10.0, 0.3, 1.0, 10_000.0).unwrap();
        assert_eq!(sinad(&s, 10.0).unwrap(), f64::INFINITY);
        assert_eq!(enob(f64::INFINITY), f64::INFINITY);
    }

    #[test]
    fn short_record_rejected() {
        let s = make_sine(1.0, 10.0, 0.0, 0.5, 10_000.0).unwrap();
        assert!(sinad(&s, 10.0).is_err());
        assert!(sinad(&s, 0.0).is_err());
    }

    #[test]
    fn fit_recovers_parameters() {
        let s = make_sine(2.5, 10.0, 0.7, 1.0, 10_000.0).unwrap().map(|v| v + 0.3);
        let f = fit_sine(&s, 10.0).unwrap();
        assert_abs_diff_eq!(f.amplitude(), 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(f.c, 0.3, epsilon = 1e-9);
        assert_abs_diff_eq!(f.b.atan2(f.a), 0.7, epsilon = 1e-9);
    }

    #[test]
    fn ideal_8bit_quantizer() {
        let cfg = QuantizerConfig::new(8, 1.0).unwrap();
        let s = make_sine(1.0, 10.0, 0.1, 1.0, 10_000.0).unwrap();
        let db = sinad(&quantize(&s, &cfg).unwrap(), 10.0).unwrap();
        assert!((db - 49.92).abs() <= 0.5, "{db}");
    }

    #[test]
    fn sine_in_white_noise() {
        let (a, sigma) = (1.0, 0.05);
        let s = make_sine(a, 10.0, 0.0, 1.0, 100_000.0).unwrap();
        let expected = 10.0 * (a * a / (2.0 * sigma * sigma)).log10();
        for seed in 0..3 {
            let db = sinad(&add_noise(&s, sigma, seed).unwrap(), 10.0).unwrap();
            assert!((db - expected).abs() <= 0.3, "{db} vs {expected}");
        }
    }

    #[test]
    fn phase_offset_and_scale_invariance() {
        let base = make_sine(1.0, 10.0, 0.0, 1.0, 10_000.0).unwrap();
        let noisy = add_noise(&base, 0.01, 5).unwrap();
        let ref_db = sinad(&noisy, 10.0).unwrap();

        let shifted = make_sine(1.0, 10.0, 1.1, 1.0, 10_000.0).unwrap();
        let noise: Vec<f64> = noisy.values.iter().zip(&base.values).map(|(a, b)| a - b).collect();
        let moved = shifted.with_values(
            shifted.values.iter().zip(&noise).map(|(s, n)| s + n + 2.0).collect(),
        );
        assert_abs_diff_eq!(sinad(&moved, 10.0).unwrap(), ref_db, epsilon = 0.05);

        for c in [-3.0, 0.01, 250.0] {
            assert_abs_diff_eq!(sinad(&noisy.map(|v| c * v), 10.0).unwrap(), ref_db, epsilon = 1e-6);
        }
    }

    #[test]
    fn enob_values() {
        assert_abs_diff_eq!(enob(56.85), 9.15, epsilon = 0.01);
        assert_eq!(enob(1.76), 0.0);
        assert_abs_diff_eq!(enob(49.92), 8.0, epsilon = 1e-12);
        assert!(enob(30.0) < enob(30.0 + 1e-9));
    }

    #[test]
    fn dr_ratio_values() {
        // 16 V swing (±8 V) with λ = 1 gives ρ = 8; a 16 V-peak sine spans 32 V.
        let s = make_sine(8.0, 10.0, 0.0, 0.1, 1000.0).unwrap();
        assert_abs_diff_eq!(dr_ratio(&s, 1.0).unwrap(), 8.0, epsilon = 1e-9);
        let s = make_sine(16.0, 10.0, 0.0, 0.1, 1000.0).unwrap();
        assert_abs_diff_eq!(dr_ratio(&s, 1.0).unwrap(), 16.0, epsilon = 1e-9);
        let flat = SampledSignal::new(10.0, 0.0, vec![3.0; 10]).unwrap();
        assert_eq!(dr_ratio(&flat, 1.0).unwrap(), 0.0);
        let s = make_sine(1.0, 10.0, 0.0, 0.1, 1000.0).unwrap();
        assert_abs_diff_eq!(dr_ratio(&s, 1.0).unwrap(), 1.0, epsilon = 1e-9);
        assert!(dr_ratio(&s, 0.0).is_err());
    }

    #[test]
    fn compare_gain() {
        let cfg = QuantizerConfig::new(8, 1.0).unwrap();
        let s = quantize(&make_sine(1.0, 10.0, 0.1, 1.0, 10_000.0).unwrap(), &cfg).unwrap();
        let r = compare(&s, &s, 10.0, 1.0).unwrap();
        assert_eq!(r.sinad_gain_db, 0.0);
        assert_eq!(r.enob_conv_bits, r.enob_usf_bits);
        assert_abs_diff_eq!(sinad_gain(25.0, 56.85), 31.85, epsilon = 1e-12);
        let pure = make_sine(1.0, 10.0, 0.1, 1.0, 10_000.0).unwrap();
        assert_eq!(compare(&pure, &pure, 10.0, 1.0).unwrap().sinad_gain_db, 0.0);
    }
}

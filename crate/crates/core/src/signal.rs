//! Uniformly sampled waveforms and the test-signal generators.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::f64::consts::PI;

use crate::error::{ensure, Result};

/// A real-valued waveform on the grid `t0_s + k / sample_rate_hz`, in volts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    pub sample_rate_hz: f64,
    pub t0_s: f64,
    pub values: Vec<f64>,
}

impl SampledSignal {
    pub fn new(sample_rate_hz: f64, t0_s: f64, values: Vec<f64>) -> Result<Self> {
        ensure(sample_rate_hz.is_finite() && sample_rate_hz > 0.0, || {
            format!("sample rate must be positive, got {sample_rate_hz}")
        })?;
        ensure(t0_s.is_finite(), || format!("start time must be finite, got {t0_s}"))?;
        Ok(Self {
            sample_rate_hz,
            t0_s,
            values,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0_s + k as f64 / self.sample_rate_hz
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|k| self.time(k))
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.sample_rate_hz
    }

    /// Same grid, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self {
            sample_rate_hz: self.sample_rate_hz,
            t0_s: self.t0_s,
            values,
        }
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub(crate) fn ensure_non_empty(&self, what: &str) -> Result<()> {
        ensure(!self.is_empty(), || format!("{what} is empty"))
    }
}

/// Number of grid points in `duration_s`, rounded down.
///
/// The product is nudged up by 4 ulp first so that durations which are exact
/// multiples of the sample period in decimal (0.29 s at 100 Hz) are not lost to
/// representation error.
pub fn grid_len(duration_s: f64, sample_rate_hz: f64) -> usize {
    (duration_s * sample_rate_hz * (1.0 + 4.0 * f64::EPSILON)).floor() as usize
}

fn check_grid(duration_s: f64, sample_rate_hz: f64) -> Result<()> {
    ensure(sample_rate_hz.is_finite() && sample_rate_hz > 0.0, || {
        format!("sample rate must be positive, got {sample_rate_hz}")
    })?;
    ensure(duration_s.is_finite() && duration_s > 0.0, || {
        format!("duration must be positive, got {duration_s}")
    })
}

/// `amplitude_v * sin(2π f t + phase)` starting at t = 0.
pub fn make_sine(
    amplitude_v: f64,
    freq_hz: f64,
    phase_rad: f64,
    duration_s: f64,
    sample_rate_hz: f64,
) -> Result<SampledSignal> {
    check_grid(duration_s, sample_rate_hz)?;
    ensure(amplitude_v.is_finite() && amplitude_v >= 0.0, || {
        format!("amplitude must be non-negative, got {amplitude_v}")
    })?;
    ensure(freq_hz.is_finite() && freq_hz > 0.0, || {
        format!("frequency must be positive, got {freq_hz}")
    })?;
    ensure(phase_rad.is_finite(), || "phase must be finite".into())?;
    ensure(sample_rate_hz > 2.0 * freq_hz, || {
        format!("sample rate {sample_rate_hz} Hz does not exceed twice the tone frequency {freq_hz} Hz")
    })?;

    let n = grid_len(duration_s, sample_rate_hz);
    let w = 2.0 * PI * freq_hz;
    let values = (0..n)
        .map(|k| amplitude_v * (w * k as f64 / sample_rate_hz + phase_rad).sin())
        .collect();
    SampledSignal::new(sample_rate_hz, 0.0, values)
}

/// Normalised sinc, `sin(πx)/(πx)` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x == 0.0 {
        1.0
    } else {
        let px = PI * x;
        px.sin() / px
    }
}

/// Band-limited pulse `A·sinc(2·bandwidth·(t − t_c))` centred on grid sample `n/2`.
///
/// `A` is set so that max − min over the generated samples equals `peak_to_peak_v`.
pub fn make_sinc(
    peak_to_peak_v: f64,
    bandwidth_hz: f64,
    duration_s: f64,
    sample_rate_hz: f64,
) -> Result<SampledSignal> {
    check_grid(duration_s, sample_rate_hz)?;
    ensure(peak_to_peak_v.is_finite() && peak_to_peak_v > 0.0, || {
        format!("peak-to-peak voltage must be positive, got {peak_to_peak_v}")
    })?;
    ensure(bandwidth_hz.is_finite() && bandwidth_hz > 0.0, || {
        format!("bandwidth must be positive, got {bandwidth_hz}")
    })?;
    ensure(sample_rate_hz > 2.0 * bandwidth_hz, || {
        format!("sample rate {sample_rate_hz} Hz does not exceed twice the bandwidth {bandwidth_hz} Hz")
    })?;

    let n = grid_len(duration_s, sample_rate_hz);
    ensure(n >= 2, || "record too short for a sinc pulse".into())?;
    let center = (n / 2) as f64;
    let unit: Vec<f64> = (0..n)
        .map(|k| sinc(2.0 * bandwidth_hz * (k as f64 - center) / sample_rate_hz))
        .collect();
    let (lo, hi) = unit
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = peak_to_peak_v / (hi - lo);
    SampledSignal::new(sample_rate_hz, 0.0, unit.iter().map(|v| v * scale).collect())
}

/// Adds i.i.d. Gaussian noise of standard deviation `sigma_v`.
///
/// The stream comes from `ChaCha8Rng::seed_from_u64(seed)` mapped through the
/// ziggurat `StandardNormal` of `rand_distr`, so a given seed reproduces bit for bit.
pub fn add_noise(signal: &SampledSignal, sigma_v: f64, seed: u64) -> Result<SampledSignal> {
    ensure(sigma_v.is_finite() && sigma_v >= 0.0, || {
        format!("noise sigma must be non-negative, got {sigma_v}")
    })?;
    if sigma_v == 0.0 {
        return Ok(signal.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(signal.map(|v| {
        let n: f64 = StandardNormal.sample(&mut rng);
        v + sigma_v * n
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sine_on_quarter_period_grid() {
        let s = make_sine(1.0, 10.0, 0.0, 0.4, 40.0).unwrap();
        assert_eq!(s.len(), 16);
        for (k, expected) in [0.0, 1.0, 0.0, -1.0].iter().cycle().take(16).enumerate() {
            assert_abs_diff_eq!(s.values[k], *expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn sine_protocol_amplitude() {
        // g(t) = 2λρ sin(20πt) with λ = 1, ρ = 8
        let s = make_sine(2.0 * 1.0 * 8.0, 10.0, 0.0, 0.1, 10_000.0).unwrap();
        let peak = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert_abs_diff_eq!(peak, 16.0, epsilon = 1e-9);
        assert!(s.values.iter().all(|v| v.abs() <= 16.0));
    }

    #[test]
    fn zero_amplitude_sine() {
        let s = make_sine(0.0, 10.0, 0.3, 0.5, 100.0).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn length_uses_floor() {
        assert_eq!(grid_len(0.29, 100.0), 29);
        assert_eq!(grid_len(0.295, 100.0), 29);
        assert_eq!(grid_len(1.0, 10_000.0), 10_000);
    }

    #[test]
    fn generator_argument_errors() {
        assert!(make_sine(1.0, 10.0, 0.0, 0.0, 100.0).is_err());
        assert!(make_sine(1.0, 10.0, 0.0, 1.0, -1.0).is_err());
        assert!(make_sine(1.0, 10.0, 0.0, 1.0, 20.0).is_err());
        assert!(make_sine(-1.0, 10.0, 0.0, 1.0, 100.0).is_err());
        assert!(make_sinc(16.0, 10.0, 1.0, 15.0).is_err());
        assert!(make_sinc(0.0, 10.0, 1.0, 100.0).is_err());
    }

    #[test]
    fn sinc_peak_at_center() {
        let s = make_sinc(16.0, 20.0, 1.0, 1000.0).unwrap();
        let c = s.len() / 2;
        let max = s.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(s.values[c], max);
    }

    #[test]
    fn sinc_peak_to_peak_16v() {
        let s = make_sinc(16.0, 20.0, 1.0, 1000.0).unwrap();
        let (lo, hi) = extrema(&s.values);
        assert!((hi - lo - 16.0).abs() <= 0.16);
    }

    #[test]
    fn sinc_peak_to_peak_matches_closed_form_scan() {
        // Oracle: evaluate sin(πx)/(πx) directly on the grid, scan extrema, and
        // compare the scaled swing against the requested 2 V.
        for &bw in &[3.0, 17.0, 40.0, 90.0] {
            let fs = 1000.0;
            let n = 2000usize;
            let s = make_sinc(2.0, bw, n as f64 / fs, fs).unwrap();
            let c = (n / 2) as f64;
            let raw: Vec<f64> = (0..n)
                .map(|k| {
                    let x = 2.0 * bw * (k as f64 - c) / fs;
                    if x == 0.0 { 1.0 } else { (PI * x).sin() / (PI * x) }
                })
                .collect();
            let (rlo, rhi) = extrema(&raw);
            let a = s.values[n / 2];
            assert!(((rhi - rlo) * a - 2.0).abs() <= 0.02);
            let (lo, hi) = extrema(&s.values);
            assert!((hi - lo - 2.0).abs() <= 0.02, "bw {bw}: {}", hi - lo);
        }
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = make_sine(1.0, 10.0, 0.0, 1.0, 1000.0).unwrap();
        assert_eq!(add_noise(&s, 0.0, 7).unwrap(), s);
        assert!(add_noise(&s, -0.1, 7).is_err());
    }

    #[test]
    fn noise_is_seeded() {
        let s = make_sine(1.0, 10.0, 0.0, 1.0, 1000.0).unwrap();
        let a = add_noise(&s, 0.1, 42).unwrap();
        let b = add_noise(&s, 0.1, 42).unwrap();
        let c = add_noise(&s, 0.1, 43).unwrap();
        assert_eq!(a.values, b.values);
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn noise_standard_deviation() {
        let zero = SampledSignal::new(1.0e6, 0.0, vec![0.0; 1_000_000]).unwrap();
        let noisy = add_noise(&zero, 0.01, 1).unwrap();
        let n = noisy.len() as f64;
        let mean = noisy.values.iter().sum::<f64>() / n;
        let var = noisy.values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        assert!((0.0099..=0.0101).contains(&std), "std = {std}");
    }

    #[test]
    fn grid_is_uniform() {
        let s = make_sine(1.0, 3.0, 0.0, 2.0, 977.0).unwrap();
        let dt = 1.0 / 977.0;
        for k in 1..s.len() {
            assert_abs_diff_eq!(s.time(k) - s.time(k - 1), dt, epsilon = 1e-12);
        }
    }

    fn extrema(v: &[f64]) -> (f64, f64) {
        v.iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
    }
}

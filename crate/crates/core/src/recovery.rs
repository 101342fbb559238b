//! HDR reconstruction from folded samples.
//!
//! Two stages: reset-sample correction replaces samples captured mid-fold by a
//! local line fit, then unfolding recovers the residue from wrapped finite
//! differences rounded onto the `2λℤ` lattice and integrates it back.

use std::collections::BTreeSet;

use crate::error::{ensure, Error, Result};
use crate::modulo::{check_lambda, fold_unchecked};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecoveryConfig {
    /// Sliding-window length W (odd, ≥ 3).
    pub window_len: usize,
    /// τ: a window whose max − min exceeds this contains a fold.
    pub jump_threshold_v: f64,
    /// Finite-difference order N used by [`unfold`].
    pub difference_order: usize,
}

impl RecoveryConfig {
    /// W = 9, τ = λ, N = 1.
    pub fn for_lambda(lambda_v: f64) -> Self {
        Self {
            window_len: 9,
            jump_threshold_v: lambda_v,
            difference_order: 1,
        }
    }

    pub fn validate(&self, lambda_v: f64) -> Result<()> {
        check_lambda(lambda_v)?;
        ensure(self.window_len >= 3 && self.window_len % 2 == 1, || {
            format!("window length must be odd and >= 3, got {}", self.window_len)
        })?;
        ensure(
            self.jump_threshold_v > 0.0 && self.jump_threshold_v < 2.0 * lambda_v,
            || {
                format!(
                    "jump threshold must lie in (0, 2λ) = (0, {}), got {}",
                    2.0 * lambda_v,
                    self.jump_threshold_v
                )
            },
        )?;
        ensure(self.difference_order >= 1, || "difference order must be >= 1".into())
    }
}

/// Edits made by [`correct_reset_samples`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrectionReport {
    pub corrected_indices: Vec<usize>,
    pub replacement_values: Vec<f64>,
    /// Detected folds, as the index `k` of the largest difference `y[k+1] − y[k]`.
    pub jumps: Vec<usize>,
}

/// A monotone run of fast same-sign differences from sample `a` to sample `b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Transition {
    a: usize,
    b: usize,
    seed: usize,
}

fn find_transitions(y: &[f64], half: usize, tau: f64) -> Vec<Transition> {
    let n = y.len();
    let d: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let fast = tau / 4.0;
    let mut found = BTreeSet::new();

    for c in 0..n {
        let lo = c.saturating_sub(half);
        let hi = (c + half).min(n - 1);
        let (min, max) = y[lo..=hi]
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        if max - min <= tau {
            continue;
        }
        let seed = (lo..hi)
            .max_by(|&i, &j| d[i].abs().total_cmp(&d[j].abs()))
            .expect("window spans at least two samples");
        let sign = d[seed].signum();
        let same = |i: usize| d[i].signum() == sign && d[i].abs() > fast;
        let mut a = seed;
        while a > lo && same(a - 1) {
            a -= 1;
        }
        let mut b = seed + 1;
        while b < hi && same(b) {
            b += 1;
        }
        // A sample caught just after a fold starts (or just before it ends) moves
        // by less than the fast threshold but still stands out from the local slope.
        let mut rest: Vec<f64> = (lo..hi).filter(|&i| i < a || i >= b).map(|i| d[i]).collect();
        let base = median(&mut rest);
        let mut dev: Vec<f64> = rest.iter().map(|v| (v - base).abs()).collect();
        let edge = (tau / 64.0).max(6.0 * median(&mut dev));
        let lead = |i: usize| d[i].signum() == sign && (d[i] - base).abs() > edge;
        while a > lo && lead(a - 1) {
            a -= 1;
        }
        while b < hi && lead(b) {
            b += 1;
        }
        if (y[b] - y[a]).abs() > tau {
            found.insert(Transition { a, b, seed });
        }
    }
    found.into_iter().collect()
}

fn median(v: &mut [f64]) -> f64 {
    if v.is_empty() {
        return 0.0;
    }
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

fn strictly_between(v: f64, p: f64, q: f64) -> bool {
    v > p.min(q) && v < p.max(q)
}

/// Least-squares line through `(x, y)` evaluated at `at`. A single point gives a constant.
fn line_predict(points: &[(f64, f64)], at: f64) -> f64 {
    let n = points.len() as f64;
    let (sx, sy) = points.iter().fold((0.0, 0.0), |(a, b), p| (a + p.0, b + p.1));
    let (mx, my) = (sx / n, sy / n);
    if points.len() < 2 {
        return my;
    }
    let (sxy, sxx) = points.iter().fold((0.0, 0.0), |(a, b), &(x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    my + (sxy / sxx) * (at - mx)
}

/// Replaces samples captured while a fold was in progress.
///
/// A centred window of length W is slid over the record. Where its max − min
/// exceeds τ, the fold inside it is located as the run of fast same-sign
/// differences around the largest one. Interior samples of that run lying
/// strictly between its two end values are marked, and each marked run is
/// replaced by a line fitted to the unmarked samples on the pre-fold side of
/// its window (post-fold side near the record start), re-folded into `[−λ, λ)`.
pub fn correct_reset_samples(
    samples: &SampledSignal,
    lambda_v: f64,
    cfg: &RecoveryConfig,
) -> Result<(SampledSignal, CorrectionReport)> {
    cfg.validate(lambda_v)?;
    let n = samples.len();
    ensure(n >= cfg.window_len, || {
        format!("window of {} samples is longer than the {n}-sample record", cfg.window_len)
    })?;
    let y = &samples.values;
    let half = cfg.window_len / 2;
    let transitions = find_transitions(y, half, cfg.jump_threshold_v);

    let mut marked = vec![false; n];
    for t in &transitions {
        for k in t.a + 1..t.b {
            let near = k.abs_diff(t.seed).min(k.abs_diff(t.seed + 1)) <= half;
            if near && strictly_between(y[k], y[t.a], y[t.b]) {
                marked[k] = true;
            }
        }
    }
    let count = marked.iter().filter(|&&m| m).count();
    if 2 * count > n {
        return Err(Error::DegenerateInput {
            marked: count,
            total: n,
        });
    }

    // First post-fold sample of every transition: a segment starts there.
    let segment_starts: BTreeSet<usize> = transitions.iter().map(|t| t.b).collect();
    let segment_ends: BTreeSet<usize> = transitions.iter().map(|t| t.a).collect();

    let mut out = y.clone();
    let mut report = CorrectionReport {
        jumps: {
            let mut j: Vec<usize> = transitions.iter().map(|t| t.seed).collect();
            j.dedup();
            j
        },
        ..Default::default()
    };

    let mut k = 0;
    while k < n {
        if !marked[k] {
            k += 1;
            continue;
        }
        let r0 = k;
        while k < n && marked[k] {
            k += 1;
        }
        let r1 = k - 1;
        let center = (r0 + r1) / 2;
        let lo = center.saturating_sub(half);
        let hi = (center + half).min(n - 1);

        let mut pre = Vec::new();
        if r0 > 0 {
            let mut i = r0 - 1;
            loop {
                if !marked[i] {
                    pre.push((i as f64, y[i]));
                }
                if i == lo || segment_starts.contains(&i) {
                    break;
                }
                i -= 1;
            }
        }
        let mut post = Vec::new();
        let mut i = r1 + 1;
        while i <= hi {
            if !marked[i] {
                post.push((i as f64, y[i]));
            }
            if segment_ends.contains(&i) {
                break;
            }
            i += 1;
        }
        let basis = if pre.len() >= 2 || post.is_empty() { &pre } else { &post };
        if basis.is_empty() {
            continue;
        }
        for (idx, slot) in out.iter_mut().enumerate().take(r1 + 1).skip(r0) {
            let v = fold_unchecked(line_predict(basis, idx as f64), lambda_v);
            *slot = v;
            report.corrected_indices.push(idx);
            report.replacement_values.push(v);
        }
    }
    Ok((samples.with_values(out), report))
}

fn lattice_count(value_v: f64, lambda_v: f64) -> i64 {
    let x = value_v / (2.0 * lambda_v);
    let t = x.trunc();
    if (x - t).abs() == 0.5 {
        t as i64
    } else {
        x.round() as i64
    }
}

/// Nearest multiple of `2λ`; exact ties go toward zero.
pub fn lattice_round(value_v: f64, lambda_v: f64) -> f64 {
    2.0 * lambda_v * lattice_count(value_v, lambda_v) as f64
}

/// Output of [`unfold`].
#[derive(Debug, Clone, PartialEq)]
pub struct Unfolded {
    pub signal: SampledSignal,
    /// Difference indices whose wrapped value came within λ/2 of the ±λ
    /// ambiguity: a sign of undersampling or an uncorrected reset sample.
    pub unreliable: Vec<usize>,
}

fn difference(v: &[f64]) -> Vec<f64> {
    v.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Recovers `α·g` (up to the residue at the first sample, taken as zero).
///
/// With `N` = `difference_order`, the N-th difference of the samples is
/// wrapped into `[−λ, λ)`; the gap between wrapped and raw differences is
/// rounded onto `2λℤ` and summed back N times with zero initial conditions.
pub fn unfold(samples: &SampledSignal, lambda_v: f64, cfg: &RecoveryConfig) -> Result<Unfolded> {
    cfg.validate(lambda_v)?;
    samples.ensure_non_empty("folded samples")?;
    ensure(samples.values.iter().all(|v| v.is_finite()), || {
        "folded samples contain non-finite values".into()
    })?;
    let y = &samples.values;
    let order = cfg.difference_order;
    if y.len() <= order {
        return Ok(Unfolded {
            signal: samples.clone(),
            unreliable: Vec::new(),
        });
    }

    let mut d = y.clone();
    for _ in 0..order {
        d = difference(&d);
    }

    let mut unreliable = Vec::new();
    let mut counts: Vec<i64> = d
        .iter()
        .enumerate()
        .map(|(k, &dk)| {
            let wrapped = fold_unchecked(dk, lambda_v);
            if wrapped.abs() > 0.5 * lambda_v {
                unreliable.push(k);
            }
            lattice_count(wrapped - dk, lambda_v)
        })
        .collect();

    for _ in 0..order {
        let mut acc = 0i64;
        let mut next = Vec::with_capacity(counts.len() + 1);
        next.push(0);
        for c in &counts {
            acc += c;
            next.push(acc);
        }
        counts = next;
    }

    let period = 2.0 * lambda_v;
    let values = y
        .iter()
        .zip(&counts)
        .map(|(&v, &c)| v + period * c as f64)
        .collect();
    Ok(Unfolded {
        signal: samples.with_values(values),
        unreliable,
    })
}

/// Divides by the modulo gain to return to input units.
pub fn rescale(samples: &SampledSignal, alpha: f64) -> Result<SampledSignal> {
    ensure(alpha.is_finite() && alpha >= 1.0, || {
        format!("modulo gain must be >= 1, got {alpha}")
    })?;
    Ok(samples.map(|v| v / alpha))
}

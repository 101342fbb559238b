//! Behavioural time-domain model of the integrator-based folding front end.
//!
//! The instrumentation amplifier forms `z = α·g − ε`. Two Schmitt triggers watch
//! `z`: ST⁺ drives the integrator upward while `z` is above its set point and
//! ST⁻ drives it downward below its mirror. The integrator output `ε` therefore
//! moves in ramps of slope `±V_H/RC` and `z` is pulled back into the linear
//! region after every excursion. The hardware integrator is inverting; its sign
//! is folded into the trigger polarity so that `ε` rises during a positive fold.
//!
//! Comparator placement: the triggers are driven with a set level of `λ + h/2`
//! and release at `∓(λ − h/2)`. The distance from set to release is then
//! exactly `2λ`, so each fold moves `ε` by one lattice period, and the release
//! point of one trigger sits `h` inside the set point of the other.

use crate::error::{ensure, Error, Result};
use crate::modulo::ModuloParams;
use crate::signal::{grid_len, SampledSignal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StState {
    Idle,
    Active,
}

impl StState {
    pub fn is_active(self) -> bool {
        self == StState::Active
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

/// One Schmitt-trigger decision.
///
/// ST⁺ sets when `z ≥ λ` and releases when `z ≤ h − λ`; ST⁻ is the mirror image.
pub fn st_update(state: StState, polarity: Polarity, z_v: f64, params: &ModuloParams) -> StState {
    let l = params.lambda_v;
    let h = params.hysteresis_v;
    match (polarity, state) {
        (Polarity::Positive, StState::Idle) if z_v >= l => StState::Active,
        (Polarity::Positive, StState::Active) if z_v <= h - l => StState::Idle,
        (Polarity::Negative, StState::Idle) if z_v <= -l => StState::Active,
        (Polarity::Negative, StState::Active) if z_v >= l - h => StState::Idle,
        _ => state,
    }
}

/// Trigger parameters the simulator feeds to [`st_update`] for a modulo setting.
pub fn comparator_params(mp: &ModuloParams) -> ModuloParams {
    ModuloParams {
        lambda_v: mp.lambda_v + 0.5 * mp.hysteresis_v,
        alpha: mp.alpha,
        hysteresis_v: mp.hysteresis_v,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitParams {
    /// Integrator time constant R·C, seconds.
    pub rc_s: f64,
    /// Magnitude V_H of an active trigger output, volts.
    pub st_level_v: f64,
    /// Fixed Euler step, seconds.
    pub sim_step_s: f64,
    /// |ε| is clamped here.
    pub rail_v: f64,
}

impl CircuitParams {
    /// `V_H = 10 V`, ±15 V rails, and `RC` such that a fold of `2λ` takes
    /// `fold_steps` simulation steps.
    pub fn for_fold_steps(lambda_v: f64, sim_step_s: f64, fold_steps: f64) -> Self {
        let st_level_v = 10.0;
        Self {
            rc_s: st_level_v / (2.0 * lambda_v) * fold_steps * sim_step_s,
            st_level_v,
            sim_step_s,
            rail_v: 15.0,
        }
    }

    pub fn with_rail(mut self, rail_v: f64) -> Self {
        self.rail_v = rail_v;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rc_s", self.rc_s),
            ("st_level_v", self.st_level_v),
            ("sim_step_s", self.sim_step_s),
            ("rail_v", self.rail_v),
        ] {
            ensure(v.is_finite() && v > 0.0, || format!("{name} must be positive, got {v}"))?;
        }
        ensure(self.sim_step_s < self.rc_s / 10.0, || {
            format!(
                "sim_step_s {} must be below rc_s/10 = {}",
                self.sim_step_s,
                self.rc_s / 10.0
            )
        })
    }

    /// Integrator ramp rate while a trigger is active, V/s.
    pub fn slope_v_per_s(&self) -> f64 {
        self.st_level_v / self.rc_s
    }

    /// Time for `ε` to ramp through `2λ` with a static input.
    pub fn fold_duration_s(&self, lambda_v: f64) -> f64 {
        2.0 * lambda_v / self.slope_v_per_s()
    }
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self::for_fold_steps(1.0, 1.0e-6, 10.0)
    }
}

/// One trigger activation: from the step it sets to the step it releases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldEvent {
    pub polarity: Polarity,
    pub start: usize,
    pub end: usize,
    pub epsilon_change_v: f64,
}

/// Waveforms on the simulation grid.
#[derive(Debug, Clone)]
pub struct CircuitTrace {
    /// `α·g` interpolated onto the simulation grid.
    pub drive: SampledSignal,
    pub z: SampledSignal,
    pub epsilon: SampledSignal,
    pub st_plus: Vec<StState>,
    pub st_minus: Vec<StState>,
    /// First step at which `ε` was clamped to a rail, if any.
    pub rail_saturation: Option<usize>,
    pub modulo: ModuloParams,
    pub circuit: CircuitParams,
}

impl CircuitTrace {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// True while either trigger is driving the integrator.
    pub fn in_transition(&self, k: usize) -> bool {
        self.st_plus[k].is_active() || self.st_minus[k].is_active()
    }

    pub fn check_rails(&self) -> Result<()> {
        match self.rail_saturation {
            Some(k) => Err(Error::RailSaturation {
                t_s: self.z.time(k),
                rail_v: self.circuit.rail_v,
            }),
            None => Ok(()),
        }
    }

    pub fn folds(&self) -> Vec<FoldEvent> {
        let mut out = Vec::new();
        for (polarity, states) in [
            (Polarity::Positive, &self.st_plus),
            (Polarity::Negative, &self.st_minus),
        ] {
            let mut start = None;
            for (k, s) in states.iter().enumerate() {
                match (start, s.is_active()) {
                    (None, true) => start = Some(k),
                    (Some(s0), false) => {
                        out.push(FoldEvent {
                            polarity,
                            start: s0,
                            end: k,
                            epsilon_change_v: self.epsilon.values[k] - self.epsilon.values[s0],
                        });
                        start = None;
                    }
                    _ => {}
                }
            }
        }
        out.sort_by_key(|e| e.start);
        out
    }

    /// Simulation-grid indices picked by a sample-and-hold running at `sample_rate_hz`.
    pub fn sample_indices(&self, sample_rate_hz: f64) -> Result<Vec<usize>> {
        let dt = self.circuit.sim_step_s;
        ensure(sample_rate_hz.is_finite() && sample_rate_hz > 0.0, || {
            format!("sample rate must be positive, got {sample_rate_hz}")
        })?;
        ensure(sample_rate_hz * dt <= 1.0 + 1e-9, || {
            format!(
                "sample rate {sample_rate_hz} Hz exceeds the simulation rate {} Hz",
                1.0 / dt
            )
        })?;
        let n = self.len();
        let span = (n - 1) as f64 * dt;
        let count = grid_len(span, sample_rate_hz) + 1;
        let ratio = 1.0 / (sample_rate_hz * dt);
        Ok((0..count)
            .map(|j| ((j as f64 * ratio).round() as usize).min(n - 1))
            .collect())
    }
}

fn interpolate(input: &SampledSignal, t_rel: f64) -> f64 {
    let v = &input.values;
    if v.len() == 1 {
        return v[0];
    }
    let p = t_rel * input.sample_rate_hz;
    let i = (p.floor().max(0.0) as usize).min(v.len() - 2);
    let f = (p - i as f64).clamp(0.0, 1.0);
    v[i] + f * (v[i + 1] - v[i])
}

/// Runs the folding loop over `input` (linearly interpolated onto the simulation grid).
pub fn simulate(input: &SampledSignal, mp: &ModuloParams, cp: &CircuitParams) -> Result<CircuitTrace> {
    mp.validate()?;
    cp.validate()?;
    input.ensure_non_empty("input signal")?;
    ensure(input.values.iter().all(|v| v.is_finite()), || {
        "input contains non-finite samples".into()
    })?;

    let dt = cp.sim_step_s;
    let span = (input.len() - 1) as f64 / input.sample_rate_hz;
    let n = grid_len(span, 1.0 / dt) + 1;

    let cmp = comparator_params(mp);
    let release_plus = cmp.hysteresis_v - cmp.lambda_v;
    let release_minus = cmp.lambda_v - cmp.hysteresis_v;
    let ramp = cp.slope_v_per_s() * dt;
    let fold_steps = (cp.fold_duration_s(mp.lambda_v) / dt).ceil() as usize;

    let mut drive = Vec::with_capacity(n);
    let mut zs = Vec::with_capacity(n);
    let mut eps_out = Vec::with_capacity(n);
    let mut st_plus = Vec::with_capacity(n);
    let mut st_minus = Vec::with_capacity(n);
    let mut rail_saturation = None;

    let mut eps = 0.0f64;
    let mut plus = StState::Idle;
    let mut minus = StState::Idle;
    let mut last_release: Option<(Polarity, usize)> = None;
    let mut bounces = 0usize;

    for k in 0..n {
        let ag = mp.alpha * interpolate(input, k as f64 * dt);

        if k > 0 {
            if plus.is_active() {
                eps += ramp;
            }
            if minus.is_active() {
                eps -= ramp;
            }
        }
        let mut z = ag - eps;

        // Release lands on the threshold within the step.
        if plus.is_active() && z < release_plus {
            z = release_plus;
            eps = ag - z;
        }
        if minus.is_active() && z > release_minus {
            z = release_minus;
            eps = ag - z;
        }

        if eps.abs() > cp.rail_v {
            eps = cp.rail_v.copysign(eps);
            z = ag - eps;
            rail_saturation.get_or_insert(k);
        }

        let next_plus = st_update(plus, Polarity::Positive, z, &cmp);
        let next_minus = st_update(minus, Polarity::Negative, z, &cmp);

        let edges = [
            (Polarity::Positive, plus, next_plus),
            (Polarity::Negative, minus, next_minus),
        ];
        for &(pol, before, after) in &edges {
            if before.is_active() && !after.is_active() {
                last_release = Some((pol, k));
            }
        }
        for &(pol, before, after) in &edges {
            if !before.is_active() && after.is_active() {
                let bounced = matches!(last_release,
                    Some((p, r)) if p != pol && k - r <= fold_steps);
                bounces = if bounced { bounces + 1 } else { 0 };
                if bounces > 4 {
                    return Err(Error::Oscillation {
                        t_s: input.t0_s + k as f64 * dt,
                        bounces,
                        hysteresis_v: mp.hysteresis_v,
                    });
                }
            }
        }
        plus = next_plus;
        minus = next_minus;

        drive.push(ag);
        zs.push(z);
        eps_out.push(eps);
        st_plus.push(plus);
        st_minus.push(minus);
    }

    let grid = |values| SampledSignal::new(1.0 / dt, input.t0_s, values);
    Ok(CircuitTrace {
        drive: grid(drive)?,
        z: grid(zs)?,
        epsilon: grid(eps_out)?,
        st_plus,
        st_minus,
        rail_saturation,
        modulo: *mp,
        circuit: *cp,
    })
}

/// Sample-and-hold of `z` at `sample_rate_hz` (nearest simulation step).
///
/// Samples that land inside a fold transition are kept as they are.
pub fn sample_trace(trace: &CircuitTrace, sample_rate_hz: f64) -> Result<SampledSignal> {
    let idx = trace.sample_indices(sample_rate_hz)?;
    SampledSignal::new(
        sample_rate_hz,
        trace.z.t0_s,
        idx.iter().map(|&k| trace.z.values[k]).collect(),
    )
}

//! Fixed-step RK4 integration of the exact amplitude equations
//!
//! ```text
//! i ȧ_j = E_j a_j + Σ_k V_jk(t) a_k,    V_jk(t) = K_jk·V(t),
//! ```
//!
//! starting from `a = (1, 0, 0)`. With degenerate levels this is an
//! independent check of the dressed-state solution; with split levels it
//! measures population leakage.

use crate::dressed::{
    amplitudes_at, build_dressed_basis, populations_general, AmplitudeState, CouplingRatios,
    DressedBasis, DressedError, PopulationSample,
};
use crate::pulses::{Pulse, PulseError};
use num_complex::Complex64 as C64;
use std::io::Write;
use thiserror::Error;

/// Largest accepted `max |1 − Σ|a_i|²|` over a run.
pub const MAX_NORM_DRIFT: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PropagatorError {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("norm drift {drift:e} exceeds {MAX_NORM_DRIFT:e}; step dt = {dt:e} is too large")]
    NormDriftExceeded { drift: f64, dt: f64 },
    #[error(transparent)]
    Pulse(#[from] PulseError),
    #[error(transparent)]
    Dressed(#[from] DressedError),
    #[error("writing trace: {0}")]
    Csv(#[from] csv::Error),
}

/// Bare level energies `E_j` (ħ = 1).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LevelEnergies {
    pub e: [f64; 3],
}

impl LevelEnergies {
    pub fn degenerate() -> Self {
        Self { e: [0.0; 3] }
    }

    /// `E = (0, −ω₁₂, −ω₁₃)`, so that `ω_ij = E_i − E_j`.
    pub fn from_splittings(omega12: f64, omega13: f64) -> Self {
        Self {
            e: [0.0, -omega12, -omega13],
        }
    }

    pub fn omega12(&self) -> f64 {
        self.e[0] - self.e[1]
    }

    pub fn omega13(&self) -> f64 {
        self.e[0] - self.e[2]
    }

    pub fn is_degenerate(&self) -> bool {
        self.e == [0.0; 3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    /// Steps per reference period of the pulse; ignored when `dt` is set.
    pub steps_per_period: usize,
    /// Explicit step. The final step count is rounded up so `t_end` is hit.
    pub dt: Option<f64>,
    pub record_every: usize,
    pub record_amplitudes: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            steps_per_period: 20_000,
            dt: None,
            record_every: 10,
            record_amplitudes: false,
        }
    }
}

impl IntegratorConfig {
    pub fn with_steps_per_period(steps_per_period: usize) -> Self {
        Self {
            steps_per_period,
            ..Self::default()
        }
    }

    fn nominal_dt(&self, pulse: &Pulse) -> Result<f64, PropagatorError> {
        if self.record_every == 0 {
            return Err(PropagatorError::InvalidConfig(
                "record_every must be >= 1".into(),
            ));
        }
        match self.dt {
            Some(dt) if dt > 0.0 && dt.is_finite() => Ok(dt),
            Some(dt) => Err(PropagatorError::InvalidConfig(format!(
                "dt must be positive, got {dt}"
            ))),
            None if self.steps_per_period == 0 => Err(PropagatorError::InvalidConfig(
                "steps_per_period must be >= 1".into(),
            )),
            None => Ok(pulse.reference_period() / self.steps_per_period as f64),
        }
    }
}

/// Sampled populations of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationTrace {
    pub times: Vec<f64>,
    pub samples: Vec<PopulationSample>,
    pub amplitudes: Option<Vec<[C64; 3]>>,
    /// `max |1 − Σ|a_i|²|` over every step, not just recorded ones.
    pub norm_drift: f64,
    pub dt: f64,
}

impl PopulationTrace {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, PopulationSample)> {
        Some((*self.times.last()?, *self.samples.last()?))
    }

    pub fn max_population(&self, level: usize) -> f64 {
        self.samples
            .iter()
            .map(|s| s.level(level))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Total time the population of `level` spends above `threshold`, with
    /// crossings located by linear interpolation between samples.
    pub fn dwell_time(&self, level: usize, threshold: f64) -> f64 {
        let mut total = 0.0;
        for (w, s) in self.times.windows(2).zip(self.samples.windows(2)) {
            let (p0, p1) = (s[0].level(level) - threshold, s[1].level(level) - threshold);
            let h = w[1] - w[0];
            total += match (p0 > 0.0, p1 > 0.0) {
                (true, true) => h,
                (false, false) => 0.0,
                (true, false) => h * p0 / (p0 - p1),
                (false, true) => h * p1 / (p1 - p0),
            };
        }
        total
    }

    /// CSV with header `t,p1,p2,p3` plus `re_a1,im_a1,...` when amplitudes
    /// were recorded.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), PropagatorError> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["t", "p1", "p2", "p3"];
        if self.amplitudes.is_some() {
            header.extend(["re_a1", "im_a1", "re_a2", "im_a2", "re_a3", "im_a3"]);
        }
        w.write_record(&header)?;
        for (i, (t, s)) in self.times.iter().zip(&self.samples).enumerate() {
            let mut row = vec![
                format!("{t:?}"),
                format!("{:?}", s.p1),
                format!("{:?}", s.p2),
                format!("{:?}", s.p3),
            ];
            if let Some(amps) = &self.amplitudes {
                for a in &amps[i] {
                    row.push(format!("{:?}", a.re));
                    row.push(format!("{:?}", a.im));
                }
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

/// Integrate with `V_jk = K_jk·V(t)` built from the coupling ratios.
pub fn integrate(
    ratios: &CouplingRatios,
    energies: &LevelEnergies,
    pulse: &Pulse,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<PopulationTrace, PropagatorError> {
    integrate_coupling(&ratios.coupling_matrix(), energies, pulse, t_end, config)
}

/// Integrate with an arbitrary real symmetric shape matrix `K`.
pub fn integrate_coupling(
    coupling: &[[f64; 3]; 3],
    energies: &LevelEnergies,
    pulse: &Pulse,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<PopulationTrace, PropagatorError> {
    if pulse.is_ideal_kick() {
        return Err(PropagatorError::InvalidConfig(
            "an ideal kick cannot be sampled; use propagate_kick".into(),
        ));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(PropagatorError::InvalidConfig(format!(
            "t_end must be positive, got {t_end}"
        )));
    }
    if coupling
        .iter()
        .flatten()
        .chain(&energies.e)
        .any(|v| !v.is_finite())
    {
        return Err(PropagatorError::InvalidConfig(
            "non-finite couplings or energies".into(),
        ));
    }
    let nominal = config.nominal_dt(pulse)?;
    let steps = ((t_end / nominal) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;

    let rhs = |t: f64, a: &[C64; 3]| -> Result<[C64; 3], PulseError> {
        let v = pulse.value(t)?;
        let mut out = [C64::new(0.0, 0.0); 3];
        for j in 0..3 {
            let mut h = energies.e[j] * a[j];
            for k in 0..3 {
                h += coupling[j][k] * v * a[k];
            }
            // ȧ = −i H a
            out[j] = C64::new(h.im, -h.re);
        }
        Ok(out)
    };
    let axpy =
        |a: &[C64; 3], k: &[C64; 3], h: f64| [a[0] + k[0] * h, a[1] + k[1] * h, a[2] + k[2] * h];

    let capacity = steps / config.record_every + 2;
    let mut times = Vec::with_capacity(capacity);
    let mut samples = Vec::with_capacity(capacity);
    let mut amplitudes = config
        .record_amplitudes
        .then(|| Vec::with_capacity(capacity));
    let mut record = |t: f64, a: &[C64; 3]| {
        times.push(t);
        samples.push(PopulationSample::from_amplitudes(a));
        if let Some(v) = amplitudes.as_mut() {
            v.push(*a);
        }
    };

    let mut a = AmplitudeState::initial().a;
    record(0.0, &a);
    let mut drift: f64 = 0.0;
    for n in 0..steps {
        let t = n as f64 * dt;
        let k1 = rhs(t, &a)?;
        let k2 = rhs(t + 0.5 * dt, &axpy(&a, &k1, 0.5 * dt))?;
        let k3 = rhs(t + 0.5 * dt, &axpy(&a, &k2, 0.5 * dt))?;
        let k4 = rhs(t + dt, &axpy(&a, &k3, dt))?;
        for j in 0..3 {
            a[j] += (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) * (dt / 6.0);
        }
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        drift = drift.max((1.0 - norm).abs());
        if (n + 1) % config.record_every == 0 || n + 1 == steps {
            record((n + 1) as f64 * dt, &a);
        }
    }
    if !(drift <= MAX_NORM_DRIFT) {
        return Err(PropagatorError::NormDriftExceeded { drift, dt });
    }
    Ok(PopulationTrace {
        times,
        samples,
        amplitudes,
        norm_drift: drift,
        dt,
    })
}

/// State right after an ideal kick of area `kick_area`; before it the state
/// is `(1, 0, 0)`.
pub fn propagate_kick(basis: &DressedBasis, kick_area: f64) -> AmplitudeState {
    amplitudes_at(basis, kick_area)
}

/// RK4 trace together with the analytic populations at each sample time.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub trace: PopulationTrace,
    pub analytic: Vec<PopulationSample>,
    pub max_deviation: f64,
}

/// Run the degenerate RK4 path and the dressed-state formula side by side.
pub fn compare_trace(
    ratios: &CouplingRatios,
    pulse: &Pulse,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<Comparison, PropagatorError> {
    let basis = build_dressed_basis(ratios)?;
    let trace = integrate(ratios, &LevelEnergies::degenerate(), pulse, t_end, config)?;
    let mut analytic = Vec::with_capacity(trace.len());
    let mut max_deviation: f64 = 0.0;
    for (&t, num) in trace.times.iter().zip(&trace.samples) {
        let p = populations_general(&basis, pulse.area(t)?.a);
        max_deviation = max_deviation.max(p.max_abs_diff(num));
        analytic.push(p);
    }
    Ok(Comparison {
        trace,
        analytic,
        max_deviation,
    })
}

/// Largest componentwise `|ΔP|` between RK4 and the analytic populations.
pub fn compare_analytic_numeric(
    ratios: &CouplingRatios,
    pulse: &Pulse,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<f64, PropagatorError> {
    Ok(compare_trace(ratios, pulse, t_end, config)?.max_deviation)
}

//! Drive profiles `V(t)` and their action integrals `A(t) = ∫₀ᵗ V(t') dt'`.

use crate::transfer::TransferCondition;
use statrs::function::erf::erf;
use std::f64::consts::{PI, SQRT_2};
use std::io::Read;
use std::path::Path;
use thiserror::Error;

/// Gaussian kicks are cut off at this many widths on either side.
pub const GAUSSIAN_CUTOFF: f64 = 8.0;

#[derive(Debug, Error)]
pub enum PulseError {
    #[error("{name} must be finite, got {value}")]
    NonFinite { name: &'static str, value: f64 },
    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("ideal kick has no point value at its centre t0 = {t}")]
    IdealKickPointQuery { t: f64 },
    #[error("t = {t} outside the tabulated range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("tabulated times must be strictly increasing (row {index})")]
    Unsorted { index: usize },
    #[error("a tabulated pulse needs at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("pulse table must have header `t,v`, found `{0}`")]
    BadHeader(String),
    #[error("reading pulse table: {0}")]
    Csv(#[from] csv::Error),
}

/// Action accumulated by time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionValue {
    pub t: f64,
    pub a: f64,
}

/// Time profile of the shared interaction `V(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Pulse {
    /// `V₀ cos(ωt)`.
    Harmonic {
        v0: f64,
        omega: f64,
    },
    Constant {
        v0: f64,
    },
    /// Normalised Gaussian of total area `area`, truncated at ±8 widths.
    GaussianKick {
        area: f64,
        center: f64,
        width: f64,
    },
    /// `area·δ(t − center)`; only its action is defined.
    IdealKick {
        area: f64,
        center: f64,
    },
    /// Linear interpolation between samples.
    Tabulated {
        times: Vec<f64>,
        values: Vec<f64>,
    },
}

fn finite(name: &'static str, value: f64) -> Result<f64, PulseError> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(PulseError::NonFinite { name, value })
    }
}

fn positive(name: &'static str, value: f64) -> Result<f64, PulseError> {
    finite(name, value)?;
    if value > 0.0 {
        Ok(value)
    } else {
        Err(PulseError::NonPositive { name, value })
    }
}

impl Pulse {
    pub fn harmonic(v0: f64, omega: f64) -> Result<Self, PulseError> {
        Ok(Self::Harmonic {
            v0: finite("v0", v0)?,
            omega: positive("omega", omega)?,
        })
    }

    pub fn constant(v0: f64) -> Result<Self, PulseError> {
        Ok(Self::Constant {
            v0: finite("v0", v0)?,
        })
    }

    pub fn gaussian_kick(area: f64, center: f64, width: f64) -> Result<Self, PulseError> {
        Ok(Self::GaussianKick {
            area: finite("kick_area", area)?,
            center: finite("kick_center", center)?,
            width: positive("kick_width", width)?,
        })
    }

    pub fn ideal_kick(area: f64, center: f64) -> Result<Self, PulseError> {
        Ok(Self::IdealKick {
            area: finite("kick_area", area)?,
            center: finite("kick_center", center)?,
        })
    }

    pub fn tabulated(times: Vec<f64>, values: Vec<f64>) -> Result<Self, PulseError> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(PulseError::TooFewSamples(times.len().min(values.len())));
        }
        for (&t, &v) in times.iter().zip(&values) {
            finite("t", t)?;
            finite("v", v)?;
        }
        if let Some(index) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(PulseError::Unsorted { index: index + 1 });
        }
        Ok(Self::Tabulated { times, values })
    }

    /// Tabulated pulse from a CSV stream with header `t,v`.
    pub fn tabulated_from_reader<R: Read>(reader: R) -> Result<Self, PulseError> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.len() != 2 || &headers[0] != "t" || &headers[1] != "v" {
            return Err(PulseError::BadHeader(
                headers.iter().collect::<Vec<_>>().join(","),
            ));
        }
        let mut times = Vec::new();
        let mut values = Vec::new();
        for record in rdr.deserialize() {
            let (t, v): (f64, f64) = record?;
            times.push(t);
            values.push(v);
        }
        Self::tabulated(times, values)
    }

    pub fn tabulated_from_csv(path: impl AsRef<Path>) -> Result<Self, PulseError> {
        let file = std::fs::File::open(path).map_err(csv::Error::from)?;
        Self::tabulated_from_reader(file)
    }

    /// Period `2π/ω` of a harmonic drive.
    pub fn period(&self) -> Option<f64> {
        match self {
            Self::Harmonic { omega, .. } => Some(2.0 * PI / omega),
            _ => None,
        }
    }

    /// Time scale used to size integrator steps: the period for harmonic
    /// drives, `2π` otherwise.
    pub fn reference_period(&self) -> f64 {
        self.period().unwrap_or(2.0 * PI)
    }

    pub fn is_ideal_kick(&self) -> bool {
        matches!(self, Self::IdealKick { .. })
    }

    pub fn value(&self, t: f64) -> Result<f64, PulseError> {
        finite("t", t)?;
        Ok(match self {
            Self::Harmonic { v0, omega } => v0 * (omega * t).cos(),
            Self::Constant { v0 } => *v0,
            Self::GaussianKick {
                area,
                center,
                width,
            } => {
                let u = (t - center) / width;
                if u.abs() > GAUSSIAN_CUTOFF {
                    0.0
                } else {
                    area * (-0.5 * u * u).exp() / (width * (2.0 * PI).sqrt() * gaussian_mass())
                }
            }
            Self::IdealKick { center, .. } => {
                if t == *center {
                    return Err(PulseError::IdealKickPointQuery { t });
                }
                0.0
            }
            Self::Tabulated { times, values } => {
                let i = locate(times, t)?;
                let w = (t - times[i]) / (times[i + 1] - times[i]);
                values[i] + w * (values[i + 1] - values[i])
            }
        })
    }

    pub fn area(&self, t: f64) -> Result<ActionValue, PulseError> {
        finite("t", t)?;
        let a = match self {
            Self::Harmonic { v0, omega } => v0 / omega * (omega * t).sin(),
            Self::Constant { v0 } => v0 * t,
            Self::GaussianKick {
                area,
                center,
                width,
            } => {
                let cdf = |s: f64| {
                    let u = ((s - center) / width).clamp(-GAUSSIAN_CUTOFF, GAUSSIAN_CUTOFF);
                    0.5 * erf(u / SQRT_2) / gaussian_mass()
                };
                area * (cdf(t) - cdf(0.0))
            }
            Self::IdealKick { area, center } => {
                let step = |s: f64| if s > 0.0 { 1.0 } else { 0.0 };
                area * (step(t - center) - step(-center))
            }
            Self::Tabulated { times, values } => {
                tabulated_primitive(times, values, t)? - tabulated_primitive(times, values, 0.0)?
            }
        };
        Ok(ActionValue { t, a })
    }
}

/// Mass of the unit Gaussian inside the cutoff, `erf(8/√2)`.
fn gaussian_mass() -> f64 {
    erf(GAUSSIAN_CUTOFF / SQRT_2)
}

/// Index `i` with `times[i] <= t <= times[i+1]`.
fn locate(times: &[f64], t: f64) -> Result<usize, PulseError> {
    let (lo, hi) = (times[0], times[times.len() - 1]);
    if t < lo || t > hi {
        return Err(PulseError::OutOfRange { t, lo, hi });
    }
    let i = times.partition_point(|&s| s <= t);
    Ok(i.saturating_sub(1).min(times.len() - 2))
}

/// `∫_{times[0]}^t` of the interpolant.
fn tabulated_primitive(times: &[f64], values: &[f64], t: f64) -> Result<f64, PulseError> {
    let i = locate(times, t)?;
    let mut acc = 0.0;
    for k in 0..i {
        acc += 0.5 * (values[k] + values[k + 1]) * (times[k + 1] - times[k]);
    }
    let h = t - times[i];
    let slope = (values[i + 1] - values[i]) / (times[i + 1] - times[i]);
    Ok(acc + h * (values[i] + 0.5 * slope * h))
}

/// Harmonic drive realising `cond` with `t₀ = T/4`: `V₀ = A(t₀)·ω`.
pub fn harmonic_for_condition(cond: &TransferCondition, omega: f64) -> Result<Pulse, PulseError> {
    let omega = positive("omega", omega)?;
    Pulse::harmonic(cond.action_t0 * omega, omega)
}

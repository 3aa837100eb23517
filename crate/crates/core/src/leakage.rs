//! Nearly degenerate levels and the two-level reference.
//!
//! Splittings follow `ω_ij = E_i − E_j`. The perturbative estimates are
//! leading order in `ω_ij t` and only meaningful while `|ω_ij t| < 0.3`; the
//! dual RK4 measurements here are the reference they are checked against.
//!
//! The `t⁴` coefficient of `P₂^deg − P₂^nondeg` obtained by expanding the
//! amplitude equations is
//!
//! ```text
//! (1/12)[2(ω₁₂ − 2ω₁₃)V₁₂V₁₃V₂₃ + ω₁₂²V₁₂²]
//! ```
//!
//! (no `t⁵` term), and evaluating it with the harmonic drive at `t₀ = T/4`
//! gives
//!
//! ```text
//! (1/27)(π/2)⁶[(π/3)βn₁n₂(n₂ − n₁)(ω₁₂/ω − 2ω₁₃/ω) + (n₂ − n₁)²(ω₁₂/ω)²].
//! ```

use crate::dressed::{CouplingRatios, PopulationSample};
use crate::propagator::{
    integrate, integrate_coupling, IntegratorConfig, LevelEnergies, PropagatorError,
};
use crate::pulses::{harmonic_for_condition, Pulse};
use crate::transfer::TransferCondition;
use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use std::f64::consts::PI;

/// `|ω_ij t|` beyond which the perturbative estimates are not trusted.
pub const VALIDITY_WINDOW: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageRegime {
    EarlyTime,
    AtT0,
}

/// Why an estimate is zero even though the measured leakage need not be.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeakageCaveat {
    /// `n₂ = n₁`: both terms at `t₀` carry a factor `n₂ − n₁`, so the leading
    /// order vanishes and the true leakage is of higher order.
    LeadingOrderVanishes,
}

/// Signed estimate of `ΔP₂ = P₂^deg − P₂^nondeg`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageEstimate {
    pub delta_p2: f64,
    pub t: f64,
    pub regime: LeakageRegime,
    pub caveat: Option<LeakageCaveat>,
}

/// Quartic early-time estimate from the couplings at `t = 0`.
pub fn delta_p2_early(
    v12_0: f64,
    v13_0: f64,
    v23_0: f64,
    omega12: f64,
    omega13: f64,
    t: f64,
) -> LeakageEstimate {
    let coeff = (2.0 * (omega12 - 2.0 * omega13) * v12_0 * v13_0 * v23_0
        + omega12 * omega12 * v12_0 * v12_0)
        / 12.0;
    LeakageEstimate {
        delta_p2: coeff * t.powi(4),
        t,
        regime: LeakageRegime::EarlyTime,
        caveat: None,
    }
}

/// Estimate at `t₀ = T/4` for the harmonic drive, in the ratios `ω_ij/ω`.
/// `t` is reported in units of `1/ω`.
pub fn delta_p2_at_t0(
    cond: &TransferCondition,
    omega12_ratio: f64,
    omega13_ratio: f64,
) -> LeakageEstimate {
    let (n1, n2) = (cond.n1 as f64, cond.n2 as f64);
    let d = n2 - n1;
    let beta = cond.family_beta();
    let bracket = (PI / 3.0) * beta * n1 * n2 * d * (omega12_ratio - 2.0 * omega13_ratio)
        + d * d * omega12_ratio * omega12_ratio;
    LeakageEstimate {
        delta_p2: (PI / 2.0).powi(6) * bracket / 27.0,
        t: PI / 2.0,
        regime: LeakageRegime::AtT0,
        caveat: (cond.n1 == cond.n2).then_some(LeakageCaveat::LeadingOrderVanishes),
    }
}

/// RK4 run of the condition's harmonic drive at frequency `omega` with the
/// given absolute splittings, stopped at `t_end`.
fn run_condition(
    cond: &TransferCondition,
    omega: f64,
    omega12: f64,
    omega13: f64,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<PopulationSample, PropagatorError> {
    let pulse = harmonic_for_condition(cond, omega)?;
    let energies = LevelEnergies::from_splittings(omega12, omega13);
    let trace = integrate(&cond.ratios(), &energies, &pulse, t_end, config)?;
    Ok(trace.last().expect("trace always has samples").1)
}

/// Measured `1 − P_target(t₀)` with `t₀ = π/(2ω)`.
pub fn measure_deficit(
    cond: &TransferCondition,
    omega: f64,
    omega12: f64,
    omega13: f64,
    config: &IntegratorConfig,
) -> Result<f64, PropagatorError> {
    let t0 = PI / (2.0 * omega);
    let p = run_condition(cond, omega, omega12, omega13, t0, config)?;
    Ok(1.0 - p.level(cond.target.level()))
}

/// Measured `P₂^deg(t) − P₂^nondeg(t)` from two RK4 runs.
pub fn measure_early_difference(
    cond: &TransferCondition,
    omega: f64,
    omega12: f64,
    omega13: f64,
    t: f64,
    config: &IntegratorConfig,
) -> Result<f64, PropagatorError> {
    let level = cond.target.level();
    let deg = run_condition(cond, omega, 0.0, 0.0, t, config)?;
    let nondeg = run_condition(cond, omega, omega12, omega13, t, config)?;
    Ok(deg.level(level) - nondeg.level(level))
}

/// Early-time estimate for the condition's harmonic drive: `V_ij(0)` are the
/// couplings at `t = 0`, i.e. `K_ij·V₀`.
pub fn early_estimate_for_condition(
    cond: &TransferCondition,
    omega: f64,
    omega12: f64,
    omega13: f64,
    t: f64,
) -> LeakageEstimate {
    let v0 = cond.action_t0 * omega;
    delta_p2_early(cond.alpha * v0, cond.beta * v0, v0, omega12, omega13, t)
}

/// One row of a leakage scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeakageRow {
    pub omega12_ratio: f64,
    pub omega13_ratio: f64,
    pub deficit: f64,
    pub estimate: LeakageEstimate,
}

/// Measured deficit at `t₀` for each `(ω₁₂/ω, ω₁₃/ω)`, run in parallel.
pub fn leakage_scan(
    cond: &TransferCondition,
    omega: f64,
    omega_ratios: &[(f64, f64)],
    config: &IntegratorConfig,
) -> Result<Vec<LeakageRow>, PropagatorError> {
    omega_ratios
        .par_iter()
        .map(|&(r12, r13)| {
            let deficit = measure_deficit(cond, omega, r12 * omega, r13 * omega, config)?;
            Ok(LeakageRow {
                omega12_ratio: r12,
                omega13_ratio: r13,
                deficit,
                estimate: delta_p2_at_t0(cond, r12, r13),
            })
        })
        .collect()
}

/// Two-level atom with diagonal ratios `ε₁, ε₂` at action `A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLevelParams {
    pub eps1: f64,
    pub eps2: f64,
    pub action: f64,
}

impl TwoLevelParams {
    /// `1/(1 + (ε₂ − ε₁)²/4)`.
    pub fn p2_bound(&self) -> f64 {
        let d = self.eps2 - self.eps1;
        1.0 / (1.0 + d * d / 4.0)
    }
}

/// `(P₁, P₂)` from the 2×2 dressed construction: rows `(1, x_±)` with
/// `x² + (ε₁ − ε₂)x − 1 = 0`, phases `z_± = ε₁ + x_±`.
pub fn two_level_populations(p: &TwoLevelParams) -> (f64, f64) {
    let d = p.eps1 - p.eps2;
    let s = (d * d + 4.0).sqrt();
    let x = [(-d + s) / 2.0, (-d - s) / 2.0];
    let z = x.map(|x| p.eps1 + x);
    let m = Matrix2::new(1.0, x[0], 1.0, x[1]);
    let m_inv = Matrix2::new(x[1], -x[0], -1.0, 1.0) / (x[1] - x[0]);
    debug_assert!((m * m_inv - Matrix2::identity()).abs().max() < 1e-12);
    let ph = z.map(|z| C64::from_polar(1.0, -z * p.action));
    let a1 = m_inv[(0, 0)] * ph[0] + m_inv[(0, 1)] * ph[1];
    let a2 = m_inv[(1, 0)] * ph[0] + m_inv[(1, 1)] * ph[1];
    (a1.norm_sqr(), a2.norm_sqr())
}

/// `(1/4)(π/2)⁶(ω₁₂/ω)²`, the two-level harmonic leakage estimate at `t₀`.
pub fn two_level_deficit_estimate(omega12_ratio: f64) -> f64 {
    0.25 * (PI / 2.0).powi(6) * omega12_ratio * omega12_ratio
}

/// Measured two-level `1 − P₂(t₀)`: harmonic drive with `A(t₀) = π/2`,
/// `ω = 1`, only `V₁₂` coupled, `E₂ = −ω₁₂`.
pub fn two_level_deficit(
    omega12_ratio: f64,
    config: &IntegratorConfig,
) -> Result<f64, PropagatorError> {
    let pulse = Pulse::harmonic(PI / 2.0, 1.0)?;
    let coupling = [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]];
    let energies = LevelEnergies::from_splittings(omega12_ratio, 0.0);
    let trace = integrate_coupling(&coupling, &energies, &pulse, PI / 2.0, config)?;
    Ok(1.0 - trace.last().expect("non-empty").1.p2)
}

/// Three-level run with `V₁₂ = V(t)` fixed and `V₂₃ = V₁₃ = scale·V(t)`.
/// As `scale → 0` (`α → ∞`) levels 1 and 2 form an isolated pair.
pub fn two_level_limit_trace(
    scale: f64,
    pulse: &Pulse,
    t_end: f64,
    config: &IntegratorConfig,
) -> Result<crate::propagator::PopulationTrace, PropagatorError> {
    let ratios = CouplingRatios::new(1.0, scale);
    let mut k = ratios.coupling_matrix();
    k[1][2] = scale;
    k[2][1] = scale;
    integrate_coupling(&k, &LevelEnergies::degenerate(), pulse, t_end, config)
}

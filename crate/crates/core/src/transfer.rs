//! Odd-integer families of complete population transfer.
//!
//! For vanishing diagonal couplings and `β = ±1`, complete transfer `1 → 2` at
//! `t₀` happens exactly when
//!
//! ```text
//! n₁ = 2n_o + n_o',  n₂ = n_o + 2n_o',  r = ±sqrt(2/(n₁n₂)),
//! α = r(n₂ − n₁),    3 r A(t₀) = π,
//! ```
//!
//! with `n_o`, `n_o'` odd and `n₁n₂ > 0`. All integer identities are checked in
//! exact integer arithmetic; only `r`, `α` and `A(t₀)` are floating point.
//!
//! Sign conventions: populations are even in the action, and the similarity
//! `diag(1, −1, 1)` maps `(α, β, A)` to `(α, −β, −A)`, so every combination of
//! `±α`, `β = ±1` and `±|A(t₀)|` belonging to one family transfers completely.
//! The conditions built here carry `A(t₀) = π/(3r)`, i.e. the sign of `r`.

use crate::dressed::{CouplingRatios, PopulationSample};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConditionError {
    #[error("n_o = {n_o} and n_o' = {n_op} must both be odd")]
    EvenInteger { n_o: i64, n_op: i64 },
    #[error("n1·n2 = {product} must be positive (P3 >= 0 requires n1·n2 > 0)")]
    InvalidPair { product: i64 },
    #[error("sign must be +1 or -1, got {0}")]
    InvalidSign(i64),
}

/// Pair of odd integers `(n_o, n_o')` labelling one family member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OddPair {
    n_o: i64,
    n_op: i64,
}

impl OddPair {
    pub fn new(n_o: i64, n_op: i64) -> Result<Self, ConditionError> {
        if n_o.rem_euclid(2) != 1 || n_op.rem_euclid(2) != 1 {
            return Err(ConditionError::EvenInteger { n_o, n_op });
        }
        let pair = Self { n_o, n_op };
        let product = pair.n1() * pair.n2();
        if product <= 0 {
            return Err(ConditionError::InvalidPair { product });
        }
        Ok(pair)
    }

    /// Pair whose `(n₁, n₂)` are the given integers, if they form a family.
    pub fn from_n(n1: i64, n2: i64) -> Result<Self, ConditionError> {
        let (a, b) = (2 * n1 - n2, 2 * n2 - n1);
        if a % 3 != 0 || b % 3 != 0 {
            return Err(ConditionError::EvenInteger { n_o: a, n_op: b });
        }
        Self::new(a / 3, b / 3)
    }

    pub fn n_o(&self) -> i64 {
        self.n_o
    }
    pub fn n_op(&self) -> i64 {
        self.n_op
    }
    pub fn n1(&self) -> i64 {
        2 * self.n_o + self.n_op
    }
    pub fn n2(&self) -> i64 {
        self.n_o + 2 * self.n_op
    }
    /// `n_e = n_o + n_o'`, always even.
    pub fn n_e(&self) -> i64 {
        self.n_o + self.n_op
    }
}

/// Which initially empty level receives the population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LeveledTarget {
    Level2,
    Level3,
}

impl LeveledTarget {
    pub fn from_level(level: u8) -> Option<Self> {
        match level {
            2 => Some(Self::Level2),
            3 => Some(Self::Level3),
            _ => None,
        }
    }

    pub fn level(&self) -> usize {
        match self {
            Self::Level2 => 2,
            Self::Level3 => 3,
        }
    }
}

/// One member of the complete-transfer family.
///
/// `alpha` and `beta` are the coupling ratios that realise the transfer to
/// `target`. For [`LeveledTarget::Level2`], `beta = ±1` and
/// `alpha = r(n₂ − n₁)`; for level 3 the two are interchanged.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferCondition {
    pub pair: OddPair,
    pub n1: i64,
    pub n2: i64,
    pub r: f64,
    pub alpha: f64,
    pub beta: f64,
    pub action_t0: f64,
    pub sign: i64,
    pub target: LeveledTarget,
}

impl TransferCondition {
    pub fn product(&self) -> i64 {
        self.n1 * self.n2
    }

    /// `r(n₂ − n₁)`, the family's `α` irrespective of the target level.
    pub fn family_alpha(&self) -> f64 {
        self.r * (self.n2 - self.n1) as f64
    }

    /// `β = ±1` of the family irrespective of the target level.
    pub fn family_beta(&self) -> f64 {
        match self.target {
            LeveledTarget::Level2 => self.beta,
            LeveledTarget::Level3 => self.alpha,
        }
    }

    pub fn ratios(&self) -> CouplingRatios {
        CouplingRatios::new(self.alpha, self.beta)
    }

    /// Exact integer checks: parity rules on `n₁, n₂` and the three case
    /// product identities.
    pub fn integer_identities_hold(&self) -> bool {
        let (n1, n2) = (self.n1, self.n2);
        let sum = n1 + n2;
        let parity_ok = n1 % 2 != 0
            && n2 % 2 != 0
            && sum % 3 == 0
            && (sum / 3) % 2 == 0
            && (2 * n1 - n2) % 3 == 0
            && ((2 * n1 - n2) / 3) % 2 != 0
            && (2 * n2 - n1) % 3 == 0
            && ((2 * n2 - n1) / 3) % 2 != 0;
        parity_ok && classify_cases(self).identities_hold(n1 * n2)
    }
}

fn check_sign(sign: i64) -> Result<f64, ConditionError> {
    match sign {
        1 => Ok(1.0),
        -1 => Ok(-1.0),
        s => Err(ConditionError::InvalidSign(s)),
    }
}

/// Family member for `(n_o, n_o')`, sign of `r` and `β = ±1`.
pub fn condition_from_odd_pair(
    pair: OddPair,
    sign: i64,
    beta: i64,
) -> Result<TransferCondition, ConditionError> {
    let s = check_sign(sign)?;
    let beta = check_sign(beta)?;
    let (n1, n2) = (pair.n1(), pair.n2());
    let product = n1 * n2;
    if product <= 0 {
        return Err(ConditionError::InvalidPair { product });
    }
    let r = s * (2.0 / product as f64).sqrt();
    Ok(TransferCondition {
        pair,
        n1,
        n2,
        r,
        alpha: r * (n2 - n1) as f64,
        beta,
        action_t0: PI / (3.0 * r),
        sign,
        target: LeveledTarget::Level2,
    })
}

/// `r` from `(n_o, n_o')` directly: `±(n_o² + (5/2) n_o n_o' + n_o'²)^(-1/2)`.
pub fn r_from_odd_pair(pair: OddPair, sign: i64) -> Result<f64, ConditionError> {
    let s = check_sign(sign)?;
    let (a, b) = (pair.n_o as f64, pair.n_op as f64);
    Ok(s / (a * a + 2.5 * a * b + b * b).sqrt())
}

/// Transfer condition towards level 2 or level 3. For level 3 the roles of
/// `α` and `β` (and of `x`, `y`) are interchanged.
pub fn condition_for_target(
    pair: OddPair,
    sign: i64,
    target: LeveledTarget,
) -> Result<TransferCondition, ConditionError> {
    let cond = condition_from_odd_pair(pair, sign, 1)?;
    Ok(match target {
        LeveledTarget::Level2 => cond,
        LeveledTarget::Level3 => TransferCondition {
            alpha: cond.beta,
            beta: cond.alpha,
            target,
            ..cond
        },
    })
}

/// Every family member with `0 < n₁n₂ ≤ max_product`, `β = +1`, both signs of
/// `r`, sorted by `(n₁n₂, n₁, −sign)`. `(n₁, n₂)` and `(n₂, n₁)` are distinct
/// rows; negative `(n₁, n₂)` duplicate a positive row of opposite sign and are
/// not emitted.
pub fn enumerate_conditions(max_product: i64) -> Vec<TransferCondition> {
    let mut out = Vec::new();
    if max_product < 1 {
        return out;
    }
    for n1 in (1..=max_product).step_by(2) {
        let mut n2 = 1;
        while n1 * n2 <= max_product {
            if (n1 + n2) % 6 == 0 {
                let pair = OddPair::from_n(n1, n2).expect("n1 + n2 ≡ 0 mod 6 is a family");
                for sign in [1, -1] {
                    out.push(condition_from_odd_pair(pair, sign, 1).expect("valid pair"));
                }
            }
            n2 += 2;
        }
    }
    out.sort_by_key(|c| (c.product(), c.n1, -c.sign));
    out
}

/// The three `{k, k'}` labellings of one family member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaseClassification {
    /// `k` even, `k'` odd.
    pub case_i: (i64, i64),
    /// `k`, `k'` both odd.
    pub case_ii: (i64, i64),
    /// `k` odd, `k'` even.
    pub case_iii: (i64, i64),
    /// `E = A(t₀)/π`, with `18E² = n₁n₂`.
    pub e_value: f64,
}

impl CaseClassification {
    /// `(k − k')(2k + k')`, `(2k + k')(k + 2k')` and `(2k' + k)(k' − k)`.
    pub fn products(&self) -> [i64; 3] {
        let (k1, kp1) = self.case_i;
        let (k2, kp2) = self.case_ii;
        let (k3, kp3) = self.case_iii;
        [
            (k1 - kp1) * (2 * k1 + kp1),
            (2 * k2 + kp2) * (k2 + 2 * kp2),
            (2 * kp3 + k3) * (kp3 - k3),
        ]
    }

    /// `(n₁, n₂)` recovered from each case on its own.
    pub fn recovered_n(&self) -> [(i64, i64); 3] {
        let (k1, kp1) = self.case_i;
        let (k2, kp2) = self.case_ii;
        let (k3, kp3) = self.case_iii;
        [
            (k1 - kp1, 2 * k1 + kp1),
            (2 * k2 + kp2, k2 + 2 * kp2),
            (k3 + 2 * kp3, kp3 - k3),
        ]
    }

    pub fn parities_hold(&self) -> bool {
        let even = |k: i64| k % 2 == 0;
        even(self.case_i.0)
            && !even(self.case_i.1)
            && !even(self.case_ii.0)
            && !even(self.case_ii.1)
            && !even(self.case_iii.0)
            && even(self.case_iii.1)
    }

    pub fn identities_hold(&self, n1n2: i64) -> bool {
        self.parities_hold() && self.products().iter().all(|&p| p == n1n2)
    }
}

pub fn classify_cases(cond: &TransferCondition) -> CaseClassification {
    let (n1, n2) = (cond.n1, cond.n2);
    CaseClassification {
        case_i: ((n1 + n2) / 3, (n2 - 2 * n1) / 3),
        case_ii: ((2 * n1 - n2) / 3, (2 * n2 - n1) / 3),
        case_iii: ((n1 - 2 * n2) / 3, (n1 + n2) / 3),
        e_value: cond.action_t0 / PI,
    }
}

/// Closed-form populations of the family as functions of `r·A`. For a
/// level-3 target the populations of levels 2 and 3 are interchanged.
pub fn populations_closed_form(cond: &TransferCondition, action: f64) -> PopulationSample {
    let (n1, n2) = (cond.n1 as f64, cond.n2 as f64);
    let ra = cond.r * action;
    let s = n1 + n2;
    let pre = 1.0 / (2.0 * s * s);
    let common = n1 * n1 + n2 * n2 + n1 * n2 * (1.0 + (s * ra).cos());
    let cross = s * (n1 * ((2.0 * n1 - n2) * ra).cos() + n2 * ((2.0 * n2 - n1) * ra).cos());
    let p1 = pre * (common + cross);
    let p2 = pre * (common - cross);
    let p3 = 2.0 * n1 * n2 / (s * s) * (0.5 * s * ra).sin().powi(2);
    let p = PopulationSample::new(p1, p2, p3);
    match cond.target {
        LeveledTarget::Level2 => p,
        LeveledTarget::Level3 => p.swap_23(),
    }
}

/// Peak population of the intermediate level, `2n₁n₂/(n₁+n₂)² ≤ 1/2`.
pub fn p3_max(cond: &TransferCondition) -> f64 {
    let (n1, n2) = (cond.n1 as f64, cond.n2 as f64);
    2.0 * n1 * n2 / ((n1 + n2) * (n1 + n2))
}

/// Default relative tolerance for [`validate_condition`].
pub const DEFAULT_MATCH_TOL: f64 = 1e-6;

/// Look up the family member with the given `α` and `|A(t₀)|`, `β = ±1`.
///
/// `α` matches when `|α − α_c| ≤ tol·max(|α_c|, 1)`, the action when
/// `||A| − |A_c|| ≤ tol·|A_c|`. The sign of the action is ignored.
pub fn validate_condition(
    alpha: f64,
    beta: f64,
    action_t0: f64,
    tol: f64,
) -> Option<TransferCondition> {
    if !(tol > 0.0) || !alpha.is_finite() || !beta.is_finite() || !action_t0.is_finite() {
        return None;
    }
    if (beta.abs() - 1.0).abs() > tol {
        return None;
    }
    let beta_sign = if beta > 0.0 { 1 } else { -1 };
    let bound = (3.0 * action_t0.abs() / PI).powi(2) * 2.0 * (1.0 + tol).powi(2);
    let max_product = bound.floor() as i64;
    enumerate_conditions(max_product)
        .into_iter()
        .find(|c| {
            (alpha - c.alpha).abs() <= tol * c.alpha.abs().max(1.0)
                && (action_t0.abs() - c.action_t0.abs()).abs() <= tol * c.action_t0.abs()
        })
        .map(|c| condition_from_odd_pair(c.pair, c.sign, beta_sign).expect("valid pair"))
}

//! Complete population transfer in a degenerate three-level atom.
//!
//! The crate is organised bottom-up:
//!
//! * [`cubic`] and [`dressed`] solve the dressed-state eigenproblem and evaluate
//!   the general analytic populations.
//! * [`transfer`] enumerates the odd-integer families of complete-transfer
//!   conditions and their closed-form populations.
//! * [`pulses`] holds the drive profiles `V(t)` and their action integrals.
//! * [`propagator`] integrates the exact amplitude equations with fixed-step
//!   RK4 and serves as the independent oracle for everything above.
//! * [`leakage`] covers nearly degenerate levels and the two-level reference.
//! * [`report`] builds the tables, traces and scans written by the CLI.
//!
//! Units: `ħ = 1`, energies and `V(t)` in angular-frequency units, actions
//! dimensionless.

// `!(x > tol)` also rejects NaN, which is the point.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cubic;
pub mod dressed;
pub mod leakage;
pub mod propagator;
pub mod pulses;
pub mod report;
pub mod transfer;

pub use dressed::{
    amplitudes_at, build_dressed_basis, populations_general, solve_cubic, AmplitudeState,
    CouplingRatios, DressedBasis, DressedError, PopulationSample,
};
pub use propagator::{
    compare_analytic_numeric, integrate, propagate_kick, IntegratorConfig, LevelEnergies,
    PopulationTrace, PropagatorError,
};
pub use pulses::{harmonic_for_condition, ActionValue, Pulse, PulseError};
pub use transfer::{
    classify_cases, condition_for_target, condition_from_odd_pair, enumerate_conditions, p3_max,
    populations_closed_form, validate_condition, CaseClassification, ConditionError, LeveledTarget,
    OddPair, TransferCondition,
};

pub use num_complex::Complex64 as C64;

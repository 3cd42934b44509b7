//! Toolkit for a Caputo fractional-order predator–prey model with infected prey
//! and a type II functional response.
//!
//! * [`mittag_leffler`]: `E_α`, `E_{α,β}` for real arguments.
//! * [`fode`]: fractional Adams–Bashforth–Moulton (PECE) integrator.
//! * [`model`]: right-hand side, equilibria, thresholds and presets.
//! * [`stability`]: Jacobians, characteristic cubic, Matignon classification.
//! * [`verification`]: trajectory-level checks of positivity, boundedness,
//!   Lyapunov decrease, convergence and the Lipschitz constant.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod fode;
pub mod mittag_leffler;
pub mod model;
mod quadrature;
pub mod special;
pub mod stability;
pub mod verification;

pub use error::{Error, Result};
pub use fode::{
    abm_weights, solve_pece, AbmWeights, FodeProblem, SolverConfig, Trajectory, VectorField,
};
pub use mittag_leffler::{ml_one, ml_two, MlQuery};
pub use model::{
    equilibria, rhs, thresholds, EcoEpiModel, Equilibrium, EquilibriumKind, ModelParams, Preset,
    State, Thresholds,
};
pub use stability::{
    characteristic_cubic, classify_equilibrium, cubic_roots, jacobian, matignon_check,
    CubicCharacteristic, EigenSpectrum, MatignonOutcome, StabilityLabel, StabilityVerdict,
};

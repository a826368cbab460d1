//! Finite-difference solvers for the coupled nonlinear Schrödinger equations
//!
//! ```text
//! i U_t + i sigma U_x + k U_xx + (a|U|^2 + b|V|^2) U = 0
//! i V_t - i sigma V_x + k V_xx + (c|V|^2 + d|U|^2) V = 0
//! ```
//!
//! The crate provides a forward-Euler explicit scheme and a six-point
//! Crank–Nicolson scheme, the closed-form stability budget `rho` of the
//! explicit scheme, conservation and error diagnostics, analytic soliton
//! solutions, and presets for the standard numerical experiments.

pub mod analysis;
pub mod config;
pub mod error;
pub mod field;
pub mod presets;
pub mod run;
pub mod scenario;
pub mod schemes;
pub mod tridiag;

pub use analysis::{
    convergence_q, element_bounds, error_vs_oracle, manakov_soliton, matrix_norm_bound, nls_breather_a2,
    nls_fundamental_soliton, stability_rho, ElementBounds, Oracle, OracleError, OracleKind, StabilityBudget, Verdict,
};
pub use config::{load_scenario, serialize_scenario};
pub use error::{Error, Result};
pub use field::{discrete_l2_norm, invariants, max_amplitude, FieldState, Grid, InvariantPair, Physics};
pub use presets::{preset, preset_for_scheme, preset_sweep, PRESET_NAMES};
pub use run::{evolve, EvolveOptions, Observation, Observer, RunRecord, Termination};
pub use scenario::{sample_ic, InitialCondition, PulseShape, Scenario};
pub use schemes::{explicit_step, implicit_step, IterationPolicy, Scheme, StepReport};
pub use tridiag::solve_tridiagonal;

pub use num_complex::Complex64;

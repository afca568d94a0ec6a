//! Solver library for the nonlinear variational wave equation
//! u_tt − c(u)(c(u)u_x)_x = 0 in Riemann-invariant form.
//!
//! The state is the pair of Riemann invariants R = u_t + c(u)u_x and
//! S = u_t − c(u)u_x, advanced by an upwind discretization whose edge
//! speeds and source coefficients are rebuilt from the state itself via the
//! strictly increasing antiderivative F(u) = ∫₀ᵘ 2c. Two time schemes are
//! provided: a method-of-lines system with fixed-step Euler/RK4, and the
//! fully-discrete explicit stepper with staggered u updates. A diagnostics
//! layer tracks every provable discrete quantity (energy balance, invariant
//! domains, L^p monotonicity, the per-cell energy identity, and the
//! higher-integrability functional), and a harness runs grid-refinement
//! studies and persists CSV series.
//!
//! With the default `parallel` feature, per-cell and per-edge work runs on
//! rayon; reductions stay sequential, so outputs are bit-identical with the
//! feature disabled.

pub mod coefficients;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod fulldiscrete;
pub mod grid;
pub mod initial;
mod par;
mod quadrature;
pub mod runner;
pub mod semidiscrete;
pub mod wavespeed;

pub use coefficients::{accumulate_f, reconstruct_u, CoefficientField, Strategy};
pub use config::{parse_config, SchemeKind, SimConfig};
pub use diagnostics::{
    check_invariant_domain, dissipation, energy, higher_integrability_increment, hlem_residual,
    DiagnosticsConfig, DiagnosticsRecord,
};
pub use error::{Error, Result};
pub use fulldiscrete::{
    integrate_explicit, step_explicit, update_u_space, update_u_time, ExplicitOptions, FullState,
    UUpdate,
};
pub use grid::{Grid, StateRS};
pub use initial::{build_scenario, discretize_uv, Scenario, ScenarioData, ScenarioKind};
pub use runner::{refinement_study, run_checks, run_simulation, RefinementReport, RunSummary};
pub use semidiscrete::{integrate, rhs, rhs_seq, IntegrateOptions, RhsEval, TimeMethod, Trajectory};
pub use wavespeed::{ModelKind, WaveSpeedModel};

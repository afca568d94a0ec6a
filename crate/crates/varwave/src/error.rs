//! Error type shared across the solver, diagnostics and CLI layers.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("quadrature failed to reach relative tolerance {rel_tol} on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64, rel_tol: f64 },

    #[error("no bracket found while inverting F (target {target}); input non-finite or model bounds broken")]
    BracketFailure { target: f64 },

    #[error("edge solve failed to converge at edge {edge}: {detail}")]
    NewtonFailure { edge: usize, detail: String },

    #[error("CFL violation: dt*c/dx = {ratio} > 1 (dt = {dt}, dx = {dx})")]
    CflViolation { dt: f64, dx: f64, ratio: f64 },

    #[error("solution blew up at t = {t}: max |R|,|S| = {max_abs} exceeded threshold {threshold}")]
    BlowupDetected { t: f64, max_abs: f64, threshold: f64 },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("config parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown config key `{key}` at line {line}")]
    UnknownKey { line: usize, key: String },

    #[error("config value out of range for `{key}`: {msg}")]
    Range { key: String, msg: String },

    #[error("required config key `{0}` is missing")]
    MissingKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

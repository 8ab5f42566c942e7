//! Numerical verification library for the explicit objects appearing in a
//! two-soliton inelasticity analysis of the 5D energy-critical wave equation
//! ∂t²u − Δu = |u|^{4/3}u: the ground state and its boosts, the linearized
//! operator, exact linear-wave propagators, dispersive-tail asymptotics,
//! soliton-interaction coefficients, and channels-of-energy diagnostics.
//!
//! All fields of interest are axisymmetric about the x₁-axis, so every ℝ⁵
//! integral reduces to adaptive 2D quadrature; radial objects reduce further
//! to weighted 1D quadrature.

pub mod channels;
pub mod fields;
pub mod ground_state;
pub mod interaction;
pub mod linear_wave;
pub mod quad;
pub mod radial_reduction;
pub mod report;
pub mod scenario;
pub mod tail;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("quadrature did not converge: {0}")]
    Convergence(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("independent methods disagree: {0}")]
    MethodDisagreement(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("invalid data: {0}")]
    InvalidData(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

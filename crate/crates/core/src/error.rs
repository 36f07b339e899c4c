//! Error type shared by every stage of the pipeline.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A field or chart was handed a point of the wrong dimension.
    Arity { expected: usize, got: usize },
    /// Jet operands with conflicting seed counts in one evaluation.
    SeedCount { expected: usize, got: usize },
    /// A constructor rejected its inputs.
    Construction(String),
    /// A tolerance/grid configuration is out of range.
    InvalidConfig(String),
    /// A point left the admissible domain (U-predicate, I(x) = 0, ...).
    DomainViolation { context: &'static str, point: Vec<f64> },
    /// The rescaling factor vanished: the chart degenerates at this point.
    RankDegeneracy { point: Vec<f64> },
    /// A dense linear solve hit a zero pivot.
    SingularMatrix { context: &'static str },
    /// Newton inversion of the chart did not reach tolerance.
    InversionFailure { residual: f64, target: Vec<f64> },
    /// The cylindrical change of variables is undefined for r this small.
    PolarSingularity { r: f64 },
    /// The angular speed left the averaging regime at this point.
    SlowAngle { theta: f64, theta_dot: f64 },
    /// Node doubling stopped improving before reaching tolerance.
    QuadratureDivergence { last_delta: f64 },
    /// The integrator exhausted its step budget.
    StepLimit { at: f64 },
    /// Step-size control collapsed (usually a guard firing inside a stage).
    StepUnderflow { at: f64 },
    /// The Poincare shooting iteration failed to converge.
    ShootDivergence { residual: f64 },
    /// A NaN or infinity appeared where a finite value is required.
    NonFinite { context: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Arity { expected, got } => {
                write!(f, "arity mismatch: expected {expected}, got {got}")
            }
            Error::SeedCount { expected, got } => {
                write!(f, "jet seed count mismatch: expected {expected}, got {got}")
            }
            Error::Construction(msg) => write!(f, "construction error: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::DomainViolation { context, point } => {
                write!(f, "domain violation ({context}) at {point:?}")
            }
            Error::RankDegeneracy { point } => {
                write!(f, "rescaling factor vanished at y = {point:?}")
            }
            Error::SingularMatrix { context } => write!(f, "singular matrix in {context}"),
            Error::InversionFailure { residual, target } => {
                write!(f, "chart inversion failed at y = {target:?} (residual {residual:e})")
            }
            Error::PolarSingularity { r } => write!(f, "polar singularity: r = {r:e}"),
            Error::SlowAngle { theta, theta_dot } => {
                write!(f, "slow angle at theta = {theta}: d(theta)/d(tau) = {theta_dot}")
            }
            Error::QuadratureDivergence { last_delta } => {
                write!(f, "quadrature did not converge (last delta {last_delta:e})")
            }
            Error::StepLimit { at } => write!(f, "integrator step limit reached at {at}"),
            Error::StepUnderflow { at } => write!(f, "integrator step size underflow at {at}"),
            Error::ShootDivergence { residual } => {
                write!(f, "shooting diverged (residual {residual:e})")
            }
            Error::NonFinite { context } => write!(f, "non-finite value in {context}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

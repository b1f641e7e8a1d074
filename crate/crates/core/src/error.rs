use thiserror::Error;

use crate::dsl::ParseError;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by a jet whose constant term {0:e} is below the degeneracy threshold")]
    DivisionByZeroJet(f64),
    #[error("square root of a jet with non-positive constant term {0:e}")]
    NegativeSqrtJet(f64),
    #[error("jet order {available} is too small, {needed} required")]
    OrderExceeded { needed: usize, available: usize },
    #[error("finite-difference step {0:e} is below 1e-8")]
    StepUnderflow(f64),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("fundamental tensor is not positive definite at x={x:?}, y={y:?} (smallest eigenvalue {min_eigenvalue:e})")]
    NotPositiveDefinite {
        x: Vec<f64>,
        y: Vec<f64>,
        min_eigenvalue: f64,
    },
    #[error("point {0:?} is outside the metric domain")]
    DomainViolation(Vec<f64>),
    #[error("fundamental tensor is singular (condition number {0:e})")]
    SingularMetric(f64),
    #[error("flag is degenerate (denominator {0:e})")]
    DegenerateFlag(f64),
    #[error("metric is not of scalar flag curvature here (fit residual {0:e})")]
    NotScalarFlag(f64),
    #[error("Cartan torsion vanishes; the quantity is undetermined")]
    RiemannianDegenerate,
    #[error("operation requires a surface (n = 2), got n = {0}")]
    NotASurface(usize),
    #[error("geodesic left the metric domain at t = {0}")]
    LeftDomain(f64),
    #[error("generalized isotropic Berwald fit failed (residual {residual:e} at t = {t})")]
    FitFailed { t: f64, residual: f64 },
    #[error("no admissible point found in {0} draws")]
    EmptyDomain(usize),
    #[error("invalid base point: {0}")]
    InvalidPoint(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZeroJet(_) => "division_by_zero_jet",
            Error::NegativeSqrtJet(_) => "negative_sqrt_jet",
            Error::OrderExceeded { .. } => "order_exceeded",
            Error::StepUnderflow(_) => "step_underflow",
            Error::Parse(_) => "parse",
            Error::NotPositiveDefinite { .. } => "not_positive_definite",
            Error::DomainViolation(_) => "domain_violation",
            Error::SingularMetric(_) => "singular_metric",
            Error::DegenerateFlag(_) => "degenerate_flag",
            Error::NotScalarFlag(_) => "not_scalar_flag",
            Error::RiemannianDegenerate => "riemannian_degenerate",
            Error::NotASurface(_) => "not_a_surface",
            Error::LeftDomain(_) => "left_domain",
            Error::FitFailed { .. } => "fit_failed",
            Error::EmptyDomain(_) => "empty_domain",
            Error::InvalidPoint(_) => "invalid_point",
        }
    }
}

use thiserror::Error;

/// Errors raised by model construction, operator assembly and the numerical kernels.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid sector labels: {0}")]
    InvalidSector(String),

    #[error("invalid reference state: {0}")]
    InvalidReference(String),

    #[error("nonzero z^-1 remainder {0:e} in lowering term (label bug)")]
    SingularLowering(f64),

    #[error("negative radicand {value:e} at basis index {index}")]
    NegativeRadicand { index: usize, value: f64 },

    #[error("matrix is not symmetric (asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("{method} did not converge after {iterations} iterations")]
    NoConvergence { method: &'static str, iterations: usize },

    #[error("zero polynomial has no roots")]
    ZeroPolynomial,

    #[error("singular Jacobian in Newton iteration")]
    SingularJacobian,

    #[error("Newton line search failed to decrease the residual (|F| = {0:e})")]
    NoDecrease(f64),

    #[error("vanishing leading coefficient of eigenfunction in sector {0}")]
    VanishingLeadingCoefficient(String),

    #[error("energy cross-check mismatch: closed form {closed:e} vs coefficient ratio {ratio:e}")]
    EnergyMismatch { closed: f64, ratio: f64 },

    #[error("coincident roots {0} and {1}; residuals undefined")]
    CoincidentRoots(usize, usize),

    #[error("energy has imaginary part {imag:e} (scale {scale:e})")]
    ComplexEnergy { imag: f64, scale: f64 },

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("missing preset parameter `{0}`")]
    MissingParam(String),

    #[error("sector incompatible with preset: {0}")]
    IncompatiblePreset(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("output error: {0}")]
    Output(String),
}

pub type Result<T> = std::result::Result<T, Error>;

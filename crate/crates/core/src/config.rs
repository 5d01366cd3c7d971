use serde::{Deserialize, Serialize};

/// Numerical tolerances used across the solver. All defaults live here.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Jacobi stopping threshold, relative to the Frobenius norm.
    pub eigen: f64,
    /// Aberth–Ehrlich step tolerance, relative to root magnitude.
    pub roots: f64,
    /// Newton residual target.
    pub newton: f64,
    /// Scaled Bethe-equation residual bound.
    pub bae: f64,
    /// Relative tolerance for spectrum matching.
    pub matching: f64,
    /// Relative tolerance for algebra identities and polynomial regressions.
    pub algebra: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen: 1e-12,
            roots: 1e-10,
            newton: 1e-10,
            bae: 1e-6,
            matching: 1e-8,
            algebra: 1e-10,
        }
    }
}

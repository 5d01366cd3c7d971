//! Dense numerical kernels: symmetric eigensolver, polynomial roots, damped Newton.

mod jacobi;
mod newton;
mod roots;

pub use jacobi::{jacobi_eigen, EigenDecomposition};
pub use newton::{newton_solve, NewtonOutcome};
pub use roots::{polynomial_roots, RootSet};

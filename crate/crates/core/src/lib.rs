//! Spin-boson Hamiltonians with polynomial deformations of su(2), solved sector
//! by sector through a differential realization and its polynomial
//! eigenfunctions, and cross-checked by direct diagonalization.

pub mod bethe;
pub mod config;
pub mod error;
pub mod exec;
pub mod fock;
pub mod linalg;
pub mod model;
pub mod operator;
pub mod presets;
pub mod rational;
pub mod report;
pub mod representation;
pub mod verify;

pub use bethe::{
    bae_residuals, energy_from_roots, newton_refine_bae, recover_roots, solve_sector, solve_sectors,
    BetheState, SectorContext, SolveOptions,
};
pub use config::Tolerances;
pub use error::{Error, Result};
pub use exec::Exec;
pub use fock::{charge_commutators, fock_blocks, fock_oracle, FockBlock};
pub use model::{
    enumerate_sectors, lambda_of, sector_dimension, sector_from_reference, validate_model,
    ModelSpec, ReferenceState, SectorLabels,
};
pub use presets::{preset, Form, PresetName, ERRATA};
pub use operator::{build_hamiltonian_operator, extract_polynomials, EulerOperator, Poly};

pub use rational::Rational;
pub use report::SpectrumReport;
pub use representation::{
    check_algebra, check_algebra_matrices, monomial_conjugation_check, sector_matrices,
    AlgebraDiagnostics, SectorMatrices,
};

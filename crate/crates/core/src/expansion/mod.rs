//! Perturbative coefficients around the quadratic Hamiltonian: Taylor tables,
//! operator coefficients `H_j`, energies, spectral projectors, wavefunctions
//! and one-particle density matrices.

mod operators;
mod perturbation;
mod rdm;
mod result;
mod taylor;

pub use operators::{build_hj, remainder_identity_check, remainder_operator, OperatorCoefficients, RemainderReport};
pub use perturbation::{
    chi_tilde_iterative, convolution_residuals, energy_coefficients, energy_coefficients_iterative,
    energy_terms_iterative, hs_inner, kappa, projector_coefficients, wavefunction_coefficients,
    wavefunction_projectors, LevelContext, WavefunctionCoefficients, MAX_ORDER,
};
pub use rdm::{rdm1_coefficients, torus_rdm1_closed_form, RdmCoefficients};
pub use result::{expand, expand_level, Diagnostics, ExpansionResult, LevelExpansion, TRUNCATION_TOL};
pub use taylor::{
    linear_remainder, linear_root, pair_remainder, pair_root, scalar_remainder_check, taylor_coefficients,
    CoefficientTable, ScalarRemainder, ScalarRemainderReport,
};

#[cfg(test)]
mod tests;

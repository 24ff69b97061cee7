//! Occupation bases, ladder operators, the N-body Hamiltonian, the excitation
//! map and the excitation Hamiltonian.

mod basis;
mod build;
mod operator;

pub use basis::{FockBasis, NParticleBasis, Occupation, OccupationBasis};
pub use build::{
    build_excitation_hamiltonian, build_hn, build_kops, excitation_map, excitation_map_for, ladder,
    number_dependent_hamiltonian, number_operator, second_quantize, Kops, Ladder, Monomial,
};
pub use operator::FockOperator;

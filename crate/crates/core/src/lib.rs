//! Perturbative expansion of low-energy spectral data of mean-field Bose gases
//! around Bogoliubov theory, on finite mode bases and truncated Fock spaces.

pub mod bogoliubov;
pub mod combinatorics;
pub mod error;
pub mod expansion;
pub mod linalg;
pub mod fock;
pub mod model;
pub mod verify;

pub use error::{Error, Result};

//! Expectation values of symmetrized m-body observables: series against exact.

use super::study::{one_body_observable, two_body_observable, StudySetup};
use crate::error::{Error, Result};
use crate::expansion::expand_level;
use crate::fock::OccupationBasis;
use crate::linalg::CMatrix;
use serde::Serialize;

/// A one- or two-body Hermitian operator on the model modes.
#[derive(Debug, Clone)]
pub enum Observable {
    OneBody(CMatrix),
    /// Indexed by `(m M + n, p M + q)`.
    TwoBody(CMatrix),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSeries {
    #[serde(rename = "N")]
    pub particles: usize,
    pub level: usize,
    /// `Tr A_N P_l` for `l = 0 .. a` (coefficients of `lambda^{l/2}`).
    pub coefficients: Vec<f64>,
    pub partial_sums: Vec<f64>,
    /// `Tr A P_N` from exact diagonalization.
    pub exact: f64,
}

/// Builds the symmetrized observable on the N-particle space, conjugates it
/// with the excitation map, compresses it to the coefficient cutoff and pairs
/// it with the projector coefficients of level `n`.
pub fn observable_expansion(
    setup: &StudySetup,
    observable: &Observable,
    particles: usize,
    n: usize,
    a: usize,
) -> Result<ObservableSeries> {
    let m = setup.model.modes();
    let (matrix, order) = match observable {
        Observable::OneBody(x) => (x, 1),
        Observable::TwoBody(x) => (x, 2),
    };
    if matrix.nrows() != m.pow(order) || matrix.ncols() != m.pow(order) {
        return Err(Error::DimensionMismatch {
            expected: m.pow(order),
            found: matrix.nrows(),
        });
    }
    if order as usize > particles {
        return Err(Error::InvalidArgument(format!("a {order}-body observable needs N >= {order}")));
    }
    let exact = setup.exact(particles)?;
    let basis = &exact.spectrum.basis;
    let dense = match observable {
        Observable::OneBody(x) => one_body_observable(x, basis),
        Observable::TwoBody(x) => two_body_observable(x, basis),
    };
    let level = expand_level(&setup.kernels, setup.nmax.min(particles), n, a)?;
    let cl = setup.cluster(&level, particles, n)?;
    let psi = exact.spectrum.vectors.select_columns(&cl.columns);
    let exact_value = (psi.adjoint() * &dense * &psi).trace().re;
    let conjugated = &exact.map * &dense * exact.map.adjoint();
    let d = level.basis.dim();
    let block = conjugated.view((0, 0), (d, d)).into_owned();
    let coefficients: Vec<f64> = level.projectors.iter().map(|p| (&block * p).trace().re).collect();
    let lam = 1.0 / (particles as f64 - 1.0);
    let mut acc = 0.0;
    let partial_sums = coefficients
        .iter()
        .enumerate()
        .map(|(l, c)| {
            acc += lam.powf(l as f64 / 2.0) * c;
            acc
        })
        .collect();
    Ok(ObservableSeries {
        particles,
        level: n,
        coefficients,
        partial_sums,
        exact: exact_value,
    })
}

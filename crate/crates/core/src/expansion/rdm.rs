//! One-particle reduced density matrix coefficients.

use crate::error::{Error, Result};
use crate::fock::{ladder, number_operator, FockBasis, OccupationBasis};
use crate::linalg::{re, CMatrix, C64};
use crate::model::{Kernels, TorusSpec};
use std::sync::Arc;

/// `Tr(A P)` for dense `A`, `P`.
fn trace_product(a: &CMatrix, p: &CMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..a.nrows() {
        for s in 0..a.ncols() {
            acc += a[(r, s)] * p[(s, r)];
        }
    }
    acc
}

/// The first two 1-RDM coefficients in the model basis.
#[derive(Debug, Clone)]
pub struct RdmCoefficients {
    /// `delta |phi><phi|`.
    pub leading: CMatrix,
    /// `gamma~_{1;1}` assembled from `Tr a*_y P_1`, `Tr a_x P_1`,
    /// `Tr a*_y a_x P_0` and `Tr P_0 N`.
    pub first: CMatrix,
    /// The same coefficient in the `h` eigenbasis (index 0 is `phi`).
    pub first_h_basis: CMatrix,
}

/// `gamma~_{1;1}(x; y) = phi(x) Tr a*_y P_1 + conj(phi(y)) Tr a_x P_1 + Tr a*_y a_x P_0 - phi(x) conj(phi(y)) Tr P_0 N`.
pub fn rdm1_coefficients(kernels: &Kernels, basis: &Arc<FockBasis>, p0: &CMatrix, p1: &CMatrix) -> Result<RdmCoefficients> {
    let e = kernels.excitation_modes();
    if basis.modes() != e || p0.nrows() != basis.dim() || p1.nrows() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: p0.nrows(),
        });
    }
    let m = e + 1;
    let lowers: Vec<CMatrix> = (1..=e)
        .map(|mode| ladder(basis, mode).map(|l| l.lower.to_dense()))
        .collect::<Result<_>>()?;
    let raises: Vec<CMatrix> = lowers.iter().map(|l| l.adjoint()).collect();
    let mut g = CMatrix::zeros(m, m);
    g[(0, 0)] = -trace_product(&number_operator(basis).to_dense(), p0);
    for i in 0..e {
        g[(0, i + 1)] = trace_product(&raises[i], p1);
        g[(i + 1, 0)] = trace_product(&lowers[i], p1);
        for j in 0..e {
            g[(i + 1, j + 1)] = trace_product(&(&raises[j] * &lowers[i]), p0);
        }
    }
    let delta = p0.trace().re.round();
    let b = &kernels.basis;
    let phi = b.column(0);
    Ok(RdmCoefficients {
        leading: phi * phi.adjoint() * re(delta),
        first: b * &g * b.adjoint(),
        first_h_basis: g,
    })
}

/// `-sum_{k != 0} gamma_k^2 |phi><phi| + sum_{k != 0} gamma_k^2 |phi_k><phi_k|` on the
/// plane-wave basis, with `gamma_k = alpha_k (1 - alpha_k^2)^{-1/2}` and
/// `alpha_k = g / (k^2 + g + sqrt(k^4 + 2 k^2 g))`, `g` the kernel coefficient at `k`.
pub fn torus_rdm1_closed_form(spec: &TorusSpec) -> CMatrix {
    let momenta = spec.momenta();
    let mut out = CMatrix::zeros(momenta.len(), momenta.len());
    let mut total = 0.0;
    let mut zero_index = 0;
    for (i, k) in momenta.iter().enumerate() {
        let k2 = k.iter().map(|x| (x * x) as f64).sum::<f64>();
        if k2 == 0.0 {
            zero_index = i;
            continue;
        }
        let g = spec.kernel_coefficient(k);
        let alpha = g / (k2 + g + (k2 * k2 + 2.0 * k2 * g).sqrt());
        let gamma2 = alpha * alpha / (1.0 - alpha * alpha);
        out[(i, i)] = re(gamma2);
        total += gamma2;
    }
    out[(zero_index, zero_index)] = re(-total);
    out
}

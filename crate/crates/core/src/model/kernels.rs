use super::{mean_field_matrix, HartreeSolution, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{canonical_span_basis, cluster_sorted, complement_basis, eigh, CMatrix, CVector, C64, ZERO};

/// Interaction kernels in the eigenbasis `{phi_0 = phi, phi_1, ...}` of `h`.
///
/// The projected kernels `k1`..`k4` live on the excitation modes only; index
/// `i` of these arrays refers to basis vector `phi_{i+1}`.
#[derive(Debug, Clone)]
pub struct Kernels {
    modes: usize,
    /// Columns are the `h` eigenvectors in model coordinates; column 0 is `phi`.
    pub basis: CMatrix,
    /// Eigenvalues of `h` per basis vector; `epsilon[0] = 0`.
    pub epsilon: Vec<f64>,
    /// Exchange kernel `K[m,n] = V[m,0,0,n]` in the `h` eigenbasis.
    pub k: CMatrix,
    pub k1: CMatrix,
    pub k2: CMatrix,
    k3: Vec<C64>,
    k4: Vec<C64>,
    w: Vec<C64>,
}

fn transform_tensor(model: &ModelSpec, basis: &CMatrix) -> Vec<C64> {
    let d = model.modes();
    let mut current: Vec<C64> = model.interaction().to_vec();
    // Contract one index at a time; bra indices with conj(B), ket indices with B.
    for slot in 0..4 {
        let mut next = vec![ZERO; d.pow(4)];
        let stride = d.pow(3 - slot as u32);
        for idx in 0..d.pow(4) {
            let digit = (idx / stride) % d;
            let base = idx - digit * stride;
            let mut acc = ZERO;
            for old in 0..d {
                let coeff = if slot < 2 { basis[(old, digit)].conj() } else { basis[(old, digit)] };
                acc += coeff * current[base + old * stride];
            }
            next[idx] = acc;
        }
        current = next;
    }
    current
}

/// Eigenbasis of `h` with `phi` first; degenerate clusters are replaced by a
/// canonical basis of their span so the result does not depend on the eigensolver.
pub(crate) fn h_eigenbasis(sol: &HartreeSolution) -> (CMatrix, Vec<f64>) {
    let d = sol.phi.len();
    let complement = complement_basis(&sol.phi);
    let reduced = complement.adjoint() * &sol.h * &complement;
    let (values, vectors) = eigh(&reduced);
    let mut basis = CMatrix::zeros(d, d);
    basis.set_column(0, &sol.phi);
    let mut epsilon = vec![0.0; d];
    let full = &complement * &vectors;
    for group in cluster_sorted(&values, 1e-8) {
        let span = full.columns(group.start, group.len()).into_owned();
        let canonical = canonical_span_basis(&span);
        for (offset, col) in group.clone().enumerate() {
            let v: CVector = canonical.column(offset).into_owned();
            epsilon[col + 1] = v.dotc(&(&sol.h * &v)).re;
            basis.set_column(col + 1, &v);
        }
    }
    (basis, epsilon)
}

/// Builds `K`, `K1`..`K4` and `W` in the eigenbasis of `h`.
pub fn build_kernels(sol: &HartreeSolution, model: &ModelSpec) -> Result<Kernels> {
    let d = model.modes();
    if sol.phi.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            found: sol.phi.len(),
        });
    }
    let (basis, epsilon) = h_eigenbasis(sol);
    let vh = transform_tensor(model, &basis);
    let vphi = basis.adjoint() * mean_field_matrix(model, &sol.phi) * &basis;
    let c = vphi[(0, 0)];
    let at = |m: usize, n: usize, p: usize, q: usize| vh[((m * d + n) * d + p) * d + q];
    let delta = |a: usize, b: usize| if a == b { C64::new(1.0, 0.0) } else { ZERO };
    let mut w = vec![ZERO; d.pow(4)];
    for m in 0..d {
        for n in 0..d {
            for p in 0..d {
                for q in 0..d {
                    w[((m * d + n) * d + p) * d + q] = at(m, n, p, q) - vphi[(m, p)] * delta(n, q)
                        - delta(m, p) * vphi[(n, q)]
                        + c * delta(m, p) * delta(n, q);
                }
            }
        }
    }
    let e = d - 1;
    let wat = |m: usize, n: usize, p: usize, q: usize| w[((m * d + n) * d + p) * d + q];
    let k = CMatrix::from_fn(d, d, |m, n| at(m, 0, 0, n));
    let k1 = CMatrix::from_fn(e, e, |m, n| wat(m + 1, 0, 0, n + 1));
    let k2 = CMatrix::from_fn(e, e, |m, n| wat(m + 1, n + 1, 0, 0));
    let mut k3 = vec![ZERO; e.pow(3)];
    let mut k4 = vec![ZERO; e.pow(4)];
    for m in 0..e {
        for n in 0..e {
            for p in 0..e {
                k3[(m * e + n) * e + p] = wat(m + 1, n + 1, p + 1, 0);
                for q in 0..e {
                    k4[((m * e + n) * e + p) * e + q] = wat(m + 1, n + 1, p + 1, q + 1);
                }
            }
        }
    }
    Ok(Kernels {
        modes: d,
        basis,
        epsilon,
        k,
        k1,
        k2,
        k3,
        k4,
        w,
    })
}

impl Kernels {
    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn excitation_modes(&self) -> usize {
        self.modes - 1
    }

    /// `W[m,n,p,q]` over all `h` eigenbasis indices.
    #[inline]
    pub fn w(&self, m: usize, n: usize, p: usize, q: usize) -> C64 {
        let d = self.modes;
        self.w[((m * d + n) * d + p) * d + q]
    }

    /// `K3[m,n;p] = W[m,n,p,0]` on excitation indices.
    #[inline]
    pub fn k3(&self, m: usize, n: usize, p: usize) -> C64 {
        let e = self.modes - 1;
        self.k3[(m * e + n) * e + p]
    }

    /// `K4[m,n,p,q] = W[m,n,p,q]` on excitation indices.
    #[inline]
    pub fn k4(&self, m: usize, n: usize, p: usize, q: usize) -> C64 {
        let e = self.modes - 1;
        self.k4[((m * e + n) * e + p) * e + q]
    }

    /// Excitation energies `epsilon_1, ..., epsilon_{M-1}`.
    pub fn excitation_energies(&self) -> &[f64] {
        &self.epsilon[1..]
    }

    /// `h` restricted to the excitation modes (diagonal up to round-off).
    pub fn h_perp(&self) -> CMatrix {
        let e = self.modes - 1;
        CMatrix::from_fn(e, e, |i, j| if i == j { C64::new(self.epsilon[i + 1], 0.0) } else { ZERO })
    }

    /// Excitation columns of the basis (model coordinates).
    pub fn excitation_basis(&self) -> CMatrix {
        self.basis.columns(1, self.modes - 1).into_owned()
    }

    /// `K2` as a two-particle function in model coordinates, `B K2 B^T`.
    pub fn k2_model(&self) -> CMatrix {
        let b = self.excitation_basis();
        &b * &self.k2 * b.transpose()
    }

    /// `K1` as an operator in model coordinates, `B K1 B^dagger`.
    pub fn k1_model(&self) -> CMatrix {
        let b = self.excitation_basis();
        &b * &self.k1 * b.adjoint()
    }

    /// `K3` in model coordinates, flattened as `[(x * M + y) * M + z]` for
    /// the map from index `z` to the pair `(x, y)`.
    pub fn k3_model(&self) -> Vec<C64> {
        let d = self.modes;
        let e = d - 1;
        let b = self.excitation_basis();
        let mut out = vec![ZERO; d.pow(3)];
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    let mut acc = ZERO;
                    for m in 0..e {
                        for n in 0..e {
                            for p in 0..e {
                                acc += b[(x, m)] * b[(y, n)] * self.k3(m, n, p) * b[(z, p)].conj();
                            }
                        }
                    }
                    out[(x * d + y) * d + z] = acc;
                }
            }
        }
        out
    }

    /// `K4` as an operator on pairs (rows `(m,n)`, columns `(p,q)`).
    pub fn k4_pair_matrix(&self) -> CMatrix {
        let e = self.modes - 1;
        CMatrix::from_fn(e * e, e * e, |r, c| self.k4(r / e, r % e, c / e, c % e))
    }
}

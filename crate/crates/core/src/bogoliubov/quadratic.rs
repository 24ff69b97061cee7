use crate::error::{Error, Result};
use crate::linalg::{eigh, hermitian_function, max_abs_diff, psd_sqrt, re, CMatrix, CVector, C64};
use crate::model::Kernels;

/// Block pair `(U, V)` of a Bogoliubov map `[[U, conj V], [V, conj U]]`.
#[derive(Debug, Clone)]
pub struct BogoliubovMap {
    pub u: CMatrix,
    pub v: CMatrix,
}

impl BogoliubovMap {
    /// Largest residual of the four defining relations
    /// `U*U = 1 + V*V`, `UU* = 1 + conj(V) conj(V)*`, `V* conj(U) = U* conj(V)`,
    /// `UV* = conj(V) conj(U)*`.
    pub fn relation_residual(&self) -> f64 {
        let e = self.u.nrows();
        let id = CMatrix::identity(e, e);
        let (u, v) = (&self.u, &self.v);
        let (ub, vb) = (u.conjugate(), v.conjugate());
        [
            max_abs_diff(&(u.adjoint() * u), &(&id + v.adjoint() * v)),
            max_abs_diff(&(u * u.adjoint()), &(&id + &vb * vb.adjoint())),
            max_abs_diff(&(v.adjoint() * &ub), &(u.adjoint() * &vb)),
            max_abs_diff(&(u * v.adjoint()), &(&vb * ub.adjoint())),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// `C_V = 2 ||V||_HS^2 + ||U||_op^2 + 1`.
    pub fn number_bound_constant(&self) -> f64 {
        let hs = self.v.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let op = self.u.singular_values().iter().copied().fold(0.0, f64::max);
        2.0 * hs + op * op + 1.0
    }

    pub fn hilbert_schmidt_v(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

/// Result of the symplectic diagonalization of the quadratic Hamiltonian.
#[derive(Debug, Clone)]
pub struct QuadraticDiagonalization {
    pub map: BogoliubovMap,
    /// Quasiparticle energies, ascending.
    pub d: Vec<f64>,
    /// Ground-state energy `(sum d - Tr A) / 2`.
    pub e00: f64,
    /// `A = h_perp + K1`.
    pub a: CMatrix,
    /// `B = K2`.
    pub b: CMatrix,
}

/// The block matrix `[[A, B], [conj B, conj A]]`.
pub fn block_matrix(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let e = a.nrows();
    let mut m = CMatrix::zeros(2 * e, 2 * e);
    m.view_mut((0, 0), (e, e)).copy_from(a);
    m.view_mut((0, e), (e, e)).copy_from(b);
    m.view_mut((e, 0), (e, e)).copy_from(&b.conjugate());
    m.view_mut((e, e), (e, e)).copy_from(&a.conjugate());
    m
}

/// Symplectic diagonalization of `H_0 = a* A a + 1/2 (a* B a* + h.c.)` with
/// `A = h_perp + K1`, `B = K2`.
///
/// With `K = sqrt(block)` and `S = diag(1, -1)`, the Hermitian matrix `K S K`
/// has eigenvalues `+-d`; each positive eigenvector `w` gives the column
/// `sqrt(d) K^{-1} w = (p; q)` of the diagonalizing map, whose blocks are `U = P`, `V = Q`.
pub fn diagonalize_quadratic(kernels: &Kernels) -> Result<QuadraticDiagonalization> {
    let a = kernels.h_perp() + &kernels.k1;
    let a = (&a + a.adjoint()) * re(0.5);
    let b = (&kernels.k2 + kernels.k2.transpose()) * re(0.5);
    diagonalize_blocks(a, b)
}

pub fn diagonalize_blocks(a: CMatrix, b: CMatrix) -> Result<QuadraticDiagonalization> {
    let e = a.nrows();
    if e == 0 {
        return Ok(QuadraticDiagonalization {
            map: BogoliubovMap {
                u: CMatrix::zeros(0, 0),
                v: CMatrix::zeros(0, 0),
            },
            d: Vec::new(),
            e00: 0.0,
            a,
            b,
        });
    }
    let block = block_matrix(&a, &b);
    let (values, _) = eigh(&block);
    if values[0] <= 1e-12 {
        return Err(Error::ModelDegeneracy {
            min_eigenvalue: values[0],
        });
    }
    let k = psd_sqrt(&block);
    let k_inv = hermitian_function(&block, |x| 1.0 / x.max(1e-14).sqrt());
    let mut signature = CMatrix::identity(2 * e, 2 * e);
    for i in e..2 * e {
        signature[(i, i)] = re(-1.0);
    }
    let (eigenvalues, vectors) = eigh(&(&k * &signature * &k));
    let mut u = CMatrix::zeros(e, e);
    let mut v = CMatrix::zeros(e, e);
    let mut d = Vec::with_capacity(e);
    for (j, col) in (e..2 * e).enumerate() {
        let dj = eigenvalues[col];
        let w: CVector = vectors.column(col).into_owned();
        let mut t = &k_inv * w * re(dj.sqrt());
        // phase: largest entry of the U-part real positive
        let upper = t.rows(0, e).into_owned();
        let pivot = upper.iter().enumerate().fold(0, |best, (i, z)| {
            if z.norm() > upper[best].norm() * (1.0 + 1e-10) {
                i
            } else {
                best
            }
        });
        let phase: C64 = upper[pivot].conj() / upper[pivot].norm();
        t *= phase;
        u.set_column(j, &t.rows(0, e));
        v.set_column(j, &t.rows(e, e));
        d.push(dj);
    }
    let e00 = 0.5 * (d.iter().sum::<f64>() - a.trace().re);
    Ok(QuadraticDiagonalization {
        map: BogoliubovMap { u, v },
        d,
        e00,
        a,
        b,
    })
}

/// Quasiparticle energies from `sqrt((A+B)^{1/2} (A-B) (A+B)^{1/2})` for real `A`, `B`.
pub fn real_case_energies(a: &CMatrix, b: &CMatrix) -> Vec<f64> {
    let plus = psd_sqrt(&(a + b));
    let inner = &plus * (a - b) * &plus;
    let (values, _) = eigh(&inner);
    values.into_iter().map(|x| x.max(0.0).sqrt()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;
    use crate::model::{build_kernels, build_torus_model, hartree_solve, HartreeOptions, ModelSpec, TorusNormalization, TorusSpec};

    fn kernels_of(model: &ModelSpec) -> Kernels {
        let sol = hartree_solve(model, &HartreeOptions::default()).unwrap();
        build_kernels(&sol, model).unwrap()
    }

    #[test]
    fn free_model_is_trivial() {
        let model = build_torus_model(&TorusSpec::radial(1, 2, &[])).unwrap();
        let q = diagonalize_quadratic(&kernels_of(&model)).unwrap();
        assert!(max_abs(&(&q.map.u - CMatrix::identity(4, 4))) < 1e-12);
        assert!(max_abs(&q.map.v) < 1e-12);
        assert_eq!(q.d, vec![1.0, 1.0, 4.0, 4.0]);
        assert!(q.e00.abs() < 1e-14);
    }

    #[test]
    fn torus_dispersion_and_pair_amplitude() {
        let spec = TorusSpec::radial(1, 1, &[1.5, 1.5, 1.5]).with_normalization(TorusNormalization::KernelCoefficient);
        let model = build_torus_model(&spec).unwrap();
        let q = diagonalize_quadratic(&kernels_of(&model)).unwrap();
        for d in &q.d {
            assert!((d - 2.0).abs() < 1e-12);
        }
        let ratio = &q.map.v * q.map.u.clone().try_inverse().unwrap();
        // modes ordered (-1, +1): the pair amplitude couples them
        assert!((ratio[(0, 1)].re + 1.0 / 3.0).abs() < 1e-12);
        assert!(ratio[(0, 0)].norm() < 1e-12);
        assert!(q.e00 < 0.0);
        assert!(q.map.relation_residual() < 1e-12);
    }

    #[test]
    fn random_model_relations_and_real_cross_check() {
        for seed in 0..4 {
            let model = ModelSpec::random_positive_type(4, 1.5, seed);
            let kernels = kernels_of(&model);
            let q = diagonalize_quadratic(&kernels).unwrap();
            assert!(q.map.relation_residual() < 1e-10);
            assert!(q.d.iter().all(|&x| x > 0.0));
            assert!(q.e00 < 0.0);
            // T* block T = diag(D, D)
            let e = q.d.len();
            let mut t = CMatrix::zeros(2 * e, 2 * e);
            t.view_mut((0, 0), (e, e)).copy_from(&q.map.u);
            t.view_mut((0, e), (e, e)).copy_from(&q.map.v.conjugate());
            t.view_mut((e, 0), (e, e)).copy_from(&q.map.v);
            t.view_mut((e, e), (e, e)).copy_from(&q.map.u.conjugate());
            let diag = t.adjoint() * block_matrix(&q.a, &q.b) * &t;
            for i in 0..2 * e {
                for j in 0..2 * e {
                    let expected = if i == j { q.d[i % e] } else { 0.0 };
                    assert!((diag[(i, j)] - re(expected)).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn real_formula_agrees_on_real_blocks() {
        let a = CMatrix::from_fn(3, 3, |i, j| re(if i == j { 2.0 + i as f64 } else { 0.3 }));
        let b = CMatrix::from_fn(3, 3, |i, j| re(0.2 + 0.1 * (i + j) as f64));
        let q = diagonalize_blocks(a.clone(), b.clone()).unwrap();
        for (x, y) in q.d.iter().zip(real_case_energies(&a, &b)) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}

//! Finite mean-field models, the Hartree minimization and the interaction kernels.

mod hartree;
mod kernels;
mod torus;

pub use hartree::{hartree_energy, hartree_solve, mean_field_matrix, HartreeOptions, HartreeSolution};
pub use kernels::{build_kernels, Kernels};
pub use torus::{build_torus_model, TorusNormalization, TorusSpec};

use crate::error::{check_budget, Error, Result};
use crate::linalg::{eigh, hermiticity_residual, max_abs, re, CMatrix, C64, ZERO};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// One-body matrix plus two-body tensor defining the N-body Hamiltonian
/// `sum_j T_j + (N-1)^{-1} sum_{i<j} v_ij`.
///
/// The tensor entry `V[m,n,p,q]` is `<e_m (x) e_n, v e_p (x) e_q>`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    modes: usize,
    one_body: CMatrix,
    interaction: Vec<C64>,
    pub label: String,
    pub positive_type: bool,
    pub torus_degeneracies: bool,
}

impl ModelSpec {
    /// Validates `one_body` and `interaction` (dense, row-major in `m,n,p,q`).
    ///
    /// The tensor is symmetrized over the two exchange symmetries; inputs
    /// violating them by more than 1e-12 (relative) are rejected.
    pub fn new(one_body: CMatrix, interaction: Vec<C64>, label: impl Into<String>) -> Result<Self> {
        let modes = one_body.nrows();
        if modes == 0 || one_body.ncols() != modes {
            return Err(Error::InvalidModel("one-body matrix must be square and non-empty".into()));
        }
        check_budget("interaction tensor", (modes as u128).pow(4) * 16)?;
        if interaction.len() != modes.pow(4) {
            return Err(Error::DimensionMismatch {
                expected: modes.pow(4),
                found: interaction.len(),
            });
        }
        let scale_t = max_abs(&one_body).max(1.0);
        if hermiticity_residual(&one_body) > 1e-12 * scale_t {
            return Err(Error::InvalidModel("one-body matrix is not Hermitian".into()));
        }
        let one_body = (&one_body + one_body.adjoint()) * re(0.5);
        let scale_v = interaction.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let idx = |m: usize, n: usize, p: usize, q: usize| ((m * modes + n) * modes + p) * modes + q;
        let mut symmetric = vec![ZERO; interaction.len()];
        for m in 0..modes {
            for n in 0..modes {
                for p in 0..modes {
                    for q in 0..modes {
                        let a = interaction[idx(m, n, p, q)];
                        let b = interaction[idx(n, m, q, p)];
                        let c = interaction[idx(p, q, m, n)].conj();
                        let d = interaction[idx(q, p, n, m)].conj();
                        if (a - b).norm() > 1e-12 * scale_v || (a - c).norm() > 1e-12 * scale_v {
                            return Err(Error::InvalidModel(format!(
                                "interaction tensor violates exchange symmetry at ({m},{n},{p},{q})"
                            )));
                        }
                        symmetric[idx(m, n, p, q)] = (a + b + c + d) * 0.25;
                    }
                }
            }
        }
        let mut model = ModelSpec {
            modes,
            one_body,
            interaction: symmetric,
            label: label.into(),
            positive_type: false,
            torus_degeneracies: false,
        };
        model.positive_type = model.min_pair_eigenvalue() >= -1e-10;
        Ok(model)
    }

    /// Model without interaction.
    pub fn free(one_body: CMatrix, label: impl Into<String>) -> Result<Self> {
        let m = one_body.nrows();
        Self::new(one_body, vec![ZERO; m.pow(4)], label)
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn one_body(&self) -> &CMatrix {
        &self.one_body
    }

    pub fn interaction(&self) -> &[C64] {
        &self.interaction
    }

    #[inline]
    pub fn v(&self, m: usize, n: usize, p: usize, q: usize) -> C64 {
        let d = self.modes;
        self.interaction[((m * d + n) * d + p) * d + q]
    }

    pub fn is_interacting(&self) -> bool {
        self.interaction.iter().any(|z| z.norm() > 0.0)
    }

    /// The Hermitian pair matrix `B[(m,p),(n,q)] = V[p,n,m,q]`; the interaction
    /// is of positive type iff this matrix is positive semidefinite.
    pub fn pair_matrix(&self) -> CMatrix {
        let d = self.modes;
        CMatrix::from_fn(d * d, d * d, |row, col| {
            let (m, p) = (row / d, row % d);
            let (n, q) = (col / d, col % d);
            self.v(p, n, m, q)
        })
    }

    pub fn min_pair_eigenvalue(&self) -> f64 {
        if !self.is_interacting() {
            return 0.0;
        }
        eigh(&self.pair_matrix()).0[0]
    }

    /// Random model whose interaction is a non-negative sum of products of
    /// Hermitian matrices, hence of positive type. `strength` scales the tensor.
    pub fn random_positive_type(modes: usize, strength: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rand_c = |rng: &mut ChaCha8Rng| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let mut one_body = CMatrix::from_fn(modes, modes, |_, _| rand_c(&mut rng));
        one_body = (&one_body + one_body.adjoint()) * re(0.5);
        for i in 0..modes {
            one_body[(i, i)] += re(i as f64);
        }
        let terms = modes.max(2);
        let mut interaction = vec![ZERO; modes.pow(4)];
        for _ in 0..terms {
            let weight: f64 = strength * rng.random_range(0.2..1.0);
            let a = CMatrix::from_fn(modes, modes, |_, _| rand_c(&mut rng));
            let a = (&a + a.adjoint()) * re(0.5 / modes as f64);
            for m in 0..modes {
                for n in 0..modes {
                    for p in 0..modes {
                        for q in 0..modes {
                            interaction[((m * modes + n) * modes + p) * modes + q] +=
                                a[(m, p)] * a[(n, q)] * weight;
                        }
                    }
                }
            }
        }
        Self::new(one_body, interaction, format!("random-{modes}-{seed}"))
            .expect("random positive-type construction satisfies all invariants")
    }

    pub fn to_document(&self) -> ModelDocument {
        let d = self.modes;
        let mut sparse = Vec::new();
        for m in 0..d {
            for n in 0..d {
                for p in 0..d {
                    for q in 0..d {
                        let z = self.v(m, n, p, q);
                        if z.norm() > 0.0 {
                            sparse.push((m, n, p, q, z.re, z.im));
                        }
                    }
                }
            }
        }
        ModelDocument {
            modes: d,
            one_body: self.one_body.transpose().iter().map(|z| [z.re, z.im]).collect(),
            interaction: sparse,
            positive_type: self.positive_type,
            label: self.label.clone(),
        }
    }

    pub fn from_document(doc: &ModelDocument) -> Result<Self> {
        let d = doc.modes;
        if doc.one_body.len() != d * d {
            return Err(Error::DimensionMismatch {
                expected: d * d,
                found: doc.one_body.len(),
            });
        }
        let one_body = CMatrix::from_fn(d, d, |i, j| {
            let [a, b] = doc.one_body[i * d + j];
            C64::new(a, b)
        });
        let mut interaction = vec![ZERO; d.pow(4)];
        for &(m, n, p, q, a, b) in &doc.interaction {
            if m.max(n).max(p).max(q) >= d {
                return Err(Error::InvalidModel(format!("tensor index ({m},{n},{p},{q}) out of range")));
            }
            interaction[((m * d + n) * d + p) * d + q] = C64::new(a, b);
        }
        let model = Self::new(one_body, interaction, doc.label.clone())?;
        if doc.positive_type && !model.positive_type {
            return Err(Error::InvalidModel("document claims positive type but the pair matrix is indefinite".into()));
        }
        Ok(model)
    }
}

/// Serialized form of a [`ModelSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    #[serde(rename = "M")]
    pub modes: usize,
    /// Row-major complex pairs.
    #[serde(rename = "T")]
    pub one_body: Vec<[f64; 2]>,
    /// Non-zero entries `(m, n, p, q, re, im)`.
    #[serde(rename = "V")]
    pub interaction: Vec<(usize, usize, usize, usize, f64, f64)>,
    pub positive_type: bool,
    #[serde(default)]
    pub label: String,
}

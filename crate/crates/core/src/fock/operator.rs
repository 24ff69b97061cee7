use super::basis::{FockBasis, OccupationBasis};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64, ZERO};
use nalgebra_sparse::{CooMatrix, CsrMatrix};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::sync::Arc;

/// Sparse operator on a truncated Fock space, tagged with the set of
/// particle-number changes it can produce.
#[derive(Debug, Clone)]
pub struct FockOperator {
    basis: Arc<FockBasis>,
    matrix: CsrMatrix<C64>,
    sector_shift: BTreeSet<i64>,
}

impl FockOperator {
    /// Wraps a sparse matrix; fails if a stored entry changes the particle
    /// number by an amount outside `sector_shift`.
    pub fn new(basis: Arc<FockBasis>, matrix: CsrMatrix<C64>, sector_shift: BTreeSet<i64>) -> Result<Self> {
        let dim = basis.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        for (row, col, value) in matrix.triplet_iter() {
            if *value == ZERO {
                continue;
            }
            let shift = basis.total(row) as i64 - basis.total(col) as i64;
            if !sector_shift.contains(&shift) {
                return Err(Error::Assertion(format!(
                    "entry ({row},{col}) shifts the particle number by {shift}, outside {sector_shift:?}"
                )));
            }
        }
        Ok(FockOperator {
            basis,
            matrix,
            sector_shift,
        })
    }

    pub(crate) fn from_triplets(
        basis: Arc<FockBasis>,
        triplets: impl IntoIterator<Item = (usize, usize, C64)>,
        sector_shift: impl IntoIterator<Item = i64>,
    ) -> Self {
        let dim = basis.dim();
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in triplets {
            if v != ZERO {
                coo.push(r, c, v);
            }
        }
        let matrix = CsrMatrix::from(&coo);
        Self::new(basis, matrix, sector_shift.into_iter().collect()).expect("builder respects sector shifts")
    }

    /// Sparse copy of a dense matrix, dropping entries with modulus `<= tol`.
    /// The sector shifts are read off the surviving entries.
    pub fn from_dense(basis: Arc<FockBasis>, m: &CMatrix, tol: f64) -> Result<Self> {
        let dim = basis.dim();
        if m.nrows() != dim || m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.nrows(),
            });
        }
        let mut triplets = Vec::new();
        let mut shifts = BTreeSet::from([0i64]);
        for c in 0..dim {
            for r in 0..dim {
                let v = m[(r, c)];
                if v.norm() > tol {
                    shifts.insert(basis.total(r) as i64 - basis.total(c) as i64);
                    triplets.push((r, c, v));
                }
            }
        }
        Ok(Self::from_triplets(basis, triplets, shifts))
    }

    pub fn zero(basis: Arc<FockBasis>) -> Self {
        Self::from_triplets(basis, std::iter::empty(), [0])
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        Self::diagonal(basis, |_| 1.0)
    }

    /// Diagonal operator with entry `f(n)` on every state of total number `n`.
    pub fn diagonal(basis: Arc<FockBasis>, f: impl Fn(usize) -> f64) -> Self {
        let numbers = basis.numbers();
        let triplets: Vec<_> = numbers
            .iter()
            .enumerate()
            .map(|(i, &n)| (i, i, C64::new(f(n), 0.0)))
            .collect();
        Self::from_triplets(basis, triplets, [0])
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.matrix
    }

    pub fn sector_shift(&self) -> &BTreeSet<i64> {
        &self.sector_shift
    }

    pub fn nnz(&self) -> usize {
        self.matrix.nnz()
    }

    pub fn to_dense(&self) -> CMatrix {
        let mut dense = CMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.matrix.triplet_iter() {
            dense[(r, c)] += *v;
        }
        dense
    }

    pub fn adjoint(&self) -> Self {
        let mut matrix = self.matrix.transpose();
        for v in matrix.values_mut() {
            *v = v.conj();
        }
        FockOperator {
            basis: self.basis.clone(),
            matrix,
            sector_shift: self.sector_shift.iter().map(|s| -s).collect(),
        }
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut matrix = self.matrix.clone();
        for v in matrix.values_mut() {
            *v *= factor;
        }
        FockOperator {
            basis: self.basis.clone(),
            matrix,
            sector_shift: self.sector_shift.clone(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert!(Arc::ptr_eq(&self.basis, &other.basis) || *self.basis == *other.basis, "basis mismatch");
        FockOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix + &other.matrix,
            sector_shift: self.sector_shift.union(&other.sector_shift).copied().collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scaled(C64::new(-1.0, 0.0)))
    }

    /// Operator product `self * other`, truncated to the basis.
    pub fn mul(&self, other: &Self) -> Self {
        let shifts: BTreeSet<i64> = self
            .sector_shift
            .iter()
            .flat_map(|a| other.sector_shift.iter().map(move |b| a + b))
            .collect();
        FockOperator {
            basis: self.basis.clone(),
            matrix: &self.matrix * &other.matrix,
            sector_shift: shifts,
        }
    }

    /// `self + self^dagger`.
    pub fn plus_adjoint(&self) -> Self {
        self.add(&self.adjoint())
    }

    /// `self * f(N)`: the number function acts on the input state.
    pub fn times_number_fn(&self, f: impl Fn(usize) -> f64) -> Self {
        let numbers = self.basis.numbers();
        let factors: Vec<f64> = numbers.iter().map(|&n| f(n)).collect();
        let mut matrix = self.matrix.clone();
        for mut row in matrix.row_iter_mut() {
            let (cols, values) = row.cols_and_values_mut();
            for (c, v) in cols.iter().zip(values.iter_mut()) {
                *v *= factors[*c];
            }
        }
        FockOperator {
            basis: self.basis.clone(),
            matrix,
            sector_shift: self.sector_shift.clone(),
        }
    }

    /// `f(N) * self`: the number function acts on the output state.
    pub fn number_fn_times(&self, f: impl Fn(usize) -> f64) -> Self {
        let numbers = self.basis.numbers();
        let mut matrix = self.matrix.clone();
        for (r, mut row) in matrix.row_iter_mut().enumerate() {
            let factor = f(numbers[r]);
            for v in row.values_mut() {
                *v *= factor;
            }
        }
        FockOperator {
            basis: self.basis.clone(),
            matrix,
            sector_shift: self.sector_shift.clone(),
        }
    }

    pub fn apply(&self, v: &CVector) -> CVector {
        let mut out = CVector::zeros(self.dim());
        for (r, row) in self.matrix.row_iter().enumerate() {
            let mut acc = ZERO;
            for (c, value) in row.col_indices().iter().zip(row.values()) {
                acc += value * v[*c];
            }
            out[r] = acc;
        }
        out
    }

    /// Sparse-times-dense product.
    pub fn mul_dense(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim(), m.ncols());
        for (r, row) in self.matrix.row_iter().enumerate() {
            for (c, value) in row.col_indices().iter().zip(row.values()) {
                for k in 0..m.ncols() {
                    out[(r, k)] += value * m[(*c, k)];
                }
            }
        }
        out
    }

    /// Dense-times-sparse product.
    pub fn dense_mul(&self, m: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(m.nrows(), self.dim());
        for (r, row) in self.matrix.row_iter().enumerate() {
            for (c, value) in row.col_indices().iter().zip(row.values()) {
                for k in 0..m.nrows() {
                    out[(k, *c)] += m[(k, r)] * value;
                }
            }
        }
        out
    }

    /// Text dump: a header line, then `row col re im` sorted by `(row, col)`,
    /// floats with 17 significant digits.
    pub fn dump(&self) -> String {
        let shifts: Vec<String> = self.sector_shift.iter().map(|s| s.to_string()).collect();
        let mut out = format!(
            "# M={} nmax={} sector_shift={}\n",
            self.basis.modes() + 1,
            self.basis.nmax(),
            shifts.join(",")
        );
        let mut entries: Vec<(usize, usize, C64)> = self.matrix.triplet_iter().map(|(r, c, v)| (r, c, *v)).collect();
        entries.sort_by_key(|(r, c, _)| (*r, *c));
        for (r, c, v) in entries {
            let _ = writeln!(out, "{r} {c} {:.16e} {:.16e}", v.re, v.im);
        }
        out
    }
}

//! Dense linear-algebra helpers on complex matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::ops::Range;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues sorted ascending.
///
/// The input is symmetrized first. Real-valued inputs take the real path,
/// which is several times faster and returns real eigenvectors.
pub fn eigh(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "eigh needs a square matrix");
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    let sym = (m + m.adjoint()) * re(0.5);
    let is_real = sym.iter().all(|z| z.im == 0.0);
    let (values, vectors): (Vec<f64>, CMatrix) = if is_real {
        let eig = sym.map(|z| z.re).symmetric_eigen();
        (
            eig.eigenvalues.iter().copied().collect(),
            eig.eigenvectors.map(re),
        )
    } else {
        let eig = sym.symmetric_eigen();
        (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted_values = order.iter().map(|&i| values[i]).collect();
    let mut sorted_vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        sorted_vectors.set_column(dst, &vectors.column(src));
    }
    (sorted_values, sorted_vectors)
}

/// Applies `f` to the eigenvalues of a Hermitian matrix.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let (values, vectors) = eigh(m);
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * f(values[j])
    });
    &scaled * vectors.adjoint()
}

/// Square root of a positive semidefinite matrix, with eigenvalues floored at 1e-14.
pub fn psd_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| x.max(1e-14).sqrt())
}

pub fn smallest_eigenvalue(m: &CMatrix) -> f64 {
    eigh(m).0.first().copied().unwrap_or(f64::INFINITY)
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn hermiticity_residual(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Trace norm of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm_hermitian(m: &CMatrix) -> f64 {
    eigh(m).0.iter().map(|x| x.abs()).sum()
}

pub fn trace(m: &CMatrix) -> C64 {
    m.diagonal().iter().sum()
}

/// Rotates a vector so that its largest-magnitude entry is real and positive.
///
/// Among entries whose magnitude agrees with the maximum to a relative 1e-10,
/// the first one is used so the choice stays stable under round-off.
pub fn fix_phase(v: &mut CVector) {
    let largest = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if largest == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|z| z.norm() >= largest * (1.0 - 1e-10))
        .expect("a maximal entry exists");
    let phase = v[pivot].conj() / v[pivot].norm();
    *v *= phase;
    v[pivot] = re(v[pivot].norm());
}

/// Groups ascending values into runs whose neighbours differ by at most
/// `rel_tol * max(1, |value|)`.
pub fn cluster_sorted(values: &[f64], rel_tol: f64) -> Vec<Range<usize>> {
    let mut clusters = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        let split = i == values.len() || {
            let scale = values[i].abs().max(values[i - 1].abs()).max(1.0);
            values[i] - values[i - 1] > rel_tol * scale
        };
        if split {
            if i > start {
                clusters.push(start..i);
            }
            start = i;
        }
    }
    clusters
}

/// Orthonormal basis of the complement of the unit vector `phi`.
///
/// Standard basis vectors are projected onto the complement and added by
/// Gram–Schmidt, always picking the candidate with the largest remaining
/// norm (lowest index on ties).
pub fn complement_basis(phi: &CVector) -> CMatrix {
    let dim = phi.len();
    let mut basis: Vec<CVector> = vec![phi.clone()];
    let mut chosen = vec![false; dim];
    while basis.len() < dim {
        let mut best: Option<(usize, CVector, f64)> = None;
        for (k, taken) in chosen.iter().enumerate() {
            if *taken {
                continue;
            }
            let mut candidate = CVector::zeros(dim);
            candidate[k] = ONE;
            for b in &basis {
                let overlap = b.dotc(&candidate);
                candidate -= b * overlap;
            }
            let norm = candidate.norm();
            if best.as_ref().is_none_or(|(_, _, n)| norm > *n * (1.0 + 1e-12)) {
                best = Some((k, candidate, norm));
            }
        }
        let (k, candidate, norm) = best.expect("a candidate remains");
        chosen[k] = true;
        let mut unit = candidate / re(norm);
        for b in &basis {
            let overlap = b.dotc(&unit);
            unit -= b * overlap;
        }
        let renorm = unit.norm();
        basis.push(unit / re(renorm));
    }
    let mut out = CMatrix::zeros(dim, dim - 1);
    for (j, b) in basis.iter().skip(1).enumerate() {
        out.set_column(j, b);
    }
    out
}

/// Canonical orthonormal basis of the column span of `span` (orthonormal columns).
///
/// The standard basis vectors are projected onto the span and orthonormalized
/// greedily by largest projection norm; the resulting vectors are ordered by
/// the index of the standard vector they came from.
pub fn canonical_span_basis(span: &CMatrix) -> CMatrix {
    let dim = span.nrows();
    let rank = span.ncols();
    let projector = span * span.adjoint();
    let mut picked: Vec<(usize, CVector)> = Vec::new();
    let mut used = vec![false; dim];
    while picked.len() < rank {
        let mut best: Option<(usize, CVector, f64)> = None;
        for k in 0..dim {
            if used[k] {
                continue;
            }
            let mut candidate: CVector = projector.column(k).into_owned();
            for (_, b) in &picked {
                let overlap = b.dotc(&candidate);
                candidate -= b * overlap;
            }
            let norm = candidate.norm();
            if best.as_ref().is_none_or(|(_, _, n)| norm > *n * (1.0 + 1e-9)) {
                best = Some((k, candidate, norm));
            }
        }
        let (k, candidate, norm) = best.expect("span has full rank");
        used[k] = true;
        picked.push((k, candidate / re(norm)));
    }
    picked.sort_by_key(|(k, _)| *k);
    let mut out = CMatrix::zeros(dim, rank);
    for (j, (_, mut v)) in picked.into_iter().enumerate() {
        fix_phase(&mut v);
        out.set_column(j, &v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigh_sorts_and_reconstructs() {
        let m = CMatrix::from_fn(4, 4, |i, j| {
            C64::new((i + j) as f64, i as f64 - j as f64)
        });
        let (values, vectors) = eigh(&m);
        assert!(values.windows(2).all(|w| w[0] <= w[1]));
        let diag = CMatrix::from_diagonal(&CVector::from_iterator(4, values.iter().map(|&x| re(x))));
        let rebuilt = &vectors * diag * vectors.adjoint();
        assert!(max_abs_diff(&rebuilt, &m) < 1e-12);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let a = CMatrix::from_fn(3, 3, |i, j| C64::new(1.0 + (i * j) as f64, (i as f64) - (j as f64)));
        let m = &a * a.adjoint();
        let s = psd_sqrt(&m);
        assert!(max_abs_diff(&(&s * &s), &m) < 1e-10);
    }

    #[test]
    fn clusters_split_on_gaps() {
        let groups = cluster_sorted(&[0.0, 1.0, 1.0 + 1e-12, 2.0], 1e-8);
        assert_eq!(groups, vec![0..1, 1..3, 3..4]);
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut phi = CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8), ZERO]);
        phi /= re(phi.norm());
        let q = complement_basis(&phi);
        let gram = q.adjoint() * &q;
        assert!(max_abs_diff(&gram, &CMatrix::identity(2, 2)) < 1e-14);
        assert!((q.adjoint() * &phi).norm() < 1e-14);
    }

    #[test]
    fn phase_fix_makes_pivot_positive() {
        let mut v = CVector::from_vec(vec![C64::new(0.1, 0.1), C64::new(0.0, -2.0)]);
        fix_phase(&mut v);
        assert!(v[1].im == 0.0 && v[1].re > 0.0);
    }
}

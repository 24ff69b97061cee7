use crate::error::{Error, Result};
use crate::fock::{FockOperator, Kops};
use crate::linalg::{cluster_sorted, eigh, fix_phase, CMatrix, CVector};
use std::ops::Range;

/// Default relative tolerance for grouping eigenvalues into degenerate levels.
pub const CLUSTER_TOL: f64 = 1e-8;

/// `H_0 = K0 + K1 + K2 + K2*`.
pub fn build_h0(kops: &Kops) -> FockOperator {
    kops.k0.add(&kops.k1).add(&kops.k2.plus_adjoint())
}

/// One eigenvalue cluster of the truncated `H_0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Level {
    pub energy: f64,
    pub multiplicity: usize,
    /// Positions of the cluster in the ascending eigenvalue list.
    pub indices: Range<usize>,
}

/// Eigen-decomposition of the truncated `H_0`, grouped into levels.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
    pub levels: Vec<Level>,
    /// Number of levels lying entirely below the top quarter of the spectrum.
    pub reliable: usize,
    pub cluster_tol: f64,
}

/// Diagonalizes `h0` and groups the spectrum into levels.
///
/// Fails if `count` levels are requested but fewer lie in the reliable range.
pub fn spectral_data(h0: &FockOperator, count: usize, cluster_tol: f64) -> Result<SpectralData> {
    spectral_data_dense(&h0.to_dense(), count, cluster_tol)
}

pub fn spectral_data_dense(h0: &CMatrix, count: usize, cluster_tol: f64) -> Result<SpectralData> {
    let (values, mut vectors) = eigh(h0);
    let dim = values.len();
    let cutoff = dim - dim / 4;
    let groups = cluster_sorted(&values, cluster_tol);
    let levels: Vec<Level> = groups
        .into_iter()
        .map(|g| Level {
            energy: values[g.clone()].iter().sum::<f64>() / g.len() as f64,
            multiplicity: g.len(),
            indices: g,
        })
        .collect();
    let reliable = levels.iter().take_while(|l| l.indices.end <= cutoff.max(1)).count();
    if count > reliable {
        return Err(Error::UnreliableLevel {
            level: count - 1,
            reliable,
        });
    }
    for level in &levels {
        if level.multiplicity == 1 {
            let mut v: CVector = vectors.column(level.indices.start).into_owned();
            fix_phase(&mut v);
            vectors.set_column(level.indices.start, &v);
        }
    }
    Ok(SpectralData {
        values,
        vectors,
        levels,
        reliable,
        cluster_tol,
    })
}

impl SpectralData {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn level(&self, n: usize) -> Result<&Level> {
        if n >= self.reliable {
            return Err(Error::UnreliableLevel {
                level: n,
                reliable: self.reliable,
            });
        }
        Ok(&self.levels[n])
    }

    pub fn energy(&self, n: usize) -> f64 {
        self.levels[n].energy
    }

    pub fn multiplicity(&self, n: usize) -> usize {
        self.levels[n].multiplicity
    }

    /// Orthonormal eigenvectors spanning level `n`.
    pub fn level_vectors(&self, n: usize) -> CMatrix {
        let l = &self.levels[n];
        self.vectors.columns(l.indices.start, l.multiplicity).into_owned()
    }

    /// The ground vector with the phase convention applied.
    pub fn ground_vector(&self) -> CVector {
        self.vectors.column(0).into_owned()
    }

    /// Spectral projector onto level `n`.
    pub fn projector(&self, n: usize) -> CMatrix {
        let v = self.level_vectors(n);
        &v * v.adjoint()
    }

    /// Gap to the neighbouring levels: `g^(n) = E^(n+1) - E^(n)`.
    pub fn gap_above(&self, n: usize) -> f64 {
        self.levels
            .get(n + 1)
            .map(|l| l.energy - self.levels[n].energy)
            .unwrap_or(f64::INFINITY)
    }

    /// Contour radius `min(g^(n-1), g^(n)) / 2`.
    pub fn window(&self, n: usize) -> f64 {
        let below = if n == 0 { f64::INFINITY } else { self.gap_above(n - 1) };
        0.5 * below.min(self.gap_above(n))
    }

    /// Reduced resolvent `O_k`: `-P` for `k = 0`, otherwise
    /// `sum over other eigenpairs of (E^(n) - E)^{-k} |v><v|`.
    pub fn reduced_resolvent(&self, n: usize, k: u32) -> CMatrix {
        if k == 0 {
            return -self.projector(n);
        }
        let level = &self.levels[n];
        let en = level.energy;
        let dim = self.dim();
        let weights: Vec<f64> = (0..dim)
            .map(|i| {
                if level.indices.contains(&i) {
                    0.0
                } else {
                    (en - self.values[i]).powi(-(k as i32))
                }
            })
            .collect();
        let scaled = CMatrix::from_fn(dim, dim, |r, c| self.vectors[(r, c)] * weights[c]);
        &scaled * self.vectors.adjoint()
    }
}

/// Matching of a truncated level against the quasiparticle picture.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelMatch {
    pub level: usize,
    pub energy: f64,
    pub occupations: Vec<usize>,
    pub predicted: f64,
    pub deviation: f64,
}

/// For each of the first `count` levels, the closest value of
/// `e00 + sum nu_j d_j` over occupation tuples `nu` with `|nu| <= max_quanta`.
pub fn match_quasiparticle_levels(sd: &SpectralData, d: &[f64], e00: f64, count: usize, max_quanta: usize) -> Vec<LevelMatch> {
    let mut candidates: Vec<(Vec<usize>, f64)> = Vec::new();
    for total in 0..=max_quanta {
        for occ in crate::combinatorics::weak_compositions(total, d.len()) {
            let energy = e00 + occ.iter().zip(d).map(|(&n, &x)| n as f64 * x).sum::<f64>();
            candidates.push((occ, energy));
        }
    }
    (0..count.min(sd.levels.len()))
        .map(|n| {
            let energy = sd.energy(n);
            let (occ, predicted) = candidates
                .iter()
                .min_by(|a, b| (a.1 - energy).abs().total_cmp(&(b.1 - energy).abs()))
                .cloned()
                .unwrap_or((Vec::new(), e00));
            LevelMatch {
                level: n,
                energy,
                occupations: occ,
                predicted,
                deviation: (predicted - energy).abs(),
            }
        })
        .collect()
}

/// Applies `f` to all eigenvalues: `V f(E) V*`.
pub fn spectral_function(sd: &SpectralData, f: impl Fn(f64) -> f64) -> CMatrix {
    let dim = sd.dim();
    let scaled = CMatrix::from_fn(dim, dim, |r, c| sd.vectors[(r, c)] * f(sd.values[c]));
    &scaled * sd.vectors.adjoint()
}

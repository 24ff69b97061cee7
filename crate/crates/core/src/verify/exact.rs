//! Brute-force spectra of the N-body Hamiltonian and their grouping onto
//! levels of the quadratic Hamiltonian.

use crate::bogoliubov::{SpectralData, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::fock::{build_hn, NParticleBasis};
use crate::linalg::{cluster_sorted, eigh, hermiticity_residual, CMatrix};
use crate::model::ModelSpec;
use serde::Serialize;
use std::ops::Range;

/// One distinct eigenvalue of `H_N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactLevel {
    pub energy: f64,
    pub multiplicity: usize,
    #[serde(skip)]
    pub indices: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct ExactSpectrum {
    pub particles: usize,
    pub basis: NParticleBasis,
    /// All eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Eigenvectors on the N-particle basis, one per column.
    pub vectors: CMatrix,
    /// The lowest `count` distinct eigenvalues.
    pub levels: Vec<ExactLevel>,
    pub hermiticity_residual: f64,
}

/// Dense diagonalization of `H_N`; levels are grouped with the default
/// relative clustering tolerance.
pub fn exact_spectrum(model: &ModelSpec, particles: usize, count: usize) -> Result<ExactSpectrum> {
    let (basis, h) = build_hn(model, particles)?;
    let hermiticity_residual = hermiticity_residual(&h);
    let (values, vectors) = eigh(&h);
    let levels = cluster_sorted(&values, CLUSTER_TOL)
        .into_iter()
        .take(count)
        .map(|g| ExactLevel {
            energy: values[g.clone()].iter().sum::<f64>() / g.len() as f64,
            multiplicity: g.len(),
            indices: g,
        })
        .collect();
    Ok(ExactSpectrum {
        particles,
        basis,
        values,
        vectors,
        levels,
        hermiticity_residual,
    })
}

/// The exact levels converging to one level of the quadratic Hamiltonian.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub n: usize,
    pub particles: usize,
    /// Indices into the exact level list.
    pub members: Vec<usize>,
    /// Excitation energies `E_N - N e_H` of the members.
    pub energies: Vec<f64>,
    pub degeneracies: Vec<usize>,
    /// `sum delta E / delta_0`.
    pub mean: f64,
    pub bogoliubov_energy: f64,
    pub bogoliubov_multiplicity: usize,
    pub window: f64,
    /// Positions of the member eigenvectors in the ascending eigenvalue list.
    #[serde(skip)]
    pub columns: Vec<usize>,
}

/// Assigns exact excitation energies within the window `g^(n)` of level `n`
/// of `sd`. Fails if a member also lies within the window of another level,
/// or if the member multiplicities do not add up to that of level `n`.
pub fn cluster(exact: &ExactSpectrum, e_h: f64, sd: &SpectralData, n: usize) -> Result<ClusterReport> {
    let level = sd.level(n)?;
    let target = level.energy;
    let window = sd.window(n);
    let shift = exact.particles as f64 * e_h;
    let mut members = Vec::new();
    for (i, l) in exact.levels.iter().enumerate() {
        let e = l.energy - shift;
        if (e - target).abs() < window {
            for other in 0..sd.reliable {
                if other != n && (e - sd.energy(other)).abs() < sd.window(other) {
                    return Err(Error::AmbiguousCluster(format!(
                        "exact level {i} at {e} lies within the windows of levels {n} and {other}"
                    )));
                }
            }
            members.push(i);
        }
    }
    let degeneracies: Vec<usize> = members.iter().map(|&i| exact.levels[i].multiplicity).collect();
    let total: usize = degeneracies.iter().sum();
    if total != level.multiplicity {
        return Err(Error::AmbiguousCluster(format!(
            "level {n} (multiplicity {}) collects exact multiplicity {total} at N = {}",
            level.multiplicity, exact.particles
        )));
    }
    let energies: Vec<f64> = members.iter().map(|&i| exact.levels[i].energy - shift).collect();
    let mean = energies.iter().zip(&degeneracies).map(|(e, &d)| e * d as f64).sum::<f64>() / total as f64;
    let columns = members.iter().flat_map(|&i| exact.levels[i].indices.clone()).collect();
    Ok(ClusterReport {
        n,
        particles: exact.particles,
        members,
        energies,
        degeneracies,
        mean,
        bogoliubov_energy: target,
        bogoliubov_multiplicity: level.multiplicity,
        window,
        columns,
    })
}

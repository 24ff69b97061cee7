//! Convergence studies: expansion against exact diagonalization over a list
//! of particle numbers.

use super::exact::{cluster, exact_spectrum, ClusterReport, ExactSpectrum};
use super::fit::{fit_slope, SlopeFit};
use crate::error::{Error, Result};
use crate::expansion::{expand_level, LevelExpansion};
use crate::fock::{excitation_map, second_quantize, Monomial, NParticleBasis, OccupationBasis};
use crate::linalg::{eigh, re, CMatrix, CVector, C64};
use crate::model::{build_kernels, hartree_solve, HartreeOptions, HartreeSolution, Kernels, ModelSpec};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

/// Minimal coefficient of determination for a passing fit.
pub const MIN_R2: f64 = 0.98;
/// Errors below this are treated as exact agreement.
pub const EXACT_ZERO: f64 = 1e-12;

/// Exact eigenpairs of `H_N` and the excitation map for one `N`.
#[derive(Debug)]
pub struct ExactData {
    pub spectrum: ExactSpectrum,
    /// `U_{N,phi}`, N-particle space onto the excitation Fock space with cutoff `N`.
    pub map: CMatrix,
}

impl ExactData {
    /// Excitation-space images `U psi` of the given eigenvector columns.
    pub fn fock_vectors(&self, columns: &[usize]) -> CMatrix {
        let dim = self.spectrum.vectors.nrows();
        let mut out = CMatrix::zeros(dim, columns.len());
        for (i, &c) in columns.iter().enumerate() {
            out.set_column(i, &(&self.map * self.spectrum.vectors.column(c)));
        }
        out
    }
}

/// A model with its Hartree data, the coefficient cutoff and a per-`N` cache
/// of exact data shared between studies.
#[derive(Debug)]
pub struct StudySetup {
    pub model: ModelSpec,
    pub sol: HartreeSolution,
    pub kernels: Kernels,
    pub nmax: usize,
    cache: Mutex<BTreeMap<usize, Arc<ExactData>>>,
}

impl StudySetup {
    pub fn new(model: ModelSpec, nmax: usize) -> Result<Self> {
        let sol = hartree_solve(&model, &HartreeOptions::default())?;
        Self::with_solution(model, sol, nmax)
    }

    pub fn with_solution(model: ModelSpec, sol: HartreeSolution, nmax: usize) -> Result<Self> {
        let kernels = build_kernels(&sol, &model)?;
        Ok(StudySetup {
            model,
            sol,
            kernels,
            nmax,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    fn compute(&self, particles: usize) -> Result<ExactData> {
        let spectrum = exact_spectrum(&self.model, particles, usize::MAX)?;
        let (_, _, map) = excitation_map(&self.kernels, particles)?;
        Ok(ExactData { spectrum, map })
    }

    /// Exact data for `N`, computed once.
    pub fn exact(&self, particles: usize) -> Result<Arc<ExactData>> {
        if let Some(x) = self.cache.lock().expect("cache lock").get(&particles) {
            return Ok(x.clone());
        }
        let data = Arc::new(self.compute(particles)?);
        self.cache.lock().expect("cache lock").insert(particles, data.clone());
        Ok(data)
    }

    /// Fills the cache for all `N` in parallel.
    pub fn prefetch(&self, nlist: &[usize]) -> Result<()> {
        let missing: Vec<usize> = {
            let cache = self.cache.lock().expect("cache lock");
            nlist.iter().copied().filter(|n| !cache.contains_key(n)).collect()
        };
        let computed: Vec<(usize, Result<ExactData>)> =
            missing.par_iter().map(|&n| (n, self.compute(n))).collect();
        let mut cache = self.cache.lock().expect("cache lock");
        for (n, data) in computed {
            cache.insert(n, Arc::new(data?));
        }
        Ok(())
    }

    pub fn cluster(&self, expansion: &LevelExpansion, particles: usize, n: usize) -> Result<ClusterReport> {
        cluster(&self.exact(particles)?.spectrum, self.sol.e_h, &expansion.spectral, n)
    }

    fn expansions(&self, n: usize, a: usize) -> Result<(LevelExpansion, LevelExpansion)> {
        Ok((
            expand_level(&self.kernels, self.nmax, n, a)?,
            expand_level(&self.kernels, self.nmax + 2, n, a)?,
        ))
    }

    fn check_nlist(&self, nlist: &[usize], need_embedding: bool) -> Result<()> {
        for &n in nlist {
            if n < 3 || (need_embedding && n < self.nmax) {
                return Err(Error::InvalidArgument(format!(
                    "particle number {n} is too small (cutoff {})",
                    self.nmax
                )));
            }
        }
        Ok(())
    }
}

fn lambda(particles: usize) -> f64 {
    1.0 / (particles as f64 - 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyPoint {
    #[serde(rename = "N")]
    pub particles: usize,
    pub lambda: f64,
    pub error: f64,
    /// Change of the approximation under `nmax -> nmax + 2`, when available.
    pub truncation: Option<f64>,
    /// Whether the point enters the fit.
    pub included: bool,
    /// Exact value and approximation, when these are scalars.
    pub components: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StudyReport {
    pub kind: String,
    pub title: String,
    pub level: usize,
    pub order: usize,
    pub nmax: usize,
    pub component_names: Vec<String>,
    pub points: Vec<StudyPoint>,
    pub fit: Option<SlopeFit>,
    pub fit_failure: Option<String>,
    pub expected_slope: f64,
    pub exact_zero: bool,
    pub pass: bool,
}

struct RawPoint {
    particles: usize,
    error: f64,
    truncation: Option<f64>,
    components: Vec<f64>,
}

/// Points whose truncation change is at least as large as their error are
/// excluded from the fit.
fn build_report(
    kind: &str,
    title: String,
    level: usize,
    order: usize,
    nmax: usize,
    component_names: &[&str],
    raw: Vec<RawPoint>,
    expected_slope: f64,
) -> StudyReport {
    let points: Vec<StudyPoint> = raw
        .into_iter()
        .map(|p| StudyPoint {
            particles: p.particles,
            lambda: lambda(p.particles),
            error: p.error,
            truncation: p.truncation,
            included: p.error > 0.0 && p.truncation.is_none_or(|t| t < p.error),
            components: p.components,
        })
        .collect();
    let exact_zero = points.iter().all(|p| p.error <= EXACT_ZERO);
    let (lambdas, errors): (Vec<f64>, Vec<f64>) =
        points.iter().filter(|p| p.included).map(|p| (p.lambda, p.error)).unzip();
    let (fit, fit_failure) = if exact_zero {
        (None, None)
    } else {
        match fit_slope(&lambdas, &errors) {
            Ok(f) => (Some(f), None),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    let pass = exact_zero || fit.as_ref().is_some_and(|f| f.slope >= expected_slope && f.r2 >= MIN_R2);
    StudyReport {
        kind: kind.into(),
        title,
        level,
        order,
        nmax,
        component_names: component_names.iter().map(|s| s.to_string()).collect(),
        points,
        fit,
        fit_failure,
        expected_slope,
        exact_zero,
        pass,
    }
}

fn energy_series(energies: &[f64], lam: f64) -> f64 {
    energies.iter().enumerate().map(|(l, e)| lam.powi(l as i32) * e).sum()
}

/// `|cluster mean - N e_H - sum_{l<=a} lambda^l E_l|` against `lambda`;
/// passes for slope `>= a + 0.8` with `R^2 >= 0.98`.
pub fn energy_convergence_study(setup: &StudySetup, n: usize, a: usize, nlist: &[usize]) -> Result<StudyReport> {
    setup.check_nlist(nlist, false)?;
    setup.prefetch(nlist)?;
    let (main, check) = setup.expansions(n, a)?;
    let mut raw = Vec::new();
    for &particles in nlist {
        let cl = setup.cluster(&main, particles, n)?;
        let lam = lambda(particles);
        let series = energy_series(&main.energies, lam);
        raw.push(RawPoint {
            particles,
            error: (cl.mean - series).abs(),
            truncation: Some((energy_series(&check.energies, lam) - series).abs()),
            components: vec![cl.mean, series],
        });
    }
    Ok(build_report(
        "energy",
        format!("energy expansion of level {n} to order {a}: cluster mean minus truncated series"),
        n,
        a,
        setup.nmax,
        &["exact", "series"],
        raw,
        a as f64 + 0.8,
    ))
}

/// Zero-pads a square matrix into a larger number-major basis.
fn pad_matrix(m: &CMatrix, dim: usize) -> CMatrix {
    let mut out = CMatrix::zeros(dim, dim);
    out.view_mut((0, 0), (m.nrows(), m.ncols())).copy_from(m);
    out
}

fn pad_vector(v: &CVector, dim: usize) -> CVector {
    let mut out = CVector::zeros(dim);
    out.rows_mut(0, v.len()).copy_from(v);
    out
}

fn projector_series(projectors: &[CMatrix], lam: f64) -> CMatrix {
    let mut acc = projectors[0].clone();
    for (l, p) in projectors.iter().enumerate().skip(1) {
        acc += p * re(lam.powf(l as f64 / 2.0));
    }
    acc
}

fn trace_norm(m: &CMatrix) -> f64 {
    let h = (m + m.adjoint()) * re(0.5);
    eigh(&h).0.iter().map(|x| x.abs()).sum()
}

/// Trace norm of `W W* - pad(S)` where `W` has orthonormal columns on a space
/// whose first `S.nrows()` coordinates are the cutoff basis. The difference
/// lives on the span of those coordinates and the tails of `W`, so it is
/// compressed there before diagonalizing.
fn projector_difference_norm(w: &CMatrix, s: &CMatrix) -> f64 {
    let d = s.nrows();
    let full = w.nrows();
    let head = w.rows(0, d).into_owned();
    let tail = w.rows(d, full - d).into_owned();
    // orthonormal basis of the tail span
    let mut extra: Vec<CVector> = Vec::new();
    for c in 0..tail.ncols() {
        let mut v: CVector = tail.column(c).into_owned();
        for e in &extra {
            let overlap = e.dotc(&v);
            v -= e * overlap;
        }
        let norm = v.norm();
        if norm > 1e-13 {
            extra.push(v / re(norm));
        }
    }
    let k = extra.len();
    let mut coords = CMatrix::zeros(d + k, w.ncols());
    coords.view_mut((0, 0), (d, w.ncols())).copy_from(&head);
    for (i, e) in extra.iter().enumerate() {
        for c in 0..w.ncols() {
            coords[(d + i, c)] = e.dotc(&tail.column(c).into_owned());
        }
    }
    let diff = &coords * coords.adjoint() - pad_matrix(s, d + k);
    trace_norm(&diff)
}

/// `(1/N) sum A[x,y] a*_x a_y` on the N-particle space.
pub fn one_body_observable(a: &CMatrix, basis: &NParticleBasis) -> CMatrix {
    let m = a.nrows();
    let scale = 1.0 / basis.particles() as f64;
    let mut monomials = Vec::new();
    for x in 0..m {
        for y in 0..m {
            monomials.push(Monomial {
                coefficient: a[(x, y)] * scale,
                creators: vec![x],
                annihilators: vec![y],
            });
        }
    }
    dense_from(basis, &monomials)
}

/// `binom(N,2)^{-1} sum_{i<j} A_ij` for a two-body matrix indexed by `(m M + n, p M + q)`.
pub fn two_body_observable(a: &CMatrix, basis: &NParticleBasis) -> CMatrix {
    let m = basis.modes();
    let particles = basis.particles() as f64;
    let scale = 1.0 / (particles * (particles - 1.0));
    let mut monomials = Vec::new();
    for x in 0..m {
        for y in 0..m {
            for p in 0..m {
                for q in 0..m {
                    monomials.push(Monomial {
                        coefficient: a[(x * m + y, p * m + q)] * scale,
                        creators: vec![x, y],
                        annihilators: vec![q, p],
                    });
                }
            }
        }
    }
    dense_from(basis, &monomials)
}

fn dense_from(basis: &NParticleBasis, monomials: &[Monomial]) -> CMatrix {
    let mut out = CMatrix::zeros(basis.dim(), basis.dim());
    for (r, c, v) in second_quantize(basis, monomials) {
        out[(r, c)] += v;
    }
    out
}

/// Projector convergence: trace-norm error against `lambda` (expected slope
/// `(a+1)/2 - 0.2`) and, per one-body observable, the error of
/// `Tr A P` (expected slope `(a+2)/2 - 0.2`).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorStudy {
    pub trace_norm: StudyReport,
    pub observables: Vec<StudyReport>,
}

pub fn projector_convergence_study(
    setup: &StudySetup,
    n: usize,
    a: usize,
    nlist: &[usize],
    observables: &[(String, CMatrix)],
) -> Result<ProjectorStudy> {
    setup.check_nlist(nlist, true)?;
    setup.prefetch(nlist)?;
    let (main, check) = setup.expansions(n, a)?;
    let d = main.basis.dim();
    let d_check = check.basis.dim();
    let mut norm_points = Vec::new();
    let mut observable_points: Vec<Vec<RawPoint>> = observables.iter().map(|_| Vec::new()).collect();
    for &particles in nlist {
        let exact = setup.exact(particles)?;
        let cl = setup.cluster(&main, particles, n)?;
        let lam = lambda(particles);
        let w = exact.fock_vectors(&cl.columns);
        let series = projector_series(&main.projectors, lam);
        let series_check = projector_series(&check.projectors, lam);
        norm_points.push(RawPoint {
            particles,
            error: projector_difference_norm(&w, &series),
            truncation: Some(trace_norm(&(&series_check - pad_matrix(&series, d_check)))),
            components: Vec::new(),
        });
        for (i, (_, a_model)) in observables.iter().enumerate() {
            let obs = one_body_observable(a_model, &exact.spectrum.basis);
            let psi = exact.spectrum.vectors.select_columns(&cl.columns);
            let exact_value = (psi.adjoint() * &obs * &psi).trace().re;
            let conjugated = &exact.map * &obs * exact.map.adjoint();
            let value = |dim: usize, s: &CMatrix| -> f64 {
                let block = conjugated.view((0, 0), (dim, dim));
                (block * s).trace().re
            };
            let approx = value(d, &series);
            let truncation = (d_check <= conjugated.nrows()).then(|| (value(d_check, &series_check) - approx).abs());
            observable_points[i].push(RawPoint {
                particles,
                error: (exact_value - approx).abs(),
                truncation,
                components: vec![exact_value, approx],
            });
        }
    }
    let trace_norm = build_report(
        "projector",
        format!("trace norm of the projector error for level {n} at order {a}"),
        n,
        a,
        setup.nmax,
        &[],
        norm_points,
        (a as f64 + 1.0) / 2.0 - 0.2,
    );
    let observables = observables
        .iter()
        .zip(observable_points)
        .map(|((name, _), raw)| {
            build_report(
                "observable",
                format!("expectation of {name} in level {n} at order {a}"),
                n,
                a,
                setup.nmax,
                &["exact", "series"],
                raw,
                (a as f64 + 2.0) / 2.0 - 0.2,
            )
        })
        .collect();
    Ok(ProjectorStudy { trace_norm, observables })
}

fn wavefunction_series(chi: &[CVector], lam: f64) -> CVector {
    let mut acc = chi[0].clone();
    for (l, c) in chi.iter().enumerate().skip(1) {
        acc += c * re(lam.powf(l as f64 / 2.0));
    }
    acc
}

/// `|| Psi_N - sum lambda^{l/2} chi_l ||` in the excitation Fock space, with the
/// phase of `Psi_N` chosen to maximize the real overlap; expected slope `(a+1)/2 - 0.2`.
pub fn wavefunction_convergence_study(setup: &StudySetup, n: usize, a: usize, nlist: &[usize]) -> Result<StudyReport> {
    setup.check_nlist(nlist, true)?;
    setup.prefetch(nlist)?;
    let (main, check) = setup.expansions(n, a)?;
    let (wf, wf_check) = match (&main.wavefunction, &check.wavefunction) {
        (Some(x), Some(y)) => (x, y),
        _ => {
            return Err(Error::Unsupported(format!(
                "level {n} is degenerate; the wavefunction expansion needs a simple level"
            )))
        }
    };
    let mut raw = Vec::new();
    for &particles in nlist {
        let exact = setup.exact(particles)?;
        let cl = setup.cluster(&main, particles, n)?;
        let lam = lambda(particles);
        let psi: CVector = exact.fock_vectors(&cl.columns).column(0).into_owned();
        let approx = pad_vector(&wavefunction_series(&wf.chi, lam), psi.len());
        let overlap = approx.dotc(&psi);
        let phase = if overlap.norm() > 0.0 { overlap.conj() / overlap.norm() } else { C64::new(1.0, 0.0) };
        let error = (&approx - &psi * phase).norm();
        let check_series = wavefunction_series(&wf_check.chi, lam);
        let truncation = (&check_series - pad_vector(&wavefunction_series(&wf.chi, lam), check_series.len())).norm();
        raw.push(RawPoint {
            particles,
            error,
            truncation: Some(truncation),
            components: Vec::new(),
        });
    }
    Ok(build_report(
        "wavefunction",
        format!("norm error of the wavefunction expansion of level {n} at order {a}"),
        n,
        a,
        setup.nmax,
        &[],
        raw,
        (a as f64 + 1.0) / 2.0 - 0.2,
    ))
}

//! Full expansion of one level, repeated at two cutoffs.

use super::operators::OperatorCoefficients;
use super::perturbation::{
    convolution_residuals, energy_coefficients, energy_coefficients_iterative, projector_coefficients,
    wavefunction_coefficients, wavefunction_projectors, LevelContext, WavefunctionCoefficients,
};
use crate::bogoliubov::{build_h0, spectral_data, SpectralData, CLUSTER_TOL};
use crate::error::{Error, Result};
use crate::fock::{build_kops, FockBasis, FockOperator};
use crate::linalg::{hermiticity_residual, CMatrix};
use crate::model::Kernels;
use serde::Serialize;
use std::sync::Arc;

/// Relative change of a coefficient under `nmax -> nmax + 2` above which it is flagged.
pub const TRUNCATION_TOL: f64 = 1e-6;

/// Everything computed for one level at one cutoff.
#[derive(Debug, Clone)]
pub struct LevelExpansion {
    pub basis: Arc<FockBasis>,
    pub spectral: SpectralData,
    pub multiplicity: usize,
    /// Trace-formula energies `E_0 .. E_a`.
    pub energies: Vec<f64>,
    /// Iterative energies, for non-degenerate levels.
    pub energies_iterative: Option<Vec<f64>>,
    /// `P_0 .. P_a`.
    pub projectors: Vec<CMatrix>,
    pub wavefunction: Option<WavefunctionCoefficients>,
}

/// Computes energies, projectors and (for non-degenerate levels) wavefunction
/// coefficients of level `n` up to order `a` on the cutoff `nmax`.
pub fn expand_level(kernels: &Kernels, nmax: usize, n: usize, a: usize) -> Result<LevelExpansion> {
    let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), nmax)?);
    let kops = build_kops(kernels, &basis)?;
    let coeffs = OperatorCoefficients::new(kops, (2 * a).max(1));
    let spectral = spectral_data(&build_h0(&coeffs.kops), n + 1, CLUSTER_TOL)?;
    let ctx = LevelContext::new(&coeffs, &spectral, n, (2 * a).max(1))?;
    let energies = energy_coefficients(&ctx, a)?;
    let projectors = projector_coefficients(&ctx, a)?;
    let multiplicity = ctx.multiplicity();
    let (energies_iterative, wavefunction) = if multiplicity == 1 {
        (
            Some(energy_coefficients_iterative(&ctx, a)?),
            Some(wavefunction_coefficients(&ctx, &projectors, a)?),
        )
    } else {
        (None, None)
    };
    Ok(LevelExpansion {
        basis,
        spectral,
        multiplicity,
        energies,
        energies_iterative,
        projectors,
        wavefunction,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostics {
    pub nmax: usize,
    pub nmax_check: usize,
    /// `|E_l(nmax + 2) - E_l(nmax)|`.
    pub energy_truncation: Vec<f64>,
    /// `|alpha_l(nmax + 2) - alpha_l(nmax)|`, non-degenerate levels only.
    pub alpha_truncation: Vec<f64>,
    /// `|Tr P_l|`.
    pub projector_traces: Vec<f64>,
    pub projector_hermiticity: Vec<f64>,
    /// `max |sum_j P_j P_{l-j} - P_l|`.
    pub convolution: Vec<f64>,
    /// `max |P^wf_l - P_l|`.
    pub wavefunction_projector: Vec<f64>,
    /// Trace formula against iterative formula.
    pub energy_formula_agreement: Option<f64>,
    pub chi_tilde_agreement: Option<f64>,
    /// Human-readable list of coefficients exceeding the truncation tolerance.
    pub flagged: Vec<String>,
}

/// Serializable summary of an expansion.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansionResult {
    pub model_hash: Option<String>,
    pub level: usize,
    pub order: usize,
    pub multiplicity: usize,
    pub nmax: usize,
    #[serde(rename = "E")]
    pub energies: Vec<f64>,
    pub energies_iterative: Option<Vec<f64>>,
    /// `(re, im)` pairs.
    pub alpha: Vec<(f64, f64)>,
    pub energy_method: String,
    pub diagnostics: Diagnostics,
    #[serde(skip)]
    pub expansion: LevelExpansion,
}

impl ExpansionResult {
    /// `P_l` as a sparse operator in the dump format of the Fock module.
    pub fn projector_operator(&self, l: usize) -> Result<FockOperator> {
        FockOperator::from_dense(self.expansion.basis.clone(), &self.expansion.projectors[l], 1e-14)
    }
}

fn relative_delta(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Expands level `n` at cutoff `nmax`, repeats at `nmax + 2`, and records the
/// algebraic identities and truncation changes.
pub fn expand(kernels: &Kernels, nmax: usize, n: usize, a: usize) -> Result<ExpansionResult> {
    let main = expand_level(kernels, nmax, n, a)?;
    let check = expand_level(kernels, nmax + 2, n, a)?;
    if check.multiplicity != main.multiplicity {
        return Err(Error::Assertion(format!(
            "level {n} has multiplicity {} at nmax {nmax} but {} at nmax {}",
            main.multiplicity,
            check.multiplicity,
            nmax + 2
        )));
    }
    let mut flagged = Vec::new();
    let energy_truncation: Vec<f64> = main
        .energies
        .iter()
        .zip(&check.energies)
        .enumerate()
        .map(|(l, (x, y))| {
            if relative_delta(*x, *y) >= TRUNCATION_TOL {
                flagged.push(format!("E_{l}: relative change {:.3e}", relative_delta(*x, *y)));
            }
            (x - y).abs()
        })
        .collect();
    let alpha_truncation: Vec<f64> = match (&main.wavefunction, &check.wavefunction) {
        (Some(w1), Some(w2)) => w1
            .alpha
            .iter()
            .zip(&w2.alpha)
            .enumerate()
            .map(|(l, (x, y))| {
                let delta = (x - y).norm();
                if delta / x.norm().max(1.0) >= TRUNCATION_TOL {
                    flagged.push(format!("alpha_{l}: relative change {:.3e}", delta / x.norm().max(1.0)));
                }
                delta
            })
            .collect(),
        _ => Vec::new(),
    };
    let projector_traces = main.projectors.iter().skip(1).map(|p| p.trace().norm()).collect();
    let projector_hermiticity = main.projectors.iter().map(hermiticity_residual).collect();
    let convolution = convolution_residuals(&main.projectors);
    let (wavefunction_projector, chi_tilde_agreement, alpha) = match &main.wavefunction {
        Some(wf) => (
            wavefunction_projectors(wf, a)
                .iter()
                .zip(&main.projectors)
                .map(|(x, y)| (x - y).camax())
                .collect(),
            Some(wf.iterative_deviation),
            wf.alpha.iter().map(|z| (z.re, z.im)).collect(),
        ),
        None => (Vec::new(), None, Vec::new()),
    };
    let energy_formula_agreement = main.energies_iterative.as_ref().map(|it| {
        it.iter()
            .zip(&main.energies)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    });
    Ok(ExpansionResult {
        model_hash: None,
        level: n,
        order: a,
        multiplicity: main.multiplicity,
        nmax,
        energies: main.energies.clone(),
        energies_iterative: main.energies_iterative.clone(),
        alpha,
        energy_method: if main.multiplicity == 1 {
            "trace formula, cross-checked by the iterative formula".into()
        } else {
            "trace formula (degenerate level, cluster average)".into()
        },
        diagnostics: Diagnostics {
            nmax,
            nmax_check: nmax + 2,
            energy_truncation,
            alpha_truncation,
            projector_traces,
            projector_hermiticity,
            convolution,
            wavefunction_projector,
            energy_formula_agreement,
            chi_tilde_agreement,
            flagged,
        },
        expansion: main,
    })
}

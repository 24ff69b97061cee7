//! Energy, projector and wavefunction coefficients of one `H_0` level.

use super::operators::OperatorCoefficients;
use crate::bogoliubov::SpectralData;
use crate::combinatorics::{compositions, weak_compositions};
use crate::error::{Error, Result};
use crate::linalg::{re, CMatrix, CVector, C64, ZERO};
use std::collections::HashMap;

/// Largest expansion order accepted by the composition sums.
pub const MAX_ORDER: usize = 6;

/// Reduced resolvents and the level subspace of level `n` of a truncated `H_0`.
#[derive(Debug, Clone)]
pub struct LevelContext<'a> {
    pub coeffs: &'a OperatorCoefficients,
    pub sd: &'a SpectralData,
    pub n: usize,
    /// Orthonormal vectors spanning the level, one per column.
    pub vectors: CMatrix,
    /// `O_1, O_2, ...` (index `k - 1`).
    resolvents: Vec<CMatrix>,
}

impl<'a> LevelContext<'a> {
    /// Prepares the reduced resolvents `O_1 .. O_kmax`.
    pub fn new(coeffs: &'a OperatorCoefficients, sd: &'a SpectralData, n: usize, kmax: usize) -> Result<Self> {
        sd.level(n)?;
        if sd.dim() != coeffs.dim() {
            return Err(Error::DimensionMismatch {
                expected: coeffs.dim(),
                found: sd.dim(),
            });
        }
        let resolvents = (1..=kmax.max(1)).map(|k| sd.reduced_resolvent(n, k as u32)).collect();
        Ok(LevelContext {
            coeffs,
            sd,
            n,
            vectors: sd.level_vectors(n),
            resolvents,
        })
    }

    pub fn multiplicity(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn energy0(&self) -> f64 {
        self.sd.energy(self.n)
    }

    /// `O_k x`, with `O_0 = -P_0` applied through the level vectors.
    pub fn apply_resolvent(&self, k: usize, x: &CMatrix) -> CMatrix {
        if k == 0 {
            -(&self.vectors * (self.vectors.adjoint() * x))
        } else {
            &self.resolvents[k - 1] * x
        }
    }

    pub fn resolvent(&self, k: usize) -> CMatrix {
        let dim = self.vectors.nrows();
        self.apply_resolvent(k, &CMatrix::identity(dim, dim))
    }

    pub fn projector0(&self) -> CMatrix {
        &self.vectors * self.vectors.adjoint()
    }

    fn h(&self, j: usize) -> &CMatrix {
        &self.coeffs.dense[j]
    }

    fn require_order(&self, needed_h: usize, needed_o: usize) -> Result<()> {
        if needed_h > self.coeffs.order() {
            return Err(Error::InvalidArgument(format!(
                "operator coefficients up to H_{needed_h} are required, only H_{} were built",
                self.coeffs.order()
            )));
        }
        if needed_o > self.resolvents.len() {
            return Err(Error::InvalidArgument(format!(
                "reduced resolvents up to O_{needed_o} are required, only O_{} were prepared",
                self.resolvents.len()
            )));
        }
        Ok(())
    }

    fn require_nondegenerate(&self, what: &str) -> Result<()> {
        if self.multiplicity() != 1 {
            return Err(Error::Unsupported(format!(
                "{what} requires a non-degenerate level, level {} has multiplicity {}; use the trace formula",
                self.n,
                self.multiplicity()
            )));
        }
        Ok(())
    }

    fn ground(&self) -> CVector {
        self.vectors.column(0).into_owned()
    }
}

fn guard_order(a: usize) -> Result<()> {
    if a > MAX_ORDER {
        return Err(Error::Resource {
            what: "expansion order of the composition sums".into(),
            required: a as u128,
            budget: MAX_ORDER as u128,
        });
    }
    Ok(())
}

fn real_part(value: C64, what: &str) -> Result<f64> {
    if value.im.abs() > 1e-10 * value.re.abs().max(1.0) {
        return Err(Error::Assertion(format!("{what} has imaginary part {:e}", value.im)));
    }
    Ok(value.re)
}

/// `kappa(m) = 1 + #{m_mu = 0}`.
pub fn kappa(m: &[usize]) -> usize {
    1 + m.iter().filter(|&&x| x == 0).count()
}

/// `E_0 .. E_a` from the trace formula
/// `E_l = (1/delta) sum_nu sum_{|j| = 2l} sum_{|m| = nu - 1} kappa(m)^{-1} Tr P_0 H_{j1} O_{m1} ... O_{m_{nu-1}} H_{j_nu}`.
///
/// Chains are evaluated right to left on the level vectors, with shared
/// suffixes memoized; terms are summed in lexicographic composition order.
pub fn energy_coefficients(ctx: &LevelContext, a: usize) -> Result<Vec<f64>> {
    guard_order(a)?;
    ctx.require_order(2 * a, (2 * a).saturating_sub(1))?;
    let delta = ctx.multiplicity() as f64;
    let mut memo: HashMap<Vec<usize>, CMatrix> = HashMap::new();
    let mut out = vec![ctx.energy0()];
    for l in 1..=a {
        let mut total = ZERO;
        for nu in 1..=2 * l {
            for j in compositions(2 * l, nu) {
                for m in weak_compositions(nu - 1, nu - 1) {
                    let chain = trace_chain(ctx, &j, &m, &mut memo);
                    let value: C64 = (0..ctx.multiplicity())
                        .map(|i| ctx.vectors.column(i).dotc(&chain.column(i)))
                        .sum();
                    total += value / kappa(&m) as f64;
                }
            }
        }
        out.push(real_part(total / delta, &format!("E_{l}"))?);
    }
    Ok(out)
}

/// `H_{j1} O_{m1} ... O_{m_{nu-1}} H_{j_nu} V` for the level vectors `V`.
fn trace_chain(ctx: &LevelContext, j: &[usize], m: &[usize], memo: &mut HashMap<Vec<usize>, CMatrix>) -> CMatrix {
    let nu = j.len();
    // suffix key: j_nu, then (m_{k}, j_{k}) pairs going left
    let mut key = vec![j[nu - 1]];
    let mut current = match memo.get(&key) {
        Some(x) => x.clone(),
        None => {
            let x = ctx.h(j[nu - 1]) * &ctx.vectors;
            memo.insert(key.clone(), x.clone());
            x
        }
    };
    for k in (0..nu - 1).rev() {
        key.push(m[k]);
        key.push(j[k]);
        current = match memo.get(&key) {
            Some(x) => x.clone(),
            None => {
                let x = ctx.h(j[k]) * ctx.apply_resolvent(m[k], &current);
                memo.insert(key.clone(), x.clone());
                x
            }
        };
    }
    current
}

/// `H'_j`: `H_j - E_{j/2}` for even `j`, `H_j` for odd `j`.
fn primed(ctx: &LevelContext, energies: &[f64], j: usize, x: &CMatrix) -> CMatrix {
    let hx = ctx.h(j) * x;
    if j.is_multiple_of(2) {
        hx - x * re(energies[j / 2])
    } else {
        hx
    }
}

/// Chain `O_1 H'_{j_k} ... O_1 H'_{j_{nu-1}} O_1 H_{j_nu} chi_0` for the
/// suffix of `j` starting at `k`, memoized by suffix.
fn iterative_suffix(
    ctx: &LevelContext,
    energies: &[f64],
    j: &[usize],
    memo: &mut HashMap<Vec<usize>, CMatrix>,
) -> CMatrix {
    if let Some(x) = memo.get(j) {
        return x.clone();
    }
    let chi0 = CMatrix::from_column_slice(ctx.vectors.nrows(), 1, ctx.vectors.column(0).as_slice());
    let x = if j.len() == 1 {
        ctx.apply_resolvent(1, &(ctx.h(j[0]) * chi0))
    } else {
        let rest = iterative_suffix(ctx, energies, &j[1..], memo);
        ctx.apply_resolvent(1, &primed(ctx, energies, j[0], &rest))
    };
    memo.insert(j.to_vec(), x.clone());
    x
}

/// `E_0 .. E_a` from
/// `E_l = sum_nu sum_{|j| = 2l} <chi_0, H_{j1} O_1 H'_{j2} ... O_1 H_{j_nu} chi_0>`.
/// Only the first reduced resolvent enters; lower coefficients feed `H'`.
pub fn energy_coefficients_iterative(ctx: &LevelContext, a: usize) -> Result<Vec<f64>> {
    guard_order(a)?;
    ctx.require_nondegenerate("the iterative energy formula")?;
    ctx.require_order(2 * a, 1)?;
    let chi0 = ctx.ground();
    let mut energies = vec![ctx.energy0()];
    let mut memo = HashMap::new();
    for l in 1..=a {
        let mut total = ZERO;
        for nu in 1..=2 * l {
            for j in compositions(2 * l, nu) {
                let value = if nu == 1 {
                    chi0.dotc(&(ctx.h(j[0]) * &chi0))
                } else {
                    let tail = iterative_suffix(ctx, &energies, &j[1..], &mut memo);
                    chi0.dotc(&(ctx.h(j[0]) * tail).column(0))
                };
                total += value;
            }
        }
        energies.push(real_part(total, &format!("E_{l}"))?);
    }
    Ok(energies)
}

/// Individual terms of the iterative `E_l` sum, keyed by composition; used to
/// inspect parity cancellations.
pub fn energy_terms_iterative(ctx: &LevelContext, energies: &[f64], l: usize) -> Result<Vec<(Vec<usize>, C64)>> {
    ctx.require_nondegenerate("the iterative energy formula")?;
    ctx.require_order(2 * l, 1)?;
    if energies.len() < l {
        return Err(Error::InvalidArgument(format!("E_0 .. E_{} are needed", l - 1)));
    }
    let chi0 = ctx.ground();
    let mut memo = HashMap::new();
    let mut out = Vec::new();
    for nu in 1..=2 * l {
        for j in compositions(2 * l, nu) {
            let value = if nu == 1 {
                chi0.dotc(&(ctx.h(j[0]) * &chi0))
            } else {
                let tail = iterative_suffix(ctx, energies, &j[1..], &mut memo);
                chi0.dotc(&(ctx.h(j[0]) * tail).column(0))
            };
            out.push((j, value));
        }
    }
    Ok(out)
}

/// `P_0 .. P_a` as dense matrices,
/// `P_l = - sum_nu sum_{|j| = l} sum_{k in N_0^{nu+1}, |k| = nu} O_{k1} H_{j1} ... O_{k_nu} H_{j_nu} O_{k_{nu+1}}`.
pub fn projector_coefficients(ctx: &LevelContext, a: usize) -> Result<Vec<CMatrix>> {
    guard_order(a)?;
    ctx.require_order(a, a)?;
    let dim = ctx.vectors.nrows();
    let mut out = vec![ctx.projector0()];
    // memo: suffix (j_k, k_{k+1}, ..., j_nu, k_{nu+1}) -> matrix
    let mut memo: HashMap<Vec<usize>, CMatrix> = HashMap::new();
    for l in 1..=a {
        let mut total = CMatrix::zeros(dim, dim);
        for nu in 1..=l {
            for j in compositions(l, nu) {
                for k in weak_compositions(nu, nu + 1) {
                    let mut key = vec![k[nu]];
                    let mut current = ctx.resolvent(k[nu]);
                    for i in (0..nu).rev() {
                        key.push(j[i]);
                        key.push(k[i]);
                        current = match memo.get(&key) {
                            Some(x) => x.clone(),
                            None => {
                                let x = ctx.apply_resolvent(k[i], &(ctx.h(j[i]) * &current));
                                memo.insert(key.clone(), x.clone());
                                x
                            }
                        };
                    }
                    total -= current;
                }
            }
        }
        out.push(total);
    }
    Ok(out)
}

/// Wavefunction coefficients of a non-degenerate level.
#[derive(Debug, Clone)]
pub struct WavefunctionCoefficients {
    /// `chi~_0 = chi_0, chi~_1, ..., chi~_a`.
    pub chi_tilde: Vec<CVector>,
    /// `alpha_0 = 1, alpha_1, ..., alpha_a` as given by the recursion.
    pub alpha: Vec<C64>,
    /// `chi_l = sum_j alpha_j chi~_{l-j}`.
    pub chi: Vec<CVector>,
    /// `chi~_l` from the iterative resolvent formula.
    pub chi_tilde_iterative: Vec<CVector>,
    /// Largest deviation between the two constructions of `chi~`.
    pub iterative_deviation: f64,
}

/// `chi~_l = sum over compositions j of l of P_{j1} ... P_{j_nu} chi_0`,
/// normalization parameters `alpha_l`, and `chi_l`. The projector
/// coefficients must come from the same context, up to order `a`.
pub fn wavefunction_coefficients(ctx: &LevelContext, projectors: &[CMatrix], a: usize) -> Result<WavefunctionCoefficients> {
    guard_order(a)?;
    ctx.require_nondegenerate("the wavefunction expansion")?;
    if projectors.len() <= a {
        return Err(Error::InvalidArgument(format!("projector coefficients up to P_{a} are required")));
    }
    let chi0 = ctx.ground();
    // grouping the compositions by their first part gives chi~_l = sum_k P_k chi~_{l-k}
    let mut chi_tilde = vec![chi0.clone()];
    for l in 1..=a {
        let mut acc = CVector::zeros(chi0.len());
        for k in 1..=l {
            acc += &projectors[k] * &chi_tilde[l - k];
        }
        chi_tilde.push(acc);
    }
    let mut alpha = vec![C64::new(1.0, 0.0)];
    for l in 1..=a {
        let mut acc = ZERO;
        for j in weak_compositions(l, 4) {
            if j[0] < l && j[1] < l {
                acc += alpha[j[0]] * alpha[j[1]] * chi_tilde[j[2]].dotc(&chi_tilde[j[3]]);
            }
        }
        alpha.push(acc * -0.5);
    }
    let chi: Vec<CVector> = (0..=a)
        .map(|l| (0..=l).fold(CVector::zeros(chi0.len()), |acc, j| acc + &chi_tilde[l - j] * alpha[j]))
        .collect();

    let energies = if a >= 2 { energy_coefficients_iterative(ctx, (a - 1) / 2)? } else { vec![ctx.energy0()] };
    let chi_tilde_iterative = chi_tilde_iterative(ctx, &energies, a)?;
    let iterative_deviation = chi_tilde
        .iter()
        .zip(&chi_tilde_iterative)
        .map(|(x, y)| (x - y).camax())
        .fold(0.0, f64::max);
    Ok(WavefunctionCoefficients {
        chi_tilde,
        alpha,
        chi,
        chi_tilde_iterative,
        iterative_deviation,
    })
}

/// `chi~_l = sum_nu sum_{|j| = l} O_1 H'_{j1} ... O_1 H'_{j_{nu-1}} O_1 H_{j_nu} chi_0`
/// for `l = 0 .. a`; needs `E_0 .. E_{(a-1)/2}`.
pub fn chi_tilde_iterative(ctx: &LevelContext, energies: &[f64], a: usize) -> Result<Vec<CVector>> {
    ctx.require_nondegenerate("the iterative wavefunction formula")?;
    ctx.require_order(a, 1)?;
    if a >= 2 && energies.len() <= (a - 1) / 2 {
        return Err(Error::InvalidArgument(format!("E_0 .. E_{} are needed", (a - 1) / 2)));
    }
    let chi0 = ctx.ground();
    let mut memo = HashMap::new();
    let mut out = vec![chi0.clone()];
    for l in 1..=a {
        let mut acc = CVector::zeros(chi0.len());
        for nu in 1..=l {
            for j in compositions(l, nu) {
                acc += iterative_suffix(ctx, energies, &j, &mut memo).column(0);
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// `P^wf_l = sum_{j in N_0^4, |j| = l} alpha_{j1} conj(alpha_{j2}) |chi~_{j3}><chi~_{j4}|`.
pub fn wavefunction_projectors(wf: &WavefunctionCoefficients, a: usize) -> Vec<CMatrix> {
    let dim = wf.chi_tilde[0].len();
    (0..=a.min(wf.alpha.len() - 1))
        .map(|l| {
            let mut acc = CMatrix::zeros(dim, dim);
            for j in weak_compositions(l, 4) {
                let weight = wf.alpha[j[0]] * wf.alpha[j[1]].conj();
                acc += &wf.chi_tilde[j[2]] * wf.chi_tilde[j[3]].adjoint() * weight;
            }
            acc
        })
        .collect()
}

/// `sum_{j=0}^{l} P_j P_{l-j} - P_l` for `l = 0 .. a`, maximal entry.
pub fn convolution_residuals(projectors: &[CMatrix]) -> Vec<f64> {
    (0..projectors.len())
        .map(|l| {
            let mut acc = -projectors[l].clone();
            for j in 0..=l {
                acc += &projectors[j] * &projectors[l - j];
            }
            acc.camax()
        })
        .collect()
}

/// `Tr(A^dagger B)` for two operators given densely.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

use super::basis::{FockBasis, NParticleBasis, OccupationBasis};
use super::operator::FockOperator;
use crate::error::{check_budget, Error, Result};
use crate::linalg::{re, CMatrix, C64, ZERO};
use crate::model::{HartreeSolution, Kernels, ModelSpec};
use std::sync::Arc;

/// A normal-ordered monomial `coefficient * a^dagger_{c_1} ... a^dagger_{c_k} a_{a_1} ... a_{a_l}`.
pub struct Monomial {
    pub coefficient: C64,
    pub creators: Vec<usize>,
    pub annihilators: Vec<usize>,
}

/// Applies a monomial to one occupation array; returns the target and amplitude.
fn act(monomial: &Monomial, state: &[u16]) -> Option<(Vec<u16>, f64)> {
    let mut occ = state.to_vec();
    let mut amplitude = 1.0f64;
    for &mode in monomial.annihilators.iter().rev() {
        let n = occ[mode];
        if n == 0 {
            return None;
        }
        amplitude *= (n as f64).sqrt();
        occ[mode] = n - 1;
    }
    for &mode in monomial.creators.iter().rev() {
        let n = occ[mode];
        amplitude *= (n as f64 + 1.0).sqrt();
        occ[mode] = n + 1;
    }
    Some((occ, amplitude))
}

/// Matrix elements of a sum of monomials between states of one basis,
/// dropping images outside the basis (hard truncation).
pub fn second_quantize<B: OccupationBasis>(basis: &B, monomials: &[Monomial]) -> Vec<(usize, usize, C64)> {
    let mut triplets = Vec::new();
    for (col, state) in basis.states().iter().enumerate() {
        for monomial in monomials {
            if monomial.coefficient == ZERO {
                continue;
            }
            if let Some((target, amplitude)) = act(monomial, state) {
                if let Some(row) = basis.index_of(&target) {
                    triplets.push((row, col, monomial.coefficient * amplitude));
                }
            }
        }
    }
    triplets
}

fn operator_from(basis: &Arc<FockBasis>, monomials: &[Monomial], shift: i64) -> FockOperator {
    FockOperator::from_triplets(basis.clone(), second_quantize(basis.as_ref(), monomials), [shift])
}

/// Creation and annihilation operators.
pub struct Ladder {
    pub raise: FockOperator,
    pub lower: FockOperator,
}

/// Ladder operators of excitation mode `mode` (1-based, matching the `h`
/// eigenbasis index; mode 0 is the condensate).
pub fn ladder(basis: &Arc<FockBasis>, mode: usize) -> Result<Ladder> {
    if mode == 0 || mode > basis.modes() {
        return Err(Error::InvalidArgument(format!(
            "mode {mode} outside 1..={}",
            basis.modes()
        )));
    }
    let raise = operator_from(
        basis,
        &[Monomial {
            coefficient: re(1.0),
            creators: vec![mode - 1],
            annihilators: vec![],
        }],
        1,
    );
    let lower = raise.adjoint();
    Ok(Ladder { raise, lower })
}

pub fn number_operator(basis: &Arc<FockBasis>) -> FockOperator {
    FockOperator::diagonal(basis.clone(), |n| n as f64)
}

/// The operators `K0`..`K4` on a truncated excitation Fock space.
#[derive(Debug, Clone)]
pub struct Kops {
    pub basis: Arc<FockBasis>,
    /// `dGamma(h)` on the excitation modes.
    pub k0: FockOperator,
    /// `sum K1[m,n] a^dagger_m a_n`.
    pub k1: FockOperator,
    /// `1/2 sum K2[m,n] a^dagger_m a^dagger_n`.
    pub k2: FockOperator,
    /// `sum K3[m,n;p] a^dagger_m a^dagger_n a_p`.
    pub k3: FockOperator,
    /// `1/2 sum K4[m,n,p,q] a^dagger_m a^dagger_n a_p a_q`.
    pub k4: FockOperator,
}

pub fn build_kops(kernels: &Kernels, basis: &Arc<FockBasis>) -> Result<Kops> {
    let e = kernels.excitation_modes();
    if basis.modes() != e {
        return Err(Error::DimensionMismatch {
            expected: e,
            found: basis.modes(),
        });
    }
    let eps = kernels.excitation_energies();
    let numbers_k0 = {
        let triplets: Vec<_> = basis
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let energy: f64 = s.iter().zip(eps).map(|(&n, &x)| n as f64 * x).sum();
                (i, i, re(energy))
            })
            .collect();
        FockOperator::from_triplets(basis.clone(), triplets, [0])
    };
    let mut m1 = Vec::new();
    let mut m2 = Vec::new();
    let mut m3 = Vec::new();
    let mut m4 = Vec::new();
    for m in 0..e {
        for n in 0..e {
            m1.push(Monomial {
                coefficient: kernels.k1[(m, n)],
                creators: vec![m],
                annihilators: vec![n],
            });
            m2.push(Monomial {
                coefficient: kernels.k2[(m, n)] * 0.5,
                creators: vec![m, n],
                annihilators: vec![],
            });
            for p in 0..e {
                m3.push(Monomial {
                    coefficient: kernels.k3(m, n, p),
                    creators: vec![m, n],
                    annihilators: vec![p],
                });
                for q in 0..e {
                    m4.push(Monomial {
                        coefficient: kernels.k4(m, n, p, q) * 0.5,
                        creators: vec![m, n],
                        annihilators: vec![p, q],
                    });
                }
            }
        }
    }
    Ok(Kops {
        basis: basis.clone(),
        k0: numbers_k0,
        k1: operator_from(basis, &m1, 0),
        k2: operator_from(basis, &m2, 2),
        k3: operator_from(basis, &m3, 1),
        k4: operator_from(basis, &m4, 0),
    })
}

/// Second-quantized `H_N = sum T_mn a^dagger_m a_n + lambda/2 sum V[m,n,p,q] a^dagger_m a^dagger_n a_p a_q`
/// on the fixed-N sector, with `lambda = 1/(N-1)`, as a dense matrix.
pub fn build_hn(model: &ModelSpec, particles: usize) -> Result<(NParticleBasis, CMatrix)> {
    if particles < 2 {
        return Err(Error::InvalidArgument("at least two particles are required".into()));
    }
    let d = model.modes();
    let dim = NParticleBasis::dimension(d, particles);
    check_budget("N-body Hamiltonian", dim * dim * 16)?;
    let basis = NParticleBasis::new(d, particles)?;
    let lambda = 1.0 / (particles as f64 - 1.0);
    let mut monomials = Vec::new();
    for m in 0..d {
        for n in 0..d {
            monomials.push(Monomial {
                coefficient: model.one_body()[(m, n)],
                creators: vec![m],
                annihilators: vec![n],
            });
            for p in 0..d {
                for q in 0..d {
                    monomials.push(Monomial {
                        coefficient: model.v(m, n, p, q) * (0.5 * lambda),
                        creators: vec![m, n],
                        annihilators: vec![p, q],
                    });
                }
            }
        }
    }
    let mut h = CMatrix::zeros(basis.dim(), basis.dim());
    for (r, c, v) in second_quantize(&basis, &monomials) {
        h[(r, c)] += v;
    }
    Ok((basis, h))
}

/// The unitary `U_{N,phi}` from the N-particle space (model basis) onto the
/// excitation Fock space with cutoff `N` over the `h` eigenmodes `1..M-1`.
///
/// Built from the second quantization `G` of the basis change to the `h`
/// eigenbasis: a Fock state with excitation occupations `nu` is the image of
/// the `h` eigenbasis occupation state `(N - |nu|, nu)`, so `U = G^dagger`
/// with rows relabelled.
pub fn excitation_map(kernels: &Kernels, particles: usize) -> Result<(NParticleBasis, Arc<FockBasis>, CMatrix)> {
    let d = kernels.modes();
    let dim = NParticleBasis::dimension(d, particles);
    check_budget("excitation map", dim * dim * 16)?;
    let basis_change = &kernels.basis;
    // Columns of G for every particle number k <= N, built recursively.
    let mut previous_basis = NParticleBasis::new(d, 0)?;
    let mut previous_columns = CMatrix::from_element(1, 1, re(1.0));
    for k in 1..=particles {
        let current_basis = NParticleBasis::new(d, k)?;
        let mut columns = CMatrix::zeros(current_basis.dim(), current_basis.dim());
        for (col, occupation) in current_basis.states().iter().enumerate() {
            let j = occupation.iter().position(|&x| x > 0).expect("k >= 1 particles");
            let mut lowered = occupation.clone();
            lowered[j] -= 1;
            let source = previous_basis.index_of(&lowered).expect("lowered state exists");
            let norm = 1.0 / (occupation[j] as f64).sqrt();
            for (prev_row, prev_state) in previous_basis.states().iter().enumerate() {
                let amplitude = previous_columns[(prev_row, source)];
                if amplitude == ZERO {
                    continue;
                }
                let mut raised = prev_state.clone();
                for x in 0..d {
                    let coeff = basis_change[(x, j)];
                    if coeff == ZERO {
                        continue;
                    }
                    let factor = (raised[x] as f64 + 1.0).sqrt();
                    raised[x] += 1;
                    let row = current_basis.index_of(&raised).expect("raised state exists");
                    columns[(row, col)] += amplitude * coeff * (factor * norm);
                    raised[x] -= 1;
                }
            }
        }
        previous_basis = current_basis;
        previous_columns = columns;
    }
    let fock = Arc::new(FockBasis::new(d - 1, particles)?);
    let mut unitary = CMatrix::zeros(fock.dim(), previous_basis.dim());
    for (col, occupation) in previous_basis.states().iter().enumerate() {
        let row = fock.index_of(&occupation[1..]).expect("excitation occupation is in the Fock basis");
        for model_row in 0..previous_basis.dim() {
            unitary[(row, model_row)] = previous_columns[(model_row, col)].conj();
        }
    }
    Ok((previous_basis, fock, unitary))
}

/// Convenience: the excitation map with its kernels built from a solution.
pub fn excitation_map_for(sol: &HartreeSolution, model: &ModelSpec, particles: usize) -> Result<CMatrix> {
    let kernels = crate::model::build_kernels(sol, model)?;
    Ok(excitation_map(&kernels, particles)?.2)
}

/// The number-dependent Hamiltonian
/// `K0 + (1 - (N-1)^{-1}(N-1_N)) K1 + (K2 g2 + h.c.) + (K3 g3 + h.c.) + K4/(N-1)`
/// with `g2 = sqrt([(N-n)(N-n-1)]_+)/(N-1)` and `g3 = sqrt([N-n]_+)/(N-1)`
/// evaluated on the input state. On the basis with cutoff `N` this is the
/// excitation Hamiltonian; on other cutoffs it is its positive-part extension.
pub fn number_dependent_hamiltonian(kops: &Kops, particles: usize) -> FockOperator {
    let n_total = particles as f64;
    let inv = 1.0 / (n_total - 1.0);
    let k1_term = kops.k1.number_fn_times(|n| 1.0 - (n as f64 - 1.0) * inv);
    let k2_term = kops
        .k2
        .times_number_fn(|n| ((n_total - n as f64) * (n_total - n as f64 - 1.0)).max(0.0).sqrt() * inv)
        .plus_adjoint();
    let k3_term = kops
        .k3
        .times_number_fn(|n| (n_total - n as f64).max(0.0).sqrt() * inv)
        .plus_adjoint();
    kops.k0
        .add(&k1_term)
        .add(&k2_term)
        .add(&k3_term)
        .add(&kops.k4.scaled(re(inv)))
}

/// Excitation Hamiltonian on the Fock space with cutoff `N`.
pub fn build_excitation_hamiltonian(kernels: &Kernels, particles: usize) -> Result<FockOperator> {
    if particles < 2 {
        return Err(Error::InvalidArgument("at least two particles are required".into()));
    }
    let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), particles)?);
    let kops = build_kops(kernels, &basis)?;
    Ok(number_dependent_hamiltonian(&kops, particles))
}

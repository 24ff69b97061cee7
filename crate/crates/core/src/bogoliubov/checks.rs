use super::quadratic::BogoliubovMap;
use super::spectral::SpectralData;
use crate::error::Result;
use crate::fock::{ladder, number_operator, FockBasis, FockOperator, OccupationBasis};
use crate::linalg::{eigh, re, CMatrix, CVector, C64};
use std::sync::Arc;

/// Correlation functions of mode ladder operators in a Fock-space vector.
#[derive(Debug, Clone)]
pub struct WickReport {
    /// Largest `|<o_i>|` over all ladder operators.
    pub max_one_point: f64,
    /// Largest `|<o_i o_j o_k>|`.
    pub max_three_point: f64,
    /// Largest deviation of a 4-point function from the sum over pairings.
    pub max_four_point_residual: f64,
    /// `<a*_m a_n>` over excitation modes.
    pub one_body_density: CMatrix,
    /// `<a_m a_n>` over excitation modes.
    pub pairing: CMatrix,
}

/// Embeds a vector of a truncated Fock space into one with a larger cutoff.
pub fn embed(vector: &CVector, from: &FockBasis, to: &FockBasis) -> CVector {
    let mut out = CVector::zeros(to.dim());
    for (i, state) in from.states().iter().enumerate() {
        let j = to.index_of(state).expect("target basis contains the source basis");
        out[j] = vector[i];
    }
    out
}

/// Checks Wick's rule for all 1-, 2-, 3- and 4-point functions of the ladder
/// operators in `state`. The state is padded into a basis with four extra
/// particles so that products of up to four ladder operators act exactly.
pub fn quasifree_groundstate_check(state: &CVector, basis: &FockBasis) -> Result<WickReport> {
    let e = basis.modes();
    let padded = Arc::new(FockBasis::new(e, basis.nmax() + 4)?);
    let chi = embed(state, basis, &padded);
    let chi = &chi / re(chi.norm());
    let mut ops: Vec<FockOperator> = Vec::new();
    for mode in 1..=e {
        ops.push(ladder(&padded, mode)?.lower);
    }
    for mode in 1..=e {
        ops.push(ladder(&padded, mode)?.raise);
    }
    let count = ops.len();
    let daggers: Vec<FockOperator> = ops.iter().map(|o| o.adjoint()).collect();
    let single: Vec<CVector> = ops.iter().map(|o| o.apply(&chi)).collect();
    let one_point: Vec<C64> = single.iter().map(|v| chi.dotc(v)).collect();
    // right[k*count + l] = o_k o_l chi; left[i*count + j] = (o_i o_j)^dagger chi
    let mut right = Vec::with_capacity(count * count);
    let mut left = Vec::with_capacity(count * count);
    for k in 0..count {
        for l in 0..count {
            right.push(ops[k].apply(&single[l]));
        }
    }
    for i in 0..count {
        for j in 0..count {
            left.push(daggers[j].apply(&daggers[i].apply(&chi)));
        }
    }
    let two = |i: usize, j: usize| chi.dotc(&right[i * count + j]);
    let mut max_three = 0.0f64;
    for i in 0..count {
        for j in 0..count {
            for k in 0..count {
                let value = daggers[i].apply(&chi).dotc(&right[j * count + k]);
                max_three = max_three.max(value.norm());
            }
        }
    }
    let mut max_four = 0.0f64;
    for i in 0..count {
        for j in 0..count {
            for k in 0..count {
                for l in 0..count {
                    let full = left[i * count + j].dotc(&right[k * count + l]);
                    let pairings = two(i, j) * two(k, l) + two(i, k) * two(j, l) + two(i, l) * two(j, k);
                    max_four = max_four.max((full - pairings).norm());
                }
            }
        }
    }
    let one_body_density = CMatrix::from_fn(e, e, |m, n| two(e + m, n));
    let pairing = CMatrix::from_fn(e, e, two);
    Ok(WickReport {
        max_one_point: one_point.iter().map(|z| z.norm()).fold(0.0, f64::max),
        max_three_point: max_three,
        max_four_point_residual: max_four,
        one_body_density,
        pairing,
    })
}

/// `<chi, (N+1)^b chi>` next to the bound `C_V^b b^b`.
#[derive(Debug, Clone, PartialEq)]
pub struct NumberMoment {
    pub power: u32,
    pub moment: f64,
    pub bound: f64,
}

pub fn number_moments(state: &CVector, basis: &FockBasis, map: &BogoliubovMap, powers: &[u32]) -> Vec<NumberMoment> {
    let numbers = basis.numbers();
    let constant = map.number_bound_constant();
    powers
        .iter()
        .map(|&b| {
            let moment = state
                .iter()
                .zip(&numbers)
                .map(|(z, &n)| z.norm_sqr() * (n as f64 + 1.0).powi(b as i32))
                .sum::<f64>();
            NumberMoment {
                power: b,
                moment,
                bound: constant.powi(b as i32) * (b as f64).powi(b as i32),
            }
        })
        .collect()
}

/// Smallest eigenvalue of `c (H_0 - E_0 + 1) - (N + 1)` with
/// `c = C_V max(1, 1/d_min)`, together with `c`.
pub fn number_vs_h0(sd: &SpectralData, h0: &FockOperator, map: &BogoliubovMap, d_min: f64) -> (f64, f64) {
    let c = map.number_bound_constant() * (1.0 / d_min).max(1.0);
    let dim = sd.dim();
    let shifted = h0.to_dense() - CMatrix::identity(dim, dim) * re(sd.energy(0) - 1.0);
    let number = number_operator(h0.basis()).to_dense() + CMatrix::identity(dim, dim);
    let diff = shifted * re(c) - number;
    (eigh(&diff).0[0], c)
}

//! Operator coefficients `H_j` of the excitation Hamiltonian in powers of
//! `lambda^{1/2}`, and the exact remainders after truncating that series.

use super::taylor::{linear_remainder, pair_remainder, taylor_coefficients, CoefficientTable};
use crate::bogoliubov::build_h0;
use crate::error::{Error, Result};
use crate::fock::{number_dependent_hamiltonian, FockOperator, Kops, OccupationBasis};
use crate::linalg::{max_abs_diff, re, CMatrix};
use serde::Serialize;

/// `H_j` for `j >= 1` (and `H_0` for `j = 0`).
pub fn build_hj(kops: &Kops, table: &CoefficientTable, j: usize) -> FockOperator {
    let shifted = |n: usize, power: usize| (n as f64 - 1.0).powi(power as i32);
    match j {
        0 => build_h0(kops),
        1 => kops.k3.plus_adjoint(),
        2 => {
            let k1 = kops.k1.number_fn_times(|n| -(n as f64 - 1.0));
            let k2 = kops.k2.times_number_fn(|n| -(n as f64 - 0.5)).plus_adjoint();
            k1.add(&k2).add(&kops.k4)
        }
        _ if j % 2 == 1 => {
            let i = j.div_ceil(2);
            kops.k3
                .times_number_fn(|n| shifted(n, i - 1))
                .scaled(re(table.c_plain(i - 1)))
                .plus_adjoint()
        }
        _ => {
            let i = j / 2;
            let mut acc = FockOperator::zero(kops.basis.clone());
            for nu in 0..=i {
                let d = table.d[i][nu];
                acc = acc.add(&kops.k2.times_number_fn(|n| d * shifted(n, nu)));
            }
            acc.plus_adjoint()
        }
    }
}

/// `H_0 .. H_order` on a common basis, with dense copies for chain products.
#[derive(Debug, Clone)]
pub struct OperatorCoefficients {
    pub kops: Kops,
    pub table: CoefficientTable,
    pub h: Vec<FockOperator>,
    pub dense: Vec<CMatrix>,
}

impl OperatorCoefficients {
    pub fn new(kops: Kops, order: usize) -> Self {
        let table = taylor_coefficients(order / 2 + 2);
        let h: Vec<FockOperator> = (0..=order).map(|j| build_hj(&kops, &table, j)).collect();
        let dense = h.iter().map(|op| op.to_dense()).collect();
        OperatorCoefficients { kops, table, h, dense }
    }

    pub fn order(&self) -> usize {
        self.h.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.kops.basis.dim()
    }
}

/// Remainder `R_a` with `H< - sum_{j<=a} lambda^{j/2} H_j = lambda^{(a+1)/2} R_a`.
pub fn remainder_operator(kops: &Kops, table: &CoefficientTable, a: usize, particles: usize) -> FockOperator {
    let lam = 1.0 / (particles as f64 - 1.0);
    let half = re(lam.sqrt());
    let r2 = |j: usize| kops.k2.times_number_fn(|n| pair_remainder(table, j, particles, n));
    let r3 = |j: usize| kops.k3.times_number_fn(|n| linear_remainder(table, j, particles, n));
    let k1_shift = kops.k1.number_fn_times(|n| -(n as f64 - 1.0));
    match a {
        0 => {
            let k3 = kops
                .k3
                .times_number_fn(|n| ((particles as f64 - n as f64).max(0.0) * lam).sqrt())
                .plus_adjoint();
            let inner = r2(0).plus_adjoint().add(&k1_shift).add(&kops.k4);
            k3.add(&inner.scaled(half))
        }
        1 => k1_shift
            .add(&r2(0).plus_adjoint())
            .add(&r3(0).plus_adjoint().scaled(half))
            .add(&kops.k4),
        _ if a.is_multiple_of(2) => {
            let j = a / 2;
            r3(j - 1).add(&r2(j).scaled(half)).plus_adjoint()
        }
        _ => {
            let j = a / 2;
            r2(j).add(&r3(j).scaled(half)).plus_adjoint()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RemainderReport {
    pub a: usize,
    pub particles: usize,
    pub residual: f64,
    pub holds: bool,
}

/// Compares both sides of the remainder identity entrywise (tolerance 1e-10).
pub fn remainder_identity_check(kops: &Kops, table: &CoefficientTable, a: usize, particles: usize) -> Result<RemainderReport> {
    if particles < 2 || kops.basis.nmax() > particles {
        return Err(Error::InvalidArgument(format!(
            "remainder identity needs 2 <= N and nmax <= N (N = {particles}, nmax = {})",
            kops.basis.nmax()
        )));
    }
    if table.jmax() < a / 2 + 1 {
        return Err(Error::InvalidArgument(format!("coefficient table too short for a = {a}")));
    }
    let lam = 1.0 / (particles as f64 - 1.0);
    let mut lhs = number_dependent_hamiltonian(kops, particles).to_dense();
    for j in 0..=a {
        lhs -= build_hj(kops, table, j).to_dense() * re(lam.powf(j as f64 / 2.0));
    }
    let rhs = remainder_operator(kops, table, a, particles).to_dense() * re(lam.powf((a as f64 + 1.0) / 2.0));
    let residual = max_abs_diff(&lhs, &rhs);
    Ok(RemainderReport {
        a,
        particles,
        residual,
        holds: residual <= 1e-10,
    })
}

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::linalg::{eigh, fix_phase, re, CMatrix, CVector, C64, ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HartreeOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub damping: f64,
    pub random_starts: usize,
    pub seed: u64,
}

impl Default for HartreeOptions {
    fn default() -> Self {
        HartreeOptions {
            max_iter: 2000,
            tol: 1e-12,
            damping: 0.5,
            random_starts: 3,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone)]
pub struct HartreeSolution {
    pub phi: CVector,
    /// Hartree energy per particle.
    pub e_h: f64,
    pub mu_h: f64,
    /// Mean-field operator `T + V_phi - mu`, so that `h phi = 0`.
    pub h: CMatrix,
    /// Second-smallest eigenvalue of `h`.
    pub g_h: f64,
    /// Projector onto the complement of `phi`.
    pub q: CMatrix,
    pub iterations: usize,
    /// Hartree energy after each accepted iteration of the winning start.
    pub energy_history: Vec<f64>,
    pub residual: f64,
}

/// Mean-field matrix `V_phi[m,p] = sum_{n,q} V[m,n,p,q] conj(phi_n) phi_q`.
pub fn mean_field_matrix(model: &ModelSpec, phi: &CVector) -> CMatrix {
    let d = model.modes();
    let mut density = vec![ZERO; d * d];
    for n in 0..d {
        for q in 0..d {
            density[n * d + q] = phi[n].conj() * phi[q];
        }
    }
    CMatrix::from_fn(d, d, |m, p| {
        let mut acc = ZERO;
        for n in 0..d {
            for q in 0..d {
                acc += model.v(m, n, p, q) * density[n * d + q];
            }
        }
        acc
    })
}

/// Hartree energy `<phi, T phi> + 1/2 <phi, V_phi phi>` of a unit vector.
pub fn hartree_energy(model: &ModelSpec, phi: &CVector) -> f64 {
    let vphi = mean_field_matrix(model, phi);
    let kinetic = phi.dotc(&(model.one_body() * phi)).re;
    let interaction = phi.dotc(&(&vphi * phi)).re;
    kinetic + 0.5 * interaction
}

struct Converged {
    phi: CVector,
    energy: f64,
    iterations: usize,
    history: Vec<f64>,
    residual: f64,
}

fn residual_of(model: &ModelSpec, phi: &CVector) -> f64 {
    let f = model.one_body() + mean_field_matrix(model, phi);
    let fphi = &f * phi;
    let mu = phi.dotc(&fphi);
    (fphi - phi * mu).norm()
}

/// Damped self-consistent iteration from one start.
///
/// Each step mixes the current vector with the ground state of the current
/// mean-field operator; the mixing weight starts at `damping` and is halved
/// until the Hartree energy does not increase.
fn scf_from(model: &ModelSpec, start: CVector, opts: &HartreeOptions) -> std::result::Result<Converged, Vec<f64>> {
    let mut phi = start.clone() / re(start.norm());
    let mut energy = hartree_energy(model, &phi);
    let mut history = vec![energy];
    let mut residuals = Vec::new();
    for iteration in 0..opts.max_iter {
        let f = model.one_body() + mean_field_matrix(model, &phi);
        let fphi = &f * &phi;
        let mu = phi.dotc(&fphi);
        let residual = (&fphi - &phi * mu).norm();
        residuals.push(residual);
        if residual <= opts.tol {
            return Ok(Converged {
                phi,
                energy,
                iterations: iteration,
                history,
                residual,
            });
        }
        let (_, vectors) = eigh(&f);
        let mut target: CVector = vectors.column(0).into_owned();
        let overlap = target.dotc(&phi);
        if overlap.norm() > 1e-300 {
            target *= overlap / overlap.norm();
        }
        let mut weight = opts.damping;
        let mut accepted = false;
        for _ in 0..60 {
            let mixed = &phi * re(1.0 - weight) + &target * re(weight);
            let norm = mixed.norm();
            if norm > 1e-12 {
                let candidate = mixed / re(norm);
                let candidate_energy = hartree_energy(model, &candidate);
                if candidate_energy <= energy + 1e-14 * energy.abs().max(1.0) {
                    phi = candidate;
                    energy = candidate_energy;
                    accepted = true;
                    break;
                }
            }
            weight *= 0.5;
        }
        history.push(energy);
        if !accepted {
            break;
        }
    }
    let residual = residual_of(model, &phi);
    if residual <= opts.tol {
        Ok(Converged {
            phi,
            energy,
            iterations: opts.max_iter,
            history,
            residual,
        })
    } else {
        residuals.push(residual);
        Err(residuals)
    }
}

fn lexicographic_abs(a: &CVector, b: &CVector) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        match x.norm().partial_cmp(&y.norm()) {
            Some(Ordering::Equal) | None => continue,
            Some(o) if (x.norm() - y.norm()).abs() > 1e-10 => return o,
            _ => continue,
        }
    }
    Ordering::Equal
}

/// Minimizes the Hartree functional on the unit sphere.
///
/// Starts from the ground state of `T` and from `opts.random_starts` random
/// unit vectors; among converged stationary points that are ground states of
/// their own mean-field operator, the lowest energy wins (ties broken by the
/// lexicographically largest `|phi|`).
pub fn hartree_solve(model: &ModelSpec, opts: &HartreeOptions) -> Result<HartreeSolution> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let d = model.modes();
    let mut starts = Vec::new();
    let (_, t_vectors) = eigh(model.one_body());
    starts.push(t_vectors.column(0).into_owned());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    for _ in 0..opts.random_starts {
        starts.push(CVector::from_fn(d, |_, _| {
            C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        }));
    }
    let mut best: Option<Converged> = None;
    let mut last_failure = Vec::new();
    for start in starts {
        match scf_from(model, start, opts) {
            Ok(found) => {
                let h = model.one_body() + mean_field_matrix(model, &found.phi);
                let mu = found.phi.dotc(&(&h * &found.phi)).re;
                let lowest = eigh(&h).0[0] - mu;
                if lowest < -1e-8 * mu.abs().max(1.0) {
                    continue;
                }
                let better = match &best {
                    None => true,
                    Some(b) => {
                        let scale = b.energy.abs().max(1.0);
                        if found.energy < b.energy - 1e-10 * scale {
                            true
                        } else if found.energy <= b.energy + 1e-10 * scale {
                            let mut x = found.phi.clone();
                            let mut y = b.phi.clone();
                            fix_phase(&mut x);
                            fix_phase(&mut y);
                            lexicographic_abs(&x, &y) == Ordering::Greater
                        } else {
                            false
                        }
                    }
                };
                if better {
                    best = Some(found);
                }
            }
            Err(residuals) => last_failure = residuals,
        }
    }
    let best = best.ok_or_else(|| Error::NonConvergence {
        iterations: opts.max_iter,
        last: last_failure.last().copied().unwrap_or(f64::NAN),
        residuals: last_failure.clone(),
    })?;
    let mut phi = best.phi;
    fix_phase(&mut phi);
    let solution = solution_from_phi(model, phi, best.iterations, best.history, best.residual);
    if !(solution.g_h > 1e-10) {
        return Err(Error::DegenerateHartree { gap: solution.g_h });
    }
    Ok(solution)
}

/// Assembles `e_H`, `mu_H`, `h`, `g_H` and `q` for a given stationary unit vector.
pub(crate) fn solution_from_phi(
    model: &ModelSpec,
    phi: CVector,
    iterations: usize,
    energy_history: Vec<f64>,
    residual: f64,
) -> HartreeSolution {
    let d = model.modes();
    let f = model.one_body() + mean_field_matrix(model, &phi);
    let mu_h = phi.dotc(&(&f * &phi)).re;
    let mut h = f - CMatrix::identity(d, d) * re(mu_h);
    h = (&h + h.adjoint()) * re(0.5);
    let values = eigh(&h).0;
    let g_h = values.get(1).copied().unwrap_or(f64::INFINITY);
    let q = CMatrix::identity(d, d) - &phi * phi.adjoint();
    HartreeSolution {
        e_h: hartree_energy(model, &phi),
        mu_h,
        h,
        g_h,
        q,
        phi,
        iterations,
        energy_history,
        residual,
    }
}

impl HartreeSolution {
    /// The same stationary point with `phi` multiplied by `e^{i theta}`.
    pub fn with_phase(&self, model: &ModelSpec, theta: f64) -> HartreeSolution {
        let phi = &self.phi * C64::from_polar(1.0, theta);
        solution_from_phi(model, phi, self.iterations, self.energy_history.clone(), self.residual)
    }
}

use crate::combinatorics::{binomial, weak_compositions};
use crate::error::{check_budget, Error, Result};
use std::collections::HashMap;
use std::ops::Range;

pub type Occupation = Vec<u16>;

/// Shared storage of an ordered list of occupation arrays with index lookup.
#[derive(Debug, Clone, PartialEq)]
struct Occupations {
    modes: usize,
    states: Vec<Occupation>,
    lookup: HashMap<Occupation, usize>,
}

impl Occupations {
    fn from_states(modes: usize, states: Vec<Occupation>) -> Self {
        let lookup = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Occupations { modes, states, lookup }
    }

    fn sector(modes: usize, particles: usize) -> Vec<Occupation> {
        weak_compositions(particles, modes)
            .into_iter()
            .map(|s| s.into_iter().map(|x| x as u16).collect())
            .collect()
    }
}

/// Common interface of occupation-number bases.
pub trait OccupationBasis {
    fn modes(&self) -> usize;
    fn states(&self) -> &[Occupation];
    fn index_of(&self, occupation: &[u16]) -> Option<usize>;
    fn dim(&self) -> usize {
        self.states().len()
    }
    fn total(&self, index: usize) -> usize {
        self.states()[index].iter().map(|&x| x as usize).sum()
    }
}

/// Truncated Fock space over `modes` excitation modes with at most `nmax`
/// particles; states ordered by total number, then lexicographically.
#[derive(Debug, Clone, PartialEq)]
pub struct FockBasis {
    inner: Occupations,
    nmax: usize,
    sector_offsets: Vec<usize>,
}

impl FockBasis {
    pub fn new(modes: usize, nmax: usize) -> Result<Self> {
        let dim = Self::dimension(modes, nmax);
        check_budget("Fock basis", dim * (modes as u128 * 2 + 64))?;
        let mut states = Vec::new();
        let mut sector_offsets = vec![0];
        for n in 0..=nmax {
            states.extend(Occupations::sector(modes, n));
            sector_offsets.push(states.len());
        }
        Ok(FockBasis {
            inner: Occupations::from_states(modes, states),
            nmax,
            sector_offsets,
        })
    }

    /// `sum_{n <= nmax} C(n + modes - 1, modes - 1)`.
    pub fn dimension(modes: usize, nmax: usize) -> u128 {
        if modes == 0 {
            return 1;
        }
        (0..=nmax as u64)
            .map(|n| binomial(n + modes as u64 - 1, modes as u64 - 1))
            .sum()
    }

    pub fn nmax(&self) -> usize {
        self.nmax
    }

    /// Index range of the sector with `n` particles.
    pub fn sector(&self, n: usize) -> Range<usize> {
        self.sector_offsets[n]..self.sector_offsets[n + 1]
    }

    pub fn sector_offsets(&self) -> &[usize] {
        &self.sector_offsets
    }

    /// Total particle number of every state.
    pub fn numbers(&self) -> Vec<usize> {
        (0..=self.nmax)
            .flat_map(|n| std::iter::repeat_n(n, self.sector(n).len()))
            .collect()
    }

    pub fn vacuum(&self) -> usize {
        0
    }
}

impl OccupationBasis for FockBasis {
    fn modes(&self) -> usize {
        self.inner.modes
    }
    fn states(&self) -> &[Occupation] {
        &self.inner.states
    }
    fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.inner.lookup.get(occupation).copied()
    }
    fn total(&self, index: usize) -> usize {
        self.sector_offsets.partition_point(|&o| o <= index) - 1
    }
}

/// Fixed particle number sector over `modes` modes, lexicographically ordered.
#[derive(Debug, Clone, PartialEq)]
pub struct NParticleBasis {
    inner: Occupations,
    particles: usize,
}

impl NParticleBasis {
    pub fn new(modes: usize, particles: usize) -> Result<Self> {
        if modes == 0 {
            return Err(Error::InvalidArgument("at least one mode is required".into()));
        }
        let dim = Self::dimension(modes, particles);
        check_budget("N-particle basis", dim * (modes as u128 * 2 + 64))?;
        Ok(NParticleBasis {
            inner: Occupations::from_states(modes, Occupations::sector(modes, particles)),
            particles,
        })
    }

    /// `C(N + M - 1, M - 1)`.
    pub fn dimension(modes: usize, particles: usize) -> u128 {
        binomial((particles + modes - 1) as u64, modes as u64 - 1)
    }

    pub fn particles(&self) -> usize {
        self.particles
    }
}

impl OccupationBasis for NParticleBasis {
    fn modes(&self) -> usize {
        self.inner.modes
    }
    fn states(&self) -> &[Occupation] {
        &self.inner.states
    }
    fn index_of(&self, occupation: &[u16]) -> Option<usize> {
        self.inner.lookup.get(occupation).copied()
    }
    fn total(&self, _index: usize) -> usize {
        self.particles
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_dimension_and_order() {
        let basis = FockBasis::new(2, 3).unwrap();
        assert_eq!(basis.dim() as u128, FockBasis::dimension(2, 3));
        assert_eq!(basis.dim(), 1 + 2 + 3 + 4);
        assert_eq!(basis.states()[1], vec![0, 1]);
        assert_eq!(basis.states()[2], vec![1, 0]);
        for (i, s) in basis.states().iter().enumerate() {
            assert_eq!(basis.index_of(s), Some(i));
            assert_eq!(basis.total(i), s.iter().map(|&x| x as usize).sum::<usize>());
        }
        assert_eq!(basis.sector(2), 3..6);
    }

    #[test]
    fn no_excitation_modes() {
        let basis = FockBasis::new(0, 5).unwrap();
        assert_eq!(basis.dim(), 1);
        assert_eq!(basis.total(0), 0);
    }

    #[test]
    fn dimension_identity() {
        for m in 1..=5usize {
            for n in 0..=12usize {
                assert_eq!(NParticleBasis::dimension(m, n), FockBasis::dimension(m - 1, n));
            }
        }
    }
}

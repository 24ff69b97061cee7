use meanfield_bose::bogoliubov::{build_h0, diagonalize_quadratic, spectral_data, CLUSTER_TOL};
use meanfield_bose::combinatorics::binomial;
use meanfield_bose::expansion::{convolution_residuals, projector_coefficients, LevelContext, OperatorCoefficients};
use meanfield_bose::fock::{build_kops, excitation_map, ladder, FockBasis, NParticleBasis, OccupationBasis};
use meanfield_bose::linalg::{max_abs_diff, CMatrix};
use meanfield_bose::model::{build_kernels, hartree_solve, HartreeOptions, Kernels, ModelSpec};
use meanfield_bose::verify::{fit_slope, format_float};
use proptest::prelude::*;
use std::sync::Arc;

fn kernels(modes: usize, strength: f64, seed: u64) -> Kernels {
    let model = ModelSpec::random_positive_type(modes, strength, seed);
    build_kernels(&hartree_solve(&model, &HartreeOptions::default()).unwrap(), &model).unwrap()
}

proptest! {
    #[test]
    fn fock_dimension_counts_occupations(modes in 1usize..5, nmax in 0usize..7) {
        let expected = binomial((nmax + modes) as u64, modes as u64);
        prop_assert_eq!(FockBasis::dimension(modes, nmax), expected);
        prop_assert_eq!(FockBasis::new(modes, nmax).unwrap().dim() as u128, expected);
        // N bosons in M modes correspond to at most N excitations in M - 1 modes
        prop_assert_eq!(NParticleBasis::dimension(modes + 1, nmax), expected);
    }

    #[test]
    fn canonical_commutators_below_cutoff(modes in 1usize..4, nmax in 2usize..6, i in 1usize..4, j in 1usize..4) {
        prop_assume!(i <= modes && j <= modes);
        let basis = Arc::new(FockBasis::new(modes, nmax).unwrap());
        let (a, b) = (ladder(&basis, i).unwrap(), ladder(&basis, j).unwrap());
        let commutator = a.lower.mul(&b.raise).sub(&b.raise.mul(&a.lower)).to_dense();
        let inner = basis.sector(nmax).start;
        for r in 0..inner {
            for c in 0..inner {
                let expected = if r == c && i == j { 1.0 } else { 0.0 };
                prop_assert!((commutator[(r, c)].re - expected).abs() < 1e-12 && commutator[(r, c)].im.abs() < 1e-12);
            }
        }
        let pure = a.raise.mul(&b.raise).sub(&b.raise.mul(&a.raise)).to_dense();
        prop_assert!(pure.iter().all(|z| z.norm() < 1e-12));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn excitation_map_is_unitary(seed in 0u64..1000, particles in 2usize..7) {
        let k = kernels(3, 1.0, seed);
        let (_, _, u) = excitation_map(&k, particles).unwrap();
        let id = CMatrix::identity(u.nrows(), u.nrows());
        prop_assert!(max_abs_diff(&(&u * u.adjoint()), &id) < 1e-12);
        prop_assert!(max_abs_diff(&(u.adjoint() * &u), &id) < 1e-12);
    }

    #[test]
    fn bogoliubov_map_is_symplectic(seed in 0u64..1000, strength in 0.1f64..3.0, modes in 2usize..5) {
        let q = diagonalize_quadratic(&kernels(modes, strength, seed)).unwrap();
        prop_assert!(q.map.relation_residual() < 1e-10);
        prop_assert!(q.d.iter().all(|&d| d > 0.0));
        prop_assert!(q.e00 <= 1e-14);
    }

    #[test]
    fn projector_series_is_consistent(seed in 0u64..1000, strength in 0.2f64..2.0) {
        let k = kernels(3, strength, seed);
        let basis = Arc::new(FockBasis::new(2, 8).unwrap());
        let coeffs = OperatorCoefficients::new(build_kops(&k, &basis).unwrap(), 4);
        let sd = spectral_data(&build_h0(&coeffs.kops), 1, CLUSTER_TOL).unwrap();
        let ctx = LevelContext::new(&coeffs, &sd, 0, 4).unwrap();
        let p = projector_coefficients(&ctx, 2).unwrap();
        prop_assert!(max_abs_diff(&(&p[0] * &p[0]), &p[0]) < 1e-12);
        for pl in &p[1..] {
            prop_assert!(pl.trace().norm() < 1e-9);
            prop_assert!(max_abs_diff(pl, &pl.adjoint()) < 1e-10);
        }
        prop_assert!(convolution_residuals(&p).into_iter().all(|r| r < 1e-9));
    }
}

proptest! {
    #[test]
    fn slope_fit_recovers_power_laws(slope in 0.5f64..4.0, log_prefactor in -3.0f64..3.0) {
        let lambdas: Vec<f64> = [10usize, 14, 20, 28, 40].iter().map(|&n| 1.0 / (n as f64 - 1.0)).collect();
        let errors: Vec<f64> = lambdas.iter().map(|l| log_prefactor.exp() * l.powf(slope)).collect();
        let fit = fit_slope(&lambdas, &errors).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-9);
        prop_assert!(fit.r2 > 1.0 - 1e-12);
    }

    #[test]
    fn printed_floats_round_trip(x in proptest::num::f64::NORMAL | proptest::num::f64::ZERO) {
        let text = format_float(x);
        prop_assert_eq!(text.parse::<f64>().unwrap(), x);
    }
}

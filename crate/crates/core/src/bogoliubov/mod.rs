//! Diagonalization of the quadratic Hamiltonian: the symplectic route and the
//! truncated Fock-space route, spectral projectors and reduced resolvents.

mod checks;
mod quadratic;
mod spectral;

pub use checks::{embed, number_moments, number_vs_h0, quasifree_groundstate_check, NumberMoment, WickReport};
pub use quadratic::{
    block_matrix, diagonalize_blocks, diagonalize_quadratic, real_case_energies, BogoliubovMap,
    QuadraticDiagonalization,
};
pub use spectral::{
    build_h0, match_quasiparticle_levels, spectral_data, spectral_data_dense, spectral_function, Level, LevelMatch,
    SpectralData, CLUSTER_TOL,
};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{build_kops, FockBasis};
    use crate::linalg::{hermiticity_residual, max_abs, max_abs_diff, re, CMatrix};
    use crate::model::{build_kernels, build_torus_model, hartree_solve, HartreeOptions, Kernels, TorusNormalization, TorusSpec};
    use std::sync::Arc;

    fn torus(g: f64, normalization: TorusNormalization) -> Kernels {
        let spec = TorusSpec::radial(1, 1, &[g, g, g]).with_normalization(normalization);
        let model = build_torus_model(&spec).unwrap();
        let sol = hartree_solve(&model, &HartreeOptions::default()).unwrap();
        build_kernels(&sol, &model).unwrap()
    }

    fn h0_data(kernels: &Kernels, nmax: usize) -> (crate::fock::FockOperator, SpectralData) {
        let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), nmax).unwrap());
        let kops = build_kops(kernels, &basis).unwrap();
        let h0 = build_h0(&kops);
        let sd = spectral_data(&h0, 3, CLUSTER_TOL).unwrap();
        (h0, sd)
    }

    #[test]
    fn free_torus_levels() {
        let (h0, sd) = h0_data(&torus(0.0, TorusNormalization::FourierSeries), 6);
        assert_eq!(h0.sector_shift().iter().copied().collect::<Vec<_>>(), vec![-2, 0, 2]);
        assert_eq!(sd.energy(0), 0.0);
        assert_eq!(sd.multiplicity(0), 1);
        assert_eq!(sd.energy(1), 1.0);
        assert_eq!(sd.multiplicity(1), 2);
    }

    #[test]
    fn torus_gap_from_truncated_diagonalization() {
        let (_, sd) = h0_data(&torus(1.5, TorusNormalization::KernelCoefficient), 24);
        assert!((sd.energy(1) - sd.energy(0) - 2.0).abs() < 1e-6);
        assert_eq!(sd.multiplicity(0), 1);
        assert_eq!(sd.multiplicity(1), 2);
    }

    #[test]
    fn ground_energy_converges_in_cutoff() {
        let kernels = torus(1.5, TorusNormalization::KernelCoefficient);
        let e00 = diagonalize_quadratic(&kernels).unwrap().e00;
        let errors: Vec<f64> = [6, 10, 14, 18]
            .iter()
            .map(|&nmax| (h0_data(&kernels, nmax).1.energy(0) - e00).abs())
            .collect();
        assert!(errors.windows(2).all(|w| w[1] < w[0]), "{errors:?}");
        assert!((e00 + 0.5).abs() < 1e-12);
    }

    #[test]
    fn resolvent_identities() {
        let (h0, sd) = h0_data(&torus(1.5, TorusNormalization::FourierSeries), 8);
        let dim = sd.dim();
        for n in 0..2 {
            let o1 = sd.reduced_resolvent(n, 1);
            let o2 = sd.reduced_resolvent(n, 2);
            let p = sd.projector(n);
            assert!(max_abs_diff(&o2, &(&o1 * &o1)) < 1e-9);
            assert!(max_abs_diff(&sd.reduced_resolvent(n, 0), &(-&p)) < 1e-15);
            let lhs = (CMatrix::identity(dim, dim) * re(sd.energy(n)) - h0.to_dense()) * &o1;
            let q = CMatrix::identity(dim, dim) - &p;
            assert!(max_abs_diff(&lhs, &q) < 1e-9);
            assert!(max_abs(&(&o1 * sd.level_vectors(n))) < 1e-12);
            assert!(max_abs_diff(&(&p * &p), &p) < 1e-10 && hermiticity_residual(&p) < 1e-10);
        }
        assert!(max_abs(&(sd.projector(0) * sd.projector(1))) < 1e-10);
    }

    #[test]
    fn wick_rule_on_free_and_interacting_ground_states() {
        let (_, sd) = h0_data(&torus(0.0, TorusNormalization::FourierSeries), 6);
        let basis = FockBasis::new(2, 6).unwrap();
        let report = quasifree_groundstate_check(&sd.ground_vector(), &basis).unwrap();
        assert!(report.max_four_point_residual < 1e-14);
        let kernels = torus(1.5, TorusNormalization::KernelCoefficient);
        let (_, sd) = h0_data(&kernels, 30);
        let basis = FockBasis::new(2, 30).unwrap();
        let report = quasifree_groundstate_check(&sd.ground_vector(), &basis).unwrap();
        assert!(report.max_one_point < 1e-12 && report.max_three_point < 1e-12);
        assert!((report.one_body_density[(0, 0)].re - 0.125).abs() < 1e-8);
        assert!(report.max_four_point_residual < 1e-8);
    }

    #[test]
    fn quasiparticle_spectrum_reproduces_levels() {
        let kernels = torus(1.5, TorusNormalization::FourierSeries);
        let q = diagonalize_quadratic(&kernels).unwrap();
        let (h0, sd) = h0_data(&kernels, 12);
        let coarse = match_quasiparticle_levels(&sd, &q.d, q.e00, 6, 6);
        let (_, fine_sd) = h0_data(&kernels, 16);
        let fine = match_quasiparticle_levels(&fine_sd, &q.d, q.e00, 6, 6);
        for (c, f) in coarse.iter().zip(&fine) {
            assert!(c.deviation < 1e-6, "{c:?}");
            assert!(f.deviation <= c.deviation.max(1e-12), "{f:?} vs {c:?}");
        }
        let basis = FockBasis::new(2, 12).unwrap();
        for moment in number_moments(&sd.ground_vector(), &basis, &q.map, &[1, 2, 3]) {
            assert!(moment.moment <= moment.bound);
        }
        let (lowest, _) = number_vs_h0(&sd, &h0, &q.map, q.d[0]);
        assert!(lowest >= -1e-8);
    }
}

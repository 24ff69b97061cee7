use super::*;
use crate::bogoliubov::{build_h0, spectral_data, SpectralData, CLUSTER_TOL};
use crate::fock::{build_kops, FockBasis, Kops};
use crate::linalg::{eigh, hermiticity_residual, max_abs, max_abs_diff, re, CMatrix, CVector, C64};
use crate::model::{build_kernels, build_torus_model, hartree_solve, HartreeOptions, Kernels, ModelSpec, TorusSpec};
use std::sync::Arc;

fn kernels_of(model: &ModelSpec) -> Kernels {
    let sol = hartree_solve(model, &HartreeOptions::default()).unwrap();
    build_kernels(&sol, model).unwrap()
}

fn kops_of(kernels: &Kernels, nmax: usize) -> Kops {
    let basis = Arc::new(FockBasis::new(kernels.excitation_modes(), nmax).unwrap());
    build_kops(kernels, &basis).unwrap()
}

fn torus_kernels() -> Kernels {
    kernels_of(&build_torus_model(&TorusSpec::radial(1, 1, &[1.5, 1.5])).unwrap())
}

struct Setup {
    coeffs: OperatorCoefficients,
    sd: SpectralData,
}

fn setup(kernels: &Kernels, nmax: usize, order: usize, levels: usize) -> Setup {
    let coeffs = OperatorCoefficients::new(kops_of(kernels, nmax), order);
    let sd = spectral_data(&build_h0(&coeffs.kops), levels, CLUSTER_TOL).unwrap();
    Setup { coeffs, sd }
}

#[test]
fn operator_coefficients_are_hermitian_with_parity() {
    let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, 11));
    let kops = kops_of(&kernels, 8);
    let table = taylor_coefficients(6);
    let vac = kops.basis.vacuum();
    for j in 1..=8 {
        let h = build_hj(&kops, &table, j);
        let dense = h.to_dense();
        assert!(hermiticity_residual(&dense) < 1e-12, "H_{j}");
        for shift in h.sector_shift() {
            assert_eq!(shift.rem_euclid(2) as usize, j % 2, "H_{j} shift {shift}");
        }
        if j <= 2 {
            assert!(dense[(vac, vac)].norm() < 1e-14);
        }
    }
}

#[test]
fn third_coefficient_matches_its_defining_formula() {
    let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, 4));
    let kops = kops_of(&kernels, 6);
    let h3 = build_hj(&kops, &taylor_coefficients(3), 3).to_dense();
    let numbers = kops.basis.numbers();
    let k3 = kops.k3.to_dense();
    let shifted = CMatrix::from_fn(k3.nrows(), k3.ncols(), |r, c| k3[(r, c)] * (numbers[c] as f64 - 1.0));
    let expected = (&shifted + shifted.adjoint()) * re(-0.5);
    assert!(max_abs_diff(&h3, &expected) < 1e-14);
    // on one-quantum states the (N-1) factor vanishes on the input side
    let one = kops.basis.sector(1);
    for c in one.clone() {
        for r in 0..h3.nrows() {
            if numbers[r] == 2 {
                assert!(h3[(r, c)].norm() < 1e-14);
            }
        }
    }
}

#[test]
fn remainder_identity_holds() {
    for seed in [2u64, 9] {
        let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, seed));
        let kops = kops_of(&kernels, 6);
        let table = taylor_coefficients(4);
        for a in 0..=3 {
            let report = remainder_identity_check(&kops, &table, a, 6).unwrap();
            assert!(report.holds, "a = {a}: {:e}", report.residual);
        }
    }
    let kops = kops_of(&torus_kernels(), 9);
    for a in 0..=3 {
        assert!(remainder_identity_check(&kops, &taylor_coefficients(4), a, 12).unwrap().holds);
    }
}

#[test]
fn free_model_has_vanishing_corrections() {
    let kernels = kernels_of(&build_torus_model(&TorusSpec::radial(1, 1, &[])).unwrap());
    let s = setup(&kernels, 8, 6, 1);
    for j in 1..=6 {
        assert!(max_abs(&s.coeffs.dense[j]) == 0.0);
    }
    let ctx = LevelContext::new(&s.coeffs, &s.sd, 0, 5).unwrap();
    let e = energy_coefficients(&ctx, 3).unwrap();
    assert!(e[1..].iter().all(|x| *x == 0.0));
    let it = energy_coefficients_iterative(&ctx, 3).unwrap();
    assert!(it[1..].iter().all(|x| *x == 0.0));
    let p = projector_coefficients(&ctx, 3).unwrap();
    assert!(p[1..].iter().all(|x| max_abs(x) == 0.0));
}

#[test]
fn trace_and_iterative_energies_agree() {
    for seed in 0..5u64 {
        let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, 100 + seed));
        let s = setup(&kernels, 10, 8, 2);
        for n in 0..2 {
            if s.sd.multiplicity(n) != 1 {
                continue;
            }
            let ctx = LevelContext::new(&s.coeffs, &s.sd, n, 7).unwrap();
            let trace = energy_coefficients(&ctx, 3).unwrap();
            let iterative = energy_coefficients_iterative(&ctx, 3).unwrap();
            for (l, (x, y)) in trace.iter().zip(&iterative).enumerate() {
                assert!((x - y).abs() < 1e-9 * x.abs().max(1.0), "seed {seed} n {n} E_{l}: {x} vs {y}");
            }
        }
    }
}

/// `Q / (E - H_0)^k` from an independent eigendecomposition.
fn independent_resolvent(h0: &CMatrix, n: usize, k: i32) -> (f64, CVector, CMatrix) {
    let (values, vectors) = eigh(h0);
    let e = values[n];
    let dim = values.len();
    let mut r = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        if i == n {
            continue;
        }
        let v = vectors.column(i);
        r += v * v.adjoint() * re((e - values[i]).powi(-k));
    }
    (e, vectors.column(n).into_owned(), r)
}

#[test]
fn closed_forms_for_first_two_energies() {
    for seed in [3u64, 8, 21] {
        let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.2, seed));
        let s = setup(&kernels, 10, 4, 1);
        let ctx = LevelContext::new(&s.coeffs, &s.sd, 0, 3).unwrap();
        let trace = energy_coefficients(&ctx, 2).unwrap();
        let h = &s.coeffs.dense;
        let (_, chi, r1) = independent_resolvent(&h[0], 0, 1);
        let (_, _, r2) = independent_resolvent(&h[0], 0, 2);
        let ev = |m: &CMatrix| chi.dotc(&(m * &chi)).re;
        let e1 = ev(&h[2]) + ev(&(&h[1] * &r1 * &h[1]));
        let mut e2 = 0.0;
        for j in crate::combinatorics::all_compositions(4) {
            let mut m = h[j[0]].clone();
            for &x in &j[1..] {
                m = m * &r1 * &h[x];
            }
            e2 += ev(&m);
        }
        e2 -= e1 * ev(&(&h[1] * &r2 * &h[1]));
        assert!((trace[1] - e1).abs() < 1e-10, "{} vs {e1}", trace[1]);
        assert!((trace[2] - e2).abs() < 1e-9, "{} vs {e2}", trace[2]);
    }
}

#[test]
fn odd_compositions_vanish_individually_in_first_energy() {
    let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, 6));
    let s = setup(&kernels, 10, 4, 1);
    let ctx = LevelContext::new(&s.coeffs, &s.sd, 0, 3).unwrap();
    let energies = energy_coefficients_iterative(&ctx, 1).unwrap();
    let terms = energy_terms_iterative(&ctx, &energies, 2).unwrap();
    for (j, value) in terms {
        if j.iter().any(|x| x % 2 == 1) && j.iter().filter(|x| *x % 2 == 1).count() % 2 == 1 {
            assert!(value.norm() < 1e-12, "{j:?}");
        }
    }
}

#[test]
fn projector_algebra_and_wavefunctions() {
    for seed in [1u64, 5] {
        let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, seed));
        let s = setup(&kernels, 10, 4, 1);
        let ctx = LevelContext::new(&s.coeffs, &s.sd, 0, 4).unwrap();
        let p = projector_coefficients(&ctx, 4).unwrap();
        for (l, pl) in p.iter().enumerate() {
            assert!(hermiticity_residual(pl) < 1e-10);
            if l >= 1 {
                assert!(pl.trace().norm() < 1e-9, "Tr P_{l}");
            }
        }
        for (l, r) in convolution_residuals(&p).iter().enumerate().take(4) {
            assert!(*r < 1e-9, "convolution at {l}: {r:e}");
        }
        // P_1 = O_1 H_1 P_0 + P_0 H_1 O_1
        let (o1, p0) = (ctx.resolvent(1), ctx.projector0());
        let h1 = &s.coeffs.dense[1];
        let expected = &o1 * h1 * &p0 + &p0 * h1 * &o1;
        assert!(max_abs_diff(&p[1], &expected) < 1e-10);

        let wf = wavefunction_coefficients(&ctx, &p, 4).unwrap();
        assert_eq!(wf.alpha[0], C64::new(1.0, 0.0));
        assert!(wf.alpha[1].norm() < 1e-12 && wf.alpha[3].norm() < 1e-12);
        assert!((wf.alpha[2].re + 0.5 * wf.chi_tilde[1].norm_squared()).abs() < 1e-12);
        assert!(wf.iterative_deviation < 1e-9, "{:e}", wf.iterative_deviation);
        let chi0 = &wf.chi_tilde[0];
        let expected2 = (&o1 * &s.coeffs.dense[2] + &o1 * h1 * &o1 * h1) * chi0;
        // the squared resolvent in front of H_2 would not be consistent with the projector sum
        let squared = (ctx.resolvent(2) * &s.coeffs.dense[2] + &o1 * h1 * &o1 * h1) * chi0;
        assert!((&wf.chi_tilde[2] - squared).camax() > 1e-6);
        assert!((&wf.chi_tilde[2] - expected2).camax() < 1e-10);
        for (l, (pw, pl)) in wavefunction_projectors(&wf, 2).iter().zip(&p).enumerate() {
            assert!(max_abs_diff(pw, pl) < 1e-9, "P^wf_{l}");
        }
    }
}

#[test]
fn degenerate_level_uses_trace_formula_only() {
    let kernels = torus_kernels();
    let s = setup(&kernels, 10, 4, 2);
    assert_eq!(s.sd.multiplicity(1), 2);
    let ctx = LevelContext::new(&s.coeffs, &s.sd, 1, 3).unwrap();
    assert!(matches!(energy_coefficients_iterative(&ctx, 1), Err(crate::Error::Unsupported(_))));
    let e = energy_coefficients(&ctx, 2).unwrap();
    assert!(e.iter().all(|x| x.is_finite()));
    let p = projector_coefficients(&ctx, 2).unwrap();
    assert!((p[0].trace().re - 2.0).abs() < 1e-12);
    assert!(p[1].trace().norm() < 1e-9 && p[2].trace().norm() < 1e-9);
    assert!(wavefunction_coefficients(&ctx, &p, 2).is_err());
}

#[test]
fn order_guard() {
    let kernels = torus_kernels();
    let s = setup(&kernels, 6, 2, 1);
    let ctx = LevelContext::new(&s.coeffs, &s.sd, 0, 1).unwrap();
    assert!(matches!(energy_coefficients(&ctx, 7), Err(crate::Error::Resource { .. })));
}

fn torus_rdm_deviation(nmax: usize) -> (f64, CMatrix) {
    let spec = TorusSpec::radial(1, 1, &[1.5, 1.5]);
    let kernels = kernels_of(&build_torus_model(&spec).unwrap());
    let level = expand_level(&kernels, nmax, 0, 1).unwrap();
    let rdm = rdm1_coefficients(&kernels, &level.basis, &level.projectors[0], &level.projectors[1]).unwrap();
    (max_abs_diff(&rdm.first, &torus_rdm1_closed_form(&spec)), rdm.first)
}

#[test]
fn torus_density_matrix_matches_closed_form() {
    let (d12, g) = torus_rdm_deviation(12);
    let (d14, _) = torus_rdm_deviation(14);
    assert!(d12 < 1e-6, "{d12:e}");
    assert!(d14 <= d12, "{d14:e} vs {d12:e}");
    assert!(g.trace().norm() < 1e-12);
    assert!(hermiticity_residual(&g) < 1e-12);
}

#[test]
fn expansion_result_diagnostics() {
    let kernels = kernels_of(&ModelSpec::random_positive_type(3, 1.0, 2));
    let result = expand(&kernels, 10, 0, 2).unwrap();
    let d = &result.diagnostics;
    assert!(d.projector_traces.iter().all(|t| *t < 1e-9));
    assert!(d.energy_formula_agreement.unwrap() < 1e-9);
    assert!(d.chi_tilde_agreement.unwrap() < 1e-9);
    let json = serde_json::to_string(&result).unwrap();
    assert!(json.contains("\"E\""));
    let dump = result.projector_operator(1).unwrap().dump();
    assert!(dump.starts_with("# M=3 nmax=10"));
}

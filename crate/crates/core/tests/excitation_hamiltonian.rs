use meanfield_bose::fock::{
    build_excitation_hamiltonian, build_hn, excitation_map, ladder, number_operator, FockOperator, NParticleBasis,
    OccupationBasis,
};
use meanfield_bose::linalg::{eigh, max_abs_diff, re, CMatrix, CVector, C64, ZERO};
use meanfield_bose::model::{build_kernels, hartree_solve, HartreeOptions, Kernels, ModelSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(seed: u64) -> (ModelSpec, f64, Kernels) {
    let model = ModelSpec::random_positive_type(3, 1.0, seed);
    let sol = hartree_solve(&model, &HartreeOptions::default()).unwrap();
    let kernels = build_kernels(&sol, &model).unwrap();
    (model, sol.e_h, kernels)
}

fn conjugated(model: &ModelSpec, e_h: f64, kernels: &Kernels, n: usize) -> CMatrix {
    let (_, h) = build_hn(model, n).unwrap();
    let (_, _, u) = excitation_map(kernels, n).unwrap();
    let shifted = h - CMatrix::identity(u.ncols(), u.ncols()) * re(n as f64 * e_h);
    &u * shifted * u.adjoint()
}

#[test]
fn conjugated_hamiltonian_matches_number_dependent_form() {
    for seed in [1u64, 2, 3] {
        let (model, e_h, kernels) = setup(seed);
        for n in [5usize, 8] {
            let oracle = conjugated(&model, e_h, &kernels, n);
            let built = build_excitation_hamiltonian(&kernels, n).unwrap().to_dense();
            let diff = max_abs_diff(&oracle, &built);
            assert!(diff <= 1e-9, "seed {seed}, N={n}: deviation {diff:e}");
        }
    }
}

/// Creation operator `a^dagger(f)` on the N-particle space over model modes.
fn creation_on(nb_from: &NParticleBasis, nb_to: &NParticleBasis, f: &CVector) -> CMatrix {
    let mut out = CMatrix::zeros(nb_to.dim(), nb_from.dim());
    for (c, s) in nb_from.states().iter().enumerate() {
        for x in 0..f.len() {
            let mut t = s.clone();
            let amp = (t[x] as f64 + 1.0).sqrt();
            t[x] += 1;
            let r = nb_to.index_of(&t).unwrap();
            out[(r, c)] += f[x] * amp;
        }
    }
    out
}

#[test]
fn spectrum_of_excitation_hamiltonian_matches_shifted_hn() {
    let (model, e_h, kernels) = setup(7);
    let n = 6;
    let (_, h) = build_hn(&model, n).unwrap();
    let built = build_excitation_hamiltonian(&kernels, n).unwrap().to_dense();
    let (a, _) = eigh(&h);
    let (b, _) = eigh(&built);
    for (x, y) in a.iter().zip(&b) {
        assert!((x - n as f64 * e_h - y).abs() < 1e-9);
    }
}

fn random_orthogonal(kernels: &Kernels, rng: &mut ChaCha8Rng) -> CVector {
    let phi: CVector = kernels.basis.column(0).into_owned();
    let mut f = CVector::from_fn(phi.len(), |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let overlap = phi.dotc(&f);
    f -= phi * overlap;
    f
}

/// Checks the four substitution rules for `U (.) U^dagger` at M=3, N=4.
#[test]
fn substitution_rules() {
    let (_, _, kernels) = setup(5);
    let n = 4usize;
    let (nb, fock, u) = excitation_map(&kernels, n).unwrap();
    let nb_down = NParticleBasis::new(3, n - 1).unwrap();
    let phi: CVector = kernels.basis.column(0).into_owned();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let f = random_orthogonal(&kernels, &mut rng);
    let g = random_orthogonal(&kernels, &mut rng);
    let create = |v: &CVector| creation_on(&nb_down, &nb, v);
    let annihilate = |v: &CVector| creation_on(&nb_down, &nb, v).adjoint();
    // excitation-space versions: coordinates of f in the h eigenbasis
    let coords = |v: &CVector| kernels.basis.adjoint() * v;
    let fock_create = |v: &CVector| {
        let c = coords(v);
        let mut acc = FockOperator::zero(fock.clone());
        for mode in 1..3 {
            acc = acc.add(&ladder(&fock, mode).unwrap().raise.scaled(c[mode]));
        }
        acc.to_dense()
    };
    let sqrt_rest = FockOperator::diagonal(fock.clone(), |k| (n as f64 - k as f64).max(0.0).sqrt()).to_dense();
    let conj = |m: &CMatrix| &u * m * u.adjoint();

    // a^dagger(phi) a(phi) -> N - N_perp
    let lhs = conj(&(create(&phi) * annihilate(&phi)));
    let rhs = CMatrix::identity(fock.dim(), fock.dim()) * re(n as f64) - number_operator(&fock).to_dense();
    assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    // a^dagger(f) a(phi) -> a^dagger(f) sqrt(N - N_perp)
    let lhs = conj(&(create(&f) * annihilate(&phi)));
    let rhs = fock_create(&f) * &sqrt_rest;
    assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    // a^dagger(phi) a(g) -> sqrt(N - N_perp) a(g)
    let lhs = conj(&(create(&phi) * annihilate(&g)));
    let rhs = &sqrt_rest * fock_create(&g).adjoint();
    assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    // a^dagger(f) a(g) -> a^dagger(f) a(g)
    let lhs = conj(&(create(&f) * annihilate(&g)));
    let rhs = fock_create(&f) * fock_create(&g).adjoint();
    assert!(max_abs_diff(&lhs, &rhs) < 1e-10);
    let _ = ZERO;
}

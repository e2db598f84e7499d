use proptest::prelude::*;

use mctdhf::algebra::{compound_matrix, enumerate_configs, sign_of_pair};
use mctdhf::ansatz::{dphi_adjoint, dphi_apply, expand_full, reduced_density, FullWavefunction};
use mctdhf::density::{gamma1, gamma2, nonfreeness, occupations, rank_diagnostics, regularize, RegularizationMode};
use mctdhf::grid::{
    build_grid, build_onebody, convolve_pair, lowdin_orthonormalize, Boundary, KineticScale, Laser, PairPotential, Waveform,
};
use mctdhf::linalg::{c, eigh, hermitian_defect, CMatrix, CVector};
use mctdhf::meanfield::{apply_w, energy_forms, project_out, w_matrix, PairIntegrals};
use mctdhf::propagation::{apply_gauge, integrate, IntegratorOptions, McState, System};
use mctdhf::random::{gaussian_matrix, random_coeffs, random_orbitals, random_unitary, seeded};

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn config_shape() -> impl Strategy<Value = (usize, usize)> {
    prop_oneof![Just((2, 4)), Just((3, 5)), Just((2, 6)), Just((3, 6)), Just((1, 3))]
}

#[test]
fn pair_sign_is_antisymmetric_exhaustively() {
    for k in 2..=6 {
        for n in 2..=k {
            for cfg in enumerate_configs(n, k).unwrap().configs() {
                for &i in cfg.iter() {
                    for &j in cfg.iter().filter(|&&j| j != i) {
                        assert_eq!(sign_of_pair(cfg, i, j).unwrap(), -sign_of_pair(cfg, j, i).unwrap());
                    }
                }
            }
        }
    }
}

#[test]
fn compound_is_unitary_for_all_small_shapes() {
    let mut rng = seeded(11);
    for k in 1..=5 {
        for n in 1..=k.min(3) {
            let table = enumerate_configs(n, k).unwrap();
            let u = random_unitary(k, &mut rng);
            let d = compound_matrix(&u, &table).unwrap();
            let eye = CMatrix::identity(table.len(), table.len());
            assert!((d.adjoint() * &d - eye).norm() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn table_size_and_reverse_index(n in 1usize..=4, extra in 0usize..=5) {
        let k = n + extra;
        let table = enumerate_configs(n, k).unwrap();
        prop_assert_eq!(table.len(), binomial(k, n));
        for (idx, cfg) in table.configs().iter().enumerate() {
            prop_assert_eq!(table.index_of(cfg), Some(idx));
        }
    }

    #[test]
    fn compound_is_multiplicative((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let table = enumerate_configs(n, k).unwrap();
        let (u, v) = (random_unitary(k, &mut rng), random_unitary(k, &mut rng));
        let lhs = compound_matrix(&(&u * &v), &table).unwrap();
        let rhs = compound_matrix(&u, &table).unwrap() * compound_matrix(&v, &table).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn one_body_operator_is_hermitian_at_any_time(t in -10.0f64..10.0, amp in -2.0f64..2.0, l in 2usize..12) {
        let grid = build_grid(l, 0.4, Boundary::Periodic).unwrap();
        let pot: Vec<f64> = grid.points().iter().map(|x| x * x).collect();
        let laser = Laser {
            vector_potential: Waveform::Sine { amplitude: amp, frequency: 1.3, phase: 0.2 },
            potential_strength: Waveform::Sine { amplitude: 1.0, frequency: 0.7, phase: 0.0 },
        };
        let op = build_onebody(&grid, &pot, Some(laser), KineticScale::Half).unwrap();
        prop_assert!(hermitian_defect(&op.matrix_at(t)) <= 1e-12);
    }

    #[test]
    fn dirichlet_kinetic_energy_is_nonnegative(values in prop::collection::vec(-1.0f64..1.0, 2..16)) {
        let grid = build_grid(values.len(), 0.3, Boundary::Dirichlet).unwrap();
        let op = build_onebody(&grid, &vec![0.0; values.len()], None, KineticScale::Half).unwrap();
        let f = CVector::from_iterator(values.len(), values.iter().map(|&x| c(x, 0.0)));
        prop_assert!(f.dotc(&(op.kinetic_matrix() * &f)).re >= -1e-12);
    }

    #[test]
    fn convolution_is_linear_and_real_kernels_commute_with_conjugation(seed in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let mut rng = seeded(seed);
        let grid = build_grid(9, 0.5, Boundary::Periodic).unwrap();
        let v = PairPotential::soft_coulomb(&grid, 1.0, 1.0).unwrap();
        let m = gaussian_matrix(9, 2, &mut rng);
        let (f, g) = (m.column(0).into_owned(), m.column(1).into_owned());
        let (za, zb) = (c(a, 0.5), c(-0.3, b));
        let lhs = convolve_pair(&grid, &v, &(&f * za + &g * zb)).unwrap();
        let rhs = convolve_pair(&grid, &v, &f).unwrap() * za + convolve_pair(&grid, &v, &g).unwrap() * zb;
        prop_assert!((lhs - rhs).norm() < 1e-12);
        let conj = convolve_pair(&grid, &v, &f.conjugate()).unwrap();
        prop_assert!((convolve_pair(&grid, &v, &f).unwrap().conjugate() - conj).norm() < 1e-12);
    }

    #[test]
    fn pair_convolution_is_bounded_by_the_kernel_maximum(seed in any::<u64>(), softening in 0.3f64..3.0) {
        let mut rng = seeded(seed);
        let grid = build_grid(10, 0.5, Boundary::Dirichlet).unwrap();
        let v = PairPotential::soft_coulomb(&grid, 1.0, softening).unwrap();
        let m = gaussian_matrix(10, 2, &mut rng);
        let (phi, psi) = (m.column(0).into_owned(), m.column(1).into_owned());
        let prod = phi.component_mul(&psi.conjugate());
        let conv = convolve_pair(&grid, &v, &prod).unwrap();
        let peak = conv.iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(peak <= v.max_abs() * grid.norm(&phi) * grid.norm(&psi) * (1.0 + 1e-12));
    }

    #[test]
    fn lowdin_output_is_orthonormal_with_the_same_span(seed in any::<u64>(), k in 1usize..5) {
        let mut rng = seeded(seed);
        let grid = build_grid(8, 0.5, Boundary::Dirichlet).unwrap();
        let raw = gaussian_matrix(8, k, &mut rng);
        let out = lowdin_orthonormalize(&grid, &raw).unwrap();
        prop_assert!(grid.gram_defect(&out) < 1e-12);
        for j in 0..k {
            prop_assert!(grid.norm(&project_out(&grid, &out, &raw.column(j).into_owned())) < 1e-10 * grid.norm(&raw.column(j).into_owned()));
        }
    }

    #[test]
    fn density_matrix_is_hermitian_with_trace_n_and_contracts((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let table = enumerate_configs(n, k).unwrap();
        let coeffs = random_coeffs(table.len(), &mut rng);
        let g1 = gamma1(&coeffs, &table).unwrap();
        prop_assert!(hermitian_defect(&g1.entries) <= 1e-12);
        prop_assert!((g1.entries.trace().re - n as f64).abs() <= 1e-12);
        let (occ, vecs) = occupations(&g1.entries);
        prop_assert!(occ.iter().all(|&x| (-1e-12..=1.0 + 1e-12).contains(&x)));
        prop_assert!(occ.windows(2).all(|w| w[0] >= w[1]));
        let diag = vecs.adjoint() * &g1.entries * &vecs;
        prop_assert!((&diag - CMatrix::from_diagonal(&diag.diagonal())).norm() < 1e-10);
        if n >= 2 {
            let g2 = gamma2(&coeffs, &table).unwrap();
            for i in 0..k {
                for j in 0..k {
                    let sum: num_complex::Complex64 = (0..k).map(|m| g2.get(i, m, j, m)).sum();
                    prop_assert!((sum * (2.0 / (n as f64 - 1.0)) - g1.kernel_coeff(i, j)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn rank_diagnostics_sandwich((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let table = enumerate_configs(n, k).unwrap();
        let g = gamma1(&random_coeffs(table.len(), &mut rng), &table).unwrap().entries;
        let d = rank_diagnostics(&g, 1e-14);
        prop_assume!(!d.singular);
        prop_assert!(1.0 / d.mu <= d.inv_frobenius * (1.0 + 1e-10));
        prop_assert!(d.inv_frobenius <= (k as f64).sqrt() / d.mu * (1.0 + 1e-10));
        prop_assert!(d.inv_frobenius >= k as f64 / n as f64 * (1.0 - 1e-10));
    }

    #[test]
    fn regularization_maps_each_eigenvalue(seed in any::<u64>(), eps in 1e-4f64..0.5) {
        let mut rng = seeded(seed);
        let table = enumerate_configs(2, 4).unwrap();
        let g = gamma1(&random_coeffs(table.len(), &mut rng), &table).unwrap().entries;
        let (vals, _) = eigh(&g);
        for mode in [RegularizationMode::Shift, RegularizationMode::Exponential] {
            let r = regularize(&g, eps, mode).unwrap();
            prop_assert!(hermitian_defect(&r) <= 1e-12);
            prop_assert!((&r - &g).norm() <= eps * 2.0 + 1e-12);
            let (got, _) = eigh(&r);
            for (x, y) in vals.iter().zip(&got) {
                let want = match mode {
                    RegularizationMode::Shift => x + eps,
                    RegularizationMode::Exponential => x + eps * (-x / eps).exp(),
                };
                prop_assert!((want - y).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn gauge_leaves_the_wavefunction_energy_and_nonfreeness_unchanged((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let grid = build_grid(7, 0.5, Boundary::Dirichlet).unwrap();
        let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
        let onebody = build_onebody(&grid, &pot, None, KineticScale::Half).unwrap();
        let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0).unwrap();
        let sys = System::new(grid, onebody, pair, n, k).unwrap();
        let gt = enumerate_configs(n, 7).unwrap();
        let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(&sys.grid, k, &mut rng));
        let moved = apply_gauge(&random_unitary(k, &mut rng), &state, &sys.table).unwrap();
        let a = expand_full(&sys.grid, &state.coeffs, &state.orbitals, &sys.table, &gt).unwrap();
        let b = expand_full(&sys.grid, &moved.coeffs, &moved.orbitals, &sys.table, &gt).unwrap();
        prop_assert!((&a.amplitudes - &b.amplitudes).norm() < 1e-10);
        let energy = |s: &McState| energy_forms(&sys.grid, sys.onebody.static_matrix(), &sys.pair, &s.coeffs, &s.orbitals, &sys.table).unwrap().compact;
        prop_assert!((energy(&state) - energy(&moved)).norm() < 1e-10);
        let entropy = |s: &McState| nonfreeness(&occupations(&gamma1(&s.coeffs, &sys.table).unwrap().entries).0).unwrap();
        prop_assert!((entropy(&state) - entropy(&moved)).abs() < 1e-10);
    }

    #[test]
    fn one_body_density_rank_is_at_most_k((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let grid = build_grid(8, 0.5, Boundary::Dirichlet).unwrap();
        let table = enumerate_configs(n, k).unwrap();
        let gt = enumerate_configs(n, 8).unwrap();
        let psi = expand_full(&grid, &random_coeffs(table.len(), &mut rng), &random_orbitals(&grid, k, &mut rng), &table, &gt).unwrap();
        let (vals, _) = eigh(&reduced_density(&psi, 1, &gt).unwrap());
        prop_assert!(vals.iter().filter(|&&x| x.abs() > 1e-10).count() <= k);
    }

    #[test]
    fn euler_identity_and_adjoint_duality((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let grid = build_grid(7, 0.5, Boundary::Dirichlet).unwrap();
        let table = enumerate_configs(n, k).unwrap();
        let gt = enumerate_configs(n, 7).unwrap();
        let orbitals = random_orbitals(&grid, k, &mut rng);
        let psi = expand_full(&grid, &random_coeffs(table.len(), &mut rng), &orbitals, &table, &gt).unwrap();
        let mut rebuilt = CVector::zeros(gt.len());
        for p in 0..k {
            rebuilt += dphi_apply(&grid, &orbitals, p, &orbitals.column(p).into_owned(), &psi, &gt).unwrap().amplitudes;
        }
        prop_assert!((rebuilt / c(n as f64, 0.0) - &psi.amplitudes).norm() < 1e-10);

        let xi = FullWavefunction { amplitudes: random_coeffs(gt.len(), &mut rng), n, l: 7 };
        let zeta = gaussian_matrix(7, 1, &mut rng).column(0).into_owned();
        for p in 0..k {
            let f = dphi_adjoint(&grid, &orbitals, p, &psi, &xi, &gt).unwrap();
            let lhs = grid.inner(&zeta, &f);
            let rhs = dphi_apply(&grid, &orbitals, p, &zeta, &psi, &gt).unwrap().dot(&xi).unwrap();
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn repulsive_interaction_form_is_nonnegative((n, k) in config_shape(), seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let grid = build_grid(8, 0.5, Boundary::Dirichlet).unwrap();
        let v = PairPotential::soft_coulomb(&grid, 1.0, 1.0).unwrap();
        let table = enumerate_configs(n, k).unwrap();
        let orbitals = random_orbitals(&grid, k, &mut rng);
        let g2 = gamma2(&random_coeffs(table.len(), &mut rng), &table).unwrap();
        let w_phi = apply_w(&w_matrix(&g2, &PairIntegrals::new(&grid, &v, &orbitals), 8), &orbitals);
        let form: num_complex::Complex64 = (0..k).map(|i| grid.inner(&w_phi.column(i).into_owned(), &orbitals.column(i).into_owned())).sum();
        prop_assert!(form.re >= -1e-12);
        prop_assert!(form.im.abs() < 1e-12);
    }

    #[test]
    fn blowup_integral_is_the_trapezoid_sum_of_samples(seed in 0u64..1000) {
        let grid = build_grid(8, 0.5, Boundary::Dirichlet).unwrap();
        let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
        let onebody = build_onebody(&grid, &pot, None, KineticScale::Half).unwrap();
        let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0).unwrap();
        let sys = System::new(grid, onebody, pair, 2, 4).unwrap();
        let mut rng = seeded(seed);
        let state = McState::new(random_coeffs(6, &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
        let mut opts = IntegratorOptions::new(0.01, 0.2);
        opts.diag_every = 1;
        let traj = integrate(&sys, &state, &opts, None).unwrap();
        let rows = &traj.diagnostics;
        let mut acc = 0.0;
        for w in rows.windows(2) {
            acc += 0.5 * (w[1].t - w[0].t) * (w[0].inv_gamma_frob.powf(1.5) + w[1].inv_gamma_frob.powf(1.5));
            prop_assert!((acc - w[1].blowup_integral).abs() <= 1e-12 * acc.max(1.0));
        }
    }
}

use std::sync::Arc;

use mctdhf::algebra::enumerate_configs;
use mctdhf::ansatz::expand_full;
use mctdhf::density::{gamma1, occupations, Regularization, RegularizationMode};
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, Laser, PairPotential, Waveform};
use mctdhf::linalg::{c, eigh, expm_herm, CMatrix, CVector};
use mctdhf::meanfield::orbital_matrix;
use mctdhf::oracle::{build_full_hamiltonian, compare, propagate_piecewise, ExactPropagator, DEFAULT_DIMENSION_CAP};
use mctdhf::propagation::{
    apply_gauge, gauge_transport, integrate, natural_gauge_m, GaugeSpec, HaltEvent, IntegratorOptions, McState, Scheme, System,
};
use mctdhf::random::{random_coeffs, random_orbitals, random_unitary, seeded};
use mctdhf::Error;

fn harmonic(l: usize, n: usize, k: usize, strength: f64, laser: Option<Laser>) -> System {
    let grid = build_grid(l, 0.5, Boundary::Dirichlet).unwrap();
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, laser, KineticScale::Half).unwrap();
    let pair = PairPotential::soft_coulomb(&grid, strength, 1.0).unwrap();
    System::new(grid, onebody, pair, n, k).unwrap()
}

fn smooth_state(sys: &System, seed: u64) -> McState {
    let mut rng = seeded(seed);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let m = (sys.k() + 2).min(sys.grid.len());
    let orbitals = (vecs.columns(0, m) * random_unitary(m, &mut rng)).columns(0, sys.k()) / c(sys.grid.spacing().sqrt(), 0.0);
    McState::new(random_coeffs(sys.table.len(), &mut rng), orbitals)
}

fn psi_distance(sys: &System, a: &McState, b: &McState) -> f64 {
    let gt = enumerate_configs(sys.n(), sys.grid.len()).unwrap();
    let pa = expand_full(&sys.grid, &a.coeffs, &a.orbitals, &sys.table, &gt).unwrap();
    let pb = expand_full(&sys.grid, &b.coeffs, &b.orbitals, &sys.table, &gt).unwrap();
    compare(&pa, &pb).unwrap().0
}

fn run(sys: &System, state: &McState, dt: f64, t_final: f64, gauge: GaugeSpec) -> mctdhf::propagation::Trajectory {
    let mut opts = IntegratorOptions::new(dt, t_final);
    opts.gauge = gauge;
    integrate(sys, state, &opts, None).unwrap()
}

#[test]
fn zero_and_onebody_gauges_give_the_same_wavefunction() {
    let sys = harmonic(12, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 1);
    let a = run(&sys, &state, 0.001, 0.5, GaugeSpec::OneBody);
    let b = run(&sys, &state, 0.001, 0.5, GaugeSpec::Zero);
    assert!(psi_distance(&sys, a.final_state(), b.final_state()) < 1e-9);
    assert!(a.final_state().distance(b.final_state(), &sys.grid) > 1e-3);
}

#[test]
fn transporting_the_onebody_gauge_reproduces_the_zero_gauge_state() {
    let sys = harmonic(10, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 2);
    let (dt, t_final) = (0.0025, 0.5);
    let mut opts = IntegratorOptions::new(dt, t_final);
    opts.snapshot_every = 1;
    let working = integrate(&sys, &state, &opts, None).unwrap();
    let h = sys.onebody.static_matrix().clone();
    let samples: Vec<CMatrix> = working.snapshots.iter().map(|s| orbital_matrix(&sys.grid, &s.orbitals, &(&h * &s.orbitals))).collect();
    // the zero gauge differs from the working gauge by the generator -hᵀ
    let m = move |t: f64| -> CMatrix { -samples[(t / dt).round() as usize].transpose() };
    let path = gauge_transport(m, &CMatrix::identity(4, 4), 2.0 * dt, t_final).unwrap();
    let u = &path.last().unwrap().1;
    let moved = apply_gauge(u, working.final_state(), &sys.table).unwrap();
    let zero = run(&sys, &state, dt, t_final, GaugeSpec::Zero);
    assert!(moved.distance(zero.final_state(), &sys.grid) < 1e-7);
}

#[test]
fn custom_constant_gauge_matches_rotated_zero_gauge() {
    let sys = harmonic(10, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 3);
    let mut rng = seeded(30);
    let gen = mctdhf::random::random_hermitian(4, &mut rng);
    let g = gen.clone();
    let custom = run(&sys, &state, 0.001, 0.4, GaugeSpec::Custom(Arc::new(move |_| g.clone())));
    let zero = run(&sys, &state, 0.001, 0.4, GaugeSpec::Zero);
    // a constant generator M rotates the zero-gauge orbitals by exp(-itM)
    let u = expm_herm(&gen, 0.4);
    let moved = apply_gauge(&u, zero.final_state(), &sys.table).unwrap();
    assert!(moved.distance(custom.final_state(), &sys.grid) < 1e-8);
}

#[test]
fn natural_gauge_keeps_the_density_matrix_diagonal() {
    // N = 3 needs K = 6 for a nondegenerate occupation spectrum
    let sys = harmonic(8, 3, 6, 1.0, None);
    let start = smooth_state(&sys, 4);
    let (_, vecs) = occupations(&gamma1(&start.coeffs, &sys.table).unwrap().entries);
    let state = apply_gauge(&vecs.adjoint(), &start, &sys.table).unwrap();
    let g0 = gamma1(&state.coeffs, &sys.table).unwrap().entries;
    let offdiag = |g: &CMatrix| (g - CMatrix::from_diagonal(&g.diagonal())).norm();
    assert!(offdiag(&g0) < 1e-12);

    let natural = run(&sys, &state, 0.002, 0.2, GaugeSpec::Natural { gap_tol: 1e-6 });
    for snap in &natural.snapshots {
        assert!(offdiag(&gamma1(&snap.coeffs, &sys.table).unwrap().entries) < 1e-7);
    }
    let working = run(&sys, &state, 0.002, 0.2, GaugeSpec::OneBody);
    assert!(psi_distance(&sys, natural.final_state(), working.final_state()) < 1e-7);
    let m = natural_gauge_m(&sys, &state, 1e-6).unwrap();
    assert!((&m - m.adjoint()).norm() < 1e-10);
}

#[test]
fn natural_gauge_rejects_degenerate_occupations() {
    let sys = harmonic(8, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 5);
    let (_, vecs) = occupations(&gamma1(&state.coeffs, &sys.table).unwrap().entries);
    let diag = apply_gauge(&vecs.adjoint(), &state, &sys.table).unwrap();
    assert!(matches!(natural_gauge_m(&sys, &diag, 1e-6), Err(Error::DegenerateSpectrum(_))));
}

#[test]
fn energy_is_conserved_in_every_gauge() {
    let sys = harmonic(12, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 6);
    for gauge in [GaugeSpec::OneBody, GaugeSpec::Zero] {
        let traj = run(&sys, &state, 0.005, 1.0, gauge);
        let e0 = traj.diagnostics[0].energy;
        for d in &traj.diagnostics {
            assert!((d.energy - e0).abs() < 1e-8 * e0.abs());
            assert!(d.gram_dev < 1e-8 && (d.norm_c - 1.0).abs() < 1e-8);
        }
    }
}

#[test]
fn free_orbitals_follow_the_one_body_propagator() {
    let grid = build_grid(10, 0.5, Boundary::Periodic).unwrap();
    let onebody = build_onebody(&grid, &[0.0; 10], None, KineticScale::Half).unwrap();
    let sys = System::new(grid.clone(), onebody, PairPotential::zero(&grid), 2, 4).unwrap();
    let mut rng = seeded(7);
    let state = McState::new(random_coeffs(6, &mut rng), random_orbitals(&grid, 4, &mut rng));
    let traj = run(&sys, &state, 1e-3, 0.5, GaugeSpec::OneBody);
    let exact = McState { coeffs: state.coeffs.clone(), orbitals: expm_herm(sys.onebody.static_matrix(), 0.5) * &state.orbitals, t: 0.5 };
    assert!(psi_distance(&sys, traj.final_state(), &exact) < 1e-10);
}

#[test]
fn laser_run_at_full_rank_matches_the_exact_time_dependent_evolution() {
    let laser = Laser {
        vector_potential: Waveform::Sine { amplitude: 0.5, frequency: 3.0, phase: 0.0 },
        potential_strength: Waveform::Constant { value: 1.0 },
    };
    let sys = harmonic(4, 2, 4, 1.0, Some(laser));
    let mut rng = seeded(8);
    let state = McState::new(random_coeffs(6, &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
    let traj = run(&sys, &state, 1e-3, 0.5, GaugeSpec::OneBody);
    let gt = enumerate_configs(2, 4).unwrap();
    let psi0 = expand_full(&sys.grid, &state.coeffs, &state.orbitals, &sys.table, &gt).unwrap();
    let exact = propagate_piecewise(
        &psi0,
        |t| build_full_hamiltonian(&sys.grid, &sys.onebody.matrix_at(t), &sys.pair, 2, DEFAULT_DIMENSION_CAP),
        0.5,
        1e-3,
    )
    .unwrap();
    let f = traj.final_state();
    let psi = expand_full(&sys.grid, &f.coeffs, &f.orbitals, &sys.table, &gt).unwrap();
    assert!(compare(&psi, &exact).unwrap().0 < 1e-6);
    // the field does work, so the energy is not constant
    let e = &traj.diagnostics;
    assert!((e.last().unwrap().energy - e[0].energy).abs() > 1e-4);
}

#[test]
fn strang_splitting_is_second_order_and_agrees_with_rk4() {
    let sys = harmonic(12, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 9);
    let reference = run(&sys, &state, 0.001, 0.5, GaugeSpec::OneBody);
    let split = |dt: f64| {
        let mut opts = IntegratorOptions::new(dt, 0.5);
        opts.scheme = Scheme::StrangSplit;
        integrate(&sys, &state, &opts, None).unwrap()
    };
    let r = reference.final_state();
    let e1 = psi_distance(&sys, split(0.02).final_state(), r);
    let e2 = psi_distance(&sys, split(0.01).final_state(), r);
    assert!(e2 < 1e-3);
    let ratio = e1 / e2;
    assert!((3.0..5.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn strang_splitting_needs_the_onebody_gauge() {
    let sys = harmonic(8, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 10);
    let mut opts = IntegratorOptions::new(0.01, 0.1);
    opts.scheme = Scheme::StrangSplit;
    opts.gauge = GaugeSpec::Zero;
    assert!(matches!(integrate(&sys, &state, &opts, None), Err(Error::Config(_))));
}

fn determinant_state(sys: &System) -> McState {
    let mut coeffs = CVector::zeros(sys.table.len());
    coeffs[0] = c(1.0, 0.0);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    McState::new(coeffs, vecs.columns(0, sys.k()) / c(sys.grid.spacing().sqrt(), 0.0))
}

#[test]
fn singular_density_halts_without_regularization() {
    let sys = harmonic(8, 2, 4, 1.0, None);
    let traj = run(&sys, &determinant_state(&sys), 0.01, 0.2, GaugeSpec::OneBody);
    assert!(matches!(traj.halted, Some(HaltEvent::SingularDensity { t, .. }) if t == 0.0));
    assert_eq!(traj.steps, 0);
    assert!(traj.diagnostics[0].inv_gamma_frob.is_infinite());
}

#[test]
fn regularization_carries_a_singular_start() {
    let sys = harmonic(8, 2, 4, 1.0, None);
    let mut opts = IntegratorOptions::new(0.01, 0.2);
    for mode in [RegularizationMode::Shift, RegularizationMode::Exponential] {
        opts.regularization = Some(Regularization { epsilon: 1e-3, mode });
        let traj = integrate(&sys, &determinant_state(&sys), &opts, None).unwrap();
        assert!(traj.halted.is_none());
        assert!(traj.final_state().is_finite());
        let d = traj.diagnostics.last().unwrap();
        assert!((d.norm_c - 1.0).abs() < 1e-8);
    }
}

#[test]
fn oversized_steps_report_the_last_finite_state() {
    let sys = harmonic(12, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 11);
    let mut opts = IntegratorOptions::new(5.0, 2000.0);
    opts.regularization = Some(Regularization { epsilon: 1e-3, mode: RegularizationMode::Shift });
    match integrate(&sys, &state, &opts, None) {
        Err(Error::IntegratorDiverged { t, last_good }) => {
            assert!(t > 0.0);
            assert!(last_good.is_finite());
        }
        other => panic!("expected divergence, got {:?}", other.map(|t| t.steps)),
    }
}

#[test]
fn exact_evolution_conserves_norm_and_energy() {
    let sys = harmonic(8, 2, 4, 1.0, None);
    let state = smooth_state(&sys, 12);
    let hfull = build_full_hamiltonian(&sys.grid, sys.onebody.static_matrix(), &sys.pair, 2, DEFAULT_DIMENSION_CAP).unwrap();
    let psi = expand_full(&sys.grid, &state.coeffs, &state.orbitals, &sys.table, &hfull.table).unwrap();
    let prop = ExactPropagator::new(&hfull);
    let e0 = mctdhf::oracle::expectation(&hfull, &psi);
    for t in [0.0, 0.3, 2.0, 10.0] {
        let later = prop.propagate(&psi, t);
        assert!((later.norm() - psi.norm()).abs() < 1e-12);
        assert!((mctdhf::oracle::expectation(&hfull, &later) - e0).abs() < 1e-12 * e0.abs().max(1.0));
    }
    assert!(compare(&prop.propagate(&psi, 0.0), &psi).unwrap().0 < 1e-13);
}

#[test]
fn mean_field_integrals_do_not_depend_on_the_thread_count() {
    use mctdhf::meanfield::PairIntegrals;
    let grid = build_grid(40, 0.3, Boundary::Dirichlet).unwrap();
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0).unwrap();
    let orbitals = random_orbitals(&grid, 8, &mut seeded(13));
    let with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let ints = PairIntegrals::new(&grid, &pair, &orbitals);
            let mut out = Vec::new();
            for i in 0..8 {
                for j in 0..8 {
                    out.push(ints.pairing(i, j, (i + 3) % 8, (j + 5) % 8));
                    out.extend(ints.conv(i, j).iter().copied());
                }
            }
            out
        })
    };
    assert_eq!(with(1), with(4));
}

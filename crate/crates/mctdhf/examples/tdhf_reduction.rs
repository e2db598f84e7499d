//! With as many orbitals as particles the method is time-dependent
//! Hartree-Fock; compare against a direct Hartree-Fock integrator.

use mctdhf::algebra::enumerate_configs;
use mctdhf::ansatz::expand_full;
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::linalg::{c, eigh, CVector};
use mctdhf::oracle::compare;
use mctdhf::propagation::tdhf::propagate_tdhf;
use mctdhf::propagation::{integrate, IntegratorOptions, McState, System};
use mctdhf::random::{random_unitary, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(16, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    let sys = System::new(grid.clone(), onebody, pair, 2, 2)?;

    let mut rng = seeded(3);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let orbitals = (vecs.columns(0, 4) * random_unitary(4, &mut rng)).columns(0, 2) / c(grid.spacing().sqrt(), 0.0);
    let state = McState::new(CVector::from_element(1, c(1.0, 0.0)), orbitals);

    let (dt, t_final) = (0.005, 0.5);
    let traj = integrate(&sys, &state, &IntegratorOptions::new(dt, t_final), None)?;
    let hf = McState::new(state.coeffs.clone(), propagate_tdhf(&sys, &state.orbitals, dt, t_final)?);

    let gt = enumerate_configs(2, grid.len())?;
    let expand = |s: &McState| expand_full(&grid, &s.coeffs, &s.orbitals, &sys.table, &gt);
    let (distance, fidelity) = compare(&expand(traj.final_state())?, &expand(&hf)?)?;
    println!("|<Psi_MC, Psi_HF>| at T = {t_final}: {fidelity:.12}");
    println!("distance (phase included):   {distance:.3e}");
    Ok(())
}

//! Non-interacting particles: the coefficients stay fixed and each orbital
//! follows the one-body propagator, so the run matches the exact evolution.

use mctdhf::ansatz::expand_full;
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::oracle::{build_full_hamiltonian, compare, ExactPropagator, DEFAULT_DIMENSION_CAP};
use mctdhf::propagation::{integrate, IntegratorOptions, McState, System};
use mctdhf::random::{random_coeffs, random_orbitals, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(12, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let sys = System::new(grid.clone(), onebody, PairPotential::zero(&grid), 2, 4)?;

    let mut rng = seeded(1);
    let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(&grid, 4, &mut rng));
    let traj = integrate(&sys, &state, &IntegratorOptions::new(1e-3, 1.0), None)?;
    let end = traj.final_state();

    let hfull = build_full_hamiltonian(&grid, sys.onebody.static_matrix(), &sys.pair, 2, DEFAULT_DIMENSION_CAP)?;
    let psi0 = expand_full(&grid, &state.coeffs, &state.orbitals, &sys.table, &hfull.table)?;
    let exact = ExactPropagator::new(&hfull).propagate(&psi0, 1.0);
    let psi = expand_full(&grid, &end.coeffs, &end.orbitals, &sys.table, &hfull.table)?;

    println!("steps                     {}", traj.steps);
    println!("coefficient change        {:.3e}", (&end.coeffs - &state.coeffs).norm());
    println!("distance to exact at T=1  {:.3e}", compare(&psi, &exact)?.0);
    Ok(())
}

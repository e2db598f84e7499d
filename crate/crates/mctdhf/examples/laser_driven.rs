//! A time-dependent field at full rank, checked against midpoint-exponential
//! propagation of the full Hamiltonian.

use mctdhf::algebra::enumerate_configs;
use mctdhf::ansatz::expand_full;
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, Laser, PairPotential, Waveform};
use mctdhf::oracle::{build_full_hamiltonian, compare, propagate_piecewise, DEFAULT_DIMENSION_CAP};
use mctdhf::propagation::{integrate, IntegratorOptions, McState, System};
use mctdhf::random::{random_coeffs, random_orbitals, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(4, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let laser = Laser {
        vector_potential: Waveform::Sine { amplitude: 0.5, frequency: 3.0, phase: 0.0 },
        potential_strength: Waveform::Constant { value: 1.0 },
    };
    let onebody = build_onebody(&grid, &pot, Some(laser), KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    let sys = System::new(grid.clone(), onebody, pair, 2, 4)?;

    let mut rng = seeded(8);
    let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(&grid, 4, &mut rng));
    let mut opts = IntegratorOptions::new(1e-3, 1.0);
    opts.diag_every = 100;
    let traj = integrate(&sys, &state, &opts, None)?;
    for d in &traj.diagnostics {
        println!("t = {:.2}  energy {:+.8}", d.t, d.energy);
    }

    let gt = enumerate_configs(2, grid.len())?;
    let psi0 = expand_full(&grid, &state.coeffs, &state.orbitals, &sys.table, &gt)?;
    let exact = propagate_piecewise(
        &psi0,
        |t| build_full_hamiltonian(&grid, &sys.onebody.matrix_at(t), &sys.pair, 2, DEFAULT_DIMENSION_CAP),
        1.0,
        1e-3,
    )?;
    let end = traj.final_state();
    let psi = expand_full(&grid, &end.coeffs, &end.orbitals, &sys.table, &gt)?;
    println!("distance to exact evolution at T = 1: {:.3e}", compare(&psi, &exact)?.0);
    Ok(())
}

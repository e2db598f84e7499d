//! With fewer orbitals than grid points the method is an approximation; its
//! distance to the exact evolution stays below the accumulated residual.

use mctdhf::ansatz::expand_full;
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::linalg::{c, eigh, CVector};
use mctdhf::oracle::{compare, ExactPropagator, DEFAULT_DIMENSION_CAP};
use mctdhf::propagation::{integrate, IntegratorOptions, McState, ResidualEstimator, System};
use mctdhf::random::{random_unitary, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(6, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    let sys = System::new(grid.clone(), onebody, pair, 2, 2)?;

    let mut rng = seeded(7);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let orbitals = (vecs.columns(0, 4) * random_unitary(4, &mut rng)).columns(0, 2) / c(grid.spacing().sqrt(), 0.0);
    let state = McState::new(CVector::from_element(1, c(1.0, 0.0)), orbitals);

    let est = ResidualEstimator::new(&sys, DEFAULT_DIMENSION_CAP)?;
    let mut opts = IntegratorOptions::new(1e-3, 0.5);
    opts.diag_every = 50;
    opts.snapshot_every = 50;
    let traj = integrate(&sys, &state, &opts, Some(&est))?;

    let exact = ExactPropagator::new(est.hamiltonian().expect("static Hamiltonian"));
    let gt = est.grid_table();
    let psi0 = expand_full(&grid, &state.coeffs, &state.orbitals, &sys.table, gt)?;
    println!("{:>6} {:>12} {:>12}", "t", "error", "bound");
    for (snap, row) in traj.snapshots.iter().zip(&traj.diagnostics) {
        let psi = expand_full(&grid, &snap.coeffs, &snap.orbitals, &sys.table, gt)?;
        let err = compare(&psi, &exact.propagate(&psi0, snap.t))?.0;
        println!("{:>6.2} {:>12.4e} {:>12.4e}", snap.t, err, row.residual_integral.unwrap_or(f64::NAN));
    }
    Ok(())
}

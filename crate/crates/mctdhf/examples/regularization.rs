//! A determinant start has a singular density matrix: the plain equations
//! halt immediately, while the regularized ones run through it.

use mctdhf::density::{Regularization, RegularizationMode};
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::linalg::{c, eigh, CVector};
use mctdhf::propagation::{integrate, IntegratorOptions, McState, System};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(12, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    let sys = System::new(grid.clone(), onebody, pair, 2, 4)?;

    let mut coeffs = CVector::zeros(sys.table.len());
    coeffs[0] = c(1.0, 0.0);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let state = McState::new(coeffs, vecs.columns(0, 4) / c(grid.spacing().sqrt(), 0.0));

    let mut opts = IntegratorOptions::new(0.01, 1.0);
    let plain = integrate(&sys, &state, &opts, None)?;
    println!("unregularized: {:?}", plain.halted);

    for mode in [RegularizationMode::Shift, RegularizationMode::Exponential] {
        for epsilon in [1e-2, 1e-3, 1e-4] {
            opts.regularization = Some(Regularization { epsilon, mode });
            let traj = integrate(&sys, &state, &opts, None)?;
            let (first, last) = (&traj.diagnostics[0], traj.diagnostics.last().expect("diagnostics"));
            println!(
                "{mode:?} eps = {epsilon:.0e}: steps {}, smallest occupation {:.3e} -> {:.3e}, energy change {:+.3e}",
                traj.steps,
                first.mu,
                last.mu,
                last.energy - first.energy
            );
        }
    }
    Ok(())
}

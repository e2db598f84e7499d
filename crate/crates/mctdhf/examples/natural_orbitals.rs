//! Propagation in the natural gauge keeps the density matrix diagonal, so the
//! orbitals stay natural orbitals; occupations and non-freeness are printed.

use mctdhf::density::{gamma1, nonfreeness, occupations};
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::linalg::{c, eigh, CMatrix};
use mctdhf::propagation::{apply_gauge, integrate, GaugeSpec, IntegratorOptions, McState, System};
use mctdhf::random::{random_coeffs, random_unitary, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(8, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    // three particles in six orbitals give a nondegenerate occupation spectrum
    let sys = System::new(grid.clone(), onebody, pair, 3, 6)?;

    let mut rng = seeded(4);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let orbitals = vecs.columns(0, 6) * random_unitary(6, &mut rng) / c(grid.spacing().sqrt(), 0.0);
    let start = McState::new(random_coeffs(sys.table.len(), &mut rng), orbitals);
    let (_, natural) = occupations(&gamma1(&start.coeffs, &sys.table)?.entries);
    let state = apply_gauge(&natural.adjoint(), &start, &sys.table)?;

    let mut opts = IntegratorOptions::new(0.002, 0.4);
    opts.gauge = GaugeSpec::Natural { gap_tol: 1e-6 };
    opts.snapshot_every = 40;
    let traj = integrate(&sys, &state, &opts, None)?;
    for snap in &traj.snapshots {
        let g = gamma1(&snap.coeffs, &sys.table)?.entries;
        let off = (&g - CMatrix::from_diagonal(&g.diagonal())).norm();
        let (occ, _) = occupations(&g);
        let occ: Vec<f64> = occ.iter().map(|x| x.clamp(0.0, 1.0)).collect();
        let shown: Vec<String> = occ.iter().map(|x| format!("{x:.4}")).collect();
        println!("t = {:.2}  off-diagonal {:.1e}  occupations [{}]  non-freeness {:.5}", snap.t, off, shown.join(", "), nonfreeness(&occ)?);
    }
    Ok(())
}

//! The same wavefunction propagated in two gauges, and the unitary transport
//! that maps one orbital trajectory onto the other.

use mctdhf::algebra::enumerate_configs;
use mctdhf::ansatz::expand_full;
use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::linalg::{c, eigh, CMatrix};
use mctdhf::meanfield::orbital_matrix;
use mctdhf::oracle::compare;
use mctdhf::propagation::{apply_gauge, gauge_transport, integrate, GaugeSpec, IntegratorOptions, McState, System};
use mctdhf::random::{random_coeffs, random_unitary, seeded};

fn main() -> mctdhf::Result<()> {
    let grid = build_grid(10, 0.5, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    let sys = System::new(grid.clone(), onebody, pair, 2, 4)?;

    let mut rng = seeded(2);
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let orbitals = (vecs.columns(0, 6) * random_unitary(6, &mut rng)).columns(0, 4) / c(grid.spacing().sqrt(), 0.0);
    let state = McState::new(random_coeffs(sys.table.len(), &mut rng), orbitals);

    let (dt, t_final) = (0.0025, 0.5);
    let mut opts = IntegratorOptions::new(dt, t_final);
    opts.snapshot_every = 1;
    let working = integrate(&sys, &state, &opts, None)?;
    opts.gauge = GaugeSpec::Zero;
    let zero = integrate(&sys, &state, &opts, None)?;

    let gt = enumerate_configs(2, grid.len())?;
    let expand = |s: &McState| expand_full(&grid, &s.coeffs, &s.orbitals, &sys.table, &gt);
    let (a, b) = (working.final_state(), zero.final_state());
    println!("orbital distance between gauges   {:.3e}", a.distance(b, &grid));
    println!("wavefunction distance             {:.3e}", compare(&expand(a)?, &expand(b)?)?.0);

    // the zero gauge differs from the working gauge by the generator -hᵀ
    let h = sys.onebody.static_matrix().clone();
    let samples: Vec<CMatrix> = working.snapshots.iter().map(|s| orbital_matrix(&grid, &s.orbitals, &(&h * &s.orbitals))).collect();
    let path = gauge_transport(|t| -samples[(t / dt).round() as usize].transpose(), &CMatrix::identity(4, 4), 2.0 * dt, t_final)?;
    let moved = apply_gauge(&path.last().expect("transport path").1, a, &sys.table)?;
    println!("transported state vs zero gauge   {:.3e}", moved.distance(b, &grid));
    Ok(())
}

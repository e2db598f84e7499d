//! Minimal energies at increasing orbital counts, compared with the
//! full-CI ground state, and the existence check for a global minimizer.

use mctdhf::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use mctdhf::oracle::{build_full_hamiltonian, ExactPropagator, DEFAULT_DIMENSION_CAP};
use mctdhf::propagation::System;
use mctdhf::stationary::{check_existence, ground_levels, MinimizeOptions};

fn system(k: usize) -> mctdhf::Result<System> {
    let grid = build_grid(6, 1.0, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = PairPotential::soft_coulomb(&grid, 1.0, 1.0)?;
    System::new(grid, onebody, pair, 2, k)
}

fn main() -> mctdhf::Result<()> {
    let opts = MinimizeOptions { restarts: 4, seed: 909, ..Default::default() };
    let levels = ground_levels(system, &[2, 4, 6], &opts)?;
    for lv in &levels {
        let r = &lv.result;
        println!(
            "K = {}: I(K) = {:.10}  residuals {:.1e} {:.1e}  iterations {}",
            lv.k, r.energy, r.el_residuals.0, r.el_residuals.1, r.iterations
        );
    }
    let full = system(6)?;
    let hfull = build_full_hamiltonian(&full.grid, full.onebody.static_matrix(), &full.pair, 2, DEFAULT_DIMENSION_CAP)?;
    println!("full-CI ground energy: {:.10}", ExactPropagator::new(&hfull).ground_energy());
    for lv in &levels[1..] {
        let check = check_existence(&levels, 2, lv.k, lv.result.energy)?;
        println!("K = {} against K' = {}: {:?}", check.k, check.k_previous, check.outcome.verdict);
        if let Some(w) = check.outcome.warning {
            println!("  {w}");
        }
    }
    Ok(())
}

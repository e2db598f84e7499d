use super::rhs::{solve_density, SINGULAR_TOL};
use super::{McState, System};
use crate::algebra::{enumerate_configs, ConfigTable};
use crate::ansatz::{adjoint_from_hole, create_vector, expand_full, single_hole, FullWavefunction};
use crate::density::{gamma1, rank_diagnostics};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::meanfield::project_out_columns;
use crate::oracle::{build_full_hamiltonian, FullHamiltonian};

/// Norm of the part of `H_N Ψ` that leaves the tangent space of the ansatz.
pub struct ResidualEstimator {
    sys: System,
    grid_table: ConfigTable,
    cap: usize,
    fixed: Option<FullHamiltonian>,
}

impl ResidualEstimator {
    pub fn new(sys: &System, cap: usize) -> Result<Self> {
        let grid_table = enumerate_configs(sys.n(), sys.grid.len())?;
        if grid_table.len() > cap {
            return Err(Error::DimensionCap { dim: grid_table.len(), cap });
        }
        let fixed = if sys.onebody.is_time_dependent() {
            None
        } else {
            Some(build_full_hamiltonian(&sys.grid, sys.onebody.static_matrix(), &sys.pair, sys.n(), cap)?)
        };
        Ok(ResidualEstimator { sys: sys.clone(), grid_table, cap, fixed })
    }

    pub fn grid_table(&self) -> &ConfigTable {
        &self.grid_table
    }

    /// The full Hamiltonian, when the one-body operator is static.
    pub fn hamiltonian(&self) -> Option<&FullHamiltonian> {
        self.fixed.as_ref()
    }

    pub fn residual(&self, state: &McState) -> Result<f64> {
        let owned;
        let hfull = match &self.fixed {
            Some(h) => h,
            None => {
                owned =
                    build_full_hamiltonian(&self.sys.grid, &self.sys.onebody.matrix_at(state.t), &self.sys.pair, self.sys.n(), self.cap)?;
                &owned
            }
        };
        residual_bound(&self.sys, state, hfull, &self.grid_table)
    }
}

/// `ρ = ‖(I - P_T) H_N Ψ‖` for `Ψ = π(C, Φ)`.
///
/// The tangent space splits orthogonally into the span of the determinants
/// `Φ_σ` and the orbital directions `Σ_k ∂Ψ/∂φ_k[δ_k]` with `δ_k ⊥ span Φ`,
/// on which the metric is `Γ`.
pub fn residual_bound(sys: &System, state: &McState, hfull: &FullHamiltonian, grid_table: &ConfigTable) -> Result<f64> {
    let (grid, table) = (&sys.grid, &sys.table);
    let gamma = gamma1(&state.coeffs, table)?.entries;
    let rank = rank_diagnostics(&gamma, SINGULAR_TOL);
    if rank.singular {
        return Err(Error::SingularDensity { mu: rank.mu, t: state.t });
    }
    let orbitals = &state.orbitals;
    let psi = expand_full(grid, &state.coeffs, orbitals, table, grid_table)?;
    let h_psi = FullWavefunction { amplitudes: &hfull.matrix * &psi.amplitudes, n: psi.n, l: psi.l };

    let r = table.len();
    let mut basis = CMatrix::zeros(grid_table.len(), r);
    for s in 0..r {
        let mut e = CVector::zeros(r);
        e[s] = c(1.0, 0.0);
        basis.set_column(s, &expand_full(grid, &e, orbitals, table, grid_table)?.amplitudes);
    }
    let config_part = &basis * (basis.adjoint() * &h_psi.amplitudes);

    let k = sys.k();
    let holes: Vec<CVector> = (0..k).map(|i| single_hole(grid, orbitals, i, &psi, grid_table)).collect::<Result<_>>()?;
    let mut grads = CMatrix::zeros(grid.len(), k);
    for (i, hole) in holes.iter().enumerate() {
        grads.set_column(i, &adjoint_from_hole(grid, hole, &h_psi, grid_table));
    }
    let directions = solve_density(&gamma, &project_out_columns(grid, orbitals, &grads))?;
    let mut orbital_part = CVector::zeros(grid_table.len());
    let sqrt_h = c(grid.spacing().sqrt(), 0.0);
    for (i, hole) in holes.iter().enumerate() {
        let u: CVector = directions.column(i) * sqrt_h;
        orbital_part += create_vector(&u, hole, grid_table).amplitudes;
    }
    Ok((h_psi.amplitudes - config_part - orbital_part).norm())
}

//! Time-dependent Hartree-Fock, `i ∂φ_i/∂t = Hφ_i + F_Φ φ_i`, integrated
//! directly from the Fock operator as a reference for the `K = N` case.

use super::System;
use crate::error::Result;
use crate::linalg::{c, CMatrix, I};
use crate::meanfield::fock_operator;

fn derivative(sys: &System, orbitals: &CMatrix, t: f64) -> CMatrix {
    let fock = fock_operator(&sys.grid, &sys.pair, orbitals);
    (sys.onebody.matrix_at(t) * orbitals + fock.apply_columns(orbitals)) * (-I)
}

/// RK4 propagation of the occupied orbitals from `t = 0` to `t_final`.
pub fn propagate_tdhf(sys: &System, orbitals: &CMatrix, dt: f64, t_final: f64) -> Result<CMatrix> {
    let steps = (t_final / dt).round() as usize;
    let mut phi = orbitals.clone();
    for s in 0..steps {
        let t = s as f64 * dt;
        let k1 = derivative(sys, &phi, t);
        let k2 = derivative(sys, &(&phi + &k1 * c(0.5 * dt, 0.0)), t + 0.5 * dt);
        let k3 = derivative(sys, &(&phi + &k2 * c(0.5 * dt, 0.0)), t + 0.5 * dt);
        let k4 = derivative(sys, &(&phi + &k3 * c(dt, 0.0)), t + dt);
        phi += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
    }
    Ok(phi)
}

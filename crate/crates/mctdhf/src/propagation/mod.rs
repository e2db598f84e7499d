//! Time integration of the multi-configuration equations of motion.

mod integrate;
mod residual;
mod rhs;
pub mod tdhf;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{coeff_transform, enumerate_configs, ConfigTable};
use crate::error::{Error, Result};
use crate::grid::{Grid, OneBodyOperator, PairPotential};
use crate::linalg::{c, hermitian_defect, polar_unitary, CMatrix, CVector, I};

pub use integrate::{integrate, DiagnosticRow, HaltEvent, IntegratorOptions, Scheme, Trajectory};
pub use residual::{residual_bound, ResidualEstimator};
pub(crate) use rhs::solve_density;
pub use rhs::{natural_gauge_m, rhs, rhs_working, Derivative};

/// Problem definition shared by every propagation routine.
#[derive(Clone, Debug)]
pub struct System {
    pub grid: Grid,
    pub onebody: OneBodyOperator,
    pub pair: PairPotential,
    pub table: ConfigTable,
}

impl System {
    pub fn new(grid: Grid, onebody: OneBodyOperator, pair: PairPotential, n: usize, k: usize) -> Result<Self> {
        if k > grid.len() {
            return Err(Error::InvalidDimension(format!("K = {k} exceeds the {} grid points", grid.len())));
        }
        let table = enumerate_configs(n, k)?;
        Ok(System { grid, onebody, pair, table })
    }

    pub fn n(&self) -> usize {
        self.table.n()
    }

    pub fn k(&self) -> usize {
        self.table.k()
    }
}

/// Coefficients, orbitals (grid values, one per column) and time.
#[derive(Clone, Debug, PartialEq)]
pub struct McState {
    pub coeffs: CVector,
    pub orbitals: CMatrix,
    pub t: f64,
}

impl McState {
    pub fn new(coeffs: CVector, orbitals: CMatrix) -> Self {
        McState { coeffs, orbitals, t: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().chain(self.orbitals.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Distance `‖ΔC‖ + ‖ΔΦ‖` in the product norm (grid-weighted for orbitals).
    pub fn distance(&self, other: &McState, grid: &Grid) -> f64 {
        (&self.coeffs - &other.coeffs).norm() + (&self.orbitals - &other.orbitals).norm() * grid.spacing().sqrt()
    }
}

/// Time-dependent Hermitian generator of a custom gauge.
pub type GaugeFn = Arc<dyn Fn(f64) -> CMatrix + Send + Sync>;

/// In-span part of the orbital motion, `⟨∂φ_i/∂t, φ_j⟩ = -i M_ij`.
#[derive(Clone, Default)]
pub enum GaugeSpec {
    /// `M = 0`
    Zero,
    /// `M_ij = ⟨Hφ_i, φ_j⟩`, the working equations.
    #[default]
    OneBody,
    /// Keeps `Γ` diagonal; needs simple occupations.
    Natural {
        gap_tol: f64,
    },
    Custom(GaugeFn),
}

impl fmt::Debug for GaugeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GaugeSpec::Zero => write!(f, "Zero"),
            GaugeSpec::OneBody => write!(f, "OneBody"),
            GaugeSpec::Natural { gap_tol } => write!(f, "Natural {{ gap_tol: {gap_tol} }}"),
            GaugeSpec::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Gauge names as they appear in scenario files.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeMode {
    Zero,
    #[default]
    Onebody,
    Natural,
}

pub const DEFAULT_GAP_TOL: f64 = 1e-6;

impl From<GaugeMode> for GaugeSpec {
    fn from(mode: GaugeMode) -> Self {
        match mode {
            GaugeMode::Zero => GaugeSpec::Zero,
            GaugeMode::Onebody => GaugeSpec::OneBody,
            GaugeMode::Natural => GaugeSpec::Natural { gap_tol: DEFAULT_GAP_TOL },
        }
    }
}

/// `Φ' = UΦ`, `C' = conj(compound(U)) C`; leaves `Ψ` unchanged.
pub fn apply_gauge(u: &CMatrix, state: &McState, table: &ConfigTable) -> Result<McState> {
    let moved = coeff_transform(u, &state.coeffs, table)?;
    if !moved.is_unitary(1e-10) {
        return Err(Error::NonUnitary(moved.unitary_defect));
    }
    Ok(McState { coeffs: moved.coeffs, orbitals: &state.orbitals * u.transpose(), t: state.t })
}

/// Solves `i dU/dt = U M(t)` by RK4 with a polar re-unitarization after each step.
///
/// Returns `(t, U(t))` at every step, starting with `(0, U0)`.
pub fn gauge_transport(m: impl Fn(f64) -> CMatrix, u0: &CMatrix, dt: f64, t_final: f64) -> Result<Vec<(f64, CMatrix)>> {
    let steps = (t_final / dt).round().max(0.0) as usize;
    let check = |t: f64| -> Result<CMatrix> {
        let mt = m(t);
        let defect = hermitian_defect(&mt);
        if defect > 1e-10 {
            return Err(Error::NonHermitian(defect));
        }
        Ok(mt)
    };
    let f = |u: &CMatrix, mt: &CMatrix| -> CMatrix { u * mt * (-I) };
    let mut u = u0.clone();
    let mut out = Vec::with_capacity(steps + 1);
    out.push((0.0, u.clone()));
    for s in 0..steps {
        let t = s as f64 * dt;
        let (m0, mh, m1) = (check(t)?, check(t + 0.5 * dt)?, check(t + dt)?);
        let k1 = f(&u, &m0);
        let k2 = f(&(&u + &k1 * c(0.5 * dt, 0.0)), &mh);
        let k3 = f(&(&u + &k2 * c(0.5 * dt, 0.0)), &mh);
        let k4 = f(&(&u + &k3 * c(dt, 0.0)), &m1);
        u += (k1 + k2 * c(2.0, 0.0) + k3 * c(2.0, 0.0) + k4) * c(dt / 6.0, 0.0);
        u = polar_unitary(&u);
        out.push(((s + 1) as f64 * dt, u.clone()));
    }
    Ok(out)
}

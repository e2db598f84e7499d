use nalgebra::Cholesky;

use super::{GaugeSpec, McState, System};
use crate::algebra::{apply_excitation, one_body_config_matrix};
use crate::density::{gamma1, gamma2, rank_diagnostics, regularize, Regularization};
use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector, I};
use crate::meanfield::{apply_w, k_matrix, orbital_matrix, project_out_columns, w_matrix, PairIntegrals};

/// Time derivative of a state.
#[derive(Clone, Debug)]
pub struct Derivative {
    pub coeffs: CVector,
    pub orbitals: CMatrix,
}

pub(crate) const SINGULAR_TOL: f64 = 1e-10;

/// Quantities shared by every gauge at one state.
pub(crate) struct Frame {
    pub h_phi: CMatrix,
    pub hmat: CMatrix,
    pub kmat: CMatrix,
    pub gamma: CMatrix,
    pub nonlinear: CMatrix,
}

/// Solves `Γ Y = X` in the orbital index: `Σ_k Γ_lk Y_k = X_l` for each column `l`.
pub(crate) fn solve_density(gamma: &CMatrix, x: &CMatrix) -> Result<CMatrix> {
    let rhs = x.transpose();
    let y = match Cholesky::new(gamma.clone()) {
        Some(ch) => ch.solve(&rhs),
        None => gamma.clone().lu().solve(&rhs).ok_or(Error::SingularDensity { mu: 0.0, t: f64::NAN })?,
    };
    Ok(y.transpose())
}

pub(crate) fn frame(sys: &System, state: &McState, reg: Option<Regularization>, with_nonlinear: bool) -> Result<Frame> {
    let (grid, table) = (&sys.grid, &sys.table);
    let (coeffs, orbitals) = (&state.coeffs, &state.orbitals);
    let ints = PairIntegrals::new(grid, &sys.pair, orbitals);
    let kmat = k_matrix(table, &ints);
    let gamma = gamma1(coeffs, table)?.entries;
    let h_phi = sys.onebody.matrix_at(state.t) * orbitals;
    let hmat = orbital_matrix(grid, orbitals, &h_phi);
    let nonlinear = if !with_nonlinear || sys.pair.is_zero() {
        CMatrix::zeros(orbitals.nrows(), orbitals.ncols())
    } else {
        let w = w_matrix(&gamma2(coeffs, table)?, &ints, grid.len());
        let projected = project_out_columns(grid, orbitals, &apply_w(&w, orbitals));
        let metric = match reg {
            Some(r) => regularize(&gamma, r.epsilon, r.mode)?,
            None => {
                let diag = rank_diagnostics(&gamma, SINGULAR_TOL);
                if diag.singular {
                    return Err(Error::SingularDensity { mu: diag.mu, t: state.t });
                }
                gamma.clone()
            }
        };
        solve_density(&metric, &projected)?
    };
    Ok(Frame { h_phi, hmat, kmat, gamma, nonlinear })
}

/// Right-hand side of the working equations (gauge `G = H`):
/// `dC/dt = -i𝕂C`, `dΦ/dt = -i(HΦ + Γ^{-1}(I-P)𝕎Φ)`.
///
/// With a regularization, `Γ_ε^{-1}` replaces `Γ^{-1}` on the nonlinear term.
pub fn rhs_working(sys: &System, state: &McState, reg: Option<Regularization>) -> Result<Derivative> {
    rhs(sys, state, &GaugeSpec::OneBody, reg)
}

/// Right-hand side in an arbitrary gauge with in-span generator `M`:
/// `dφ_i/dt = -i[Σ_j M_ij φ_j + ((I-P)HΦ)_i + (Γ^{-1}(I-P)𝕎Φ)_i]`,
/// `dC/dt = -i(B(h) + 𝕂 - B(Mᵀ))C` with `h_pq = ⟨φ_p|Hφ_q⟩`.
pub fn rhs(sys: &System, state: &McState, gauge: &GaugeSpec, reg: Option<Regularization>) -> Result<Derivative> {
    let fr = frame(sys, state, reg, true)?;
    let (grid, table) = (&sys.grid, &sys.table);
    let orbitals = &state.orbitals;
    if let GaugeSpec::OneBody = gauge {
        return Ok(Derivative { coeffs: &fr.kmat * &state.coeffs * (-I), orbitals: (&fr.h_phi + &fr.nonlinear) * (-I) });
    }
    let m = match gauge {
        GaugeSpec::Zero => CMatrix::zeros(sys.k(), sys.k()),
        GaugeSpec::Natural { gap_tol } => {
            let hconf = one_body_config_matrix(&fr.hmat, table) + &fr.kmat;
            natural_from_parts(&state.coeffs, &fr.gamma, &hconf, sys, *gap_tol)?
        }
        GaugeSpec::Custom(f) => f(state.t),
        GaugeSpec::OneBody => unreachable!(),
    };
    let perp_h = project_out_columns(grid, orbitals, &fr.h_phi);
    let dphi = (orbitals * m.transpose() + perp_h + &fr.nonlinear) * (-I);
    let conf = one_body_config_matrix(&fr.hmat, table) + &fr.kmat - one_body_config_matrix(&m.transpose(), table);
    Ok(Derivative { coeffs: conf * &state.coeffs * (-I), orbitals: dphi })
}

/// Generator of the natural-orbital gauge:
/// `M_ij = ⟨Ψ|[a†_i a_j, H]|Ψ⟩ / (γ_i - γ_j)` off the diagonal, zero on it,
/// with `γ_i` the diagonal of `Γ`.
pub fn natural_gauge_m(sys: &System, state: &McState, gap_tol: f64) -> Result<CMatrix> {
    let fr = frame(sys, state, None, false)?;
    let hconf = one_body_config_matrix(&fr.hmat, &sys.table) + &fr.kmat;
    natural_from_parts(&state.coeffs, &fr.gamma, &hconf, sys, gap_tol)
}

fn natural_from_parts(coeffs: &CVector, gamma: &CMatrix, hconf: &CMatrix, sys: &System, gap_tol: f64) -> Result<CMatrix> {
    let k = sys.k();
    let occ: Vec<f64> = (0..k).map(|i| gamma[(i, i)].re).collect();
    let h_c = hconf * coeffs;
    let mut m = CMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            if i == j {
                continue;
            }
            let gap = occ[i] - occ[j];
            if gap.abs() < gap_tol {
                return Err(Error::DegenerateSpectrum(gap.abs()));
            }
            // ⟨[X, H]⟩ = ⟨X† Ψ | HΨ⟩ - ⟨HΨ | XΨ⟩ with X = a†_i a_j
            let x_dag = apply_excitation(coeffs, &sys.table, j, i);
            let x = apply_excitation(coeffs, &sys.table, i, j);
            let comm = x_dag.dotc(&h_c) - h_c.dotc(&x);
            m[(i, j)] = comm / c(gap, 0.0);
        }
    }
    Ok(m)
}

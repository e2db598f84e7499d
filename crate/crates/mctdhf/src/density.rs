//! Reduced density matrices of the coefficient vector.

use serde::{Deserialize, Serialize};

use crate::algebra::ConfigTable;
use crate::error::{Error, Result};
use crate::linalg::{c, eigh, hermitian_fn, CMatrix, CVector};
use num_complex::Complex64;

/// First-order density matrix `Γ(C)`.
///
/// Entry `(i, j)` is `⟨Ψ| a†_i a_j |Ψ⟩`, the complex conjugate of the
/// expansion coefficient `γ_ij` of the density kernel `Σ γ_ij φ_i(x) conj(φ_j(y))`.
#[derive(Clone, Debug)]
pub struct DensityMatrix1 {
    pub entries: CMatrix,
    /// `‖C‖²` of the input; entries scale with it.
    pub norm_sq: f64,
}

impl DensityMatrix1 {
    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq - 1.0).abs() <= tol
    }

    /// Expansion coefficient `γ_ij` of the density kernel.
    pub fn kernel_coeff(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)].conj()
    }
}

/// Second-order coefficients `γ_ijkl`, with the density kernel
/// `Σ γ_ijkl φ_i(x) φ_j(y) conj(φ_k(x')) conj(φ_l(y'))`.
#[derive(Clone, Debug)]
pub struct DensityTensor2 {
    k: usize,
    entries: Vec<Complex64>,
}

impl DensityTensor2 {
    pub fn dim(&self) -> usize {
        self.k
    }
    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        self.entries[((i * self.k + j) * self.k + k) * self.k + l]
    }
    fn add(&mut self, i: usize, j: usize, k: usize, l: usize, z: Complex64) {
        let n = self.k;
        self.entries[((i * n + j) * n + k) * n + l] += z;
    }
}

fn check_len(coeffs: &CVector, table: &ConfigTable) -> Result<()> {
    if coeffs.len() != table.len() {
        return Err(Error::ShapeMismatch(format!("expected {} coefficients, got {}", table.len(), coeffs.len())));
    }
    Ok(())
}

pub fn gamma1(coeffs: &CVector, table: &ConfigTable) -> Result<DensityMatrix1> {
    check_len(coeffs, table)?;
    let k = table.k();
    let mut gamma = CMatrix::zeros(k, k);
    for group in table.hole_groups() {
        for x in group {
            for y in group {
                gamma[(x.orbital, y.orbital)] += coeffs[x.config] * coeffs[y.config].conj() * (x.sign * y.sign);
            }
        }
    }
    Ok(DensityMatrix1 { entries: gamma.map(|z| z.conj()), norm_sq: coeffs.norm_squared() })
}

pub fn gamma2(coeffs: &CVector, table: &ConfigTable) -> Result<DensityTensor2> {
    check_len(coeffs, table)?;
    let k = table.k();
    let mut out = DensityTensor2 { k, entries: vec![c(0.0, 0.0); k * k * k * k] };
    for group in table.pair_groups() {
        for x in group {
            for y in group {
                let z = coeffs[x.config] * coeffs[y.config].conj() * (0.5 * x.sign * y.sign);
                out.add(x.first, x.second, y.first, y.second, z);
            }
        }
    }
    Ok(out)
}

/// Occupation numbers in descending order and the unitary `V` with `V* Γ V` diagonal.
pub fn occupations(gamma: &CMatrix) -> (Vec<f64>, CMatrix) {
    let (mut vals, vecs) = eigh(gamma);
    let k = vals.len();
    vals.reverse();
    let mut v = CMatrix::zeros(k, k);
    for j in 0..k {
        v.set_column(j, &vecs.column(k - 1 - j));
    }
    (vals, v)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegularizationMode {
    /// `Γ + εI`
    #[default]
    Shift,
    /// `Γ + ε exp(-Γ/ε)`
    Exponential,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regularization {
    pub epsilon: f64,
    #[serde(default)]
    pub mode: RegularizationMode,
}

pub fn regularize(gamma: &CMatrix, epsilon: f64, mode: RegularizationMode) -> Result<CMatrix> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidRegularization(epsilon));
    }
    Ok(match mode {
        RegularizationMode::Shift => gamma + CMatrix::identity(gamma.nrows(), gamma.ncols()) * c(epsilon, 0.0),
        RegularizationMode::Exponential => hermitian_fn(gamma, |x| x + epsilon * (-x / epsilon).exp()),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RankDiagnostics {
    pub mu: f64,
    /// `‖Γ^{-1}‖_F`, infinite when singular.
    pub inv_frobenius: f64,
    /// Occupations, descending.
    pub occupations: Vec<f64>,
    pub singular: bool,
}

pub fn rank_diagnostics(gamma: &CMatrix, tol: f64) -> RankDiagnostics {
    let (occ, _) = occupations(gamma);
    let mu = occ.last().copied().unwrap_or(0.0);
    let singular = mu < tol;
    let inv_frobenius = if mu > 0.0 { occ.iter().map(|g| 1.0 / (g * g)).sum::<f64>().sqrt() } else { f64::INFINITY };
    RankDiagnostics { mu, inv_frobenius, occupations: occ, singular }
}

/// Correlation entropy `-Σ [γ log γ + (1-γ) log(1-γ)]`.
pub fn nonfreeness(occupations: &[f64]) -> Result<f64> {
    const TOL: f64 = 1e-9;
    let mut total = 0.0;
    for &g in occupations {
        if !(-TOL..=1.0 + TOL).contains(&g) {
            return Err(Error::OccupationOutOfRange(g));
        }
        let g = g.clamp(0.0, 1.0);
        total -= xlogx(g) + xlogx(1.0 - g);
    }
    Ok(total.max(0.0))
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

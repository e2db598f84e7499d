//! Interaction building blocks: pairings, the configuration interaction
//! matrix `𝕂[Φ]`, mean-field potentials `𝕎[C,Φ]`, the energy and the Fock operator.

use crate::algebra::{one_body_config_matrix, ConfigTable};
use crate::density::{gamma1, gamma2, DensityTensor2};
use crate::error::{Error, Result};
use crate::grid::{convolve, Grid, OneBodyOperator, PairPotential};
use crate::linalg::{c, CMatrix, CVector};
use num_complex::Complex64;
use rayon::prelude::*;

/// `D_v(f, g) = h² Σ_mn v(|x_m - x_n|) f(x_m) conj(g(x_n))`.
pub fn pair_d(grid: &Grid, v: &PairPotential, f: &CVector, g: &CVector) -> Result<Complex64> {
    let l = grid.len();
    if f.len() != l || g.len() != l {
        return Err(Error::ShapeMismatch("pairing arguments must live on the grid".into()));
    }
    let h = grid.spacing();
    let mut acc = c(0.0, 0.0);
    for m in 0..l {
        let mut inner = c(0.0, 0.0);
        for n in 0..l {
            inner += g[n].conj() * v.at(m, n);
        }
        acc += f[m] * inner;
    }
    Ok(acc * (h * h))
}

/// Below this many multiply-adds the convolutions run on the calling thread.
const PARALLEL_WORK: usize = 1 << 16;

/// Pair-density convolutions `(φ_i conj(φ_k)) ⋆ v` and the pairings built from them.
pub struct PairIntegrals {
    k: usize,
    /// `conv[i*K + k] = (φ_i conj(φ_k)) ⋆ v`
    conv: Vec<CVector>,
    /// `table[((i*K + k)*K + j)*K + l] = D_v(φ_i conj(φ_k), conj(φ_j) φ_l)`
    table: Vec<Complex64>,
}

impl PairIntegrals {
    pub fn new(grid: &Grid, v: &PairPotential, orbitals: &CMatrix) -> Self {
        let k = orbitals.ncols();
        let l = orbitals.nrows();
        let h = grid.spacing();
        let mut dens = Vec::with_capacity(k * k);
        for i in 0..k {
            for kk in 0..k {
                dens.push(CVector::from_fn(l, |m, _| orbitals[(m, i)] * orbitals[(m, kk)].conj()));
            }
        }
        // each entry is computed serially, so results do not depend on the thread count
        let parallel = k * k * l * l >= PARALLEL_WORK;
        let conv: Vec<CVector> = if parallel {
            dens.par_iter().map(|d| convolve(grid, v, d)).collect()
        } else {
            dens.iter().map(|d| convolve(grid, v, d)).collect()
        };
        let row = |ik: usize| -> Vec<Complex64> {
            conv.iter().map(|cv| dens[ik].iter().zip(cv.iter()).map(|(a, b)| a * b).sum::<Complex64>() * h).collect()
        };
        let table: Vec<Complex64> =
            if parallel { (0..k * k).into_par_iter().flat_map_iter(row).collect() } else { (0..k * k).flat_map(row).collect() };
        PairIntegrals { k, conv, table }
    }

    pub fn conv(&self, i: usize, k: usize) -> &CVector {
        &self.conv[i * self.k + k]
    }

    /// `D_v(φ_i conj(φ_k), conj(φ_j) φ_l)`.
    #[inline]
    pub fn pairing(&self, i: usize, k: usize, j: usize, l: usize) -> Complex64 {
        self.table[((i * self.k + k) * self.k + j) * self.k + l]
    }
}

/// `𝕂[Φ]` with entries `⟨Φ_σ | V Φ_τ⟩`.
///
/// The sum runs over ordered index pairs on both sides, hence the factor ½.
pub fn k_matrix(table: &ConfigTable, ints: &PairIntegrals) -> CMatrix {
    let r = table.len();
    let mut out = CMatrix::zeros(r, r);
    for group in table.pair_groups() {
        for x in group {
            for y in group {
                let d = ints.pairing(y.first, x.first, y.second, x.second);
                out[(x.config, y.config)] += d * (0.5 * x.sign * y.sign);
            }
        }
    }
    out
}

/// `𝕎_ij = 2 Σ_kl γ_jkil (φ_k conj(φ_l)) ⋆ v`, stored row-major as `K²` potentials.
pub fn w_matrix(gamma: &DensityTensor2, ints: &PairIntegrals, l: usize) -> Vec<CVector> {
    let k = gamma.dim();
    let mut out = vec![CVector::zeros(l); k * k];
    for i in 0..k {
        for j in 0..k {
            let w = &mut out[i * k + j];
            for kk in 0..k {
                for ll in 0..k {
                    let g = gamma.get(j, kk, i, ll);
                    if g != c(0.0, 0.0) {
                        w.axpy(g * 2.0, ints.conv(kk, ll), c(1.0, 0.0));
                    }
                }
            }
        }
    }
    out
}

/// `(𝕎Φ)_i = Σ_j 𝕎_ij φ_j` pointwise.
pub fn apply_w(w: &[CVector], orbitals: &CMatrix) -> CMatrix {
    let k = orbitals.ncols();
    let l = orbitals.nrows();
    CMatrix::from_fn(l, k, |m, i| (0..k).map(|j| w[i * k + j][m] * orbitals[(m, j)]).sum())
}

/// `(I - P_Φ) f` for a single vector.
pub fn project_out(grid: &Grid, orbitals: &CMatrix, f: &CVector) -> CVector {
    let overlaps = orbitals.adjoint() * f * c(grid.spacing(), 0.0);
    f - orbitals * overlaps
}

/// `(I - P_Φ)` applied to every column.
pub fn project_out_columns(grid: &Grid, orbitals: &CMatrix, x: &CMatrix) -> CMatrix {
    let overlaps = orbitals.adjoint() * x * c(grid.spacing(), 0.0);
    x - orbitals * overlaps
}

/// `h_pq = ⟨φ_p | H φ_q⟩` in physics (bra-antilinear) convention.
pub fn orbital_matrix(grid: &Grid, orbitals: &CMatrix, h_phi: &CMatrix) -> CMatrix {
    orbitals.adjoint() * h_phi * c(grid.spacing(), 0.0)
}

/// Everything the equations of motion need at one `(C, Φ)`.
pub struct MeanFieldData {
    pub kmat: CMatrix,
    pub w: Vec<CVector>,
}

pub fn mean_field(grid: &Grid, v: &PairPotential, coeffs: &CVector, orbitals: &CMatrix, table: &ConfigTable) -> Result<MeanFieldData> {
    let ints = PairIntegrals::new(grid, v, orbitals);
    let g2 = gamma2(coeffs, table)?;
    Ok(MeanFieldData { kmat: k_matrix(table, &ints), w: w_matrix(&g2, &ints, grid.len()) })
}

/// Galerkin matrix of `H_N` on the determinants of `Φ`.
pub fn config_hamiltonian(grid: &Grid, onebody: &CMatrix, orbitals: &CMatrix, kmat: &CMatrix, table: &ConfigTable) -> CMatrix {
    let h = orbital_matrix(grid, orbitals, &(onebody * orbitals));
    one_body_config_matrix(&h, table) + kmat
}

/// Both forms of the energy: compact `Σ Γ_ij ⟨Hφ_j, φ_i⟩ + ½(𝕎Φ, Φ)` and
/// expanded `Σ γ_ij ⟨Hφ_i, φ_j⟩ + Σ γ_ijkl D_v(φ_i conj(φ_k), conj(φ_j) φ_l)`.
#[derive(Clone, Copy, Debug)]
pub struct EnergyForms {
    pub compact: Complex64,
    pub expanded: Complex64,
    pub interaction: f64,
}

pub fn energy_forms(
    grid: &Grid,
    onebody: &CMatrix,
    v: &PairPotential,
    coeffs: &CVector,
    orbitals: &CMatrix,
    table: &ConfigTable,
) -> Result<EnergyForms> {
    let k = orbitals.ncols();
    let ints = PairIntegrals::new(grid, v, orbitals);
    let g1 = gamma1(coeffs, table)?;
    let g2 = gamma2(coeffs, table)?;
    let hmat = orbital_matrix(grid, orbitals, &(onebody * orbitals));
    let w = w_matrix(&g2, &ints, grid.len());
    let w_phi = apply_w(&w, orbitals);

    let mut one_compact = c(0.0, 0.0);
    let mut one_expanded = c(0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            one_compact += g1.entries[(i, j)] * hmat[(i, j)];
            one_expanded += g1.kernel_coeff(i, j) * hmat[(j, i)];
        }
    }
    let quad = (0..k).map(|i| grid.inner(&w_phi.column(i).into_owned(), &orbitals.column(i).into_owned())).sum::<Complex64>();
    let mut two = c(0.0, 0.0);
    for i in 0..k {
        for j in 0..k {
            for kk in 0..k {
                for l in 0..k {
                    two += g2.get(i, j, kk, l) * ints.pairing(i, kk, j, l);
                }
            }
        }
    }
    Ok(EnergyForms { compact: one_compact + quad * 0.5, expanded: one_expanded + two, interaction: two.re })
}

/// Real part of the compact energy.
pub fn energy(
    grid: &Grid,
    onebody: &OneBodyOperator,
    t: f64,
    v: &PairPotential,
    coeffs: &CVector,
    orbitals: &CMatrix,
    table: &ConfigTable,
) -> Result<f64> {
    Ok(energy_forms(grid, &onebody.matrix_at(t), v, coeffs, orbitals, table)?.compact.re)
}

/// Hartree-Fock mean-field operator of a set of occupied orbitals.
pub struct FockOperator {
    direct: CVector,
    occupied: CMatrix,
    grid: Grid,
    v: PairPotential,
}

pub fn fock_operator(grid: &Grid, v: &PairPotential, occupied: &CMatrix) -> FockOperator {
    let l = occupied.nrows();
    let density = CVector::from_fn(l, |m, _| (0..occupied.ncols()).map(|j| c(occupied[(m, j)].norm_sqr(), 0.0)).sum());
    FockOperator { direct: convolve(grid, v, &density), occupied: occupied.clone(), grid: grid.clone(), v: v.clone() }
}

impl FockOperator {
    /// `F w = (v ⋆ Σ|φ_j|²) w - Σ_j ((conj(φ_j) w) ⋆ v) φ_j`
    pub fn apply(&self, w: &CVector) -> CVector {
        let mut out = self.direct.component_mul(w);
        for j in 0..self.occupied.ncols() {
            let phi = self.occupied.column(j);
            let ex = CVector::from_fn(w.len(), |m, _| phi[m].conj() * w[m]);
            let pot = convolve(&self.grid, &self.v, &ex);
            out -= pot.component_mul(&phi.into_owned());
        }
        out
    }

    pub fn apply_columns(&self, x: &CMatrix) -> CMatrix {
        let mut out = x.clone();
        for j in 0..x.ncols() {
            out.set_column(j, &self.apply(&x.column(j).into_owned()));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::enumerate_configs;
    use crate::grid::{build_grid, Boundary};
    use crate::random::{gaussian_matrix, random_coeffs, random_orbitals, seeded};

    fn setup(l: usize) -> (Grid, PairPotential) {
        let g = build_grid(l, 0.5, Boundary::Dirichlet).unwrap();
        let v = PairPotential::soft_coulomb(&g, 1.0, 1.0).unwrap();
        (g, v)
    }

    #[test]
    fn pairing_two_evaluation_orders() {
        let (g, v) = setup(8);
        let mut rng = seeded(1);
        let m = gaussian_matrix(8, 2, &mut rng);
        let (f, h) = (m.column(0).into_owned(), m.column(1).into_owned());
        let direct = pair_d(&g, &v, &f, &h).unwrap();
        let via_conv = g.inner(&convolve(&g, &v, &f), &h);
        assert!((direct - via_conv).norm() < 1e-13);
        let ones = PairPotential::from_fn(&g, |_| 1.0).unwrap();
        let want = f.sum() * 0.5 * (h.sum() * 0.5).conj();
        assert!((pair_d(&g, &ones, &f, &h).unwrap() - want).norm() < 1e-13);
    }

    #[test]
    fn zero_interaction_gives_zero_blocks() {
        let g = build_grid(6, 0.5, Boundary::Dirichlet).unwrap();
        let v = PairPotential::zero(&g);
        let mut rng = seeded(2);
        let phi = random_orbitals(&g, 4, &mut rng);
        let t = enumerate_configs(2, 4).unwrap();
        let mf = mean_field(&g, &v, &random_coeffs(t.len(), &mut rng), &phi, &t).unwrap();
        assert_eq!(mf.kmat.norm(), 0.0);
        assert!(mf.w.iter().all(|w| w.norm() == 0.0));
    }

    #[test]
    fn mean_field_potentials_are_hermitian() {
        let (g, v) = setup(7);
        let mut rng = seeded(3);
        let phi = random_orbitals(&g, 4, &mut rng);
        let t = enumerate_configs(2, 4).unwrap();
        let mf = mean_field(&g, &v, &random_coeffs(t.len(), &mut rng), &phi, &t).unwrap();
        assert!(crate::linalg::hermitian_defect(&mf.kmat) < 1e-12);
        for i in 0..4 {
            for j in 0..4 {
                let d = &mf.w[i * 4 + j] - mf.w[j * 4 + i].map(|z| z.conj());
                assert!(d.norm() < 1e-12);
            }
        }
    }

    #[test]
    fn projector_properties() {
        let (g, _) = setup(8);
        let mut rng = seeded(4);
        let phi = random_orbitals(&g, 3, &mut rng);
        let f = gaussian_matrix(8, 1, &mut rng).column(0).into_owned();
        let p = project_out(&g, &phi, &f);
        for i in 0..3 {
            assert!(g.inner(&p, &phi.column(i).into_owned()).norm() < 1e-12);
        }
        assert!((project_out(&g, &phi, &p) - &p).norm() < 1e-12);
        assert!(g.norm(&p) <= g.norm(&f) + 1e-14);
        assert!(project_out(&g, &phi, &phi.column(0).into_owned()).norm() < 1e-12);
    }

    #[test]
    fn fock_single_orbital_cancels() {
        let (g, v) = setup(6);
        let mut rng = seeded(5);
        let phi = random_orbitals(&g, 1, &mut rng);
        let f = fock_operator(&g, &v, &phi);
        assert!(f.apply(&phi.column(0).into_owned()).norm() < 1e-13);
    }
}

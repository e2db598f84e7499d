//! The map `(C, Φ) ↦ Ψ` into the full antisymmetric grid space, and the
//! orbital-direction derivatives of that map.
//!
//! Full wavefunctions are stored as ℓ² coefficients over grid determinants,
//! so the grid measure is folded in: an orbital enters through `√h φ`.

use crate::algebra::ConfigTable;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::linalg::{c, det, CMatrix, CVector};
use num_complex::Complex64;

/// Amplitudes over the lexicographic grid-determinant basis of `(N, L)`.
#[derive(Clone, Debug, PartialEq)]
pub struct FullWavefunction {
    pub amplitudes: CVector,
    pub n: usize,
    pub l: usize,
}

impl FullWavefunction {
    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn dot(&self, other: &FullWavefunction) -> Result<Complex64> {
        if self.n != other.n || self.l != other.l {
            return Err(Error::BasisMismatch);
        }
        Ok(other.amplitudes.dotc(&self.amplitudes))
    }
}

/// `(N-1)`-particle amplitudes indexed by the hole groups of the grid table.
pub type HoleAmplitudes = CVector;

fn check_grid_table(grid: &Grid, grid_table: &ConfigTable) -> Result<()> {
    if grid_table.k() != grid.len() {
        return Err(Error::ShapeMismatch(format!("grid table spans {} sites, grid has {}", grid_table.k(), grid.len())));
    }
    Ok(())
}

/// `Ψ = Σ_σ c_σ Φ_σ` expanded over grid determinants.
pub fn expand_full(
    grid: &Grid,
    coeffs: &CVector,
    orbitals: &CMatrix,
    table: &ConfigTable,
    grid_table: &ConfigTable,
) -> Result<FullWavefunction> {
    check_grid_table(grid, grid_table)?;
    let (n, l) = (table.n(), grid.len());
    if grid_table.n() != n {
        return Err(Error::ShapeMismatch(format!("particle numbers differ: {} vs {}", n, grid_table.n())));
    }
    if orbitals.nrows() != l || orbitals.ncols() != table.k() || coeffs.len() != table.len() {
        return Err(Error::ShapeMismatch("orbitals or coefficients do not match the tables".into()));
    }
    let scaled = orbitals * c(grid.spacing().sqrt(), 0.0);
    let mut amps = CVector::zeros(grid_table.len());
    let mut minor = CMatrix::zeros(n, n);
    for (li, lam) in grid_table.configs().iter().enumerate() {
        let mut acc = c(0.0, 0.0);
        for (si, sig) in table.configs().iter().enumerate() {
            if coeffs[si] == c(0.0, 0.0) {
                continue;
            }
            for (a, &m) in lam.iter().enumerate() {
                for (b, &p) in sig.iter().enumerate() {
                    minor[(a, b)] = scaled[(m, p)];
                }
            }
            acc += coeffs[si] * det(&minor);
        }
        amps[li] = acc;
    }
    Ok(FullWavefunction { amplitudes: amps, n, l })
}

/// `det(⟨φ_i, ξ_j⟩)`, the overlap of two Slater determinants.
pub fn slater_overlap(grid: &Grid, phi: &CMatrix, xi: &CMatrix) -> Result<Complex64> {
    if phi.shape() != xi.shape() || phi.nrows() != grid.len() {
        return Err(Error::ShapeMismatch(format!("{:?} vs {:?}", phi.shape(), xi.shape())));
    }
    let gram = xi.adjoint() * phi * c(grid.spacing(), 0.0);
    Ok(det(&gram.transpose()))
}

/// `a(φ_k) Ψ`, the single-hole function of orbital `k`.
pub fn single_hole(grid: &Grid, orbitals: &CMatrix, k: usize, psi: &FullWavefunction, grid_table: &ConfigTable) -> Result<HoleAmplitudes> {
    if k >= orbitals.ncols() {
        return Err(Error::InvalidDimension(format!("orbital {k} out of range")));
    }
    let u: CVector = orbitals.column(k) * c(grid.spacing().sqrt(), 0.0);
    annihilate_vector(&u, psi, grid_table)
}

/// `a(u) Ψ` for an ℓ² one-body vector `u`.
pub fn annihilate_vector(u: &CVector, psi: &FullWavefunction, grid_table: &ConfigTable) -> Result<HoleAmplitudes> {
    if psi.amplitudes.len() != grid_table.len() || u.len() != grid_table.k() {
        return Err(Error::ShapeMismatch("wavefunction does not match the grid table".into()));
    }
    let groups = grid_table.hole_groups();
    let mut out = CVector::zeros(groups.len());
    for (g, group) in groups.iter().enumerate() {
        for x in group {
            // a_m on a determinant carries (-1)^{pos - 1}
            out[g] -= u[x.orbital].conj() * psi.amplitudes[x.config] * x.sign;
        }
    }
    Ok(out)
}

/// `a†(u) χ` for an ℓ² one-body vector `u` and hole amplitudes `χ`.
pub fn create_vector(u: &CVector, hole: &HoleAmplitudes, grid_table: &ConfigTable) -> FullWavefunction {
    let mut amps = CVector::zeros(grid_table.len());
    for (g, group) in grid_table.hole_groups().iter().enumerate() {
        for x in group {
            amps[x.config] -= u[x.orbital] * hole[g] * x.sign;
        }
    }
    FullWavefunction { amplitudes: amps, n: grid_table.n(), l: grid_table.k() }
}

/// `∂Ψ/∂φ_k [ζ]`: the state with orbital `k` replaced by `ζ` (grid function values).
pub fn dphi_apply(
    grid: &Grid,
    orbitals: &CMatrix,
    k: usize,
    zeta: &CVector,
    psi: &FullWavefunction,
    grid_table: &ConfigTable,
) -> Result<FullWavefunction> {
    let hole = single_hole(grid, orbitals, k, psi, grid_table)?;
    Ok(create_vector(&(zeta * c(grid.spacing().sqrt(), 0.0)), &hole, grid_table))
}

/// `(∂Ψ/∂φ_k)* [Ξ]` as grid function values: the `f` with
/// `grid.inner(ζ, f) = ⟨Ξ | ∂Ψ/∂φ_k[ζ]⟩` for every `ζ`.
pub fn dphi_adjoint(
    grid: &Grid,
    orbitals: &CMatrix,
    k: usize,
    psi: &FullWavefunction,
    xi: &FullWavefunction,
    grid_table: &ConfigTable,
) -> Result<CVector> {
    if xi.amplitudes.len() != grid_table.len() {
        return Err(Error::ShapeMismatch("test state does not match the grid table".into()));
    }
    let hole = single_hole(grid, orbitals, k, psi, grid_table)?;
    Ok(adjoint_from_hole(grid, &hole, xi, grid_table))
}

/// `f_m = ⟨χ | a_m Ξ⟩ / √h`.
pub(crate) fn adjoint_from_hole(grid: &Grid, hole: &HoleAmplitudes, xi: &FullWavefunction, grid_table: &ConfigTable) -> CVector {
    let mut f = CVector::zeros(grid_table.k());
    for (g, group) in grid_table.hole_groups().iter().enumerate() {
        let hc = hole[g].conj();
        for x in group {
            f[x.orbital] -= hc * xi.amplitudes[x.config] * x.sign;
        }
    }
    f / c(grid.spacing().sqrt(), 0.0)
}

/// Reduced density kernel of order `n` in ℓ² units.
///
/// Order 1 is an `L×L` matrix with trace `N`. Order 2 is indexed by ordered
/// site pairs `(a, b) ↦ a·L + b` and has trace `N(N-1)/2`.
pub fn reduced_density(psi: &FullWavefunction, n: usize, grid_table: &ConfigTable) -> Result<CMatrix> {
    if psi.amplitudes.len() != grid_table.len() {
        return Err(Error::ShapeMismatch("wavefunction does not match the grid table".into()));
    }
    let l = grid_table.k();
    let amp = &psi.amplitudes;
    match n {
        1 => {
            let mut rho = CMatrix::zeros(l, l);
            for group in grid_table.hole_groups() {
                for x in group {
                    for y in group {
                        rho[(x.orbital, y.orbital)] += amp[x.config] * amp[y.config].conj() * (x.sign * y.sign);
                    }
                }
            }
            Ok(rho)
        }
        2 => {
            let mut rho = CMatrix::zeros(l * l, l * l);
            for group in grid_table.pair_groups() {
                for x in group {
                    for y in group {
                        rho[(x.first * l + x.second, y.first * l + y.second)] +=
                            amp[x.config] * amp[y.config].conj() * (0.5 * x.sign * y.sign);
                    }
                }
            }
            Ok(rho)
        }
        other => Err(Error::UnsupportedOrder(other)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::enumerate_configs;
    use crate::grid::{build_grid, Boundary};
    use crate::random::{random_coeffs, random_orbitals, seeded};

    #[test]
    fn one_particle_expansion_is_weighted_sum() {
        let g = build_grid(5, 0.4, Boundary::Dirichlet).unwrap();
        let mut rng = seeded(2);
        let phi = random_orbitals(&g, 3, &mut rng);
        let t = enumerate_configs(1, 3).unwrap();
        let gt = enumerate_configs(1, 5).unwrap();
        let coeffs = random_coeffs(3, &mut rng);
        let psi = expand_full(&g, &coeffs, &phi, &t, &gt).unwrap();
        let want = &phi * &coeffs * c(0.4f64.sqrt(), 0.0);
        assert!((psi.amplitudes - want).norm() < 1e-14);
    }

    #[test]
    fn two_particle_determinant_matches_tabulation() {
        let g = build_grid(4, 0.5, Boundary::Dirichlet).unwrap();
        let mut rng = seeded(4);
        let phi = random_orbitals(&g, 2, &mut rng);
        let t = enumerate_configs(2, 2).unwrap();
        let gt = enumerate_configs(2, 4).unwrap();
        let one = CVector::from_element(1, c(1.0, 0.0));
        let psi = expand_full(&g, &one, &phi, &t, &gt).unwrap();
        let s2 = 2f64.sqrt();
        for (li, lam) in gt.configs().iter().enumerate() {
            let (x, y) = (lam[0], lam[1]);
            let value = (phi[(x, 0)] * phi[(y, 1)] - phi[(y, 0)] * phi[(x, 1)]) / s2;
            assert!((psi.amplitudes[li] - value * (s2 * 0.5)).norm() < 1e-14);
        }
        assert!((psi.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overlap_cases() {
        let g = build_grid(6, 0.3, Boundary::Dirichlet).unwrap();
        let mut rng = seeded(9);
        let phi = random_orbitals(&g, 3, &mut rng);
        assert!((slater_overlap(&g, &phi, &phi).unwrap() - c(1.0, 0.0)).norm() < 1e-12);
        let a = phi.columns(0, 2).into_owned();
        let mut b = a.clone();
        b.set_column(1, &phi.column(2));
        assert!(slater_overlap(&g, &a, &b).unwrap().norm() < 1e-12);
        let one = phi.columns(0, 1).into_owned();
        let two = phi.columns(1, 1).into_owned() + &one;
        let direct = g.inner(&one.column(0).into_owned(), &two.column(0).into_owned());
        assert!((slater_overlap(&g, &one, &two).unwrap() - direct).norm() < 1e-14);
        assert!(slater_overlap(&g, &phi, &a).is_err());
    }

    #[test]
    fn hole_of_second_orbital_is_minus_first() {
        let g = build_grid(5, 0.5, Boundary::Dirichlet).unwrap();
        let mut rng = seeded(6);
        let phi = random_orbitals(&g, 2, &mut rng);
        let t = enumerate_configs(2, 2).unwrap();
        let gt = enumerate_configs(2, 5).unwrap();
        let psi = expand_full(&g, &CVector::from_element(1, c(1.0, 0.0)), &phi, &t, &gt).unwrap();
        let hole = single_hole(&g, &phi, 1, &psi, &gt).unwrap();
        // one-particle hole groups are ordered by site, so the hole vector is an ℓ² orbital
        let want: CVector = phi.column(0) * c(-(0.5f64.sqrt()), 0.0);
        assert!((hole - want).norm() < 1e-13);
    }

    #[test]
    fn reduced_density_order_check() {
        let gt = enumerate_configs(2, 4).unwrap();
        let psi = FullWavefunction { amplitudes: CVector::zeros(6), n: 2, l: 4 };
        assert!(matches!(reduced_density(&psi, 3, &gt), Err(Error::UnsupportedOrder(3))));
    }
}

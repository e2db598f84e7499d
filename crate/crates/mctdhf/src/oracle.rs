//! Exact N-body dynamics on the full antisymmetric grid space.

use crate::algebra::{enumerate_configs, one_body_config_matrix, ConfigTable};
use crate::ansatz::FullWavefunction;
use crate::error::{Error, Result};
use crate::grid::{Grid, PairPotential};
use crate::linalg::{c, eigh, propagator_from_eig, CMatrix};

pub const DEFAULT_DIMENSION_CAP: usize = 5000;

/// `H_N` over the lexicographic grid-determinant basis.
#[derive(Clone, Debug)]
pub struct FullHamiltonian {
    pub matrix: CMatrix,
    pub table: ConfigTable,
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Builds `Σ_i H(x_i) + Σ_{i<j} v(|x_i - x_j|)` from the one-body matrix `onebody`.
pub fn build_full_hamiltonian(grid: &Grid, onebody: &CMatrix, v: &PairPotential, n: usize, cap: usize) -> Result<FullHamiltonian> {
    let l = grid.len();
    let dim = binomial(l, n);
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    if onebody.nrows() != l {
        return Err(Error::ShapeMismatch(format!("one-body matrix has {} rows for {l} sites", onebody.nrows())));
    }
    let table = enumerate_configs(n, l)?;
    let mut matrix = one_body_config_matrix(onebody, &table);
    for (li, lam) in table.configs().iter().enumerate() {
        let mut e = 0.0;
        for a in 0..lam.len() {
            for b in a + 1..lam.len() {
                e += v.at(lam[a], lam[b]);
            }
        }
        matrix[(li, li)] += c(e, 0.0);
    }
    Ok(FullHamiltonian { matrix, table })
}

/// Spectral decomposition of a full Hamiltonian, reusable across times.
pub struct ExactPropagator {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

impl ExactPropagator {
    pub fn new(hfull: &FullHamiltonian) -> Self {
        let (eigenvalues, eigenvectors) = eigh(&hfull.matrix);
        ExactPropagator { eigenvalues, eigenvectors }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn propagate(&self, psi: &FullWavefunction, t: f64) -> FullWavefunction {
        let v = &self.eigenvectors;
        let mut coords = v.adjoint() * &psi.amplitudes;
        for (z, &e) in coords.iter_mut().zip(self.eigenvalues.iter()) {
            *z *= num_complex::Complex64::from_polar(1.0, -e * t);
        }
        FullWavefunction { amplitudes: v * coords, n: psi.n, l: psi.l }
    }
}

/// `exp(-iTH) Ψ0` by full eigendecomposition.
pub fn propagate_exact(psi: &FullWavefunction, hfull: &FullHamiltonian, t: f64) -> Result<FullWavefunction> {
    if psi.amplitudes.len() != hfull.table.len() {
        return Err(Error::BasisMismatch);
    }
    Ok(ExactPropagator::new(hfull).propagate(psi, t))
}

/// Time-dependent reference: exponential midpoint steps of `H(t)`.
pub fn propagate_piecewise(
    psi: &FullWavefunction,
    mut hfull_at: impl FnMut(f64) -> Result<FullHamiltonian>,
    t_final: f64,
    dt: f64,
) -> Result<FullWavefunction> {
    let steps = (t_final / dt).round().max(0.0) as usize;
    let mut amps = psi.amplitudes.clone();
    for s in 0..steps {
        let mid = (s as f64 + 0.5) * dt;
        let hf = hfull_at(mid)?;
        let (vals, vecs) = eigh(&hf.matrix);
        amps = propagator_from_eig(&vals, &vecs, dt) * amps;
    }
    Ok(FullWavefunction { amplitudes: amps, n: psi.n, l: psi.l })
}

/// `(‖Ψ_A - Ψ_B‖, |⟨Ψ_A, Ψ_B⟩|)`.
pub fn compare(a: &FullWavefunction, b: &FullWavefunction) -> Result<(f64, f64)> {
    if a.n != b.n || a.l != b.l || a.amplitudes.len() != b.amplitudes.len() {
        return Err(Error::BasisMismatch);
    }
    Ok(((&a.amplitudes - &b.amplitudes).norm(), a.dot(b)?.norm()))
}

/// `⟨H_N Ψ, Ψ⟩`.
pub fn expectation(hfull: &FullHamiltonian, psi: &FullWavefunction) -> f64 {
    psi.amplitudes.dotc(&(&hfull.matrix * &psi.amplitudes)).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_onebody, Boundary, KineticScale};
    use crate::linalg::{hermitian_defect, CVector};
    use crate::random::{gaussian_matrix, seeded};

    fn problem(l: usize) -> (Grid, CMatrix, PairPotential) {
        let g = build_grid(l, 0.6, Boundary::Dirichlet).unwrap();
        let u: Vec<f64> = g.points().iter().map(|x| 0.5 * x * x).collect();
        let h = build_onebody(&g, &u, None, KineticScale::Half).unwrap().matrix_at(0.0);
        let v = PairPotential::soft_coulomb(&g, 1.0, 1.0).unwrap();
        (g, h, v)
    }

    #[test]
    fn one_particle_is_the_one_body_matrix() {
        let (g, h, v) = problem(5);
        let hf = build_full_hamiltonian(&g, &h, &v, 1, 100).unwrap();
        assert!((hf.matrix - h).norm() < 1e-15);
    }

    #[test]
    fn free_spectrum_is_pair_sums() {
        let (g, h, _) = problem(5);
        let hf = build_full_hamiltonian(&g, &h, &PairPotential::zero(&g), 2, 100).unwrap();
        let (one, _) = eigh(&h);
        let mut sums = Vec::new();
        for a in 0..5 {
            for b in a + 1..5 {
                sums.push(one[a] + one[b]);
            }
        }
        sums.sort_by(f64::total_cmp);
        let (full, _) = eigh(&hf.matrix);
        for (x, y) in sums.iter().zip(full.iter()) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(hermitian_defect(&hf.matrix) < 1e-13);
    }

    #[test]
    fn cap_is_enforced() {
        let (g, h, v) = problem(6);
        assert!(matches!(build_full_hamiltonian(&g, &h, &v, 3, 10), Err(Error::DimensionCap { dim: 20, cap: 10 })));
    }

    #[test]
    fn antisymmetric_restriction_of_tensor_hamiltonian() {
        // Brute force on the L² product space pins the determinant sign rules.
        let l = 4;
        let (g, mut h, v) = problem(l);
        let mut rng = seeded(8);
        h += gaussian_matrix(l, l, &mut rng) * c(0.0, 0.3);
        h = (&h + h.adjoint()) * c(0.5, 0.0);
        let hf = build_full_hamiltonian(&g, &h, &v, 2, 100).unwrap();
        let id = CMatrix::identity(l, l);
        let mut tensor = h.kronecker(&id) + id.kronecker(&h);
        for a in 0..l {
            for b in 0..l {
                if a != b {
                    tensor[(a * l + b, a * l + b)] += c(v.at(a, b), 0.0);
                }
            }
        }
        let basis = CMatrix::from_fn(l * l, hf.table.len(), |row, col| {
            let cfg = hf.table.config(col);
            let (a, b) = (row / l, row % l);
            let s = std::f64::consts::FRAC_1_SQRT_2;
            if (a, b) == (cfg[0], cfg[1]) {
                c(s, 0.0)
            } else if (a, b) == (cfg[1], cfg[0]) {
                c(-s, 0.0)
            } else {
                c(0.0, 0.0)
            }
        });
        let restricted = basis.adjoint() * tensor * &basis;
        assert!((restricted - &hf.matrix).norm() < 1e-12);
    }

    #[test]
    fn propagation_is_unitary() {
        let (g, h, v) = problem(6);
        let hf = build_full_hamiltonian(&g, &h, &v, 2, 100).unwrap();
        let mut rng = seeded(1);
        let amps = crate::random::random_coeffs(hf.table.len(), &mut rng);
        let psi = FullWavefunction { amplitudes: amps, n: 2, l: 6 };
        let same = propagate_exact(&psi, &hf, 0.0).unwrap();
        assert!(compare(&psi, &same).unwrap().0 < 1e-13);
        let later = propagate_exact(&psi, &hf, 1.7).unwrap();
        assert!((later.norm() - 1.0).abs() < 1e-12);
        assert!((expectation(&hf, &later) - expectation(&hf, &psi)).abs() < 1e-11);
    }

    #[test]
    fn compare_cases() {
        let a = FullWavefunction { amplitudes: CVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0)]), n: 1, l: 2 };
        let b = FullWavefunction { amplitudes: CVector::from_vec(vec![c(0.0, 0.0), c(0.0, 1.0)]), n: 1, l: 2 };
        assert_eq!(compare(&a, &a).unwrap(), (0.0, 1.0));
        let (d, f) = compare(&a, &b).unwrap();
        assert!((d - 2f64.sqrt()).abs() < 1e-15 && f == 0.0);
        let other = FullWavefunction { amplitudes: CVector::zeros(1), n: 2, l: 2 };
        assert!(compare(&a, &other).is_err());
    }
}

//! Seeded random states for tests, examples and scenario initial data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::grid::Grid;
use crate::linalg::{c, CMatrix, CVector};
use num_complex::Complex64;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut Rng) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im)
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Unit-norm coefficient vector with Gaussian entries.
pub fn random_coeffs(r: usize, rng: &mut Rng) -> CVector {
    let v = CVector::from_fn(r, |_, _| gaussian(rng));
    let norm = v.norm();
    v / c(norm, 0.0)
}

/// Haar-distributed unitary via QR with phase-corrected diagonal.
pub fn random_unitary(k: usize, rng: &mut Rng) -> CMatrix {
    let qr = gaussian_matrix(k, k, rng).qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q.clone();
    for j in 0..k {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = u.column_mut(j);
        col *= phase;
    }
    u
}

pub fn random_hermitian(k: usize, rng: &mut Rng) -> CMatrix {
    let a = gaussian_matrix(k, k, rng);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// `K` orbitals orthonormal in the grid inner product.
pub fn random_orbitals(grid: &Grid, k: usize, rng: &mut Rng) -> CMatrix {
    let raw = gaussian_matrix(grid.len(), k, rng);
    crate::grid::lowdin_orthonormalize(grid, &raw).expect("Gaussian columns are full rank")
}

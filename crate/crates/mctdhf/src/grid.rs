//! The discrete one-body space: grid, one-body Hamiltonian, pair potential.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, eigh, CMatrix, CVector, I};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Dirichlet,
    Periodic,
}

/// Uniform 1D grid centered at the origin.
#[derive(Clone, Debug)]
pub struct Grid {
    h: f64,
    boundary: Boundary,
    points: Vec<f64>,
}

pub fn build_grid(l: usize, h: f64, boundary: Boundary) -> Result<Grid> {
    if l < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 points, got {l}")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::InvalidGrid(format!("spacing must be positive, got {h}")));
    }
    let mid = (l as f64 + 1.0) / 2.0;
    let points = (1..=l).map(|m| (m as f64 - mid) * h).collect();
    Ok(Grid { h, boundary, points })
}

impl Grid {
    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
    pub fn spacing(&self) -> f64 {
        self.h
    }
    pub fn boundary(&self) -> Boundary {
        self.boundary
    }
    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Distance between grid points `m` and `n`, wrapped for periodic grids.
    pub fn distance(&self, m: usize, n: usize) -> f64 {
        let d = m.abs_diff(n);
        let d = match self.boundary {
            Boundary::Dirichlet => d,
            Boundary::Periodic => d.min(self.len() - d),
        };
        d as f64 * self.h
    }

    /// `h Σ f conj(g)`, linear in the first argument.
    pub fn inner(&self, f: &CVector, g: &CVector) -> Complex64 {
        g.dotc(f) * self.h
    }

    pub fn norm(&self, f: &CVector) -> f64 {
        self.inner(f, f).re.max(0.0).sqrt()
    }

    /// Gram matrix `S_ij = h Σ conj(φ_i) φ_j` of the columns.
    pub fn gram(&self, orbitals: &CMatrix) -> CMatrix {
        orbitals.adjoint() * orbitals * c(self.h, 0.0)
    }

    /// Frobenius distance of the Gram matrix from the identity.
    pub fn gram_defect(&self, orbitals: &CMatrix) -> f64 {
        let k = orbitals.ncols();
        (self.gram(orbitals) - CMatrix::identity(k, k)).norm()
    }
}

/// Time profile for a laser coefficient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Waveform {
    Constant {
        value: f64,
    },
    Sine {
        amplitude: f64,
        frequency: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `amplitude · exp(-((t - center)/width)²) · sin(frequency · (t - center))`
    GaussianPulse {
        amplitude: f64,
        width: f64,
        frequency: f64,
        #[serde(default)]
        center: f64,
    },
}

impl Waveform {
    pub fn at(&self, t: f64) -> f64 {
        match *self {
            Waveform::Constant { value } => value,
            Waveform::Sine { amplitude, frequency, phase } => amplitude * (frequency * t + phase).sin(),
            Waveform::GaussianPulse { amplitude, width, frequency, center } => {
                let s = t - center;
                amplitude * (-(s / width).powi(2)).exp() * (frequency * s).sin()
            }
        }
    }
}

/// Vector potential `A(t)` and potential strength `ω(t)` of a laser-driven run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Laser {
    pub vector_potential: Waveform,
    pub potential_strength: Waveform,
}

/// Prefactor on the kinetic term: `1/2` (atomic units) or `1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KineticScale {
    #[default]
    Half,
    Full,
}

impl KineticScale {
    pub fn factor(self) -> f64 {
        match self {
            KineticScale::Half => 0.5,
            KineticScale::Full => 1.0,
        }
    }
}

/// One-body Hamiltonian on the grid, optionally time dependent.
#[derive(Clone, Debug)]
pub struct OneBodyOperator {
    neg_laplacian: CMatrix,
    gradient: CMatrix,
    potential: Vec<f64>,
    kinetic: f64,
    laser: Option<Laser>,
    static_matrix: CMatrix,
}

pub fn build_onebody(grid: &Grid, potential: &[f64], laser: Option<Laser>, scale: KineticScale) -> Result<OneBodyOperator> {
    let l = grid.len();
    if potential.len() != l {
        return Err(Error::ShapeMismatch(format!("potential has {} samples for {l} grid points", potential.len())));
    }
    if let Some(m) = potential.iter().position(|u| !u.is_finite()) {
        return Err(Error::NonFinitePotential(m));
    }
    let h = grid.spacing();
    let mut neg_laplacian = CMatrix::zeros(l, l);
    let mut gradient = CMatrix::zeros(l, l);
    for m in 0..l {
        neg_laplacian[(m, m)] += c(2.0 / (h * h), 0.0);
        for (nb, dir) in [(m.checked_sub(1), -1.0), ((m + 1 < l).then_some(m + 1), 1.0)] {
            let nb = match (nb, grid.boundary()) {
                (Some(n), _) => n,
                (None, Boundary::Periodic) => {
                    if dir < 0.0 {
                        l - 1
                    } else {
                        0
                    }
                }
                (None, Boundary::Dirichlet) => continue,
            };
            neg_laplacian[(m, nb)] -= c(1.0 / (h * h), 0.0);
            gradient[(m, nb)] += c(dir / (2.0 * h), 0.0);
        }
    }
    let kinetic = scale.factor();
    let static_matrix = &neg_laplacian * c(kinetic, 0.0) + diag(potential);
    Ok(OneBodyOperator { neg_laplacian, gradient, potential: potential.to_vec(), kinetic, laser, static_matrix })
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(values.len(), values.iter().map(|&u| c(u, 0.0))))
}

impl OneBodyOperator {
    pub fn is_time_dependent(&self) -> bool {
        self.laser.is_some()
    }

    pub fn laser(&self) -> Option<&Laser> {
        self.laser.as_ref()
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }

    /// Matrix at time `t`: `s(-Δ + 2A i∂ + A²) + ω diag(U)` in laser mode.
    pub fn matrix_at(&self, t: f64) -> CMatrix {
        match &self.laser {
            None => self.static_matrix.clone(),
            Some(laser) => {
                let a = laser.vector_potential.at(t);
                let w = laser.potential_strength.at(t);
                let l = self.potential.len();
                let scaled_u: Vec<f64> = self.potential.iter().map(|u| w * u).collect();
                (&self.neg_laplacian + &self.gradient * (I * (2.0 * a)) + CMatrix::identity(l, l) * c(a * a, 0.0)) * c(self.kinetic, 0.0)
                    + diag(&scaled_u)
            }
        }
    }

    /// Matrix of the static (laser-free) Hamiltonian.
    pub fn static_matrix(&self) -> &CMatrix {
        &self.static_matrix
    }

    /// Kinetic part alone, `s(-Δ)`.
    pub fn kinetic_matrix(&self) -> CMatrix {
        &self.neg_laplacian * c(self.kinetic, 0.0)
    }

    /// Lowest eigenpairs of the static matrix.
    pub fn spectrum(&self) -> (Vec<f64>, CMatrix) {
        eigh(&self.static_matrix)
    }
}

/// Real pair interaction sampled on grid separations.
#[derive(Clone, Debug)]
pub struct PairPotential {
    interaction: DMatrix<f64>,
    nonneg: bool,
}

impl PairPotential {
    /// Samples `v(|x_m - x_n|)` for every grid pair.
    pub fn from_fn(grid: &Grid, v: impl Fn(f64) -> f64) -> Result<Self> {
        let l = grid.len();
        let interaction = DMatrix::from_fn(l, l, |m, n| v(grid.distance(m, n)));
        if let Some(bad) = interaction.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinitePotential(bad % l));
        }
        let nonneg = interaction.iter().all(|&x| x >= 0.0);
        Ok(PairPotential { interaction, nonneg })
    }

    /// Tabulated values indexed by integer grid separation (wrapped on periodic grids).
    pub fn from_samples(grid: &Grid, samples: &[f64]) -> Result<Self> {
        let h = grid.spacing();
        let needed = (0..grid.len()).map(|n| (grid.distance(0, n) / h).round() as usize).max().unwrap_or(0);
        if samples.len() <= needed {
            return Err(Error::ShapeMismatch(format!("need {} pair samples, got {}", needed + 1, samples.len())));
        }
        Self::from_fn(grid, |d| samples[(d / h).round() as usize])
    }

    /// Softened Coulomb repulsion `z / sqrt(d² + a²)`.
    pub fn soft_coulomb(grid: &Grid, strength: f64, softening: f64) -> Result<Self> {
        Self::from_fn(grid, |d| strength / (d * d + softening * softening).sqrt())
    }

    pub fn zero(grid: &Grid) -> Self {
        Self::from_fn(grid, |_| 0.0).expect("zero is finite")
    }

    pub fn is_nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn is_zero(&self) -> bool {
        self.interaction.iter().all(|&x| x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.interaction.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Value at grid pair `(m, n)`.
    pub fn at(&self, m: usize, n: usize) -> f64 {
        self.interaction[(m, n)]
    }

    pub fn len(&self) -> usize {
        self.interaction.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// `(f ⋆ v)(x_m) = h Σ_n v(|x_m - x_n|) f(x_n)`.
pub fn convolve_pair(grid: &Grid, v: &PairPotential, f: &CVector) -> Result<CVector> {
    let l = grid.len();
    if f.len() != l || v.len() != l {
        return Err(Error::ShapeMismatch(format!("convolution of length {} on {l} points", f.len())));
    }
    Ok(convolve(grid, v, f))
}

pub(crate) fn convolve(grid: &Grid, v: &PairPotential, f: &CVector) -> CVector {
    let l = f.len();
    let h = grid.spacing();
    CVector::from_fn(l, |m, _| {
        let mut acc = c(0.0, 0.0);
        for n in 0..l {
            acc += f[n] * v.interaction[(m, n)];
        }
        acc * h
    })
}

/// Symmetric orthonormalization `Φ S^{-1/2}`.
pub fn lowdin_orthonormalize(grid: &Grid, orbitals: &CMatrix) -> Result<CMatrix> {
    if orbitals.nrows() != grid.len() {
        return Err(Error::ShapeMismatch(format!("{} rows for {} grid points", orbitals.nrows(), grid.len())));
    }
    let (vals, vecs) = eigh(&grid.gram(orbitals));
    let top = vals.last().copied().unwrap_or(0.0);
    let low = vals.first().copied().unwrap_or(0.0);
    if !(low > 1e-12 * top.max(1.0)) {
        return Err(Error::RankDeficient(low));
    }
    let inv_sqrt = CVector::from_iterator(vals.len(), vals.iter().map(|&x| c(1.0 / x.sqrt(), 0.0)));
    Ok(orbitals * (&vecs * CMatrix::from_diagonal(&inv_sqrt) * vecs.adjoint()))
}

//! Versioned TOML scenario files.
//!
//! ```toml
//! version = 1
//! particles = 2
//! orbitals = 4
//! seed = 7
//! gauge = "onebody"
//!
//! [grid]
//! points = 16
//! spacing = 0.5
//! boundary = "dirichlet"
//!
//! [potential]
//! kind = "harmonic"
//! omega = 1.0
//!
//! [pair]
//! kind = "soft-coulomb"
//! strength = 1.0
//! softening = 1.0
//!
//! [initial]
//! kind = "random"
//!
//! [integrator]
//! dt = 0.005
//! t_final = 1.0
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::algebra::is_admissible;
use crate::density::Regularization;
use crate::error::{Error, Result};
use crate::grid::{build_grid, build_onebody, Boundary, Grid, KineticScale, Laser, PairPotential};
use crate::linalg::{c, eigh, CVector};
use crate::propagation::{GaugeMode, IntegratorOptions, McState, Scheme, System};
use crate::random::{random_coeffs, random_unitary, seeded};
use crate::stationary::MinimizeOptions;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub points: usize,
    pub spacing: f64,
    #[serde(default = "default_boundary")]
    pub boundary: Boundary,
    #[serde(default)]
    pub kinetic: KineticScale,
}

fn default_boundary() -> Boundary {
    Boundary::Dirichlet
}

/// External potential `U(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    /// `½ ω² x²`
    Harmonic {
        omega: f64,
    },
    /// `-charge / sqrt((x - center)² + softening²)`
    SoftCoulombWell {
        charge: f64,
        softening: f64,
        #[serde(default)]
        center: f64,
    },
    /// One value per grid point.
    Tabulated {
        values: Vec<f64>,
    },
}

/// Pair interaction `v(|x - y|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum PairSpec {
    Zero,
    /// `strength / sqrt(d² + softening²)`
    SoftCoulomb {
        strength: f64,
        softening: f64,
    },
    /// Values at integer multiples of the grid spacing.
    Tabulated {
        samples: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Random coefficients on a random unitary mix of the lowest one-body orbitals.
    Random {
        #[serde(default)]
        seed: Option<u64>,
    },
    /// Leading configuration of the lowest one-body orbitals.
    Determinant,
    /// Output of the energy minimizer at the scenario's `K`.
    GroundState,
    /// Snapshot header written by an earlier run.
    File { path: PathBuf },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default)]
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_diag_every")]
    pub diag_every: usize,
    #[serde(default)]
    pub snapshot_every: usize,
    #[serde(default)]
    pub lowdin: bool,
    /// Track the tangent-space residual against the full-CI Hamiltonian.
    #[serde(default)]
    pub residual: bool,
}

fn default_diag_every() -> usize {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_out_dir")]
    pub dir: PathBuf,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl Default for OutputSpec {
    fn default() -> Self {
        OutputSpec { dir: default_out_dir() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub particles: usize,
    pub orbitals: usize,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub pair: PairSpec,
    #[serde(default)]
    pub laser: Option<Laser>,
    pub initial: InitialSpec,
    pub integrator: IntegratorSpec,
    #[serde(default)]
    pub gauge: GaugeMode,
    #[serde(default)]
    pub regularization: Option<Regularization>,
    #[serde(default)]
    pub minimize: MinimizeOptions,
    #[serde(default)]
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let mut cfg = Self::from_toml(&std::fs::read_to_string(path)?)?;
        // relative paths inside the file are relative to the file
        if let Some(base) = path.parent() {
            if let InitialSpec::File { path: p } = &mut cfg.initial {
                if p.is_relative() {
                    *p = base.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::Config(format!("unsupported config version {} (expected {CONFIG_VERSION})", self.version)));
        }
        let (n, k) = (self.particles, self.orbitals);
        if !is_admissible(n, k) {
            return Err(Error::NotAdmissible { n, k });
        }
        if k > self.grid.points {
            return Err(Error::InvalidDimension(format!("K = {k} exceeds the {} grid points", self.grid.points)));
        }
        let it = &self.integrator;
        if !(it.dt > 0.0) || !it.dt.is_finite() {
            return Err(Error::Config(format!("dt must be positive, got {}", it.dt)));
        }
        if !(it.t_final >= 0.0) || !it.t_final.is_finite() {
            return Err(Error::Config(format!("t_final must be non-negative, got {}", it.t_final)));
        }
        if let Some(r) = self.regularization {
            if !(r.epsilon > 0.0) {
                return Err(Error::InvalidRegularization(r.epsilon));
            }
        }
        if let PotentialSpec::Tabulated { values } = &self.potential {
            if values.len() != self.grid.points {
                return Err(Error::ShapeMismatch(format!("{} potential values for {} grid points", values.len(), self.grid.points)));
            }
        }
        Ok(())
    }

    pub fn build_grid(&self) -> Result<Grid> {
        build_grid(self.grid.points, self.grid.spacing, self.grid.boundary)
    }

    /// The problem at this scenario's `K`, or at another rank.
    pub fn build_system_with(&self, k: usize) -> Result<System> {
        let grid = self.build_grid()?;
        let potential: Vec<f64> = match &self.potential {
            PotentialSpec::Zero => vec![0.0; grid.len()],
            PotentialSpec::Harmonic { omega } => grid.points().iter().map(|x| 0.5 * omega * omega * x * x).collect(),
            PotentialSpec::SoftCoulombWell { charge, softening, center } => {
                grid.points().iter().map(|x| -charge / ((x - center).powi(2) + softening * softening).sqrt()).collect()
            }
            PotentialSpec::Tabulated { values } => values.clone(),
        };
        let onebody = build_onebody(&grid, &potential, self.laser.clone(), self.grid.kinetic)?;
        let pair = match &self.pair {
            PairSpec::Zero => PairPotential::zero(&grid),
            PairSpec::SoftCoulomb { strength, softening } => PairPotential::soft_coulomb(&grid, *strength, *softening)?,
            PairSpec::Tabulated { samples } => PairPotential::from_samples(&grid, samples)?,
        };
        System::new(grid, onebody, pair, self.particles, k)
    }

    pub fn build_system(&self) -> Result<System> {
        self.build_system_with(self.orbitals)
    }

    pub fn integrator_options(&self) -> IntegratorOptions {
        let it = &self.integrator;
        IntegratorOptions {
            scheme: it.scheme,
            dt: it.dt,
            t_final: it.t_final,
            gauge: self.gauge.into(),
            regularization: self.regularization,
            diag_every: it.diag_every,
            snapshot_every: it.snapshot_every,
            lowdin: it.lowdin,
        }
    }

    pub fn minimize_options(&self) -> MinimizeOptions {
        MinimizeOptions { seed: self.seed, ..self.minimize.clone() }
    }
}

/// Lowest `K` eigenvectors of the static one-body operator as grid functions.
fn lowest_orbitals(sys: &System) -> crate::linalg::CMatrix {
    let (_, vecs) = eigh(&sys.onebody.matrix_at(0.0));
    vecs.columns(0, sys.k()) / c(sys.grid.spacing().sqrt(), 0.0)
}

impl ScenarioConfig {
    /// Initial state of the scenario; ground states are taken for the field-free problem.
    pub fn initial_state(&self, sys: &System) -> Result<McState> {
        match &self.initial {
            InitialSpec::Random { seed } => {
                let mut rng = seeded(seed.unwrap_or(self.seed));
                let mix = random_unitary(sys.k(), &mut rng);
                let orbitals = lowest_orbitals(sys) * mix;
                Ok(McState::new(random_coeffs(sys.table.len(), &mut rng), orbitals))
            }
            InitialSpec::Determinant => {
                let mut coeffs = CVector::zeros(sys.table.len());
                coeffs[0] = c(1.0, 0.0);
                Ok(McState::new(coeffs, lowest_orbitals(sys)))
            }
            InitialSpec::GroundState => {
                let field_free = ScenarioConfig { laser: None, ..self.clone() }.build_system()?;
                Ok(crate::stationary::minimize_energy(&field_free, None, &self.minimize_options())?.state)
            }
            InitialSpec::File { path } => crate::io::read_snapshot(path, sys),
        }
    }

    /// Replaces every seed in the scenario.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let InitialSpec::Random { seed: own } = &mut self.initial {
            *own = None;
        }
    }
}

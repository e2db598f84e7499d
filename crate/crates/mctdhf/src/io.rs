//! On-disk artifacts: diagnostics CSV, binary snapshots with JSON headers,
//! and JSON manifests.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{c, CMatrix, CVector};
use crate::propagation::{DiagnosticRow, McState, System};
use crate::stationary::StationaryResult;

pub const CSV_HEADER: [&str; 10] =
    ["t", "energy", "norm_C", "gram_dev", "mu", "inv_gamma_frob", "blowup_integral", "residual", "residual_integral", "nonfreeness"];

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Writes diagnostics rows; the residual columns stay empty when not tracked.
pub fn write_diagnostics_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            format!("{:e}", r.t),
            format!("{:e}", r.energy),
            format!("{:e}", r.norm_c),
            format!("{:e}", r.gram_dev),
            format!("{:e}", r.mu),
            format!("{:e}", r.inv_gamma_frob),
            format!("{:e}", r.blowup_integral),
            opt(r.residual),
            opt(r.residual_integral),
            format!("{:e}", r.nonfreeness),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotHeader {
    pub format: String,
    pub version: u32,
    pub particles: usize,
    pub orbitals: usize,
    pub grid_points: usize,
    pub configurations: usize,
    pub t: f64,
    /// Binary file next to the header.
    pub data: String,
    pub layout: String,
}

const SNAPSHOT_FORMAT: &str = "mctdhf-snapshot";
const SNAPSHOT_LAYOUT: &str = "little-endian f64 (re, im) pairs: coefficients, then orbitals column by column";

/// Writes `<stem>.json` and `<stem>.bin` into `dir`, returning the header path.
pub fn write_snapshot(dir: &Path, stem: &str, state: &McState, particles: usize) -> Result<PathBuf> {
    let data_name = format!("{stem}.bin");
    let mut bytes = Vec::with_capacity(16 * (state.coeffs.len() + state.orbitals.len()));
    for z in state.coeffs.iter().chain(state.orbitals.iter()) {
        bytes.extend_from_slice(&z.re.to_le_bytes());
        bytes.extend_from_slice(&z.im.to_le_bytes());
    }
    fs::write(dir.join(&data_name), bytes)?;
    let header = SnapshotHeader {
        format: SNAPSHOT_FORMAT.into(),
        version: 1,
        particles,
        orbitals: state.orbitals.ncols(),
        grid_points: state.orbitals.nrows(),
        configurations: state.coeffs.len(),
        t: state.t,
        data: data_name,
        layout: SNAPSHOT_LAYOUT.into(),
    };
    let path = dir.join(format!("{stem}.json"));
    fs::write(&path, serde_json::to_string_pretty(&header)?)?;
    Ok(path)
}

/// Reads a snapshot and checks it against the problem dimensions.
pub fn read_snapshot(header_path: &Path, sys: &System) -> Result<McState> {
    let header: SnapshotHeader = serde_json::from_str(&fs::read_to_string(header_path)?)?;
    if header.format != SNAPSHOT_FORMAT {
        return Err(Error::Config(format!("{} is not a snapshot header", header_path.display())));
    }
    let (r, k, l) = (sys.table.len(), sys.k(), sys.grid.len());
    if header.particles != sys.n() || header.configurations != r || header.orbitals != k || header.grid_points != l {
        return Err(Error::ShapeMismatch(format!(
            "snapshot holds N = {}, K = {}, L = {}; scenario needs N = {}, K = {k}, L = {l}",
            header.particles,
            header.orbitals,
            header.grid_points,
            sys.n()
        )));
    }
    let base = header_path.parent().unwrap_or_else(|| Path::new("."));
    let bytes = fs::read(base.join(&header.data))?;
    if bytes.len() != 16 * (r + k * l) {
        return Err(Error::ShapeMismatch(format!("snapshot data has {} bytes, expected {}", bytes.len(), 16 * (r + k * l))));
    }
    let values: Vec<_> = bytes
        .chunks_exact(16)
        .map(|ch| {
            let re = f64::from_le_bytes(ch[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(ch[8..].try_into().expect("8 bytes"));
            c(re, im)
        })
        .collect();
    Ok(McState { coeffs: CVector::from_column_slice(&values[..r]), orbitals: CMatrix::from_column_slice(l, k, &values[r..]), t: header.t })
}

/// Complex matrices in JSON as rows of `[re, im]` pairs.
pub fn matrix_rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct StationarySummary {
    pub particles: usize,
    pub orbitals: usize,
    pub energy: f64,
    pub lambda: f64,
    pub orbital_multipliers: Vec<Vec<[f64; 2]>>,
    pub el_residual_coefficients: f64,
    pub el_residual_orbitals: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl StationarySummary {
    pub fn new(sys: &System, res: &StationaryResult) -> Self {
        StationarySummary {
            particles: sys.n(),
            orbitals: sys.k(),
            energy: res.energy,
            lambda: res.lambda,
            orbital_multipliers: matrix_rows(&res.orbital_multipliers),
            el_residual_coefficients: res.el_residuals.0,
            el_residual_orbitals: res.el_residuals.1,
            iterations: res.iterations,
            converged: res.converged,
            seed: res.seed,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
    use crate::random::{random_coeffs, random_orbitals, seeded};

    fn system() -> System {
        let grid = build_grid(6, 0.5, Boundary::Dirichlet).unwrap();
        let ob = build_onebody(&grid, &[0.0; 6], None, KineticScale::Half).unwrap();
        let v = PairPotential::zero(&grid);
        System::new(grid, ob, v, 2, 4).unwrap()
    }

    #[test]
    fn snapshot_round_trip_is_exact() {
        let sys = system();
        let mut rng = seeded(5);
        let mut st = McState::new(random_coeffs(6, &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
        st.t = 0.25;
        let dir = tempfile::tempdir().unwrap();
        let path = write_snapshot(dir.path(), "snap", &st, 2).unwrap();
        assert_eq!(read_snapshot(&path, &sys).unwrap(), st);
    }

    #[test]
    fn snapshot_dimension_mismatch() {
        let sys = system();
        let mut rng = seeded(5);
        let st = McState::new(random_coeffs(6, &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
        let dir = tempfile::tempdir().unwrap();
        let path = write_snapshot(dir.path(), "snap", &st, 2).unwrap();
        let grid = build_grid(6, 0.5, Boundary::Dirichlet).unwrap();
        let ob = build_onebody(&grid, &[0.0; 6], None, KineticScale::Half).unwrap();
        let other = System::new(grid.clone(), ob, PairPotential::zero(&grid), 2, 6).unwrap();
        assert!(matches!(read_snapshot(&path, &other), Err(Error::ShapeMismatch(_))));
    }
}

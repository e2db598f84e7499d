//! Scenario commands behind the `mctdhf` binary.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a run halts on a
//! singular density matrix, 3 on other numerical failures.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::{write_diagnostics_csv, write_json, write_snapshot, StationarySummary};
use crate::oracle::DEFAULT_DIMENSION_CAP;
use crate::propagation::{integrate, HaltEvent, ResidualEstimator};
use crate::scenario::ScenarioConfig;
use crate::stationary::{check_existence, ground_levels, minimize_energy, CriterionCheck};
use crate::verify::{run_suite, CriterionReport};

/// Environment variable holding the worker thread count.
pub const THREADS_ENV: &str = "MCTDHF_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_SINGULAR: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

/// Exit code for an error that ended a command.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::SingularDensity { .. } => EXIT_SINGULAR,
        Error::IntegratorDiverged { .. } | Error::StalledDescent(_) | Error::DegenerateSpectrum(_) | Error::RankDeficient(_) => {
            EXIT_NUMERICAL
        }
        _ => EXIT_INVALID,
    }
}

/// Sizes the global rayon pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<Option<usize>> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got '{raw}'")))?;
    // a pool may already exist when called twice in one process
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(Some(n))
}

#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

fn load(config: &Path, overrides: &Overrides) -> Result<(ScenarioConfig, PathBuf)> {
    let mut cfg = ScenarioConfig::load(config)?;
    if let Some(seed) = overrides.seed {
        cfg.override_seed(seed);
    }
    if let Some(dir) = &overrides.out_dir {
        cfg.output.dir = dir.clone();
    }
    let out = if cfg.output.dir.is_relative() {
        config.parent().unwrap_or_else(|| Path::new(".")).join(&cfg.output.dir)
    } else {
        cfg.output.dir.clone()
    };
    fs::create_dir_all(&out)?;
    Ok((cfg, out))
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub code_version: String,
    pub config: ScenarioConfig,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub exit_code: i32,
    pub steps: usize,
    pub halted: Option<HaltEvent>,
    /// `∫‖Γ^{-1}‖^{3/2}` at the last diagnostics sample.
    pub blowup_integral: Option<f64>,
    /// `‖Γ^{-1}‖_F` at the last diagnostics sample, infinite when singular.
    pub final_inv_gamma_frob: Option<f64>,
    pub outputs: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub out_dir: PathBuf,
    pub manifest: RunManifest,
}

fn names(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().filter_map(|p| p.file_name()).map(|n| n.to_string_lossy().into_owned()).collect()
}

/// `run <config>`: propagates the scenario and writes `diagnostics.csv`,
/// snapshots and `manifest.json` into the output directory.
pub fn run(config: &Path, overrides: &Overrides) -> Result<RunOutcome> {
    let start = Instant::now();
    let (cfg, out) = load(config, overrides)?;
    let sys = cfg.build_system()?;
    let state = cfg.initial_state(&sys)?;
    let estimator = if cfg.integrator.residual { Some(ResidualEstimator::new(&sys, DEFAULT_DIMENSION_CAP)?) } else { None };
    let traj = integrate(&sys, &state, &cfg.integrator_options(), estimator.as_ref())?;

    let mut outputs = vec![out.join("diagnostics.csv")];
    write_diagnostics_csv(&outputs[0], &traj.diagnostics)?;
    for (i, snap) in traj.snapshots.iter().enumerate() {
        outputs.push(write_snapshot(&out, &format!("snapshot_{i:05}"), snap, sys.n())?);
    }
    let exit_code = if traj.halted.is_some() { EXIT_SINGULAR } else { EXIT_OK };
    let manifest_path = out.join("manifest.json");
    outputs.push(manifest_path.clone());
    let manifest = RunManifest {
        command: "run".into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.seed,
        config: cfg,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        exit_code,
        steps: traj.steps,
        halted: traj.halted.clone(),
        blowup_integral: traj.diagnostics.last().map(|d| d.blowup_integral),
        final_inv_gamma_frob: traj.diagnostics.last().map(|d| d.inv_gamma_frob),
        outputs: names(&outputs),
    };
    write_json(&manifest_path, &manifest)?;
    Ok(RunOutcome { exit_code, out_dir: out, manifest })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinimizeManifest {
    pub command: String,
    pub code_version: String,
    pub config: ScenarioConfig,
    pub wall_time_seconds: f64,
    pub result: StationarySummary,
}

/// `minimize <config>`: ground state at the scenario's `K`, written as
/// `stationary.json` plus a snapshot.
pub fn minimize(config: &Path, overrides: &Overrides) -> Result<MinimizeManifest> {
    let start = Instant::now();
    let (cfg, out) = load(config, overrides)?;
    let sys = ScenarioConfig { laser: None, ..cfg.clone() }.build_system()?;
    let res = minimize_energy(&sys, None, &cfg.minimize_options())?;
    write_snapshot(&out, "ground_state", &res.state, sys.n())?;
    let manifest = MinimizeManifest {
        command: "minimize".into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        result: StationarySummary::new(&sys, &res),
    };
    write_json(&out.join("stationary.json"), &manifest)?;
    Ok(manifest)
}

#[derive(Clone, Debug, Serialize)]
pub struct LevelsManifest {
    pub command: String,
    pub code_version: String,
    pub config: ScenarioConfig,
    pub wall_time_seconds: f64,
    pub levels: Vec<StationarySummary>,
    /// Existence check for every rank with a lower admissible rank in the list.
    pub criteria: Vec<CriterionCheck>,
}

/// `levels <config> --k-list ...`: ground levels at several ranks and the
/// existence check between consecutive admissible ranks.
pub fn levels(config: &Path, k_list: &[usize], overrides: &Overrides) -> Result<LevelsManifest> {
    let start = Instant::now();
    let (cfg, out) = load(config, overrides)?;
    if k_list.is_empty() {
        return Err(Error::Config("--k-list needs at least one rank".into()));
    }
    let field_free = ScenarioConfig { laser: None, ..cfg.clone() };
    for &k in k_list {
        if !crate::algebra::is_admissible(cfg.particles, k) {
            return Err(Error::NotAdmissible { n: cfg.particles, k });
        }
    }
    let found = ground_levels(|k| field_free.build_system_with(k), k_list, &cfg.minimize_options())?;
    let mut summaries = Vec::new();
    for lv in &found {
        let sys = field_free.build_system_with(lv.k)?;
        summaries.push(StationarySummary::new(&sys, &lv.result));
    }
    let criteria = found.iter().filter_map(|lv| check_existence(&found, cfg.particles, lv.k, lv.result.energy).ok()).collect();
    let manifest = LevelsManifest {
        command: "levels".into(),
        code_version: env!("CARGO_PKG_VERSION").into(),
        config: cfg,
        wall_time_seconds: start.elapsed().as_secs_f64(),
        levels: summaries,
        criteria,
    };
    write_json(&out.join("levels.json"), &manifest)?;
    Ok(manifest)
}

/// `verify <suite>`: runs the suite, returning the reports and whether all passed.
pub fn verify(suite: &str) -> Result<(Vec<CriterionReport>, bool)> {
    let reports = run_suite(suite)?;
    let ok = reports.iter().all(CriterionReport::passed);
    Ok((reports, ok))
}

//! Desk-scale acceptance criteria, runnable from the CLI (`verify <suite>`)
//! and from the test suite.

use std::fmt;
use std::time::Instant;

use crate::algebra::{compound_matrix, enumerate_configs, ConfigTable};
use crate::ansatz::{dphi_adjoint, dphi_apply, expand_full, reduced_density, FullWavefunction};
use crate::density::{gamma1, gamma2, nonfreeness, occupations, Regularization, RegularizationMode};
use crate::error::{Error, Result};
use crate::grid::{build_grid, build_onebody, Boundary, KineticScale, PairPotential};
use crate::linalg::{c, eigh, hermitian_defect, CMatrix, CVector};
use crate::meanfield::{apply_w, energy_forms, k_matrix, project_out, w_matrix, PairIntegrals};
use crate::oracle::{build_full_hamiltonian, compare, expectation, ExactPropagator, FullHamiltonian, DEFAULT_DIMENSION_CAP};
use crate::propagation::tdhf::propagate_tdhf;
use crate::propagation::{apply_gauge, integrate, IntegratorOptions, McState, ResidualEstimator, System};
use crate::random::{gaussian_matrix, random_coeffs, random_orbitals, random_unitary, seeded, Rng};
use crate::stationary::{check_existence, ground_levels, MinimizeOptions, Verdict};

/// One measured quantity against its limit.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    /// `true` for `value ≤ limit`, `false` for `value ≥ limit`.
    pub upper: bool,
}

impl Check {
    pub fn passed(&self) -> bool {
        if self.upper {
            self.value <= self.limit
        } else {
            self.value >= self.limit
        }
    }
}

#[derive(Clone, Debug)]
pub struct CriterionReport {
    pub id: u8,
    pub title: &'static str,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
    pub error: Option<String>,
    pub seconds: f64,
    pub budget_seconds: f64,
}

impl CriterionReport {
    pub fn passed(&self) -> bool {
        self.error.is_none() && self.seconds <= self.budget_seconds && self.checks.iter().all(Check::passed)
    }
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] criterion {:>2}: {} ({:.2} s of {:.0} s)", self.id, self.title, self.seconds, self.budget_seconds)?;
        for ch in &self.checks {
            let (op, mark) = (if ch.upper { "<=" } else { ">=" }, if ch.passed() { "ok" } else { "FAILED" });
            write!(f, "\n    {:<52} {:>12.4e} {op} {:.1e}  {mark}", ch.name, ch.value, ch.limit)?;
        }
        for n in &self.notes {
            write!(f, "\n    note: {n}")?;
        }
        if let Some(e) = &self.error {
            write!(f, "\n    error: {e}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Checks {
    list: Vec<Check>,
    notes: Vec<String>,
}

impl Checks {
    fn at_most(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        // NaN must fail, so it is mapped to infinity
        let value = if value.is_nan() { f64::INFINITY } else { value };
        self.list.push(Check { name: name.into(), value, limit, upper: true });
    }

    fn at_least(&mut self, name: impl Into<String>, value: f64, limit: f64) {
        let value = if value.is_nan() { f64::NEG_INFINITY } else { value };
        self.list.push(Check { name: name.into(), value, limit, upper: false });
    }

    fn holds(&mut self, name: impl Into<String>, ok: bool) {
        self.at_least(name, if ok { 1.0 } else { 0.0 }, 1.0);
    }

    fn note(&mut self, text: impl Into<String>) {
        self.notes.push(text.into());
    }
}

const TITLES: [(&str, f64); 10] = [
    ("algebraic identities", 10.0),
    ("oracle consistency", 60.0),
    ("gauge and fibration", 30.0),
    ("free dynamics", 10.0),
    ("conservation under interaction", 300.0),
    ("TDHF reduction", 120.0),
    ("exactness at K = L", 120.0),
    ("regularization convergence", 300.0),
    ("ground levels", 300.0),
    ("non-freeness", 1.0),
];

pub const SUITES: [&str; 5] = ["algebra", "oracle", "dynamics", "stationary", "all"];

/// Criterion ids run by a named suite.
pub fn suite(name: &str) -> Result<Vec<u8>> {
    Ok(match name {
        "algebra" => vec![1, 3, 10],
        "oracle" => vec![2, 7],
        "dynamics" => vec![4, 5, 6, 7, 8],
        "stationary" => vec![9],
        "all" => (1..=10).collect(),
        other => return Err(Error::UnknownSuite(other.to_string())),
    })
}

pub fn run_suite(name: &str) -> Result<Vec<CriterionReport>> {
    Ok(suite(name)?.into_iter().map(run_criterion).collect())
}

/// Runs one criterion; internal errors are reported as failures.
pub fn run_criterion(id: u8) -> CriterionReport {
    let (title, budget_seconds) = TITLES.get((id as usize).wrapping_sub(1)).copied().unwrap_or(("unknown", 0.0));
    let start = Instant::now();
    let mut checks = Checks::default();
    let outcome = match id {
        1 => algebraic_identities(&mut checks),
        2 => oracle_consistency(&mut checks),
        3 => gauge_fibration(&mut checks),
        4 => free_dynamics(&mut checks),
        5 => conservation(&mut checks),
        6 => tdhf_reduction(&mut checks),
        7 => exactness(&mut checks),
        8 => regularization_convergence(&mut checks),
        9 => levels(&mut checks),
        10 => nonfreeness_values(&mut checks),
        other => Err(Error::Config(format!("no criterion {other}"))),
    };
    CriterionReport {
        id,
        title,
        checks: checks.list,
        notes: checks.notes,
        error: outcome.err().map(|e| e.to_string()),
        seconds: start.elapsed().as_secs_f64(),
        budget_seconds,
    }
}

fn harmonic_system(l: usize, h: f64, n: usize, k: usize, strength: f64) -> Result<System> {
    let grid = build_grid(l, h, Boundary::Dirichlet)?;
    let pot: Vec<f64> = grid.points().iter().map(|x| 0.5 * x * x).collect();
    let onebody = build_onebody(&grid, &pot, None, KineticScale::Half)?;
    let pair = if strength == 0.0 { PairPotential::zero(&grid) } else { PairPotential::soft_coulomb(&grid, strength, 1.0)? };
    System::new(grid, onebody, pair, n, k)
}

fn full_hamiltonian(sys: &System) -> Result<FullHamiltonian> {
    build_full_hamiltonian(&sys.grid, sys.onebody.static_matrix(), &sys.pair, sys.n(), DEFAULT_DIMENSION_CAP)
}

fn expand(sys: &System, state: &McState, gt: &ConfigTable) -> Result<FullWavefunction> {
    expand_full(&sys.grid, &state.coeffs, &state.orbitals, &sys.table, gt)
}

/// Lowest one-body eigenvectors mixed by a random unitary: smooth orbitals
/// that are not stationary.
fn mixed_orbitals(sys: &System, rng: &mut Rng) -> CMatrix {
    let (_, vecs) = eigh(sys.onebody.static_matrix());
    let m = sys.k().max(4).min(sys.grid.len());
    let mixed = vecs.columns(0, m) * random_unitary(m, rng);
    mixed.columns(0, sys.k()) / c(sys.grid.spacing().sqrt(), 0.0)
}

/// `a φ_0∧φ_1 + b φ_2∧φ_3` with `a² = weight`: occupations `(w, w, 1-w, 1-w)`.
fn paired_coeffs(table: &ConfigTable, weight: f64) -> CVector {
    let mut coeffs = CVector::zeros(table.len());
    coeffs[table.index_of(&[0, 1]).expect("K >= 2")] = c(weight.sqrt(), 0.0);
    coeffs[table.index_of(&[2, 3]).expect("K >= 4")] = c((1.0 - weight).sqrt(), 0.0);
    coeffs
}

fn algebraic_identities(ch: &mut Checks) -> Result<()> {
    let mut rng = seeded(101);
    for (n, k) in [(2, 4), (3, 5), (2, 6)] {
        let table = enumerate_configs(n, k)?;
        let (mut herm, mut trace, mut lo, mut hi, mut contraction, mut sym, mut zeros) =
            (0.0f64, 0.0f64, f64::INFINITY, f64::NEG_INFINITY, 0.0f64, 0.0f64, 0.0f64);
        for _ in 0..1000 {
            let coeffs = random_coeffs(table.len(), &mut rng);
            let g1 = gamma1(&coeffs, &table)?;
            herm = herm.max(hermitian_defect(&g1.entries));
            trace = trace.max((g1.entries.trace().re - n as f64).abs());
            let (occ, _) = occupations(&g1.entries);
            lo = lo.min(*occ.last().expect("K >= 1"));
            hi = hi.max(occ[0]);
            let g2 = gamma2(&coeffs, &table)?;
            for i in 0..k {
                for j in 0..k {
                    let sum: num_complex::Complex64 = (0..k).map(|m| g2.get(i, m, j, m)).sum();
                    let lhs = sum * (2.0 / (n as f64 - 1.0));
                    contraction = contraction.max((lhs - g1.kernel_coeff(i, j)).norm());
                    for kk in 0..k {
                        for l in 0..k {
                            let v = g2.get(i, j, kk, l);
                            sym = sym.max((v - g2.get(j, i, l, kk)).norm()).max((v - g2.get(kk, l, i, j).conj()).norm());
                            if i == j || kk == l {
                                zeros = zeros.max(v.norm());
                            }
                        }
                    }
                }
            }
        }
        let tag = format!("(N={n}, K={k})");
        ch.at_most(format!("{tag} Hermitian defect of Γ"), herm, 1e-12);
        ch.at_most(format!("{tag} |tr Γ - N|"), trace, 1e-12);
        ch.at_least(format!("{tag} smallest occupation"), lo, -1e-12);
        ch.at_most(format!("{tag} largest occupation"), hi, 1.0 + 1e-12);
        ch.at_most(format!("{tag} two-body contraction"), contraction, 1e-12);
        ch.at_most(format!("{tag} two-body symmetries"), sym, 1e-12);
        ch.at_most(format!("{tag} two-body diagonal zeros"), zeros, 1e-12);
    }
    Ok(())
}

fn oracle_consistency(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(6, 0.5, 2, 3, 1.0)?;
    let (grid, table) = (&sys.grid, &sys.table);
    let (l, k) = (grid.len(), sys.k());
    let hfull = full_hamiltonian(&sys)?;
    let vfull = build_full_hamiltonian(grid, &CMatrix::zeros(l, l), &sys.pair, 2, DEFAULT_DIMENSION_CAP)?;
    let gt = &hfull.table;
    let onebody = sys.onebody.static_matrix();
    let mut rng = seeded(202);
    let (mut rho1_err, mut rho2_err, mut e_compact, mut e_expanded, mut k_err, mut w_err) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let state = McState::new(random_coeffs(table.len(), &mut rng), random_orbitals(grid, k, &mut rng));
        let psi = expand(&sys, &state, gt)?;
        let u = &state.orbitals * c(grid.spacing().sqrt(), 0.0);
        let g1 = gamma1(&state.coeffs, table)?;
        let want1 = &u * g1.entries.transpose() * u.adjoint();
        rho1_err = rho1_err.max((reduced_density(&psi, 1, gt)? - want1).norm());

        let g2 = gamma2(&state.coeffs, table)?;
        let rho2 = reduced_density(&psi, 2, gt)?;
        let mut pair_cols = CMatrix::zeros(l * l, k * k);
        for i in 0..k {
            for j in 0..k {
                for a in 0..l {
                    for b in 0..l {
                        pair_cols[(a * l + b, i * k + j)] = u[(a, i)] * u[(b, j)];
                    }
                }
            }
        }
        let g2mat = CMatrix::from_fn(k * k, k * k, |ij, kl| g2.get(ij / k, ij % k, kl / k, kl % k));
        rho2_err = rho2_err.max((rho2 - &pair_cols * g2mat * pair_cols.adjoint()).norm());

        let exact = expectation(&hfull, &psi);
        let forms = energy_forms(grid, onebody, &sys.pair, &state.coeffs, &state.orbitals, table)?;
        e_compact = e_compact.max((forms.compact - c(exact, 0.0)).norm());
        e_expanded = e_expanded.max((forms.expanded - c(exact, 0.0)).norm());

        let ints = PairIntegrals::new(grid, &sys.pair, &state.orbitals);
        let kmat = k_matrix(table, &ints);
        let mut basis = CMatrix::zeros(gt.len(), table.len());
        for s in 0..table.len() {
            let mut e = CVector::zeros(table.len());
            e[s] = c(1.0, 0.0);
            basis.set_column(s, &expand_full(grid, &e, &state.orbitals, table, gt)?.amplitudes);
        }
        k_err = k_err.max((kmat - basis.adjoint() * &vfull.matrix * &basis).norm());

        let w_phi = apply_w(&w_matrix(&g2, &ints, l), &state.orbitals);
        let v_psi = FullWavefunction { amplitudes: &vfull.matrix * &psi.amplitudes, n: 2, l };
        for p in 0..k {
            let grad = dphi_adjoint(grid, &state.orbitals, p, &psi, &v_psi, gt)?;
            w_err = w_err.max((grad - w_phi.column(p)).norm());
        }
    }
    ch.at_most("one-body reduced density vs coefficient formula", rho1_err, 1e-10);
    ch.at_most("two-body reduced density vs coefficient formula", rho2_err, 1e-10);
    ch.at_most("compact energy vs <H Ψ|Ψ>", e_compact, 1e-10);
    ch.at_most("expanded energy vs <H Ψ|Ψ>", e_expanded, 1e-10);
    ch.at_most("interaction block vs <V Φ_τ|Φ_σ>", k_err, 1e-10);
    ch.at_most("mean-field term vs orbital gradient of <VΨ|Ψ>", w_err, 1e-10);
    Ok(())
}

fn gauge_fibration(ch: &mut Checks) -> Result<()> {
    let mut rng = seeded(303);
    let (mut unit, mut hom) = (0.0f64, 0.0f64);
    for (n, k) in [(2, 4), (3, 5), (3, 6)] {
        let table = enumerate_configs(n, k)?;
        for _ in 0..100 {
            let (u, v) = (random_unitary(k, &mut rng), random_unitary(k, &mut rng));
            let du = compound_matrix(&u, &table)?;
            unit = unit.max((&du * du.adjoint() - CMatrix::identity(table.len(), table.len())).norm());
            hom = hom.max((compound_matrix(&(&u * &v), &table)? - &du * compound_matrix(&v, &table)?).norm());
        }
    }
    ch.at_most("compound of a unitary is unitary", unit, 1e-12);
    ch.at_most("compound is multiplicative", hom, 1e-12);

    let (mut pi_err, mut conj_err, mut metric_err) = (0.0f64, 0.0f64, 0.0f64);
    for (n, k) in [(2, 4), (3, 5)] {
        let sys = harmonic_system(8, 0.5, n, k, 0.0)?;
        let gt = enumerate_configs(n, 8)?;
        let grid = &sys.grid;
        for _ in 0..20 {
            let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(grid, k, &mut rng));
            let u = random_unitary(k, &mut rng);
            let moved = apply_gauge(&u, &state, &sys.table)?;
            let (a, b) = (expand(&sys, &state, &gt)?, expand(&sys, &moved, &gt)?);
            pi_err = pi_err.max(compare(&a, &b)?.0);
            let g = gamma1(&state.coeffs, &sys.table)?.entries;
            let g_moved = gamma1(&moved.coeffs, &sys.table)?.entries;
            conj_err = conj_err.max((g_moved - &u * g * u.adjoint()).norm());

            let gamma = gamma1(&state.coeffs, &sys.table)?.entries;
            let raw = gaussian_matrix(grid.len(), 2, &mut rng);
            let zeta = project_out(grid, &state.orbitals, &raw.column(0).into_owned());
            let xi = project_out(grid, &state.orbitals, &raw.column(1).into_owned());
            let overlap = grid.inner(&xi, &zeta);
            for kk in 0..k {
                let dk = dphi_apply(grid, &state.orbitals, kk, &zeta, &a, &gt)?;
                for l in 0..k {
                    let dl = dphi_apply(grid, &state.orbitals, l, &xi, &a, &gt)?;
                    metric_err = metric_err.max((dl.dot(&dk)? - gamma[(kk, l)] * overlap).norm());
                }
            }
        }
    }
    ch.at_most("expanded state unchanged by a gauge transform", pi_err, 1e-10);
    ch.at_most("density matrix conjugated by the gauge unitary", conj_err, 1e-12);
    ch.at_most("tangent metric equals Γ times orbital overlap", metric_err, 1e-12);
    Ok(())
}

fn free_dynamics(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(12, 0.5, 2, 4, 0.0)?;
    let mut rng = seeded(404);
    let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
    let mut opts = IntegratorOptions::new(1e-3, 1.0);
    opts.diag_every = 0;
    let traj = integrate(&sys, &state, &opts, None)?;
    let end = traj.final_state();
    ch.at_most("coefficient change over T = 1", (&end.coeffs - &state.coeffs).norm(), 1e-10);
    let hfull = full_hamiltonian(&sys)?;
    let exact = ExactPropagator::new(&hfull).propagate(&expand(&sys, &state, &hfull.table)?, 1.0);
    ch.at_most("distance to exact evolution at T = 1", compare(&expand(&sys, end, &hfull.table)?, &exact)?.0, 1e-8);
    Ok(())
}

fn conservation(ch: &mut Checks) -> Result<()> {
    ch.note("run at the nearest admissible rank K = 4: for N = 2 the rank K = 3 forces a singular density matrix");
    let sys = harmonic_system(16, 0.5, 2, 4, 1.0)?;
    let mut rng = seeded(505);
    let state = McState::new(paired_coeffs(&sys.table, 0.7), mixed_orbitals(&sys, &mut rng));
    let t_final = 1.0;
    let dt = 0.01;
    let run = |step: f64, diag_every: usize| -> Result<crate::propagation::Trajectory> {
        let mut opts = IntegratorOptions::new(step, t_final);
        opts.diag_every = diag_every;
        integrate(&sys, &state, &opts, None)
    };
    let fine = run(dt / 2.0, 2)?;
    let e0 = fine.diagnostics[0].energy;
    let drift = fine.diagnostics.iter().map(|d| (d.energy - e0).abs() / e0.abs()).fold(0.0, f64::max);
    let constraint = fine.diagnostics.iter().map(|d| d.gram_dev.max((d.norm_c - 1.0).abs())).fold(0.0, f64::max);
    ch.at_most(format!("relative energy drift (dt = {})", dt / 2.0), drift, 1e-6);
    ch.at_most(format!("constraint drift (dt = {})", dt / 2.0), constraint, 1e-8);
    let coarse = run(dt, 0)?;
    let reference = run(dt / 16.0, 0)?;
    let r = reference.final_state();
    let e_coarse = coarse.final_state().distance(r, &sys.grid);
    let e_fine = fine.final_state().distance(r, &sys.grid);
    let ratio = e_coarse / e_fine;
    ch.note(format!("errors at T = 1: {e_coarse:.3e} (dt = {dt}), {e_fine:.3e} (dt = {})", dt / 2.0));
    ch.at_least("error reduction under dt halving", ratio, 16.0 * 0.8);
    ch.at_most("error reduction under dt halving", ratio, 16.0 * 1.2);
    Ok(())
}

fn tdhf_reduction(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(16, 0.5, 2, 2, 1.0)?;
    let mut rng = seeded(606);
    let state = McState::new(CVector::from_element(1, c(1.0, 0.0)), mixed_orbitals(&sys, &mut rng));
    let (dt, t_final) = (0.005, 0.5);
    let mut opts = IntegratorOptions::new(dt, t_final);
    opts.diag_every = 0;
    let traj = integrate(&sys, &state, &opts, None)?;
    let hf_orbitals = propagate_tdhf(&sys, &state.orbitals, dt, t_final)?;
    let gt = enumerate_configs(2, sys.grid.len())?;
    let mc = expand(&sys, traj.final_state(), &gt)?;
    let hf = expand(&sys, &McState::new(state.coeffs.clone(), hf_orbitals), &gt)?;
    let (_, fidelity) = compare(&mc, &hf)?;
    ch.at_least("fidelity with the Hartree-Fock determinant at T = 0.5", fidelity, 1.0 - 1e-6);
    Ok(())
}

/// Distances to the exact evolution at each diagnostic time, with the
/// accumulated residual at that time.
fn bound_along(sys: &System, state: &McState, dt: f64, t_final: f64, every: usize) -> Result<Vec<(f64, f64, f64)>> {
    let hfull = full_hamiltonian(sys)?;
    let exact = ExactPropagator::new(&hfull);
    let est = ResidualEstimator::new(sys, DEFAULT_DIMENSION_CAP)?;
    let mut opts = IntegratorOptions::new(dt, t_final);
    opts.diag_every = every;
    opts.snapshot_every = every;
    let traj = integrate(sys, state, &opts, Some(&est))?;
    let psi0 = expand(sys, state, &hfull.table)?;
    let mut out = Vec::new();
    for (snap, row) in traj.snapshots.iter().zip(&traj.diagnostics) {
        let dist = compare(&expand(sys, snap, &hfull.table)?, &exact.propagate(&psi0, snap.t))?.0;
        out.push((snap.t, dist, row.residual_integral.unwrap_or(f64::INFINITY)));
    }
    Ok(out)
}

fn exactness(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(4, 0.5, 2, 4, 1.0)?;
    let mut rng = seeded(707);
    let state = McState::new(random_coeffs(sys.table.len(), &mut rng), random_orbitals(&sys.grid, 4, &mut rng));
    let path = bound_along(&sys, &state, 1e-3, 0.5, 25)?;
    let (_, last, _) = *path.last().expect("samples");
    ch.at_most("distance to exact evolution at T = 0.5 (K = L = 4)", last, 1e-6);
    let slack = path.iter().map(|(_, d, r)| d - r).fold(f64::NEG_INFINITY, f64::max);
    ch.at_most("max of error minus accumulated residual (K = L)", slack, 1e-6);

    let reduced = harmonic_system(6, 0.5, 2, 2, 1.0)?;
    let state = McState::new(CVector::from_element(1, c(1.0, 0.0)), mixed_orbitals(&reduced, &mut rng));
    let path = bound_along(&reduced, &state, 1e-3, 0.5, 25)?;
    let slack = path.iter().map(|(_, d, r)| d - r).fold(f64::NEG_INFINITY, f64::max);
    let (_, last, acc) = *path.last().expect("samples");
    ch.note(format!("K = 2 < L = 6: error {last:.3e} against accumulated residual {acc:.3e} at T = 0.5"));
    ch.at_most("max of error minus accumulated residual (K = 2, L = 6)", slack, 1e-6);
    Ok(())
}

fn regularization_convergence(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(12, 0.5, 2, 4, 1.0)?;
    let mut rng = seeded(808);
    let state = McState::new(paired_coeffs(&sys.table, 0.6), mixed_orbitals(&sys, &mut rng));
    let run = |reg: Option<Regularization>| -> Result<crate::propagation::Trajectory> {
        let mut opts = IntegratorOptions::new(0.01, 1.0);
        opts.diag_every = 5;
        opts.snapshot_every = 5;
        opts.regularization = reg;
        integrate(&sys, &state, &opts, None)
    };
    let base = run(None)?;
    let mu_min = base.diagnostics.iter().map(|d| d.mu).fold(f64::INFINITY, f64::min);
    ch.at_least("smallest occupation along the unregularized run", mu_min, 0.05);
    let eps = [1e-2, 1e-3, 1e-4];
    let mut dists = Vec::new();
    for &epsilon in &eps {
        let traj = run(Some(Regularization { epsilon, mode: RegularizationMode::Shift }))?;
        let d = traj.snapshots.iter().zip(&base.snapshots).map(|(a, b)| a.distance(b, &sys.grid)).fold(0.0, f64::max);
        dists.push(d);
    }
    let xs: Vec<f64> = eps.iter().map(|e| e.ln()).collect();
    let ys: Vec<f64> = dists.iter().map(|d| d.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    ch.note(format!("max distances {:.3e}, {:.3e}, {:.3e} (shift regularization)", dists[0], dists[1], dists[2]));
    ch.at_least("log-log slope of distance against epsilon", slope, 0.9);
    Ok(())
}

fn levels(ch: &mut Checks) -> Result<()> {
    let make = |k: usize| harmonic_system(6, 1.0, 2, k, 1.0);
    let opts = MinimizeOptions { restarts: 4, seed: 909, ..Default::default() };
    let levels = ground_levels(make, &[2, 4, 6], &opts)?;
    let exact = ExactPropagator::new(&full_hamiltonian(&make(6)?)?).ground_energy();
    let top = levels.last().expect("three levels");
    ch.at_most("|I(L) - lowest full-CI eigenvalue|", (top.result.energy - exact).abs(), 1e-6);
    let rise = levels.windows(2).map(|w| w[1].result.energy - w[0].result.energy).fold(f64::NEG_INFINITY, f64::max);
    ch.at_most("largest increase of I(K) between ranks", rise, 0.0);
    for lv in &levels {
        ch.note(format!(
            "I({}) = {:.10} (residuals {:.1e}, {:.1e})",
            lv.k, lv.result.energy, lv.result.el_residuals.0, lv.result.el_residuals.1
        ));
    }
    let mut applied = 0;
    for lv in &levels[1..] {
        let check = check_existence(&levels, 2, lv.k, lv.result.energy)?;
        let gap = check.previous_level - check.level;
        if gap > 1e-6 {
            applied += 1;
            ch.holds(
                format!("K = {} (K' = {}): guaranteed-global", check.k, check.k_previous),
                check.outcome.verdict == Verdict::GuaranteedGlobal,
            );
        } else {
            ch.note(format!("K = {} (K' = {}): gap {gap:.1e} below 1e-6, criterion not applicable", check.k, check.k_previous));
        }
    }
    ch.holds("criterion applied to at least one rank", applied > 0);
    Ok(())
}

fn nonfreeness_values(ch: &mut Checks) -> Result<()> {
    let sys = harmonic_system(8, 0.5, 2, 4, 0.0)?;
    let table = &sys.table;
    let mut rng = seeded(1010);
    let spectrum = |coeffs: &CVector| -> Result<f64> {
        let (occ, _) = occupations(&gamma1(coeffs, table)?.entries);
        nonfreeness(&occ.iter().map(|g| g.clamp(0.0, 1.0)).collect::<Vec<_>>())
    };
    let mut slater = 0.0f64;
    for s in 0..table.len() {
        let mut coeffs = CVector::zeros(table.len());
        coeffs[s] = c(1.0, 0.0);
        slater = slater.max(spectrum(&coeffs)?);
        let state = McState::new(coeffs, random_orbitals(&sys.grid, 4, &mut rng));
        let rotated = apply_gauge(&random_unitary(4, &mut rng), &state, table)?;
        slater = slater.max(spectrum(&rotated.coeffs)?);
    }
    ch.at_most("largest non-freeness of a Slater determinant", slater, 1e-12);
    let mut two = f64::INFINITY;
    for weight in [0.01, 0.36, 0.5, 0.99] {
        two = two.min(spectrum(&paired_coeffs(table, weight))?);
    }
    ch.at_least("smallest non-freeness of a two-configuration state", two, 1e-6);
    Ok(())
}

use serde::{Deserialize, Serialize};

use super::residual::ResidualEstimator;
use super::rhs::{frame, rhs, Derivative, SINGULAR_TOL};
use super::{GaugeSpec, McState, System};
use crate::density::{gamma1, nonfreeness, rank_diagnostics, Regularization};
use crate::error::{Error, Result};
use crate::grid::lowdin_orthonormalize;
use crate::linalg::{c, eigh, propagator_from_eig, CMatrix, I};
use crate::meanfield::energy_forms;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    #[default]
    Rk4,
    /// Exact one-body half steps around an RK4 step of the remaining terms.
    StrangSplit,
}

#[derive(Clone, Debug)]
pub struct IntegratorOptions {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_final: f64,
    pub gauge: GaugeSpec,
    pub regularization: Option<Regularization>,
    /// Diagnostics every this many steps (0 disables all but the endpoints).
    pub diag_every: usize,
    /// Snapshots every this many steps (0 keeps only the endpoints).
    pub snapshot_every: usize,
    /// Re-orthonormalize orbitals and renormalize coefficients after each step.
    pub lowdin: bool,
}

impl IntegratorOptions {
    pub fn new(dt: f64, t_final: f64) -> Self {
        IntegratorOptions {
            scheme: Scheme::Rk4,
            dt,
            t_final,
            gauge: GaugeSpec::OneBody,
            regularization: None,
            diag_every: 10,
            snapshot_every: 0,
            lowdin: false,
        }
    }
}

/// One diagnostics sample.
#[derive(Clone, Debug, Serialize)]
pub struct DiagnosticRow {
    pub t: f64,
    pub energy: f64,
    pub norm_c: f64,
    pub gram_dev: f64,
    pub mu: f64,
    pub inv_gamma_frob: f64,
    /// Trapezoid accumulation of `‖Γ^{-1}‖^{3/2}`.
    pub blowup_integral: f64,
    /// Instantaneous tangent-space residual, when an estimator is attached.
    pub residual: Option<f64>,
    /// Trapezoid accumulation of the residual.
    pub residual_integral: Option<f64>,
    pub nonfreeness: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum HaltEvent {
    SingularDensity { t: f64, mu: f64 },
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub snapshots: Vec<McState>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub halted: Option<HaltEvent>,
    pub steps: usize,
}

impl Trajectory {
    pub fn final_state(&self) -> &McState {
        self.snapshots.last().expect("a trajectory always holds its initial state")
    }
}

fn axpy(state: &McState, d: &Derivative, h: f64) -> McState {
    McState { coeffs: &state.coeffs + &d.coeffs * c(h, 0.0), orbitals: &state.orbitals + &d.orbitals * c(h, 0.0), t: state.t + h }
}

fn rk4_step(state: &McState, dt: f64, f: &mut impl FnMut(&McState) -> Result<Derivative>) -> Result<McState> {
    let k1 = f(state)?;
    let k2 = f(&axpy(state, &k1, 0.5 * dt))?;
    let k3 = f(&axpy(state, &k2, 0.5 * dt))?;
    let k4 = f(&axpy(state, &k3, dt))?;
    let w = c(dt / 6.0, 0.0);
    Ok(McState {
        coeffs: &state.coeffs + (k1.coeffs + k2.coeffs * c(2.0, 0.0) + k3.coeffs * c(2.0, 0.0) + k4.coeffs) * w,
        orbitals: &state.orbitals + (k1.orbitals + k2.orbitals * c(2.0, 0.0) + k3.orbitals * c(2.0, 0.0) + k4.orbitals) * w,
        t: state.t + dt,
    })
}

/// Working-equation terms other than `HΦ`: `(-i𝕂C, -iΓ^{-1}(I-P)𝕎Φ)`.
fn rhs_nonlinear(sys: &System, state: &McState, reg: Option<Regularization>) -> Result<Derivative> {
    let fr = frame(sys, state, reg, true)?;
    Ok(Derivative { coeffs: &fr.kmat * &state.coeffs * (-I), orbitals: fr.nonlinear * (-I) })
}

struct OneBodyFlow {
    cached: Option<(Vec<f64>, CMatrix)>,
}

impl OneBodyFlow {
    fn propagator(&mut self, sys: &System, t_mid: f64, tau: f64) -> CMatrix {
        if sys.onebody.is_time_dependent() {
            let (vals, vecs) = eigh(&sys.onebody.matrix_at(t_mid));
            return propagator_from_eig(&vals, &vecs, tau);
        }
        let (vals, vecs) = self.cached.get_or_insert_with(|| eigh(sys.onebody.static_matrix()));
        propagator_from_eig(vals, vecs, tau)
    }
}

fn sample(sys: &System, state: &McState, previous: Option<&DiagnosticRow>, residual: Option<&ResidualEstimator>) -> Result<DiagnosticRow> {
    let grid = &sys.grid;
    let gamma = gamma1(&state.coeffs, &sys.table)?.entries;
    let rank = rank_diagnostics(&gamma, 0.0);
    let energy = energy_forms(grid, &sys.onebody.matrix_at(state.t), &sys.pair, &state.coeffs, &state.orbitals, &sys.table)?.compact.re;
    let occ: Vec<f64> = rank.occupations.iter().map(|g| g.clamp(0.0, 1.0)).collect();
    let blow = rank.inv_frobenius.powf(1.5);
    let rho = match residual {
        Some(est) => match est.residual(state) {
            Ok(r) => Some(r),
            Err(Error::SingularDensity { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let (blowup_integral, residual_integral) = match previous {
        None => (0.0, rho.map(|_| 0.0)),
        Some(p) => {
            let dt = state.t - p.t;
            let prev_blow = p.inv_gamma_frob.powf(1.5);
            let acc = p.blowup_integral + 0.5 * dt * (prev_blow + blow);
            let racc = match (p.residual, p.residual_integral, rho) {
                (Some(a), Some(s), Some(b)) => Some(s + 0.5 * dt * (a + b)),
                _ => None,
            };
            (acc, racc)
        }
    };
    Ok(DiagnosticRow {
        t: state.t,
        energy,
        norm_c: state.coeffs.norm(),
        gram_dev: grid.gram_defect(&state.orbitals),
        mu: rank.mu,
        inv_gamma_frob: rank.inv_frobenius,
        blowup_integral,
        residual: rho,
        residual_integral,
        nonfreeness: nonfreeness(&occ)?,
    })
}

/// Fixed-step integration from `state0` to `opts.t_final`.
///
/// A singular density matrix (without regularization) stops the run and is
/// reported in [`Trajectory::halted`]; non-finite values yield
/// [`Error::IntegratorDiverged`] carrying the last finite state.
pub fn integrate(sys: &System, state0: &McState, opts: &IntegratorOptions, residual: Option<&ResidualEstimator>) -> Result<Trajectory> {
    if !(opts.dt > 0.0) || !(opts.t_final >= 0.0) {
        return Err(Error::Config(format!("need dt > 0 and T >= 0, got dt = {}, T = {}", opts.dt, opts.t_final)));
    }
    if opts.scheme == Scheme::StrangSplit && !matches!(opts.gauge, GaugeSpec::OneBody) {
        return Err(Error::Config("strang-split integrates the working equations only (gauge onebody)".into()));
    }
    let steps = (opts.t_final / opts.dt).round() as usize;
    let dt = opts.dt;
    let mut state = state0.clone();
    let mut snapshots = vec![state.clone()];
    let mut diagnostics: Vec<DiagnosticRow> = vec![sample(sys, &state, None, residual)?];
    let mut flow = OneBodyFlow { cached: None };

    let singular = |e: &Error| matches!(e, Error::SingularDensity { .. });
    if opts.regularization.is_none() && !sys.pair.is_zero() {
        let start = rank_diagnostics(&gamma1(&state.coeffs, &sys.table)?.entries, SINGULAR_TOL);
        if start.singular {
            let halted = Some(HaltEvent::SingularDensity { t: state.t, mu: start.mu });
            return Ok(Trajectory { snapshots, diagnostics, halted, steps: 0 });
        }
    }

    for s in 0..steps {
        let t0 = state.t;
        let stepped = match opts.scheme {
            Scheme::Rk4 => rk4_step(&state, dt, &mut |st| rhs(sys, st, &opts.gauge, opts.regularization)),
            Scheme::StrangSplit => {
                let half = flow.propagator(sys, t0 + 0.25 * dt, 0.5 * dt);
                let mid = McState { coeffs: state.coeffs.clone(), orbitals: &half * &state.orbitals, t: t0 };
                rk4_step(&mid, dt, &mut |st| rhs_nonlinear(sys, st, opts.regularization)).map(|mut st| {
                    let half = flow.propagator(sys, t0 + 0.75 * dt, 0.5 * dt);
                    st.orbitals = &half * &st.orbitals;
                    st
                })
            }
        };
        let mut next = match stepped {
            Ok(st) => st,
            Err(e) if singular(&e) => {
                let mu = match e {
                    Error::SingularDensity { mu, .. } => mu,
                    _ => unreachable!(),
                };
                if diagnostics.last().map(|d| d.t) != Some(state.t) {
                    let row = sample(sys, &state, diagnostics.last(), residual)?;
                    diagnostics.push(row);
                }
                snapshots.push(state.clone());
                return Ok(Trajectory { snapshots, diagnostics, halted: Some(HaltEvent::SingularDensity { t: t0, mu }), steps: s });
            }
            Err(e) => return Err(e),
        };
        next.t = state0.t + (s + 1) as f64 * dt;
        if !next.is_finite() {
            return Err(Error::IntegratorDiverged { t: next.t, last_good: Box::new(state) });
        }
        if opts.lowdin {
            next.orbitals = lowdin_orthonormalize(&sys.grid, &next.orbitals)?;
            let norm = next.coeffs.norm();
            next.coeffs /= c(norm, 0.0);
        }
        state = next;
        let last = s + 1 == steps;
        if last || (opts.diag_every > 0 && (s + 1) % opts.diag_every == 0) {
            let row = sample(sys, &state, diagnostics.last(), residual)?;
            diagnostics.push(row);
        }
        if !last && opts.snapshot_every > 0 && (s + 1) % opts.snapshot_every == 0 {
            snapshots.push(state.clone());
        }
    }
    if steps > 0 {
        snapshots.push(state);
    }
    Ok(Trajectory { snapshots, diagnostics, halted: None, steps })
}

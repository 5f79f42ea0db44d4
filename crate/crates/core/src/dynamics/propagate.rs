//! Fixed-step fourth-order commutator-free Magnus propagation.
//!
//! Each step applies two exponentials of linear combinations of `H` sampled at
//! the Gauss-Legendre nodes of the step. Exponentials are applied with a
//! truncated Taylor series run to machine precision, so the norm is conserved up
//! to round-off. Step boundaries include every kink of the schedule.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::lhz::LhzInstance;
use crate::schedule::Schedule;

use super::hamiltonian::{apply_parts, Annealer, StateVector, DEFAULT_MAX_SPINS};
use super::metrics::{fidelity_sq_diag, residual_energy_diag};

/// Norm drift above which a sweep is reported as failed.
pub const NORM_DRIFT_LIMIT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveOptions {
    /// Minimum number of steps per unit of physical time.
    pub steps_per_unit_time: usize,
    /// Upper bound on `||H|| dt` for each step.
    pub max_phase_per_step: f64,
    pub max_spins: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            steps_per_unit_time: 20,
            max_phase_per_step: 1.0,
            max_spins: DEFAULT_MAX_SPINS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub state: StateVector,
    pub fidelity_sq: f64,
    pub residual_energy: f64,
    /// Largest `| ||psi|| - 1 |` seen during the sweep.
    pub norm_drift: f64,
    pub steps: usize,
}

const SQRT3_6: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6
const NODE_EARLY: f64 = 0.5 - SQRT3_6;
const NODE_LATE: f64 = 0.5 + SQRT3_6;
const WEIGHT_SMALL: f64 = 0.25 - SQRT3_6;
const WEIGHT_LARGE: f64 = 0.25 + SQRT3_6;

struct Workspace {
    term: Vec<Complex64>,
    next: Vec<Complex64>,
}

/// `psi <- exp(-i dt (scale * D - sum_k fields_k X_k)) psi`.
fn apply_exponential(
    diag: &[f64],
    scale: f64,
    fields: &[f64],
    dt: f64,
    psi: &mut [Complex64],
    ws: &mut Workspace,
) {
    ws.term.copy_from_slice(psi);
    let threshold = 1e-32 * psi.iter().map(|a| a.norm_sqr()).sum::<f64>();
    for n in 1..200 {
        apply_parts(diag, scale, fields, &ws.term, &mut ws.next);
        let factor = Complex64::new(0.0, -dt / n as f64);
        let mut size = 0.0;
        for (t, (&nx, p)) in ws.term.iter_mut().zip(ws.next.iter().zip(psi.iter_mut())) {
            *t = nx * factor;
            *p += *t;
            size += t.norm_sqr();
        }
        if size < threshold {
            break;
        }
    }
}

/// Integrates `i dpsi/dt = H(t / t_f) psi` from the `+x` product state.
pub fn evolve_with(annealer: &Annealer, t_f: f64, opts: &EvolveOptions) -> Result<Evolution> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(invalid(format!("t_f must be positive, got {t_f}")));
    }
    if opts.steps_per_unit_time == 0 || !(opts.max_phase_per_step > 0.0) {
        return Err(invalid("step density must be positive"));
    }
    let n = annealer.n_spins();
    let diag = annealer.problem_diagonal();
    let bound = diag.iter().fold(0.0f64, |m, d| m.max(d.abs())) + n as f64;

    let mut psi = StateVector::uniform(n);
    let mut ws = Workspace {
        term: vec![Complex64::default(); psi.dim()],
        next: vec![Complex64::default(); psi.dim()],
    };
    let mut drift = 0.0f64;
    let mut steps = 0usize;
    let mut mixed = vec![0.0; n];

    let breaks = annealer.schedule().breakpoints(n);
    for window in breaks.windows(2) {
        let (a, b) = (window[0], window[1]);
        if b <= a {
            continue;
        }
        let duration = (b - a) * t_f;
        let by_density = (duration * opts.steps_per_unit_time as f64).ceil();
        let by_phase = (duration * bound / opts.max_phase_per_step).ceil();
        let substeps = by_density.max(by_phase).max(1.0) as usize;
        let ds = (b - a) / substeps as f64;
        let dt = ds * t_f;
        for j in 0..substeps {
            let s0 = a + j as f64 * ds;
            let (s1, s2) = (s0 + NODE_EARLY * ds, s0 + NODE_LATE * ds);
            let (f1, f2) = (annealer.fields(s1), annealer.fields(s2));
            let (p1, p2) = (annealer.problem_scale(s1), annealer.problem_scale(s2));

            for k in 0..n {
                mixed[k] = WEIGHT_LARGE * f1[k] + WEIGHT_SMALL * f2[k];
            }
            let scale = WEIGHT_LARGE * p1 + WEIGHT_SMALL * p2;
            apply_exponential(diag, scale, &mixed, dt, psi.amplitudes_mut(), &mut ws);

            for k in 0..n {
                mixed[k] = WEIGHT_SMALL * f1[k] + WEIGHT_LARGE * f2[k];
            }
            let scale = WEIGHT_SMALL * p1 + WEIGHT_LARGE * p2;
            apply_exponential(diag, scale, &mixed, dt, psi.amplitudes_mut(), &mut ws);

            drift = drift.max((psi.norm() - 1.0).abs());
            steps += 1;
        }
    }

    if !(drift <= NORM_DRIFT_LIMIT) {
        return Err(Error::IntegrationFailure { norm_drift: drift });
    }
    Ok(Evolution {
        fidelity_sq: fidelity_sq_diag(&psi, diag)?,
        residual_energy: residual_energy_diag(&psi, diag)?,
        norm_drift: drift,
        steps,
        state: psi,
    })
}

pub fn evolve(
    instance: &LhzInstance,
    schedule: &Schedule,
    t_f: f64,
    steps_per_unit_time: usize,
) -> Result<Evolution> {
    let opts = EvolveOptions {
        steps_per_unit_time,
        ..EvolveOptions::default()
    };
    let annealer = Annealer::with_cap(instance, *schedule, opts.max_spins)?;
    evolve_with(&annealer, t_f, &opts)
}

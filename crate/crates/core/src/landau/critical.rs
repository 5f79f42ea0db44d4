//! Critical point: `f' = f'' = f''' = 0` in `(m, s, tau)`.
//!
//! The `m`-derivatives come from jets; their `s` and `tau` sensitivities are
//! taken by central differences, which only feed the Newton Jacobian and so do
//! not limit the accuracy of the converged point.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::free_energy::FreeEnergyFamily;

/// Residual bound for an accepted critical point.
pub const RESIDUAL_TOLERANCE: f64 = 1e-6;
/// Solutions with `s` below this lie on the trivial `s = 0` manifold, where
/// `f` does not depend on `m` at all.
pub const MIN_S: f64 = 1e-3;
const START_LATTICE: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
const MAX_ITERATIONS: usize = 100;
const FD_STEP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub m_c: f64,
    pub s_c: f64,
    pub tau_c: f64,
    /// `f'`, `f''`, `f'''` at the solution.
    pub residuals: [f64; 3],
    pub fourth_derivative: f64,
}

impl CriticalPoint {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()))
    }

    fn coords(&self) -> [f64; 3] {
        [self.m_c, self.s_c, self.tau_c]
    }
}

fn residual(family: &FreeEnergyFamily, x: [f64; 3]) -> [f64; 3] {
    let d = family.m_derivatives(x[0], x[1], x[2]);
    [d[1], d[2], d[3]]
}

fn norm(r: [f64; 3]) -> f64 {
    r.iter().fold(0.0f64, |a, v| a.max(v.abs()))
}

fn clamp_point(x: [f64; 3]) -> [f64; 3] {
    [x[0].clamp(-1.0, 1.0), x[1].clamp(0.0, 1.0), x[2].clamp(0.0, 1.0)]
}

/// Solves `J dx = -r` by Cramer's rule; `None` when singular.
fn solve3(j: [[f64; 3]; 3], r: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(j);
    if !d.is_finite() || d == 0.0 {
        return None;
    }
    let mut out = [0.0; 3];
    for (col, o) in out.iter_mut().enumerate() {
        let mut m = j;
        for row in 0..3 {
            m[row][col] = -r[row];
        }
        *o = det(m) / d;
    }
    Some(out)
}

fn jacobian(family: &FreeEnergyFamily, x: [f64; 3]) -> [[f64; 3]; 3] {
    let d = family.m_derivatives(x[0], x[1], x[2]);
    let mut j = [[d[2], 0.0, 0.0], [d[3], 0.0, 0.0], [d[4], 0.0, 0.0]];
    for col in 1..3 {
        let (mut lo, mut hi) = (x, x);
        lo[col] = (x[col] - FD_STEP).max(0.0);
        hi[col] = (x[col] + FD_STEP).min(1.0);
        let (rl, rh) = (residual(family, lo), residual(family, hi));
        let h = hi[col] - lo[col];
        for row in 0..3 {
            j[row][col] = (rh[row] - rl[row]) / h;
        }
    }
    j
}

fn newton(family: &FreeEnergyFamily, start: [f64; 3]) -> Option<CriticalPoint> {
    let mut x = start;
    let mut r = residual(family, x);
    for _ in 0..MAX_ITERATIONS {
        if norm(r) < 1e-12 {
            break;
        }
        let dx = solve3(jacobian(family, x), r)?;
        let mut step = 1.0;
        let mut improved = false;
        while step > 1e-4 {
            let trial = clamp_point([x[0] + step * dx[0], x[1] + step * dx[1], x[2] + step * dx[2]]);
            let rt = residual(family, trial);
            if norm(rt).is_finite() && norm(rt) < norm(r) {
                x = trial;
                r = rt;
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if !improved {
            break;
        }
    }
    let d = family.m_derivatives(x[0], x[1], x[2]);
    Some(CriticalPoint {
        m_c: x[0],
        s_c: x[1],
        tau_c: x[2],
        residuals: [d[1], d[2], d[3]],
        fourth_derivative: d[4],
    })
}

fn admissible(p: &CriticalPoint) -> bool {
    p.max_residual() < RESIDUAL_TOLERANCE
        && p.fourth_derivative > 0.0
        && p.m_c > 1e-6
        && p.m_c <= 1.0
        && p.s_c >= MIN_S
        && p.s_c <= 1.0
        && (0.0..=1.0).contains(&p.tau_c)
}

fn lexicographic(a: &CriticalPoint, b: &CriticalPoint) -> std::cmp::Ordering {
    a.coords()
        .iter()
        .zip(b.coords())
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Every distinct admissible critical point reached from the start lattice,
/// ordered by coordinates.
pub fn critical_points(family: &FreeEnergyFamily) -> Vec<CriticalPoint> {
    let starts: Vec<[f64; 3]> = START_LATTICE
        .iter()
        .flat_map(|&m| {
            START_LATTICE
                .iter()
                .flat_map(move |&s| START_LATTICE.iter().map(move |&t| [m, s, t]))
        })
        .collect();
    let mut found: Vec<CriticalPoint> = starts
        .par_iter()
        .filter_map(|&x| newton(family, x))
        .filter(admissible)
        .collect();
    found.sort_by(lexicographic);
    let mut distinct: Vec<CriticalPoint> = Vec::new();
    for p in found {
        match distinct.last_mut() {
            Some(q) if p.coords().iter().zip(q.coords()).all(|(a, b)| (a - b).abs() < 1e-6) => {
                if p.max_residual() < q.max_residual() {
                    *q = p;
                }
            }
            _ => distinct.push(p),
        }
    }
    distinct
}

/// The critical point with the smallest residual; ties within `1e-9` go to
/// the lexicographically smallest coordinates.
pub fn critical_point(family: &FreeEnergyFamily) -> Result<CriticalPoint> {
    let points = critical_points(family);
    if let Some(best) = points.iter().copied().reduce(|a, b| {
        if b.max_residual() < a.max_residual() - 1e-9 {
            b
        } else {
            a
        }
    }) {
        return Ok(best);
    }
    let best = (0..5)
        .filter_map(|i| newton(family, [START_LATTICE[i]; 3]))
        .min_by(|a, b| a.max_residual().total_cmp(&b.max_residual()));
    Err(Error::SolverFailure {
        residuals: best.map(|p| p.residuals).unwrap_or([f64::NAN; 3]),
    })
}

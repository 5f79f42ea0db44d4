use serde::{Deserialize, Serialize};

use crate::error::Result;

use super::free_energy::FreeEnergyFamily;

const GRID_STEP: f64 = 1e-3;
const M_TOLERANCE: f64 = 1e-8;
/// Local minima closer than this in `f` are reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub m_star: f64,
    pub f_star: f64,
    pub is_degenerate: bool,
    /// Every local minimum found, lowest `f` first.
    pub local_minima: Vec<(f64, f64)>,
}

/// Global minimum of `f(m; s, tau)` over `m` in `[-1, 1]`.
///
/// A dense grid brackets each local minimum, which is then refined by
/// bisection on `f'` (or left at the boundary). Among minima equal within
/// [`DEGENERACY_TOLERANCE`], the largest `m` is reported as `m_star`; a flat
/// free energy reports `m_star = 0`.
pub fn minimize_over_m(family: &FreeEnergyFamily, s: f64, tau: f64) -> Result<Minimum> {
    family.value(0.0, s, tau)?;
    let n = (2.0 / GRID_STEP).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| -1.0 + 2.0 * i as f64 / n as f64).collect();
    let values: Vec<f64> = grid.iter().map(|&m| family.evaluate(m, s, tau)).collect();

    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    if hi - lo <= 1e-13 * lo.abs().max(1.0) {
        return Ok(Minimum {
            m_star: 0.0,
            f_star: family.evaluate(0.0, s, tau),
            is_degenerate: true,
            local_minima: vec![],
        });
    }

    let mut minima = Vec::new();
    for i in 0..=n {
        let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
        let right = if i == n { f64::INFINITY } else { values[i + 1] };
        if values[i] <= left && values[i] < right {
            minima.push(refine(family, s, tau, &grid, i));
        }
    }
    minima.sort_by(|a, b| a.1.total_cmp(&b.1));
    minima.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-6);
    let best_f = minima[0].1;
    let tied: Vec<&(f64, f64)> = minima
        .iter()
        .filter(|(_, f)| f - best_f <= DEGENERACY_TOLERANCE)
        .collect();
    let exact = tied
        .iter()
        .filter(|(_, f)| f - best_f <= 1e-12 * best_f.abs().max(1.0))
        .map(|(m, _)| *m)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Minimum {
        m_star: exact,
        f_star: best_f,
        is_degenerate: tied.len() > 1,
        local_minima: minima,
    })
}

fn refine(family: &FreeEnergyFamily, s: f64, tau: f64, grid: &[f64], i: usize) -> (f64, f64) {
    let n = grid.len() - 1;
    let slope = |m: f64| family.m_derivatives(m, s, tau)[1];
    let (mut a, mut b) = (grid[i.saturating_sub(1)], grid[(i + 1).min(n)]);
    let (fa, fb) = (slope(a), slope(b));
    let endpoint = |m: f64| (m, family.evaluate(m, s, tau));
    if fa >= 0.0 && i == 0 {
        return endpoint(-1.0);
    }
    if fb <= 0.0 && i == n {
        return endpoint(1.0);
    }
    if !(fa < 0.0 && fb > 0.0) {
        return endpoint(grid[i]);
    }
    while b - a > M_TOLERANCE {
        let mid = 0.5 * (a + b);
        if slope(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    let m = 0.5 * (a + b);
    let candidate = endpoint(m);
    let grid_point = endpoint(grid[i]);
    if candidate.1 <= grid_point.1 {
        candidate
    } else {
        grid_point
    }
}

use crate::error::{invalid, Result};
use crate::lhz::LhzInstance;
use crate::schedule::Schedule;

use super::hamiltonian::{Annealer, SpinHamiltonian};

/// Gap minimum is searched over this window; the endpoints carry trivial
/// degeneracies of the diagonal problem Hamiltonian.
pub const GAP_WINDOW: (f64, f64) = (0.01, 0.99);
const GAP_LOCATION_TOL: f64 = 1e-4;

/// All eigenvalues of `h`, ascending, degenerate values repeated.
pub fn eigenvalues(h: &SpinHamiltonian) -> Vec<f64> {
    let mut values: Vec<f64> = h.to_dense().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    values
}

pub fn spectrum_of(annealer: &Annealer, s: f64, n_levels: usize) -> Result<Vec<f64>> {
    let h = annealer.at(s)?;
    if n_levels > h.dim() {
        return Err(invalid(format!(
            "requested {n_levels} levels from a {}-dimensional space",
            h.dim()
        )));
    }
    let mut values = eigenvalues(&h);
    values.truncate(n_levels);
    Ok(values)
}

/// Lowest `n_levels` eigenvalues of `H(s)`.
pub fn spectrum_at(instance: &LhzInstance, schedule: &Schedule, s: f64, n_levels: usize) -> Result<Vec<f64>> {
    spectrum_of(&Annealer::new(instance, *schedule)?, s, n_levels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapInfo {
    pub gap: f64,
    pub location: f64,
}

/// Coarsest grid the gap scan accepts.
pub const MIN_GAP_GRID: usize = 16;

/// Minimum of `gap(s)` over [`GAP_WINDOW`]: uniform grid, then golden-section
/// refinement of the bracket around the coarse minimum.
pub fn min_gap_of<F>(mut gap: F, grid_points: usize) -> Result<GapInfo>
where
    F: FnMut(f64) -> Result<f64>,
{
    if grid_points < MIN_GAP_GRID {
        return Err(invalid(format!("grid_points must be >= {MIN_GAP_GRID}, got {grid_points}")));
    }
    let (lo, hi) = GAP_WINDOW;
    let step = (hi - lo) / (grid_points - 1) as f64;
    let mut best = GapInfo {
        gap: f64::INFINITY,
        location: lo,
    };
    let mut best_index = 0;
    for i in 0..grid_points {
        let s = lo + i as f64 * step;
        let g = gap(s)?;
        if g < best.gap {
            best = GapInfo { gap: g, location: s };
            best_index = i;
        }
    }

    let mut a = lo + best_index.saturating_sub(1) as f64 * step;
    let mut b = (lo + (best_index + 1) as f64 * step).min(hi);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut gc, mut gd) = (gap(c)?, gap(d)?);
    while b - a > GAP_LOCATION_TOL {
        if gc <= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - inv_phi * (b - a);
            gc = gap(c)?;
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + inv_phi * (b - a);
            gd = gap(d)?;
        }
    }
    for (g, s) in [(gc, c), (gd, d)] {
        if g < best.gap {
            best = GapInfo { gap: g, location: s };
        }
    }
    Ok(best)
}

pub fn gap_at(annealer: &Annealer, s: f64) -> Result<f64> {
    let e = spectrum_of(annealer, s, 2)?;
    Ok(e[1] - e[0])
}

pub fn min_gap_with(annealer: &Annealer, grid_points: usize) -> Result<GapInfo> {
    min_gap_of(|s| gap_at(annealer, s), grid_points)
}

/// `min_s E_1(s) - E_0(s)` and its location.
pub fn min_gap(instance: &LhzInstance, schedule: &Schedule, grid_points: usize) -> Result<GapInfo> {
    min_gap_with(&Annealer::new(instance, *schedule)?, grid_points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhz::{sample_instance, LhzLayout, Representation};

    fn instance() -> LhzInstance {
        let layout = LhzLayout::new(4, Representation::Auxiliary).unwrap();
        sample_instance(&layout, 1, -1.0, 1.0, 2.0, 10.0).unwrap()
    }

    #[test]
    fn driver_spectrum() {
        let e = spectrum_at(&instance(), &Schedule::homogeneous(), 0.0, 10).unwrap();
        assert!((e[0] + 8.0).abs() < 1e-10);
        for level in &e[1..9] {
            assert!((level + 6.0).abs() < 1e-10);
        }
        assert!((e[9] + 4.0).abs() < 1e-10);
    }

    #[test]
    fn final_spectrum_is_classical() {
        let inst = instance();
        let e = spectrum_at(&inst, &Schedule::homogeneous(), 1.0, 256).unwrap();
        let mut classical = inst.problem_diagonal();
        classical.sort_by(f64::total_cmp);
        for (a, b) in e.iter().zip(&classical) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(spectrum_at(&inst, &Schedule::homogeneous(), 1.0, 257).is_err());
    }

    #[test]
    fn frozen_driver_gap_is_two() {
        let h0 = SpinHamiltonian {
            diag: vec![0.0; 256],
            transverse: vec![1.0; 8],
        };
        let info = min_gap_of(
            |_| {
                let e = eigenvalues(&h0);
                Ok(e[1] - e[0])
            },
            16,
        )
        .unwrap();
        assert!((info.gap - 2.0).abs() < 1e-10);
        assert!(min_gap_of(|_| Ok(1.0), 8).is_err());
    }

    #[test]
    fn golden_section_finds_smooth_minimum() {
        let info = min_gap_of(|s| Ok(0.1 + (s - 0.4321).powi(2)), 33).unwrap();
        assert!((info.location - 0.4321).abs() < 1e-4);
        assert!((info.gap - 0.1).abs() < 1e-8);
    }
}

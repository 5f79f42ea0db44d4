//! First-order line: where the global minimizer `m*` jumps as `tau` varies.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::free_energy::FreeEnergyFamily;
use super::minimize::minimize_over_m;

/// Jumps at least this large are reported as points of the line.
pub const JUMP_THRESHOLD: f64 = 0.05;
/// Jumps this small count as continuous when locating the endpoint.
const ENDPOINT_JUMP: f64 = 1e-3;
const TAU_TOLERANCE: f64 = 1e-7;
const S_TOLERANCE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionPoint {
    pub s: f64,
    pub tau: f64,
    pub m_below: f64,
    pub m_above: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransitionLine {
    /// Ordered by `s`.
    pub points: Vec<TransitionPoint>,
    /// Where the jump vanishes, located by bisection in `s`.
    pub endpoint: Option<TransitionPoint>,
}

fn m_star(family: &FreeEnergyFamily, s: f64, tau: f64) -> Result<f64> {
    Ok(minimize_over_m(family, s, tau)?.m_star)
}

/// Largest jump of `m*` along `tau` at fixed `s`, narrowed to a `tau` interval
/// of width [`TAU_TOLERANCE`].
pub fn largest_jump(family: &FreeEnergyFamily, s: f64, tau_grid: &[f64]) -> Result<Option<TransitionPoint>> {
    let ms = tau_grid
        .iter()
        .map(|&t| m_star(family, s, t))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<TransitionPoint> = None;
    for i in 1..tau_grid.len() {
        if (ms[i] - ms[i - 1]).abs() <= JUMP_THRESHOLD {
            continue;
        }
        let (mut a, mut b) = (tau_grid[i - 1], tau_grid[i]);
        let (mut ma, mut mb) = (ms[i - 1], ms[i]);
        while b - a > TAU_TOLERANCE {
            let mid = 0.5 * (a + b);
            let mm = m_star(family, s, mid)?;
            if (mm - ma).abs() >= (mb - mm).abs() {
                b = mid;
                mb = mm;
            } else {
                a = mid;
                ma = mm;
            }
        }
        let point = TransitionPoint {
            s,
            tau: 0.5 * (a + b),
            m_below: ma,
            m_above: mb,
            jump: (mb - ma).abs(),
        };
        if best.is_none_or(|p| point.jump > p.jump) {
            best = Some(point);
        }
    }
    Ok(best)
}

fn has_jump(p: &Option<TransitionPoint>, threshold: f64) -> bool {
    p.is_some_and(|p| p.jump > threshold)
}

/// Traces the line over `s_grid`; slices without a jump are omitted.
pub fn transition_line(family: &FreeEnergyFamily, s_grid: &[f64], tau_grid: &[f64]) -> Result<TransitionLine> {
    let in_range = |g: &[f64]| g.iter().all(|v| (0.0..=1.0).contains(v));
    if !in_range(s_grid) || !in_range(tau_grid) || tau_grid.len() < 2 {
        return Err(invalid("grids must lie in [0, 1] and tau needs two points"));
    }
    let mut s_sorted = s_grid.to_vec();
    s_sorted.sort_by(f64::total_cmp);
    let mut tau_sorted = tau_grid.to_vec();
    tau_sorted.sort_by(f64::total_cmp);

    let slices = s_sorted
        .par_iter()
        .map(|&s| largest_jump(family, s, &tau_sorted))
        .collect::<Result<Vec<_>>>()?;

    let points: Vec<TransitionPoint> = slices
        .iter()
        .filter(|p| has_jump(p, JUMP_THRESHOLD))
        .map(|p| p.unwrap())
        .collect();

    let mut endpoint = None;
    for i in 1..s_sorted.len() {
        let (left, right) = (has_jump(&slices[i - 1], JUMP_THRESHOLD), has_jump(&slices[i], JUMP_THRESHOLD));
        if left == right {
            continue;
        }
        let (mut on, mut off) = if left {
            (s_sorted[i - 1], s_sorted[i])
        } else {
            (s_sorted[i], s_sorted[i - 1])
        };
        let mut last = if left { slices[i - 1] } else { slices[i] };
        while (on - off).abs() > S_TOLERANCE {
            let mid = 0.5 * (on + off);
            let p = largest_jump(family, mid, &tau_sorted)?;
            if has_jump(&p, ENDPOINT_JUMP) {
                on = mid;
                last = p;
            } else {
                off = mid;
            }
        }
        endpoint = last;
        break;
    }
    Ok(TransitionLine { points, endpoint })
}

pub const TRANSITION_CSV_HEADER: &str = "s,tau,m_below,m_above,jump";

pub fn write_transition_csv<W: Write>(mut w: W, line: &TransitionLine) -> std::io::Result<()> {
    writeln!(w, "{TRANSITION_CSV_HEADER}")?;
    for p in &line.points {
        writeln!(w, "{},{},{},{},{}", p.s, p.tau, p.m_below, p.m_above, p.jump)?;
    }
    Ok(())
}

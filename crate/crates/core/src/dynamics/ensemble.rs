//! Seeded ensembles of annealing sweeps.
//!
//! Every instance is generated from its own seed, so any subset of an ensemble
//! can be reproduced alone. Rows are sorted by seed before they are returned,
//! which makes the output independent of how the work was scheduled.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lhz::{sample_instance, LhzInstance, LhzLayout, Representation};
use crate::schedule::{DriveKind, Schedule};

use super::hamiltonian::Annealer;
use super::propagate::{evolve_with, EvolveOptions};
use super::spectrum::{min_gap_with, GapInfo};

/// Log-spaced sweep times used when none are given.
pub fn default_t_f_grid() -> Vec<f64> {
    log_grid(1.0, 100.0, 8)
}

pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub n_logical: usize,
    pub representation: Representation,
    pub constraint_strength: f64,
    pub aux_field: f64,
    pub j_range: (f64, f64),
    pub schedules: Vec<Schedule>,
    pub t_fs: Vec<f64>,
    pub steps_per_unit_time: usize,
    /// Gap grid size; `None` skips the spectral scan.
    pub gap_grid_points: Option<usize>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            n_logical: 4,
            representation: Representation::Auxiliary,
            constraint_strength: 2.0,
            aux_field: 10.0,
            j_range: (-1.0, 1.0),
            schedules: vec![Schedule::homogeneous()],
            t_fs: default_t_f_grid(),
            steps_per_unit_time: EvolveOptions::default().steps_per_unit_time,
            gap_grid_points: Some(99),
        }
    }
}

impl EnsembleConfig {
    pub fn instance(&self, seed: u64) -> Result<LhzInstance> {
        let layout = LhzLayout::new(self.n_logical, self.representation)?;
        sample_instance(
            &layout,
            seed,
            self.j_range.0,
            self.j_range.1,
            self.constraint_strength,
            self.aux_field,
        )
    }
}

/// One sweep of one instance under one schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub seed: u64,
    pub schedule_kind: DriveKind,
    pub r: Option<f64>,
    pub order: Option<String>,
    pub t_f: f64,
    pub fidelity_sq: f64,
    pub residual_energy: f64,
    pub min_gap: Option<f64>,
    pub gap_location: Option<f64>,
    pub norm_drift: f64,
}

impl SweepRow {
    pub fn schedule_key(&self) -> String {
        match (self.schedule_kind, self.r, &self.order) {
            (DriveKind::Inhomogeneous, Some(r), Some(order)) => format!("inhomogeneous(r={r},{order})"),
            _ => self.schedule_kind.to_string(),
        }
    }
}

pub const SWEEP_CSV_HEADER: &str =
    "seed,schedule_kind,r,order,t_f,fidelity_sq,residual_energy,min_gap,gap_location,norm_drift";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_sweep_csv<W: Write>(mut w: W, rows: &[SweepRow]) -> std::io::Result<()> {
    writeln!(w, "{SWEEP_CSV_HEADER}")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{}",
            row.seed,
            row.schedule_kind,
            opt(row.r),
            row.order.as_deref().unwrap_or(""),
            row.t_f,
            row.fidelity_sq,
            row.residual_energy,
            opt(row.min_gap),
            opt(row.gap_location),
            row.norm_drift
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct InstanceFailure {
    pub seed: u64,
    pub error: Error,
}

#[derive(Debug, Clone, Default)]
pub struct EnsembleOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<InstanceFailure>,
}

fn run_instance(cfg: &EnsembleConfig, seed: u64) -> Result<Vec<SweepRow>> {
    let instance = cfg.instance(seed)?;
    let opts = EvolveOptions {
        steps_per_unit_time: cfg.steps_per_unit_time,
        ..EvolveOptions::default()
    };
    let mut rows = Vec::with_capacity(cfg.schedules.len() * cfg.t_fs.len());
    for schedule in &cfg.schedules {
        let annealer = Annealer::with_cap(&instance, *schedule, opts.max_spins)?;
        let gap = cfg
            .gap_grid_points
            .map(|points| min_gap_with(&annealer, points))
            .transpose()?;
        let inhom = schedule.kind == DriveKind::Inhomogeneous;
        for &t_f in &cfg.t_fs {
            let evo = evolve_with(&annealer, t_f, &opts)?;
            rows.push(SweepRow {
                seed,
                schedule_kind: schedule.kind,
                r: inhom.then_some(schedule.r),
                order: inhom.then(|| schedule.order.to_string()),
                t_f,
                fidelity_sq: evo.fidelity_sq,
                residual_energy: evo.residual_energy,
                min_gap: gap.map(|g: GapInfo| g.gap),
                gap_location: gap.map(|g| g.location),
                norm_drift: evo.norm_drift,
            });
        }
    }
    Ok(rows)
}

/// Runs every schedule and sweep time on each seeded instance.
///
/// Failing instances are collected with their seed; the rest still run.
pub fn ensemble_run(cfg: &EnsembleConfig, seeds: &[u64]) -> Result<EnsembleOutcome> {
    let mut sorted = seeds.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("seeds must be distinct"));
    }
    if cfg.t_fs.is_empty() || cfg.schedules.is_empty() {
        return Err(invalid("ensemble needs at least one schedule and one t_f"));
    }
    let results: Vec<(u64, Result<Vec<SweepRow>>)> = sorted
        .par_iter()
        .map(|&seed| (seed, run_instance(cfg, seed)))
        .collect();
    let mut outcome = EnsembleOutcome::default();
    for (seed, result) in results {
        match result {
            Ok(rows) => outcome.rows.extend(rows),
            Err(error) => outcome.failures.push(InstanceFailure { seed, error }),
        }
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::propagate::evolve;
    use crate::schedule::SwitchOrder;

    fn small_config() -> EnsembleConfig {
        EnsembleConfig {
            n_logical: 3,
            schedules: vec![
                Schedule::homogeneous(),
                Schedule::inhomogeneous(0.5, SwitchOrder::Ascending).unwrap(),
            ],
            t_fs: vec![1.0, 4.0],
            gap_grid_points: Some(16),
            ..EnsembleConfig::default()
        }
    }

    #[test]
    fn permuted_seeds_give_identical_tables() {
        let cfg = small_config();
        let a = ensemble_run(&cfg, &[3, 1, 2]).unwrap();
        let b = ensemble_run(&cfg, &[2, 3, 1]).unwrap();
        assert_eq!(a.rows, b.rows);
        assert_eq!(a.rows.len(), 3 * 2 * 2);
        assert!(a.rows.windows(2).all(|w| w[0].seed <= w[1].seed));
    }

    #[test]
    fn single_instance_matches_evolve() {
        let mut cfg = small_config();
        cfg.schedules.truncate(1);
        cfg.t_fs = vec![2.5];
        let out = ensemble_run(&cfg, &[7]).unwrap();
        let evo = evolve(&cfg.instance(7).unwrap(), &cfg.schedules[0], 2.5, cfg.steps_per_unit_time).unwrap();
        assert_eq!(out.rows[0].fidelity_sq, evo.fidelity_sq);
        assert_eq!(out.rows[0].residual_energy, evo.residual_energy);
    }

    #[test]
    fn failures_are_attributed() {
        let mut cfg = small_config();
        cfg.n_logical = 6; // 19 spins, over the cap
        let out = ensemble_run(&cfg, &[1, 2]).unwrap();
        assert!(out.rows.is_empty());
        assert_eq!(out.failures.iter().map(|f| f.seed).collect::<Vec<_>>(), vec![1, 2]);
        assert!(ensemble_run(&small_config(), &[1, 1]).is_err());
    }

    #[test]
    fn csv_layout() {
        let cfg = small_config();
        let out = ensemble_run(&cfg, &[1]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &out.rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), SWEEP_CSV_HEADER);
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first.len(), 10);
        assert_eq!(first[1], "homogeneous");
        assert_eq!(first[2], "");
        let inhom = text.lines().find(|l| l.contains("inhomogeneous")).unwrap();
        assert!(inhom.contains(",0.5,ascending,"));
    }

    #[test]
    fn log_grid_endpoints() {
        let g = default_t_f_grid();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 1.0).abs() < 1e-12 && (g[7] - 100.0).abs() < 1e-9);
    }
}

use rayon::prelude::*;
use serde::Serialize;

use lhz_core::dynamics::{
    ensemble_run, min_gap_with, spectrum_of, write_sweep_csv, Annealer, EnsembleOutcome, MIN_GAP_GRID,
};
use lhz_core::landau::{critical_point, transition_line, write_transition_csv, CriticalPoint, TransitionPoint};
use lhz_core::magnetization::{fit_quartic_cubic, magnetization_grid, scan, write_scan_csv, FitReport};
use lhz_core::{DriveKind, Schedule};

use crate::config::ExperimentConfig;
use crate::manifest::OutputSet;
use crate::{CliError, Failure};

pub const GAP_CSV_HEADER: &str = "seed,schedule_kind,r,order,min_gap,gap_location";
pub const FREE_ENERGY_CSV_HEADER: &str = "variant,n_physical,s,tau,m,f";

fn io(e: std::io::Error) -> CliError {
    CliError::Runtime(format!("i/o: {e}"))
}

fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn seed_failures(outcome: &EnsembleOutcome) -> Vec<Failure> {
    outcome
        .failures
        .iter()
        .map(|f| Failure::seed(f.seed, f.error.to_string()))
        .collect()
}

fn inhomogeneous(cfg: &ExperimentConfig) -> Result<Schedule, CliError> {
    Ok(Schedule::inhomogeneous(cfg.r, cfg.order)?)
}

fn check_gap_grid(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.grid_points < MIN_GAP_GRID {
        return Err(CliError::Usage(format!(
            "gap scans need grid-points >= {MIN_GAP_GRID}, got {}",
            cfg.grid_points
        )));
    }
    Ok(())
}

pub fn sweep(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let outcome = ensemble_run(&cfg.ensemble(vec![cfg.schedule()?], false), &cfg.seeds)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &outcome.rows).map_err(io)?;
    out.write("sweep.csv", &buf).map_err(io)?;
    Ok(seed_failures(&outcome))
}

/// Homogeneous and inhomogeneous sweeps of the same instances, with gaps.
pub fn ensemble(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    check_gap_grid(cfg)?;
    let schedules = vec![Schedule::homogeneous(), inhomogeneous(cfg)?];
    let outcome = ensemble_run(&cfg.ensemble(schedules, true), &cfg.seeds)?;
    let mut buf = Vec::new();
    write_sweep_csv(&mut buf, &outcome.rows).map_err(io)?;
    out.write("ensemble.csv", &buf).map_err(io)?;
    Ok(seed_failures(&outcome))
}

pub fn spectrum(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let instance = cfg.ensemble(Vec::new(), false).instance(cfg.first_seed())?;
    let annealer = Annealer::new(&instance, cfg.schedule()?)?;
    let levels = cfg.levels.min(1 << annealer.n_spins());
    let rows = grid(cfg.grid_points, 0.0, 1.0)
        .into_par_iter()
        .map(|s| spectrum_of(&annealer, s, levels).map(|e| (s, e)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut text = String::from("s");
    for k in 0..levels {
        text.push_str(&format!(",E{k}"));
    }
    text.push('\n');
    for (s, energies) in rows {
        text.push_str(&s.to_string());
        for e in energies {
            text.push_str(&format!(",{e}"));
        }
        text.push('\n');
    }
    out.write("spectrum.csv", text.as_bytes()).map_err(io)?;
    Ok(Vec::new())
}

pub fn gap_stats(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    check_gap_grid(cfg)?;
    let schedules = [Schedule::homogeneous(), inhomogeneous(cfg)?];
    let ens = cfg.ensemble(Vec::new(), false);
    let mut seeds = cfg.seeds.clone();
    seeds.sort_unstable();
    let results: Vec<_> = seeds
        .par_iter()
        .map(|&seed| {
            let instance = ens.instance(seed)?;
            schedules
                .iter()
                .map(|sched| Ok((*sched, min_gap_with(&Annealer::new(&instance, *sched)?, cfg.grid_points)?)))
                .collect::<lhz_core::Result<Vec<_>>>()
        })
        .collect();
    let mut text = format!("{GAP_CSV_HEADER}\n");
    let mut failures = Vec::new();
    for (seed, result) in seeds.iter().zip(results) {
        match result {
            Ok(rows) => {
                for (sched, gap) in rows {
                    let (r, order) = match sched.kind {
                        DriveKind::Homogeneous => (String::new(), String::new()),
                        DriveKind::Inhomogeneous => (sched.r.to_string(), sched.order.to_string()),
                    };
                    text.push_str(&format!("{seed},{},{r},{order},{},{}\n", sched.kind, gap.gap, gap.location));
                }
            }
            Err(e) => failures.push(Failure::seed(*seed, e.to_string())),
        }
    }
    out.write("gaps.csv", text.as_bytes()).map_err(io)?;
    Ok(failures)
}

fn energy_scan_inner(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<lhz_core::magnetization::MagnetizationScan, CliError> {
    let layout = cfg.layout()?;
    let ms = cfg
        .m_values
        .clone()
        .unwrap_or_else(|| magnetization_grid(layout.n_physical()));
    let result = scan(&layout, &ms, cfg.ms, cfg.c, cfg.first_seed())?;
    let mut buf = Vec::new();
    write_scan_csv(&mut buf, &result, cfg.normalization).map_err(io)?;
    out.write("energy_scan.csv", &buf).map_err(io)?;
    Ok(result)
}

pub fn energy_scan(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    energy_scan_inner(cfg, out)?;
    Ok(Vec::new())
}

pub fn fit(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let result = energy_scan_inner(cfg, out)?;
    let report = FitReport::new(fit_quartic_cubic(&result.rows)?, result.n_physical, cfg.c)?;
    out.write_json("fit.json", &report).map_err(io)?;
    Ok(Vec::new())
}

fn n_label(n: Option<usize>) -> String {
    n.map(|n| n.to_string()).unwrap_or_default()
}

pub fn free_energy(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let mut text = format!("{FREE_ENERGY_CSV_HEADER}\n");
    for (n, fam) in cfg.families()? {
        for m in grid(cfg.m_grid, -1.0, 1.0) {
            let f = fam.value(m, cfg.s, cfg.tau)?;
            text.push_str(&format!("{},{},{},{},{m},{f}\n", cfg.variant, n_label(n), cfg.s, cfg.tau));
        }
    }
    out.write("free_energy.csv", text.as_bytes()).map_err(io)?;
    Ok(Vec::new())
}

#[derive(Debug, Serialize)]
struct CriticalEntry {
    variant: String,
    n_physical: Option<usize>,
    #[serde(flatten)]
    point: Option<CriticalPoint>,
}

pub fn critical(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let mut entries = Vec::new();
    let mut failures = Vec::new();
    for (n, fam) in cfg.families()? {
        let point = match critical_point(&fam) {
            Ok(p) => Some(p),
            Err(e) => {
                failures.push(Failure::size(n, e.to_string()));
                None
            }
        };
        entries.push(CriticalEntry {
            variant: cfg.variant.to_string(),
            n_physical: n,
            point,
        });
    }
    out.write_json("critical.json", &entries).map_err(io)?;
    Ok(failures)
}

#[derive(Debug, Serialize)]
struct EndpointEntry {
    variant: String,
    n_physical: Option<usize>,
    points: usize,
    endpoint: Option<TransitionPoint>,
}

pub fn transition(cfg: &ExperimentConfig, out: &mut OutputSet) -> Result<Vec<Failure>, CliError> {
    let (s_grid, tau_grid) = (grid(cfg.s_grid, 0.0, 1.0), grid(cfg.tau_grid, 0.0, 1.0));
    let mut endpoints = Vec::new();
    for (n, fam) in cfg.families()? {
        let line = transition_line(&fam, &s_grid, &tau_grid)?;
        let name = match n {
            Some(n) => format!("transition_{}_{n}.csv", cfg.variant),
            None => format!("transition_{}.csv", cfg.variant),
        };
        let mut buf = Vec::new();
        write_transition_csv(&mut buf, &line).map_err(io)?;
        out.write(&name, &buf).map_err(io)?;
        endpoints.push(EndpointEntry {
            variant: cfg.variant.to_string(),
            n_physical: n,
            points: line.points.len(),
            endpoint: line.endpoint,
        });
    }
    out.write_json("transition_endpoints.json", &endpoints).map_err(io)?;
    Ok(Vec::new())
}

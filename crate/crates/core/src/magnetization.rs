//! Constraint energy as a function of magnetization.
//!
//! Closed forms in terms of logical or physical qubit counts, a sampler over
//! fixed-magnetization shells and the `a m^4 + b m^3` fit.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lhz::{LhzLayout, Representation};

/// Quartic and cubic coefficients of the closed form, per unit constraint strength,
/// for `n_logical` logical spins.
fn logical_coefficients(n_logical: f64) -> (f64, f64) {
    (
        -(n_logical * n_logical / 2.0 - 2.5 * n_logical + 3.0),
        -(n_logical - 2.0),
    )
}

/// Mean constraint energy at magnetization `m`, by logical qubit count.
pub fn analytic_energy_logical(m: f64, n_logical: usize, c: f64) -> Result<f64> {
    if n_logical < 3 {
        return Err(invalid(format!("n_logical must be >= 3, got {n_logical}")));
    }
    let (a, b) = logical_coefficients(n_logical as f64);
    Ok(c * (a * m.powi(4) + b * m.powi(3)))
}

/// `(a, b)` of `a m^4 + b m^3` in terms of the physical qubit count.
pub fn physical_coefficients(n_physical: usize, c: f64) -> Result<(f64, f64)> {
    let n = n_physical as f64;
    let root = (1.0 + 8.0 * n).sqrt();
    let n_l = (1.0 + root) / 2.0;
    if n_physical < 3 || (n_l.round() - n_l).abs() > 1e-9 {
        return Err(invalid(format!(
            "n_physical = {n_physical} is not N(N-1)/2 for an integer N >= 3"
        )));
    }
    Ok((-c * (n - root + 2.0), -c * ((0.25 + 2.0 * n).sqrt() - 1.5)))
}

/// Mean constraint energy at magnetization `m`, by physical qubit count.
pub fn analytic_energy_physical(m: f64, n_physical: usize, c: f64) -> Result<f64> {
    let (a, b) = physical_coefficients(n_physical, c)?;
    Ok(a * m.powi(4) + b * m.powi(3))
}

/// Every magnetization reachable with `n_physical` spins, ascending.
pub fn magnetization_grid(n_physical: usize) -> Vec<f64> {
    let n = n_physical as f64;
    (0..=n_physical).map(|u| (2.0 * u as f64 - n) / n).collect()
}

/// Number of up spins for magnetization `m`, if admissible.
pub fn up_count(n_physical: usize, m: f64) -> Result<usize> {
    let n = n_physical as f64;
    let u = n * (1.0 + m) / 2.0;
    let rounded = u.round();
    if !(-1.0..=1.0).contains(&m) || (u - rounded).abs() > 1e-9 * n.max(1.0) {
        return Err(invalid(format!(
            "m = {m} is not an admissible magnetization for {n_physical} spins"
        )));
    }
    Ok(rounded as usize)
}

/// Sample statistics of the constraint energy on one shell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellStats {
    pub m: f64,
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnetizationScan {
    pub n_physical: usize,
    pub ms: usize,
    pub constraint_strength: f64,
    pub seed: u64,
    pub rows: Vec<ShellStats>,
}

/// Flattened plaquettes for fast repeated evaluation.
struct Constraints {
    members: Vec<[usize; 4]>,
    sizes: Vec<u8>,
}

impl Constraints {
    fn of(layout: &LhzLayout) -> Self {
        let mut members = Vec::with_capacity(layout.n_constraints());
        let mut sizes = Vec::with_capacity(layout.n_constraints());
        for p in layout.plaquettes() {
            let mut m = [0; 4];
            m[..p.members.len()].copy_from_slice(&p.members);
            members.push(m);
            sizes.push(p.members.len() as u8);
        }
        Self { members, sizes }
    }

    /// Sum of plaquette parities; energy is `-C` times this.
    fn parity_sum(&self, spins: &[i8]) -> i64 {
        self.members
            .iter()
            .zip(&self.sizes)
            .map(|(m, &size)| {
                let mut p = spins[m[0]] * spins[m[1]] * spins[m[2]];
                if size == 4 {
                    p *= spins[m[3]];
                }
                p as i64
            })
            .sum()
    }
}

fn direct_layout(layout: &LhzLayout) -> Result<LhzLayout> {
    match layout.representation() {
        Representation::Direct => Ok(layout.clone()),
        Representation::Auxiliary => LhzLayout::new(layout.n_logical(), Representation::Direct),
    }
}

fn shell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform draws from a fixed-magnetization shell by partial Fisher-Yates
/// shuffles: only the minority spins are placed each time.
struct ShellSampler {
    positions: Vec<usize>,
    spins: Vec<i8>,
    minority: usize,
    base: i8,
    flip: i8,
}

impl ShellSampler {
    fn new(n_physical: usize, m: f64) -> Result<Self> {
        let n_up = up_count(n_physical, m)?;
        let (minority, base, flip) = if n_up <= n_physical - n_up {
            (n_up, -1i8, 1i8)
        } else {
            (n_physical - n_up, 1, -1)
        };
        Ok(Self {
            positions: (0..n_physical).collect(),
            spins: vec![base; n_physical],
            minority,
            base,
            flip,
        })
    }

    fn draw(&mut self, rng: &mut ChaCha8Rng) -> &[i8] {
        self.spins.fill(self.base);
        let (chosen, _) = self.positions.partial_shuffle(rng, self.minority);
        for &k in chosen.iter() {
            self.spins[k] = self.flip;
        }
        &self.spins
    }
}

fn sample_shell(
    constraints: &Constraints,
    n_physical: usize,
    m: f64,
    ms: usize,
    c: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ShellStats> {
    let mut sampler = ShellSampler::new(n_physical, m)?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..ms {
        let e = -c * constraints.parity_sum(sampler.draw(rng)) as f64;
        sum += e;
        sum_sq += e * e;
    }
    let n = ms as f64;
    let mean = sum / n;
    let var = if ms > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std = var.sqrt();
    Ok(ShellStats {
        m,
        mean,
        std,
        sem: std / n.sqrt(),
    })
}

/// The configurations `sample_energy` would draw for the same arguments.
pub fn draw_configurations(layout: &LhzLayout, m: f64, ms: usize, seed: u64) -> Result<Vec<Vec<i8>>> {
    let n_p = layout.n_physical();
    let mut sampler = ShellSampler::new(n_p, m)?;
    let mut rng = shell_rng(seed, up_count(n_p, m)? as u64);
    Ok((0..ms).map(|_| sampler.draw(&mut rng).to_vec()).collect())
}

/// Mean, standard deviation and standard error of the constraint energy over
/// `ms` uniform draws from the shell of magnetization `m`.
///
/// Auxiliary spins are dropped: the sampler works on the direct layout.
pub fn sample_energy(layout: &LhzLayout, m: f64, ms: usize, c: f64, seed: u64) -> Result<ShellStats> {
    if ms == 0 {
        return Err(invalid("ms must be >= 1"));
    }
    let direct = direct_layout(layout)?;
    let constraints = Constraints::of(&direct);
    let mut rng = shell_rng(seed, up_count(direct.n_physical(), m)? as u64);
    sample_shell(&constraints, direct.n_physical(), m, ms, c, &mut rng)
}

/// Samples every magnetization in `m_values`. Each shell draws from its own
/// stream keyed by its up-spin count, so rows do not depend on which other
/// magnetizations are requested or on evaluation order.
pub fn scan(layout: &LhzLayout, m_values: &[f64], ms: usize, c: f64, seed: u64) -> Result<MagnetizationScan> {
    if ms == 0 {
        return Err(invalid("ms must be >= 1"));
    }
    let direct = direct_layout(layout)?;
    let n_p = direct.n_physical();
    let constraints = Constraints::of(&direct);
    let rows = m_values
        .par_iter()
        .map(|&m| {
            let mut rng = shell_rng(seed, up_count(n_p, m)? as u64);
            sample_shell(&constraints, n_p, m, ms, c, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(MagnetizationScan {
        n_physical: n_p,
        ms,
        constraint_strength: c,
        seed,
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub a: f64,
    pub b: f64,
    /// Root-mean-square misfit.
    pub residual: f64,
}

/// Least-squares fit of `mean = a m^4 + b m^3`.
pub fn fit_quartic_cubic(rows: &[ShellStats]) -> Result<FitResult> {
    let mut distinct: Vec<f64> = rows.iter().map(|r| r.m).collect();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < 3 {
        return Err(invalid("fit needs at least three distinct magnetizations"));
    }
    let (mut s44, mut s43, mut s33, mut y4, mut y3) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for r in rows {
        let (m3, m4) = (r.m.powi(3), r.m.powi(4));
        s44 += m4 * m4;
        s43 += m4 * m3;
        s33 += m3 * m3;
        y4 += m4 * r.mean;
        y3 += m3 * r.mean;
    }
    let det = s44 * s33 - s43 * s43;
    if det.abs() <= 1e-12 * s44 * s33 {
        return Err(Error::DegenerateFit);
    }
    let a = (y4 * s33 - y3 * s43) / det;
    let b = (s44 * y3 - s43 * y4) / det;
    let sq: f64 = rows
        .iter()
        .map(|r| (r.mean - a * r.m.powi(4) - b * r.m.powi(3)).powi(2))
        .sum();
    Ok(FitResult {
        a,
        b,
        residual: (sq / rows.len() as f64).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// `std / |mean|` on the same shell.
    AbsMean,
    /// `std / |E(m = 1)|`.
    MaxEnergy,
}

impl std::str::FromStr for Normalization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "abs_mean" | "absmean" => Ok(Normalization::AbsMean),
            "max_energy" | "maxenergy" => Ok(Normalization::MaxEnergy),
            other => Err(invalid(format!("unknown normalization '{other}'"))),
        }
    }
}

impl std::fmt::Display for Normalization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Normalization::AbsMean => "abs_mean",
            Normalization::MaxEnergy => "max_energy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelativeError {
    pub m: f64,
    /// Spread of single draws; `None` where the normalizer vanishes.
    pub rel_err: Option<f64>,
    /// Same normalization applied to the standard error of the mean.
    pub rel_err_sem: Option<f64>,
}

/// Relative error of the sampled energies over the whole magnetization grid.
pub fn relative_error_scan(
    layout: &LhzLayout,
    ms: usize,
    c: f64,
    seed: u64,
    normalization: Normalization,
) -> Result<(MagnetizationScan, Vec<RelativeError>)> {
    let n_p = layout.n_physical();
    let scan = scan(layout, &magnetization_grid(n_p), ms, c, seed)?;
    let rel = relative_errors(&scan, normalization);
    Ok((scan, rel))
}

pub fn relative_errors(scan: &MagnetizationScan, normalization: Normalization) -> Vec<RelativeError> {
    let top = scan
        .rows
        .iter()
        .find(|r| r.m == 1.0)
        .map(|r| r.mean.abs());
    scan.rows
        .iter()
        .map(|r| {
            let denom = match normalization {
                Normalization::AbsMean => Some(r.mean.abs()),
                Normalization::MaxEnergy => top,
            }
            .filter(|d| *d >= 1e-12);
            RelativeError {
                m: r.m,
                rel_err: denom.map(|d| r.std / d),
                rel_err_sem: denom.map(|d| r.sem / d),
            }
        })
        .collect()
}

pub const SCAN_CSV_HEADER: &str = "n_physical,m,ms,mean_E,std_E,sem_E,rel_err,rel_err_sem,normalization";

pub fn write_scan_csv<W: Write>(
    mut w: W,
    scan: &MagnetizationScan,
    normalization: Normalization,
) -> std::io::Result<()> {
    writeln!(w, "{SCAN_CSV_HEADER}")?;
    let fmt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (row, rel) in scan.rows.iter().zip(relative_errors(scan, normalization)) {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{}",
            scan.n_physical,
            row.m,
            scan.ms,
            row.mean,
            row.std,
            row.sem,
            fmt(rel.rel_err),
            fmt(rel.rel_err_sem),
            normalization
        )?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub a: f64,
    pub b: f64,
    pub a_analytic: f64,
    pub b_analytic: f64,
    pub residual: f64,
}

impl FitReport {
    pub fn new(fit: FitResult, n_physical: usize, c: f64) -> Result<Self> {
        let (a_analytic, b_analytic) = physical_coefficients(n_physical, c)?;
        Ok(Self {
            a: fit.a,
            b: fit.b,
            a_analytic,
            b_analytic,
            residual: fit.residual,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(analytic_energy_logical(1.0, 4, 2.0).unwrap(), -6.0);
        assert_eq!(analytic_energy_logical(-1.0, 4, 2.0).unwrap(), 2.0);
        assert_eq!(analytic_energy_logical(0.0, 17, 3.0).unwrap(), 0.0);
        assert!((analytic_energy_physical(1.0, 6, 2.0).unwrap() + 6.0).abs() < 1e-12);
        assert!(analytic_energy_physical(0.5, 7, 1.0).is_err());
        assert!(analytic_energy_logical(0.5, 2, 1.0).is_err());
        for i in 0..=100 {
            let m = -1.0 + 0.02 * i as f64;
            let a = analytic_energy_logical(m, 4, 2.0).unwrap();
            let b = analytic_energy_physical(m, 6, 2.0).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn quartic_dominates_at_large_size() {
        let (a, b) = physical_coefficients(5886, 1.0).unwrap();
        assert!(a / b > 40.0);
        let (q, c) = (a * 0.5f64.powi(4), b * 0.5f64.powi(3));
        assert!(q / c > 20.0);
    }

    #[test]
    fn grid() {
        let g = magnetization_grid(6);
        let expect = [-1.0, -2.0 / 3.0, -1.0 / 3.0, 0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0];
        assert_eq!(g.len(), 7);
        for (a, b) in g.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        assert_eq!(magnetization_grid(4).len(), 5);
        assert_eq!(up_count(6, 1.0 / 3.0).unwrap(), 4);
        assert!(up_count(6, 0.1).is_err());
    }

    #[test]
    fn endpoints_have_zero_variance() {
        let layout = LhzLayout::new(4, Representation::Direct).unwrap();
        let top = sample_energy(&layout, 1.0, 50, 2.0, 3).unwrap();
        assert_eq!((top.mean, top.std), (-6.0, 0.0));
        let bottom = sample_energy(&layout, -1.0, 50, 2.0, 3).unwrap();
        // one four-body and two three-body plaquettes: -2 * 1 + 2 * 2
        assert_eq!((bottom.mean, bottom.std), (2.0, 0.0));
        assert!(sample_energy(&layout, 0.1, 5, 2.0, 1).is_err());
        assert!(sample_energy(&layout, 0.0, 0, 2.0, 1).is_err());
    }

    #[test]
    fn auxiliary_layout_is_sampled_directly() {
        let aux = LhzLayout::new(4, Representation::Auxiliary).unwrap();
        let direct = LhzLayout::new(4, Representation::Direct).unwrap();
        assert_eq!(
            sample_energy(&aux, 1.0 / 3.0, 100, 2.0, 9).unwrap(),
            sample_energy(&direct, 1.0 / 3.0, 100, 2.0, 9).unwrap()
        );
    }

    #[test]
    fn fit_recovers_exact_model() {
        let rows: Vec<ShellStats> = magnetization_grid(6)
            .into_iter()
            .map(|m| ShellStats {
                m,
                mean: analytic_energy_physical(m, 6, 2.0).unwrap(),
                std: 0.0,
                sem: 0.0,
            })
            .collect();
        let fit = fit_quartic_cubic(&rows).unwrap();
        let (a, b) = physical_coefficients(6, 2.0).unwrap();
        assert!((fit.a - a).abs() < 1e-10 && (fit.b - b).abs() < 1e-10);
        assert!(fit.residual < 1e-10);

        let zeros: Vec<ShellStats> = rows.iter().map(|r| ShellStats { mean: 0.0, ..*r }).collect();
        let fit = fit_quartic_cubic(&zeros).unwrap();
        assert_eq!((fit.a, fit.b), (0.0, 0.0));
        assert!(fit_quartic_cubic(&rows[..2]).is_err());
    }

    #[test]
    fn relative_error_normalizations() {
        let layout = LhzLayout::new(5, Representation::Direct).unwrap();
        let (scan, rel) = relative_error_scan(&layout, 200, 2.0, 4, Normalization::MaxEnergy).unwrap();
        assert_eq!(rel.len(), 11);
        assert_eq!(rel[0].rel_err, Some(0.0));
        assert_eq!(rel[10].rel_err, Some(0.0));
        let abs = relative_errors(&scan, Normalization::AbsMean);
        assert_eq!(abs[10].rel_err, Some(0.0));
        let mut buf = Vec::new();
        write_scan_csv(&mut buf, &scan, Normalization::MaxEnergy).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 12);
        assert!(text.lines().nth(1).unwrap().ends_with(",max_energy"));
    }

    #[test]
    fn scan_is_order_independent() {
        let layout = LhzLayout::new(5, Representation::Direct).unwrap();
        let ms = [0.2, -0.2, 0.6];
        let forward = scan(&layout, &ms, 50, 1.0, 11).unwrap();
        let single = scan(&layout, &ms[1..2], 50, 1.0, 11).unwrap();
        assert_eq!(forward.rows[1], single.rows[0]);
        assert_eq!(single.rows[0], sample_energy(&layout, -0.2, 50, 1.0, 11).unwrap());
    }
}

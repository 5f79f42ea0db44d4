//! Static-approximation free energies `f(m; s, tau)` of the parity lattice.
//!
//! `s` weights the problem Hamiltonian and `tau` is the fraction of qubits whose
//! transverse field has already been switched off. Four variants are provided:
//! the thermodynamic limit, finite `N_p` at fixed `C`, finite `N_p` with
//! `C = sqrt(N_p)`, and finite `N_p` at inverse temperature `beta` with an
//! explicit set of local fields.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

use super::jet::{Jet, Scalar};
use super::quadrature::GaussLegendre;

pub const DEFAULT_QUAD_NODES: usize = 64;
pub const MIN_QUAD_NODES: usize = 16;

/// Distribution of the local fields `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JDistribution {
    Uniform { low: f64, high: f64 },
    PointMass { j: f64 },
}

impl Default for JDistribution {
    fn default() -> Self {
        JDistribution::Uniform { low: -1.0, high: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum Variant {
    Thermo {
        c: f64,
    },
    FiniteSize {
        c: f64,
        n_physical: usize,
    },
    ScaledC {
        n_physical: usize,
    },
    /// `beta = inf` gives the zero-temperature sum over qubits.
    FiniteTemperature {
        c: f64,
        n_physical: usize,
        beta: f64,
        j_samples: Vec<f64>,
    },
}

impl Variant {
    pub fn name(&self) -> &'static str {
        match self {
            Variant::Thermo { .. } => "thermo",
            Variant::FiniteSize { .. } => "finite_size",
            Variant::ScaledC { .. } => "scaled_c",
            Variant::FiniteTemperature { .. } => "finite_temperature",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FreeEnergyFamily {
    #[serde(flatten)]
    variant: Variant,
    j_dist: JDistribution,
    quad_nodes_j: usize,
    #[serde(skip)]
    rule: GaussLegendre,
}

fn check_triangular(n: usize) -> Result<()> {
    let n_l = (1.0 + (1.0 + 8.0 * n as f64).sqrt()) / 2.0;
    if n < 3 || (n_l.round() - n_l).abs() > 1e-9 {
        return Err(invalid(format!(
            "n_physical = {n} is not N(N-1)/2 for an integer N >= 3"
        )));
    }
    Ok(())
}

fn check_strength(c: f64) -> Result<()> {
    if !c.is_finite() {
        return Err(invalid(format!("constraint strength must be finite, got {c}")));
    }
    Ok(())
}

impl FreeEnergyFamily {
    pub fn new(variant: Variant, j_dist: JDistribution, quad_nodes_j: usize) -> Result<Self> {
        match &variant {
            Variant::Thermo { c } => check_strength(*c)?,
            Variant::FiniteSize { c, n_physical } => {
                check_strength(*c)?;
                check_triangular(*n_physical)?;
            }
            Variant::ScaledC { n_physical } => check_triangular(*n_physical)?,
            Variant::FiniteTemperature {
                c,
                n_physical,
                beta,
                j_samples,
            } => {
                check_strength(*c)?;
                check_triangular(*n_physical)?;
                if !(*beta > 0.0) {
                    return Err(invalid(format!("beta must be positive, got {beta}")));
                }
                if j_samples.len() != *n_physical {
                    return Err(invalid(format!(
                        "need one local field per qubit: {} for {n_physical} qubits",
                        j_samples.len()
                    )));
                }
            }
        }
        match j_dist {
            JDistribution::Uniform { low, high } if !(low < high) || !low.is_finite() || !high.is_finite() => {
                return Err(invalid(format!("empty J interval [{low}, {high}]")));
            }
            JDistribution::PointMass { j } if !j.is_finite() => {
                return Err(invalid("J point mass must be finite"));
            }
            _ => {}
        }
        if quad_nodes_j < MIN_QUAD_NODES {
            return Err(invalid(format!(
                "quadrature needs at least {MIN_QUAD_NODES} nodes, got {quad_nodes_j}"
            )));
        }
        Ok(Self {
            variant,
            j_dist,
            quad_nodes_j,
            rule: GaussLegendre::new(quad_nodes_j),
        })
    }

    pub fn thermo(c: f64, j_dist: JDistribution) -> Result<Self> {
        Self::new(Variant::Thermo { c }, j_dist, DEFAULT_QUAD_NODES)
    }

    pub fn finite_size(c: f64, n_physical: usize, j_dist: JDistribution) -> Result<Self> {
        Self::new(Variant::FiniteSize { c, n_physical }, j_dist, DEFAULT_QUAD_NODES)
    }

    pub fn scaled(n_physical: usize, j_dist: JDistribution) -> Result<Self> {
        Self::new(Variant::ScaledC { n_physical }, j_dist, DEFAULT_QUAD_NODES)
    }

    pub fn finite_temperature(c: f64, n_physical: usize, beta: f64, j_samples: Vec<f64>) -> Result<Self> {
        Self::new(
            Variant::FiniteTemperature {
                c,
                n_physical,
                beta,
                j_samples,
            },
            JDistribution::default(),
            DEFAULT_QUAD_NODES,
        )
    }

    /// Same family with a different J quadrature size.
    pub fn with_quad_nodes(&self, quad_nodes_j: usize) -> Result<Self> {
        Self::new(self.variant.clone(), self.j_dist, quad_nodes_j)
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn j_dist(&self) -> JDistribution {
        self.j_dist
    }

    pub fn quad_nodes_j(&self) -> usize {
        self.quad_nodes_j
    }

    /// `f(m)` without range checks; `m` may be a jet.
    pub fn evaluate<S: Scalar>(&self, m: S, s: f64, tau: f64) -> S {
        match &self.variant {
            Variant::Thermo { c } => {
                let u0 = m.powi(3) * (4.0 * c);
                let avg = self.average(None, |j| {
                    let u = u0 + j;
                    u * (-tau * s) - ((u * u) * (s * s) + 1.0).sqrt() * (1.0 - tau)
                });
                m.powi(4) * (3.0 * s * c) + avg
            }
            Variant::FiniteSize { c, n_physical } => {
                let (p, q) = finite_size_terms(m, *c, *n_physical as f64);
                self.zero_temperature(p, q, s, tau, *n_physical as f64)
            }
            Variant::ScaledC { n_physical } => {
                let (p, q) = scaled_terms(m, *n_physical as f64);
                self.zero_temperature(p, q, s, tau, *n_physical as f64)
            }
            Variant::FiniteTemperature {
                c,
                n_physical,
                beta,
                j_samples,
            } => {
                let n = *n_physical as f64;
                let (p, q) = finite_size_terms(m, *c, n);
                let mut sum = S::constant(0.0);
                for (k, &j) in j_samples.iter().enumerate() {
                    let h = (k as f64 + 1.0 - n * tau).clamp(0.0, 1.0);
                    let u = q + j;
                    let x = ((u * u) * (s * s) + h * h).sqrt();
                    sum = sum + if beta.is_infinite() { x } else { ln_2cosh(x * *beta) * beta.recip() };
                }
                p * s - sum * (1.0 / n)
            }
        }
    }

    fn zero_temperature<S: Scalar>(&self, p: S, q: S, s: f64, tau: f64, n: f64) -> S {
        let avg = self.average(Some(-q.value()), |j| {
            let a = (q + j).abs() * s;
            label_integral(a, tau, n)
        });
        p * s - avg
    }

    /// `E_J[g(J)]`; a uniform interval is split at `kink` when it lies inside.
    fn average<S: Scalar, G: Fn(f64) -> S>(&self, kink: Option<f64>, g: G) -> S {
        match self.j_dist {
            JDistribution::PointMass { j } => g(j),
            JDistribution::Uniform { low, high } => {
                let mut total = S::constant(0.0);
                let mut integrate = |a: f64, b: f64| {
                    for (x, w) in self.rule.mapped(a, b) {
                        total = total + g(x) * w;
                    }
                };
                match kink {
                    Some(k) if k > low && k < high => {
                        integrate(low, k);
                        integrate(k, high);
                    }
                    _ => integrate(low, high),
                }
                total * (1.0 / (high - low))
            }
        }
    }

    fn check(&self, m: f64, s: f64, tau: f64) -> Result<()> {
        if !(-1.0..=1.0).contains(&m) {
            return Err(invalid(format!("m = {m} outside [-1, 1]")));
        }
        if !(0.0..=1.0).contains(&s) || !(0.0..=1.0).contains(&tau) {
            return Err(invalid(format!("(s, tau) = ({s}, {tau}) outside the unit square")));
        }
        Ok(())
    }

    pub fn value(&self, m: f64, s: f64, tau: f64) -> Result<f64> {
        self.check(m, s, tau)?;
        Ok(self.evaluate(m, s, tau))
    }

    /// `[f, f', f'', f''', f'''']` with respect to `m`.
    pub fn derivatives(&self, m: f64, s: f64, tau: f64) -> Result<[f64; 5]> {
        self.check(m, s, tau)?;
        Ok(self.m_derivatives(m, s, tau))
    }

    pub(crate) fn m_derivatives(&self, m: f64, s: f64, tau: f64) -> [f64; 5] {
        self.evaluate(Jet::variable(m), s, tau).derivatives()
    }
}

/// `ln(2 cosh x)` without overflow.
pub fn ln_2cosh<S: Scalar>(x: S) -> S {
    let a = x.abs();
    a + (a * -2.0).exp().ln_1p()
}

/// Quartic/cubic term `P(m)` and shift `Q(m)` at fixed constraint strength.
fn finite_size_terms<S: Scalar>(m: S, c: f64, n: f64) -> (S, S) {
    let (m2, m3, m4) = (m * m, m.powi(3), m.powi(4));
    let p4 = 3.0 + (6.0 - (9.0 + 72.0 * n).sqrt()) / n;
    let p3 = ((1.0 + 8.0 * n).sqrt() - 3.0) / n;
    let q3 = 4.0 - ((16.0 + 128.0 * n).sqrt() + 8.0) / n;
    let q2 = ((2.25 + 18.0 * n).sqrt() - 4.5) / n;
    (
        (m4 * p4 + m3 * p3) * c,
        (m3 * q3 + m2 * q2) * c,
    )
}

/// `P(m)` and `Q(m)` with `C = sqrt(N_p)`, expanded in powers of `1 / sqrt(N_p)`.
fn scaled_terms<S: Scalar>(m: S, n: f64) -> (S, S) {
    let (m2, m3, m4) = (m * m, m.powi(3), m.powi(4));
    let rn = n.sqrt();
    let r2 = std::f64::consts::SQRT_2;
    let r8 = 8f64.sqrt();
    let tail = m3 - m4 * 3.0;
    let p = m4 * (3.0 * rn)
        + tail * r8
        + (m4 * (6.0 - 3.0 / (4.0 * r2)) + m3 * (1.0 / (4.0 * r2) - 3.0)) * (1.0 / rn)
        - tail * (1.0 / (128.0 * r2 * n));
    let shift = m2 * 1.5 - m3 * 4.0;
    let q = m3 * (4.0 * rn) + shift * r8
        - (m3 * (8.0 / r2) - m2 * (3.0 / (8.0 * r2) - 4.5)) * (1.0 / rn)
        - shift * (1.0 / (128.0 * r2 * n));
    (p, q)
}

/// `G(y) = int_0^y sqrt(a^2 + t^2) dt`.
fn ramp_antiderivative<S: Scalar>(a: S, y: f64) -> S {
    if y == 0.0 {
        return S::constant(0.0);
    }
    if a.value() == 0.0 {
        return S::constant(0.5 * y * y);
    }
    let a2 = a * a;
    ((a2 + y * y).sqrt() * y + a2 * (S::constant(y) / a).asinh()) * 0.5
}

/// `int_0^1 sqrt(a^2 + h(x)^2) dx` for `h(x) = clamp(n (x - tau) + 1, 0, 1)`.
fn label_integral<S: Scalar>(a: S, tau: f64, n: f64) -> S {
    let off = (tau - 1.0 / n).max(0.0);
    let y0 = (1.0 - n * tau).max(0.0);
    let ramp = (ramp_antiderivative(a, 1.0) - ramp_antiderivative(a, y0)) * (1.0 / n);
    a * off + ramp + (a * a + 1.0).sqrt() * (1.0 - tau)
}

/// Thermodynamic-limit free energy.
pub fn free_energy_thermo(m: f64, s: f64, tau: f64, c: f64, j_dist: JDistribution) -> Result<f64> {
    FreeEnergyFamily::thermo(c, j_dist)?.value(m, s, tau)
}

/// Finite-size free energy at fixed constraint strength.
pub fn free_energy_finite(
    m: f64,
    s: f64,
    tau: f64,
    c: f64,
    n_physical: usize,
    j_dist: JDistribution,
) -> Result<f64> {
    FreeEnergyFamily::finite_size(c, n_physical, j_dist)?.value(m, s, tau)
}

/// Finite-size free energy with `C = sqrt(N_p)`.
pub fn free_energy_scaled(m: f64, s: f64, tau: f64, n_physical: usize, j_dist: JDistribution) -> Result<f64> {
    FreeEnergyFamily::scaled(n_physical, j_dist)?.value(m, s, tau)
}

/// Finite-size free energy at inverse temperature `beta` for explicit fields `J_k`.
pub fn free_energy_finite_temperature(
    m: f64,
    s: f64,
    tau: f64,
    c: f64,
    n_physical: usize,
    beta: f64,
    j_samples: &[f64],
) -> Result<f64> {
    FreeEnergyFamily::finite_temperature(c, n_physical, beta, j_samples.to_vec())?.value(m, s, tau)
}

//! Transverse-field driving protocols.
//!
//! The inhomogeneous protocol switches qubits off one at a time: qubit of rank
//! `k` ramps from 1 to 0 while `s^r` crosses `[k/n, (k+1)/n]`. Over the whole
//! sweep the switched-off fraction is `tau = s^r`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(invalid(format!("s = {s} outside [0, 1]")))
    }
}

fn check_rank(k: usize, r: f64, n_total: usize) -> Result<()> {
    if n_total == 0 || k >= n_total {
        return Err(invalid(format!("rank {k} outside 0..{n_total}")));
    }
    if !(r > 0.0) || !r.is_finite() {
        return Err(invalid(format!("r must be positive, got {r}")));
    }
    Ok(())
}

/// Field on the qubit of switch-off rank `k` (0-based) at normalized time `s`.
pub fn h_inhom(k: usize, s: f64, r: f64, n_total: usize) -> Result<f64> {
    check_rank(k, r, n_total)?;
    check_s(s)?;
    Ok(ramp(k, s.powf(r), n_total))
}

#[inline]
fn ramp(k: usize, tau: f64, n_total: usize) -> f64 {
    ((k + 1) as f64 - n_total as f64 * tau).clamp(0.0, 1.0)
}

/// Homogeneous driver amplitude `1 - s`.
pub fn h_hom(s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(1.0 - s)
}

/// Continuous-label version of the staircase at qubit label `x in [0, 1]`.
pub fn h_continuum(x: f64, s: f64, r: f64, n_p: usize) -> f64 {
    (n_p as f64 * (x - s.powf(r)) + 1.0).clamp(0.0, 1.0)
}

/// Thermodynamic-limit step: fields with label above `tau` are on.
pub fn h_step(x: f64, tau: f64) -> f64 {
    if x > tau {
        1.0
    } else {
        0.0
    }
}

/// Interval of `s` over which rank `k` switches off.
pub fn switch_window(k: usize, r: f64, n_total: usize) -> Result<(f64, f64)> {
    check_rank(k, r, n_total)?;
    let n = n_total as f64;
    Ok(((k as f64 / n).powf(1.0 / r), ((k + 1) as f64 / n).powf(1.0 / r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DriveKind {
    Homogeneous,
    Inhomogeneous,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SwitchOrder {
    /// Linear qubit order: bottom-left first, auxiliaries last.
    Ascending,
    /// Exact reversal of the linear order.
    Descending,
}

impl std::str::FromStr for DriveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "homogeneous" | "hom" => Ok(DriveKind::Homogeneous),
            "inhomogeneous" | "inhom" => Ok(DriveKind::Inhomogeneous),
            other => Err(invalid(format!("unknown schedule kind '{other}'"))),
        }
    }
}

impl std::str::FromStr for SwitchOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ascending" | "asc" => Ok(SwitchOrder::Ascending),
            "descending" | "desc" => Ok(SwitchOrder::Descending),
            other => Err(invalid(format!("unknown switch order '{other}'"))),
        }
    }
}

impl std::fmt::Display for DriveKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DriveKind::Homogeneous => "homogeneous",
            DriveKind::Inhomogeneous => "inhomogeneous",
        })
    }
}

impl std::fmt::Display for SwitchOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SwitchOrder::Ascending => "ascending",
            SwitchOrder::Descending => "descending",
        })
    }
}

/// A driving protocol. `r` and `order` only matter for inhomogeneous driving.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub kind: DriveKind,
    pub r: f64,
    pub order: SwitchOrder,
}

impl Schedule {
    pub fn homogeneous() -> Self {
        Self {
            kind: DriveKind::Homogeneous,
            r: 1.0,
            order: SwitchOrder::Ascending,
        }
    }

    pub fn inhomogeneous(r: f64, order: SwitchOrder) -> Result<Self> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(invalid(format!("r must be positive, got {r}")));
        }
        Ok(Self {
            kind: DriveKind::Inhomogeneous,
            r,
            order,
        })
    }

    /// Switch-off rank of spin `spin` among `n_driven`.
    pub fn rank(&self, spin: usize, n_driven: usize) -> usize {
        match self.order {
            SwitchOrder::Ascending => spin,
            SwitchOrder::Descending => n_driven - 1 - spin,
        }
    }

    /// Transverse-field amplitude of every driven spin at `s`.
    pub fn fields(&self, s: f64, n_driven: usize) -> Vec<f64> {
        match self.kind {
            DriveKind::Homogeneous => vec![1.0 - s; n_driven],
            DriveKind::Inhomogeneous => {
                let tau = s.powf(self.r);
                (0..n_driven)
                    .map(|spin| ramp(self.rank(spin, n_driven), tau, n_driven))
                    .collect()
            }
        }
    }

    /// Points in `[0, 1]` where some field changes slope, including both ends.
    pub fn breakpoints(&self, n_driven: usize) -> Vec<f64> {
        match self.kind {
            DriveKind::Homogeneous => vec![0.0, 1.0],
            DriveKind::Inhomogeneous => (0..=n_driven)
                .map(|k| (k as f64 / n_driven as f64).powf(1.0 / self.r))
                .collect(),
        }
    }

    /// `homogeneous` or e.g. `inhomogeneous(r=0.5,ascending)`.
    pub fn label(&self) -> String {
        match self.kind {
            DriveKind::Homogeneous => self.kind.to_string(),
            DriveKind::Inhomogeneous => format!("{}(r={},{})", self.kind, self.r, self.order),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn staircase_examples() {
        assert_eq!(h_inhom(0, 0.015625, 0.5, 8).unwrap(), 0.0);
        for k in 0..8 {
            assert_eq!(h_inhom(k, 0.0, 0.5, 8).unwrap(), 1.0);
            assert_eq!(h_inhom(k, 1.0, 0.5, 8).unwrap(), 0.0);
        }
        for i in 0..100 {
            let s = 0.765625 * i as f64 / 100.0;
            assert_eq!(h_inhom(7, s, 0.5, 8).unwrap(), 1.0);
        }
        assert!(h_inhom(8, 0.5, 0.5, 8).is_err());
        assert!(h_inhom(0, 1.5, 0.5, 8).is_err());
        assert!(h_inhom(0, 0.5, 0.0, 8).is_err());
    }

    #[test]
    fn homogeneous_amplitude() {
        assert_eq!(h_hom(0.0).unwrap(), 1.0);
        assert_eq!(h_hom(1.0).unwrap(), 0.0);
        assert_eq!(h_hom(0.25).unwrap(), 0.75);
        assert!(h_hom(-0.1).is_err());
    }

    #[test]
    fn continuum_and_step() {
        assert_eq!(h_continuum(1.0, 0.0, 0.5, 10), 1.0);
        assert_eq!(h_continuum(0.0, 1.0, 0.5, 10), 0.0);
        assert_eq!(h_continuum(0.5, 0.25, 0.5, 100), 1.0);
        assert_eq!(h_step(0.9, 0.3), 1.0);
        assert_eq!(h_step(0.1, 0.3), 0.0);
        let n = 10_000;
        let integral: f64 = (0..n).map(|i| h_step((i as f64 + 0.5) / n as f64, 0.3)).sum::<f64>() / n as f64;
        assert!((integral - 0.7).abs() < 1e-12);
    }

    #[test]
    fn windows_tile_the_sweep() {
        assert_eq!(switch_window(0, 0.5, 8).unwrap(), (0.0, 0.015625));
        assert_eq!(switch_window(7, 0.5, 8).unwrap(), (0.765625, 1.0));
        for k in 0..7 {
            let (_, end) = switch_window(k, 0.5, 8).unwrap();
            let (start, _) = switch_window(k + 1, 0.5, 8).unwrap();
            assert_eq!(end, start);
        }
    }

    #[test]
    fn descending_reverses_ranks() {
        let asc = Schedule::inhomogeneous(0.5, SwitchOrder::Ascending).unwrap();
        let desc = Schedule::inhomogeneous(0.5, SwitchOrder::Descending).unwrap();
        let s = 0.3;
        let a = asc.fields(s, 8);
        let mut d = desc.fields(s, 8);
        d.reverse();
        assert_eq!(a, d);
        assert_eq!(Schedule::homogeneous().fields(0.25, 3), vec![0.75; 3]);
    }

    #[test]
    fn parse_names() {
        assert_eq!("inhom".parse::<DriveKind>().unwrap(), DriveKind::Inhomogeneous);
        assert_eq!("Descending".parse::<SwitchOrder>().unwrap(), SwitchOrder::Descending);
        assert!("sideways".parse::<SwitchOrder>().is_err());
    }
}

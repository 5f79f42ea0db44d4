//! LHZ parity lattice: geometry, counting formulas, problem instances and
//! classical constraint energies.
//!
//! Physical qubit `(i, j)` (1-based logical spins, `i < j`) carries the parity
//! `s_i * s_j`. Qubits are ordered row-major over the triangle, bottom row
//! (`j - i = 1`) first; auxiliary spins, when present, are appended after the
//! `N_p` physical qubits.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Closed-form lattice sizes for `n_logical` logical spins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub n_physical: usize,
    pub n_constraints: usize,
    pub n_auxiliary: usize,
}

pub fn counts(n_logical: usize) -> Result<Counts> {
    if n_logical < 3 {
        return Err(invalid(format!("n_logical must be >= 3, got {n_logical}")));
    }
    let n_physical = n_logical * (n_logical - 1) / 2;
    Ok(Counts {
        n_physical,
        n_constraints: n_physical + 1 - n_logical,
        n_auxiliary: n_logical - 2,
    })
}

/// Fractions `(F3, F4)` of three- and four-body constraints among all constraints.
pub fn plaquette_ratios(n_logical: usize) -> Result<(f64, f64)> {
    counts(n_logical)?;
    let nl = n_logical as f64;
    let f3 = (nl - 2.0) / (nl * nl / 2.0 - 1.5 * nl + 1.0);
    Ok((f3, 1.0 - f3))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Representation {
    /// Bottom-row constraints are genuine three-spin products over `N_p` spins.
    Direct,
    /// Each bottom-row constraint gets a pinned auxiliary spin; `N_p + N_a` spins.
    Auxiliary,
}

impl std::str::FromStr for Representation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "direct" => Ok(Representation::Direct),
            "auxiliary" | "aux" => Ok(Representation::Auxiliary),
            other => Err(invalid(format!("unknown representation '{other}'"))),
        }
    }
}

impl std::fmt::Display for Representation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Representation::Direct => "direct",
            Representation::Auxiliary => "auxiliary",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plaquette {
    pub members: Vec<usize>,
    pub strength_index: usize,
}

impl Plaquette {
    /// Bit mask over basis-state indices (spin `k` is bit `k`).
    pub fn mask(&self) -> u64 {
        self.members.iter().fold(0, |m, &k| m | (1u64 << k))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LhzLayout {
    n_logical: usize,
    counts: Counts,
    representation: Representation,
    plaquettes: Vec<Plaquette>,
}

impl LhzLayout {
    pub fn new(n_logical: usize, representation: Representation) -> Result<Self> {
        let counts = counts(n_logical)?;
        let mut plaquettes = Vec::with_capacity(counts.n_constraints);
        for d in 2..n_logical {
            for i in 1..=n_logical - d {
                let j = i + d;
                let mut members = vec![
                    pair_index(n_logical, i, j - 1),
                    pair_index(n_logical, i, j),
                    pair_index(n_logical, i + 1, j),
                ];
                if i + 1 < j - 1 {
                    members.push(pair_index(n_logical, i + 1, j - 1));
                } else if representation == Representation::Auxiliary {
                    members.push(counts.n_physical + i - 1);
                }
                let strength_index = plaquettes.len();
                plaquettes.push(Plaquette {
                    members,
                    strength_index,
                });
            }
        }
        debug_assert_eq!(plaquettes.len(), counts.n_constraints);
        Ok(Self {
            n_logical,
            counts,
            representation,
            plaquettes,
        })
    }

    pub fn n_logical(&self) -> usize {
        self.n_logical
    }

    pub fn n_physical(&self) -> usize {
        self.counts.n_physical
    }

    pub fn n_constraints(&self) -> usize {
        self.counts.n_constraints
    }

    pub fn n_auxiliary(&self) -> usize {
        self.counts.n_auxiliary
    }

    pub fn counts(&self) -> Counts {
        self.counts
    }

    pub fn representation(&self) -> Representation {
        self.representation
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Number of spins the representation carries (`N_p` or `N_p + N_a`).
    pub fn n_spins(&self) -> usize {
        match self.representation {
            Representation::Direct => self.counts.n_physical,
            Representation::Auxiliary => self.counts.n_physical + self.counts.n_auxiliary,
        }
    }

    /// Linear index of physical qubit `(i, j)`, 1-based, `i < j`.
    pub fn qubit_index(&self, i: usize, j: usize) -> Option<usize> {
        (1 <= i && i < j && j <= self.n_logical).then(|| pair_index(self.n_logical, i, j))
    }

    /// Inverse of [`qubit_index`](Self::qubit_index).
    pub fn logical_pair(&self, index: usize) -> Option<(usize, usize)> {
        if index >= self.counts.n_physical {
            return None;
        }
        let mut offset = 0;
        for d in 1..self.n_logical {
            let row = self.n_logical - d;
            if index < offset + row {
                let i = index - offset + 1;
                return Some((i, i + d));
            }
            offset += row;
        }
        None
    }

    /// Parity configuration induced by logical spins, auxiliaries set to +1.
    pub fn encode(&self, logical: &[i8]) -> Result<Vec<i8>> {
        if logical.len() != self.n_logical {
            return Err(Error::LengthMismatch {
                expected: self.n_logical,
                found: logical.len(),
            });
        }
        let mut spins = vec![1i8; self.n_spins()];
        for (k, spin) in spins.iter_mut().take(self.counts.n_physical).enumerate() {
            let (i, j) = self.logical_pair(k).expect("index in range");
            *spin = logical[i - 1] * logical[j - 1];
        }
        Ok(spins)
    }

    pub fn is_auxiliary(&self, spin: usize) -> bool {
        spin >= self.counts.n_physical && spin < self.n_spins()
    }
}

fn pair_index(n_logical: usize, i: usize, j: usize) -> usize {
    let d = j - i;
    (d - 1) * n_logical - (d - 1) * d / 2 + (i - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LhzInstance {
    pub layout: LhzLayout,
    /// `J_k` for each physical qubit.
    pub local_fields: Vec<f64>,
    /// `C_l` for each plaquette.
    pub constraint_strengths: Vec<f64>,
    /// Longitudinal field `+aux_field` pinning auxiliary spins to +1.
    pub aux_field: f64,
    pub seed: u64,
    pub j_range: (f64, f64),
}

impl LhzInstance {
    pub fn new(
        layout: LhzLayout,
        local_fields: Vec<f64>,
        constraint_strengths: Vec<f64>,
        aux_field: f64,
        seed: u64,
        j_range: (f64, f64),
    ) -> Result<Self> {
        if local_fields.len() != layout.n_physical() {
            return Err(Error::LengthMismatch {
                expected: layout.n_physical(),
                found: local_fields.len(),
            });
        }
        if constraint_strengths.len() != layout.n_constraints() {
            return Err(Error::LengthMismatch {
                expected: layout.n_constraints(),
                found: constraint_strengths.len(),
            });
        }
        if layout.representation() == Representation::Auxiliary && !(aux_field > 0.0) {
            return Err(invalid("auxiliary representation needs aux_field > 0"));
        }
        Ok(Self {
            layout,
            local_fields,
            constraint_strengths,
            aux_field,
            seed,
            j_range,
        })
    }

    pub fn n_spins(&self) -> usize {
        self.layout.n_spins()
    }

    fn check_spins(&self, spins: &[i8]) -> Result<()> {
        if spins.len() != self.n_spins() {
            return Err(Error::LengthMismatch {
                expected: self.n_spins(),
                found: spins.len(),
            });
        }
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(invalid(format!("spin values must be +-1, got {bad}")));
        }
        Ok(())
    }

    /// `-sum_l C_l prod_{k in l} s_k`; local fields are not included.
    pub fn constraint_energy(&self, spins: &[i8]) -> Result<f64> {
        self.check_spins(spins)?;
        Ok(self
            .layout
            .plaquettes()
            .iter()
            .map(|p| {
                let product: i32 = p.members.iter().map(|&k| spins[k] as i32).product();
                -self.constraint_strengths[p.strength_index] * product as f64
            })
            .sum())
    }

    /// Full classical problem energy: local fields, auxiliary pinning and constraints.
    pub fn problem_energy(&self, spins: &[i8]) -> Result<f64> {
        let constraints = self.constraint_energy(spins)?;
        let n_p = self.layout.n_physical();
        let fields: f64 = self
            .local_fields
            .iter()
            .zip(spins)
            .map(|(j, &s)| -j * s as f64)
            .sum();
        let pin: f64 = spins[n_p..].iter().map(|&s| -self.aux_field * s as f64).sum();
        Ok(fields + pin + constraints)
    }

    /// Problem energies of every z-basis state; bit `k` set means spin `k` is down.
    pub fn problem_diagonal(&self) -> Vec<f64> {
        let n = self.n_spins();
        let n_p = self.layout.n_physical();
        let masks: Vec<(u64, f64)> = self
            .layout
            .plaquettes()
            .iter()
            .map(|p| (p.mask(), self.constraint_strengths[p.strength_index]))
            .collect();
        (0..1u64 << n)
            .map(|state| {
                let mut e = 0.0;
                for k in 0..n {
                    let z = if state >> k & 1 == 0 { 1.0 } else { -1.0 };
                    let field = if k < n_p {
                        self.local_fields[k]
                    } else {
                        self.aux_field
                    };
                    e -= field * z;
                }
                for &(mask, c) in &masks {
                    let parity = if (state & mask).count_ones() % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    };
                    e -= c * parity;
                }
                e
            })
            .collect()
    }

    pub fn to_document(&self) -> InstanceDocument {
        InstanceDocument {
            n_logical: self.layout.n_logical(),
            representation: self.layout.representation(),
            seed: self.seed,
            j_range: [self.j_range.0, self.j_range.1],
            local_fields: self.local_fields.clone(),
            constraint_strengths: self.constraint_strengths.clone(),
            aux_field: self.aux_field,
            plaquettes: self
                .layout
                .plaquettes()
                .iter()
                .map(|p| p.members.clone())
                .collect(),
        }
    }

    pub fn from_document(doc: &InstanceDocument) -> Result<Self> {
        let layout = LhzLayout::new(doc.n_logical, doc.representation)?;
        let regenerated: Vec<&Vec<usize>> = layout.plaquettes().iter().map(|p| &p.members).collect();
        if regenerated.len() != doc.plaquettes.len()
            || regenerated.iter().zip(&doc.plaquettes).any(|(a, b)| *a != b)
        {
            return Err(invalid("plaquette list does not match the lattice geometry"));
        }
        Self::new(
            layout,
            doc.local_fields.clone(),
            doc.constraint_strengths.clone(),
            doc.aux_field,
            doc.seed,
            (doc.j_range[0], doc.j_range[1]),
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("instance document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: InstanceDocument =
            serde_json::from_str(text).map_err(|e| invalid(format!("instance JSON: {e}")))?;
        Self::from_document(&doc)
    }
}

/// Serialized form of an [`LhzInstance`] used in reproducibility manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceDocument {
    pub n_logical: usize,
    pub representation: Representation,
    pub seed: u64,
    pub j_range: [f64; 2],
    pub local_fields: Vec<f64>,
    pub constraint_strengths: Vec<f64>,
    pub aux_field: f64,
    pub plaquettes: Vec<Vec<usize>>,
}

/// Draws `J_k` i.i.d. uniform on `[j_low, j_high)` from a stream keyed by `seed`.
pub fn sample_instance(
    layout: &LhzLayout,
    seed: u64,
    j_low: f64,
    j_high: f64,
    constraint_strength: f64,
    aux_field: f64,
) -> Result<LhzInstance> {
    if !(j_low < j_high) || !j_low.is_finite() || !j_high.is_finite() {
        return Err(invalid(format!("empty J interval [{j_low}, {j_high}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let local_fields = (0..layout.n_physical())
        .map(|_| rng.gen_range(j_low..j_high))
        .collect();
    LhzInstance::new(
        layout.clone(),
        local_fields,
        vec![constraint_strength; layout.n_constraints()],
        aux_field,
        seed,
        (j_low, j_high),
    )
}

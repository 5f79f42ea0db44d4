//! Flat `key = value` experiment configuration shared by every subcommand.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lhz_core::dynamics::{default_t_f_grid, EnsembleConfig};
use lhz_core::landau::{FreeEnergyFamily, JDistribution, DEFAULT_QUAD_NODES};
use lhz_core::magnetization::Normalization;
use lhz_core::{DriveKind, LhzLayout, Representation, Schedule, SwitchOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "LHZ_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "lhz-output";

/// Every accepted key, in echo order.
pub const KEYS: &[&str] = &[
    "n-logical",
    "representation",
    "C",
    "aux-field",
    "j-uniform",
    "kind",
    "r",
    "order",
    "t-f",
    "steps-per-unit-time",
    "grid-points",
    "levels",
    "ms",
    "m",
    "normalization",
    "variant",
    "n-p",
    "quad-nodes",
    "beta",
    "s",
    "tau",
    "m-grid",
    "s-grid",
    "tau-grid",
    "seeds",
    "threads",
    "output-dir",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VariantKind {
    Thermo,
    FiniteSize,
    Scaled,
    FiniteTemperature,
}

impl std::str::FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "thermo" => Ok(Self::Thermo),
            "finite" | "finite-size" => Ok(Self::FiniteSize),
            "scaled" | "scaled-c" => Ok(Self::Scaled),
            "finite-temperature" => Ok(Self::FiniteTemperature),
            other => Err(format!("unknown variant '{other}'")),
        }
    }
}

impl std::fmt::Display for VariantKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Thermo => "thermo",
            Self::FiniteSize => "finite-size",
            Self::Scaled => "scaled",
            Self::FiniteTemperature => "finite-temperature",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_logical: usize,
    pub representation: Representation,
    pub c: f64,
    pub aux_field: f64,
    pub j_range: (f64, f64),
    pub kind: DriveKind,
    pub r: f64,
    pub order: SwitchOrder,
    pub t_fs: Vec<f64>,
    pub steps_per_unit_time: usize,
    pub grid_points: usize,
    pub levels: usize,
    pub ms: usize,
    /// `None` scans every admissible magnetization.
    pub m_values: Option<Vec<f64>>,
    pub normalization: Normalization,
    pub variant: VariantKind,
    pub n_p: Vec<usize>,
    pub quad_nodes: usize,
    pub beta: f64,
    pub s: f64,
    pub tau: f64,
    pub m_grid: usize,
    pub s_grid: usize,
    pub tau_grid: usize,
    pub seeds: Vec<u64>,
    /// `None` uses every available core.
    pub threads: Option<usize>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_logical: 4,
            representation: Representation::Auxiliary,
            c: 2.0,
            aux_field: 10.0,
            j_range: (-1.0, 1.0),
            kind: DriveKind::Inhomogeneous,
            r: 0.5,
            order: SwitchOrder::Ascending,
            t_fs: default_t_f_grid(),
            steps_per_unit_time: 20,
            grid_points: 99,
            levels: 6,
            ms: 10_000,
            m_values: None,
            normalization: Normalization::MaxEnergy,
            variant: VariantKind::Thermo,
            n_p: Vec::new(),
            quad_nodes: DEFAULT_QUAD_NODES,
            beta: f64::INFINITY,
            s: 0.5,
            tau: 0.5,
            m_grid: 101,
            s_grid: 41,
            tau_grid: 101,
            seeds: vec![1],
            threads: None,
            output_dir: PathBuf::from(DEFAULT_OUTPUT_DIR),
        }
    }
}

/// Accepts `snake_case`, `kebab-case` and a lowercase `c`.
pub fn canonical_key(key: &str) -> Option<&'static str> {
    let k = key.trim().trim_start_matches("--").replace('_', "-");
    let k = if k == "c" { "C".to_string() } else { k };
    KEYS.iter().copied().find(|known| *known == k)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim().parse().map_err(|_| format!("{key}: cannot parse '{v}'"))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>, String> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| num(key, s))
        .collect()
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

/// `a..b` is inclusive; items are separated by commas.
pub fn parse_seeds(v: &str) -> Result<Vec<u64>, String> {
    let mut seeds = Vec::new();
    for item in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = item.split_once("..") {
            let (a, b): (u64, u64) = (num("seeds", a)?, num("seeds", b)?);
            if b < a {
                return Err(format!("seeds: empty range {item}"));
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(num("seeds", item)?);
        }
    }
    Ok(seeds)
}

/// Collapses consecutive runs back into `a..b` items.
fn format_seeds(seeds: &[u64]) -> String {
    let mut items = Vec::new();
    let mut i = 0;
    while i < seeds.len() {
        let mut j = i;
        while j + 1 < seeds.len() && seeds[j + 1] == seeds[j] + 1 {
            j += 1;
        }
        items.push(if j > i {
            format!("{}..{}", seeds[i], seeds[j])
        } else {
            seeds[i].to_string()
        });
        i = j + 1;
    }
    items.join(",")
}

/// Lines of `key = value`; `#` starts a comment.
pub fn parse_file(text: &str) -> Result<Vec<(String, String)>, String> {
    let mut pairs = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("line {}: expected key = value", n + 1))?;
        pairs.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(pairs)
}

impl ExperimentConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let key = canonical_key(key).ok_or_else(|| format!("unknown key '{key}'"))?;
        let v = value.trim();
        match key {
            "n-logical" => self.n_logical = num(key, v)?,
            "representation" => self.representation = v.parse().map_err(|e| format!("{e}"))?,
            "C" => self.c = num(key, v)?,
            "aux-field" => self.aux_field = num(key, v)?,
            "j-uniform" => {
                let parts: Vec<f64> = v
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_, _>>()?;
                match parts[..] {
                    [lo, hi] => self.j_range = (lo, hi),
                    _ => return Err("j-uniform: expected two bounds".into()),
                }
            }
            "kind" => self.kind = v.parse().map_err(|e| format!("{e}"))?,
            "r" => self.r = num(key, v)?,
            "order" => self.order = v.parse().map_err(|e| format!("{e}"))?,
            "t-f" => self.t_fs = list(key, v)?,
            "steps-per-unit-time" => self.steps_per_unit_time = num(key, v)?,
            "grid-points" => self.grid_points = num(key, v)?,
            "levels" => self.levels = num(key, v)?,
            "ms" => self.ms = num(key, v)?,
            "m" => self.m_values = if v == "all" { None } else { Some(list(key, v)?) },
            "normalization" => self.normalization = v.parse().map_err(|e| format!("{e}"))?,
            "variant" => self.variant = v.parse()?,
            "n-p" => self.n_p = list(key, v)?,
            "quad-nodes" => self.quad_nodes = num(key, v)?,
            "beta" => self.beta = num(key, v)?,
            "s" => self.s = num(key, v)?,
            "tau" => self.tau = num(key, v)?,
            "m-grid" => self.m_grid = num(key, v)?,
            "s-grid" => self.s_grid = num(key, v)?,
            "tau-grid" => self.tau_grid = num(key, v)?,
            "seeds" => self.seeds = parse_seeds(v)?,
            "threads" => self.threads = if v == "auto" { None } else { Some(num(key, v)?) },
            "output-dir" => self.output_dir = PathBuf::from(v),
            _ => unreachable!("key list and match arms disagree"),
        }
        Ok(())
    }

    /// Canonical echo; feeding it back through [`Self::from_pairs`] gives an equal config.
    pub fn pairs(&self) -> BTreeMap<String, String> {
        let mut out = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            out.insert(k.to_string(), v);
        };
        put("n-logical", self.n_logical.to_string());
        put("representation", self.representation.to_string());
        put("C", self.c.to_string());
        put("aux-field", self.aux_field.to_string());
        put("j-uniform", format!("{},{}", self.j_range.0, self.j_range.1));
        put("kind", self.kind.to_string());
        put("r", self.r.to_string());
        put("order", self.order.to_string());
        put("t-f", join(&self.t_fs));
        put("steps-per-unit-time", self.steps_per_unit_time.to_string());
        put("grid-points", self.grid_points.to_string());
        put("levels", self.levels.to_string());
        put("ms", self.ms.to_string());
        put("m", self.m_values.as_deref().map_or("all".into(), join));
        put("normalization", self.normalization.to_string());
        put("variant", self.variant.to_string());
        put("n-p", join(&self.n_p));
        put("quad-nodes", self.quad_nodes.to_string());
        put("beta", self.beta.to_string());
        put("s", self.s.to_string());
        put("tau", self.tau.to_string());
        put("m-grid", self.m_grid.to_string());
        put("s-grid", self.s_grid.to_string());
        put("tau-grid", self.tau_grid.to_string());
        put("seeds", format_seeds(&self.seeds));
        put("threads", self.threads.map_or("auto".into(), |t| t.to_string()));
        put("output-dir", self.output_dir.display().to_string());
        out
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        for (k, v) in pairs {
            cfg.set(k, v).map_err(CliError::Usage)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Layers, lowest first: defaults, `LHZ_OUTPUT_DIR`, config file, flags.
    pub fn resolve(
        env_output_dir: Option<String>,
        file: Option<&str>,
        flags: &[(&'static str, String)],
    ) -> Result<Self, CliError> {
        let mut cfg = Self::default();
        if let Some(dir) = env_output_dir.filter(|d| !d.is_empty()) {
            cfg.output_dir = PathBuf::from(dir);
        }
        if let Some(text) = file {
            for (k, v) in parse_file(text).map_err(CliError::Usage)? {
                cfg.set(&k, &v).map_err(|e| CliError::Usage(format!("config file: {e}")))?;
            }
        }
        for (k, v) in flags {
            cfg.set(k, v).map_err(|e| CliError::Usage(format!("--{k}: {e}")))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let fail = |msg: &str| Err(CliError::Usage(msg.to_string()));
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if self.n_logical < 3 {
            return fail("n-logical must be at least 3");
        }
        if !self.c.is_finite() || !self.aux_field.is_finite() {
            return fail("C and aux-field must be finite");
        }
        if !(self.j_range.0 < self.j_range.1) || !self.j_range.0.is_finite() || !self.j_range.1.is_finite() {
            return fail("j-uniform needs finite bounds with low < high");
        }
        if !(self.r > 0.0) || !self.r.is_finite() {
            return fail("r must be positive");
        }
        if self.t_fs.is_empty() || self.t_fs.iter().any(|t| !(*t > 0.0) || !t.is_finite()) {
            return fail("t-f needs at least one positive value");
        }
        if self.steps_per_unit_time == 0 {
            return fail("steps-per-unit-time must be positive");
        }
        if self.grid_points < 2 || self.levels < 2 || self.m_grid < 2 || self.s_grid < 2 || self.tau_grid < 2 {
            return fail("grid-points, levels, m-grid, s-grid and tau-grid must be at least 2");
        }
        if self.ms < 2 {
            return fail("ms must be at least 2");
        }
        if let Some(m) = &self.m_values {
            if m.is_empty() || m.iter().any(|x| !(-1.0..=1.0).contains(x)) {
                return fail("m values must lie in [-1, 1]");
            }
        }
        if self.quad_nodes < lhz_core::landau::MIN_QUAD_NODES {
            return fail("quad-nodes too small");
        }
        if !(self.beta > 0.0) {
            return fail("beta must be positive");
        }
        if !unit(self.s) || !unit(self.tau) {
            return fail("s and tau must lie in [0, 1]");
        }
        if self.variant != VariantKind::Thermo && self.n_p.is_empty() {
            return fail("this variant needs n-p");
        }
        if self.seeds.is_empty() {
            return fail("at least one seed is required");
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        if seeds.windows(2).any(|w| w[0] == w[1]) {
            return fail("seeds must be distinct");
        }
        if self.threads == Some(0) {
            return fail("threads must be positive");
        }
        Ok(())
    }

    pub fn first_seed(&self) -> u64 {
        self.seeds[0]
    }

    pub fn schedule(&self) -> Result<Schedule, CliError> {
        match self.kind {
            DriveKind::Homogeneous => Ok(Schedule::homogeneous()),
            DriveKind::Inhomogeneous => Ok(Schedule::inhomogeneous(self.r, self.order)?),
        }
    }

    pub fn layout(&self) -> Result<LhzLayout, CliError> {
        Ok(LhzLayout::new(self.n_logical, self.representation)?)
    }

    pub fn ensemble(&self, schedules: Vec<Schedule>, gaps: bool) -> EnsembleConfig {
        EnsembleConfig {
            n_logical: self.n_logical,
            representation: self.representation,
            constraint_strength: self.c,
            aux_field: self.aux_field,
            j_range: self.j_range,
            schedules,
            t_fs: self.t_fs.clone(),
            steps_per_unit_time: self.steps_per_unit_time,
            gap_grid_points: gaps.then_some(self.grid_points),
        }
    }

    pub fn j_distribution(&self) -> JDistribution {
        JDistribution::Uniform {
            low: self.j_range.0,
            high: self.j_range.1,
        }
    }

    /// One family per `n-p` entry; the thermodynamic limit ignores `n-p`.
    pub fn families(&self) -> Result<Vec<(Option<usize>, FreeEnergyFamily)>, CliError> {
        let u = self.j_distribution();
        let with_nodes = |f: FreeEnergyFamily| f.with_quad_nodes(self.quad_nodes);
        if self.variant == VariantKind::Thermo {
            return Ok(vec![(None, with_nodes(FreeEnergyFamily::thermo(self.c, u)?)?)]);
        }
        self.n_p
            .iter()
            .map(|&n| {
                let fam = match self.variant {
                    VariantKind::FiniteSize => FreeEnergyFamily::finite_size(self.c, n, u)?,
                    VariantKind::Scaled => FreeEnergyFamily::scaled(n, u)?,
                    VariantKind::FiniteTemperature => {
                        let mut rng = ChaCha8Rng::seed_from_u64(self.first_seed());
                        rng.set_stream(n as u64);
                        let j = (0..n).map(|_| rng.gen_range(self.j_range.0..self.j_range.1)).collect();
                        FreeEnergyFamily::finite_temperature(self.c, n, self.beta, j)?
                    }
                    VariantKind::Thermo => unreachable!(),
                };
                Ok((Some(n), with_nodes(fam)?))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_ranges_are_inclusive() {
        assert_eq!(parse_seeds("1..3,7").unwrap(), vec![1, 2, 3, 7]);
        assert_eq!(parse_seeds("5").unwrap(), vec![5]);
        assert!(parse_seeds("4..2").is_err());
        assert_eq!(format_seeds(&[1, 2, 3, 7, 9, 10]), "1..3,7,9..10");
    }

    #[test]
    fn file_comments_and_unknown_keys() {
        let pairs = parse_file("# header\nn_logical = 3 # trailing\n\nC=1.5\n").unwrap();
        assert_eq!(pairs, vec![("n_logical".into(), "3".into()), ("C".into(), "1.5".into())]);
        assert!(parse_file("just words").is_err());
        assert!(ExperimentConfig::default().set("colour", "blue").is_err());
    }

    #[test]
    fn layering_order() {
        let cfg = ExperimentConfig::resolve(
            Some("from-env".into()),
            Some("r = 2\noutput-dir = from-file\n"),
            &[("r", "3".into())],
        )
        .unwrap();
        assert_eq!(cfg.r, 3.0);
        assert_eq!(cfg.output_dir, PathBuf::from("from-file"));
        let cfg = ExperimentConfig::resolve(Some("from-env".into()), None, &[]).unwrap();
        assert_eq!(cfg.output_dir, PathBuf::from("from-env"));
    }

    #[test]
    fn echo_round_trips() {
        let mut cfg = ExperimentConfig::default();
        for (k, v) in [("t-f", "1,2.5,100"), ("seeds", "3..5,9"), ("m", "0,0.5"), ("n-p", "21,300"), ("beta", "7.25")] {
            cfg.set(k, v).unwrap();
        }
        let echo = cfg.pairs();
        let back = ExperimentConfig::from_pairs(echo.iter().map(|(k, v)| (k.as_str(), v.as_str()))).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn validation_rejects_out_of_range() {
        for (k, v) in [("n-logical", "2"), ("s", "1.5"), ("seeds", "1,1"), ("j-uniform", "1 -1"), ("threads", "0")] {
            assert!(ExperimentConfig::resolve(None, None, &[(k, v.into())]).is_err(), "{k} = {v}");
        }
        assert!(ExperimentConfig::resolve(None, None, &[("variant", "scaled".into())]).is_err());
    }
}

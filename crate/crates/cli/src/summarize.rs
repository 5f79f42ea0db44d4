//! Order statistics and paired comparisons over sweep or gap tables.

use std::collections::BTreeMap;
use std::io::Read;

use serde::Serialize;

use lhz_core::dynamics::SWEEP_CSV_HEADER;
use lhz_core::stats::{median, Summary};

use crate::commands::GAP_CSV_HEADER;
use crate::CliError;

const HOMOGENEOUS: &str = "homogeneous";

#[derive(Debug, Clone, PartialEq)]
struct Row {
    seed: u64,
    schedule: String,
    t_f: Option<f64>,
    fidelity_sq: Option<f64>,
    residual_energy: Option<f64>,
    min_gap: Option<f64>,
    gap_location: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Group {
    pub schedule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_f: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_sq: Option<Summary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_energy: Option<Summary>,
    pub min_gap: Option<Summary>,
    pub gap_location: Option<Summary>,
}

#[derive(Debug, Serialize)]
pub struct SeedRatio {
    pub seed: u64,
    /// `None` when the homogeneous fidelity is zero.
    pub ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct Paired {
    pub schedule: String,
    pub t_f: f64,
    pub median_ratio: Option<f64>,
    pub ratios: Vec<SeedRatio>,
}

#[derive(Debug, Serialize)]
pub struct GapComparison {
    pub schedule: String,
    pub pairs: usize,
    pub fraction_larger: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SummaryReport {
    pub schema: String,
    pub rows: usize,
    pub groups: Vec<Group>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub paired: Vec<Paired>,
    pub gap_comparison: Vec<GapComparison>,
}

fn field(record: &csv::StringRecord, i: usize) -> Result<Option<f64>, CliError> {
    let v = record.get(i).unwrap_or("").trim();
    if v.is_empty() {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|_| CliError::Usage(format!("cannot parse '{v}' as a number")))
}

fn label(kind: &str, r: &str, order: &str) -> String {
    if r.is_empty() {
        kind.to_string()
    } else {
        format!("{kind}(r={r},{order})")
    }
}

fn read_rows(text: &str) -> Result<(String, Vec<Row>), CliError> {
    let header = text.lines().next().unwrap_or("").trim();
    let schema = if header == SWEEP_CSV_HEADER {
        "sweep"
    } else if header == GAP_CSV_HEADER {
        "gaps"
    } else {
        return Err(CliError::Usage(format!("unrecognised CSV header '{header}'")));
    };
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::Usage(format!("csv: {e}")))?;
        let seed = record
            .get(0)
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| CliError::Usage("bad seed column".into()))?;
        let schedule = label(&record[1], &record[2], &record[3]);
        rows.push(if schema == "sweep" {
            Row {
                seed,
                schedule,
                t_f: field(&record, 4)?,
                fidelity_sq: field(&record, 5)?,
                residual_energy: field(&record, 6)?,
                min_gap: field(&record, 7)?,
                gap_location: field(&record, 8)?,
            }
        } else {
            Row {
                seed,
                schedule,
                t_f: None,
                fidelity_sq: None,
                residual_energy: None,
                min_gap: field(&record, 4)?,
                gap_location: field(&record, 5)?,
            }
        });
    }
    Ok((schema.to_string(), rows))
}

fn summary(rows: &[&Row], f: impl Fn(&Row) -> Option<f64>) -> Option<Summary> {
    Summary::of(&rows.iter().filter_map(|r| f(r)).collect::<Vec<_>>())
}

/// Total order on the optional sweep time so it can key a map.
fn t_key(t: Option<f64>) -> u64 {
    t.map_or(0, f64::to_bits)
}

pub fn summarize<R: Read>(mut input: R) -> Result<SummaryReport, CliError> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| CliError::Usage(format!("cannot read input: {e}")))?;
    let (schema, rows) = read_rows(&text)?;

    let mut groups: BTreeMap<(String, u64), Vec<&Row>> = BTreeMap::new();
    for row in &rows {
        groups.entry((row.schedule.clone(), t_key(row.t_f))).or_default().push(row);
    }
    let mut ordered: Vec<_> = groups.into_iter().collect();
    ordered.sort_by(|a, b| {
        a.0 .0.cmp(&b.0 .0).then(
            f64::from_bits(a.0 .1).total_cmp(&f64::from_bits(b.0 .1)),
        )
    });

    let mut out_groups = Vec::new();
    let mut paired = Vec::new();
    for ((schedule, _), members) in &ordered {
        let t_f = members[0].t_f;
        out_groups.push(Group {
            schedule: schedule.clone(),
            t_f,
            fidelity_sq: summary(members, |r| r.fidelity_sq),
            residual_energy: summary(members, |r| r.residual_energy),
            min_gap: summary(members, |r| r.min_gap),
            gap_location: summary(members, |r| r.gap_location),
        });
        if schedule == HOMOGENEOUS || schema != "sweep" {
            continue;
        }
        let Some((_, hom)) = ordered
            .iter()
            .find(|((s, t), _)| s == HOMOGENEOUS && *t == t_key(t_f))
        else {
            continue;
        };
        let hom: BTreeMap<u64, f64> = hom.iter().filter_map(|r| Some((r.seed, r.fidelity_sq?))).collect();
        let ratios: Vec<SeedRatio> = members
            .iter()
            .filter_map(|r| {
                let h = *hom.get(&r.seed)?;
                let i = r.fidelity_sq?;
                Some(SeedRatio {
                    seed: r.seed,
                    ratio: (h != 0.0).then(|| i / h),
                })
            })
            .collect();
        paired.push(Paired {
            schedule: schedule.clone(),
            t_f: t_f.unwrap_or(f64::NAN),
            median_ratio: median(&ratios.iter().filter_map(|r| r.ratio).collect::<Vec<_>>()),
            ratios,
        });
    }

    // gaps do not depend on t_f; one value per (schedule, seed)
    let mut gaps: BTreeMap<&str, BTreeMap<u64, f64>> = BTreeMap::new();
    for row in &rows {
        if let Some(g) = row.min_gap {
            gaps.entry(row.schedule.as_str()).or_default().entry(row.seed).or_insert(g);
        }
    }
    let mut gap_comparison = Vec::new();
    if let Some(hom) = gaps.get(HOMOGENEOUS) {
        for (schedule, per_seed) in &gaps {
            if *schedule == HOMOGENEOUS {
                continue;
            }
            let pairs: Vec<bool> = per_seed
                .iter()
                .filter_map(|(seed, g)| hom.get(seed).map(|h| g > h))
                .collect();
            gap_comparison.push(GapComparison {
                schedule: schedule.to_string(),
                pairs: pairs.len(),
                fraction_larger: (!pairs.is_empty())
                    .then(|| pairs.iter().filter(|&&b| b).count() as f64 / pairs.len() as f64),
            });
        }
    }

    Ok(SummaryReport {
        schema,
        rows: rows.len(),
        groups: out_groups,
        paired,
        gap_comparison,
    })
}

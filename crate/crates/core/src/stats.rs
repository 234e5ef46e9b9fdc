//! Diversity statistics of a corpus or sample, and side-by-side comparison
//! of several samples.
//!
//! Relations reported by different documents are separate items, so an
//! entity's weight is the number of relations it takes part in across the
//! whole sample.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityStats {
    pub distinct: usize,
    /// `(fraction of entities, cumulative fraction of relations)`, entities
    /// taken in descending order of relation count.
    pub pareto_curve: Vec<(f64, f64)>,
    /// Relation count -> number of entities with that count.
    pub frequency_histogram: BTreeMap<usize, usize>,
}

impl EntityStats {
    fn from_counts(counts: &BTreeMap<&str, usize>) -> Self {
        let mut weights: Vec<usize> = counts.values().copied().collect();
        weights.sort_unstable_by(|a, b| b.cmp(a));
        let n = weights.len() as f64;
        let total: usize = weights.iter().sum();
        let mut acc = 0;
        let pareto_curve = weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                acc += w;
                let x = if i + 1 == weights.len() { 1.0 } else { (i + 1) as f64 / n };
                let y = if acc == total { 1.0 } else { acc as f64 / total as f64 };
                (x, y)
            })
            .collect();
        let mut frequency_histogram = BTreeMap::new();
        for &w in &weights {
            *frequency_histogram.entry(w).or_insert(0) += 1;
        }
        EntityStats {
            distinct: weights.len(),
            pareto_curve,
            frequency_histogram,
        }
    }

    /// Share of relations held by the top `fraction` of entities, linearly
    /// interpolated along the curve from the origin.
    pub fn top_share(&self, fraction: f64) -> f64 {
        let fraction = fraction.clamp(0.0, 1.0);
        let mut prev = (0.0, 0.0);
        for &(x, y) in &self.pareto_curve {
            if fraction <= x {
                let t = if x > prev.0 { (fraction - prev.0) / (x - prev.0) } else { 1.0 };
                return prev.1 + t * (y - prev.1);
            }
            prev = (x, y);
        }
        prev.1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiversityStats {
    pub n_documents: usize,
    pub n_relations: usize,
    pub distinct_organisms: usize,
    pub distinct_chemicals: usize,
    pub distinct_relations: usize,
    pub organisms: EntityStats,
    pub chemicals: EntityStats,
}

pub fn stats(corpus: &Corpus) -> Result<DiversityStats> {
    if corpus.is_empty() || corpus.n_relations() == 0 {
        return Err(Error::EmptyCorpus);
    }
    let mut organisms: BTreeMap<&str, usize> = BTreeMap::new();
    let mut chemicals: BTreeMap<&str, usize> = BTreeMap::new();
    let mut pairs: BTreeSet<(&str, &str)> = BTreeSet::new();
    for rel in corpus.documents.iter().flat_map(|d| &d.relations) {
        *organisms.entry(&rel.organism.id).or_insert(0) += 1;
        *chemicals.entry(&rel.chemical.id).or_insert(0) += 1;
        pairs.insert((&rel.organism.id, &rel.chemical.id));
    }
    Ok(DiversityStats {
        n_documents: corpus.len(),
        n_relations: corpus.n_relations(),
        distinct_organisms: organisms.len(),
        distinct_chemicals: chemicals.len(),
        distinct_relations: pairs.len(),
        organisms: EntityStats::from_counts(&organisms),
        chemicals: EntityStats::from_counts(&chemicals),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStd {
    pub mean: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std: f64,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        MeanStd { mean, std }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub name: String,
    pub runs: usize,
    pub n_documents: MeanStd,
    pub distinct_organisms: MeanStd,
    pub distinct_chemicals: MeanStd,
    pub distinct_relations: MeanStd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub rows: Vec<ComparisonRow>,
}

impl ComparisonReport {
    pub fn row(&self, name: &str) -> Option<&ComparisonRow> {
        self.rows.iter().find(|r| r.name == name)
    }

    /// Tab-separated table, one row per sample or family.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("sample\truns\tdocuments\torganisms\tchemicals\trelations\n");
        let cell = |m: MeanStd, runs: usize| {
            if runs > 1 {
                format!("{:.2} ± {:.2}", m.mean, m.std)
            } else {
                format!("{}", m.mean)
            }
        };
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}",
                r.name,
                r.runs,
                cell(r.n_documents, r.runs),
                cell(r.distinct_organisms, r.runs),
                cell(r.distinct_chemicals, r.runs),
                cell(r.distinct_relations, r.runs)
            );
        }
        out
    }
}

/// Family name of a sample: `random#3` belongs to `random`.
pub fn family_of(name: &str) -> &str {
    name.split_once('#').map_or(name, |(f, _)| f)
}

/// One row per sample family. Samples named `family#i` are pooled and
/// reported as mean ± standard deviation.
pub fn compare_samples(samples: &BTreeMap<String, Vec<String>>, corpus: &Corpus) -> Result<ComparisonReport> {
    let mut families: BTreeMap<&str, Vec<DiversityStats>> = BTreeMap::new();
    for (name, ids) in samples {
        let part = corpus.subset(ids)?;
        if part.is_empty() {
            return Err(Error::Data(format!("sample `{name}` is empty")));
        }
        families.entry(family_of(name)).or_default().push(stats(&part)?);
    }
    let rows = families
        .into_iter()
        .map(|(name, runs)| {
            let col = |f: fn(&DiversityStats) -> usize| {
                MeanStd::of(&runs.iter().map(|s| f(s) as f64).collect::<Vec<_>>())
            };
            ComparisonRow {
                name: name.to_string(),
                runs: runs.len(),
                n_documents: col(|s| s.n_documents),
                distinct_organisms: col(|s| s.distinct_organisms),
                distinct_chemicals: col(|s| s.distinct_chemicals),
                distinct_relations: col(|s| s.distinct_relations),
            }
        })
        .collect();
    Ok(ComparisonReport { rows })
}

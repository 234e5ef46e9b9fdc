//! Helpers and independent oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeMap;

use divsample::corpus::{Corpus, Document, Entity, EntityKind, Relation};

pub fn entity(id: &str, kind: EntityKind) -> Entity {
    Entity::new(id, id, Vec::<String>::new(), kind).expect("valid entity")
}

pub fn relation(o: &str, c: &str) -> Relation {
    Relation::new(entity(o, EntityKind::Organism), entity(c, EntityKind::Chemical)).expect("valid relation")
}

pub fn doc(id: &str, stratum: &str, pairs: &[(&str, &str)]) -> Document {
    Document {
        id: id.into(),
        title: format!("title {id}"),
        abstract_text: Some(format!("abstract {id}")),
        stratum: stratum.into(),
        relations: pairs.iter().map(|(o, c)| relation(o, c)).collect(),
    }
}

/// Builds a single-stratum corpus from `(doc id, pairs)` with string ids.
pub fn corpus_of(docs: &[(String, Vec<(String, String)>)]) -> Corpus {
    Corpus::new(
        docs.iter()
            .map(|(id, pairs)| {
                let pairs: Vec<(&str, &str)> = pairs.iter().map(|(o, c)| (o.as_str(), c.as_str())).collect();
                doc(id, "S", &pairs)
            })
            .collect(),
    )
}

/// Shannon entropy in nats straight from the definition.
pub fn shannon(counts: &BTreeMap<String, u64>) -> f64 {
    let n: u64 = counts.values().sum();
    counts
        .values()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStep {
    pub doc_id: String,
    pub h_organisms: f64,
    pub h_chemicals: f64,
    pub distance: f64,
}

/// Exhaustive greedy ranking: at every step each remaining document is
/// added to a fresh copy of the counts, entropies are recomputed from
/// scratch and the closest to `(ln|O|, ln|C|)` wins. Distances within
/// 1e-12 of the minimum are ties, won by the smallest id.
pub fn gme_oracle(corpus: &Corpus) -> Vec<OracleStep> {
    let mut all_o = BTreeMap::new();
    let mut all_c = BTreeMap::new();
    for r in corpus.documents.iter().flat_map(|d| &d.relations) {
        all_o.insert(r.organism.id.clone(), ());
        all_c.insert(r.chemical.id.clone(), ());
    }
    let (uo, uc) = ((all_o.len() as f64).ln(), (all_c.len() as f64).ln());

    let mut remaining: Vec<&Document> = corpus.documents.iter().collect();
    let mut orgs: BTreeMap<String, u64> = BTreeMap::new();
    let mut chems: BTreeMap<String, u64> = BTreeMap::new();
    let mut steps = Vec::new();
    while !remaining.is_empty() {
        let scored: Vec<(usize, f64, f64, f64)> = remaining
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let (mut o, mut c) = (orgs.clone(), chems.clone());
                for r in &d.relations {
                    *o.entry(r.organism.id.clone()).or_insert(0) += 1;
                    *c.entry(r.chemical.id.clone()).or_insert(0) += 1;
                }
                let (ho, hc) = (shannon(&o), shannon(&c));
                (i, ho, hc, ((ho - uo).powi(2) + (hc - uc).powi(2)).sqrt())
            })
            .collect();
        let min = scored.iter().map(|s| s.3).fold(f64::INFINITY, f64::min);
        let &(best, ho, hc, dist) = scored
            .iter()
            .filter(|s| s.3 <= min + 1e-12)
            .min_by(|a, b| remaining[a.0].id.cmp(&remaining[b.0].id))
            .expect("non-empty");
        let d = remaining.remove(best);
        for r in &d.relations {
            *orgs.entry(r.organism.id.clone()).or_insert(0) += 1;
            *chems.entry(r.chemical.id.clone()).or_insert(0) += 1;
        }
        steps.push(OracleStep {
            doc_id: d.id.clone(),
            h_organisms: ho,
            h_chemicals: hc,
            distance: dist,
        });
    }
    steps
}

/// Kneedle on a monotone increasing curve: after min-max scaling the
/// perpendicular distance to the diagonal is proportional to `y - x`.
pub fn knee_oracle(xs: &[f64], ys: &[f64]) -> Option<usize> {
    let scale = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        v.iter().map(|x| (x - lo) / (hi - lo)).collect::<Vec<_>>()
    };
    let (nx, ny) = (scale(xs), scale(ys));
    let (i, gap) = (1..xs.len() - 1)
        .map(|i| (i, ny[i] - nx[i]))
        .fold((0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    (gap > 1e-9).then_some(i)
}

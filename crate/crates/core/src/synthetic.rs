//! Seeded generator of Pareto-skewed toy corpora.
//!
//! Organisms and chemicals are drawn from Zipf laws (weight `1 / k^s` for
//! the entity of popularity rank `k`), so a few entities dominate the
//! relation mass the way they do in real natural-product literature.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Entity, EntityKind, Relation};
use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZipfCorpusSpec {
    pub n_documents: usize,
    pub n_organisms: usize,
    pub n_chemicals: usize,
    pub exponent: f64,
    /// Each document reports between 1 and this many relations.
    pub max_relations: usize,
    /// Most documents name a single organism; this is the chance of each
    /// further relation switching to a new one.
    pub p_extra_organism: f64,
    pub strata: Vec<String>,
}

impl Default for ZipfCorpusSpec {
    fn default() -> Self {
        ZipfCorpusSpec {
            n_documents: 500,
            n_organisms: 300,
            n_chemicals: 1500,
            exponent: 1.1,
            max_relations: 8,
            p_extra_organism: 0.15,
            strata: vec!["Fungi".into()],
        }
    }
}

fn zipf(n: usize, s: f64) -> Result<WeightedIndex<f64>> {
    WeightedIndex::new((1..=n).map(|k| 1.0 / (k as f64).powf(s)))
        .map_err(|e| Error::Usage(format!("bad Zipf parameters: {e}")))
}

/// Generates a corpus with ids `doc0000..`, `org0..`, `chem0..`.
pub fn zipf_corpus(spec: &ZipfCorpusSpec, seed: u64) -> Result<Corpus> {
    if spec.n_documents == 0 || spec.n_organisms == 0 || spec.n_chemicals == 0 || spec.max_relations == 0 {
        return Err(Error::Usage("corpus sizes must be positive".into()));
    }
    if spec.strata.is_empty() {
        return Err(Error::Usage("at least one stratum is needed".into()));
    }
    let organisms = zipf(spec.n_organisms, spec.exponent)?;
    let chemicals = zipf(spec.n_chemicals, spec.exponent)?;
    let mut rng = rng_for(seed, &["zipf-corpus"]);
    let width = spec.n_documents.to_string().len().max(4);

    let mut docs = Vec::with_capacity(spec.n_documents);
    for d in 0..spec.n_documents {
        let id = format!("doc{d:0width$}");
        let stratum = spec.strata[rng.random_range(0..spec.strata.len())].clone();
        let n_rel = rng.random_range(1..=spec.max_relations);
        let mut org = organisms.sample(&mut rng);
        let mut relations: Vec<Relation> = Vec::with_capacity(n_rel);
        for _ in 0..n_rel {
            if !relations.is_empty() && rng.random_bool(spec.p_extra_organism) {
                org = organisms.sample(&mut rng);
            }
            let chem = chemicals.sample(&mut rng);
            if relations
                .iter()
                .any(|r| r.organism.id == format!("org{org}") && r.chemical.id == format!("chem{chem}"))
            {
                continue;
            }
            let o = Entity::new(format!("org{org}"), &format!("Organism {org}"), Vec::<String>::new(), EntityKind::Organism)?;
            let c = Entity::new(format!("chem{chem}"), &format!("compound {chem}"), Vec::<String>::new(), EntityKind::Chemical)?;
            relations.push(Relation::new(o, c)?);
        }
        let mentions: Vec<String> = relations
            .iter()
            .map(|r| format!("{} produces {}.", r.organism.label, r.chemical.label))
            .collect();
        docs.push(Document {
            title: format!("Synthetic report {id}"),
            abstract_text: Some(mentions.join(" ")),
            id,
            stratum,
            relations,
        });
    }
    Ok(Corpus::new(docs))
}

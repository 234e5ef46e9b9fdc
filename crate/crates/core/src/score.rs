//! Relation linearisation, parsing of generated outputs and exact-match
//! scoring.
//!
//! A relation set is serialised as `ORG produces CHEM; ORG produces CHEM`.
//! Predictions are parsed back into (organism, chemical) pairs and compared
//! with the gold pairs; both head and tail must match for a true positive.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{EntityKind, Relation};
use crate::error::{Error, Result};
use crate::text::{loose_key, normalize_whitespace};

pub const VERB: &str = "produces";
pub const SEPARATOR: &str = "; ";

/// `(organism, chemical)` surface pair.
pub type Pair = (String, String);

/// Joins `"<organism> produces <chemical>"` clauses with `"; "`.
///
/// Labels containing `;` cannot be represented and are rejected.
pub fn linearise(relations: &[Relation]) -> Result<String> {
    linearise_pairs(
        relations
            .iter()
            .map(|r| (r.organism.label.as_str(), r.chemical.label.as_str())),
    )
}

pub fn linearise_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<String> {
    let mut clauses = Vec::new();
    for (o, c) in pairs {
        for label in [o, c] {
            if label.contains(';') {
                return Err(Error::SeparatorInLabel(label.to_string()));
            }
        }
        clauses.push(format!("{o} {VERB} {c}"));
    }
    Ok(clauses.join(SEPARATOR))
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedOutput {
    pub relations: BTreeSet<Pair>,
    pub malformed: usize,
}

/// Splits on `;` and cuts each clause at the first ` produces `. Clauses
/// without the verb, or with an empty side, are tallied as malformed.
pub fn parse_output(text: &str) -> ParsedOutput {
    let token = format!(" {VERB} ");
    let mut out = ParsedOutput::default();
    for clause in text.split(';') {
        let clause = clause.trim();
        if clause.is_empty() {
            continue;
        }
        match clause.split_once(&token) {
            Some((head, tail)) if !head.trim().is_empty() && !tail.trim().is_empty() => {
                out.relations
                    .insert((head.trim().to_string(), tail.trim().to_string()));
            }
            _ => out.malformed += 1,
        }
    }
    out
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matching {
    Exact,
    /// Case-folded, whitespace-normalized exact match.
    #[default]
    Casefold,
}

impl std::str::FromStr for Matching {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Matching::Exact),
            "casefold" => Ok(Matching::Casefold),
            other => Err(Error::Usage(format!("unknown matching mode `{other}`"))),
        }
    }
}

impl Matching {
    fn key(self, s: &str) -> String {
        match self {
            Matching::Exact => s.to_string(),
            Matching::Casefold => loose_key(s),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Averaging {
    #[default]
    Micro,
    Macro,
}

impl std::str::FromStr for Averaging {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "micro" => Ok(Averaging::Micro),
            "macro" => Ok(Averaging::Macro),
            other => Err(Error::Usage(format!("unknown averaging `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocRelations {
    pub doc_id: String,
    pub relations: BTreeSet<Pair>,
}

impl DocRelations {
    pub fn new<I, A, B>(doc_id: impl Into<String>, pairs: I) -> Self
    where
        I: IntoIterator<Item = (A, B)>,
        A: Into<String>,
        B: Into<String>,
    {
        DocRelations {
            doc_id: doc_id.into(),
            relations: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_positives)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.true_positives, self.true_positives + self.false_negatives)
    }

    pub fn f1(&self) -> f64 {
        f1(self.precision(), self.recall())
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocScore {
    pub doc_id: String,
    #[serde(flatten)]
    pub counts: Counts,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub matching: Matching,
    pub averaging: Averaging,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub per_document: Vec<DocScore>,
}

fn index_by_id(side: &[DocRelations]) -> Result<BTreeMap<&str, &DocRelations>> {
    let mut map = BTreeMap::new();
    for d in side {
        if map.insert(d.doc_id.as_str(), d).is_some() {
            return Err(Error::DuplicateDocument(d.doc_id.clone()));
        }
    }
    Ok(map)
}

/// Micro-averaged exact-match scoring.
pub fn score(gold: &[DocRelations], pred: &[DocRelations], matching: Matching) -> Result<ScoreReport> {
    score_with(gold, pred, matching, Averaging::Micro)
}

/// Scores predictions against gold. A document missing from `pred` counts
/// all of its gold pairs as false negatives; a document missing from `gold`
/// counts all predictions as false positives.
pub fn score_with(
    gold: &[DocRelations],
    pred: &[DocRelations],
    matching: Matching,
    averaging: Averaging,
) -> Result<ScoreReport> {
    let gold_by_id = index_by_id(gold)?;
    let pred_by_id = index_by_id(pred)?;
    let ids: BTreeSet<&str> = gold_by_id.keys().chain(pred_by_id.keys()).copied().collect();

    let normalize = |d: Option<&&DocRelations>| -> BTreeSet<(String, String)> {
        d.map(|d| {
            d.relations
                .iter()
                .map(|(o, c)| (matching.key(o), matching.key(c)))
                .collect()
        })
        .unwrap_or_default()
    };

    let mut total = Counts::default();
    let mut per_document = Vec::with_capacity(ids.len());
    for id in ids {
        let g = normalize(gold_by_id.get(id));
        let p = normalize(pred_by_id.get(id));
        let tp = g.intersection(&p).count();
        let counts = Counts {
            true_positives: tp,
            false_positives: p.len() - tp,
            false_negatives: g.len() - tp,
        };
        total.true_positives += counts.true_positives;
        total.false_positives += counts.false_positives;
        total.false_negatives += counts.false_negatives;
        per_document.push(DocScore {
            doc_id: id.to_string(),
            counts,
            precision: counts.precision(),
            recall: counts.recall(),
            f1: counts.f1(),
        });
    }

    let (precision, recall, f1) = match averaging {
        Averaging::Micro => (total.precision(), total.recall(), total.f1()),
        Averaging::Macro => {
            let n = per_document.len().max(1) as f64;
            let mean = |f: fn(&DocScore) -> f64| per_document.iter().map(f).sum::<f64>() / n;
            (mean(|d| d.precision), mean(|d| d.recall), mean(|d| d.f1))
        }
    };
    Ok(ScoreReport {
        matching,
        averaging,
        true_positives: total.true_positives,
        false_positives: total.false_positives,
        false_negatives: total.false_negatives,
        precision,
        recall,
        f1,
        per_document,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeywordReport {
    pub true_positives: usize,
    pub false_positives: usize,
    pub precision: f64,
}

/// Precision of the first `k` predicted keyphrases of each document,
/// matched exactly after case folding and trimming. Duplicate predictions
/// inside the top `k` count once.
pub fn keyword_precision(predicted: &[Vec<String>], gold: &[BTreeSet<String>], k: usize) -> Result<KeywordReport> {
    if k == 0 {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    if predicted.len() != gold.len() {
        return Err(Error::Usage(format!(
            "{} prediction lists for {} gold sets",
            predicted.len(),
            gold.len()
        )));
    }
    let (mut tp, mut fp) = (0, 0);
    for (preds, gold) in predicted.iter().zip(gold) {
        let gold: BTreeSet<String> = gold.iter().map(|g| loose_key(g)).collect();
        let top: BTreeSet<String> = preds.iter().take(k).map(|p| loose_key(p)).collect();
        for p in top {
            if gold.contains(&p) {
                tp += 1;
            } else {
                fp += 1;
            }
        }
    }
    Ok(KeywordReport {
        true_positives: tp,
        false_positives: fp,
        precision: ratio(tp, tp + fp),
    })
}

// ---- file formats ----

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum LabelField {
    Text(String),
    Entity {
        label: String,
        #[serde(default)]
        kind: Option<EntityKind>,
    },
}

#[derive(Debug, Deserialize)]
struct GoldRelationRecord {
    organism: Option<LabelField>,
    chemical: Option<LabelField>,
    organism_label: Option<String>,
    chemical_label: Option<String>,
    #[serde(default)]
    is_class: bool,
    #[serde(default)]
    chemical_kind: Option<EntityKind>,
}

#[derive(Debug, Deserialize)]
struct GoldDocRecord {
    #[serde(alias = "id", alias = "pmid", alias = "PMID")]
    doc_id: Option<serde_json::Value>,
    #[serde(default)]
    relations: Vec<GoldRelationRecord>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum GoldFile {
    List(Vec<GoldDocRecord>),
    Keyed(BTreeMap<String, GoldDocRecord>),
    Wrapped { documents: Vec<GoldDocRecord> },
}

fn id_string(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn label_of(field: &Option<LabelField>, flat: &Option<String>) -> Option<(String, Option<EntityKind>)> {
    match (field, flat) {
        (Some(LabelField::Text(s)), _) => Some((s.clone(), None)),
        (Some(LabelField::Entity { label, kind }), _) => Some((label.clone(), *kind)),
        (None, Some(s)) => Some((s.clone(), None)),
        (None, None) => None,
    }
}

/// Parses the curated evaluation file: a list of documents (or an object
/// keyed by doc id) each with `relations` holding organism and chemical
/// labels. Unknown fields are ignored. With `ignore_classes`, relations
/// whose chemical is a class are dropped.
pub fn read_gold(reader: impl Read, ignore_classes: bool) -> Result<Vec<DocRelations>> {
    let file: GoldFile = serde_json::from_reader(reader)?;
    let docs: Vec<(Option<String>, GoldDocRecord)> = match file {
        GoldFile::List(v) | GoldFile::Wrapped { documents: v } => {
            v.into_iter().map(|d| (None, d)).collect()
        }
        GoldFile::Keyed(m) => m.into_iter().map(|(k, d)| (Some(k), d)).collect(),
    };
    let mut out = Vec::with_capacity(docs.len());
    for (key, doc) in docs {
        let doc_id = doc
            .doc_id
            .as_ref()
            .and_then(id_string)
            .or(key)
            .ok_or_else(|| Error::Data("gold document without an id".into()))?;
        let mut relations = BTreeSet::new();
        for rel in &doc.relations {
            let (organism, _) = label_of(&rel.organism, &rel.organism_label)
                .ok_or_else(|| Error::Data(format!("gold relation in `{doc_id}` lacks an organism label")))?;
            let (chemical, kind) = label_of(&rel.chemical, &rel.chemical_label)
                .ok_or_else(|| Error::Data(format!("gold relation in `{doc_id}` lacks a chemical label")))?;
            let is_class = rel.is_class
                || kind == Some(EntityKind::ChemicalClass)
                || rel.chemical_kind == Some(EntityKind::ChemicalClass);
            if ignore_classes && is_class {
                continue;
            }
            relations.insert((normalize_whitespace(&organism), normalize_whitespace(&chemical)));
        }
        out.push(DocRelations { doc_id, relations });
    }
    Ok(out)
}

pub fn load_gold(path: impl AsRef<Path>, ignore_classes: bool) -> Result<Vec<DocRelations>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_gold(BufReader::new(file), ignore_classes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    #[serde(alias = "id")]
    pub doc_id: String,
    pub output: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Predictions {
    pub documents: Vec<DocRelations>,
    pub malformed_clauses: usize,
}

/// Reads `{doc_id, output}` lines and parses every output.
pub fn read_predictions(reader: impl BufRead, source_name: &str) -> Result<Predictions> {
    let mut out = Predictions::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: PredictionRecord = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(source_name, i as u64 + 1, "prediction", e.to_string()))?;
        let parsed = parse_output(&rec.output);
        out.malformed_clauses += parsed.malformed;
        out.documents.push(DocRelations {
            doc_id: rec.doc_id,
            relations: parsed.relations,
        });
    }
    Ok(out)
}

pub fn load_predictions(path: impl AsRef<Path>) -> Result<Predictions> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_predictions(BufReader::new(file), &path.display().to_string())
}

//! Documents, relations and the preprocessing filters applied before sampling.
//!
//! A corpus is read either from a relation dump in TSV form (one relation per
//! row) or from JSONL (one [`Document`] per line). Relations are deduplicated
//! per document at load time, before any counting happens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::text::char_len;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityKind {
    Organism,
    Chemical,
    ChemicalClass,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub id: String,
    pub label: String,
    #[serde(default)]
    pub synonyms: BTreeSet<String>,
    pub kind: EntityKind,
}

impl Entity {
    /// Builds an entity, trimming the label and every synonym. Empty
    /// synonyms and synonyms equal to the label are discarded.
    pub fn new<I, S>(id: impl Into<String>, label: &str, synonyms: I, kind: EntityKind) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let id = id.into();
        let label = label.trim().to_string();
        if label.is_empty() {
            return Err(Error::Data(format!("entity `{id}` has an empty label")));
        }
        let synonyms = synonyms
            .into_iter()
            .map(|s| s.as_ref().trim().to_string())
            .filter(|s| !s.is_empty() && *s != label)
            .collect();
        Ok(Entity {
            id,
            label,
            synonyms,
            kind,
        })
    }

    fn normalized(self) -> Result<Self> {
        let Entity {
            id,
            label,
            synonyms,
            kind,
        } = self;
        Entity::new(id, &label, synonyms, kind)
    }
}

/// An (organism, chemical) pair reported by a document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub organism: Entity,
    pub chemical: Entity,
    /// Chemical class of the tail entity, when annotated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chemical_class: Option<String>,
}

impl Relation {
    pub fn new(organism: Entity, chemical: Entity) -> Result<Self> {
        let rel = Relation {
            organism,
            chemical,
            chemical_class: None,
        };
        rel.check_kinds()?;
        Ok(rel)
    }

    pub fn with_class(mut self, class: impl Into<String>) -> Self {
        self.chemical_class = Some(class.into());
        self
    }

    fn check_kinds(&self) -> Result<()> {
        if self.organism.kind != EntityKind::Organism {
            return Err(Error::Data(format!(
                "relation head `{}` is not an organism",
                self.organism.id
            )));
        }
        if self.chemical.kind == EntityKind::Organism {
            return Err(Error::Data(format!(
                "relation tail `{}` is an organism",
                self.chemical.id
            )));
        }
        Ok(())
    }

    fn key(&self) -> (&str, &str) {
        (&self.organism.id, &self.chemical.id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(rename = "abstract", default)]
    pub abstract_text: Option<String>,
    pub stratum: String,
    pub relations: Vec<Relation>,
}

impl Document {
    /// Number of reported relations, n_d.
    pub fn n_relations(&self) -> usize {
        self.relations.len()
    }

    pub fn has_abstract(&self) -> bool {
        self.abstract_text
            .as_deref()
            .is_some_and(|a| !a.trim().is_empty())
    }

    fn dedup_relations(&mut self) {
        let mut seen = BTreeSet::new();
        self.relations.retain(|r| {
            seen.insert((r.organism.id.clone(), r.chemical.id.clone()))
        });
    }

    pub fn distinct_organisms(&self) -> usize {
        self.relations
            .iter()
            .map(|r| r.organism.id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn distinct_chemicals(&self) -> usize {
        self.relations
            .iter()
            .map(|r| r.chemical.id.as_str())
            .collect::<BTreeSet<_>>()
            .len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    Tsv,
    Jsonl,
}

impl InputFormat {
    /// `.tsv` and `.txt` files are relation dumps, anything else JSONL.
    pub fn from_path(path: impl AsRef<Path>) -> Self {
        match path.as_ref().extension().and_then(|e| e.to_str()) {
            Some("tsv" | "txt") => InputFormat::Tsv,
            _ => InputFormat::Jsonl,
        }
    }
}

impl std::str::FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(InputFormat::Tsv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(Error::Usage(format!("unknown corpus format `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub strata: BTreeSet<String>,
    /// Entity id to number of relations (across all documents) involving it.
    pub entity_index: BTreeMap<String, usize>,
}

impl Corpus {
    /// Builds a corpus and derives strata and the entity index.
    pub fn new(documents: Vec<Document>) -> Self {
        let strata = documents.iter().map(|d| d.stratum.clone()).collect();
        let entity_index = count_entities(&documents);
        Corpus {
            documents,
            strata,
            entity_index,
        }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn n_relations(&self) -> usize {
        self.documents.iter().map(Document::n_relations).sum()
    }

    /// Recounts the entity index and strata from the documents.
    pub fn is_consistent(&self) -> bool {
        let strata: BTreeSet<String> = self.documents.iter().map(|d| d.stratum.clone()).collect();
        strata == self.strata && count_entities(&self.documents) == self.entity_index
    }

    pub fn get(&self, id: &str) -> Option<&Document> {
        self.documents.iter().find(|d| d.id == id)
    }

    /// Map from document id to its position in `documents`.
    pub fn id_index(&self) -> HashMap<&str, usize> {
        self.documents
            .iter()
            .enumerate()
            .map(|(i, d)| (d.id.as_str(), i))
            .collect()
    }

    /// Keeps the documents whose ids are in `ids`, in corpus order.
    pub fn subset<S: AsRef<str>>(&self, ids: &[S]) -> Result<Corpus> {
        let index = self.id_index();
        let mut positions = Vec::with_capacity(ids.len());
        for id in ids {
            let id = id.as_ref();
            match index.get(id) {
                Some(&p) => positions.push(p),
                None => return Err(Error::UnknownDocument(id.to_string())),
            }
        }
        positions.sort_unstable();
        positions.dedup();
        Ok(Corpus::new(
            positions.into_iter().map(|p| self.documents[p].clone()).collect(),
        ))
    }

    pub fn without<S: AsRef<str>>(&self, excluded: &[S]) -> Corpus {
        let excluded: BTreeSet<&str> = excluded.iter().map(|s| s.as_ref()).collect();
        self.retain(|d| !excluded.contains(d.id.as_str()))
    }

    fn retain(&self, mut keep: impl FnMut(&Document) -> bool) -> Corpus {
        Corpus::new(self.documents.iter().filter(|d| keep(d)).cloned().collect())
    }

    /// Chemical id to class label, from relations carrying a class annotation.
    pub fn class_map(&self) -> BTreeMap<String, String> {
        let mut map = BTreeMap::new();
        for rel in self.documents.iter().flat_map(|d| &d.relations) {
            if let Some(class) = &rel.chemical_class {
                map.entry(rel.chemical.id.clone())
                    .or_insert_with(|| class.clone());
            }
        }
        map
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> Result<()> {
        for doc in &self.documents {
            serde_json::to_writer(&mut out, doc)?;
            out.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
        }
        Ok(())
    }
}

fn count_entities(documents: &[Document]) -> BTreeMap<String, usize> {
    let mut index = BTreeMap::new();
    for rel in documents.iter().flat_map(|d| &d.relations) {
        *index.entry(rel.organism.id.clone()).or_insert(0) += 1;
        *index.entry(rel.chemical.id.clone()).or_insert(0) += 1;
    }
    index
}

pub fn load_corpus(path: impl AsRef<Path>, format: InputFormat) -> Result<Corpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    match format {
        InputFormat::Tsv => read_tsv(file, &name),
        InputFormat::Jsonl => read_jsonl(BufReader::new(file), &name),
    }
}

const TSV_COLUMNS: [&str; 10] = [
    "doc_id",
    "title",
    "abstract",
    "stratum",
    "organism_id",
    "organism_label",
    "organism_synonyms",
    "chemical_id",
    "chemical_label",
    "chemical_synonyms",
];

/// Reads a relation dump: one relation per row with a mandatory header.
/// An optional `chemical_class` column is honoured when present.
pub fn read_tsv(reader: impl Read, source_name: &str) -> Result<Corpus> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .flexible(true)
        .has_headers(true)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].trim().is_empty()) {
        return Ok(Corpus::default());
    }
    let column = |name: &str| headers.iter().position(|h| h.trim() == name);
    let mut cols = [0usize; 10];
    for (slot, name) in cols.iter_mut().zip(TSV_COLUMNS) {
        *slot = column(name)
            .ok_or_else(|| Error::malformed(source_name, 1, name, "missing column in header"))?;
    }
    let class_col = column("chemical_class");

    struct Pending {
        doc: Document,
        relation_strata: Vec<String>,
    }
    let mut order: Vec<String> = Vec::new();
    let mut pending: HashMap<String, Pending> = HashMap::new();

    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let field = |i: usize| -> Result<&str> {
            let name = TSV_COLUMNS[i];
            record
                .get(cols[i])
                .ok_or_else(|| Error::malformed(source_name, line, name, "missing field"))
        };
        let required = |i: usize| -> Result<&str> {
            let value = field(i)?.trim();
            if value.is_empty() {
                Err(Error::malformed(source_name, line, TSV_COLUMNS[i], "empty value"))
            } else {
                Ok(value)
            }
        };
        let doc_id = required(0)?;
        let stratum = required(3)?;
        let organism = Entity::new(
            required(4)?,
            required(5)?,
            split_synonyms(field(6)?),
            EntityKind::Organism,
        )
        .map_err(|e| Error::malformed(source_name, line, "organism_label", e.to_string()))?;
        let chemical = Entity::new(
            required(7)?,
            required(8)?,
            split_synonyms(field(9)?),
            EntityKind::Chemical,
        )
        .map_err(|e| Error::malformed(source_name, line, "chemical_label", e.to_string()))?;
        let mut relation = Relation::new(organism, chemical)?;
        if let Some(c) = class_col.and_then(|c| record.get(c)).map(str::trim) {
            if !c.is_empty() {
                relation.chemical_class = Some(c.to_string());
            }
        }

        let entry = pending.entry(doc_id.to_string()).or_insert_with(|| {
            order.push(doc_id.to_string());
            let abstract_text = record
                .get(cols[2])
                .map(str::trim)
                .filter(|a| !a.is_empty())
                .map(str::to_string);
            Pending {
                doc: Document {
                    id: doc_id.to_string(),
                    title: record.get(cols[1]).unwrap_or("").trim().to_string(),
                    abstract_text,
                    stratum: String::new(),
                    relations: Vec::new(),
                },
                relation_strata: Vec::new(),
            }
        });
        if entry
            .doc
            .relations
            .iter()
            .any(|r| r.key() == relation.key())
        {
            continue;
        }
        entry.doc.relations.push(relation);
        entry.relation_strata.push(stratum.to_string());
    }

    let documents = order
        .into_iter()
        .map(|id| {
            let Pending {
                mut doc,
                relation_strata,
            } = pending.remove(&id).expect("pending document");
            doc.stratum = majority_stratum(&relation_strata);
            doc
        })
        .collect();
    Ok(Corpus::new(documents))
}

fn split_synonyms(field: &str) -> impl Iterator<Item = &str> {
    field.split('|').map(str::trim).filter(|s| !s.is_empty())
}

/// Stratum carried by most relations; ties go to the lexicographically
/// smallest label.
fn majority_stratum(strata: &[String]) -> String {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for s in strata {
        *counts.entry(s).or_insert(0) += 1;
    }
    let mut best: Option<(&str, usize)> = None;
    for (s, c) in counts {
        if best.is_none_or(|(_, bc)| c > bc) {
            best = Some((s, c));
        }
    }
    best.map(|(s, _)| s.to_string()).unwrap_or_default()
}

pub fn read_jsonl(reader: impl BufRead, source_name: &str) -> Result<Corpus> {
    let mut documents = Vec::new();
    let mut seen = BTreeSet::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(source_name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut doc: Document = serde_json::from_str(&line)
            .map_err(|e| Error::malformed(source_name, line_no, "document", e.to_string()))?;
        if doc.stratum.trim().is_empty() {
            return Err(Error::malformed(source_name, line_no, "stratum", "empty value"));
        }
        if !seen.insert(doc.id.clone()) {
            return Err(Error::DuplicateDocument(doc.id));
        }
        let mut relations = Vec::with_capacity(doc.relations.len());
        for rel in doc.relations {
            let rel = Relation {
                organism: rel
                    .organism
                    .normalized()
                    .map_err(|e| Error::malformed(source_name, line_no, "organism", e.to_string()))?,
                chemical: rel
                    .chemical
                    .normalized()
                    .map_err(|e| Error::malformed(source_name, line_no, "chemical", e.to_string()))?,
                chemical_class: rel.chemical_class,
            };
            rel.check_kinds()
                .map_err(|e| Error::malformed(source_name, line_no, "relations", e.to_string()))?;
            relations.push(rel);
        }
        doc.relations = relations;
        doc.abstract_text = doc.abstract_text.filter(|a| !a.trim().is_empty());
        doc.dedup_relations();
        documents.push(doc);
    }
    Ok(Corpus::new(documents))
}

/// Keeps documents reporting strictly fewer than `max_relations` relations.
pub fn filter_by_relation_count(corpus: &Corpus, max_relations: usize) -> Corpus {
    corpus.retain(|d| d.n_relations() < max_relations)
}

/// Drops relations whose chemical label is longer than `max_chars` unicode
/// scalar values, then drops documents left without relations.
pub fn filter_by_label_length(corpus: &Corpus, max_chars: usize) -> Corpus {
    let documents = corpus
        .documents
        .iter()
        .filter_map(|d| {
            let relations: Vec<Relation> = d
                .relations
                .iter()
                .filter(|r| char_len(&r.chemical.label) <= max_chars)
                .cloned()
                .collect();
            (!relations.is_empty()).then(|| Document {
                relations,
                ..d.clone()
            })
        })
        .collect();
    Corpus::new(documents)
}

pub fn filter_by_abstract_availability(corpus: &Corpus) -> Corpus {
    corpus.retain(Document::has_abstract)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessConfig {
    pub max_relations: usize,
    pub max_label_chars: usize,
    pub require_abstract: bool,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        PreprocessConfig {
            max_relations: 20,
            max_label_chars: 60,
            require_abstract: true,
        }
    }
}

/// Abstract availability, then relation count, then chemical label length.
pub fn preprocess(corpus: &Corpus, cfg: &PreprocessConfig) -> Result<Corpus> {
    if cfg.max_relations == 0 || cfg.max_label_chars == 0 {
        return Err(Error::Usage(
            "max_relations and max_label_chars must be at least 1".into(),
        ));
    }
    let mut out = if cfg.require_abstract {
        filter_by_abstract_availability(corpus)
    } else {
        corpus.clone()
    };
    out = filter_by_relation_count(&out, cfg.max_relations);
    Ok(filter_by_label_length(&out, cfg.max_label_chars))
}

/// Splits the corpus by stratum label. Corpus order is kept inside each part.
pub fn stratify(corpus: &Corpus) -> BTreeMap<String, Corpus> {
    let mut parts: BTreeMap<String, Vec<Document>> = BTreeMap::new();
    for doc in &corpus.documents {
        parts.entry(doc.stratum.clone()).or_default().push(doc.clone());
    }
    parts
        .into_iter()
        .map(|(s, docs)| (s, Corpus::new(docs)))
        .collect()
}

#[cfg(test)]
pub(crate) use tests::doc as test_doc;

#[cfg(test)]
mod tests {
    use super::*;

    const HEADER: &str = "doc_id\ttitle\tabstract\tstratum\torganism_id\torganism_label\torganism_synonyms\tchemical_id\tchemical_label\tchemical_synonyms\n";

    fn tsv(rows: &[&str]) -> String {
        let mut s = HEADER.to_string();
        for r in rows {
            s.push_str(r);
            s.push('\n');
        }
        s
    }

    pub(crate) fn doc(id: &str, stratum: &str, pairs: &[(&str, &str)]) -> Document {
        Document {
            id: id.into(),
            title: format!("title {id}"),
            abstract_text: Some(format!("abstract {id}")),
            stratum: stratum.into(),
            relations: pairs
                .iter()
                .map(|(o, c)| {
                    Relation::new(
                        Entity::new(*o, o, Vec::<&str>::new(), EntityKind::Organism).unwrap(),
                        Entity::new(*c, c, Vec::<&str>::new(), EntityKind::Chemical).unwrap(),
                    )
                    .unwrap()
                })
                .collect(),
        }
    }

    #[test]
    fn three_rows_two_documents() {
        let data = tsv(&[
            "d1\tT1\tA1\tFungi\tQ1\tAspergillus niger\tA. niger|Aspergillus niger\tC1\tgloeophyllin A\t",
            "d1\tT1\tA1\tFungi\tQ1\tAspergillus niger\t\tC2\tgloeophyllin B\tGB",
            "d2\tT2\t\tMetazoa\tQ2\tHomo sapiens\t\tC1\tgloeophyllin A\t",
        ]);
        let corpus = read_tsv(data.as_bytes(), "t").unwrap();
        assert_eq!(corpus.len(), 2);
        assert_eq!(corpus.documents[0].n_relations(), 2);
        assert_eq!(corpus.documents[1].n_relations(), 1);
        assert_eq!(corpus.documents[1].abstract_text, None);
        let syn = &corpus.documents[0].relations[0].organism.synonyms;
        assert_eq!(syn.len(), 1, "label removed from synonyms");
        assert_eq!(corpus.entity_index["C1"], 2);
        assert!(corpus.is_consistent());
    }

    #[test]
    fn empty_inputs() {
        assert!(read_tsv("".as_bytes(), "t").unwrap().is_empty());
        assert!(read_tsv(HEADER.as_bytes(), "t").unwrap().is_empty());
        assert!(read_jsonl("".as_bytes(), "t").unwrap().is_empty());
    }

    #[test]
    fn missing_chemical_label_names_line() {
        let data = tsv(&[
            "d1\tT\tA\tFungi\tQ1\tAspergillus\t\tC1\tx\t",
            "d1\tT\tA\tFungi\tQ1\tAspergillus\t\tC2\t \t",
        ]);
        let err = read_tsv(data.as_bytes(), "dump.tsv").unwrap_err();
        match err {
            Error::Malformed { line, field, .. } => {
                assert_eq!(line, 3);
                assert_eq!(field, "chemical_label");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_stratum_column_is_an_error() {
        let data = "doc_id\ttitle\tabstract\torganism_id\torganism_label\torganism_synonyms\tchemical_id\tchemical_label\tchemical_synonyms\n";
        let err = read_tsv(data.as_bytes(), "t").unwrap_err();
        assert!(matches!(err, Error::Malformed { ref field, .. } if field == "stratum"));
    }

    #[test]
    fn duplicate_rows_collapse() {
        let data = tsv(&[
            "d1\tT\tA\tFungi\tQ1\tAspergillus\t\tC1\tx\t",
            "d1\tT\tA\tFungi\tQ1\tAspergillus\t\tC1\tx\t",
        ]);
        let corpus = read_tsv(data.as_bytes(), "t").unwrap();
        assert_eq!(corpus.documents[0].n_relations(), 1);
    }

    #[test]
    fn multi_kingdom_document_goes_to_majority_then_lexicographic() {
        let data = tsv(&[
            "d1\tT\tA\tMetazoa\tQ1\tsponge\t\tC1\tx\t",
            "d1\tT\tA\tFungi\tQ2\tmould\t\tC2\ty\t",
            "d1\tT\tA\tMetazoa\tQ3\tcoral\t\tC3\tz\t",
            "d2\tT\tA\tMetazoa\tQ1\tsponge\t\tC1\tx\t",
            "d2\tT\tA\tFungi\tQ2\tmould\t\tC2\ty\t",
        ]);
        let corpus = read_tsv(data.as_bytes(), "t").unwrap();
        assert_eq!(corpus.documents[0].stratum, "Metazoa");
        assert_eq!(corpus.documents[1].stratum, "Fungi");
    }

    #[test]
    fn relation_count_boundaries() {
        let mk = |id: &str, n: usize| {
            let pairs: Vec<(String, String)> =
                (0..n).map(|i| ("o".to_string(), format!("c{i}"))).collect();
            let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
            doc(id, "Fungi", &refs)
        };
        let corpus = Corpus::new(vec![mk("a", 25), mk("b", 19), mk("c", 20)]);
        let kept = filter_by_relation_count(&corpus, 20);
        let ids: Vec<_> = kept.documents.iter().map(|d| d.id.as_str()).collect();
        assert_eq!(ids, ["b"]);
    }

    #[test]
    fn label_length_boundaries() {
        let long61 = "x".repeat(61);
        let exact60 = "β".repeat(60);
        let corpus = Corpus::new(vec![
            doc("a", "Fungi", &[("o", &long61), ("o", &exact60)]),
            doc("b", "Fungi", &[("o", &long61)]),
        ]);
        let kept = filter_by_label_length(&corpus, 60);
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.documents[0].relations[0].chemical.label, exact60);
        assert!(!kept.entity_index.contains_key(&long61));
    }

    #[test]
    fn abstract_availability() {
        let mut a = doc("a", "Fungi", &[("o", "c")]);
        a.abstract_text = None;
        let mut b = doc("b", "Fungi", &[("o", "c")]);
        b.abstract_text = Some("   ".into());
        let mut c = doc("c", "Fungi", &[("o", "c")]);
        c.abstract_text = Some("Three new metabolites...".into());
        let kept = filter_by_abstract_availability(&Corpus::new(vec![a, b, c]));
        assert_eq!(kept.len(), 1);
        assert_eq!(kept.documents[0].id, "c");
    }

    #[test]
    fn stratify_partitions() {
        let corpus = Corpus::new(vec![
            doc("a", "Fungi", &[("o", "c")]),
            doc("b", "Metazoa", &[("o", "c")]),
            doc("c", "Fungi", &[("o", "d")]),
        ]);
        let parts = stratify(&corpus);
        assert_eq!(parts.len(), 2);
        assert_eq!(parts["Fungi"].len(), 2);

        let single = Corpus::new(vec![doc("a", "Fungi", &[("o", "c")])]);
        let parts = stratify(&single);
        assert_eq!(parts["Fungi"], single);
    }

    #[test]
    fn jsonl_rejects_bad_kinds_and_duplicates() {
        let line = r#"{"id":"d1","title":"t","abstract":"a","stratum":"Fungi","relations":[{"organism":{"id":"o","label":"O","kind":"chemical"},"chemical":{"id":"c","label":"C","kind":"chemical"}}]}"#;
        assert!(read_jsonl(line.as_bytes(), "t").is_err());
        let ok = r#"{"id":"d1","title":"t","abstract":"a","stratum":"Fungi","relations":[{"organism":{"id":"o","label":"O","kind":"organism"},"chemical":{"id":"c","label":"C","synonyms":["C","c2"],"kind":"chemical"}}]}"#;
        let corpus = read_jsonl(format!("{ok}\n\n").as_bytes(), "t").unwrap();
        assert_eq!(corpus.documents[0].relations[0].chemical.synonyms.len(), 1);
        let dup = format!("{ok}\n{ok}\n");
        assert!(matches!(
            read_jsonl(dup.as_bytes(), "t"),
            Err(Error::DuplicateDocument(_))
        ));
    }
}


//! Where do standardized labels actually appear in an abstract?
//!
//! Entities are matched by case-folded exact search at word boundaries,
//! label first, then synonyms. Chemicals that are only mentioned through a
//! co-joined enumeration ("cystodiones A-D", "wortmannins C and D") are
//! recognised by expanding every enumeration found in the text.
//!
//! Pattern inventory (version 1):
//!
//! * letter range: `<stem>[s] A-D`, any of `- ‐ ‑ ‒ – —` as the dash,
//!   optionally followed by numbering such as `(1-4)`;
//! * letter list: `<stem>[s] C and D`, `<stem>[s] A, B(,) and C`, with the
//!   same optional numbering;
//! * numbered range: `<stem>[s] 1-3` (outside parentheses), at most 50
//!   members.
//!
//! A trailing `s` is stripped from the stem before expansion.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::Read;
use std::path::Path;
use std::sync::LazyLock;

use rayon::prelude::*;
use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Entity, EntityKind};
use crate::error::{Error, Result};
use crate::text::{fold_char, loose_key};

pub const PATTERN_VERSION: u32 = 1;

const MAX_NUMBERED_MEMBERS: u32 = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MentionStatus {
    MatchedLabel,
    MatchedSynonym,
    MultipleImplicit,
    NotFound,
}

impl MentionStatus {
    pub fn is_found(self) -> bool {
        self != MentionStatus::NotFound
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionVerdict {
    pub entity_id: String,
    pub kind: EntityKind,
    pub status: MentionStatus,
    pub matched_surface: Option<String>,
    /// Character offsets `[start, end)` into the abstract.
    pub span: Option<(usize, usize)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationKind {
    LetterRange,
    LetterList,
    NumberedRange,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationPattern {
    pub stem: String,
    pub kind: EnumerationKind,
    pub members: Vec<String>,
    pub surface: String,
    /// Character offsets `[start, end)` of `surface`.
    pub span: (usize, usize),
}

/// Case-folded text with the original characters kept for slicing.
struct FoldedText {
    original: Vec<char>,
    folded: Vec<char>,
}

impl FoldedText {
    fn new(s: &str) -> Self {
        let original: Vec<char> = s.chars().collect();
        let folded = original.iter().map(|&c| fold_char(c)).collect();
        FoldedText { original, folded }
    }

    fn surface(&self, start: usize, end: usize) -> String {
        self.original[start..end].iter().collect()
    }

    /// Leftmost occurrence of `needle` not flanked by letters or digits.
    /// Whitespace in the needle matches any single whitespace character.
    fn find(&self, needle: &str) -> Option<(usize, usize)> {
        let needle: Vec<char> = needle.trim().chars().map(fold_char).collect();
        let n = needle.len();
        if n == 0 || n > self.folded.len() {
            return None;
        }
        let hay = &self.folded;
        (0..=hay.len() - n).find_map(|start| {
            let end = start + n;
            let same = needle.iter().zip(&hay[start..end]).all(|(&a, &b)| {
                a == b || (a.is_whitespace() && b.is_whitespace())
            });
            let bounded = (start == 0 || !hay[start - 1].is_alphanumeric())
                && (end == hay.len() || !hay[end].is_alphanumeric());
            (same && bounded).then_some((start, end))
        })
    }
}

/// Exact (case-folded, word-bounded) search for the entity label, then its
/// synonyms. Among synonyms the leftmost hit wins, longer surface first.
pub fn match_entity(abstract_text: &str, entity: &Entity) -> MentionVerdict {
    match_with_synonyms(&FoldedText::new(abstract_text), entity, entity.synonyms.iter())
}

fn match_with_synonyms<'a>(
    text: &FoldedText,
    entity: &Entity,
    synonyms: impl Iterator<Item = &'a String>,
) -> MentionVerdict {
    let verdict = |status, hit: Option<(usize, usize)>| MentionVerdict {
        entity_id: entity.id.clone(),
        kind: entity.kind,
        status,
        matched_surface: hit.map(|(s, e)| text.surface(s, e)),
        span: hit,
    };
    if let Some(hit) = text.find(&entity.label) {
        return verdict(MentionStatus::MatchedLabel, Some(hit));
    }
    let best = synonyms
        .filter_map(|s| text.find(s))
        .min_by_key(|&(s, e)| (s, std::cmp::Reverse(e)));
    match best {
        Some(hit) => verdict(MentionStatus::MatchedSynonym, Some(hit)),
        None => verdict(MentionStatus::NotFound, None),
    }
}

const STEM: &str = r"(?P<stem>[\p{L}\p{N}][\p{L}\p{N}'′\-]*)";
const DASH: &str = r"[-‐‑‒–—]";

static LETTER_RANGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"{STEM}\s+(?P<a>[A-Z])\s*{DASH}\s*(?P<b>[A-Z])\b(?P<num>\s*\(\s*\d+\s*(?:{DASH}|,|and|\s|\d)*\))?"
    ))
    .expect("letter range pattern")
});

static LETTER_LIST: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(
        r"{STEM}\s+(?P<first>[A-Z])(?P<mid>(?:\s*,\s*[A-Z]\b)*)\s*,?\s+and\s+(?P<last>[A-Z])\b(?P<num>\s*\(\s*\d+\s*(?:{DASH}|,|and|\s|\d)*\))?"
    ))
    .expect("letter list pattern")
});

static NUMBERED_RANGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"{STEM}\s+(?P<a>\d+)\s*{DASH}\s*(?P<b>\d+)\b"))
        .expect("numbered range pattern")
});

static SERIES_STEM: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"^[\p{L}\p{N}][\p{L}\p{N}'′\-]*$").expect("stem pattern"));

fn singular(stem: &str) -> &str {
    match stem.strip_suffix('s') {
        Some(s) if !s.is_empty() => s,
        _ => stem,
    }
}

fn char_offset(s: &str, byte: usize) -> usize {
    s[..byte].chars().count()
}

/// Finds co-joined enumerations and expands them to singular member labels.
/// Results are ordered by position and never overlap.
pub fn detect_enumerations(abstract_text: &str) -> Vec<EnumerationPattern> {
    let mut found: Vec<(usize, usize, EnumerationPattern)> = Vec::new();
    let mut push = |m: regex::Match, stem: &str, kind, members: Vec<String>| {
        if members.len() < 2 {
            return;
        }
        let (start, end) = (m.start(), m.end());
        found.push((
            start,
            end,
            EnumerationPattern {
                stem: stem.to_string(),
                kind,
                members,
                surface: m.as_str().to_string(),
                span: (char_offset(abstract_text, start), char_offset(abstract_text, end)),
            },
        ));
    };
    let letter = |caps: &regex::Captures, name: &str| caps[name].chars().next().expect("one letter");

    for caps in LETTER_RANGE.captures_iter(abstract_text) {
        let stem = singular(&caps["stem"]);
        let (a, b) = (letter(&caps, "a"), letter(&caps, "b"));
        if b <= a {
            continue;
        }
        let members = (a..=b).map(|l| format!("{stem} {l}")).collect();
        push(caps.get(0).expect("match"), stem, EnumerationKind::LetterRange, members);
    }
    for caps in LETTER_LIST.captures_iter(abstract_text) {
        let stem = singular(&caps["stem"]);
        let mut letters = vec![letter(&caps, "first")];
        letters.extend(caps["mid"].chars().filter(char::is_ascii_uppercase));
        letters.push(letter(&caps, "last"));
        let distinct: BTreeSet<char> = letters.iter().copied().collect();
        if distinct.len() != letters.len() {
            continue;
        }
        let members = letters.iter().map(|l| format!("{stem} {l}")).collect();
        push(caps.get(0).expect("match"), stem, EnumerationKind::LetterList, members);
    }
    for caps in NUMBERED_RANGE.captures_iter(abstract_text) {
        let whole = caps.get(0).expect("match");
        if abstract_text[..whole.start()].ends_with('(') {
            continue;
        }
        let (Ok(a), Ok(b)) = (caps["a"].parse::<u32>(), caps["b"].parse::<u32>()) else {
            continue;
        };
        if b <= a || b - a + 1 > MAX_NUMBERED_MEMBERS {
            continue;
        }
        let stem = singular(&caps["stem"]);
        let members = (a..=b).map(|n| format!("{stem} {n}")).collect();
        push(whole, stem, EnumerationKind::NumberedRange, members);
    }

    found.sort_by(|x, y| x.0.cmp(&y.0).then(y.1.cmp(&x.1)));
    let mut out: Vec<EnumerationPattern> = Vec::new();
    let mut last_end = 0;
    for (start, end, pat) in found {
        if !out.is_empty() && start < last_end {
            continue;
        }
        last_end = end;
        out.push(pat);
    }
    out
}

/// Splits `"gloeophyllin A"` into `("gloeophyllin", 'A')` when the label is
/// a single-token stem followed by one capital letter.
pub fn split_series_label(label: &str) -> Option<(&str, char)> {
    let (stem, suffix) = label.trim().rsplit_once(' ')?;
    let mut chars = suffix.chars();
    let letter = chars.next()?;
    if chars.next().is_some() || !letter.is_ascii_uppercase() || !SERIES_STEM.is_match(stem) {
        return None;
    }
    Some((stem, letter))
}

/// Inverse of [`detect_enumerations`] for letter series: `"stems A-D"` for
/// consecutive letters, `"stems A, C and D"` otherwise, with optional
/// numbering `(first-last)` appended.
pub fn contract_series(stem: &str, letters: &[char], numbering: Option<usize>) -> String {
    let mut letters = letters.to_vec();
    letters.sort_unstable();
    letters.dedup();
    assert!(letters.len() >= 2, "a series needs at least two members");
    let consecutive = letters.windows(2).all(|w| w[1] as u32 == w[0] as u32 + 1);
    let series = if consecutive {
        format!("{}-{}", letters[0], letters[letters.len() - 1])
    } else {
        let head: Vec<String> = letters[..letters.len() - 1].iter().map(char::to_string).collect();
        format!("{} and {}", head.join(", "), letters[letters.len() - 1])
    };
    let mut out = format!("{stem}s {series}");
    if let Some(first) = numbering {
        out.push_str(&format!(" ({}-{})", first, first + letters.len() - 1));
    }
    out
}

/// Extra synonyms keyed by entity id, loaded from a two-column TSV
/// (`entity_id`, `synonym`). A header row with those names is skipped.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SynonymTable {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl SynonymTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, id: impl Into<String>, synonym: impl Into<String>) {
        let synonym = synonym.into().trim().to_string();
        if !synonym.is_empty() {
            self.entries.entry(id.into()).or_default().insert(synonym);
        }
    }

    pub fn get(&self, id: &str) -> impl Iterator<Item = &String> {
        self.entries.get(id).into_iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(BTreeSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read(file, &path.display().to_string())
    }

    pub fn read(reader: impl Read, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .delimiter(b'\t')
            .quoting(false)
            .flexible(true)
            .has_headers(false)
            .from_reader(reader);
        let mut table = SynonymTable::new();
        for (i, record) in rdr.records().enumerate() {
            let record = record?;
            let line = i as u64 + 1;
            if record.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            let id = record.get(0).unwrap_or("").trim();
            let synonym = record
                .get(1)
                .ok_or_else(|| Error::malformed(source_name, line, "synonym", "missing field"))?;
            if i == 0 && id == "entity_id" && synonym.trim() == "synonym" {
                continue;
            }
            if id.is_empty() {
                return Err(Error::malformed(source_name, line, "entity_id", "empty value"));
            }
            table.insert(id, synonym);
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusCounts {
    pub matched_label: usize,
    pub matched_synonym: usize,
    pub multiple_implicit: usize,
    pub not_found: usize,
}

impl StatusCounts {
    fn record(&mut self, status: MentionStatus) {
        match status {
            MentionStatus::MatchedLabel => self.matched_label += 1,
            MentionStatus::MatchedSynonym => self.matched_synonym += 1,
            MentionStatus::MultipleImplicit => self.multiple_implicit += 1,
            MentionStatus::NotFound => self.not_found += 1,
        }
    }

    fn merge(&mut self, other: &StatusCounts) {
        self.matched_label += other.matched_label;
        self.matched_synonym += other.matched_synonym;
        self.multiple_implicit += other.multiple_implicit;
        self.not_found += other.not_found;
    }

    pub fn total(&self) -> usize {
        self.matched_label + self.matched_synonym + self.multiple_implicit + self.not_found
    }

    /// Share of entities found explicitly (label or synonym).
    pub fn explicit_rate(&self) -> f64 {
        match self.total() {
            0 => 0.0,
            t => (self.matched_label + self.matched_synonym) as f64 / t as f64,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MentionSummary {
    pub by_kind: BTreeMap<EntityKind, StatusCounts>,
    pub relations: usize,
    /// Relations whose organism and chemical were both found.
    pub complete_relations: usize,
}

impl MentionSummary {
    fn merge(&mut self, other: &MentionSummary) {
        for (kind, counts) in &other.by_kind {
            self.by_kind.entry(*kind).or_default().merge(counts);
        }
        self.relations += other.relations;
        self.complete_relations += other.complete_relations;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMentions {
    pub doc_id: String,
    pub verdicts: Vec<MentionVerdict>,
    pub enumerations: Vec<EnumerationPattern>,
    pub summary: MentionSummary,
}

impl DocumentMentions {
    pub fn pair_complete(&self) -> bool {
        self.summary.relations == self.summary.complete_relations
    }
}

/// Verdict for every distinct relation partner of `doc`.
pub fn classify_document_mentions(doc: &Document, synonyms: &SynonymTable) -> Result<DocumentMentions> {
    let abstract_text = doc
        .abstract_text
        .as_deref()
        .filter(|a| !a.trim().is_empty())
        .ok_or_else(|| Error::Data(format!("document `{}` has no abstract", doc.id)))?;
    let text = FoldedText::new(abstract_text);
    let enumerations = detect_enumerations(abstract_text);
    let members: BTreeSet<String> = enumerations
        .iter()
        .flat_map(|e| e.members.iter().map(|m| loose_key(m)))
        .collect();

    let mut verdicts: Vec<MentionVerdict> = Vec::new();
    let mut index: BTreeMap<(EntityKind, String), usize> = BTreeMap::new();
    let mut classify = |entity: &Entity, verdicts: &mut Vec<MentionVerdict>| -> usize {
        let key = (entity.kind, entity.id.clone());
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let mut all: BTreeSet<&String> = entity.synonyms.iter().collect();
        all.extend(synonyms.get(&entity.id));
        let mut v = match_with_synonyms(&text, entity, all.into_iter());
        if v.status == MentionStatus::NotFound
            && entity.kind != EntityKind::Organism
            && members.contains(&loose_key(&entity.label))
        {
            v.status = MentionStatus::MultipleImplicit;
        }
        verdicts.push(v);
        index.insert(key, verdicts.len() - 1);
        verdicts.len() - 1
    };

    let mut summary = MentionSummary::default();
    for rel in &doc.relations {
        let o = classify(&rel.organism, &mut verdicts);
        let c = classify(&rel.chemical, &mut verdicts);
        summary.relations += 1;
        if verdicts[o].status.is_found() && verdicts[c].status.is_found() {
            summary.complete_relations += 1;
        }
    }
    for v in &verdicts {
        summary.by_kind.entry(v.kind).or_default().record(v.status);
    }
    Ok(DocumentMentions {
        doc_id: doc.id.clone(),
        verdicts,
        enumerations,
        summary,
    })
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MismatchReport {
    pub pattern_version: u32,
    pub documents: usize,
    pub skipped_without_abstract: usize,
    pub pair_complete_documents: usize,
    pub summary: MentionSummary,
    /// Share of entities found explicitly, per kind.
    pub explicit_rate: BTreeMap<EntityKind, f64>,
}

/// Corpus-level tallies; documents without an abstract are counted and skipped.
pub fn mismatch_report(corpus: &Corpus, synonyms: &SynonymTable) -> MismatchReport {
    let per_doc: Vec<Option<DocumentMentions>> = corpus
        .documents
        .par_iter()
        .map(|d| classify_document_mentions(d, synonyms).ok())
        .collect();
    let mut report = MismatchReport {
        pattern_version: PATTERN_VERSION,
        ..Default::default()
    };
    for m in per_doc {
        match m {
            Some(m) => {
                report.documents += 1;
                if m.pair_complete() {
                    report.pair_complete_documents += 1;
                }
                report.summary.merge(&m.summary);
            }
            None => report.skipped_without_abstract += 1,
        }
    }
    report.explicit_rate = report
        .summary
        .by_kind
        .iter()
        .map(|(k, c)| (*k, c.explicit_rate()))
        .collect();
    report
}

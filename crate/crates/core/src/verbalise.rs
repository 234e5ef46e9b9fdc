//! Findings verbaliser and prompt assembly for synthetic abstracts.
//!
//! A document's relations are rendered as one bullet per organism, after a
//! random draw of five expression transformations:
//!
//! 1. class replacement: a same-class group of chemicals becomes
//!    "five Meroterpenoids" and a single class-level relation;
//! 2. contraction: `gloeophyllin A`, `gloeophyllin B` become
//!    "gloeophyllins A-B" (text only, the expected labels are unchanged);
//! 3. shuffle of the item order, applied to the expected labels as well;
//! 4. numbering "(1-3)" appended to a contracted series;
//! 5. direction: "C was isolated from O" instead of "O produces C".
//!
//! Every draw comes from `TransformationConfig::rng_seed`, always in the
//! same order, so a seed fully determines the findings.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, Document, Entity, EntityKind, Relation};
use crate::error::{Error, Result};
use crate::mention::{contract_series, split_series_label, SynonymTable};
use crate::seed::derive_seed;
use crate::text::{char_len, loose_key};

pub const DEFAULT_TEMPLATE: &str = "abstract_v1";
pub const CLASS_ID_PREFIX: &str = "class:";

const BUILTIN_TEMPLATES: &[(&str, &str)] = &[
    ("abstract_v1", include_str!("../templates/abstract_v1.txt")),
    ("abstract_short_v1", include_str!("../templates/abstract_short_v1.txt")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformationConfig {
    pub p_class_replace: f64,
    pub p_contract: f64,
    pub p_shuffle: f64,
    pub p_number: f64,
    /// Chance of the "isolated from" phrasing.
    pub p_direction: f64,
    pub temperatures: Vec<f64>,
    pub rng_seed: u64,
}

impl Default for TransformationConfig {
    fn default() -> Self {
        TransformationConfig {
            p_class_replace: 0.2,
            p_contract: 0.9,
            p_shuffle: 0.25,
            p_number: 0.9,
            p_direction: 0.5,
            temperatures: vec![0.5, 0.6, 0.7, 0.8],
            rng_seed: 0,
        }
    }
}

impl TransformationConfig {
    /// Every transformation off; used for the plain rendering.
    pub fn identity() -> Self {
        TransformationConfig {
            p_class_replace: 0.0,
            p_contract: 0.0,
            p_shuffle: 0.0,
            p_number: 0.0,
            p_direction: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, p) in [
            ("p_class_replace", self.p_class_replace),
            ("p_contract", self.p_contract),
            ("p_shuffle", self.p_shuffle),
            ("p_number", self.p_number),
            ("p_direction", self.p_direction),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Usage(format!("{name} = {p} is not a probability")));
            }
        }
        if self.temperatures.is_empty() {
            return Err(Error::Usage("temperatures must not be empty".into()));
        }
        if self.temperatures.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::Usage("temperatures must be finite and non-negative".into()));
        }
        Ok(())
    }

    pub fn with_seed(&self, rng_seed: u64) -> Self {
        TransformationConfig {
            rng_seed,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transformation {
    ClassReplace,
    Contract,
    Shuffle,
    Number,
    Direction,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Produces,
    IsolatedFrom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerbalisedFindings {
    pub text: String,
    pub expected_relations: Vec<Relation>,
    pub applied: BTreeSet<Transformation>,
    pub direction: Direction,
    pub temperature: f64,
}

enum Item {
    Single(Relation),
    Class { label: String, members: Vec<Relation> },
    Series { stem: String, members: Vec<(char, Relation)>, numbered: bool },
}

impl Item {
    fn chemical_count(&self) -> usize {
        match self {
            Item::Single(_) => 1,
            Item::Class { members, .. } => members.len(),
            Item::Series { members, .. } => members.len(),
        }
    }
}

struct Group {
    organism: Entity,
    items: Vec<Item>,
}

fn number_word(n: usize) -> String {
    const WORDS: [&str; 21] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
        "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
        "eighteen", "nineteen", "twenty",
    ];
    WORDS.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

fn class_entity(label: &str) -> Entity {
    Entity {
        id: format!("{CLASS_ID_PREFIX}{label}"),
        label: label.to_string(),
        synonyms: BTreeSet::new(),
        kind: EntityKind::ChemicalClass,
    }
}

fn join_list(parts: &[String]) -> String {
    match parts {
        [] => String::new(),
        [one] => one.clone(),
        [head @ .., last] => format!("{} and {}", head.join(", "), last),
    }
}

/// Indices of `rels` grouped by `key`, groups in first-appearance order.
fn group_indices<K: Ord + Clone>(rels: &[&Relation], key: impl Fn(&Relation) -> Option<K>) -> Vec<(K, Vec<usize>)> {
    let mut order: Vec<(K, Vec<usize>)> = Vec::new();
    let mut slot: BTreeMap<K, usize> = BTreeMap::new();
    for (i, r) in rels.iter().enumerate() {
        let Some(k) = key(r) else { continue };
        match slot.get(&k) {
            Some(&s) => order[s].1.push(i),
            None => {
                slot.insert(k.clone(), order.len());
                order.push((k, vec![i]));
            }
        }
    }
    order
}

fn build_items(
    rels: &[&Relation],
    class_map: &BTreeMap<String, String>,
    cfg: &TransformationConfig,
    rng: &mut ChaCha8Rng,
    applied: &mut BTreeSet<Transformation>,
) -> Vec<Item> {
    // Each position holds the item that starts there; consumed members are None.
    let mut slots: Vec<Option<Item>> = rels.iter().map(|r| Some(Item::Single((*r).clone()))).collect();
    let mut taken = vec![false; rels.len()];

    let class_of = |r: &Relation| {
        class_map
            .get(&r.chemical.id)
            .or(r.chemical_class.as_ref())
            .filter(|c| !c.trim().is_empty())
            .cloned()
    };
    for (label, members) in group_indices(rels, class_of) {
        if members.len() < 2 || !rng.random_bool(cfg.p_class_replace) {
            continue;
        }
        applied.insert(Transformation::ClassReplace);
        for &i in &members {
            taken[i] = true;
            slots[i] = None;
        }
        slots[members[0]] = Some(Item::Class {
            label,
            members: members.iter().map(|&i| rels[i].clone()).collect(),
        });
    }

    let stem_of = |r: &Relation| split_series_label(&r.chemical.label).map(|(s, _)| s.to_string());
    let free: Vec<usize> = (0..rels.len()).filter(|&i| !taken[i]).collect();
    let free_rels: Vec<&Relation> = free.iter().map(|&i| rels[i]).collect();
    for (stem, local) in group_indices(&free_rels, stem_of) {
        let members: Vec<usize> = local.iter().map(|&j| free[j]).collect();
        let mut letters: Vec<(char, usize)> = members
            .iter()
            .map(|&i| (split_series_label(&rels[i].chemical.label).expect("grouped by stem").1, i))
            .collect();
        letters.sort_unstable();
        letters.dedup_by_key(|(l, _)| *l);
        if letters.len() < 2 || !rng.random_bool(cfg.p_contract) {
            continue;
        }
        applied.insert(Transformation::Contract);
        for &(_, i) in &letters {
            slots[i] = None;
        }
        let first = letters.iter().map(|&(_, i)| i).min().expect("non-empty");
        slots[first] = Some(Item::Series {
            stem,
            members: letters.iter().map(|&(l, i)| (l, rels[i].clone())).collect(),
            numbered: false,
        });
    }
    slots.into_iter().flatten().collect()
}

/// Renders the findings block and the matching expected relations.
///
/// Duplicate (organism, chemical) pairs are collapsed first. Groups that
/// have no class annotation are never class-replaced.
pub fn verbalise_findings(
    relations: &[Relation],
    class_map: &BTreeMap<String, String>,
    cfg: &TransformationConfig,
) -> Result<VerbalisedFindings> {
    cfg.validate()?;
    let mut seen = BTreeSet::new();
    let relations: Vec<&Relation> = relations
        .iter()
        .filter(|r| seen.insert((r.organism.id.as_str(), r.chemical.id.as_str())))
        .collect();
    if relations.is_empty() {
        return Err(Error::Data("cannot verbalise an empty relation list".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut applied = BTreeSet::new();

    let mut groups: Vec<Group> = Vec::new();
    for (_, idx) in group_indices(&relations, |r| Some(r.organism.id.clone())) {
        let rels: Vec<&Relation> = idx.iter().map(|&i| relations[i]).collect();
        let items = build_items(&rels, class_map, cfg, &mut rng, &mut applied);
        groups.push(Group {
            organism: rels[0].organism.clone(),
            items,
        });
    }

    if rng.random_bool(cfg.p_shuffle) {
        applied.insert(Transformation::Shuffle);
        groups.shuffle(&mut rng);
        for g in &mut groups {
            g.items.shuffle(&mut rng);
        }
    }

    for item in groups.iter_mut().flat_map(|g| g.items.iter_mut()) {
        if let Item::Series { numbered, .. } = item {
            if rng.random_bool(cfg.p_number) {
                *numbered = true;
                applied.insert(Transformation::Number);
            }
        }
    }

    let direction = if rng.random_bool(cfg.p_direction) {
        applied.insert(Transformation::Direction);
        Direction::IsolatedFrom
    } else {
        Direction::Produces
    };
    let temperature = *cfg.temperatures.choose(&mut rng).expect("validated non-empty");

    let mut lines = Vec::with_capacity(groups.len());
    let mut expected = Vec::new();
    let mut compound_number = 1;
    for g in &groups {
        let mut parts = Vec::with_capacity(g.items.len());
        for item in &g.items {
            match item {
                Item::Single(r) => {
                    parts.push(r.chemical.label.clone());
                    expected.push(r.clone());
                }
                Item::Class { label, members } => {
                    parts.push(format!("{} {}", number_word(members.len()), label));
                    expected.push(Relation {
                        organism: g.organism.clone(),
                        chemical: class_entity(label),
                        chemical_class: Some(label.clone()),
                    });
                }
                Item::Series { stem, members, numbered } => {
                    let letters: Vec<char> = members.iter().map(|(l, _)| *l).collect();
                    parts.push(contract_series(stem, &letters, numbered.then_some(compound_number)));
                    expected.extend(members.iter().map(|(_, r)| r.clone()));
                }
            }
            compound_number += item.chemical_count();
        }
        let list = join_list(&parts);
        let line = match direction {
            Direction::Produces => format!("- {} produces {}.", g.organism.label, list),
            Direction::IsolatedFrom => {
                let singular = matches!(g.items.as_slice(), [Item::Single(_)]);
                let verb = if singular { "was" } else { "were" };
                format!("- {} {} isolated from {}.", list, verb, g.organism.label)
            }
        };
        lines.push(line);
    }

    Ok(VerbalisedFindings {
        text: lines.join("\n"),
        expected_relations: expected,
        applied,
        direction,
        temperature,
    })
}

/// Case-folded labels, synonyms and annotation surfaces that must not leak
/// into the keyword list.
pub fn build_exclusion_list(doc: &Document, annotations: &[String], synonyms: &SynonymTable) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for rel in &doc.relations {
        for e in [&rel.organism, &rel.chemical] {
            out.insert(loose_key(&e.label));
            out.extend(e.synonyms.iter().map(|s| loose_key(s)));
            out.extend(synonyms.get(&e.id).map(|s| loose_key(s)));
        }
    }
    out.extend(annotations.iter().map(|a| loose_key(a)));
    out.remove("");
    out
}

/// Drops every keyword equal to, containing, or contained in an excluded
/// entry, keeping the original order.
pub fn filter_keywords(candidates: &[String], exclusion: &BTreeSet<String>) -> Vec<String> {
    candidates
        .iter()
        .filter(|k| {
            let key = loose_key(k);
            !exclusion
                .iter()
                .filter(|e| !e.is_empty())
                .any(|e| key.contains(e.as_str()) || (!key.is_empty() && e.contains(key.as_str())))
        })
        .cloned()
        .collect()
}

/// Named prompt templates with `{title}`, `{keywords}` and `{findings}`
/// slots. `{{` and `}}` render literal braces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemplateStore {
    templates: BTreeMap<String, String>,
}

impl Default for TemplateStore {
    fn default() -> Self {
        Self::builtin()
    }
}

impl TemplateStore {
    pub fn builtin() -> Self {
        TemplateStore {
            templates: BUILTIN_TEMPLATES
                .iter()
                .map(|(id, body)| (id.to_string(), body.to_string()))
                .collect(),
        }
    }

    /// Adds every `*.txt` file of `dir` under its file stem, replacing
    /// built-ins with the same id.
    pub fn with_dir(mut self, dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let entries = fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "txt"))
            .collect();
        paths.sort();
        for path in paths {
            let body = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let id = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default();
            check_template(id, &body)?;
            self.templates.insert(id.to_string(), body);
        }
        Ok(self)
    }

    pub fn insert(&mut self, id: impl Into<String>, body: impl Into<String>) -> Result<()> {
        let (id, body) = (id.into(), body.into());
        check_template(&id, &body)?;
        self.templates.insert(id, body);
        Ok(())
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.templates.keys().map(String::as_str)
    }

    pub fn render(&self, id: &str, slots: &BTreeMap<&str, String>) -> Result<String> {
        let body = self
            .templates
            .get(id)
            .ok_or_else(|| Error::UnknownTemplate(id.to_string()))?;
        render_template(body, slots)
    }
}

fn check_template(id: &str, body: &str) -> Result<()> {
    let probe: BTreeMap<&str, String> = ["title", "keywords", "findings"]
        .into_iter()
        .map(|s| (s, String::new()))
        .collect();
    render_template(body, &probe)
        .map(|_| ())
        .map_err(|e| Error::Data(format!("template `{id}`: {e}")))
}

/// Single-pass substitution: slot values are inserted verbatim and never
/// re-scanned, so braces inside a title are harmless.
fn render_template(body: &str, slots: &BTreeMap<&str, String>) -> Result<String> {
    let mut out = String::with_capacity(body.len() + 256);
    let mut chars = body.chars().peekable();
    while let Some(c) = chars.next() {
        match c {
            '{' if chars.peek() == Some(&'{') => {
                chars.next();
                out.push('{');
            }
            '}' if chars.peek() == Some(&'}') => {
                chars.next();
                out.push('}');
            }
            '{' => {
                let name: String = chars.by_ref().take_while(|&c| c != '}').collect();
                let value = slots
                    .get(name.as_str())
                    .ok_or_else(|| Error::Data(format!("unknown template slot `{{{name}}}`")))?;
                out.push_str(value);
            }
            '}' => return Err(Error::Data("unmatched `}` in template".into())),
            c => out.push(c),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationInstruction {
    pub doc_id: String,
    pub instruction_index: usize,
    pub title: String,
    pub keywords: Vec<String>,
    pub findings: VerbalisedFindings,
    pub template_id: String,
    pub prompt_text: String,
    /// Character length of the seed abstract, used to rank candidates.
    pub reference_length: usize,
}

/// Renders the prompt for one instruction. `keywords` are expected to be
/// filtered already.
pub fn build_instruction(
    templates: &TemplateStore,
    doc: &Document,
    keywords: &[String],
    findings: VerbalisedFindings,
    template_id: &str,
) -> Result<GenerationInstruction> {
    let slots: BTreeMap<&str, String> = [
        ("title", doc.title.clone()),
        ("keywords", keywords.join(", ")),
        ("findings", findings.text.clone()),
    ]
    .into_iter()
    .collect();
    let prompt_text = templates.render(template_id, &slots)?;
    Ok(GenerationInstruction {
        doc_id: doc.id.clone(),
        instruction_index: 0,
        title: doc.title.clone(),
        keywords: keywords.to_vec(),
        findings,
        template_id: template_id.to_string(),
        prompt_text,
        reference_length: doc.abstract_text.as_deref().map_or(0, char_len),
    })
}

/// Inputs shared by every instruction of a run.
#[derive(Debug, Clone)]
pub struct InstructionPlan<'a> {
    pub transformations: &'a TransformationConfig,
    pub class_map: &'a BTreeMap<String, String>,
    pub templates: &'a TemplateStore,
    pub template_id: &'a str,
    /// Instructions per seed document.
    pub m: usize,
    pub root_seed: u64,
    pub max_keywords: usize,
}

/// `m` instructions for `doc`, each with its own seed derived from the
/// root seed, the document id and the instruction index.
pub fn instructions_for_document(
    plan: &InstructionPlan,
    doc: &Document,
    candidate_keywords: &[String],
    synonyms: &SynonymTable,
) -> Result<Vec<GenerationInstruction>> {
    let exclusion = build_exclusion_list(doc, &[], synonyms);
    let mut keywords = filter_keywords(candidate_keywords, &exclusion);
    keywords.truncate(plan.max_keywords);
    (0..plan.m)
        .map(|i| {
            let seed = derive_seed(plan.root_seed, &["verbalise", &doc.id, &i.to_string()]);
            let findings = verbalise_findings(&doc.relations, plan.class_map, &plan.transformations.with_seed(seed))?;
            let mut inst = build_instruction(plan.templates, doc, &keywords, findings, plan.template_id)?;
            inst.instruction_index = i;
            Ok(inst)
        })
        .collect()
}

/// Instructions for every document of `corpus`, documents in corpus order.
/// `keywords` maps doc ids to candidate keywords; missing ids get none.
pub fn verbalise_corpus(
    plan: &InstructionPlan,
    corpus: &Corpus,
    keywords: &BTreeMap<String, Vec<String>>,
    synonyms: &SynonymTable,
) -> Result<Vec<GenerationInstruction>> {
    let per_doc: Vec<Vec<GenerationInstruction>> = corpus
        .documents
        .par_iter()
        .map(|doc| {
            let kws = keywords.get(&doc.id).map(Vec::as_slice).unwrap_or_default();
            instructions_for_document(plan, doc, kws, synonyms)
        })
        .collect::<Result<_>>()?;
    Ok(per_doc.into_iter().flatten().collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KeywordRecord {
    pub doc_id: String,
    pub keywords: Vec<String>,
}

/// Reads `{doc_id, keywords}` lines into a map.
pub fn load_keywords(path: impl AsRef<Path>) -> Result<BTreeMap<String, Vec<String>>> {
    let records: Vec<KeywordRecord> = crate::jsonl::load_jsonl(path)?;
    Ok(records.into_iter().map(|r| (r.doc_id, r.keywords)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_doc;
    use crate::mention::detect_enumerations;

    fn always(t: Transformation) -> TransformationConfig {
        let mut cfg = TransformationConfig::identity();
        match t {
            Transformation::ClassReplace => cfg.p_class_replace = 1.0,
            Transformation::Contract => cfg.p_contract = 1.0,
            Transformation::Shuffle => cfg.p_shuffle = 1.0,
            Transformation::Number => cfg.p_number = 1.0,
            Transformation::Direction => cfg.p_direction = 1.0,
        }
        cfg
    }

    fn series(org: &str, stem: &str, letters: &str) -> Vec<Relation> {
        let pairs: Vec<(String, String)> = letters.chars().map(|l| (org.to_string(), format!("{stem} {l}"))).collect();
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        test_doc("d", "Fungi", &refs).relations
    }

    #[test]
    fn identity_lists_everything() {
        let rels = series("Gloeophyllum abietinum", "gloeophyllin", "ABC");
        let f = verbalise_findings(&rels, &BTreeMap::new(), &TransformationConfig::identity()).unwrap();
        assert_eq!(
            f.text,
            "- Gloeophyllum abietinum produces gloeophyllin A, gloeophyllin B and gloeophyllin C."
        );
        assert_eq!(f.direction, Direction::Produces);
        assert_eq!(f.expected_relations, rels);
        assert!(f.applied.is_empty());
    }

    #[test]
    fn contraction_keeps_labels() {
        let rels = series("Cystoderma amianthinum", "cystodione", "ABCD");
        let f = verbalise_findings(&rels, &BTreeMap::new(), &always(Transformation::Contract)).unwrap();
        assert!(f.text.contains("cystodiones A-D"), "{}", f.text);
        assert_eq!(f.expected_relations.len(), 4);
        let members = &detect_enumerations(&f.text)[0].members;
        assert_eq!(members, &["cystodione A", "cystodione B", "cystodione C", "cystodione D"]);
    }

    #[test]
    fn numbering_follows_compound_order() {
        let mut rels = test_doc("d", "F", &[("O", "alpha")]).relations;
        rels.extend(series("O", "gloeophyllin", "ABC"));
        let mut cfg = always(Transformation::Contract);
        cfg.p_number = 1.0;
        let f = verbalise_findings(&rels, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(f.text, "- O produces alpha and gloeophyllins A-C (2-4).");
        assert!(f.applied.contains(&Transformation::Number));
    }

    #[test]
    fn class_replacement_conserves_counts() {
        let rels = series("Hericium erinaceus", "hericenone", "ABCDE");
        let class_map: BTreeMap<String, String> =
            rels.iter().map(|r| (r.chemical.id.clone(), "Meroterpenoids".to_string())).collect();
        let f = verbalise_findings(&rels, &class_map, &always(Transformation::ClassReplace)).unwrap();
        assert_eq!(f.expected_relations.len(), 1);
        assert_eq!(rels.len(), f.expected_relations.len() + (5 - 1));
        let r = &f.expected_relations[0];
        assert_eq!(r.chemical.kind, EntityKind::ChemicalClass);
        assert_eq!(r.chemical.label, "Meroterpenoids");
        assert_eq!(f.text, "- Hericium erinaceus produces five Meroterpenoids.");
    }

    #[test]
    fn class_replacement_needs_annotation() {
        let rels = series("O", "x", "AB");
        let f = verbalise_findings(&rels, &BTreeMap::new(), &always(Transformation::ClassReplace)).unwrap();
        assert_eq!(f.expected_relations.len(), 2);
        assert!(!f.applied.contains(&Transformation::ClassReplace));
    }

    #[test]
    fn direction_flip() {
        let rels = test_doc("d", "F", &[("Isaria sinclairii", "myriocin")]).relations;
        let f = verbalise_findings(&rels, &BTreeMap::new(), &always(Transformation::Direction)).unwrap();
        assert_eq!(f.text, "- myriocin was isolated from Isaria sinclairii.");
        let rels = series("O", "x", "AB");
        let f = verbalise_findings(&rels, &BTreeMap::new(), &always(Transformation::Direction)).unwrap();
        assert_eq!(f.text, "- x A and x B were isolated from O.");
    }

    #[test]
    fn shuffle_keeps_text_and_labels_aligned() {
        let rels = test_doc(
            "d",
            "F",
            &[("O1", "c1"), ("O1", "c2"), ("O2", "c3"), ("O1", "c4"), ("O2", "c5")],
        )
        .relations;
        for seed in 0..20 {
            let f = verbalise_findings(&rels, &BTreeMap::new(), &always(Transformation::Shuffle).with_seed(seed)).unwrap();
            let positions: Vec<usize> = f
                .expected_relations
                .iter()
                .map(|r| f.text.find(&r.chemical.label).unwrap())
                .collect();
            assert!(positions.windows(2).all(|w| w[0] < w[1]), "{}", f.text);
        }
    }

    #[test]
    fn seeded_determinism() {
        let rels = series("O", "gloeophyllin", "ABCD");
        let cfg = TransformationConfig::default().with_seed(42);
        let a = verbalise_findings(&rels, &BTreeMap::new(), &cfg).unwrap();
        let b = verbalise_findings(&rels, &BTreeMap::new(), &cfg).unwrap();
        assert_eq!(a, b);
        assert!(cfg.temperatures.contains(&a.temperature));
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = TransformationConfig {
            p_shuffle: 1.5,
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = TransformationConfig {
            temperatures: Vec::new(),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        assert!(verbalise_findings(&[], &BTreeMap::new(), &TransformationConfig::default()).is_err());
    }

    #[test]
    fn keyword_filtering() {
        let doc = test_doc("d", "F", &[("Isaria sinclairii", "myriocin")]);
        let ex = build_exclusion_list(&doc, &["Myriocin".to_string()], &SynonymTable::new());
        assert_eq!(ex.len(), 2);
        let kws = vec![
            "antimicrobial activity".to_string(),
            "Isaria sinclairii".to_string(),
            "sinclairii".to_string(),
            "myriocin biosynthesis".to_string(),
        ];
        assert_eq!(filter_keywords(&kws, &ex), vec!["antimicrobial activity"]);
        assert_eq!(filter_keywords(&kws, &BTreeSet::new()), kws);
    }

    #[test]
    fn template_rendering() {
        let store = TemplateStore::builtin();
        let mut doc = test_doc("d", "F", &[("O", "c")]);
        doc.title = "A {weird} title with }} braces".into();
        let f = verbalise_findings(&doc.relations, &BTreeMap::new(), &TransformationConfig::identity()).unwrap();
        let a = build_instruction(&store, &doc, &[], f.clone(), DEFAULT_TEMPLATE).unwrap();
        let b = build_instruction(&store, &doc, &[], f.clone(), DEFAULT_TEMPLATE).unwrap();
        assert_eq!(a.prompt_text, b.prompt_text);
        assert!(a.prompt_text.contains("A {weird} title with }} braces"));
        assert!(a.prompt_text.contains("- O produces c."));
        assert!(matches!(
            build_instruction(&store, &doc, &[], f, "nope"),
            Err(Error::UnknownTemplate(_))
        ));
        let mut store = TemplateStore::builtin();
        assert!(store.insert("bad", "{nope}").is_err());
        store.insert("lit", "{{ {title} }}").unwrap();
        let slots = [("title", "T".to_string())].into_iter().collect();
        assert_eq!(store.render("lit", &slots).unwrap(), "{ T }");
    }

    #[test]
    fn m_instructions_are_distinct() {
        let doc = test_doc("d", "F", &[("O", "gloeophyllin A"), ("O", "gloeophyllin B")]);
        let cfg = TransformationConfig::default();
        let classes = BTreeMap::new();
        let store = TemplateStore::builtin();
        let plan = InstructionPlan {
            transformations: &cfg,
            class_map: &classes,
            templates: &store,
            template_id: DEFAULT_TEMPLATE,
            m: 10,
            root_seed: 7,
            max_keywords: 10,
        };
        let insts = instructions_for_document(&plan, &doc, &[], &SynonymTable::new()).unwrap();
        assert_eq!(insts.len(), 10);
        for (i, a) in insts.iter().enumerate() {
            for b in &insts[i + 1..] {
                assert_ne!(a, b);
            }
        }
    }
}

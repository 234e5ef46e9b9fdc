//! Synthetic abstract generation, candidate selection and dataset assembly.
//!
//! Prompts go to a [`GenerationBackend`] on a bounded worker pool. Each
//! candidate is scored by mention coverage: the share of expected relations
//! whose organism and chemical are both found in the generated text (label,
//! synonym, or a member of a co-joined enumeration). The selector keeps the
//! top `k` candidates with coverage at least `q` per seed document.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Document, Relation};
use crate::error::{Error, Result};
use crate::mention::{classify_document_mentions, SynonymTable};
use crate::score::linearise;
use crate::seed::{derive_seed, rng_for};
use crate::text::char_len;
use crate::verbalise::{GenerationInstruction, Transformation};

/// Text generation behind one call. Implementations must not keep per-call
/// state, so that a retry is equivalent to the first attempt.
pub trait GenerationBackend: Send + Sync {
    fn generate(&self, prompt: &str, temperature: f64, max_tokens: u32) -> Result<String>;
}

impl<F> GenerationBackend for F
where
    F: Fn(&str, f64, u32) -> Result<String> + Send + Sync,
{
    fn generate(&self, prompt: &str, temperature: f64, max_tokens: u32) -> Result<String> {
        self(prompt, temperature, max_tokens)
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct CompletionResponse {
    text: String,
}

/// JSON-over-HTTP completion endpoint: POST `{prompt, temperature,
/// max_tokens}`, expects `{text}` back.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    url: String,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(url: impl Into<String>, timeout: Duration) -> Result<Self> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| Error::Backend(e.to_string()))?;
        Ok(HttpBackend {
            url: url.into(),
            client,
        })
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl GenerationBackend for HttpBackend {
    fn generate(&self, prompt: &str, temperature: f64, max_tokens: u32) -> Result<String> {
        let response = self
            .client
            .post(&self.url)
            .json(&CompletionRequest {
                prompt,
                temperature,
                max_tokens,
            })
            .send()
            .and_then(|r| r.error_for_status())
            .map_err(|e| Error::Backend(format!("{}: {e}", self.url)))?;
        let body: CompletionResponse = response
            .json()
            .map_err(|e| Error::Backend(format!("{}: bad response body: {e}", self.url)))?;
        Ok(body.text)
    }
}

/// Deterministic stand-in for a language model. It turns every `- ` bullet
/// of the prompt into a sentence, so generated text carries the findings
/// verbatim. With `drop_rate > 0` the last finding of a prompt is left out
/// for a pseudo-random, prompt-determined share of calls.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MockBackend {
    pub drop_rate: f64,
    pub seed: u64,
}

impl MockBackend {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_drop_rate(drop_rate: f64, seed: u64) -> Self {
        MockBackend { drop_rate, seed }
    }
}

impl GenerationBackend for MockBackend {
    fn generate(&self, prompt: &str, temperature: f64, _max_tokens: u32) -> Result<String> {
        let mut findings: Vec<String> = prompt
            .lines()
            .filter_map(|l| l.trim_start().strip_prefix("- "))
            .map(|l| {
                let l = l.trim().trim_end_matches('.');
                let mut chars = l.chars();
                match chars.next() {
                    Some(c) => format!("{}{}.", c.to_uppercase(), chars.as_str()),
                    None => String::new(),
                }
            })
            .filter(|s| !s.is_empty())
            .collect();
        let draw = derive_seed(self.seed, &[prompt, &temperature.to_string()]) as f64 / u64::MAX as f64;
        if !findings.is_empty() && draw < self.drop_rate {
            findings.pop();
        }
        if findings.is_empty() {
            return Ok(String::new());
        }
        Ok(format!(
            "In this study we investigated natural products. {} These results expand the known chemistry of the producing organisms.",
            findings.join(" ")
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationSettings {
    pub max_tokens: u32,
    /// Extra attempts after a failed call.
    pub retries: u32,
    pub parallelism: usize,
}

impl Default for GenerationSettings {
    fn default() -> Self {
        GenerationSettings {
            max_tokens: 512,
            retries: 2,
            parallelism: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedCandidate {
    pub seed_doc_id: String,
    pub instruction_index: usize,
    pub expected_relations: Vec<Relation>,
    pub applied: BTreeSet<Transformation>,
    pub temperature: f64,
    pub reference_length: usize,
    pub text: String,
    pub mention_coverage: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerationFailure {
    pub seed_doc_id: String,
    pub instruction_index: usize,
    pub attempts: u32,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GenerationRun {
    pub candidates: Vec<GeneratedCandidate>,
    pub failures: Vec<GenerationFailure>,
}

/// Share of `expected` relations whose organism and chemical are both
/// mentioned in `text`. Empty text or an empty relation list gives 0.
pub fn mention_coverage(text: &str, expected: &[Relation], synonyms: &SynonymTable) -> f64 {
    if expected.is_empty() || text.trim().is_empty() {
        return 0.0;
    }
    let probe = Document {
        id: String::new(),
        title: String::new(),
        abstract_text: Some(text.to_string()),
        stratum: String::new(),
        relations: expected.to_vec(),
    };
    match classify_document_mentions(&probe, synonyms) {
        Ok(m) => m.summary.complete_relations as f64 / m.summary.relations as f64,
        Err(_) => 0.0,
    }
}

fn call_with_retries(
    backend: &dyn GenerationBackend,
    inst: &GenerationInstruction,
    settings: &GenerationSettings,
) -> std::result::Result<String, (u32, Error)> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match backend.generate(&inst.prompt_text, inst.findings.temperature, settings.max_tokens) {
            Ok(text) => return Ok(text),
            Err(e) if attempt > settings.retries => return Err((attempt, e)),
            Err(_) => {}
        }
    }
}

/// One backend call per instruction on a pool of `parallelism` workers.
/// Output order follows `instructions`. Calls that still fail after the
/// retries are reported in `failures`; if every call fails the whole run
/// fails with the last error.
pub fn generate_candidates(
    instructions: &[GenerationInstruction],
    backend: &dyn GenerationBackend,
    settings: &GenerationSettings,
    synonyms: &SynonymTable,
) -> Result<GenerationRun> {
    if settings.parallelism == 0 {
        return Err(Error::Usage("parallelism must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(settings.parallelism)
        .build()
        .map_err(|e| Error::Backend(e.to_string()))?;
    let results: Vec<_> = pool.install(|| {
        instructions
            .par_iter()
            .map(|inst| call_with_retries(backend, inst, settings))
            .collect()
    });

    let mut run = GenerationRun::default();
    let mut last_error = None;
    for (inst, result) in instructions.iter().zip(results) {
        match result {
            Ok(text) => run.candidates.push(GeneratedCandidate {
                seed_doc_id: inst.doc_id.clone(),
                instruction_index: inst.instruction_index,
                expected_relations: inst.findings.expected_relations.clone(),
                applied: inst.findings.applied.clone(),
                temperature: inst.findings.temperature,
                reference_length: inst.reference_length,
                mention_coverage: mention_coverage(&text, &inst.findings.expected_relations, synonyms),
                text,
                accepted: false,
            }),
            Err((attempts, e)) => {
                run.failures.push(GenerationFailure {
                    seed_doc_id: inst.doc_id.clone(),
                    instruction_index: inst.instruction_index,
                    attempts,
                    error: e.to_string(),
                });
                last_error = Some(e);
            }
        }
    }
    if run.candidates.is_empty() {
        if let Some(e) = last_error {
            return Err(Error::Backend(format!(
                "all {} generation calls failed; last error: {e}",
                instructions.len()
            )));
        }
    }
    Ok(run)
}

fn check_selector(k: usize, q: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::Usage("k must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Usage(format!("q = {q} is not in [0, 1]")));
    }
    Ok(())
}

/// Selects up to `k` candidates of one seed document with coverage `>= q`,
/// best first: higher coverage, then text length closer to the seed
/// abstract, then earlier position.
pub fn select_top_k(candidates: &[GeneratedCandidate], k: usize, q: f64) -> Result<Vec<GeneratedCandidate>> {
    check_selector(k, q)?;
    let mut eligible: Vec<(usize, &GeneratedCandidate)> = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.mention_coverage >= q)
        .collect();
    eligible.sort_by(|(ia, a), (ib, b)| {
        let dev = |c: &GeneratedCandidate| char_len(&c.text).abs_diff(c.reference_length);
        b.mention_coverage
            .total_cmp(&a.mention_coverage)
            .then(dev(a).cmp(&dev(b)))
            .then(ia.cmp(ib))
    });
    Ok(eligible
        .into_iter()
        .take(k)
        .map(|(_, c)| GeneratedCandidate {
            accepted: true,
            ..c.clone()
        })
        .collect())
}

/// Applies [`select_top_k`] per seed document. Seeds without any eligible
/// candidate drop out.
pub fn select_all(candidates: &[GeneratedCandidate], k: usize, q: f64) -> Result<Vec<GeneratedCandidate>> {
    check_selector(k, q)?;
    let mut by_seed: Vec<(&str, Vec<GeneratedCandidate>)> = Vec::new();
    let mut slot: BTreeMap<&str, usize> = BTreeMap::new();
    for c in candidates {
        let i = *slot.entry(&c.seed_doc_id).or_insert_with(|| {
            by_seed.push((&c.seed_doc_id, Vec::new()));
            by_seed.len() - 1
        });
        by_seed[i].1.push(c.clone());
    }
    let mut out = Vec::new();
    for (_, group) in by_seed {
        out.extend(select_top_k(&group, k, q)?);
    }
    Ok(out)
}

/// Returns every candidate with `accepted` set according to [`select_all`].
pub fn mark_accepted(candidates: &[GeneratedCandidate], k: usize, q: f64) -> Result<Vec<GeneratedCandidate>> {
    let chosen: BTreeSet<(String, usize)> = select_all(candidates, k, q)?
        .into_iter()
        .map(|c| (c.seed_doc_id, c.instruction_index))
        .collect();
    Ok(candidates
        .iter()
        .map(|c| GeneratedCandidate {
            accepted: chosen.contains(&(c.seed_doc_id.clone(), c.instruction_index)),
            ..c.clone()
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Valid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed_doc_id: String,
    pub instruction_index: usize,
    pub applied: BTreeSet<Transformation>,
    pub temperature: f64,
    pub mention_coverage: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetExample {
    pub input: String,
    pub output: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticDataset {
    pub split: Split,
    pub examples: Vec<DatasetExample>,
}

impl SyntheticDataset {
    pub fn seed_documents(&self) -> BTreeSet<&str> {
        self.examples
            .iter()
            .map(|e| e.provenance.seed_doc_id.as_str())
            .collect()
    }
}

/// Splits accepted candidates into train and valid sets by seed document:
/// `round(n_seeds * split_ratio)` seed groups go to train after a seeded
/// shuffle, so no seed straddles the split.
pub fn assemble_dataset(
    accepted: &[GeneratedCandidate],
    split_ratio: f64,
    seed: u64,
) -> Result<(SyntheticDataset, SyntheticDataset)> {
    if !(split_ratio > 0.0 && split_ratio < 1.0) {
        return Err(Error::Usage(format!("split ratio {split_ratio} is not in (0, 1)")));
    }
    let mut groups: BTreeMap<&str, Vec<&GeneratedCandidate>> = BTreeMap::new();
    for c in accepted {
        groups.entry(&c.seed_doc_id).or_default().push(c);
    }
    let mut seeds: Vec<&str> = groups.keys().copied().collect();
    seeds.shuffle(&mut rng_for(seed, &["assemble"]));
    let n_train = ((seeds.len() as f64) * split_ratio).round() as usize;

    let mut train = SyntheticDataset {
        split: Split::Train,
        examples: Vec::new(),
    };
    let mut valid = SyntheticDataset {
        split: Split::Valid,
        examples: Vec::new(),
    };
    for (i, s) in seeds.iter().enumerate() {
        let target = if i < n_train { &mut train } else { &mut valid };
        for c in &groups[s] {
            target.examples.push(DatasetExample {
                input: c.text.clone(),
                output: linearise(&c.expected_relations)?,
                provenance: Provenance {
                    seed_doc_id: c.seed_doc_id.clone(),
                    instruction_index: c.instruction_index,
                    applied: c.applied.clone(),
                    temperature: c.temperature,
                    mention_coverage: c.mention_coverage,
                },
            });
        }
    }
    Ok((train, valid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_doc;
    use crate::verbalise::{instructions_for_document, InstructionPlan, TemplateStore, TransformationConfig, DEFAULT_TEMPLATE};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn instructions(m: usize) -> Vec<GenerationInstruction> {
        let doc = test_doc(
            "d1",
            "Fungi",
            &[("Gloeophyllum abietinum", "gloeophyllin A"), ("Gloeophyllum abietinum", "gloeophyllin B"), ("Isaria sinclairii", "myriocin")],
        );
        let cfg = TransformationConfig::default();
        let classes = BTreeMap::new();
        let store = TemplateStore::builtin();
        let plan = InstructionPlan {
            transformations: &cfg,
            class_map: &classes,
            templates: &store,
            template_id: DEFAULT_TEMPLATE,
            m,
            root_seed: 3,
            max_keywords: 10,
        };
        instructions_for_document(&plan, &doc, &[], &SynonymTable::new()).unwrap()
    }

    fn candidate(seed: &str, coverage: f64, text: &str, reference_length: usize) -> GeneratedCandidate {
        GeneratedCandidate {
            seed_doc_id: seed.into(),
            instruction_index: 0,
            expected_relations: test_doc(seed, "F", &[("O", "c")]).relations,
            applied: BTreeSet::new(),
            temperature: 0.5,
            reference_length,
            text: text.into(),
            mention_coverage: coverage,
            accepted: false,
        }
    }

    #[test]
    fn mock_echo_has_full_coverage() {
        let insts = instructions(10);
        let run = generate_candidates(&insts, &MockBackend::new(), &GenerationSettings::default(), &SynonymTable::new()).unwrap();
        assert_eq!(run.candidates.len(), 10);
        for c in &run.candidates {
            assert_eq!(c.mention_coverage, 1.0, "{}", c.text);
        }
    }

    #[test]
    fn empty_output_is_recorded_with_zero_coverage() {
        let insts = instructions(2);
        let empty = |_: &str, _: f64, _: u32| -> Result<String> { Ok(String::new()) };
        let run = generate_candidates(&insts, &empty, &GenerationSettings::default(), &SynonymTable::new()).unwrap();
        assert_eq!(run.candidates.len(), 2);
        assert!(run.candidates.iter().all(|c| c.mention_coverage == 0.0));
    }

    #[test]
    fn order_is_independent_of_parallelism() {
        let insts = instructions(10);
        let one = GenerationSettings { parallelism: 1, ..Default::default() };
        let four = GenerationSettings { parallelism: 4, ..Default::default() };
        let backend = MockBackend::with_drop_rate(0.5, 1);
        let a = generate_candidates(&insts, &backend, &one, &SynonymTable::new()).unwrap();
        let b = generate_candidates(&insts, &backend, &four, &SynonymTable::new()).unwrap();
        assert_eq!(a, b);
        let order: Vec<usize> = b.candidates.iter().map(|c| c.instruction_index).collect();
        assert_eq!(order, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn retries_then_failure_records() {
        let insts = instructions(4);
        let calls = AtomicUsize::new(0);
        let flaky = |p: &str, _: f64, _: u32| -> Result<String> {
            calls.fetch_add(1, Ordering::SeqCst);
            if p.contains("gloeophyllin") {
                Err(Error::Backend("down".into()))
            } else {
                Ok(p.to_string())
            }
        };
        let settings = GenerationSettings { retries: 2, ..Default::default() };
        let err = generate_candidates(&insts, &flaky, &settings, &SynonymTable::new()).unwrap_err();
        assert_eq!(err.exit_code(), 3);
        assert_eq!(calls.load(Ordering::SeqCst), 12);

        let every_other = |_: &str, t: f64, _: u32| -> Result<String> {
            if t < 0.65 { Err(Error::Backend("down".into())) } else { Ok("x".into()) }
        };
        let run = generate_candidates(&instructions(10), &every_other, &settings, &SynonymTable::new()).unwrap();
        assert_eq!(run.candidates.len() + run.failures.len(), 10);
        assert!(run.failures.iter().all(|f| f.attempts == 3));
    }

    #[test]
    fn top_k_selection() {
        let cands: Vec<_> = [1.0, 1.0, 0.8, 1.0, 1.0]
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let mut x = candidate("s", c, &"x".repeat(10 + i), 10);
                x.instruction_index = i;
                x
            })
            .collect();
        let top = select_top_k(&cands, 3, 1.0).unwrap();
        let idx: Vec<usize> = top.iter().map(|c| c.instruction_index).collect();
        assert_eq!(idx, [0, 1, 3]);
        assert!(top.iter().all(|c| c.accepted));
        assert!(select_top_k(&cands, 0, 1.0).is_err());
        assert!(select_top_k(&cands, 1, 1.5).is_err());
    }

    #[test]
    fn q_boundary_is_inclusive() {
        let rels = test_doc("d", "F", &[("O", "a"), ("O", "b"), ("O", "c"), ("O", "e")]).relations;
        let cov = mention_coverage("O makes a, b and c.", &rels, &SynonymTable::new());
        assert_eq!(cov, 0.75);
        let mut c = candidate("s", cov, "", 0);
        c.expected_relations = rels;
        assert!(select_top_k(std::slice::from_ref(&c), 1, 1.0).unwrap().is_empty());
        assert_eq!(select_top_k(&[c], 1, 0.75).unwrap().len(), 1);
    }

    #[test]
    fn enumeration_counts_as_coverage() {
        let rels = test_doc("d", "F", &[("O", "cystodione A"), ("O", "cystodione B")]).relations;
        assert_eq!(mention_coverage("O yields cystodiones A-B.", &rels, &SynonymTable::new()), 1.0);
    }

    #[test]
    fn assembly_splits_by_seed() {
        let mut accepted = Vec::new();
        for s in 0..10 {
            for i in 0..3 {
                let mut c = candidate(&format!("s{s}"), 1.0, "O produces c.", 10);
                c.instruction_index = i;
                accepted.push(c);
            }
        }
        let (train, valid) = assemble_dataset(&accepted, 0.9, 13).unwrap();
        assert_eq!(train.seed_documents().len(), 9);
        assert_eq!(valid.seed_documents().len(), 1);
        assert!(train.seed_documents().is_disjoint(&valid.seed_documents()));
        assert_eq!(train.examples.len() + valid.examples.len(), 30);
        assert_eq!(train.examples[0].output, "O produces c");
        let again = assemble_dataset(&accepted, 0.9, 13).unwrap();
        assert_eq!(again.0, train);
        assert!(assemble_dataset(&accepted, 1.0, 13).is_err());
    }
}

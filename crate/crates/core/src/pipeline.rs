//! End-to-end orchestration: preprocess, stratified sampling, findings
//! verbalisation, generation, selection, dataset assembly and optional
//! scoring, driven by a single TOML file.
//!
//! Every stage writes its artifact into the output directory before the
//! next stage starts, so a failing stage leaves the earlier artifacts in
//! place. The manifest records a SHA-256 per artifact and contains no
//! timestamps or absolute output paths, so two runs of the same
//! configuration produce identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::corpus::{load_corpus, preprocess, InputFormat, PreprocessConfig};
use crate::error::{Error, Result};
use crate::jsonl::save_jsonl;
use crate::mention::SynonymTable;
use crate::sampler::{draw_sample, SampleSize, Strategy};
use crate::score::{load_gold, load_predictions, score_with, Averaging, Matching};
use crate::seed::derive_seed;
use crate::synthgen::{
    assemble_dataset, generate_candidates, mark_accepted, GenerationBackend, GenerationSettings, HttpBackend,
    MockBackend,
};
use crate::verbalise::{load_keywords, verbalise_corpus, InstructionPlan, TemplateStore, TransformationConfig};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub corpus: PathBuf,
    /// Guessed from the file extension when absent.
    #[serde(default)]
    pub format: Option<InputFormat>,
    #[serde(default)]
    pub synonyms: Option<PathBuf>,
    /// JSONL of `{doc_id, keywords}`.
    #[serde(default)]
    pub keywords: Option<PathBuf>,
    /// Extra prompt templates (`*.txt`).
    #[serde(default)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplerConfig {
    pub strategy: Strategy,
    /// Documents per stratum.
    pub n: usize,
    pub trace_depth: SampleSize,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            strategy: Strategy::Gme,
            n: 50,
            trace_depth: SampleSize::All,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerbaliseConfig {
    pub m: usize,
    pub template: String,
    pub max_keywords: usize,
    pub transformations: TransformationConfig,
}

impl Default for VerbaliseConfig {
    fn default() -> Self {
        VerbaliseConfig {
            m: 10,
            template: crate::verbalise::DEFAULT_TEMPLATE.to_string(),
            max_keywords: 10,
            transformations: TransformationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Mock,
    Http,
}

impl std::str::FromStr for BackendKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mock" => Ok(BackendKind::Mock),
            "http" => Ok(BackendKind::Http),
            other => Err(Error::Usage(format!("unknown backend `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenerationConfig {
    pub backend: BackendKind,
    pub url: Option<String>,
    pub timeout_secs: u64,
    pub retries: u32,
    pub parallelism: usize,
    pub max_tokens: u32,
    pub k: usize,
    pub q: f64,
    /// Only used by the mock backend.
    pub mock_drop_rate: f64,
}

impl Default for GenerationConfig {
    fn default() -> Self {
        let s = GenerationSettings::default();
        GenerationConfig {
            backend: BackendKind::Mock,
            url: None,
            timeout_secs: 120,
            retries: s.retries,
            parallelism: s.parallelism,
            max_tokens: s.max_tokens,
            k: 3,
            q: 1.0,
            mock_drop_rate: 0.0,
        }
    }
}

impl GenerationConfig {
    pub fn settings(&self) -> GenerationSettings {
        GenerationSettings {
            max_tokens: self.max_tokens,
            retries: self.retries,
            parallelism: self.parallelism,
        }
    }

    pub fn backend(&self, seed: u64) -> Result<Box<dyn GenerationBackend>> {
        match self.backend {
            BackendKind::Mock => Ok(Box::new(MockBackend::with_drop_rate(self.mock_drop_rate, seed))),
            BackendKind::Http => {
                let url = self
                    .url
                    .as_deref()
                    .ok_or_else(|| Error::Usage("generation.url is required for the http backend".into()))?;
                Ok(Box::new(HttpBackend::new(url, Duration::from_secs(self.timeout_secs))?))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssembleConfig {
    pub split: f64,
}

impl Default for AssembleConfig {
    fn default() -> Self {
        AssembleConfig { split: 0.9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreConfig {
    pub gold: PathBuf,
    pub predictions: PathBuf,
    #[serde(default)]
    pub matching: Matching,
    #[serde(default)]
    pub averaging: Averaging,
    #[serde(default)]
    pub ignore_classes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub input: InputConfig,
    #[serde(default)]
    pub preprocess: PreprocessConfig,
    #[serde(default)]
    pub sampler: SamplerConfig,
    #[serde(default)]
    pub verbalise: VerbaliseConfig,
    #[serde(default)]
    pub generation: GenerationConfig,
    #[serde(default)]
    pub assemble: AssembleConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreConfig>,
}

fn toml_error(source: &str, e: impl std::fmt::Display) -> Error {
    Error::Usage(format!("{source}: {e}"))
}

impl PipelineConfig {
    pub fn minimal(corpus: impl Into<PathBuf>) -> Self {
        PipelineConfig {
            seed: 0,
            output_dir: None,
            input: InputConfig {
                corpus: corpus.into(),
                format: None,
                synonyms: None,
                keywords: None,
                templates: None,
            },
            preprocess: PreprocessConfig::default(),
            sampler: SamplerConfig::default(),
            verbalise: VerbaliseConfig::default(),
            generation: GenerationConfig::default(),
            assemble: AssembleConfig::default(),
            score: None,
        }
    }

    pub fn from_toml(text: &str, source: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| toml_error(source, e))
    }

    /// Loads a config file; relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text, &path.display().to_string())?;
        if let Some(base) = path.parent() {
            cfg.rebase(base);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.input.corpus);
        for p in [&mut self.input.synonyms, &mut self.input.keywords, &mut self.input.templates, &mut self.output_dir]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        if let Some(s) = &mut self.score {
            fix(&mut s.gold);
            fix(&mut s.predictions);
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Data(format!("cannot serialise config: {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        if self.sampler.n == 0 {
            return Err(Error::Usage("sampler.n must be at least 1".into()));
        }
        if self.verbalise.m == 0 {
            return Err(Error::Usage("verbalise.m must be at least 1".into()));
        }
        self.verbalise.transformations.validate()?;
        let g = &self.generation;
        if g.parallelism == 0 || g.k == 0 || !(0.0..=1.0).contains(&g.q) {
            return Err(Error::Usage("generation needs parallelism >= 1, k >= 1 and q in [0, 1]".into()));
        }
        if !(0.0..=1.0).contains(&g.mock_drop_rate) {
            return Err(Error::Usage("generation.mock_drop_rate must be in [0, 1]".into()));
        }
        if !(self.assemble.split > 0.0 && self.assemble.split < 1.0) {
            return Err(Error::Usage("assemble.split must be in (0, 1)".into()));
        }
        Ok(())
    }

    /// SHA-256 of the canonical serialisation, output directory excluded.
    pub fn fingerprint(&self) -> Result<String> {
        let canonical = PipelineConfig {
            output_dir: None,
            ..self.clone()
        };
        Ok(sha256_hex(canonical.to_toml()?.as_bytes()))
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactRecord {
    pub stage: String,
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub seed: u64,
    pub config_sha256: String,
    pub artifacts: Vec<ArtifactRecord>,
    pub counts: BTreeMap<String, usize>,
}

impl Manifest {
    pub fn artifact(&self, stage: &str) -> Option<&ArtifactRecord> {
        self.artifacts.iter().find(|a| a.stage == stage)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_slice(&text)?)
    }
}

struct Run<'a> {
    dir: &'a Path,
    manifest: Manifest,
}

impl Run<'_> {
    fn record(&mut self, stage: &str, file: &str) -> Result<()> {
        let path = self.dir.join(file);
        let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
        self.manifest.artifacts.push(ArtifactRecord {
            stage: stage.to_string(),
            file: file.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(&bytes),
        });
        Ok(())
    }

    fn count(&mut self, key: &str, n: usize) {
        self.manifest.counts.insert(key.to_string(), n);
    }

    fn write(&self, file: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(file);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))
    }
}

fn in_stage<T>(stage: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    f().map_err(|e| Error::Stage {
        stage: stage.to_string(),
        source: Box::new(e),
    })
}

/// Runs every stage with the backend named in the config.
pub fn run_pipeline(config: &PipelineConfig, out_dir: impl AsRef<Path>) -> Result<Manifest> {
    config.validate()?;
    let backend = config.generation.backend(config.seed)?;
    run_pipeline_with_backend(config, out_dir, backend.as_ref())
}

/// Same as [`run_pipeline`] with an explicit generation backend.
pub fn run_pipeline_with_backend(
    config: &PipelineConfig,
    out_dir: impl AsRef<Path>,
    backend: &dyn GenerationBackend,
) -> Result<Manifest> {
    config.validate()?;
    let dir = out_dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut run = Run {
        dir,
        manifest: Manifest {
            version: MANIFEST_VERSION,
            seed: config.seed,
            config_sha256: config.fingerprint()?,
            artifacts: Vec::new(),
            counts: BTreeMap::new(),
        },
    };
    let input = &config.input;

    let (corpus, synonyms) = in_stage("preprocess", || {
        let format = input.format.unwrap_or_else(|| InputFormat::from_path(&input.corpus));
        let raw = load_corpus(&input.corpus, format)?;
        let corpus = preprocess(&raw, &config.preprocess)?;
        let synonyms = match &input.synonyms {
            Some(p) => SynonymTable::load(p)?,
            None => SynonymTable::new(),
        };
        save_jsonl(dir.join("corpus.jsonl"), &corpus.documents)?;
        run.count("documents_in", raw.len());
        run.count("documents_preprocessed", corpus.len());
        run.record("preprocess", "corpus.jsonl")?;
        Ok((corpus, synonyms))
    })?;

    let sample = in_stage("sample", || {
        let drawn = draw_sample(
            &corpus,
            config.sampler.strategy,
            config.sampler.n,
            derive_seed(config.seed, &["sample"]),
            config.sampler.trace_depth,
        )?;
        let sample = corpus.subset(&drawn.all_ids())?;
        save_jsonl(dir.join("sample.jsonl"), &sample.documents)?;
        let mut csv = Vec::new();
        let mut header = true;
        for trace in drawn.traces.values() {
            trace.write_csv(&mut csv, header)?;
            header = false;
        }
        if header {
            crate::sampler::SamplerTrace::default().write_csv(&mut csv, true)?;
        }
        run.write("trace.csv", &csv)?;
        run.count("documents_sampled", sample.len());
        run.record("sample", "sample.jsonl")?;
        run.record("trace", "trace.csv")?;
        Ok(sample)
    })?;

    let instructions = in_stage("verbalise", || {
        let mut templates = TemplateStore::builtin();
        if let Some(d) = &input.templates {
            templates = templates.with_dir(d)?;
        }
        let keywords = match &input.keywords {
            Some(p) => load_keywords(p)?,
            None => BTreeMap::new(),
        };
        let classes = sample.class_map();
        let plan = InstructionPlan {
            transformations: &config.verbalise.transformations,
            class_map: &classes,
            templates: &templates,
            template_id: &config.verbalise.template,
            m: config.verbalise.m,
            root_seed: derive_seed(config.seed, &["verbalise"]),
            max_keywords: config.verbalise.max_keywords,
        };
        let instructions = verbalise_corpus(&plan, &sample, &keywords, &synonyms)?;
        save_jsonl(dir.join("instructions.jsonl"), &instructions)?;
        run.count("instructions", instructions.len());
        run.record("verbalise", "instructions.jsonl")?;
        Ok(instructions)
    })?;

    let candidates = in_stage("generate", || {
        let g = &config.generation;
        let generated = generate_candidates(&instructions, backend, &g.settings(), &synonyms)?;
        let candidates = mark_accepted(&generated.candidates, g.k, g.q)?;
        save_jsonl(dir.join("candidates.jsonl"), &candidates)?;
        run.count("candidates", candidates.len());
        run.count("generation_failures", generated.failures.len());
        run.count("accepted", candidates.iter().filter(|c| c.accepted).count());
        run.record("generate", "candidates.jsonl")?;
        Ok(candidates)
    })?;

    in_stage("assemble", || {
        let accepted: Vec<_> = candidates.into_iter().filter(|c| c.accepted).collect();
        let (train, valid) = assemble_dataset(&accepted, config.assemble.split, derive_seed(config.seed, &["assemble"]))?;
        save_jsonl(dir.join("train.jsonl"), &train.examples)?;
        save_jsonl(dir.join("valid.jsonl"), &valid.examples)?;
        run.count("train_examples", train.examples.len());
        run.count("valid_examples", valid.examples.len());
        run.record("assemble_train", "train.jsonl")?;
        run.record("assemble_valid", "valid.jsonl")?;
        Ok(())
    })?;

    if let Some(sc) = &config.score {
        in_stage("score", || {
            let gold = load_gold(&sc.gold, sc.ignore_classes)?;
            let pred = load_predictions(&sc.predictions)?;
            let report = score_with(&gold, &pred.documents, sc.matching, sc.averaging)?;
            run.write("score.json", serde_json::to_string_pretty(&report)?.as_bytes())?;
            run.count("malformed_clauses", pred.malformed_clauses);
            run.record("score", "score.json")
        })?;
    }

    let manifest = serde_json::to_string_pretty(&run.manifest)?;
    run.write(MANIFEST_FILE, manifest.as_bytes())?;
    Ok(run.manifest)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = PipelineConfig::from_toml("[input]\ncorpus = \"x.tsv\"\nbogus = 1\n", "cfg").unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = PipelineConfig::from_toml("[input]\ncorpus = \"x.tsv\"\n[sampler]\nsize = 3\n", "cfg").unwrap_err();
        assert!(err.to_string().contains("size"), "{err}");
    }

    #[test]
    fn config_round_trips_through_toml() {
        let mut cfg = PipelineConfig::minimal("corpus.tsv");
        cfg.sampler.n = 5;
        cfg.sampler.trace_depth = SampleSize::Top(12);
        cfg.score = Some(ScoreConfig {
            gold: "g.json".into(),
            predictions: "p.jsonl".into(),
            matching: Matching::Exact,
            averaging: Averaging::Macro,
            ignore_classes: true,
        });
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text, "mem").unwrap(), cfg);
    }

    #[test]
    fn fingerprint_ignores_output_dir() {
        let a = PipelineConfig::minimal("c.tsv");
        let b = PipelineConfig {
            output_dir: Some("elsewhere".into()),
            ..a.clone()
        };
        assert_eq!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
        let c = PipelineConfig { seed: 1, ..a.clone() };
        assert_ne!(a.fingerprint().unwrap(), c.fingerprint().unwrap());
    }

    #[test]
    fn validation() {
        let mut cfg = PipelineConfig::minimal("c.tsv");
        assert!(cfg.validate().is_ok());
        cfg.assemble.split = 1.0;
        assert!(cfg.validate().is_err());
    }
}

//! Command-line front end. Every subcommand is a thin wrapper over the
//! library; errors are printed to stderr and mapped to exit codes
//! (0 ok, 1 usage, 2 data, 3 backend).

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::corpus::{load_corpus, preprocess, Corpus, InputFormat, PreprocessConfig};
use crate::error::{Error, Result};
use crate::jsonl::{load_jsonl, save_jsonl};
use crate::mention::{mismatch_report, SynonymTable};
use crate::pipeline::{run_pipeline, BackendKind, PipelineConfig};
use crate::sampler::{analyze_traces, draw_sample, SampleSize, SamplerTrace, Strategy};
use crate::score::{load_gold, load_predictions, score_with, Averaging, Matching};
use crate::stats::{compare_samples, stats};
use crate::synthgen::{
    assemble_dataset, generate_candidates, mark_accepted, GeneratedCandidate, GenerationBackend,
    GenerationSettings, HttpBackend, MockBackend,
};
use crate::verbalise::{
    load_keywords, verbalise_corpus, GenerationInstruction, InstructionPlan, TemplateStore, TransformationConfig,
    DEFAULT_TEMPLATE,
};

#[derive(Debug, Parser)]
#[command(name = "divsample", version, about = "Diversity sampling and relation-extraction dataset tooling")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load a relation dump and apply the document filters.
    Preprocess(PreprocessArgs),
    /// Draw a stratified sample (greedy max-entropy or a baseline).
    Sample(SampleArgs),
    /// Percent-of-max and knee points of an entropy trace.
    AnalyzeTrace(AnalyzeTraceArgs),
    /// How often entity labels appear verbatim in the abstracts.
    Mismatch(MismatchArgs),
    /// Build generation instructions from sampled documents.
    Verbalise(VerbaliseArgs),
    /// Send instructions to a backend and select candidates.
    Generate(GenerateArgs),
    /// Split accepted candidates into train and valid sets.
    Assemble(AssembleArgs),
    /// Exact-match relation scoring.
    Score(ScoreArgs),
    /// Diversity statistics of a corpus or sample.
    Stats(StatsArgs),
    /// Compare the diversity of several samples.
    Compare(CompareArgs),
    /// Run the whole pipeline from a config file.
    Run(RunArgs),
}

#[derive(Debug, Args)]
pub struct CorpusArgs {
    /// Corpus file (TSV relation dump or JSONL documents).
    #[arg(long)]
    pub corpus: PathBuf,
    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<InputFormat>,
}

impl CorpusArgs {
    fn load(&self) -> Result<Corpus> {
        load_corpus(&self.corpus, self.format.unwrap_or_else(|| InputFormat::from_path(&self.corpus)))
    }
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<InputFormat>,
    #[arg(long, default_value_t = 20)]
    pub max_relations: usize,
    #[arg(long, default_value_t = 60)]
    pub max_label_chars: usize,
    /// Keep documents without an abstract.
    #[arg(long)]
    pub keep_without_abstract: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Documents per stratum.
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value = "gme")]
    pub strategy: Strategy,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// File of document ids (one per line) to leave out, e.g. an evaluation set.
    #[arg(long)]
    pub exclude: Option<PathBuf>,
    /// Rank the whole stratum so the trace covers every document.
    #[arg(long)]
    pub trace_all: bool,
    /// Selected documents as JSONL.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeTraceArgs {
    #[arg(long)]
    pub trace: PathBuf,
    /// Ranks at which to report percent of max, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ranks: Vec<usize>,
    /// Also locate knee points.
    #[arg(long)]
    pub knee: bool,
    #[arg(long, default_value_t = 1.0)]
    pub sensitivity: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MismatchArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerbaliseArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Transformation probabilities (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Instructions per document.
    #[arg(long, default_value_t = 10)]
    pub m: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = DEFAULT_TEMPLATE)]
    pub template: String,
    /// Directory of extra `*.txt` templates.
    #[arg(long)]
    pub templates: Option<PathBuf>,
    /// JSONL of `{doc_id, keywords}`.
    #[arg(long)]
    pub keywords: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub max_keywords: usize,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub instructions: PathBuf,
    #[arg(long, default_value = "mock")]
    pub backend: BackendKind,
    /// Completion endpoint; implies the http backend.
    #[arg(long)]
    pub backend_url: Option<String>,
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    #[arg(long, default_value_t = 1.0)]
    pub q: f64,
    #[arg(long, default_value_t = 4)]
    pub parallelism: usize,
    #[arg(long, default_value_t = 2)]
    pub retries: u32,
    #[arg(long, default_value_t = 120)]
    pub timeout_secs: u64,
    #[arg(long, default_value_t = 512)]
    pub max_tokens: u32,
    #[arg(long, default_value_t = 0.0)]
    pub mock_drop_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub synonyms: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Where to write per-instruction failure records.
    #[arg(long)]
    pub failures: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AssembleArgs {
    #[arg(long)]
    pub candidates: PathBuf,
    #[arg(long, default_value_t = 0.9)]
    pub split: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_train: PathBuf,
    #[arg(long)]
    pub out_valid: PathBuf,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub gold: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value = "casefold")]
    pub matching: Matching,
    #[arg(long, default_value = "micro")]
    pub averaging: Averaging,
    /// Drop gold relations whose chemical is a class.
    #[arg(long)]
    pub ignore_classes: bool,
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// `name=path`, repeated. Paths are JSONL documents or one id per line;
    /// names like `random#1` are pooled into one family.
    #[arg(long = "sample", required = true)]
    pub samples: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `output_dir` from the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub backend_url: Option<String>,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn write_json<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| Error::io(path, e)),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn load_synonyms(path: Option<&Path>) -> Result<SynonymTable> {
    path.map_or_else(|| Ok(SynonymTable::new()), SynonymTable::load)
}

fn read_id_list(path: &Path) -> Result<Vec<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ids = Vec::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let id = line.trim();
        if !id.is_empty() && !id.starts_with('#') {
            ids.push(id.to_string());
        }
    }
    Ok(ids)
}

/// Ids from a JSONL document file (`id` field) or a plain list.
fn read_sample_ids(path: &Path) -> Result<Vec<String>> {
    if path.extension().is_some_and(|e| e == "jsonl") {
        #[derive(serde::Deserialize)]
        struct IdOnly {
            id: String,
        }
        let rows: Vec<IdOnly> = load_jsonl(path)?;
        Ok(rows.into_iter().map(|r| r.id).collect())
    } else {
        read_id_list(path)
    }
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Preprocess(a) => {
            let raw = load_corpus(&a.input, a.format.unwrap_or_else(|| InputFormat::from_path(&a.input)))?;
            let cfg = PreprocessConfig {
                max_relations: a.max_relations,
                max_label_chars: a.max_label_chars,
                require_abstract: !a.keep_without_abstract,
            };
            let corpus = preprocess(&raw, &cfg)?;
            save_jsonl(&a.out, &corpus.documents)?;
            println!(
                "documents\t{} -> {}\nrelations\t{} -> {}",
                raw.len(),
                corpus.len(),
                raw.n_relations(),
                corpus.n_relations()
            );
        }
        Command::Sample(a) => {
            let mut corpus = a.corpus.load()?;
            if let Some(p) = &a.exclude {
                corpus = corpus.without(&read_id_list(p)?);
            }
            let depth = if a.trace_all { SampleSize::All } else { SampleSize::Top(a.n) };
            let drawn = draw_sample(&corpus, a.strategy, a.n, a.seed, depth)?;
            let sample = corpus.subset(&drawn.all_ids())?;
            save_jsonl(&a.out, &sample.documents)?;
            if let Some(path) = &a.trace {
                let file = File::create(path).map_err(|e| Error::io(path, e))?;
                let mut w = BufWriter::new(file);
                let mut header = true;
                for t in drawn.traces.values() {
                    t.write_csv(&mut w, header)?;
                    header = false;
                }
                if header {
                    SamplerTrace::default().write_csv(&mut w, true)?;
                }
                w.flush().map_err(|e| Error::io(path, e))?;
            }
            for (stratum, ids) in &drawn.ids {
                println!("{stratum}\t{}", ids.len());
            }
        }
        Command::AnalyzeTrace(a) => {
            let file = File::open(&a.trace).map_err(|e| Error::io(&a.trace, e))?;
            let traces = SamplerTrace::read_csv(file)?;
            let analysis = analyze_traces(&traces, &a.ranks, a.knee.then_some(a.sensitivity))?;
            write_json(&analysis, a.out.as_deref())?;
        }
        Command::Mismatch(a) => {
            let corpus = a.corpus.load()?;
            let report = mismatch_report(&corpus, &load_synonyms(a.synonyms.as_deref())?);
            write_json(&report, a.out.as_deref())?;
        }
        Command::Verbalise(a) => {
            let corpus = a.corpus.load()?;
            let transformations = match &a.config {
                Some(p) => {
                    let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
                    toml::from_str::<TransformationConfig>(&text)
                        .map_err(|e| Error::Usage(format!("{}: {e}", p.display())))?
                }
                None => TransformationConfig::default(),
            };
            let mut templates = TemplateStore::builtin();
            if let Some(d) = &a.templates {
                templates = templates.with_dir(d)?;
            }
            let keywords = match &a.keywords {
                Some(p) => load_keywords(p)?,
                None => BTreeMap::new(),
            };
            let classes = corpus.class_map();
            let plan = InstructionPlan {
                transformations: &transformations,
                class_map: &classes,
                templates: &templates,
                template_id: &a.template,
                m: a.m,
                root_seed: a.seed,
                max_keywords: a.max_keywords,
            };
            let instructions = verbalise_corpus(&plan, &corpus, &keywords, &load_synonyms(a.synonyms.as_deref())?)?;
            save_jsonl(&a.out, &instructions)?;
            println!("instructions\t{}", instructions.len());
        }
        Command::Generate(a) => {
            let instructions: Vec<GenerationInstruction> = load_jsonl(&a.instructions)?;
            let backend: Box<dyn GenerationBackend> = match (&a.backend_url, a.backend) {
                (Some(url), _) => Box::new(HttpBackend::new(url, Duration::from_secs(a.timeout_secs))?),
                (None, BackendKind::Http) => {
                    return Err(Error::Usage("--backend http needs --backend-url".into()));
                }
                (None, BackendKind::Mock) => Box::new(MockBackend::with_drop_rate(a.mock_drop_rate, a.seed)),
            };
            let settings = GenerationSettings {
                max_tokens: a.max_tokens,
                retries: a.retries,
                parallelism: a.parallelism,
            };
            let run = generate_candidates(&instructions, backend.as_ref(), &settings, &load_synonyms(a.synonyms.as_deref())?)?;
            let candidates = mark_accepted(&run.candidates, a.k, a.q)?;
            save_jsonl(&a.out, &candidates)?;
            if let Some(p) = &a.failures {
                save_jsonl(p, &run.failures)?;
            }
            println!(
                "candidates\t{}\naccepted\t{}\nfailures\t{}",
                candidates.len(),
                candidates.iter().filter(|c| c.accepted).count(),
                run.failures.len()
            );
        }
        Command::Assemble(a) => {
            let candidates: Vec<GeneratedCandidate> = load_jsonl(&a.candidates)?;
            let accepted: Vec<_> = candidates.into_iter().filter(|c| c.accepted).collect();
            let (train, valid) = assemble_dataset(&accepted, a.split, a.seed)?;
            save_jsonl(&a.out_train, &train.examples)?;
            save_jsonl(&a.out_valid, &valid.examples)?;
            println!("train\t{}\nvalid\t{}", train.examples.len(), valid.examples.len());
        }
        Command::Score(a) => {
            let gold = load_gold(&a.gold, a.ignore_classes)?;
            let pred = load_predictions(&a.pred)?;
            let report = score_with(&gold, &pred.documents, a.matching, a.averaging)?;
            println!(
                "precision\t{:.4}\nrecall\t{:.4}\nf1\t{:.4}\nmalformed_clauses\t{}",
                report.precision, report.recall, report.f1, pred.malformed_clauses
            );
            if let Some(p) = &a.report {
                write_json(&report, Some(p))?;
            }
        }
        Command::Stats(a) => {
            let s = stats(&a.corpus.load()?)?;
            println!(
                "documents\t{}\nrelations\t{}\norganisms\t{}\nchemicals\t{}\ndistinct_relations\t{}\ntop20_organisms_share\t{:.4}\ntop20_chemicals_share\t{:.4}",
                s.n_documents,
                s.n_relations,
                s.distinct_organisms,
                s.distinct_chemicals,
                s.distinct_relations,
                s.organisms.top_share(0.2),
                s.chemicals.top_share(0.2)
            );
            if let Some(p) = &a.out {
                write_json(&s, Some(p))?;
            }
        }
        Command::Compare(a) => {
            let corpus = a.corpus.load()?;
            let mut samples = BTreeMap::new();
            for spec in &a.samples {
                let (name, path) = spec
                    .split_once('=')
                    .ok_or_else(|| Error::Usage(format!("expected name=path, got `{spec}`")))?;
                samples.insert(name.to_string(), read_sample_ids(Path::new(path))?);
            }
            let report = compare_samples(&samples, &corpus)?;
            print!("{}", report.to_tsv());
            if let Some(p) = &a.out {
                write_json(&report, Some(p))?;
            }
        }
        Command::Run(a) => {
            let mut cfg = PipelineConfig::load(&a.config)?;
            if let Some(seed) = a.seed {
                cfg.seed = seed;
            }
            if let Some(url) = a.backend_url {
                cfg.generation.backend = BackendKind::Http;
                cfg.generation.url = Some(url);
            }
            let out = a
                .out
                .or_else(|| cfg.output_dir.clone())
                .ok_or_else(|| Error::Usage("no output directory: pass --out or set output_dir".into()))?;
            let manifest = run_pipeline(&cfg, &out)?;
            for art in &manifest.artifacts {
                println!("{}\t{}\t{}", art.stage, art.file, art.sha256);
            }
            io::stdout().flush().map_err(|e| Error::io("<stdout>", e))?;
        }
    }
    Ok(())
}

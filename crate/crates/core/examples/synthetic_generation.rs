//! Instructions to candidates to a train/valid split, using the offline
//! mock backend. The mock drops a finding now and then, so the selector
//! has something to reject.

use std::collections::BTreeMap;

use divsample::corpus::{load_corpus, preprocess, InputFormat, PreprocessConfig};
use divsample::mention::SynonymTable;
use divsample::synthgen::{assemble_dataset, generate_candidates, mark_accepted, GenerationSettings, MockBackend};
use divsample::verbalise::{verbalise_corpus, InstructionPlan, TemplateStore, TransformationConfig, DEFAULT_TEMPLATE};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus_20.tsv");

pub fn run_example() -> divsample::Result<()> {
    let corpus = preprocess(&load_corpus(CORPUS, InputFormat::Tsv)?, &PreprocessConfig::default())?;
    let classes = corpus.class_map();
    let templates = TemplateStore::builtin();
    let transformations = TransformationConfig::default();
    let plan = InstructionPlan {
        transformations: &transformations,
        class_map: &classes,
        templates: &templates,
        template_id: DEFAULT_TEMPLATE,
        m: 5,
        root_seed: 1,
        max_keywords: 10,
    };
    let synonyms = SynonymTable::new();
    let instructions = verbalise_corpus(&plan, &corpus, &BTreeMap::new(), &synonyms)?;

    let backend = MockBackend::with_drop_rate(0.3, 1);
    let run = generate_candidates(&instructions, &backend, &GenerationSettings::default(), &synonyms)?;
    let candidates = mark_accepted(&run.candidates, 3, 1.0)?;
    let accepted: Vec<_> = candidates.iter().filter(|c| c.accepted).cloned().collect();
    println!(
        "{} instructions, {} candidates, {} accepted",
        instructions.len(),
        candidates.len(),
        accepted.len()
    );
    if let Some(c) = accepted.first() {
        println!("example ({}):\n{}\n", c.seed_doc_id, c.text);
    }

    let (train, valid) = assemble_dataset(&accepted, 0.8, 1)?;
    println!(
        "train: {} examples from {} seeds; valid: {} examples from {} seeds",
        train.examples.len(),
        train.seed_documents().len(),
        valid.examples.len(),
        valid.seed_documents().len()
    );
    if let Some(e) = train.examples.first() {
        println!("target: {}", e.output);
    }
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

//! Turn a document's relations into a findings block and a full prompt,
//! with and without the stochastic rewrites.

use divsample::corpus::{load_corpus, InputFormat};
use divsample::mention::SynonymTable;
use divsample::verbalise::{
    instructions_for_document, verbalise_findings, InstructionPlan, TemplateStore, TransformationConfig,
    DEFAULT_TEMPLATE,
};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus_20.tsv");

pub fn run_example() -> divsample::Result<()> {
    let corpus = load_corpus(CORPUS, InputFormat::Tsv)?;
    let classes = corpus.class_map();
    let doc = corpus.get("8812001").expect("fixture document");

    let plain = verbalise_findings(&doc.relations, &classes, &TransformationConfig::identity())?;
    println!("plain:\n{}\n", plain.text);

    for seed in 0..4 {
        let f = verbalise_findings(&doc.relations, &classes, &TransformationConfig::default().with_seed(seed))?;
        println!("seed {seed} {:?} T={}:\n{}\n", f.applied, f.temperature, f.text);
    }

    let templates = TemplateStore::builtin();
    let transformations = TransformationConfig::default();
    let plan = InstructionPlan {
        transformations: &transformations,
        class_map: &classes,
        templates: &templates,
        template_id: DEFAULT_TEMPLATE,
        m: 2,
        root_seed: 42,
        max_keywords: 5,
    };
    let keywords = vec!["fruiting bodies".to_string(), "Cystoderma amianthinum".to_string()];
    let instructions = instructions_for_document(&plan, doc, &keywords, &SynonymTable::new())?;
    println!("kept keywords: {:?}", instructions[0].keywords);
    println!("--- prompt ---\n{}", instructions[0].prompt_text);

    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

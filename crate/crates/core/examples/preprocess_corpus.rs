//! Load the bundled TSV relation dump, apply the document filters and
//! print what survives in each stratum.

use divsample::corpus::{load_corpus, preprocess, stratify, InputFormat, PreprocessConfig};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus_20.tsv");

pub fn run_example() -> divsample::Result<()> {
    let raw = load_corpus(CORPUS, InputFormat::Tsv)?;
    let kept = preprocess(&raw, &PreprocessConfig::default())?;
    println!("documents {} -> {}", raw.len(), kept.len());
    println!("relations {} -> {}", raw.n_relations(), kept.n_relations());

    // A tighter relation cap drops the larger documents.
    let strict = PreprocessConfig {
        max_relations: 2,
        ..Default::default()
    };
    println!("with max_relations = 2: {} documents", preprocess(&raw, &strict)?.len());

    for (stratum, part) in stratify(&kept) {
        println!("{stratum:>16}: {} documents, {} relations", part.len(), part.n_relations());
    }
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

//! Which entity labels appear verbatim in the abstracts, and which are only
//! covered by an enumeration such as "cystodiones A-D".

use divsample::corpus::{load_corpus, InputFormat};
use divsample::mention::{classify_document_mentions, contract_series, detect_enumerations, mismatch_report, SynonymTable};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus_20.tsv");
const SYNONYMS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/synonyms.tsv");

pub fn run_example() -> divsample::Result<()> {
    for text in ["cystodiones A-D", "wortmannins C and D", "gloeophyllins A-C (1-3)", "compounds 4-6"] {
        for e in detect_enumerations(text) {
            println!("{text:>24} -> {:?} {:?}", e.kind, e.members);
        }
    }
    println!("contracted: {}", contract_series("cystodione", &['A', 'B', 'C', 'D'], Some(1)));

    let corpus = load_corpus(CORPUS, InputFormat::Tsv)?;
    let synonyms = SynonymTable::load(SYNONYMS)?;
    if let Some(doc) = corpus.get("8812001") {
        for v in classify_document_mentions(doc, &synonyms)?.verdicts {
            println!("  {:<28} {:?}", v.entity_id, v.status);
        }
    }

    let report = mismatch_report(&corpus, &synonyms);
    println!(
        "{} documents read, {} skipped, {} with every relation found",
        report.documents, report.skipped_without_abstract, report.pair_complete_documents
    );
    for (kind, rate) in &report.explicit_rate {
        println!("  {kind:?}: {:.1}% explicit", 100.0 * rate);
    }
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

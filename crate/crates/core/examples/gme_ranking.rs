//! Greedy maximum-entropy ranking, first on a three-document toy corpus
//! and then per stratum on the bundled fixture.

use divsample::corpus::{load_corpus, preprocess, Corpus, Document, Entity, EntityKind, InputFormat, PreprocessConfig, Relation};
use divsample::sampler::{gme_sample, stratified_gme, SampleSize};

const CORPUS: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/corpus_20.tsv");

fn doc(id: &str, pairs: &[(&str, &str)]) -> divsample::Result<Document> {
    let relations = pairs
        .iter()
        .map(|(o, c)| {
            Relation::new(
                Entity::new(*o, o, Vec::<String>::new(), EntityKind::Organism)?,
                Entity::new(*c, c, Vec::<String>::new(), EntityKind::Chemical)?,
            )
        })
        .collect::<divsample::Result<_>>()?;
    Ok(Document {
        id: id.into(),
        title: String::new(),
        abstract_text: None,
        stratum: "toy".into(),
        relations,
    })
}

pub fn run_example() -> divsample::Result<()> {
    let toy = Corpus::new(vec![
        doc("d1", &[("o1", "c1")])?,
        doc("d2", &[("o2", "c2"), ("o3", "c3")])?,
        doc("d3", &[("o1", "c2")])?,
    ]);
    let ranking = gme_sample(&toy, SampleSize::All)?;
    println!("toy order: {:?}", ranking.order);
    println!("utopian point: ({:.6}, {:.6})", ranking.utopian.0, ranking.utopian.1);
    for s in &ranking.trace.steps {
        println!(
            "  rank {} {}  H(O)={:.6} H(C)={:.6} distance={:.6}",
            s.rank, s.doc_id, s.h_organisms, s.h_chemicals, s.distance
        );
    }

    let corpus = preprocess(&load_corpus(CORPUS, InputFormat::Tsv)?, &PreprocessConfig::default())?;
    for (stratum, r) in stratified_gme(&corpus, 3)? {
        println!("{stratum:>16}: {}", r.order.join(", "));
    }
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

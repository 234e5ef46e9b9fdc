//! The greedy sample against random and top-N baselines on a skewed
//! synthetic corpus.

use std::collections::BTreeMap;

use divsample::sampler::{draw_sample, SampleSize, Strategy};
use divsample::stats::{compare_samples, stats};
use divsample::synthetic::{zipf_corpus, ZipfCorpusSpec};

pub fn run_example() -> divsample::Result<()> {
    let corpus = zipf_corpus(&ZipfCorpusSpec::default(), 3)?;
    let all = stats(&corpus)?;
    println!(
        "corpus: {} documents, top 20% of chemicals hold {:.0}% of relations",
        all.n_documents,
        100.0 * all.chemicals.top_share(0.2)
    );

    let n = 50;
    let mut samples = BTreeMap::new();
    let gme = draw_sample(&corpus, Strategy::Gme, n, 0, SampleSize::Top(n))?;
    samples.insert("gme".to_string(), gme.all_ids());
    for run in 1..=5 {
        let s = draw_sample(&corpus, Strategy::Random, n, run, SampleSize::Top(n))?;
        samples.insert(format!("random#{run}"), s.all_ids());
    }
    let top = draw_sample(&corpus, Strategy::TopRelations, n, 0, SampleSize::Top(n))?;
    samples.insert("top_relations".to_string(), top.all_ids());

    print!("{}", compare_samples(&samples, &corpus)?.to_tsv());
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

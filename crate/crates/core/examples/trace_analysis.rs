//! Rank a synthetic corpus to the end, then read the entropy trace:
//! percent of the maximum at a few ranks and the knee of each curve.

use std::collections::BTreeMap;

use divsample::sampler::{analyze_traces, gme_sample, knee_index, SampleSize, SamplerTrace};
use divsample::synthetic::{zipf_corpus, ZipfCorpusSpec};

pub fn run_example() -> divsample::Result<()> {
    // The geometric curve 1, 1.5, 1.75, ... bends at its third point.
    let xs = [1.0, 2.0, 3.0, 4.0, 5.0];
    let ys = [1.0, 1.5, 1.75, 1.875, 1.9375];
    println!("knee of the halving curve at index {}", knee_index(&xs, &ys)?);

    let spec = ZipfCorpusSpec {
        n_documents: 300,
        ..Default::default()
    };
    let corpus = zipf_corpus(&spec, 11)?;
    let ranking = gme_sample(&corpus, SampleSize::All)?;

    let mut csv = Vec::new();
    ranking.trace.write_csv(&mut csv, true)?;
    let traces = SamplerTrace::read_csv(csv.as_slice())?;

    let analysis = analyze_traces(&traces, &[10, 50, 100], Some(1.0))?;
    for (stratum, a) in &analysis {
        println!("{stratum}: {} steps", a.length);
        for (name, c) in [("organisms", &a.organisms), ("chemicals", &a.chemicals)] {
            let pct: BTreeMap<_, _> = c.percent_of_max.iter().map(|(r, p)| (*r, format!("{p:.1}%"))).collect();
            println!(
                "  {name}: max {:.3} at rank {}, {:?}, knee {:?}",
                c.max.value,
                c.max.rank,
                pct,
                c.knee.map(|k| k.rank)
            );
        }
    }
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

//! Exact-match relation scoring of linearised model output, plus keyword
//! precision at k.

use std::collections::BTreeSet;

use divsample::score::{keyword_precision, linearise_pairs, load_gold, load_predictions, parse_output, score_with, Averaging, Matching};

const GOLD: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/gold.json");
const PRED: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures/predictions.jsonl");

pub fn run_example() -> divsample::Result<()> {
    let line = linearise_pairs([("Taxus brevifolia", "paclitaxel"), ("Taxus brevifolia", "baccatin III")])?;
    println!("linearised: {line}");
    println!("parsed back: {:?}", parse_output(&line).relations);

    let gold = load_gold(GOLD, false)?;
    let pred = load_predictions(PRED)?;
    println!("{} malformed clauses skipped", pred.malformed_clauses);
    for matching in [Matching::Casefold, Matching::Exact] {
        for averaging in [Averaging::Micro, Averaging::Macro] {
            let r = score_with(&gold, &pred.documents, matching, averaging)?;
            println!(
                "{matching:?}/{averaging:?}: P={:.4} R={:.4} F1={:.4} (tp {} fp {} fn {})",
                r.precision, r.recall, r.f1, r.true_positives, r.false_positives, r.false_negatives
            );
        }
    }

    let predicted = vec![
        vec!["Fungi".to_string(), "Bacteria".to_string(), "fungi".to_string()],
        vec!["Plantae".to_string()],
    ];
    let truth: Vec<BTreeSet<String>> = vec![
        ["Fungi".to_string()].into_iter().collect(),
        ["Plantae".to_string(), "Metazoa".to_string()].into_iter().collect(),
    ];
    let kp = keyword_precision(&predicted, &truth, 2)?;
    println!("keyword precision@2: {kp:?}");
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

//! Every runnable example, executed as a test.

#![allow(dead_code)]

macro_rules! example {
    ($module:ident, $path:literal, $test:ident) => {
        #[path = $path]
        mod $module;

        #[test]
        fn $test() {
            $module::run_example().expect(concat!(stringify!($module), " should run"));
        }
    };
}

example!(preprocess_corpus, "../examples/preprocess_corpus.rs", preprocess_corpus_runs);
example!(gme_ranking, "../examples/gme_ranking.rs", gme_ranking_runs);
example!(trace_analysis, "../examples/trace_analysis.rs", trace_analysis_runs);
example!(baselines_compare, "../examples/baselines_compare.rs", baselines_compare_runs);
example!(mention_mismatch, "../examples/mention_mismatch.rs", mention_mismatch_runs);
example!(verbalise_findings, "../examples/verbalise_findings.rs", verbalise_findings_runs);
example!(synthetic_generation, "../examples/synthetic_generation.rs", synthetic_generation_runs);
example!(scoring, "../examples/scoring.rs", scoring_runs);
example!(end_to_end, "../examples/end_to_end.rs", end_to_end_runs);
example!(http_backend, "../examples/http_backend.rs", http_backend_runs);

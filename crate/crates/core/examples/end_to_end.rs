//! The whole pipeline from a config file, run twice to show that the
//! manifest is reproducible.

use divsample::pipeline::{run_pipeline, PipelineConfig};

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/configs/pipeline.toml");

pub fn run_example() -> divsample::Result<()> {
    let cfg = PipelineConfig::load(CONFIG)?;
    let dir = tempfile::tempdir().expect("temporary directory");
    let first = run_pipeline(&cfg, dir.path().join("a"))?;
    let second = run_pipeline(&cfg, dir.path().join("b"))?;

    for art in &first.artifacts {
        println!("{:<16} {:<20} {:>8} bytes  {}", art.stage, art.file, art.bytes, &art.sha256[..12]);
    }
    println!("counts: {:?}", first.counts);
    println!("identical manifests: {}", first == second);
    Ok(())
}

fn main() -> divsample::Result<()> {
    run_example()
}

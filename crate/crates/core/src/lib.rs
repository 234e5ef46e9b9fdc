pub mod cli;
pub mod corpus;
pub mod entropy;
pub mod error;
pub mod jsonl;
pub mod mention;
pub mod pipeline;
pub mod sampler;
pub mod seed;
pub mod stats;
pub mod synthgen;
pub mod synthetic;
pub mod score;
pub mod text;
pub mod verbalise;

pub use error::{Error, Result};

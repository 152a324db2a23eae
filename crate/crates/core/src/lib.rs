pub mod cache;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod embeddings;
pub mod error;
pub mod eval;
pub mod lexfeatures;
pub mod model;
pub mod pipeline;
pub mod spans;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};

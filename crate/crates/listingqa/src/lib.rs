//! File formats, command-line tools and the HTTP scoring service for the
//! answer-sentence ranker in [`listingqa_core`].

pub use listingqa_core as core;

pub mod checkpoint;
pub mod cli;
pub mod configfile;
mod error;
pub mod jsonl;
pub mod scoring;
pub mod service;
pub mod vocabfile;

pub use error::{Error, Result};

//! Answer-sentence selection for marketplace conversations.
//!
//! Given a buyer question (optionally with the preceding chat) and a product
//! description, a dual-tower dot-product ranker scores every description
//! sentence plus a learned "no answer" slot. This crate holds the pure
//! algorithmic parts and builds without `std`:
//!
//! - [`textproc`]: tokenization, sentence splitting, n-gram vocabularies.
//! - [`nncore`]: dense kernels and layers with analytic gradients.
//! - [`ranker`]: the question/candidate towers, scoring and the training loss.
//! - [`datapipe`]: weak-supervision mining, a synthetic corpus, splitting.
//! - [`evalkit`]: overall, positive and trigger accuracy.
//! - [`trainer`]: reply-suggestion pre-training and supervised fine-tuning.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datapipe;
mod error;
pub mod evalkit;
pub mod nncore;
pub mod ranker;
pub mod textproc;
pub mod trainer;

pub use error::{Error, Result};

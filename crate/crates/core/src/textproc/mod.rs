//! Text normalization and n-gram features.
//!
//! Text is lowercased and cut into word and punctuation tokens; unigrams and
//! bigrams of that token stream are looked up in a fixed [`NGramVocab`].
//! Unknown n-grams are skipped, so a text made only of unseen words yields an
//! empty [`BagOfNGrams`] and therefore a zero embedding.

mod sentences;
mod tokenize;
mod vocab;

pub use sentences::split_sentences;
pub use tokenize::{tokenize, Token};
pub use vocab::{build_vocab, featurize, featurize_tokens, BagOfNGrams, NGram, NGramVocab};

/// Separator used when a bigram is written as a single string.
pub const BIGRAM_JOINT: char = '\u{b7}';

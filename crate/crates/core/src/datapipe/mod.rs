//! Weakly supervised QA examples from chat logs, a synthetic chat/listing
//! generator, and listing-level train/test splitting.

mod mining;
mod split;
mod synthetic;
mod types;

pub use mining::{is_stopword, mine_all, mine_examples, phrase_match_len, word_tokens, MiningConfig, STOPWORDS};
pub use split::{listing_in_train, split};
pub use synthetic::{extract_reply_pairs, generate_synthetic, GroundTruth, SynthConfig, SyntheticCorpus};
pub use types::{ChatLog, ChatMessage, Listing, QAExample, ReplyPair};

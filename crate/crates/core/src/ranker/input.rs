use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::ModelConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Speaker {
    Buyer,
    Seller,
}

/// One chat message as seen by the ranker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub speaker: Speaker,
    pub text: String,
}

impl Message {
    pub fn buyer(text: impl Into<String>) -> Self {
        Self { speaker: Speaker::Buyer, text: text.into() }
    }

    pub fn seller(text: impl Into<String>) -> Self {
        Self { speaker: Speaker::Seller, text: text.into() }
    }
}

/// A question, the messages before it, and the candidate sentences.
///
/// The ranker reads `context` only when conversational context is enabled.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct QAInput {
    pub context: Vec<Message>,
    pub question: String,
    pub candidates: Vec<String>,
}

/// Result of [`assemble_input`].
#[derive(Debug, Clone, PartialEq)]
pub struct Assembled {
    pub input: QAInput,
    /// Candidates beyond `max_candidates` were dropped.
    pub truncated: bool,
}

/// Build the ranker input for a buyer question the way a given model variant
/// expects it.
///
/// History is cut to the most recent `max_history` messages. Models without
/// conversational context see the last two buyer messages joined into the
/// question; context models see the question alone and read the history
/// through their context encoder.
pub fn assemble_input(history: &[Message], question: &str, mut candidates: Vec<String>, config: &ModelConfig) -> Assembled {
    let start = history.len().saturating_sub(config.max_history);
    let context = history[start..].to_vec();
    let question = if config.use_conv_context {
        String::from(question)
    } else {
        match context.iter().rev().find(|m| m.speaker == Speaker::Buyer) {
            Some(prev) => alloc::format!("{} {}", prev.text, question),
            None => String::from(question),
        }
    };
    let truncated = candidates.len() > config.max_candidates;
    candidates.truncate(config.max_candidates);
    Assembled { input: QAInput { context, question, candidates }, truncated }
}

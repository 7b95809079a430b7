use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::ranker::{assemble_input, Message, ModelConfig, QAInput, Speaker};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub speaker: Speaker,
    pub text: String,
    pub index: u32,
}

/// One buyer/seller conversation about a listing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatLog {
    pub listing_id: String,
    pub messages: Vec<ChatMessage>,
}

impl ChatLog {
    pub fn validate(&self) -> Result<()> {
        for w in self.messages.windows(2) {
            if w[1].index <= w[0].index {
                return Err(Error::Contract(format!(
                    "chat {}: message index {} does not increase after {}",
                    self.listing_id, w[1].index, w[0].index
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Listing {
    pub listing_id: String,
    pub title: String,
    pub description: String,
}

/// A question with its candidates and the index of the answering sentence
/// (`1..=N`), or 0 when the description holds no answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QAExample {
    pub listing_id: String,
    pub context: Vec<Message>,
    pub question: String,
    pub candidates: Vec<String>,
    pub label: usize,
}

impl QAExample {
    pub fn is_positive(&self) -> bool {
        self.label > 0
    }

    pub fn validate(&self) -> Result<()> {
        if self.label > self.candidates.len() {
            return Err(Error::Contract(format!(
                "label {} exceeds {} candidates",
                self.label,
                self.candidates.len()
            )));
        }
        Ok(())
    }

    /// Ranker input for a model variant (see [`assemble_input`]).
    pub fn to_input(&self, config: &ModelConfig) -> QAInput {
        assemble_input(&self.context, &self.question, self.candidates.clone(), config).input
    }
}

/// A message and the reply that followed it, for reply-suggestion pre-training.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplyPair {
    pub context: String,
    pub reply: String,
}

//! Reply-suggestion pre-training with in-batch negatives and supervised
//! fine-tuning on mined QA examples.

mod finetune;
mod pretrain;

pub use finetune::{finetune, EpochStats, FinetuneOutcome};
pub use pretrain::{pretrain, pretrain_batch_loss, PretrainOutcome};

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::datapipe::{QAExample, ReplyPair};
use crate::ranker::{Model, ModelConfig};
use crate::textproc::{build_vocab, NGramVocab};
use crate::{Error, Result};

/// Optimisation schedule shared by both phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub epochs: usize,
    pub lr: f64,
    pub seed: u64,
    /// Epochs without dev improvement before stopping.
    pub patience: usize,
    /// Global gradient-norm ceiling.
    pub clip_norm: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { batch_size: 64, epochs: 30, lr: 1e-3, seed: 0, patience: 5, clip_norm: 5.0 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be at least 1".into()));
        }
        if self.patience == 0 {
            return Err(Error::Config("patience must be at least 1".into()));
        }
        if !(self.lr >= 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("lr must be a finite non-negative number, got {}", self.lr)));
        }
        if self.clip_norm.is_nan() || self.clip_norm <= 0.0 {
            return Err(Error::Config(format!("clip_norm must be positive, got {}", self.clip_norm)));
        }
        Ok(())
    }
}

/// Every text the model will see in `examples` and `pairs`, one item per text.
pub fn training_texts<'a>(examples: &'a [QAExample], pairs: &'a [ReplyPair]) -> Vec<&'a str> {
    let mut texts = Vec::new();
    for ex in examples {
        texts.extend(ex.context.iter().map(|m| m.text.as_str()));
        texts.push(ex.question.as_str());
        texts.extend(ex.candidates.iter().map(String::as_str));
    }
    for p in pairs {
        texts.push(p.context.as_str());
        texts.push(p.reply.as_str());
    }
    texts
}

/// Vocabulary over the training material, capped per the model config.
pub fn build_training_vocab(examples: &[QAExample], pairs: &[ReplyPair], config: &ModelConfig) -> Result<NGramVocab> {
    build_vocab(training_texts(examples, pairs), config.unigram_cap, config.bigram_cap)
}

/// A fresh model for `config` that reuses `pretrained`'s vocabulary and every
/// tensor whose name and shape carry over.
pub fn from_pretrained(pretrained: &Model, config: ModelConfig, seed: u64) -> Result<Model> {
    let config = ModelConfig { pretrained: true, ..config };
    let mut model = Model::new(config, pretrained.vocab.clone(), seed)?;
    model.params.transplant_from(&pretrained.params);
    Ok(model)
}

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Layer sizes and variant switches of a ranker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    /// n-gram embedding width `d`.
    pub embed_dim: usize,
    /// Number of feed-forward layers in each tower.
    pub ff_layers: usize,
    /// Width of every feed-forward layer, and of `h`, `g_i`, `g_0`.
    pub ff_size: usize,
    pub lstm_hidden: usize,
    pub use_answer_lstm: bool,
    pub use_attention: bool,
    pub use_conv_context: bool,
    /// Informational: the embedding/towers were initialized from pre-training.
    pub pretrained: bool,
    /// Most recent history messages kept.
    pub max_history: usize,
    pub unigram_cap: usize,
    pub bigram_cap: usize,
    pub max_candidates: usize,
    pub max_sentence_tokens: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            embed_dim: 256,
            ff_layers: 2,
            ff_size: 500,
            lstm_hidden: 256,
            use_answer_lstm: false,
            use_attention: false,
            use_conv_context: false,
            pretrained: false,
            max_history: 10,
            unigram_cap: 100_000,
            bigram_cap: 200_000,
            max_candidates: 50,
            max_sentence_tokens: 60,
        }
    }
}

impl ModelConfig {
    /// Defaults for a variant: 500-wide layers for the plain feed-forward
    /// model, 128 once any extra encoder is switched on.
    pub fn for_variant(answer_lstm: bool, attention: bool, conv_context: bool) -> Self {
        let any = answer_lstm || attention || conv_context;
        Self {
            ff_size: if any { 128 } else { 500 },
            use_answer_lstm: answer_lstm,
            use_attention: attention,
            use_conv_context: conv_context,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sizes = [
            ("embed_dim", self.embed_dim),
            ("ff_layers", self.ff_layers),
            ("ff_size", self.ff_size),
            ("lstm_hidden", self.lstm_hidden),
            ("max_history", self.max_history),
            ("unigram_cap", self.unigram_cap),
            ("bigram_cap", self.bigram_cap),
            ("max_candidates", self.max_candidates),
            ("max_sentence_tokens", self.max_sentence_tokens),
        ];
        for (name, v) in sizes {
            if v == 0 {
                return Err(Error::Config(alloc::format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn has_variant_layers(&self) -> bool {
        self.use_answer_lstm || self.use_attention || self.use_conv_context
    }

    /// Same sizes with every optional encoder switched off.
    pub fn baseline(&self) -> Self {
        Self { use_answer_lstm: false, use_attention: false, use_conv_context: false, ..self.clone() }
    }

    pub fn question_input_dim(&self) -> usize {
        if self.use_conv_context {
            self.lstm_hidden
        } else {
            self.embed_dim
        }
    }

    pub fn candidate_input_dim(&self) -> usize {
        if self.use_answer_lstm {
            2 * self.lstm_hidden
        } else {
            self.embed_dim
        }
    }

    pub(crate) fn tower_sizes(&self, input: usize) -> Vec<usize> {
        let mut sizes = alloc::vec![input];
        sizes.extend(core::iter::repeat_n(self.ff_size, self.ff_layers));
        sizes
    }

    /// Short descriptor such as `baseline` or `pretrained+lstm+attention`.
    pub fn variant_name(&self) -> String {
        let parts: Vec<&str> = [
            (self.pretrained, "pretrained"),
            (self.use_answer_lstm, "lstm"),
            (self.use_attention, "attention"),
            (self.use_conv_context, "context"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if parts.is_empty() {
            String::from("baseline")
        } else {
            parts.join("+")
        }
    }
}

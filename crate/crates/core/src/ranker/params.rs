use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::ModelConfig;
use crate::nncore::{Activation, BiLstm, FeedForward, Init, Linear, Lstm, Matrix, ParamSet, ParamView, ParamViewMut, SelfAttention};
use crate::{Error, Result};

/// Bi-LSTM over the candidate sequence plus the map from the question's
/// n-gram sum to its initial hidden state.
#[derive(Debug, Clone, PartialEq)]
pub struct AnswerLstm {
    pub h0_proj: Linear,
    pub lstm: BiLstm,
}

/// Every learned tensor of a ranker. Optional encoders are present exactly
/// when their switch is on in the [`ModelConfig`] the params were built for.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// `vocab_size x embed_dim`, shared by both towers.
    pub embedding: Matrix,
    pub question_tower: FeedForward,
    pub candidate_tower: FeedForward,
    pub answer_lstm: Option<AnswerLstm>,
    pub attention: Option<SelfAttention>,
    pub context_lstm: Option<Lstm>,
    /// `g_0`.
    pub no_answer: Vec<f64>,
}

impl ModelParams {
    /// Seeded initialization: uniform embeddings, Xavier weights, zero biases.
    pub fn init(config: &ModelConfig, vocab_size: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut init = Init::new(seed);
        let embedding = init.embedding(vocab_size, config.embed_dim);
        let question_tower = FeedForward::init(&config.tower_sizes(config.question_input_dim()), Activation::Tanh, &mut init);
        let candidate_tower = FeedForward::init(&config.tower_sizes(config.candidate_input_dim()), Activation::Tanh, &mut init);
        let answer_lstm = config.use_answer_lstm.then(|| AnswerLstm {
            h0_proj: Linear::init(config.embed_dim, config.lstm_hidden, &mut init),
            lstm: BiLstm::init(config.embed_dim, config.lstm_hidden, &mut init),
        });
        let attention = config.use_attention.then(|| SelfAttention::init(config.candidate_input_dim(), &mut init));
        let context_lstm = config.use_conv_context.then(|| Lstm::init(config.embed_dim, config.lstm_hidden, &mut init));
        let no_answer = init.uniform(config.ff_size, libm::sqrt(3.0 / config.ff_size as f64));
        Ok(Self { embedding, question_tower, candidate_tower, answer_lstm, attention, context_lstm, no_answer })
    }

    /// All-zero tensors with the shapes `config` implies.
    pub fn zeros(config: &ModelConfig, vocab_size: usize) -> Result<Self> {
        let mut p = Self::init(config, vocab_size, 0)?;
        p.fill_zero();
        Ok(p)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            embedding: Matrix::zeros(self.embedding.rows(), self.embedding.cols()),
            question_tower: self.question_tower.zeros_like(),
            candidate_tower: self.candidate_tower.zeros_like(),
            answer_lstm: self.answer_lstm.as_ref().map(|a| AnswerLstm {
                h0_proj: a.h0_proj.zeros_like(),
                lstm: a.lstm.zeros_like(),
            }),
            attention: self.attention.as_ref().map(SelfAttention::zeros_like),
            context_lstm: self.context_lstm.as_ref().map(Lstm::zeros_like),
            no_answer: vec![0.0; self.no_answer.len()],
        }
    }

    pub fn vocab_size(&self) -> usize {
        self.embedding.rows()
    }

    /// Check names and shapes against what `config` and `vocab_size` imply.
    pub fn validate_shapes(&self, config: &ModelConfig, vocab_size: usize) -> Result<()> {
        let expected = Self::zeros(config, vocab_size)?;
        let want = expected.params();
        let have = self.params();
        if want.len() != have.len() {
            return Err(Error::Dimension(format!("expected {} tensors, found {}", want.len(), have.len())));
        }
        for (w, h) in want.iter().zip(&have) {
            if w.name != h.name || w.shape != h.shape {
                return Err(Error::Dimension(format!(
                    "tensor {} {:?} does not match expected {} {:?}",
                    h.name, h.shape, w.name, w.shape
                )));
            }
        }
        Ok(())
    }

    /// Copy every tensor of `source` whose name and shape match a tensor
    /// here. Returns the names that were copied.
    pub fn transplant_from(&mut self, source: &ModelParams) -> Vec<String> {
        let src = source.params();
        let mut copied = Vec::new();
        for dst in self.params_mut() {
            if let Some(s) = src.iter().find(|s| s.name == dst.name && s.shape == dst.shape) {
                dst.data.copy_from_slice(s.data);
                copied.push(dst.name);
            }
        }
        copied
    }

    /// Names of tensors holding NaN or infinity.
    pub fn non_finite_tensors(&self) -> Vec<String> {
        self.params()
            .into_iter()
            .filter(|p| p.data.iter().any(|v| !v.is_finite()))
            .map(|p| p.name)
            .collect()
    }
}

fn push_vec<'a>(out: &mut Vec<ParamView<'a>>, name: String, data: &'a [f64]) {
    out.push(ParamView { name, shape: vec![data.len()], data });
}

impl ParamSet for ModelParams {
    fn collect<'a>(&'a self, prefix: &str, out: &mut Vec<ParamView<'a>>) {
        let p = |n: &str| crate::nncore::ParamView::name_in(prefix, n);
        out.push(ParamView {
            name: p("embedding"),
            shape: vec![self.embedding.rows(), self.embedding.cols()],
            data: self.embedding.data(),
        });
        self.question_tower.collect(&p("question_tower"), out);
        self.candidate_tower.collect(&p("candidate_tower"), out);
        if let Some(a) = &self.answer_lstm {
            a.h0_proj.collect(&p("answer_lstm.h0_proj"), out);
            a.lstm.collect(&p("answer_lstm"), out);
        }
        if let Some(a) = &self.attention {
            a.collect(&p("attention"), out);
        }
        if let Some(c) = &self.context_lstm {
            c.collect(&p("context_lstm"), out);
        }
        push_vec(out, p("no_answer"), &self.no_answer);
    }

    fn collect_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<ParamViewMut<'a>>) {
        let p = |n: &str| crate::nncore::ParamView::name_in(prefix, n);
        let shape = vec![self.embedding.rows(), self.embedding.cols()];
        out.push(ParamViewMut { name: p("embedding"), shape, data: self.embedding.data_mut() });
        self.question_tower.collect_mut(&p("question_tower"), out);
        self.candidate_tower.collect_mut(&p("candidate_tower"), out);
        if let Some(a) = &mut self.answer_lstm {
            a.h0_proj.collect_mut(&p("answer_lstm.h0_proj"), out);
            a.lstm.collect_mut(&p("answer_lstm"), out);
        }
        if let Some(a) = &mut self.attention {
            a.collect_mut(&p("attention"), out);
        }
        if let Some(c) = &mut self.context_lstm {
            c.collect_mut(&p("context_lstm"), out);
        }
        let shape = vec![self.no_answer.len()];
        out.push(ParamViewMut { name: p("no_answer"), shape, data: &mut self.no_answer });
    }
}

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{ModelConfig, ModelParams, QAInput};
use crate::nncore::{
    argmax, cross_entropy, dot, embedding_sum, embedding_sum_backward, softmax, softmax_cross_entropy_grad,
    AttentionCache, BiLstmCache, FeedForwardCache, LstmCache,
};
use crate::textproc::{featurize_tokens, tokenize, BagOfNGrams, NGramVocab};
use crate::{Error, Result};

/// Vocabulary, configuration and parameters of one trained (or fresh) ranker.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub config: ModelConfig,
    pub vocab: NGramVocab,
    pub params: ModelParams,
}

/// n-gram bags of every text in a [`QAInput`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Featurized {
    pub context: Vec<BagOfNGrams>,
    pub question: BagOfNGrams,
    pub candidates: Vec<BagOfNGrams>,
}

/// Raw dot products, probabilities and the winning index (0 = no answer).
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreResult {
    pub scores: Vec<f64>,
    pub probs: Vec<f64>,
    pub best: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CandidateEncodings {
    pub no_answer: Vec<f64>,
    pub candidates: Vec<Vec<f64>>,
}

struct QuestionPass {
    psi_q: Vec<f64>,
    context: Option<LstmCache>,
    tower: FeedForwardCache,
}

struct CandidatePass {
    lstm: Option<BiLstmCache>,
    attention: Option<AttentionCache>,
    towers: Vec<FeedForwardCache>,
}

impl Model {
    pub fn new(config: ModelConfig, vocab: NGramVocab, seed: u64) -> Result<Self> {
        let params = ModelParams::init(&config, vocab.len(), seed)?;
        Ok(Self { config, vocab, params })
    }

    /// Bundle existing parts after checking that they agree.
    pub fn from_parts(config: ModelConfig, vocab: NGramVocab, params: ModelParams) -> Result<Self> {
        config.validate()?;
        params.validate_shapes(&config, vocab.len())?;
        Ok(Self { config, vocab, params })
    }

    pub fn featurize_text(&self, text: &str) -> BagOfNGrams {
        featurize_tokens(&tokenize(text), &self.vocab)
    }

    fn featurize_sentence(&self, text: &str) -> BagOfNGrams {
        let mut tokens = tokenize(text);
        tokens.truncate(self.config.max_sentence_tokens);
        featurize_tokens(&tokens, &self.vocab)
    }

    pub fn featurize(&self, input: &QAInput) -> Featurized {
        let ctx = if self.config.use_conv_context {
            let start = input.context.len().saturating_sub(self.config.max_history);
            input.context[start..].iter().map(|m| self.featurize_text(&m.text)).collect()
        } else {
            Vec::new()
        };
        Featurized {
            context: ctx,
            question: self.featurize_text(&input.question),
            candidates: input.candidates.iter().map(|c| self.featurize_sentence(c)).collect(),
        }
    }

    fn embed(&self, bag: &BagOfNGrams) -> Result<Vec<f64>> {
        embedding_sum(&bag.ids, &self.params.embedding)
    }

    fn question_pass(&self, f: &Featurized) -> Result<QuestionPass> {
        let psi_q = self.embed(&f.question)?;
        match &self.params.context_lstm {
            Some(lstm) if self.config.use_conv_context => {
                let mut seq = f.context.iter().map(|b| self.embed(b)).collect::<Result<Vec<_>>>()?;
                seq.push(psi_q.clone());
                let cache = lstm.forward(&seq, &vec![0.0; lstm.hidden_dim()])?;
                let tower = self.params.question_tower.forward(cache.final_hidden())?;
                Ok(QuestionPass { psi_q, context: Some(cache), tower })
            }
            _ => {
                let tower = self.params.question_tower.forward(&psi_q)?;
                Ok(QuestionPass { psi_q, context: None, tower })
            }
        }
    }

    fn candidate_pass(&self, f: &Featurized, psi_q: &[f64]) -> Result<CandidatePass> {
        let mut reps = f.candidates.iter().map(|b| self.embed(b)).collect::<Result<Vec<_>>>()?;
        if reps.is_empty() {
            return Ok(CandidatePass { lstm: None, attention: None, towers: Vec::new() });
        }
        let lstm = match &self.params.answer_lstm {
            Some(a) => {
                let h0 = a.h0_proj.forward(psi_q)?;
                let cache = a.lstm.forward(&reps, &h0)?;
                reps = cache.outputs();
                Some(cache)
            }
            None => None,
        };
        let attention = match &self.params.attention {
            Some(att) => {
                let cache = att.forward(&reps)?;
                reps = cache.outputs();
                Some(cache)
            }
            None => None,
        };
        let towers = reps
            .iter()
            .map(|r| self.params.candidate_tower.forward(r))
            .collect::<Result<Vec<_>>>()?;
        Ok(CandidatePass { lstm, attention, towers })
    }

    fn numeric_error(&self, what: &str) -> Error {
        let bad = self.params.non_finite_tensors();
        if bad.is_empty() {
            Error::Numeric(format!("{what} is not finite (all parameters finite; input overflow)"))
        } else {
            Error::Numeric(format!("{what} is not finite; non-finite parameters: {}", bad.join(", ")))
        }
    }

    fn check_finite(&self, what: &str, v: &[f64]) -> Result<()> {
        if v.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(self.numeric_error(what))
        }
    }

    /// Question encoding `h`.
    pub fn encode_question(&self, input: &QAInput) -> Result<Vec<f64>> {
        let f = self.featurize(input);
        let h = self.question_pass(&f)?.tower.output().to_vec();
        self.check_finite("question encoding", &h)?;
        Ok(h)
    }

    /// Candidate encodings `g_1..g_N` and the no-answer vector `g_0`.
    pub fn encode_candidates(&self, input: &QAInput) -> Result<CandidateEncodings> {
        let f = self.featurize(input);
        let psi_q = self.embed(&f.question)?;
        let pass = self.candidate_pass(&f, &psi_q)?;
        let candidates: Vec<Vec<f64>> = pass.towers.iter().map(|t| t.output().to_vec()).collect();
        for (i, g) in candidates.iter().enumerate() {
            self.check_finite(&format!("candidate encoding {}", i + 1), g)?;
        }
        Ok(CandidateEncodings { no_answer: self.params.no_answer.clone(), candidates })
    }

    fn logits(&self, q: &QuestionPass, c: &CandidatePass) -> Result<Vec<f64>> {
        let h = q.tower.output();
        self.check_finite("question encoding", h)?;
        self.check_finite("no-answer vector", &self.params.no_answer)?;
        let mut logits = Vec::with_capacity(c.towers.len() + 1);
        logits.push(dot(h, &self.params.no_answer));
        for (i, t) in c.towers.iter().enumerate() {
            let g = t.output();
            if !g.iter().all(|v| v.is_finite()) {
                return Err(self.numeric_error(&format!("candidate encoding {}", i + 1)));
            }
            logits.push(dot(h, g));
        }
        Ok(logits)
    }

    /// Score every candidate plus the no-answer slot.
    pub fn score(&self, input: &QAInput) -> Result<ScoreResult> {
        let f = self.featurize(input);
        let q = self.question_pass(&f)?;
        let c = self.candidate_pass(&f, &q.psi_q)?;
        let scores = self.logits(&q, &c)?;
        let probs = softmax(&scores).map_err(|_| self.numeric_error("score vector"))?;
        let best = argmax(&probs);
        Ok(ScoreResult { scores, probs, best })
    }

    /// Index of the most probable candidate; 0 means "no suitable answer".
    pub fn predict(&self, input: &QAInput) -> Result<usize> {
        Ok(self.score(input)?.best)
    }

    /// Cross-entropy of the label under the candidate distribution.
    /// Gradients are added into `grads`, which must be shaped like `self.params`.
    pub fn loss_and_grad(&self, input: &QAInput, label: usize, grads: &mut ModelParams) -> Result<f64> {
        if label > input.candidates.len() {
            return Err(Error::Contract(format!(
                "label {label} outside 0..={} candidates",
                input.candidates.len()
            )));
        }
        let f = self.featurize(input);
        let q = self.question_pass(&f)?;
        let c = self.candidate_pass(&f, &q.psi_q)?;
        let logits = self.logits(&q, &c)?;
        let probs = softmax(&logits).map_err(|_| self.numeric_error("score vector"))?;
        let loss = cross_entropy(&probs, label)?;
        let d_logits = softmax_cross_entropy_grad(&probs, label);

        let h = q.tower.output();
        let p = &self.params;
        let mut d_h: Vec<f64> = p.no_answer.iter().map(|g| d_logits[0] * g).collect();
        grads.no_answer.iter_mut().zip(h).for_each(|(g, hv)| *g += d_logits[0] * hv);

        // candidate side
        let mut d_reps = Vec::with_capacity(c.towers.len());
        for (i, tower) in c.towers.iter().enumerate() {
            let dl = d_logits[i + 1];
            let g = tower.output();
            d_h.iter_mut().zip(g).for_each(|(a, gv)| *a += dl * gv);
            let d_g: Vec<f64> = h.iter().map(|hv| dl * hv).collect();
            d_reps.push(p.candidate_tower.backward(tower, &d_g, &mut grads.candidate_tower));
        }
        let mut d_psi_q = vec![0.0; self.config.embed_dim];
        if let (Some(att), Some(cache)) = (&p.attention, &c.attention) {
            let grad = grads.attention.as_mut().expect("gradient shaped like params");
            d_reps = att.backward(cache, &d_reps, grad);
        }
        if let (Some(a), Some(cache)) = (&p.answer_lstm, &c.lstm) {
            let grad = grads.answer_lstm.as_mut().expect("gradient shaped like params");
            let (d_psis, d_h0) = a.lstm.backward(cache, &d_reps, &mut grad.lstm);
            d_psi_q = a.h0_proj.backward(&q.psi_q, &d_h0, &mut grad.h0_proj);
            d_reps = d_psis;
        }
        for (bag, d) in f.candidates.iter().zip(&d_reps) {
            embedding_sum_backward(&bag.ids, d, &mut grads.embedding);
        }

        // question side
        let d_tower_in = p.question_tower.backward(&q.tower, &d_h, &mut grads.question_tower);
        match (&p.context_lstm, &q.context) {
            (Some(lstm), Some(cache)) => {
                let grad = grads.context_lstm.as_mut().expect("gradient shaped like params");
                let (d_seq, _) = lstm.backward_final(cache, &d_tower_in, grad);
                let (d_q, d_ctx) = d_seq.split_last().expect("sequence holds the question");
                for (bag, d) in f.context.iter().zip(d_ctx) {
                    embedding_sum_backward(&bag.ids, d, &mut grads.embedding);
                }
                d_psi_q.iter_mut().zip(d_q).for_each(|(a, b)| *a += b);
            }
            _ => d_psi_q.iter_mut().zip(&d_tower_in).for_each(|(a, b)| *a += b),
        }
        embedding_sum_backward(&f.question.ids, &d_psi_q, &mut grads.embedding);
        Ok(loss)
    }
}

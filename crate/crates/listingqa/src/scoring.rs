//! Request/response types for scoring a question against a description.

use listingqa_core::ranker::{assemble_input, Message, Model};
use listingqa_core::textproc::split_sentences;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreRequest {
    pub question: String,
    /// Raw description, split into sentences by the service.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    /// Pre-split candidate sentences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidates: Option<Vec<String>>,
    /// Earlier chat messages, oldest first.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub history: Option<Vec<Message>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedAnswer {
    /// 1-based position in the candidate list.
    pub index: usize,
    pub sentence: String,
    pub prob: f64,
    pub raw_score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub no_answer_prob: f64,
    /// Most probable first; equal probabilities keep candidate order.
    pub answers: Vec<RankedAnswer>,
    pub model_variant: String,
    pub latency_ms: f64,
    /// Candidates beyond the model's limit were dropped.
    pub truncated: bool,
}

/// A request that is well-formed JSON but cannot be scored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RequestError {
    /// The request itself is invalid (client error).
    Invalid(String),
    /// Scoring failed inside the model.
    Model(String),
}

impl std::fmt::Display for RequestError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RequestError::Invalid(m) | RequestError::Model(m) => f.write_str(m),
        }
    }
}

impl ScoreRequest {
    pub fn candidate_sentences(&self) -> Result<Vec<String>, RequestError> {
        match (&self.description, &self.candidates) {
            (Some(d), None) => Ok(split_sentences(d)),
            (None, Some(c)) => Ok(c.clone()),
            (Some(_), Some(_)) => Err(RequestError::Invalid("give either description or candidates, not both".into())),
            (None, None) => Err(RequestError::Invalid("one of description or candidates is required".into())),
        }
    }
}

/// Score a request. `latency_ms` is left at 0 for the caller to fill in.
pub fn score_request(model: &Model, request: &ScoreRequest) -> Result<ScoreResponse, RequestError> {
    if request.question.trim().is_empty() {
        return Err(RequestError::Invalid("question must not be empty".into()));
    }
    let candidates = request.candidate_sentences()?;
    let history = request.history.as_deref().unwrap_or(&[]);
    let assembled = assemble_input(history, &request.question, candidates, &model.config);
    let result = model.score(&assembled.input).map_err(|e| RequestError::Model(e.to_string()))?;
    let mut answers: Vec<RankedAnswer> = assembled
        .input
        .candidates
        .iter()
        .enumerate()
        .map(|(i, sentence)| RankedAnswer {
            index: i + 1,
            sentence: sentence.clone(),
            prob: result.probs[i + 1],
            raw_score: result.scores[i + 1],
        })
        .collect();
    answers.sort_by(|a, b| b.prob.total_cmp(&a.prob).then(a.index.cmp(&b.index)));
    Ok(ScoreResponse {
        no_answer_prob: result.probs[0],
        answers,
        model_variant: model.config.variant_name(),
        latency_ms: 0.0,
        truncated: assembled.truncated,
    })
}

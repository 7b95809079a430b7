//! Dual-tower answer ranker.
//!
//! A question tower maps the (optionally contextualized) question to `h`; a
//! candidate tower maps every description sentence to `g_i`. A learned vector
//! `g_0` stands for "no answer". Candidate probabilities are
//! `softmax([h·g_0, h·g_1, …, h·g_N])`.
//!
//! Optional encoders, applied in this order on the candidate side:
//! n-gram sum → bi-LSTM (seeded by a projection of the question's n-gram sum)
//! → self-attention → feed-forward. With conversational context enabled the
//! question tower reads an LSTM over the history messages and the question.

mod config;
mod input;
mod model;
mod params;

pub use config::ModelConfig;
pub use input::{assemble_input, Assembled, Message, QAInput, Speaker};
pub use model::{CandidateEncodings, Featurized, Model, ScoreResult};
pub use params::{AnswerLstm, ModelParams};

//! Small dense kernels and layers with hand-written backward passes.
//!
//! Every layer exposes a `forward` that returns a cache and a `backward`
//! that consumes it, accumulating parameter gradients into a same-shaped
//! gradient struct (usually built with `zeros_like`). There is no graph
//! engine; callers chain layers explicitly.

mod adam;
mod attention;
mod dense;
mod embedding;
mod gradcheck;
mod init;
mod lstm;
mod params;
mod softmax;
mod tensor;

pub use adam::{AdamConfig, AdamState};
pub use attention::{AttentionCache, SelfAttention};
pub use dense::{Activation, FeedForward, FeedForwardCache, Linear};
pub use embedding::{embedding_sum, embedding_sum_backward};
pub use gradcheck::{finite_difference, grad_check, relative_error, GradCheck, FD_STEP};
pub use init::Init;
pub use lstm::{BiLstm, BiLstmCache, Lstm, LstmCache};
pub use params::{clip_global_norm, ParamSet, ParamView, ParamViewMut};
pub use softmax::{argmax, cross_entropy, softmax, softmax_cross_entropy_grad, PROB_FLOOR};
pub use tensor::{dot, ensure_finite, Matrix};

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::TrainConfig;
use crate::datapipe::ReplyPair;
use crate::nncore::{
    clip_global_norm, cross_entropy, dot, embedding_sum, embedding_sum_backward, softmax,
    softmax_cross_entropy_grad, AdamConfig, AdamState, ParamSet,
};
use crate::ranker::{Model, ModelConfig, ModelParams};
use crate::textproc::{BagOfNGrams, NGramVocab};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct PretrainOutcome {
    pub model: Model,
    /// Mean batch loss per epoch.
    pub epoch_losses: Vec<f64>,
}

struct FeaturizedPair {
    context: BagOfNGrams,
    reply: BagOfNGrams,
}

/// Mean in-batch ranking loss: row `i` of `S = H Gᵀ` should pick column `i`.
/// Gradients are added into `grads` when given.
fn batch_loss(model: &Model, batch: &[&FeaturizedPair], grads: Option<&mut ModelParams>) -> Result<f64> {
    let p = &model.params;
    let b = batch.len();
    let mut q_caches = Vec::with_capacity(b);
    let mut c_caches = Vec::with_capacity(b);
    for pair in batch {
        q_caches.push(p.question_tower.forward(&embedding_sum(&pair.context.ids, &p.embedding)?)?);
        c_caches.push(p.candidate_tower.forward(&embedding_sum(&pair.reply.ids, &p.embedding)?)?);
    }
    let dim = q_caches[0].output().len();
    let mut d_h = vec![vec![0.0; dim]; b];
    let mut d_g = vec![vec![0.0; dim]; b];
    let mut total = 0.0;
    for i in 0..b {
        let h = q_caches[i].output();
        let row: Vec<f64> = c_caches.iter().map(|c| dot(h, c.output())).collect();
        let probs = softmax(&row)?;
        total += cross_entropy(&probs, i)?;
        let d_row = softmax_cross_entropy_grad(&probs, i);
        for (j, c) in c_caches.iter().enumerate() {
            let w = d_row[j] / b as f64;
            d_h[i].iter_mut().zip(c.output()).for_each(|(a, g)| *a += w * g);
            d_g[j].iter_mut().zip(h).for_each(|(a, hv)| *a += w * hv);
        }
    }
    if let Some(grads) = grads {
        for (i, pair) in batch.iter().enumerate() {
            let dq = p.question_tower.backward(&q_caches[i], &d_h[i], &mut grads.question_tower);
            embedding_sum_backward(&pair.context.ids, &dq, &mut grads.embedding);
            let dc = p.candidate_tower.backward(&c_caches[i], &d_g[i], &mut grads.candidate_tower);
            embedding_sum_backward(&pair.reply.ids, &dc, &mut grads.embedding);
        }
    }
    Ok(total / b as f64)
}

fn featurize_pairs(model: &Model, pairs: &[ReplyPair]) -> Vec<FeaturizedPair> {
    pairs
        .iter()
        .map(|p| FeaturizedPair { context: model.featurize_text(&p.context), reply: model.featurize_text(&p.reply) })
        .collect()
}

/// In-batch loss of a baseline model on `pairs` taken as one batch.
pub fn pretrain_batch_loss(model: &Model, pairs: &[ReplyPair]) -> Result<f64> {
    if model.config.has_variant_layers() {
        return Err(Error::Config("reply pre-training uses the baseline architecture".into()));
    }
    if pairs.len() < 2 {
        return Err(Error::Config("an in-batch loss needs at least 2 pairs".into()));
    }
    let feats = featurize_pairs(model, pairs);
    let refs: Vec<&FeaturizedPair> = feats.iter().collect();
    batch_loss(model, &refs, None)
}

/// Train the embedding table and both towers to rank each reply above the
/// other replies in its batch.
///
/// Optional encoders are switched off; the returned model has the baseline
/// architecture with `model_config`'s sizes. The no-answer vector is left
/// at its initial value.
pub fn pretrain(
    pairs: &[ReplyPair],
    vocab: NGramVocab,
    model_config: &ModelConfig,
    config: &TrainConfig,
) -> Result<PretrainOutcome> {
    config.validate()?;
    if config.batch_size < 2 {
        return Err(Error::Config("pre-training needs batch_size >= 2 for in-batch negatives".into()));
    }
    if pairs.len() < config.batch_size {
        return Err(Error::Config(format!(
            "{} reply pairs is fewer than one batch of {}",
            pairs.len(),
            config.batch_size
        )));
    }
    let model_config = ModelConfig { pretrained: false, ..model_config.baseline() };
    let mut model = Model::new(model_config, vocab, config.seed)?;
    let feats = featurize_pairs(&model, pairs);
    let mut order: Vec<usize> = (0..feats.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5052_4554_5241_494e);
    let mut adam = AdamState::new(AdamConfig { lr: config.lr, ..AdamConfig::default() });
    let mut grads = model.params.zeros_like();
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut sum = 0.0;
        let mut batches = 0;
        for chunk in order.chunks_exact(config.batch_size) {
            let batch: Vec<&FeaturizedPair> = chunk.iter().map(|&i| &feats[i]).collect();
            grads.fill_zero();
            sum += batch_loss(&model, &batch, Some(&mut grads))?;
            batches += 1;
            clip_global_norm(&mut grads, config.clip_norm);
            adam.step(&mut model.params, &grads)?;
        }
        epoch_losses.push(sum / batches as f64);
    }
    Ok(PretrainOutcome { model, epoch_losses })
}

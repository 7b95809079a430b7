use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::TrainConfig;
use crate::datapipe::QAExample;
use crate::evalkit::{evaluate, EvalReport};
use crate::nncore::{clip_global_norm, AdamConfig, AdamState, ParamSet};
use crate::ranker::{Model, QAInput};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    /// Mean example loss over the epoch's batches.
    pub train_loss: f64,
    pub dev_overall: Option<f64>,
    pub dev_positive: Option<f64>,
    pub dev_trigger: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct FinetuneOutcome {
    /// Parameters from the epoch with the best dev Overall Accuracy
    /// (the last epoch when there is no dev set).
    pub model: Model,
    pub best_epoch: usize,
    pub history: Vec<EpochStats>,
    pub stopped_early: bool,
}

fn dev_report(model: &Model, dev: &[QAExample]) -> Result<Option<EvalReport>> {
    if dev.is_empty() {
        Ok(None)
    } else {
        evaluate(model, dev).map(Some)
    }
}

/// Fine-tune `init` on `train`, evaluating on `dev` after every epoch.
///
/// Each step averages example gradients over a shuffled batch, clips the
/// global norm and applies Adam. Training stops after `patience` epochs
/// without a dev improvement.
pub fn finetune(train: &[QAExample], dev: &[QAExample], init: Model, config: &TrainConfig) -> Result<FinetuneOutcome> {
    config.validate()?;
    if train.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    for (name, set) in [("train", train), ("dev", dev)] {
        for (i, ex) in set.iter().enumerate() {
            ex.validate().map_err(|e| Error::Contract(format!("{name} example {i} ({}): {e}", ex.listing_id)))?;
        }
    }
    let mut model = init;
    let inputs: Vec<(QAInput, usize)> = train.iter().map(|ex| (ex.to_input(&model.config), ex.label)).collect();
    for (i, (input, label)) in inputs.iter().enumerate() {
        if *label > input.candidates.len() {
            return Err(Error::Contract(format!(
                "train example {i} ({}): label {label} beyond the {} candidates kept by the model",
                train[i].listing_id,
                input.candidates.len()
            )));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..inputs.len()).collect();
    let mut adam = AdamState::new(AdamConfig { lr: config.lr, ..AdamConfig::default() });
    let mut batch_grads = model.params.zeros_like();

    let mut best: Option<(f64, Model, usize)> = None;
    let mut history = Vec::with_capacity(config.epochs);
    let mut since_best = 0;
    let mut stopped_early = false;
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            batch_grads.fill_zero();
            for &i in chunk {
                let (input, label) = &inputs[i];
                loss_sum += model.loss_and_grad(input, *label, &mut batch_grads)?;
            }
            batch_grads.scale(1.0 / chunk.len() as f64);
            clip_global_norm(&mut batch_grads, config.clip_norm);
            adam.step(&mut model.params, &batch_grads)?;
        }
        let report = dev_report(&model, dev)?;
        let dev_overall = report.as_ref().and_then(|r| r.overall_acc);
        history.push(EpochStats {
            epoch,
            train_loss: loss_sum / inputs.len() as f64,
            dev_overall,
            dev_positive: report.as_ref().and_then(|r| r.positive_acc),
            dev_trigger: report.as_ref().and_then(|r| r.trigger_acc),
        });
        let score = dev_overall.unwrap_or(f64::NEG_INFINITY);
        let improved = match &best {
            None => true,
            Some((b, _, _)) => score > *b || dev_overall.is_none(),
        };
        if improved {
            best = Some((score, model.clone(), epoch));
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= config.patience {
                stopped_early = true;
                break;
            }
        }
    }
    let (model, best_epoch) = match best {
        Some((_, m, e)) => (m, e),
        None => (model, 0),
    };
    Ok(FinetuneOutcome { model, best_epoch, history, stopped_early })
}
